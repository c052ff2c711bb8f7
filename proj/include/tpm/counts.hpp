#pragma once

// Count tables: CSV ingestion, maximum-likelihood frequencies, and seeded
// multinomial sampling from exact statistics.
//
//   observational:  x,a,b,count
//   interventional: do_a,x,b,count
//
// Duplicate rows are summed, settings keep their order of first appearance,
// and zero cells stay zero.

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "tpm/behavior.hpp"
#include "tpm/errors.hpp"

namespace tpm {

enum class CountKind { observational, interventional };

inline constexpr std::string_view kObservationalHeader = "x,a,b,count";
inline constexpr std::string_view kInterventionalHeader = "do_a,x,b,count";

using CountCell = std::array<std::array<std::uint64_t, 2>, 2>;

/// counts[x][a][b]; for interventional tables `a` is the forced value.
struct CountTable {
    CountKind kind = CountKind::observational;
    std::vector<std::string> settings;
    std::vector<CountCell> counts;

    std::size_t num_rows() const { return 4 * settings.size(); }

    std::uint64_t setting_total(std::size_t x) const {
        const auto &c = counts[x];
        return c[0][0] + c[0][1] + c[1][0] + c[1][1];
    }

    std::size_t index_of(const std::string &label) {
        for (std::size_t x = 0; x < settings.size(); ++x) {
            if (settings[x] == label) return x;
        }
        settings.push_back(label);
        counts.push_back(CountCell{});
        return settings.size() - 1;
    }

    void validate() const {
        if (settings.empty()) throw ValidationError("CountTable: no rows");
        if (counts.size() != settings.size()) throw ValidationError("CountTable: counts/settings size mismatch");
        for (std::size_t x = 0; x < settings.size(); ++x) {
            if (kind == CountKind::observational) {
                if (setting_total(x) == 0) throw ValidationError("CountTable: setting " + settings[x] + " has no shots");
            } else {
                for (int a = 0; a < 2; ++a) {
                    if (counts[x][a][0] + counts[x][a][1] == 0) {
                        throw ValidationError("CountTable: do(a=" + std::to_string(a) + ") at setting " + settings[x] +
                                              " has no shots");
                    }
                }
            }
        }
    }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    const auto first = s.find_first_not_of(ws);
    if (first == std::string_view::npos) return {};
    return s.substr(first, s.find_last_not_of(ws) - first + 1);
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

inline std::string normalized_header(std::string_view line) {
    std::string out;
    for (auto field : split_csv(line)) {
        if (!out.empty()) out += ',';
        out += field;
    }
    return out;
}

inline int parse_bit(std::string_view field, const char *name, std::size_t row) {
    if (field == "0") return 0;
    if (field == "1") return 1;
    throw ParseError(std::string(name) + " must be 0 or 1, got '" + std::string(field) + "'", row);
}

inline std::uint64_t parse_count(std::string_view field, std::size_t row) {
    if (!field.empty() && field.front() == '-') {
        throw ParseError("count must be non-negative, got '" + std::string(field) + "'", row);
    }
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
        throw ParseError("count is not a non-negative integer: '" + std::string(field) + "'", row);
    }
    return value;
}

}  // namespace detail

/// Parses a count table; errors carry the 1-based line number.
inline CountTable parse_counts(std::istream &in) {
    std::string line;
    std::size_t row = 0;
    CountTable table;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++row;
        if (detail::trim(line).empty()) continue;
        if (!have_header) {
            const std::string header = detail::normalized_header(line);
            if (header == kObservationalHeader) {
                table.kind = CountKind::observational;
            } else if (header == kInterventionalHeader) {
                table.kind = CountKind::interventional;
            } else {
                throw ParseError("unknown header '" + header + "', expected '" + std::string(kObservationalHeader) +
                                     "' or '" + std::string(kInterventionalHeader) + "'",
                                 row);
            }
            have_header = true;
            continue;
        }
        const auto fields = detail::split_csv(line);
        if (fields.size() != 4) throw ParseError("expected 4 fields, got " + std::to_string(fields.size()), row);
        const bool obs = table.kind == CountKind::observational;
        const std::string_view label = obs ? fields[0] : fields[1];
        if (label.empty()) throw ParseError("empty setting label", row);
        const int a = detail::parse_bit(obs ? fields[1] : fields[0], obs ? "a" : "do_a", row);
        const int b = detail::parse_bit(fields[2], "b", row);
        const std::uint64_t count = detail::parse_count(fields[3], row);
        table.counts[table.index_of(std::string(label))][a][b] += count;
    }
    if (!have_header) throw ParseError("missing header", row == 0 ? 1 : row);
    table.validate();
    return table;
}

inline CountTable ingest_counts(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open count file '" + path + "'");
    try {
        return parse_counts(in);
    } catch (const ParseError &e) {
        throw ParseError(path + ": " + std::string(e.what()).substr(std::string(e.what()).find(": ") + 2), e.row);
    }
}

inline void write_counts(std::ostream &out, const CountTable &t) {
    const bool obs = t.kind == CountKind::observational;
    out << (obs ? kObservationalHeader : kInterventionalHeader) << '\n';
    for (std::size_t x = 0; x < t.settings.size(); ++x) {
        for (int a = 0; a < 2; ++a) {
            for (int b = 0; b < 2; ++b) {
                if (obs) {
                    out << t.settings[x] << ',' << a << ',' << b << ',' << t.counts[x][a][b] << '\n';
                } else {
                    out << a << ',' << t.settings[x] << ',' << b << ',' << t.counts[x][a][b] << '\n';
                }
            }
        }
    }
}

/// Frequencies count / total per setting.
inline Behavior counts_to_behavior(const CountTable &t) {
    if (t.kind != CountKind::observational) throw ValidationError("counts_to_behavior: observational table expected");
    t.validate();
    Behavior b;
    b.settings = t.settings;
    b.shots.emplace();
    for (std::size_t x = 0; x < t.settings.size(); ++x) {
        const auto total = t.setting_total(x);
        OutcomeTable p{};
        for (int a = 0; a < 2; ++a) {
            for (int bb = 0; bb < 2; ++bb) p[a][bb] = static_cast<double>(t.counts[x][a][bb]) / static_cast<double>(total);
        }
        b.probs.push_back(p);
        b.shots->push_back(total);
    }
    return b;
}

/// Frequencies normalized per (x, do_a).
inline DoTable counts_to_do_table(const CountTable &t) {
    if (t.kind != CountKind::interventional) throw ValidationError("counts_to_do_table: interventional table expected");
    t.validate();
    DoTable d;
    d.settings = t.settings;
    d.shots.emplace();
    for (std::size_t x = 0; x < t.settings.size(); ++x) {
        OutcomeTable p{};
        std::array<std::uint64_t, 2> totals{};
        for (int a = 0; a < 2; ++a) {
            totals[a] = t.counts[x][a][0] + t.counts[x][a][1];
            for (int bb = 0; bb < 2; ++bb) {
                p[a][bb] = static_cast<double>(t.counts[x][a][bb]) / static_cast<double>(totals[a]);
            }
        }
        d.probs.push_back(p);
        d.shots->push_back(totals);
    }
    return d;
}

/// SplitMix64 step; used to derive independent stream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Multinomial draw over `probs` as a chain of binomials.
template <std::size_t N>
std::array<std::uint64_t, N> sample_multinomial(std::uint64_t shots, const std::array<double, N> &probs,
                                                std::mt19937_64 &rng) {
    std::array<std::uint64_t, N> out{};
    std::uint64_t remaining = shots;
    double mass = 1.0;
    for (std::size_t i = 0; i + 1 < N && remaining > 0; ++i) {
        const double p = mass > 0.0 ? std::clamp(probs[i] / mass, 0.0, 1.0) : 0.0;
        std::binomial_distribution<std::uint64_t> draw(remaining, p);
        out[i] = draw(rng);
        remaining -= out[i];
        mass -= probs[i];
    }
    out[N - 1] += remaining;
    return out;
}

/// `shots` draws per setting from P(a, b | x).
inline CountTable sample_counts(const Behavior &b, std::uint64_t shots, std::mt19937_64 &rng) {
    b.validate();
    if (shots == 0) throw ValidationError("sample_counts: shots must be positive");
    CountTable t;
    t.kind = CountKind::observational;
    t.settings = b.settings;
    for (const auto &p : b.probs) {
        const auto draw = sample_multinomial<4>(shots, {p[0][0], p[0][1], p[1][0], p[1][1]}, rng);
        t.counts.push_back({{{draw[0], draw[1]}, {draw[2], draw[3]}}});
    }
    return t;
}

/// `shots` draws per (x, do_a) from P(b | do(a, x)).
inline CountTable sample_do_counts(const DoTable &d, std::uint64_t shots, std::mt19937_64 &rng) {
    d.validate();
    if (!d.x_indexed()) throw ValidationError("sample_do_counts: x-indexed table expected");
    if (shots == 0) throw ValidationError("sample_do_counts: shots must be positive");
    CountTable t;
    t.kind = CountKind::interventional;
    t.settings = d.settings;
    for (const auto &p : d.probs) {
        CountCell cell{};
        for (int a = 0; a < 2; ++a) {
            const auto draw = sample_multinomial<2>(shots, {p[a][0], p[a][1]}, rng);
            cell[a] = {draw[0], draw[1]};
        }
        t.counts.push_back(cell);
    }
    return t;
}

}  // namespace tpm
