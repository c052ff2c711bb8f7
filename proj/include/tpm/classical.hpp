#pragma once

// Deterministic classical causal strategies for the instrumental scenario
// X -> A -> B with a hidden common cause, optionally with a direct X -> B
// influence (crosstalk). Mixtures of these vertices are exactly the
// classical behaviors, so vertex enumeration gives exact classical bounds.

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "tpm/behavior.hpp"
#include "tpm/certify.hpp"
#include "tpm/errors.hpp"

namespace tpm {

inline constexpr std::size_t kMaxClassicalSettings = 8;
/// enumerate_strategies materializes at most this many vertices; use
/// for_each_strategy beyond it.
inline constexpr std::uint64_t kMaxMaterializedStrategies = std::uint64_t{1} << 20;
inline constexpr std::uint64_t kClassicalDefaultSeed = 20240601;

/// One vertex: a = a(x), b = b(a) or b = b(a, x). Responses are bit masks;
/// bit x of `a_bits` is a(x), bit a (or a * |X| + x with crosstalk) of
/// `b_bits` is b.
struct ClassicalStrategy {
    std::size_t num_settings = 0;
    bool crosstalk = false;
    std::uint32_t a_bits = 0;
    std::uint64_t b_bits = 0;

    int a(std::size_t x) const { return static_cast<int>((a_bits >> x) & 1U); }
    int b(int a_value, std::size_t x) const {
        const std::size_t bit = crosstalk ? static_cast<std::size_t>(a_value) * num_settings + x
                                          : static_cast<std::size_t>(a_value);
        return static_cast<int>((b_bits >> bit) & 1U);
    }
};

inline std::vector<std::string> numbered_settings(std::size_t n) {
    std::vector<std::string> labels;
    for (std::size_t x = 0; x < n; ++x) labels.push_back("x" + std::to_string(x));
    return labels;
}

namespace detail {

inline void require_classical_alphabet(std::size_t n) {
    if (n == 0) throw ValidationError("classical: setting alphabet must be non-empty");
    if (n > kMaxClassicalSettings) throw ResourceError("classical: at most 8 settings can be enumerated");
}

inline std::size_t b_response_bits(std::size_t n, bool crosstalk) { return crosstalk ? 2 * n : 2; }

}  // namespace detail

inline std::uint64_t strategy_count(std::size_t num_settings, bool crosstalk) {
    detail::require_classical_alphabet(num_settings);
    return (std::uint64_t{1} << num_settings) << detail::b_response_bits(num_settings, crosstalk);
}

/// Visits every vertex once, in (a_bits, b_bits) lexicographic order.
inline void for_each_strategy(std::size_t num_settings, bool crosstalk,
                              const std::function<void(const ClassicalStrategy &)> &visit) {
    detail::require_classical_alphabet(num_settings);
    const std::uint64_t a_count = std::uint64_t{1} << num_settings;
    const std::uint64_t b_count = std::uint64_t{1} << detail::b_response_bits(num_settings, crosstalk);
    ClassicalStrategy s{num_settings, crosstalk, 0, 0};
    for (std::uint64_t ab = 0; ab < a_count; ++ab) {
        s.a_bits = static_cast<std::uint32_t>(ab);
        for (std::uint64_t bb = 0; bb < b_count; ++bb) {
            s.b_bits = bb;
            visit(s);
        }
    }
}

inline std::vector<ClassicalStrategy> enumerate_strategies(std::size_t num_settings, bool crosstalk) {
    const std::uint64_t count = strategy_count(num_settings, crosstalk);
    if (count > kMaxMaterializedStrategies) {
        throw ResourceError("enumerate_strategies: " + std::to_string(count) +
                            " vertices; use for_each_strategy instead");
    }
    std::vector<ClassicalStrategy> out;
    out.reserve(count);
    for_each_strategy(num_settings, crosstalk, [&](const ClassicalStrategy &s) { out.push_back(s); });
    return out;
}

/// Deterministic P(a, b | x) and P(b | do(a, x)). The do-table drops the x
/// index when the strategy has no crosstalk.
inline std::pair<Behavior, DoTable> strategy_behavior(const ClassicalStrategy &s) {
    detail::require_classical_alphabet(s.num_settings);
    Behavior b;
    b.settings = numbered_settings(s.num_settings);
    b.probs.assign(s.num_settings, OutcomeTable{});
    for (std::size_t x = 0; x < s.num_settings; ++x) {
        const int a = s.a(x);
        b.probs[x][a][s.b(a, x)] = 1.0;
    }
    DoTable d;
    const std::size_t columns = s.crosstalk ? s.num_settings : 1;
    if (s.crosstalk) d.settings = b.settings;
    d.probs.assign(columns, OutcomeTable{});
    for (std::size_t x = 0; x < columns; ++x) {
        for (int a = 0; a < 2; ++a) d.probs[x][a][s.b(a, x)] = 1.0;
    }
    return {std::move(b), std::move(d)};
}

/// Exact minimum of Gamma over no-crosstalk classical behaviors.
inline double classical_minimum_gamma(std::size_t num_settings) {
    double best = std::numeric_limits<double>::infinity();
    for_each_strategy(num_settings, false, [&](const ClassicalStrategy &s) {
        best = std::min(best, gamma_functional(strategy_behavior(s).first).value);
    });
    return best;
}

/// Minimum of Gamma + 2 ACDE over the given vertices.
inline double check_corrected_bound(const std::vector<ClassicalStrategy> &strategies) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto &s : strategies) {
        const auto [b, d] = strategy_behavior(s);
        best = std::min(best, corrected_lhs(b, d));
    }
    return best;
}

/// Same minimum over every vertex of the alphabet, without materializing them.
inline double corrected_bound_minimum(std::size_t num_settings, bool crosstalk) {
    double best = std::numeric_limits<double>::infinity();
    for_each_strategy(num_settings, crosstalk, [&](const ClassicalStrategy &s) {
        const auto [b, d] = strategy_behavior(s);
        best = std::min(best, corrected_lhs(b, d));
    });
    return best;
}

inline double maximum_pearl_delta(std::size_t num_settings, bool crosstalk) {
    double best = 0.0;
    for_each_strategy(num_settings, crosstalk, [&](const ClassicalStrategy &s) {
        best = std::max(best, pearl_delta(strategy_behavior(s).first));
    });
    return best;
}

/// Statistics of a convex mixture of vertices over one alphabet: the observed
/// behavior and the joint law of the potential outcomes (B_do(0), B_do(1)).
/// Crosstalk vertices have no x-free potential outcome; the one at setting 0
/// is used, which is what lets them violate the instrumental bounds.
struct MixtureStatistics {
    Behavior behavior;
    std::array<double, 4> potential_joint{};  // indexed like kResponsePairs

    double potential_marginal(int a, int b) const {
        double p = 0.0;
        for (std::size_t k = 0; k < 4; ++k) {
            const int bk = a == 0 ? kResponsePairs[k].first : kResponsePairs[k].second;
            if (bk == b) p += potential_joint[k];
        }
        return p;
    }
};

inline MixtureStatistics mixture_statistics(const std::vector<ClassicalStrategy> &strategies,
                                            const std::vector<double> &weights) {
    if (strategies.empty() || strategies.size() != weights.size()) {
        throw ValidationError("mixture_statistics: strategies and weights must be non-empty and equal length");
    }
    const std::size_t n = strategies.front().num_settings;
    MixtureStatistics m;
    m.behavior.settings = numbered_settings(n);
    m.behavior.probs.assign(n, OutcomeTable{});
    for (std::size_t i = 0; i < strategies.size(); ++i) {
        const auto &s = strategies[i];
        if (s.num_settings != n) throw ValidationError("mixture_statistics: mixed setting alphabets");
        const double w = weights[i];
        for (std::size_t x = 0; x < n; ++x) {
            const int a = s.a(x);
            m.behavior.probs[x][a][s.b(a, x)] += w;
        }
        const int b0 = s.b(0, 0), b1 = s.b(1, 0);
        m.potential_joint[static_cast<std::size_t>(2 * b0 + b1)] += w;
    }
    return m;
}

/// Both instrumental lemma inequalities within `tol`:
///   P(B_do(a) = b) >= sup_x P(a, b | x)
///   P(B_do(0) = b0, B_do(1) = b1) <= inf_x [P(0, b0 | x) + P(1, b1 | x)]
inline bool instrumental_lemma_holds(const MixtureStatistics &m, double tol = 1e-12) {
    const Behavior &b = m.behavior;
    for (int a = 0; a < 2; ++a) {
        for (int bb = 0; bb < 2; ++bb) {
            for (std::size_t x = 0; x < b.num_settings(); ++x) {
                if (m.potential_marginal(a, bb) < b(x, a, bb) - tol) return false;
            }
        }
    }
    for (std::size_t k = 0; k < 4; ++k) {
        const auto [b0, b1] = kResponsePairs[k];
        for (std::size_t x = 0; x < b.num_settings(); ++x) {
            if (m.potential_joint[k] > gamma_term(b, x, b0, b1) + tol) return false;
        }
    }
    return true;
}

/// Checks the lemma on `s` alone and on `mixtures` random convex combinations
/// of `s` with up to three random vertices of the same kind (flat Dirichlet
/// weights). Deterministic given `seed`.
inline bool lemma1_check(const ClassicalStrategy &s, std::size_t mixtures,
                         std::uint64_t seed = kClassicalDefaultSeed) {
    detail::require_classical_alphabet(s.num_settings);
    if (!instrumental_lemma_holds(mixture_statistics({s}, {1.0}))) return false;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::uint64_t> a_pick(0, (std::uint64_t{1} << s.num_settings) - 1);
    std::uniform_int_distribution<std::uint64_t> b_pick(
        0, (std::uint64_t{1} << detail::b_response_bits(s.num_settings, s.crosstalk)) - 1);
    std::uniform_int_distribution<int> extra(1, 3);
    std::exponential_distribution<double> gamma1(1.0);
    for (std::size_t m = 0; m < mixtures; ++m) {
        std::vector<ClassicalStrategy> parts = {s};
        const int k = extra(rng);
        for (int i = 0; i < k; ++i) {
            parts.push_back({s.num_settings, s.crosstalk, static_cast<std::uint32_t>(a_pick(rng)), b_pick(rng)});
        }
        std::vector<double> w(parts.size());
        double total = 0.0;
        for (auto &wi : w) total += (wi = gamma1(rng));
        for (auto &wi : w) wi /= total;
        if (!instrumental_lemma_holds(mixture_statistics(parts, w))) return false;
    }
    return true;
}

}  // namespace tpm
