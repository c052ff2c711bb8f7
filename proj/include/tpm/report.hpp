#pragma once

// report.json and plot-ready CSV curves.
//
// Curves have the columns abscissa,value,stderr_lo,stderr_hi where the last
// two are value -/+ one standard error (equal to value for exact curves).
// Numbers are written in shortest round-trip form.

#include <json.hpp>

#include <array>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tpm/certify.hpp"
#include "tpm/errors.hpp"

namespace tpm {

using ordered_json = nlohmann::ordered_json;

inline constexpr std::string_view kCurveHeader = "abscissa,value,stderr_lo,stderr_hi";

struct CurvePoint {
    double abscissa = 0.0;
    double value = 0.0;
    double std_error = 0.0;
};

using Curve = std::vector<CurvePoint>;

inline std::string format_double(double v) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc()) throw ValidationError("format_double: conversion failed");
    return std::string(buf.data(), ptr);
}

namespace detail {

inline ordered_json optional_number(const std::optional<double> &v) { return v ? ordered_json(*v) : ordered_json(); }

inline std::optional<double> read_optional(const ordered_json &j, const char *key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}

}  // namespace detail

inline ordered_json report_to_json(const CertReport &r) {
    const StdErrors se = r.std_errors.value_or(StdErrors{});
    ordered_json j;
    j["gamma"] = r.gamma;
    j["gamma_stderr"] = detail::optional_number(se.gamma);
    j["pearl_delta"] = r.pearl_delta;
    j["acde"] = detail::optional_number(r.acde);
    j["chsh"] = r.chsh ? ordered_json::array({r.chsh->first, r.chsh->second}) : ordered_json();
    j["fidelity_lb"] = detail::optional_number(r.fidelity_lb);
    j["verdict_nonclassical"] = r.verdict_nonclassical;
    j["verdict_crosstalk_witnessed"] = r.verdict_crosstalk_witnessed;
    ordered_json argmin = ordered_json::object();
    for (std::size_t k = 0; k < 4; ++k) {
        const auto label = response_pair_label(k);
        const auto it = r.argmin_labels.find(label);
        argmin[label] = it != r.argmin_labels.end() ? it->second : std::to_string(r.argmin[k]);
    }
    j["argmin"] = argmin;
    j["seed"] = r.seed ? ordered_json(*r.seed) : ordered_json();
    j["resamples"] = r.resamples;
    j["sigma_k"] = r.sigma_k;
    if (r.std_errors) {
        j["std_errors"] = {{"gamma", detail::optional_number(se.gamma)},
                           {"pearl_delta", detail::optional_number(se.pearl_delta)},
                           {"acde", detail::optional_number(se.acde)}};
    } else {
        j["std_errors"] = nullptr;
    }
    return j;
}

/// Inverse of report_to_json. Setting indices are not stored; only labels.
inline CertReport report_from_json(const ordered_json &j) {
    CertReport r;
    r.gamma = j.at("gamma").get<double>();
    r.pearl_delta = j.at("pearl_delta").get<double>();
    r.acde = detail::read_optional(j, "acde");
    if (!j.at("chsh").is_null()) r.chsh = ChshPair{j.at("chsh")[0].get<double>(), j.at("chsh")[1].get<double>()};
    r.fidelity_lb = detail::read_optional(j, "fidelity_lb");
    r.verdict_nonclassical = j.at("verdict_nonclassical").get<bool>();
    r.verdict_crosstalk_witnessed = j.at("verdict_crosstalk_witnessed").get<bool>();
    for (const auto &[k, v] : j.at("argmin").items()) r.argmin_labels[k] = v.get<std::string>();
    if (!j.at("seed").is_null()) r.seed = j.at("seed").get<std::uint64_t>();
    r.resamples = j.at("resamples").get<std::size_t>();
    r.sigma_k = j.at("sigma_k").get<double>();
    if (!j.at("std_errors").is_null()) {
        const auto &se = j.at("std_errors");
        r.std_errors = StdErrors{detail::read_optional(se, "gamma"), detail::read_optional(se, "pearl_delta"),
                                 detail::read_optional(se, "acde")};
    }
    return r;
}

inline void write_curve_csv(std::ostream &out, const Curve &curve) {
    out << kCurveHeader << '\n';
    for (const auto &p : curve) {
        out << format_double(p.abscissa) << ',' << format_double(p.value) << ','
            << format_double(p.value - p.std_error) << ',' << format_double(p.value + p.std_error) << '\n';
    }
}

namespace detail {

inline void write_file(const std::filesystem::path &path, const std::string &content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace detail

inline void write_text_file(const std::filesystem::path &path, const std::string &content) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
    }
    detail::write_file(path, content);
}

/// Writes report.json and <name>.csv per curve into `out_dir`; returns the
/// written paths.
inline std::vector<std::filesystem::path> emit_report(const std::optional<CertReport> &report,
                                                      const std::map<std::string, Curve> &curves,
                                                      const std::filesystem::path &out_dir) {
    std::vector<std::filesystem::path> written;
    if (report) {
        const auto path = out_dir / "report.json";
        write_text_file(path, report_to_json(*report).dump(2) + "\n");
        written.push_back(path);
    }
    for (const auto &[name, curve] : curves) {
        std::ostringstream csv;
        write_curve_csv(csv, curve);
        const auto path = out_dir / (name + ".csv");
        write_text_file(path, csv.str());
        written.push_back(path);
    }
    return written;
}

}  // namespace tpm
