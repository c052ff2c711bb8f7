#pragma once

// Device-independent functionals of binary-outcome behaviors.
//
//   Gamma  = sum_{b0,b1} min_x [P(0,b0|x) + P(1,b1|x)]     classical: >= 1
//   Delta  = max_a sum_b max_x P(a,b|x)                    no crosstalk: <= 1
//   ACDE   = sup |P(b|do(a,x)) - P(b|do(a,x'))|
//
// Gamma + 2 ACDE >= 1 holds for every classical model with crosstalk; quantum
// processes reach Gamma = 2 - sqrt(2) with ACDE = 0.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include "tpm/behavior.hpp"
#include "tpm/errors.hpp"

namespace tpm {

inline const double kSqrt2 = std::sqrt(2.0);
inline const double kQuantumGammaBound = 2.0 - std::sqrt(2.0);
/// Self-testing constant of the CHSH fidelity bound, (8 + 7 sqrt 2) / 17.
inline const double kSelfTestConstant = (8.0 + 7.0 * std::sqrt(2.0)) / 17.0;

/// Ties within this margin resolve to the smallest setting index.
inline constexpr double kArgminTieTol = 1e-12;

/// Order of the (b0, b1) pairs everywhere below: 00, 01, 10, 11.
inline constexpr std::array<std::pair<int, int>, 4> kResponsePairs = {{{0, 0}, {0, 1}, {1, 0}, {1, 1}}};

inline std::string response_pair_label(std::size_t k) {
    return std::to_string(kResponsePairs[k].first) + std::to_string(kResponsePairs[k].second);
}

using ArgminMap = std::array<std::size_t, 4>;

struct GammaResult {
    double value = 0.0;
    ArgminMap argmin{};
    std::array<double, 4> minima{};  // per (b0, b1)
};

inline double gamma_term(const Behavior &b, std::size_t x, int b0, int b1) { return b(x, 0, b0) + b(x, 1, b1); }

inline GammaResult gamma_functional(const Behavior &b) {
    b.validate();
    GammaResult out;
    for (std::size_t k = 0; k < 4; ++k) {
        const auto [b0, b1] = kResponsePairs[k];
        double best = gamma_term(b, 0, b0, b1);
        for (std::size_t x = 1; x < b.num_settings(); ++x) best = std::min(best, gamma_term(b, x, b0, b1));
        std::size_t arg = 0;
        while (gamma_term(b, arg, b0, b1) > best + kArgminTieTol) ++arg;
        out.minima[k] = best;
        out.argmin[k] = arg;
        out.value += best;
    }
    return out;
}

/// Gamma evaluated at a fixed choice of setting per (b0, b1).
inline double gamma_at(const Behavior &b, const ArgminMap &argmin) {
    double value = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
        if (argmin[k] >= b.num_settings()) throw ValidationError("gamma_at: argmin setting out of range");
        value += gamma_term(b, argmin[k], kResponsePairs[k].first, kResponsePairs[k].second);
    }
    return value;
}

inline double pearl_delta(const Behavior &b) {
    b.validate();
    double best = 0.0;
    for (int a = 0; a < 2; ++a) {
        double sum = 0.0;
        for (int bb = 0; bb < 2; ++bb) {
            double sup = b(0, a, bb);
            for (std::size_t x = 1; x < b.num_settings(); ++x) sup = std::max(sup, b(x, a, bb));
            sum += sup;
        }
        best = std::max(best, sum);
    }
    return best;
}

inline double acde(const DoTable &d) {
    d.validate();
    if (!d.x_indexed()) return 0.0;
    double sup = 0.0;
    for (int a = 0; a < 2; ++a) {
        for (int bb = 0; bb < 2; ++bb) {
            for (std::size_t x = 0; x < d.num_columns(); ++x) {
                for (std::size_t y = x + 1; y < d.num_columns(); ++y) {
                    sup = std::max(sup, std::abs(d(x, a, bb) - d(y, a, bb)));
                }
            }
        }
    }
    return sup;
}

inline double corrected_lhs(const Behavior &b, const DoTable &d) { return gamma_functional(b).value + 2.0 * acde(d); }

/// Post-selected correlator 2 (-1)^y [P(y,0|x) - P(y,1|x)]. Under the Bell
/// mapping this is <A_x B_y> + (-1)^y <B_y>; the marginal parts cancel inside
/// each CHSH score below.
inline double postselected_correlator(const Behavior &b, std::size_t x, int y) {
    const double sign = y == 0 ? 1.0 : -1.0;
    return 2.0 * sign * (b(x, y, 0) - b(x, y, 1));
}

struct ChshPair {
    double first = 0.0;   // built from the (0,0) and (1,1) minimizers
    double second = 0.0;  // built from the (0,1) and (1,0) minimizers
    double sum() const { return first + second; }
};

/// Two CHSH scores with Gamma = 2 - (first + second) / 4 at the given argmin.
inline ChshPair chsh_decomposition(const Behavior &b, const ArgminMap &argmin) {
    b.validate();
    if (b.num_settings() < 2) throw ValidationError("chsh_decomposition: needs at least two settings");
    for (auto x : argmin) {
        if (x >= b.num_settings()) throw ValidationError("chsh_decomposition: argmin setting out of range");
    }
    const auto e = [&](std::size_t x, int y) { return postselected_correlator(b, x, y); };
    const std::size_t x00 = argmin[0], x01 = argmin[1], x10 = argmin[2], x11 = argmin[3];
    ChshPair out;
    out.first = -e(x00, 0) + e(x00, 1) + e(x11, 0) - e(x11, 1);
    out.second = -e(x01, 0) - e(x01, 1) + e(x10, 0) + e(x10, 1);
    return out;
}

inline constexpr double kFidelityDomainTol = 1e-9;

/// Lower bound on the memory fidelity implied by an observed Gamma,
/// (1 - (Gamma - 2 + S_K) / (sqrt 2 - S_K)) / 2 clamped to [0, 1].
inline double fidelity_lower_bound(double gamma) {
    if (!(gamma >= kQuantumGammaBound - kFidelityDomainTol && gamma <= 2.0 + kFidelityDomainTol)) {
        throw DomainError("fidelity_lower_bound: gamma must lie in [2 - sqrt 2, 2]");
    }
    const double raw = 0.5 * (1.0 - (gamma - 2.0 + kSelfTestConstant) / (kSqrt2 - kSelfTestConstant));
    return std::clamp(raw, 0.0, 1.0);
}

struct StdErrors {
    std::optional<double> gamma;
    std::optional<double> pearl_delta;
    std::optional<double> acde;
};

struct CertOptions {
    double sigma_k = 3.0;
    std::optional<StdErrors> std_errors;
    std::optional<std::uint64_t> seed;
    std::size_t resamples = 0;
};

struct CertReport {
    double gamma = 0.0;
    ArgminMap argmin{};
    std::map<std::string, std::string> argmin_labels;  // "b0b1" -> setting label
    double pearl_delta = 0.0;
    std::optional<double> acde;
    std::optional<ChshPair> chsh;
    std::optional<double> fidelity_lb;
    bool verdict_nonclassical = false;
    bool verdict_crosstalk_witnessed = false;
    std::optional<StdErrors> std_errors;
    double sigma_k = 3.0;
    std::optional<std::uint64_t> seed;
    std::size_t resamples = 0;
};

/// Evaluates every functional and the k-sigma verdicts. When ACDE is present
/// the nonclassicality test uses Gamma + 2 ACDE with the errors combined in
/// quadrature; missing errors count as zero.
inline CertReport certify(const Behavior &b, const DoTable *d = nullptr, const CertOptions &opt = {}) {
    CertReport r;
    const auto g = gamma_functional(b);
    r.gamma = g.value;
    r.argmin = g.argmin;
    for (std::size_t k = 0; k < 4; ++k) r.argmin_labels[response_pair_label(k)] = b.settings[g.argmin[k]];
    r.pearl_delta = pearl_delta(b);
    if (d) r.acde = acde(*d);
    if (b.num_settings() >= 2) r.chsh = chsh_decomposition(b, g.argmin);
    if (r.gamma >= kQuantumGammaBound - kFidelityDomainTol) r.fidelity_lb = fidelity_lower_bound(r.gamma);
    r.std_errors = opt.std_errors;
    r.sigma_k = opt.sigma_k;
    r.seed = opt.seed;
    r.resamples = opt.resamples;

    const StdErrors se = opt.std_errors.value_or(StdErrors{});
    const double sg = se.gamma.value_or(0.0);
    if (r.acde) {
        const double sa = se.acde.value_or(0.0);
        const double sigma = std::sqrt(sg * sg + 4.0 * sa * sa);
        r.verdict_nonclassical = r.gamma + 2.0 * *r.acde < 1.0 - opt.sigma_k * sigma;
    } else {
        r.verdict_nonclassical = r.gamma < 1.0 - opt.sigma_k * sg;
    }
    r.verdict_crosstalk_witnessed = r.pearl_delta > 1.0 + opt.sigma_k * se.pearl_delta.value_or(0.0);
    return r;
}

}  // namespace tpm
