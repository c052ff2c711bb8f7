#pragma once

// Measurement assemblages induced on the memory by an interaction, and the
// closed-form joint-measurability criterion for pairs of binary qubit POVMs.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "tpm/errors.hpp"
#include "tpm/linalg.hpp"
#include "tpm/process.hpp"

namespace tpm {

/// Effect (1/2)[(1 + gamma) id + r . sigma].
struct QubitEffectParams {
    double gamma_bias = 0.0;
    Bloch bloch{};

    double bloch_norm() const { return std::hypot(bloch[0], bloch[1], bloch[2]); }

    ComplexMatrix effect() const {
        return 0.5 * ((1.0 + gamma_bias) * qubit::identity() + qubit::bloch_observable(bloch));
    }

    /// Effect and complement positive: |r| <= 1 + gamma and |r| <= 1 - gamma.
    void validate(double tol = kHermitianTol) const {
        const double n = bloch_norm();
        if (n > 1.0 + gamma_bias + tol || n > 1.0 - gamma_bias + tol) {
            throw ValidationError("QubitEffectParams: effect or its complement is not positive");
        }
    }
};

inline QubitEffectParams effect_params(const ComplexMatrix &effect) {
    if (effect.rows() != 2 || effect.cols() != 2) throw DimensionError("effect_params: 2x2 effect expected");
    require_hermitian(effect, "effect_params");
    return {real_trace(effect) - 1.0, qubit::bloch_vector(effect)};
}

/// G[a][b], a binary POVM on the memory for each preparation a.
struct Assemblage {
    std::array<BinaryPovm, 2> effects;

    void validate(double tol = 1e-9) const {
        for (const auto &povm : effects) require_binary_povm(povm, "Assemblage", tol);
    }
};

/// G_{b|a} = Tr_A[U^dagger (F_b (x) id) U (rho_a (x) id)] with U on A (x) E.
inline Assemblage induced_assemblage(const ComplexMatrix &u, const std::array<ComplexMatrix, 2> &repreparations,
                                     const BinaryPovm &f) {
    if (u.rows() != 4 || u.cols() != 4) throw DimensionError("induced_assemblage: u must be 4x4");
    if (!is_unitary(u)) throw ValidationError("induced_assemblage: u is not unitary");
    require_binary_povm(f, "induced_assemblage final POVM");
    const TensorLayout two{{2, 2}};
    Assemblage g;
    for (int a = 0; a < 2; ++a) {
        if (repreparations[a].rows() != 2) throw DimensionError("induced_assemblage: qubit repreparations expected");
        require_density(repreparations[a], "induced_assemblage repreparation");
        const ComplexMatrix prep = kron(repreparations[a], qubit::identity());
        for (int b = 0; b < 2; ++b) {
            const ComplexMatrix heis = u.adjoint() * kron(f[b], qubit::identity()) * u;
            ComplexMatrix e = partial_trace(heis * prep, two, {0});
            g.effects[a][b] = 0.5 * (e + e.adjoint());
        }
    }
    return g;
}

/// (1/2)[sqrt((1 + gamma)^2 - |r|^2) + sqrt((1 - gamma)^2 - |r|^2)].
inline double ellipsoid_factor(const QubitEffectParams &p) {
    const double n2 = p.bloch_norm() * p.bloch_norm();
    const double plus = (1.0 + p.gamma_bias) * (1.0 + p.gamma_bias) - n2;
    const double minus = (1.0 - p.gamma_bias) * (1.0 - p.gamma_bias) - n2;
    return 0.5 * (std::sqrt(std::max(plus, 0.0)) + std::sqrt(std::max(minus, 0.0)));
}

/// Below this an effect counts as sharp, and a bias below it as zero.
inline constexpr double kSharpEffectTol = 1e-12;
inline constexpr double kJointMeasurabilityTol = 1e-10;

struct JmResult {
    bool compatible = false;
    double value = 0.0;
};

namespace detail {

inline double bias_ratio(const QubitEffectParams &p, double factor) {
    if (factor < kSharpEffectTol) {
        if (std::abs(p.gamma_bias) < kSharpEffectTol) return 0.0;
        throw DomainError("jointly_measurable: sharp effect with nonzero bias");
    }
    return p.gamma_bias * p.gamma_bias / (factor * factor);
}

}  // namespace detail

/// (r0 . r1 - g0 g1)^2 - (1 - F0^2 - F1^2)(1 - g0^2/F0^2 - g1^2/F1^2) >= 0
/// iff the two binary POVMs are jointly measurable. Symmetric in its arguments.
inline JmResult jointly_measurable(const QubitEffectParams &p, const QubitEffectParams &q) {
    p.validate();
    q.validate();
    const double fp = ellipsoid_factor(p), fq = ellipsoid_factor(q);
    const double overlap =
        p.bloch[0] * q.bloch[0] + p.bloch[1] * q.bloch[1] + p.bloch[2] * q.bloch[2] - p.gamma_bias * q.gamma_bias;
    const double value = overlap * overlap - (1.0 - (fp * fp + fq * fq)) *
                                                 (1.0 - (detail::bias_ratio(p, fp) + detail::bias_ratio(q, fq)));
    return {value >= -kJointMeasurabilityTol, value};
}

inline JmResult jointly_measurable(const Assemblage &g) {
    return jointly_measurable(effect_params(g.effects[0][0]), effect_params(g.effects[1][0]));
}

/// Angles of the partial-SWAP compatibility scan: sigma_0 = |0><0|,
/// sigma_1 = |theta_s, phi_s>, F_0 = |theta_e, phi_e>.
struct SwapAngles {
    double theta_s = 0.0;
    double theta_e = 0.0;
    double phi_s = 0.0;
    double phi_e = 0.0;
};

/// Parameters of G_{0|0} and G_{0|1} for the partial-SWAP assemblage.
inline std::array<QubitEffectParams, 2> partial_swap_effect_params(double alpha, const SwapAngles &w) {
    const double c = std::cos(alpha / 2.0), s = std::sin(alpha / 2.0);
    const double cte = std::cos(w.theta_e), ste = std::sin(w.theta_e);
    const double cts = std::cos(w.theta_s), sts = std::sin(w.theta_s);
    const double cpe = std::cos(w.phi_e), spe = std::sin(w.phi_e);
    const double cps = std::cos(w.phi_s), sps = std::sin(w.phi_s);
    QubitEffectParams g0, g1;
    g0.gamma_bias = c * c * cte;
    g0.bloch = {s * ste * std::sin(alpha / 2.0 + w.phi_e), -s * ste * std::cos(alpha / 2.0 + w.phi_e), s * s * cte};
    g1.gamma_bias = c * c * (cte * cts + std::cos(w.phi_s - w.phi_e) * ste * sts);
    g1.bloch = {s * (c * (ste * cts * spe - cte * sts * sps) + s * ste * cpe),
                s * (c * (cte * sts * cps - ste * cts * cpe) + s * ste * spe),
                s * (s * cte + c * ste * sts * std::sin(w.phi_s - w.phi_e))};
    return {g0, g1};
}

inline double partial_swap_criterion(double alpha, const SwapAngles &w) {
    const auto g = partial_swap_effect_params(alpha, w);
    return jointly_measurable(g[0], g[1]).value;
}

struct CompatRegionPoint {
    double alpha = 0.0;
    double min_margin = 0.0;
    SwapAngles witness;
    double max_factor_deviation = 0.0;  // max |F_a - cos(alpha/2)| on the grid
};

namespace detail {

/// Coordinate descent on the criterion from a grid minimizer.
inline void refine_swap_witness(double alpha, SwapAngles &w, double &value, double step, int iterations) {
    const std::array<double SwapAngles::*, 4> coords = {&SwapAngles::theta_s, &SwapAngles::theta_e,
                                                        &SwapAngles::phi_s, &SwapAngles::phi_e};
    for (int it = 0; it < iterations; ++it) {
        bool moved = false;
        for (auto coord : coords) {
            for (double dir : {1.0, -1.0}) {
                SwapAngles trial = w;
                trial.*coord += dir * step;
                const double v = partial_swap_criterion(alpha, trial);
                if (v < value) {
                    value = v;
                    w = trial;
                    moved = true;
                }
            }
        }
        if (!moved) step *= 0.5;
    }
}

}  // namespace detail

/// Worst criterion value per alpha over a density^4 angle grid (theta in
/// [0, pi], phi in [0, 2 pi)), refined by 50 coordinate-descent steps.
inline std::vector<CompatRegionPoint> partial_swap_compat_region(const std::vector<double> &alphas,
                                                                 std::size_t density) {
    if (alphas.empty() || density < 2) throw ValidationError("partial_swap_compat_region: empty grid");
    std::vector<double> thetas(density), phis(density);
    for (std::size_t i = 0; i < density; ++i) {
        thetas[i] = std::numbers::pi * static_cast<double>(i) / static_cast<double>(density - 1);
        phis[i] = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(density);
    }
    std::vector<CompatRegionPoint> out;
    for (double alpha : alphas) {
        CompatRegionPoint pt;
        pt.alpha = alpha;
        pt.min_margin = std::numeric_limits<double>::infinity();
        const double target = std::cos(alpha / 2.0);
        for (double ts : thetas) {
            for (double te : thetas) {
                for (double ps : phis) {
                    for (double pe : phis) {
                        const SwapAngles w{ts, te, ps, pe};
                        const auto g = partial_swap_effect_params(alpha, w);
                        pt.max_factor_deviation =
                            std::max({pt.max_factor_deviation, std::abs(ellipsoid_factor(g[0]) - target),
                                      std::abs(ellipsoid_factor(g[1]) - target)});
                        const double v = jointly_measurable(g[0], g[1]).value;
                        if (v < pt.min_margin) {
                            pt.min_margin = v;
                            pt.witness = w;
                        }
                    }
                }
            }
        }
        detail::refine_swap_witness(alpha, pt.witness, pt.min_margin, std::numbers::pi / static_cast<double>(density),
                                    50);
        out.push_back(pt);
    }
    return out;
}

}  // namespace tpm
