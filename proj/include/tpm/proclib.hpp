#pragma once

// Canonical processes, entanglement-breaking channels, the memory-test and
// partial-SWAP experiment setups, and the dephasing-with-echo decay model.

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>
#include <gsl/gsl_vector.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "tpm/certify.hpp"
#include "tpm/errors.hpp"
#include "tpm/linalg.hpp"
#include "tpm/process.hpp"

namespace tpm {

// ---------------------------------------------------------------- processes

/// |GHZ><GHZ| + X_A |GHZ><GHZ| X_A on A' (x) A (x) B.
inline ProcessOperator w222() {
    ComplexVector ghz = ComplexVector::Zero(8);
    ghz(0) = ghz(7) = 1.0 / std::sqrt(2.0);
    const ComplexMatrix proj = ghz * ghz.adjoint();
    const ComplexMatrix flip = kron({qubit::identity(), qubit::pauli_x(), qubit::identity()});
    return ProcessOperator::from_parts(proj + flip * proj * flip, 0.5 * qubit::identity());
}

/// p W222 + (1 - p) V W222 V^dagger with V = H sigma_x on A.
inline ProcessOperator upsilon(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("upsilon: p must lie in [0, 1]");
    const ProcessOperator base = w222();
    const ComplexMatrix v = kron({qubit::identity(), qubit::hadamard() * qubit::pauli_x(), qubit::identity()});
    const ComplexMatrix w = p * base.w() + (1.0 - p) * v * base.w() * v.adjoint();
    return ProcessOperator::from_parts(w, base.marginal_state());
}

/// cos(alpha/2) id + i sin(alpha/2) SWAP.
inline ComplexMatrix partial_swap(double alpha) {
    const Complex c(std::cos(alpha / 2.0), 0.0);
    const Complex s(0.0, std::sin(alpha / 2.0));
    return c * ComplexMatrix::Identity(4, 4) + s * swap_gate();
}

/// Common-cause process rho_{A'B} (x) id_A, reordered to A' A B.
inline ProcessOperator common_cause_process(const ComplexMatrix &rho_ab) {
    if (rho_ab.rows() != 4) throw DimensionError("common_cause_process: rho must be a two-qubit state");
    require_density(rho_ab, "common_cause_process rho");
    const ComplexMatrix w =
        permute_factors(kron(rho_ab, qubit::identity()), TensorLayout{{2, 2, 2}}, {0, 2, 1});
    return ProcessOperator::from_parts(w, partial_trace(rho_ab, TensorLayout{{2, 2}}, {1}));
}

/// Direct-cause process rho_{A'} (x) N_{A->B} for the channel with the given
/// Kraus operators; N = sum_ij |i><j| (x) N(|i><j|).
inline ProcessOperator direct_cause_process(const ComplexMatrix &rho_a, const std::vector<ComplexMatrix> &kraus) {
    if (rho_a.rows() != 2) throw DimensionError("direct_cause_process: rho must be a qubit state");
    require_density(rho_a, "direct_cause_process rho");
    if (kraus.empty()) throw ValidationError("direct_cause_process: empty Kraus list");
    ComplexMatrix completeness = ComplexMatrix::Zero(2, 2);
    for (const auto &k : kraus) {
        if (k.rows() != 2 || k.cols() != 2) throw DimensionError("direct_cause_process: qubit Kraus operators expected");
        completeness += k.adjoint() * k;
    }
    if (max_abs_diff(completeness, qubit::identity()) > kHermitianTol) {
        throw ValidationError("direct_cause_process: Kraus operators are not trace preserving");
    }
    ComplexMatrix choi = ComplexMatrix::Zero(4, 4);
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            ComplexMatrix eij = ComplexMatrix::Zero(2, 2);
            eij(i, j) = 1.0;
            ComplexMatrix out = ComplexMatrix::Zero(2, 2);
            for (const auto &k : kraus) out += k * eij * k.adjoint();
            choi += kron(eij, out);
        }
    }
    return ProcessOperator::from_parts(kron(rho_a, choi), rho_a);
}

/// Partial transpose of W over A'.
inline ComplexMatrix partial_transpose_first(const ProcessOperator &p) {
    return partial_transpose(p.w(), process_layout(), 0);
}

// ----------------------------------------------------------------- channels

/// Measure-and-prepare channel sum_l Tr(E_l .) rho_l on a qubit.
struct EbChannel {
    std::vector<ComplexMatrix> effects;
    std::vector<ComplexMatrix> outputs;

    void validate() const {
        if (effects.empty() || effects.size() != outputs.size()) {
            throw ValidationError("EbChannel: effects and outputs must be non-empty and equal length");
        }
        for (const auto &e : effects) {
            if (e.rows() != 2 || e.cols() != 2) throw DimensionError("EbChannel: qubit effects expected");
        }
        require_povm(effects, "EbChannel effects");
        for (const auto &o : outputs) {
            if (o.rows() != 2 || o.cols() != 2) throw DimensionError("EbChannel: qubit outputs expected");
            require_density(o, "EbChannel output");
        }
    }
};

namespace detail {

inline void require_two_qubit_target(const ComplexMatrix &rho, std::size_t target, const char *what) {
    if (rho.rows() != 4 || rho.cols() != 4) throw DimensionError(std::string(what) + ": two-qubit state expected");
    if (target > 1) throw DimensionError(std::string(what) + ": target factor must be 0 or 1");
}

}  // namespace detail

/// Applies the channel to factor `target` of a two-qubit state. The result is
/// sum_l Tr_target[(E_l on target) rho] (x) rho_l, separable by construction.
inline ComplexMatrix apply_eb_channel(const ComplexMatrix &rho, const EbChannel &ch, std::size_t target) {
    detail::require_two_qubit_target(rho, target, "apply_eb_channel");
    require_density(rho, "apply_eb_channel rho");
    ch.validate();
    const TensorLayout two{{2, 2}};
    const std::size_t other = 1 - target;
    ComplexMatrix out = ComplexMatrix::Zero(4, 4);
    for (std::size_t l = 0; l < ch.effects.size(); ++l) {
        const ComplexMatrix lift =
            target == 1 ? kron(qubit::identity(), ch.effects[l]) : kron(ch.effects[l], qubit::identity());
        const ComplexMatrix rest = partial_trace(lift * rho, two, {target});
        out += other == 0 ? kron(rest, ch.outputs[l]) : kron(ch.outputs[l], rest);
    }
    return 0.5 * (out + out.adjoint());
}

/// v rho + (1 - v) Tr_target(rho) (x) id/2 on factor `target`; v in [0, 1].
inline ComplexMatrix apply_depolarizing(const ComplexMatrix &rho, double visibility, std::size_t target) {
    detail::require_two_qubit_target(rho, target, "apply_depolarizing");
    if (!(visibility >= 0.0 && visibility <= 1.0)) throw DomainError("apply_depolarizing: visibility must lie in [0, 1]");
    const ComplexMatrix rest = partial_trace(rho, TensorLayout{{2, 2}}, {target});
    const ComplexMatrix mixed = 0.5 * qubit::identity();
    const ComplexMatrix noise = target == 1 ? kron(rest, mixed) : kron(mixed, rest);
    return visibility * rho + (1.0 - visibility) * noise;
}

// ------------------------------------------------------- experiment setups

/// Everything needed to produce observational and interventional statistics.
struct ExperimentSetup {
    ComplexMatrix initial_state;  // on A' (x) E
    ComplexMatrix unitary;        // A (x) E -> B (x) E'
    MpInstrument instrument;
    BinaryPovm final_measurement;
};

/// Setting alphabet sigma_x, sigma_z, -sigma_x, -sigma_z.
inline std::vector<std::string> table_s1_labels() { return {"X", "Z", "-X", "-Z"}; }

inline std::vector<BinaryPovm> table_s1_povms() {
    return {observable_povm({1, 0, 0}), observable_povm({0, 0, 1}), observable_povm({-1, 0, 0}),
            observable_povm({0, 0, -1})};
}

/// CNOT controlled by E on A, followed by SWAP; B receives the memory qubit.
inline ComplexMatrix memory_test_unitary() { return cnot_gate(0, 1) * swap_gate(); }

/// Bell memory, repreparations |-> (a = 0) and |+> (a = 1), final
/// measurement of (sigma_x + sigma_z) / sqrt 2.
inline ExperimentSetup memory_test_setup() {
    const double h = 1.0 / std::sqrt(2.0);
    ExperimentSetup s;
    s.initial_state = bell_state();
    s.unitary = memory_test_unitary();
    s.instrument.settings = table_s1_labels();
    s.instrument.povm = table_s1_povms();
    s.instrument.repreparations = {qubit::bloch_state({-1, 0, 0}), qubit::bloch_state({1, 0, 0})};
    s.final_measurement = observable_povm({h, 0, h});
    return s;
}

/// Bell memory, partial SWAP, repreparations |+i> (a = 0) and |-i> (a = 1),
/// final measurement of sigma_x.
inline ExperimentSetup partial_swap_setup(double alpha) {
    ExperimentSetup s;
    s.initial_state = bell_state();
    s.unitary = partial_swap(alpha);
    s.instrument.settings = table_s1_labels();
    s.instrument.povm = table_s1_povms();
    s.instrument.repreparations = {qubit::bloch_state({0, 1, 0}), qubit::bloch_state({0, -1, 0})};
    s.final_measurement = observable_povm({1, 0, 0});
    return s;
}

inline ProcessOperator setup_process(const ExperimentSetup &s) { return build_process(s.initial_state, s.unitary); }

/// Closed form (3 - sin alpha + cos alpha) / 2.
inline double partial_swap_gamma_closed_form(double alpha) { return (3.0 - std::sin(alpha) + std::cos(alpha)) / 2.0; }

/// Gamma of the partial-SWAP experiment, simulated through the full pipeline.
inline std::vector<std::pair<double, double>> partial_swap_gamma_curve(const std::vector<double> &alphas) {
    std::vector<std::pair<double, double>> out;
    out.reserve(alphas.size());
    for (double alpha : alphas) {
        if (!(alpha >= 0.0 && alpha <= std::numbers::pi)) throw DomainError("partial_swap_gamma_curve: alpha outside [0, pi]");
        const ExperimentSetup s = partial_swap_setup(alpha);
        const Behavior b = born_rule(setup_process(s), s.instrument, s.final_measurement);
        out.emplace_back(alpha, gamma_functional(b).value);
    }
    return out;
}

// -------------------------------------------------------------- decay model

/// Times in milliseconds.
struct NoiseParams {
    double t2 = 364.0;
    double t1 = 1170.0;
    double echo_fidelity = 0.995;
    double echo_interval = 2.5;
    double initial_gamma = 0.642;
    bool include_t1 = false;

    void validate() const {
        if (!(t2 > 0.0) || !(t1 > 0.0) || !(echo_interval > 0.0)) {
            throw ValidationError("NoiseParams: t2, t1 and echo_interval must be positive");
        }
        if (!(echo_fidelity > 0.0 && echo_fidelity <= 1.0)) {
            throw ValidationError("NoiseParams: echo_fidelity must lie in (0, 1]");
        }
        if (!(initial_gamma >= kQuantumGammaBound - kFidelityDomainTol && initial_gamma <= 2.0)) {
            throw ValidationError("NoiseParams: initial_gamma must lie in [2 - sqrt 2, 2]");
        }
    }

    /// Exponential decay rate of the visibility, per millisecond.
    double decay_rate() const {
        double rate = 1.0 / t2 - std::log(echo_fidelity) / echo_interval;
        if (include_t1) rate += 1.0 / (2.0 * t1);
        return rate;
    }

    double initial_visibility() const { return std::min(1.0, (2.0 - initial_gamma) / std::sqrt(2.0)); }
};

/// v(t) = v0 exp(-t/T2) F^(t/tau) [exp(-t/2T1)].
inline double visibility(const NoiseParams &params, double t) {
    params.validate();
    if (!(t >= 0.0)) throw DomainError("visibility: time must be non-negative");
    return params.initial_visibility() * std::exp(-params.decay_rate() * t);
}

inline double gamma_from_visibility(double v) { return 2.0 - std::sqrt(2.0) * v; }

/// Gamma(t) = Gamma(0) + (2 - Gamma(0)) (1 - v(t) / v0), equal to
/// 2 - sqrt 2 v(t) and exact at t = 0.
inline std::vector<std::pair<double, double>> decay_prediction(const NoiseParams &params,
                                                               const std::vector<double> &times) {
    params.validate();
    const double start = params.initial_visibility() < 1.0 ? params.initial_gamma : kQuantumGammaBound;
    const double rate = params.decay_rate();
    std::vector<std::pair<double, double>> out;
    out.reserve(times.size());
    for (double t : times) {
        if (!(t >= 0.0)) throw DomainError("decay_prediction: time must be non-negative");
        out.emplace_back(t, start - (2.0 - start) * std::expm1(-rate * t));
    }
    return out;
}

/// Wait time at which the predicted Gamma reaches `level`; 0 if it starts
/// above, +inf if the visibility never decays.
inline double crossing_time(const NoiseParams &params, double level = 1.0) {
    params.validate();
    const double v0 = params.initial_visibility();
    const double v_level = (2.0 - level) / std::sqrt(2.0);
    if (v0 <= v_level) return 0.0;
    const double rate = params.decay_rate();
    if (rate <= 0.0) return std::numeric_limits<double>::infinity();
    return std::log(v0 / v_level) / rate;
}

// ------------------------------------------------ best Gamma over a family

/// Settings +-n1, +-n2 on A', pure repreparations rho_0 and rho_1, projective
/// final measurement along f. All directions in spherical angles.
struct MeasurementFamilyPoint {
    std::array<double, 10> angles{};  // n1, n2, rho_0, rho_1, f as (theta, phi) pairs

    Bloch direction(std::size_t k) const { return qubit::spherical(angles[2 * k], angles[2 * k + 1]); }

    MpInstrument instrument() const {
        const Bloch n1 = direction(0), n2 = direction(1);
        MpInstrument inst;
        inst.settings = {"n1", "n2", "-n1", "-n2"};
        inst.povm = {observable_povm(n1), observable_povm(n2), observable_povm({-n1[0], -n1[1], -n1[2]}),
                     observable_povm({-n2[0], -n2[1], -n2[2]})};
        inst.repreparations = {qubit::bloch_state(direction(2)), qubit::bloch_state(direction(3))};
        return inst;
    }

    BinaryPovm final_measurement() const { return observable_povm(direction(4)); }
};

/// The memory-test measurements expressed in the family's angles.
inline MeasurementFamilyPoint memory_test_family_point() {
    const double pi = std::numbers::pi;
    return {{pi / 2, 0.0, 0.0, 0.0, pi / 2, pi, pi / 2, 0.0, pi / 4, 0.0}};
}

struct FamilyOptimum {
    double gamma = 2.0;
    MeasurementFamilyPoint point;
};

namespace detail {

struct FamilyObjective {
    std::array<ComplexMatrix, 4> basis;  // Tr_A[(id (x) P^T (x) id) W] for P in {id, X, Y, Z} / 2

    explicit FamilyObjective(const ProcessOperator &p) {
        const std::array<ComplexMatrix, 4> paulis = {qubit::identity(), qubit::pauli_x(), qubit::pauli_y(),
                                                     qubit::pauli_z()};
        for (std::size_t k = 0; k < 4; ++k) basis[k] = condition_on_preparation_unchecked(p, 0.5 * paulis[k]);
    }

    static ComplexMatrix condition_on_preparation_unchecked(const ProcessOperator &p, const ComplexMatrix &op) {
        const ComplexMatrix lift = kron({qubit::identity(), op.transpose(), qubit::identity()});
        return partial_trace(lift * p.w(), process_layout(), {1});
    }

    ComplexMatrix conditioned(const Bloch &r) const {
        return basis[0] + r[0] * basis[1] + r[1] * basis[2] + r[2] * basis[3];
    }

    double operator()(const MeasurementFamilyPoint &pt) const {
        const Bloch n1 = pt.direction(0), n2 = pt.direction(1);
        const std::array<ComplexMatrix, 2> cond = {conditioned(pt.direction(2)), conditioned(pt.direction(3))};
        const BinaryPovm f = pt.final_measurement();
        // P(a, b | x) for x = n1, n2, -n1, -n2; -n swaps the A' outcomes.
        std::array<BinaryPovm, 2> e = {observable_povm(n1), observable_povm(n2)};
        Behavior b;
        b.settings = {"n1", "n2", "-n1", "-n2"};
        b.probs.resize(4);
        for (std::size_t x = 0; x < 4; ++x) {
            for (int a = 0; a < 2; ++a) {
                const ComplexMatrix &ea = e[x % 2][x < 2 ? a : 1 - a];
                for (int bb = 0; bb < 2; ++bb) b.probs[x][a][bb] = (kron(ea, f[bb]) * cond[a]).trace().real();
            }
        }
        return gamma_functional(b).value;
    }
};

inline double family_objective_gsl(const gsl_vector *v, void *params) {
    const auto &obj = *static_cast<const FamilyObjective *>(params);
    MeasurementFamilyPoint pt;
    for (std::size_t i = 0; i < pt.angles.size(); ++i) pt.angles[i] = gsl_vector_get(v, i);
    return obj(pt);
}

inline FamilyOptimum nelder_mead(const FamilyObjective &obj, const MeasurementFamilyPoint &start, double step,
                                 std::size_t max_iter) {
    constexpr std::size_t n = 10;
    gsl_multimin_function fn{&family_objective_gsl, n, const_cast<FamilyObjective *>(&obj)};
    gsl_vector *x = gsl_vector_alloc(n);
    gsl_vector *ss = gsl_vector_alloc(n);
    for (std::size_t i = 0; i < n; ++i) gsl_vector_set(x, i, start.angles[i]);
    gsl_vector_set_all(ss, step);
    gsl_multimin_fminimizer *s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n);
    gsl_multimin_fminimizer_set(s, &fn, x, ss);
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
        if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), 1e-10) == GSL_SUCCESS) break;
    }
    FamilyOptimum out;
    out.gamma = gsl_multimin_fminimizer_minimum(s);
    for (std::size_t i = 0; i < n; ++i) out.point.angles[i] = gsl_vector_get(s->x, i);
    gsl_multimin_fminimizer_free(s);
    gsl_vector_free(ss);
    gsl_vector_free(x);
    return out;
}

}  // namespace detail

/// Gamma of a process at one point of the measurement family.
inline double family_gamma(const ProcessOperator &p, const MeasurementFamilyPoint &pt) {
    return detail::FamilyObjective(p)(pt);
}

/// Lowest Gamma over the measurement family by multistart Nelder-Mead; the
/// memory-test point is always among the starts. Deterministic given `seed`.
inline FamilyOptimum best_gamma_over_family(const ProcessOperator &p, std::size_t random_starts = 24,
                                            std::uint64_t seed = 1) {
    const detail::FamilyObjective obj(p);
    std::vector<MeasurementFamilyPoint> starts = {memory_test_family_point()};
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    for (std::size_t k = 0; k < random_starts; ++k) {
        MeasurementFamilyPoint pt;
        for (auto &a : pt.angles) a = angle(rng);
        starts.push_back(pt);
    }
    FamilyOptimum best;
    best.gamma = obj(starts.front());
    best.point = starts.front();
    for (const auto &start : starts) {
        FamilyOptimum local = detail::nelder_mead(obj, start, 0.5, 4000);
        // restart from the optimum to escape simplex collapse
        local = detail::nelder_mead(obj, local.point, 0.1, 4000);
        if (local.gamma < best.gamma) best = local;
    }
    return best;
}

}  // namespace tpm
