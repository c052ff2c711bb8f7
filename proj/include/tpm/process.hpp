#pragma once

// Process operators for qubit two-point measurement experiments.
//
// Systems: A' is measured first, A is the fresh qubit prepared after that
// measurement, B is measured last. E is the memory qubit that is correlated
// with A' initially and interacts with A through U : A (x) E -> B (x) E'.
// The process operator lives on A' (x) A (x) B in that factor order.
//
// With |U>> = (id (x) U) sum_i |i>|i> on (A E)(B E'), the process operator is
//
//   W = Tr_{E E'} [ (rho^{T_E} (x) id_{A B E'}) (id_{A'} (x) |U>><<U|) ]
//
// and the Born-like rule reads Tr[(E_{a|x} (x) rho_a^T (x) F_b) W]. The
// transpose on the prepared state is fixed by the vectorization convention;
// with it the rule reproduces measure -> re-prepare -> evolve -> measure on
// density matrices exactly.

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "tpm/behavior.hpp"
#include "tpm/linalg.hpp"

namespace tpm {

using BinaryPovm = std::array<ComplexMatrix, 2>;

inline void require_binary_povm(const BinaryPovm &povm, const char *what, double tol = kHermitianTol) {
    for (const auto &e : povm) {
        if (e.rows() != 2 || e.cols() != 2) throw DimensionError(std::string(what) + ": qubit effects expected");
    }
    require_povm({povm[0], povm[1]}, what, tol);
}

/// Projective measurement of the observable n . sigma; outcome 0 <-> eigenvalue +1.
inline BinaryPovm observable_povm(const Bloch &n) {
    const ComplexMatrix o = qubit::bloch_observable(n);
    const ComplexMatrix id = qubit::identity();
    return {0.5 * (id + o), 0.5 * (id - o)};
}

/// Measure-and-prepare instrument: a binary POVM on A' per setting, and a
/// prepared state on A that depends on the outcome only.
struct MpInstrument {
    std::vector<std::string> settings;
    std::vector<BinaryPovm> povm;               // povm[x][a]
    std::array<ComplexMatrix, 2> repreparations;  // rho_{A=a}

    void validate() const {
        if (settings.empty() || settings.size() != povm.size()) {
            throw ValidationError("MpInstrument: settings and POVM lists must be non-empty and equal length");
        }
        for (const auto &p : povm) require_binary_povm(p, "MpInstrument POVM");
        for (const auto &rho : repreparations) {
            if (rho.rows() != 2) throw DimensionError("MpInstrument: repreparations must be qubit states");
            require_density(rho, "MpInstrument repreparation");
        }
    }
};

inline const TensorLayout &process_layout() {
    static const TensorLayout layout{{2, 2, 2}};
    return layout;
}

/// Operator W on A' (x) A (x) B. Immutable; `from_matrix` does not validate,
/// use validate_process for diagnostics.
class ProcessOperator {
public:
    static ProcessOperator from_matrix(ComplexMatrix w) {
        require_layout(w, process_layout(), "ProcessOperator");
        ComplexMatrix marginal = partial_trace(w, process_layout(), {1, 2}) / 2.0;
        return ProcessOperator(std::move(w), std::move(marginal));
    }

    static ProcessOperator from_parts(ComplexMatrix w, ComplexMatrix marginal_state) {
        require_layout(w, process_layout(), "ProcessOperator");
        if (marginal_state.rows() != 2 || marginal_state.cols() != 2) {
            throw DimensionError("ProcessOperator: marginal state must be 2x2");
        }
        return ProcessOperator(std::move(w), std::move(marginal_state));
    }

    const ComplexMatrix &w() const { return w_; }
    const TensorLayout &layout() const { return process_layout(); }
    const ComplexMatrix &marginal_state() const { return marginal_; }

private:
    ProcessOperator(ComplexMatrix w, ComplexMatrix marginal) : w_(std::move(w)), marginal_(std::move(marginal)) {}

    ComplexMatrix w_;
    ComplexMatrix marginal_;
};

inline constexpr double kProcessTol = 1e-9;

/// Names of violated structural invariants; empty iff W is a valid process.
inline std::vector<std::string> validate_process(const ProcessOperator &p) {
    std::vector<std::string> issues;
    const ComplexMatrix &w = p.w();
    if (!is_hermitian(w, kProcessTol)) {
        issues.emplace_back("hermiticity: W is not Hermitian");
        return issues;
    }
    const double lowest = min_eigenvalue(0.5 * (w + w.adjoint()));
    if (lowest < -kProcessTol) {
        issues.emplace_back("positivity: minimum eigenvalue " + std::to_string(lowest));
    }
    if (std::abs(real_trace(w) - 2.0) > kProcessTol) {
        issues.emplace_back("trace: Tr W = " + std::to_string(real_trace(w)) + ", expected 2");
    }
    const ComplexMatrix tr_b = partial_trace(w, process_layout(), {2});
    const ComplexMatrix rho = partial_trace(tr_b, TensorLayout{{2, 2}}, {1}) / 2.0;
    if (max_abs_diff(tr_b, kron(rho, qubit::identity())) > kProcessTol) {
        issues.emplace_back("marginal: Tr_B W is not of the form rho_A' (x) id_A");
    }
    if (max_abs_diff(rho, p.marginal_state()) > kProcessTol) {
        issues.emplace_back("marginal: Tr_B W disagrees with the declared marginal state");
    }
    return issues;
}

/// Process operator of initial state `rho` on A' (x) E and interaction `u`
/// on A (x) E -> B (x) E'.
inline ProcessOperator build_process(const ComplexMatrix &rho, const ComplexMatrix &u) {
    if (rho.rows() != 4) throw DimensionError("build_process: rho must be a two-qubit state");
    if (u.rows() != 4 || u.cols() != 4) throw DimensionError("build_process: u must be 4x4");
    require_density(rho, "build_process rho");
    if (!is_unitary(u)) throw ValidationError("build_process: u is not unitary");

    const TensorLayout five{{2, 2, 2, 2, 2}};
    const ComplexMatrix vec = vectorize(u);
    const ComplexMatrix choi = vec * vec.adjoint();  // on A E B E'

    // rho^{T_E} (x) id on (A' E)(A B E'), reordered to A' A E B E'.
    const ComplexMatrix rho_te = partial_transpose(rho, TensorLayout{{2, 2}}, 1);
    const ComplexMatrix lhs =
        permute_factors(kron(rho_te, ComplexMatrix::Identity(8, 8)), five, {0, 2, 1, 3, 4});
    const ComplexMatrix rhs = kron(qubit::identity(), choi);

    ComplexMatrix w = partial_trace(lhs * rhs, five, {2, 4});
    w = 0.5 * (w + w.adjoint());
    return ProcessOperator::from_parts(std::move(w), partial_trace(rho, TensorLayout{{2, 2}}, {1}));
}

namespace detail {

/// Tr_A[(id (x) rho^T (x) id) W], an operator on A' (x) B.
inline ComplexMatrix condition_on_preparation(const ProcessOperator &p, const ComplexMatrix &rho) {
    const ComplexMatrix op = kron({qubit::identity(), rho.transpose(), qubit::identity()});
    return partial_trace(op * p.w(), process_layout(), {1});
}

}  // namespace detail

/// Observational statistics P(a, b | x).
inline Behavior born_rule(const ProcessOperator &p, const MpInstrument &inst, const BinaryPovm &f) {
    inst.validate();
    require_binary_povm(f, "born_rule final POVM");
    const std::array<ComplexMatrix, 2> cond = {detail::condition_on_preparation(p, inst.repreparations[0]),
                                               detail::condition_on_preparation(p, inst.repreparations[1])};
    Behavior out;
    out.settings = inst.settings;
    out.probs.resize(inst.settings.size());
    for (std::size_t x = 0; x < inst.settings.size(); ++x) {
        for (int a = 0; a < 2; ++a) {
            for (int b = 0; b < 2; ++b) {
                out.probs[x][a][b] = (kron(inst.povm[x][a], f[b]) * cond[a]).trace().real();
            }
        }
    }
    return out;
}

/// Interventional statistics P(b | do(a)): the first measurement is discarded
/// and A is prepared in `repreparations[a]` directly. The result carries no
/// x index.
inline DoTable do_probabilities(const ProcessOperator &p, const std::array<ComplexMatrix, 2> &repreparations,
                                const BinaryPovm &f) {
    require_binary_povm(f, "do_probabilities final POVM");
    for (const auto &rho : repreparations) require_density(rho, "do_probabilities repreparation");
    DoTable out;
    out.probs.resize(1);
    for (int a = 0; a < 2; ++a) {
        const ComplexMatrix cond = detail::condition_on_preparation(p, repreparations[a]);
        for (int b = 0; b < 2; ++b) {
            out.probs[0][a][b] = (kron(qubit::identity(), f[b]) * cond).trace().real();
        }
    }
    return out;
}

}  // namespace tpm
