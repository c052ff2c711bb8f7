#pragma once

// Dense complex linear algebra for qubit-scale operators (dimension <= 32).
//
// Tensor convention: the leftmost factor of a product space is the
// slowest-varying digit of the composite row-major index, so that
// kron(a, b)(i*db + k, j*db + l) = a(i, j) * b(k, l).

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "tpm/errors.hpp"

namespace tpm {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Bloch = std::array<double, 3>;

inline constexpr double kHermitianTol = 1e-10;

/// Subsystem dimensions of a tensor-product space, leftmost factor slowest.
struct TensorLayout {
    std::vector<std::size_t> factor_dims;

    std::size_t total_dim() const {
        return std::accumulate(factor_dims.begin(), factor_dims.end(), std::size_t{1},
                               std::multiplies<>());
    }
    std::size_t num_factors() const { return factor_dims.size(); }

    /// Digits of a composite index, one per factor.
    std::vector<std::size_t> digits(std::size_t index) const {
        std::vector<std::size_t> out(factor_dims.size());
        for (std::size_t k = factor_dims.size(); k-- > 0;) {
            out[k] = index % factor_dims[k];
            index /= factor_dims[k];
        }
        return out;
    }

    std::size_t compose(const std::vector<std::size_t> &digits) const {
        std::size_t index = 0;
        for (std::size_t k = 0; k < factor_dims.size(); ++k) index = index * factor_dims[k] + digits[k];
        return index;
    }
};

inline double max_abs_diff(const ComplexMatrix &a, const ComplexMatrix &b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionError("max_abs_diff: shape mismatch");
    }
    if (a.size() == 0) return 0.0;
    return (a - b).cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const ComplexMatrix &m, double tol = kHermitianTol) {
    return m.rows() == m.cols() && max_abs_diff(m, m.adjoint()) <= tol;
}

inline void require_square(const ComplexMatrix &m, const char *what) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        throw DimensionError(std::string(what) + ": matrix must be square and non-empty");
    }
}

inline void require_hermitian(const ComplexMatrix &m, const char *what) {
    require_square(m, what);
    if (!is_hermitian(m)) throw ValidationError(std::string(what) + ": matrix is not Hermitian");
}

inline void require_layout(const ComplexMatrix &m, const TensorLayout &layout, const char *what) {
    require_square(m, what);
    if (layout.factor_dims.empty() ||
        std::any_of(layout.factor_dims.begin(), layout.factor_dims.end(), [](std::size_t d) { return d == 0; }) ||
        layout.total_dim() != static_cast<std::size_t>(m.rows())) {
        throw DimensionError(std::string(what) + ": layout does not match matrix dimension " +
                             std::to_string(m.rows()));
    }
}

inline ComplexMatrix kron(const ComplexMatrix &a, const ComplexMatrix &b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

inline ComplexMatrix kron(std::initializer_list<ComplexMatrix> factors) {
    ComplexMatrix out = ComplexMatrix::Identity(1, 1);
    for (const auto &f : factors) out = kron(out, f);
    return out;
}

/// Traces out the factors listed in `traced` (0-based). Tracing every factor
/// yields a 1x1 matrix holding the full trace.
inline ComplexMatrix partial_trace(const ComplexMatrix &m, const TensorLayout &layout,
                                   const std::set<std::size_t> &traced) {
    require_layout(m, layout, "partial_trace");
    for (auto f : traced) {
        if (f >= layout.num_factors()) throw DimensionError("partial_trace: factor index out of range");
    }
    TensorLayout kept;
    for (std::size_t k = 0; k < layout.num_factors(); ++k) {
        if (!traced.count(k)) kept.factor_dims.push_back(layout.factor_dims[k]);
    }
    const std::size_t dim = layout.total_dim();
    const std::size_t out_dim = kept.total_dim();

    std::vector<std::size_t> kept_index(dim), traced_index(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        auto d = layout.digits(i);
        std::size_t ki = 0, ti = 0;
        for (std::size_t k = 0; k < layout.num_factors(); ++k) {
            if (traced.count(k)) {
                ti = ti * layout.factor_dims[k] + d[k];
            } else {
                ki = ki * layout.factor_dims[k] + d[k];
            }
        }
        kept_index[i] = ki;
        traced_index[i] = ti;
    }

    ComplexMatrix out = ComplexMatrix::Zero(out_dim, out_dim);
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = 0; j < dim; ++j) {
            if (traced_index[i] == traced_index[j]) out(kept_index[i], kept_index[j]) += m(i, j);
        }
    }
    return out;
}

/// Transposes the indices of a single factor.
inline ComplexMatrix partial_transpose(const ComplexMatrix &m, const TensorLayout &layout, std::size_t factor) {
    require_layout(m, layout, "partial_transpose");
    if (factor >= layout.num_factors()) throw DimensionError("partial_transpose: factor index out of range");
    const std::size_t dim = layout.total_dim();
    ComplexMatrix out(dim, dim);
    for (std::size_t i = 0; i < dim; ++i) {
        auto di = layout.digits(i);
        for (std::size_t j = 0; j < dim; ++j) {
            auto dj = layout.digits(j);
            std::swap(di[factor], dj[factor]);
            out(layout.compose(di), layout.compose(dj)) = m(i, j);
            std::swap(di[factor], dj[factor]);
        }
    }
    return out;
}

/// Reorders tensor factors: factor k of the result is factor perm[k] of `m`.
inline ComplexMatrix permute_factors(const ComplexMatrix &m, const TensorLayout &layout,
                                     const std::vector<std::size_t> &perm) {
    require_layout(m, layout, "permute_factors");
    if (perm.size() != layout.num_factors()) throw DimensionError("permute_factors: permutation size mismatch");
    TensorLayout out_layout;
    for (auto p : perm) out_layout.factor_dims.push_back(layout.factor_dims.at(p));
    const std::size_t dim = layout.total_dim();
    std::vector<std::size_t> map(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        auto d = layout.digits(i);
        std::vector<std::size_t> nd(perm.size());
        for (std::size_t k = 0; k < perm.size(); ++k) nd[k] = d[perm[k]];
        map[i] = out_layout.compose(nd);
    }
    ComplexMatrix out(dim, dim);
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = 0; j < dim; ++j) out(map[i], map[j]) = m(i, j);
    }
    return out;
}

/// |U>> = (id (x) U) sum_i |i>|i>, returned as a d^2 x 1 column.
/// Component (i*d + j) equals U(j, i), so <<U|U>> = Tr(U^dagger U).
inline ComplexMatrix vectorize(const ComplexMatrix &u) {
    require_square(u, "vectorize");
    const Eigen::Index d = u.rows();
    ComplexMatrix v(d * d, 1);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) v(i * d + j, 0) = u(j, i);
    }
    return v;
}

/// Inverse of vectorize.
inline ComplexMatrix unvectorize(const ComplexMatrix &v) {
    const auto d = static_cast<Eigen::Index>(std::lround(std::sqrt(static_cast<double>(v.rows()))));
    if (v.cols() != 1 || d * d != v.rows()) throw DimensionError("unvectorize: expected a d^2 x 1 column");
    ComplexMatrix u(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) u(j, i) = v(i * d + j, 0);
    }
    return u;
}

/// Ascending real spectrum of a Hermitian matrix.
inline std::vector<double> herm_eigenvalues(const ComplexMatrix &m) {
    require_hermitian(m, "herm_eigenvalues");
    const ComplexMatrix sym = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sym, Eigen::EigenvaluesOnly);
    const auto &ev = solver.eigenvalues();
    std::vector<double> out(ev.data(), ev.data() + ev.size());
    std::sort(out.begin(), out.end());
    return out;
}

inline double min_eigenvalue(const ComplexMatrix &m) { return herm_eigenvalues(m).front(); }

inline double real_trace(const ComplexMatrix &m) { return m.trace().real(); }

// ---------------------------------------------------------------------------
// Single-qubit vocabulary.

namespace qubit {

inline ComplexMatrix identity() { return ComplexMatrix::Identity(2, 2); }

inline ComplexMatrix pauli_x() {
    ComplexMatrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

inline ComplexMatrix pauli_y() {
    ComplexMatrix m(2, 2);
    m << 0, Complex(0, -1), Complex(0, 1), 0;
    return m;
}

inline ComplexMatrix pauli_z() {
    ComplexMatrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

inline ComplexMatrix hadamard() {
    ComplexMatrix m(2, 2);
    m << 1, 1, 1, -1;
    return m / std::sqrt(2.0);
}

/// n . sigma
inline ComplexMatrix bloch_observable(const Bloch &n) {
    return n[0] * pauli_x() + n[1] * pauli_y() + n[2] * pauli_z();
}

/// (id + r . sigma) / 2; a pure state when |r| = 1.
inline ComplexMatrix bloch_state(const Bloch &r) { return 0.5 * (identity() + bloch_observable(r)); }

inline Bloch bloch_vector(const ComplexMatrix &m) {
    return {(m * pauli_x()).trace().real(), (m * pauli_y()).trace().real(), (m * pauli_z()).trace().real()};
}

inline Bloch spherical(double theta, double phi) {
    return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

inline ComplexMatrix projector(const ComplexVector &v) {
    const ComplexVector n = v.normalized();
    return n * n.adjoint();
}

inline ComplexVector ket(Complex c0, Complex c1) {
    ComplexVector v(2);
    v << c0, c1;
    return v;
}

}  // namespace qubit

inline ComplexMatrix swap_gate() {
    ComplexMatrix m = ComplexMatrix::Zero(4, 4);
    m(0, 0) = m(1, 2) = m(2, 1) = m(3, 3) = 1.0;
    return m;
}

/// CNOT on a two-qubit register; `control` and `target` are factor indices (0 or 1).
inline ComplexMatrix cnot_gate(std::size_t control, std::size_t target) {
    if (control > 1 || target > 1 || control == target) throw ValidationError("cnot_gate: bad qubit indices");
    ComplexMatrix m = ComplexMatrix::Zero(4, 4);
    TensorLayout l{{2, 2}};
    for (std::size_t i = 0; i < 4; ++i) {
        auto d = l.digits(i);
        if (d[control] == 1) d[target] ^= 1;
        m(l.compose(d), i) = 1.0;
    }
    return m;
}

/// |Phi+> <Phi+| on two qubits.
inline ComplexMatrix bell_state() {
    ComplexVector v = ComplexVector::Zero(4);
    v(0) = v(3) = 1.0;
    return qubit::projector(v);
}

inline bool is_unitary(const ComplexMatrix &u, double tol = kHermitianTol) {
    return u.rows() == u.cols() &&
           max_abs_diff(u.adjoint() * u, ComplexMatrix::Identity(u.rows(), u.cols())) <= tol;
}

/// Hermitian, positive within -tol, unit trace within tol.
inline void require_density(const ComplexMatrix &rho, const char *what, double tol = kHermitianTol) {
    require_hermitian(rho, what);
    if (std::abs(rho.trace() - Complex(1.0)) > tol) throw ValidationError(std::string(what) + ": trace is not 1");
    if (min_eigenvalue(rho) < -tol) throw ValidationError(std::string(what) + ": not positive semidefinite");
}

/// Effects positive within -tol and summing to identity within tol.
inline void require_povm(const std::vector<ComplexMatrix> &effects, const char *what, double tol = kHermitianTol) {
    if (effects.empty()) throw ValidationError(std::string(what) + ": empty POVM");
    const auto d = effects.front().rows();
    ComplexMatrix sum = ComplexMatrix::Zero(d, d);
    for (const auto &e : effects) {
        require_hermitian(e, what);
        if (e.rows() != d) throw DimensionError(std::string(what) + ": effects have different dimensions");
        if (min_eigenvalue(e) < -tol) throw ValidationError(std::string(what) + ": effect is not positive");
        sum += e;
    }
    if (max_abs_diff(sum, ComplexMatrix::Identity(d, d)) > tol) {
        throw ValidationError(std::string(what) + ": effects do not sum to identity");
    }
}

}  // namespace tpm
