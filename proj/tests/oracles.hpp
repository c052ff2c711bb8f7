#pragma once

// Independent reference computations used by the tests. None of these call
// the library routine they are compared against.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <vector>

#include "tpm/linalg.hpp"

namespace oracle {

using tpm::Complex;
using tpm::ComplexMatrix;

inline ComplexMatrix random_ginibre(std::mt19937_64 &rng, int rows, int cols) {
    std::normal_distribution<double> n(0.0, 1.0);
    ComplexMatrix g(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int k = 0; k < cols; ++k) g(i, k) = Complex(n(rng), n(rng));
    }
    return g;
}

/// Random mixed state of dimension d (rank d unless `rank` is given).
inline ComplexMatrix random_density(std::mt19937_64 &rng, int d, int rank = 0) {
    const ComplexMatrix g = random_ginibre(rng, d, rank > 0 ? rank : d);
    ComplexMatrix rho = g * g.adjoint();
    return rho / rho.trace();
}

inline ComplexMatrix random_pure(std::mt19937_64 &rng, int d) { return random_density(rng, d, 1); }

/// Haar-ish unitary from the QR decomposition of a Ginibre matrix.
inline ComplexMatrix random_unitary(std::mt19937_64 &rng, int d) {
    const ComplexMatrix g = random_ginibre(rng, d, d);
    Eigen::HouseholderQR<ComplexMatrix> qr(g);
    ComplexMatrix q = qr.householderQ();
    const ComplexMatrix r = qr.matrixQR();
    for (int i = 0; i < d; ++i) q.col(i) *= std::polar(1.0, -std::arg(r(i, i)));
    return q;
}

/// Random binary qubit POVM {E, id - E} with 0 <= E <= id.
inline std::array<ComplexMatrix, 2> random_binary_povm(std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const ComplexMatrix v = random_unitary(rng, 2);
    ComplexMatrix diag = ComplexMatrix::Zero(2, 2);
    diag(0, 0) = u(rng);
    diag(1, 1) = u(rng);
    const ComplexMatrix e = v * diag * v.adjoint();
    return {e, ComplexMatrix::Identity(2, 2) - e};
}

/// Element of a two-qubit operator with explicit qubit indices.
inline Complex at2(const ComplexMatrix &m, int i0, int i1, int j0, int j1) { return m(2 * i0 + i1, 2 * j0 + j1); }

/// W[(a', a, b), (a'', a~, b~)] = sum_{e, e~, e'} rho[(a', e~), (a'', e)]
///     U[(b, e'), (a, e~)] conj(U[(b~, e'), (a~, e)])
inline ComplexMatrix index_sum_process(const ComplexMatrix &rho, const ComplexMatrix &u) {
    ComplexMatrix w = ComplexMatrix::Zero(8, 8);
    for (int ap = 0; ap < 2; ++ap)
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                for (int app = 0; app < 2; ++app)
                    for (int at = 0; at < 2; ++at)
                        for (int bt = 0; bt < 2; ++bt) {
                            Complex s = 0.0;
                            for (int e = 0; e < 2; ++e)
                                for (int et = 0; et < 2; ++et)
                                    for (int ep = 0; ep < 2; ++ep) {
                                        s += at2(rho, ap, et, app, e) * at2(u, b, ep, a, et) *
                                             std::conj(at2(u, bt, ep, at, e));
                                    }
                            w(4 * ap + 2 * a + b, 4 * app + 2 * at + bt) = s;
                        }
    return w;
}

/// Tr over the first qubit of a two-qubit operator, by explicit sums.
inline ComplexMatrix trace_first(const ComplexMatrix &m) {
    ComplexMatrix out = ComplexMatrix::Zero(2, 2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k) out(i, j) += at2(m, k, i, k, j);
    return out;
}

inline ComplexMatrix trace_second(const ComplexMatrix &m) {
    ComplexMatrix out = ComplexMatrix::Zero(2, 2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k) out(i, j) += at2(m, i, k, j, k);
    return out;
}

inline ComplexMatrix kron2(const ComplexMatrix &a, const ComplexMatrix &b) {
    ComplexMatrix out(4, 4);
    for (int i0 = 0; i0 < 2; ++i0)
        for (int i1 = 0; i1 < 2; ++i1)
            for (int j0 = 0; j0 < 2; ++j0)
                for (int j1 = 0; j1 < 2; ++j1) out(2 * i0 + i1, 2 * j0 + j1) = a(i0, j0) * b(i1, j1);
    return out;
}

/// Measure A' with effect e, re-prepare A in rho_a, evolve A E by U, measure
/// B (the first output) with effect f: the unnormalized probability.
inline double sequential_probability(const ComplexMatrix &rho, const ComplexMatrix &u, const ComplexMatrix &e,
                                     const ComplexMatrix &rho_a, const ComplexMatrix &f) {
    const ComplexMatrix sigma = trace_first(kron2(e, ComplexMatrix::Identity(2, 2)) * rho);
    const ComplexMatrix out = u * kron2(rho_a, sigma) * u.adjoint();
    return (kron2(f, ComplexMatrix::Identity(2, 2)) * out).trace().real();
}

/// P(b | do(a)): A' discarded.
inline double sequential_do_probability(const ComplexMatrix &rho, const ComplexMatrix &u, const ComplexMatrix &rho_a,
                                        const ComplexMatrix &f) {
    return sequential_probability(rho, u, ComplexMatrix::Identity(2, 2), rho_a, f);
}

/// G = cos^2(alpha/2) Tr(F sigma) id + sin^2(alpha/2) F - i sin cos [F, sigma].
inline ComplexMatrix partial_swap_assemblage_closed_form(double alpha, const ComplexMatrix &sigma,
                                                         const ComplexMatrix &f) {
    const double c = std::cos(alpha / 2.0), s = std::sin(alpha / 2.0);
    return c * c * (f * sigma).trace() * ComplexMatrix::Identity(2, 2) + s * s * f -
           Complex(0.0, s * c) * (f * sigma - sigma * f);
}

/// Root of a monotone function on [lo, hi] by bisection.
inline double bisect(const std::function<double(double)> &fn, double lo, double hi, int iterations = 200) {
    const bool rising = fn(hi) > fn(lo);
    for (int i = 0; i < iterations; ++i) {
        const double mid = 0.5 * (lo + hi);
        if ((fn(mid) < 0.0) == rising) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/// P[x][a][b] of a deterministic strategy given as explicit response tables.
using Table = std::vector<std::array<std::array<double, 2>, 2>>;

/// Gamma by direct evaluation of sum_{b0 b1} min_x [P(0,b0|x) + P(1,b1|x)].
inline double gamma_direct(const Table &p) {
    double total = 0.0;
    for (int b0 = 0; b0 < 2; ++b0) {
        for (int b1 = 0; b1 < 2; ++b1) {
            double best = 1e300;
            for (const auto &px : p) best = std::min(best, px[0][b0] + px[1][b1]);
            total += best;
        }
    }
    return total;
}

}  // namespace oracle
