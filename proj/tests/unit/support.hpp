#pragma once

#include <cmath>
#include <complex>

#include <Eigen/Dense>

#include "steerlab/errors.hpp"
#include "steerlab/hermitian.hpp"
#include "steerlab/rng.hpp"
#include "steerlab/state.hpp"

/// Expects `stmt` to throw steerlab::Error carrying `expected_code`.
#define EXPECT_ERROR_CODE(stmt, expected_code)                                  \
    do {                                                                        \
        try {                                                                   \
            stmt;                                                               \
            ADD_FAILURE() << "no exception from " #stmt;                        \
        } catch (const steerlab::Error& e) {                                    \
            EXPECT_EQ(e.code(), expected_code) << e.what();                     \
        }                                                                       \
    } while (false)

namespace testing_support {

using steerlab::CMatrix;
using steerlab::Complex;
using steerlab::RMatrix;

inline CMatrix pauli_x() {
    CMatrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

inline CMatrix pauli_y() {
    CMatrix m(2, 2);
    m << 0, Complex(0, -1), Complex(0, 1), 0;
    return m;
}

inline CMatrix pauli_z() {
    CMatrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

inline CMatrix ginibre(int n, steerlab::Rng& rng) {
    CMatrix g(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) g(r, c) = Complex(rng.normal(), rng.normal());
    return g;
}

/// Full-rank random state G G† / Tr (Hilbert–Schmidt measure), independent of the sampler.
inline steerlab::BipartiteState random_state(int da, int db, steerlab::Rng& rng) {
    const CMatrix g = ginibre(da * db, rng);
    CMatrix rho = g * g.adjoint();
    rho /= rho.trace().real();
    return steerlab::BipartiteState(da, db, rho);
}

inline steerlab::HermitianMatrix random_density(int d, steerlab::Rng& rng) {
    const CMatrix g = ginibre(d, rng);
    CMatrix rho = g * g.adjoint();
    rho /= rho.trace().real();
    return steerlab::HermitianMatrix(rho);
}

inline steerlab::HermitianMatrix random_pure(int d, steerlab::Rng& rng) {
    Eigen::VectorXcd v(d);
    for (int i = 0; i < d; ++i) v[i] = Complex(rng.normal(), rng.normal());
    v.normalize();
    return steerlab::HermitianMatrix(v * v.adjoint());
}

/// Trace norm without an SVD: the symmetric embedding [[0, A], [Aᵀ, 0]] has
/// eigenvalues ±σ_i, so half the sum of their magnitudes is ‖A‖₁.
inline double trace_norm_oracle(const RMatrix& a) {
    const Eigen::Index r = a.rows(), c = a.cols();
    RMatrix h = RMatrix::Zero(r + c, r + c);
    h.topRightCorner(r, c) = a;
    h.bottomLeftCorner(c, r) = a.transpose();
    Eigen::SelfAdjointEigenSolver<RMatrix> es(h);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

/// Tr{(A ⊗ B)(ρ − ρ_A ⊗ ρ_B)} by explicit Kronecker products.
inline double correlation_oracle(const CMatrix& rho, int da, int db, const CMatrix& a, const CMatrix& b) {
    CMatrix ra = CMatrix::Zero(da, da), rb = CMatrix::Zero(db, db);
    for (int i = 0; i < da; ++i)
        for (int j = 0; j < da; ++j)
            for (int k = 0; k < db; ++k) ra(i, j) += rho(i * db + k, j * db + k);
    for (int i = 0; i < db; ++i)
        for (int j = 0; j < db; ++j)
            for (int k = 0; k < da; ++k) rb(i, j) += rho(k * db + i, k * db + j);
    CMatrix ab(da * db, da * db), prod(da * db, da * db);
    for (int i = 0; i < da; ++i)
        for (int j = 0; j < da; ++j) {
            ab.block(i * db, j * db, db, db) = a(i, j) * b;
            prod.block(i * db, j * db, db, db) = ra(i, j) * rb;
        }
    return (ab * (rho - prod)).trace().real();
}

} // namespace testing_support
