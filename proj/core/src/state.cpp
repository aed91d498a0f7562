#include "steerlab/state.hpp"

#include <cmath>
#include <string>

#include "steerlab/errors.hpp"

namespace steerlab {

namespace {

void check_dims(int da, int db, const CMatrix& rho) {
    if (da < 1 || db < 1) throw Error(ErrorCode::InvalidDimension, "factor dimensions must be positive");
    if (rho.rows() != da * db || rho.cols() != da * db)
        throw Error(ErrorCode::Shape, "density matrix must be " + std::to_string(da * db) + "x"
                                          + std::to_string(da * db));
}

} // namespace

BipartiteState::BipartiteState(int da, int db, CMatrix rho)
    : BipartiteState(da, db, HermitianMatrix(std::move(rho), kStateTol)) {}

BipartiteState::BipartiteState(int da, int db, HermitianMatrix rho)
    : da_(da), db_(db), rho_(std::move(rho)) {
    check_dims(da, db, rho_.matrix());
    if (std::abs(rho_.trace() - 1.0) > kStateTol)
        throw Error(ErrorCode::InvalidParameter,
                    "density matrix trace " + std::to_string(rho_.trace()) + " != 1");
    const double min_eig = rho_.min_eigenvalue();
    if (min_eig < -kStateTol)
        throw Error(ErrorCode::InvalidParameter,
                    "density matrix is not positive semidefinite (min eigenvalue "
                        + std::to_string(min_eig) + ")");
}

BipartiteState::BipartiteState(int da, int db, HermitianMatrix rho, TrustedTag)
    : da_(da), db_(db), rho_(std::move(rho)) {
    check_dims(da, db, rho_.matrix());
}

BipartiteState BipartiteState::trusted(int da, int db, CMatrix rho) {
    return BipartiteState(da, db, HermitianMatrix(std::move(rho), kStateTol), TrustedTag{});
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

CMatrix partial_trace_b(const CMatrix& m, int da, int db) {
    CMatrix out(da, da);
    for (int i = 0; i < da; ++i)
        for (int j = 0; j < da; ++j) out(i, j) = m.block(i * db, j * db, db, db).trace();
    return out;
}

CMatrix partial_trace_a(const CMatrix& m, int da, int db) {
    CMatrix out = CMatrix::Zero(db, db);
    for (int a = 0; a < da; ++a) out += m.block(a * db, a * db, db, db);
    return out;
}

std::pair<HermitianMatrix, HermitianMatrix> reduced_states(const BipartiteState& rho) {
    return {HermitianMatrix(partial_trace_b(rho.matrix(), rho.da(), rho.db()), kStateTol),
            HermitianMatrix(partial_trace_a(rho.matrix(), rho.da(), rho.db()), kStateTol)};
}

BipartiteState product_state(const HermitianMatrix& rho_a, const HermitianMatrix& rho_b) {
    return BipartiteState(rho_a.dim(), rho_b.dim(), kron(rho_a.matrix(), rho_b.matrix()));
}

BipartiteState maximally_mixed(int da, int db) {
    const int n = da * db;
    return BipartiteState(da, db, CMatrix(CMatrix::Identity(n, n) / static_cast<double>(n)));
}

namespace {

CMatrix singlet_projector() {
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(4);
    psi[1] = 1.0 / std::sqrt(2.0);
    psi[2] = -1.0 / std::sqrt(2.0);
    return psi * psi.adjoint();
}

} // namespace

BipartiteState singlet() { return BipartiteState(2, 2, singlet_projector()); }

BipartiteState werner(double w) {
    if (w < -1.0 / 3.0 - 1e-12 || w > 1.0 + 1e-12)
        throw Error(ErrorCode::InvalidParameter, "Werner parameter must lie in [-1/3, 1]");
    return BipartiteState(2, 2, CMatrix(w * singlet_projector() + (1.0 - w) / 4.0 * CMatrix::Identity(4, 4)));
}

BipartiteState isotropic(int d, double v) {
    if (d < 2) throw Error(ErrorCode::InvalidDimension, "isotropic state needs d >= 2");
    const double lo = -1.0 / (d * d - 1.0);
    if (v < lo - 1e-12 || v > 1.0 + 1e-12)
        throw Error(ErrorCode::InvalidParameter, "isotropic parameter outside [-1/(d^2-1), 1]");
    const int n = d * d;
    Eigen::VectorXcd phi = Eigen::VectorXcd::Zero(n);
    for (int k = 0; k < d; ++k) phi[k * d + k] = 1.0 / std::sqrt(static_cast<double>(d));
    return BipartiteState(d, d, CMatrix(v * phi * phi.adjoint()
                                        + (1.0 - v) / n * CMatrix::Identity(n, n)));
}

} // namespace steerlab
