#include "steerlab/hermitian.hpp"

#include <cassert>
#include <cmath>
#include <string>

#include "steerlab/errors.hpp"

namespace steerlab {

namespace {

constexpr double kSvdZeroRel = 1e-12;

void require_square(const CMatrix& m) {
    if (m.rows() != m.cols() || m.rows() == 0)
        throw Error(ErrorCode::Shape, "hermitian matrix must be square and non-empty, got "
                                          + std::to_string(m.rows()) + "x"
                                          + std::to_string(m.cols()));
}

template <typename Svd>
double sum_singular_values(const Svd& svd) {
    const auto& s = svd.singularValues();
    if (s.size() == 0) return 0.0;
    const double cutoff = kSvdZeroRel * s.maxCoeff();
    double total = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s[i] > cutoff) total += s[i];
    return total;
}

} // namespace

HermitianMatrix::HermitianMatrix(CMatrix m, double tol) {
    require_square(m);
    const double dev = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (!(dev <= tol))
        throw Error(ErrorCode::InvalidParameter,
                    "matrix is not hermitian (max |A - A^dagger| = " + std::to_string(dev) + ")");
    m_ = 0.5 * (m + m.adjoint());
}

HermitianMatrix HermitianMatrix::identity(int d) {
    if (d < 1) throw Error(ErrorCode::InvalidDimension, "dimension must be positive");
    return HermitianMatrix(CMatrix::Identity(d, d));
}

double HermitianMatrix::purity() const {
    // Tr{A A} = Σ |A_ij|² for hermitian A.
    return m_.squaredNorm();
}

RVector HermitianMatrix::eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(m_, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

double HermitianMatrix::min_eigenvalue() const { return eigenvalues()[0]; }

LooBasis::LooBasis(std::vector<HermitianMatrix> elements) : LooBasis(std::move(elements), false) {}

LooBasis::LooBasis(std::vector<HermitianMatrix> elements, bool gellmann)
    : elements_(std::move(elements)), gellmann_(gellmann) {
    if (elements_.empty()) throw Error(ErrorCode::InvalidDimension, "empty operator basis");
    dim_ = elements_.front().dim();
    if (static_cast<int>(elements_.size()) != dim_ * dim_)
        throw Error(ErrorCode::Shape, "operator basis for dimension " + std::to_string(dim_)
                                          + " needs " + std::to_string(dim_ * dim_)
                                          + " elements, got " + std::to_string(elements_.size()));
    for (const auto& e : elements_)
        if (e.dim() != dim_) throw Error(ErrorCode::Shape, "basis elements differ in dimension");

    const RMatrix g = gram();
    const double dev = (g - RMatrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
    if (dev > kOrthonormalTol)
        throw Error(ErrorCode::InvalidParameter,
                    "basis is not Hilbert-Schmidt orthonormal (max Gram deviation "
                        + std::to_string(dev) + ")");

    const CMatrix scaled_id = CMatrix::Identity(dim_, dim_) / std::sqrt(static_cast<double>(dim_));
    bool aligned = (elements_.front().matrix() - scaled_id).cwiseAbs().maxCoeff() < kHermitianTol;
    for (std::size_t i = 1; aligned && i < elements_.size(); ++i)
        aligned = std::abs(elements_[i].trace()) < kHermitianTol;
    identity_aligned_ = aligned;
}

RMatrix LooBasis::gram() const {
    const int n = size();
    RMatrix g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) g(i, j) = g(j, i) = hs_inner(elements_[i], elements_[j]);
    return g;
}

LooBasis gellmann_basis(int d) {
    if (d < 2) throw Error(ErrorCode::InvalidDimension, "operator basis needs d >= 2, got " + std::to_string(d));
    const int n = d * d;
    std::vector<HermitianMatrix> elements;
    elements.reserve(static_cast<std::size_t>(n));
    std::vector<double> coeffs(static_cast<std::size_t>(n), 0.0);
    for (int p = 0; p < n; ++p) {
        coeffs[static_cast<std::size_t>(p)] = 1.0;
        elements.emplace_back(gellmann_combination(d, coeffs));
        coeffs[static_cast<std::size_t>(p)] = 0.0;
    }
    return LooBasis(std::move(elements), true);
}

double hs_inner(const HermitianMatrix& a, const HermitianMatrix& b) {
    if (a.dim() != b.dim())
        throw Error(ErrorCode::Shape, "hs_inner dimension mismatch: " + std::to_string(a.dim())
                                          + " vs " + std::to_string(b.dim()));
    // Tr{A B} = Σ_ij A_ij B_ji = Σ_ij A_ij conj(B_ij) for hermitian B.
    const Complex value = (a.matrix().array() * b.matrix().conjugate().array()).sum();
    assert(std::abs(value.imag()) < 1e-12 * std::max(1.0, std::abs(value.real())));
    return value.real();
}

BlochVector bloch_expand(const HermitianMatrix& rho, const LooBasis& basis) {
    if (rho.dim() != basis.dim())
        throw Error(ErrorCode::Shape, "bloch_expand dimension mismatch");
    BlochVector r{basis.dim(), RVector(basis.size())};
    if (basis.is_gellmann()) {
        r.coefficients = gellmann_coefficients(rho.matrix());
        return r;
    }
    for (int i = 0; i < basis.size(); ++i) r.coefficients[i] = hs_inner(basis[i], rho);
    return r;
}

HermitianMatrix reconstruct(const BlochVector& r, const LooBasis& basis) {
    if (r.dim != basis.dim() || r.coefficients.size() != basis.size())
        throw Error(ErrorCode::Shape, "reconstruct dimension mismatch");
    if (basis.is_gellmann())
        return HermitianMatrix(gellmann_combination(
            r.dim, std::span<const double>(r.coefficients.data(),
                                           static_cast<std::size_t>(r.coefficients.size()))));
    CMatrix m = CMatrix::Zero(r.dim, r.dim);
    for (int i = 0; i < basis.size(); ++i) m += r.coefficients[i] * basis[i].matrix();
    return HermitianMatrix(std::move(m));
}

LooBasis rotate_basis(const LooBasis& basis, const RMatrix& o) {
    const int n = basis.size();
    if (o.rows() != n || o.cols() != n)
        throw Error(ErrorCode::Shape, "rotation must be " + std::to_string(n) + "x" + std::to_string(n));
    if (!is_orthogonal(o))
        throw Error(ErrorCode::InvalidTransform, "rotation matrix is not orthogonal within 1e-10");
    std::vector<HermitianMatrix> rotated;
    rotated.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        CMatrix m = CMatrix::Zero(basis.dim(), basis.dim());
        for (int j = 0; j < n; ++j)
            if (o(i, j) != 0.0) m += o(i, j) * basis[j].matrix();
        rotated.emplace_back(std::move(m));
    }
    return LooBasis(std::move(rotated));
}

double trace_norm(const RMatrix& a) {
    if (a.size() == 0) return 0.0;
    Eigen::JacobiSVD<RMatrix> svd(a);
    return sum_singular_values(svd);
}

double trace_norm(const CMatrix& a) {
    if (a.size() == 0) return 0.0;
    Eigen::JacobiSVD<CMatrix> svd(a);
    return sum_singular_values(svd);
}

bool is_orthogonal(const RMatrix& o, double tol) {
    if (o.rows() != o.cols()) return false;
    return ((o * o.transpose()) - RMatrix::Identity(o.rows(), o.cols())).cwiseAbs().maxCoeff() <= tol;
}

namespace {

RMatrix sign_fixed_q(const RMatrix& a) {
    Eigen::HouseholderQR<RMatrix> qr(a);
    RMatrix q = qr.householderQ() * RMatrix::Identity(a.rows(), a.cols());
    const RMatrix& r = qr.matrixQR();
    for (Eigen::Index j = 0; j < q.cols(); ++j)
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    return q;
}

RMatrix gaussian_matrix(int n, Rng& rng) {
    RMatrix a(n, n);
    // Column-major fill order is part of the reproducibility contract.
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) a(i, j) = rng.normal();
    return a;
}

} // namespace

RMatrix random_orthogonal(int n, Rng& rng) {
    if (n < 1) throw Error(ErrorCode::InvalidDimension, "orthogonal matrix size must be positive");
    return sign_fixed_q(gaussian_matrix(n, rng));
}

RMatrix random_orthogonal_with_first_column(const RVector& first, Rng& rng) {
    const int n = static_cast<int>(first.size());
    if (n < 1) throw Error(ErrorCode::InvalidDimension, "orthogonal matrix size must be positive");
    if (std::abs(first.norm() - 1.0) > kOrthonormalTol)
        throw Error(ErrorCode::InvalidParameter, "first column must be a unit vector");
    RMatrix a = gaussian_matrix(n, rng);
    a.col(0) = first;
    RMatrix q = sign_fixed_q(a);
    q.col(0) = first;
    return q;
}

CMatrix gellmann_combination(int d, std::span<const double> coeffs) {
    const auto n = static_cast<std::size_t>(d) * static_cast<std::size_t>(d);
    if (coeffs.size() != n) throw Error(ErrorCode::Shape, "Gell-Mann coefficient count must be d^2");
    CMatrix m = gellmann_traceless_combination(d, coeffs.subspan(1));
    const double id = coeffs[0] / std::sqrt(static_cast<double>(d));
    for (int k = 0; k < d; ++k) m(k, k) += id;
    return m;
}

CMatrix gellmann_traceless_combination(int d, std::span<const double> coeffs) {
    const auto n = static_cast<std::size_t>(d) * static_cast<std::size_t>(d);
    if (coeffs.size() + 1 != n)
        throw Error(ErrorCode::Shape, "traceless Gell-Mann coefficient count must be d^2 - 1");
    // coeffs[p - 1] multiplies element p.
    auto c = [&](int p) { return coeffs[static_cast<std::size_t>(p - 1)]; };
    constexpr double inv_sqrt2 = 0.70710678118654752440;
    CMatrix m = CMatrix::Zero(d, d);

    // Diagonal family: element p = i − 1 for 1-based i = 2..d. Accumulate the
    // Σ_{k<i} part as a suffix sum so the whole diagonal is O(d).
    double suffix = 0.0;
    for (int i = d; i >= 1; --i) {
        double diag = suffix;
        if (i >= 2) {
            const double f = c(i - 1) / std::sqrt(static_cast<double>(i) * (i - 1));
            diag -= (i - 1) * f;
            suffix += f;
        }
        m(i - 1, i - 1) = diag;
    }
    for (int r = 0; r < d; ++r) {
        for (int col = r + 1; col < d; ++col) {
            const double s = c((r + 1) * d + col) * inv_sqrt2;
            const double a = c(col * d + r) * inv_sqrt2;
            m(r, col) = Complex(s, -a);
            m(col, r) = Complex(s, a);
        }
    }
    return m;
}

RVector gellmann_coefficients(const CMatrix& a) {
    if (a.rows() != a.cols()) throw Error(ErrorCode::Shape, "Gell-Mann expansion needs a square matrix");
    const int d = static_cast<int>(a.rows());
    constexpr double sqrt2 = 1.41421356237309504880;
    RVector r(d * d);
    r[0] = a.trace().real() / std::sqrt(static_cast<double>(d));
    double prefix = 0.0;
    for (int i = 1; i <= d; ++i) {
        const double aii = a(i - 1, i - 1).real();
        if (i >= 2) r[i - 1] = (prefix - (i - 1) * aii) / std::sqrt(static_cast<double>(i) * (i - 1));
        prefix += aii;
    }
    for (int row = 0; row < d; ++row) {
        for (int col = row + 1; col < d; ++col) {
            r[(row + 1) * d + col] = sqrt2 * a(row, col).real();
            r[col * d + row] = -sqrt2 * a(row, col).imag();
        }
    }
    return r;
}

} // namespace steerlab
