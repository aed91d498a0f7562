#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "steerlab/rng.hpp"

namespace steerlab {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kOrthonormalTol = 1e-10;

/// Square complex matrix equal to its conjugate transpose.
///
/// Construction checks hermiticity entrywise against `tol` and then
/// symmetrizes, so downstream code may rely on exact hermiticity.
class HermitianMatrix {
public:
    HermitianMatrix() = default;
    explicit HermitianMatrix(CMatrix m, double tol = kHermitianTol);

    static HermitianMatrix identity(int d);

    int dim() const noexcept { return static_cast<int>(m_.rows()); }
    const CMatrix& matrix() const noexcept { return m_; }

    double trace() const { return m_.trace().real(); }
    /// Tr{A²}.
    double purity() const;
    /// Eigenvalues in ascending order.
    RVector eigenvalues() const;
    double min_eigenvalue() const;

private:
    CMatrix m_;
};

/// Ordered set of d² hermitian operators orthonormal under Tr{A B}.
class LooBasis {
public:
    /// Validates the Gram matrix against the identity within 1e-10.
    explicit LooBasis(std::vector<HermitianMatrix> elements);

    int dim() const noexcept { return dim_; }
    int size() const noexcept { return static_cast<int>(elements_.size()); }
    const HermitianMatrix& operator[](int i) const { return elements_[static_cast<std::size_t>(i)]; }
    const std::vector<HermitianMatrix>& elements() const noexcept { return elements_; }

    /// True when element 0 is I/√d and every other element is traceless.
    bool identity_aligned() const noexcept { return identity_aligned_; }
    /// True for the generalized Gell-Mann basis built by gellmann_basis().
    bool is_gellmann() const noexcept { return gellmann_; }

    RMatrix gram() const;

private:
    friend LooBasis gellmann_basis(int d);
    LooBasis(std::vector<HermitianMatrix> elements, bool gellmann);

    int dim_ = 0;
    std::vector<HermitianMatrix> elements_;
    bool identity_aligned_ = false;
    bool gellmann_ = false;
};

/// Coefficients r with ρ = Σ_i r_i G_i for a given basis.
struct BlochVector {
    int dim = 0;
    RVector coefficients;
};

/// Generalized Gell-Mann basis in the ordering
///
///   0                 I/√d
///   1 .. d-1          diagonal: (Σ_{k<i}|k⟩⟨k| − (i−1)|i⟩⟨i|)/√(i(i−1)), i = 2..d
///   m·d + n − 1       (|m⟩⟨n| + |n⟩⟨m|)/√2,      1 ≤ m < n ≤ d
///   (m−1)·d + n − 1   i(|m⟩⟨n| − |n⟩⟨m|)/√2,     1 ≤ n < m ≤ d
///
/// with 1-based m, n. At d = 2 this is {I, σ_z, σ_y, σ_x}/√2.
LooBasis gellmann_basis(int d);

/// Tr{A B} for hermitian A, B.
double hs_inner(const HermitianMatrix& a, const HermitianMatrix& b);

BlochVector bloch_expand(const HermitianMatrix& rho, const LooBasis& basis);
HermitianMatrix reconstruct(const BlochVector& r, const LooBasis& basis);

/// Returns G' = O·G; O must be real orthogonal within 1e-10.
LooBasis rotate_basis(const LooBasis& basis, const RMatrix& o);

/// Sum of singular values; values below 1e-12 of the largest count as zero.
double trace_norm(const RMatrix& a);
double trace_norm(const CMatrix& a);

bool is_orthogonal(const RMatrix& o, double tol = kOrthonormalTol);

/// Haar-random orthogonal matrix (QR of a Gaussian matrix, sign-fixed R diagonal).
RMatrix random_orthogonal(int n, Rng& rng);

/// Orthogonal matrix whose first column is `first` (unit norm) and whose
/// remaining columns are a Haar-random orthonormal completion.
RMatrix random_orthogonal_with_first_column(const RVector& first, Rng& rng);

/// Σ_p c_p G_p over the Gell-Mann basis in O(d²). `coeffs` has d² entries.
CMatrix gellmann_combination(int d, std::span<const double> coeffs);
/// Same, skipping the identity element: `coeffs` has d²−1 entries for G_1..G_{d²−1}.
CMatrix gellmann_traceless_combination(int d, std::span<const double> coeffs);
/// Tr{G_p A} for every Gell-Mann element in O(d²); real parts for hermitian A.
RVector gellmann_coefficients(const CMatrix& a);

} // namespace steerlab
