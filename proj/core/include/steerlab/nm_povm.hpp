#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "steerlab/hermitian.hpp"

namespace steerlab {

/// Parameters (d, N, M, x) of an (N,M)-POVM: N measurements with M outcomes
/// each on a d-dimensional system, with purity parameter x = Tr{Π²}.
struct PovmParams {
    int d = 2;
    int N = 1;
    int M = 4;
    double x = 0.0;

    /// Exclusive lower end d/M² of the admissible x range.
    double x_lower() const;
    /// Inclusive upper end min(d²/M², d/M).
    double x_upper() const;
    double x_midpoint() const { return 0.5 * (x_lower() + x_upper()); }
    bool x_admissible() const;
    /// (M−1)·N + 1 = d².
    bool informationally_complete() const;

    /// Throws InvalidParameter / InvalidDimension when d, N, M or x are out of range.
    void validate() const;

    /// Effect index (α, a) ↦ (α−1)·M + a, here 0-based on both sides.
    int index(int alpha, int a) const { return alpha * M + a; }
    int effect_count() const { return N * M; }
};

/// x = d/M² + 0.1·(upper − lower); positivity of randomly rotated effects
/// is reliable this close to the fully mixed limit.
PovmParams default_params(int d, int n, int m);

struct IcFamily {
    int N = 0;
    int M = 0;
    bool operator==(const IcFamily&) const = default;
};

/// All (N, M) with (M−1)·N = d²−1, N ≥ 1, M ≥ 2, sorted by N.
std::vector<IcFamily> enumerate_ic_families(int d);

/// Γ = (x·M² − d)/(M·(M−1)).
double gamma(const PovmParams& p);

/// Eigen-structure of SᵀS used to build an IC POVM: SᵀS = X·Λ·Xᵀ and S = Oᵀ·√Λ·Xᵀ.
struct SpectralFactors {
    double gamma = 0.0;
    RVector lambda;  ///< d² nonzero eigenvalues: dN/M first, then Γ.
    RMatrix X;       ///< NM × d², orthonormal columns; column 0 constant.
    RMatrix O;       ///< d² × d² orthogonal.
};

/// Eigenvector matrix X: constant first column plus within-block Helmert
/// vectors, which sum to zero inside every α-block.
RMatrix povm_eigenvectors(const PovmParams& p);

/// Closed form Γ·I − (Γ/M)·⊕J_α + (d/M²)·J of SᵀS.
RMatrix sts_closed_form(const PovmParams& p);

/// {Γ^(N(M−1)), (dN/M)^(1), 0^(N−1)} in ascending order.
std::vector<double> expected_sts_spectrum(const PovmParams& p);

/// N·M positive semidefinite effects Π = Gᵀ·S expanded in an operator basis.
class NmPovm {
public:
    /// Effects are rederived from S; no relation checks are made here.
    NmPovm(PovmParams params, LooBasis basis, RMatrix coefficients);

    const PovmParams& params() const noexcept { return params_; }
    const LooBasis& basis() const noexcept { return basis_; }
    /// d² × NM coefficient matrix S.
    const RMatrix& coefficients() const noexcept { return s_; }
    const std::vector<HermitianMatrix>& effects() const noexcept { return effects_; }
    const HermitianMatrix& effect(int alpha, int a) const {
        return effects_[static_cast<std::size_t>(params_.index(alpha, a))];
    }
    int size() const noexcept { return static_cast<int>(effects_.size()); }

private:
    PovmParams params_;
    LooBasis basis_;
    RMatrix s_;
    std::vector<HermitianMatrix> effects_;
};

struct ConstructOptions {
    /// Orthogonal d²×d² matrix O. Its first row must be the coefficient
    /// vector of I/√d in the working basis. Drawn at random when empty.
    std::optional<RMatrix> rotation;
    std::uint64_t seed = 0;
};

/// Builds an informationally complete (N,M)-POVM from the spectral recipe
/// S = Oᵀ√ΛXᵀ in the Gell-Mann basis of dimension d.
///
/// Throws Unsupported for non-IC parameters, InvalidTransform for a bad
/// rotation, and ConstructionFailed (carrying the most negative eigenvalue)
/// when an effect is not positive semidefinite.
NmPovm construct_povm(const PovmParams& params, const ConstructOptions& options = {});

/// The same recipe without the final checks: the effects may fail to be
/// positive, and SᵀS still carries the full spectrum.
NmPovm povm_candidate(const PovmParams& params, const ConstructOptions& options = {});

/// The rotation O = identity. For the Gell-Mann basis this gives the
/// qubit MUB and SIC measurements at x = x_upper().
RMatrix aligned_rotation(const PovmParams& params);

struct RelationCheck {
    std::string name;
    double max_deviation = 0.0;
    bool passed = false;
};

struct ValidationReport {
    std::vector<RelationCheck> relations;
    double min_eigenvalue = 0.0;
    bool passed = false;

    double max_deviation() const;
    /// Names of failed relations, comma separated.
    std::string failures() const;
};

inline constexpr double kPovmRelationTol = 1e-9;
inline constexpr double kPovmPositivityTol = 1e-10;

/// Gradient search over rotations O (first row fixed to the identity
/// direction) for effects that are all positive semidefinite. The aligned
/// rotation is tried first, then Haar-random starts.
struct RotationSearchOptions {
    int restarts = 16;
    int max_iterations = 4000;
    /// Stop once every effect eigenvalue is at least this large.
    double margin = 1e-9;
    std::uint64_t seed = 0;
};

struct RotationSearchResult {
    RMatrix rotation;
    double min_eigenvalue = 0.0; ///< best smallest effect eigenvalue found
    bool positive = false;       ///< min_eigenvalue ≥ −kPovmPositivityTol
    int starts = 0;
};

RotationSearchResult search_positive_rotation(const PovmParams& params,
                                              const RotationSearchOptions& options = {});

ValidationReport validate_povm(const NmPovm& povm);

/// Eigenvalues of SᵀS in ascending order.
std::vector<double> sts_spectrum(const NmPovm& povm);

} // namespace steerlab
