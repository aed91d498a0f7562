#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "steerlab/hermitian.hpp"
#include "steerlab/nm_povm.hpp"
#include "steerlab/state.hpp"

namespace steerlab {

/// Rows index Alice's operators, columns Bob's.
using CorrelationMatrix = RMatrix;

/// Margins at or below this are not counted as violations.
inline constexpr double kViolationTol = 1e-12;

struct SteeringVerdict {
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;   ///< lhs − rhs
    bool violated = false; ///< margin > 1e-12
    std::string detector;
    /// POVM checks: |lhs/√(Γ_A Γ_B) − LOO lhs|.
    std::optional<double> scaling_residual;
    /// Free-form qualifier, e.g. "npt-lower-bound".
    std::string note;

    static SteeringVerdict from_sides(double lhs, double rhs, std::string detector);
};

/// (C)_ij = Tr{A_i ⊗ B_j (ρ − ρ_A ⊗ ρ_B)}.
CorrelationMatrix correlation_matrix(const BipartiteState& rho,
                                     std::span<const HermitianMatrix> alice,
                                     std::span<const HermitianMatrix> bob);
CorrelationMatrix correlation_matrix(const BipartiteState& rho, const LooBasis& alice,
                                     const LooBasis& bob);
CorrelationMatrix correlation_matrix(const BipartiteState& rho, const NmPovm& alice,
                                     const NmPovm& bob);

/// A→B test ‖C(G^A,G^B)‖₁ ≤ √((d_A − Tr ρ_A²)(1 − Tr ρ_B²)).
SteeringVerdict loo_steering_check(const BipartiteState& rho, const LooBasis& basis_a,
                                   const LooBasis& basis_b);
/// The same test with the roles swapped (B→A): √((d_B − Tr ρ_B²)(1 − Tr ρ_A²)).
SteeringVerdict loo_steering_check_reverse(const BipartiteState& rho, const LooBasis& basis_a,
                                           const LooBasis& basis_b);

/// A→B test for IC (N,M)-POVMs; bound scaled by √(Γ_A Γ_B).
SteeringVerdict povm_steering_check(const BipartiteState& rho, const NmPovm& povm_a,
                                    const NmPovm& povm_b);

struct PovmMoments {
    /// Σ_i (Tr{Π_i ρ})²
    double sum_squared_means = 0.0;
    /// Σ_i Tr{Π_i² ρ}
    double sum_second_moments = 0.0;
    /// max_σ Σ_i (Tr{Π_i σ})²
    double max_sum_squared_means = 0.0;

    /// Direct sums over the effects; the maximum is taken over the
    /// computational basis states (the quadratic form is constant on pure states).
    double direct_sum_squared_means = 0.0;
    double direct_sum_second_moments = 0.0;
    double direct_max_sum_squared_means = 0.0;

    double max_residual() const;
};

/// Closed-form POVM moments together with their brute-force counterparts.
PovmMoments povm_moments(const HermitianMatrix& rho_side, const NmPovm& povm);

/// |‖C(Π^A,Π^B)‖₁ − √(Γ_A Γ_B)·‖C(G^A,G^B)‖₁|.
double scaling_identity_residual(const BipartiteState& rho, const NmPovm& povm_a,
                                 const NmPovm& povm_b, const LooBasis& basis_a,
                                 const LooBasis& basis_b);

// --- rescaled-observable criterion -------------------------------------------

struct RescaleOptions {
    int restarts = 20;           ///< random starts in addition to the uniform start
    int max_iterations = 500;
    double relative_tolerance = 1e-8;
    std::uint64_t seed = 0;
    double variance_floor = 1e-12;
    double cap_factor = 1e6;
};

/// Rescaling factors h of Alice's observables, normalized to Σ h_i² v_i = 1
/// over components with v_i above the variance floor.
struct RescalingVector {
    RVector h;
};

struct SphereMaximum {
    RVector g;          ///< unit vector
    double value = 0.0; ///< ‖diag(g)·Ĉ‖₁
    int starts_run = 0;
};

/// Maximizes ‖diag(g)·Ĉ‖₁ over unit g by projected gradient ascent with
/// restarts; the uniform start g ∝ `uniform_start` is always tried first.
/// Returns as soon as the value exceeds `stop_above`.
SphereMaximum maximize_on_sphere(const RMatrix& c_hat, const RVector& uniform_start,
                                 const RescaleOptions& opts,
                                 double stop_above = std::numeric_limits<double>::infinity());

struct RescaledResult {
    RescalingVector h;
    /// Reported on the LOO scale: both sides multiplied by √(Σ v_i), so h ∝ 1
    /// reproduces loo_steering_check exactly.
    SteeringVerdict verdict;
    RVector variances;
};

/// Maximizes ‖C(hG^A, G^B)‖₁ subject to Σ h_i² v_i = 1 with
/// v_i = Tr{(G^A_i)² ρ_A} − Tr{G^A_i ρ_A}², against √(1 − Tr ρ_B²).
RescaledResult optimize_rescaled_steering(const BipartiteState& rho, const LooBasis& basis_a,
                                          const LooBasis& basis_b, const RescaleOptions& opts = {});

/// Violation flag of optimize_rescaled_steering with the same options,
/// skipping the optimizer when the Frobenius bound ‖Ĉ‖_F already rules out a
/// violation and stopping at the first violating point.
bool rescaled_steering_detects(const BipartiteState& rho, const LooBasis& basis_a,
                               const LooBasis& basis_b, const RescaleOptions& opts);

/// Alice's variance terms v_i for each basis element.
RVector observable_variances(const HermitianMatrix& rho_a, const LooBasis& basis_a);

// --- Bell-diagonal states ----------------------------------------------------

struct BellDiagonalParams {
    double t1 = 0.0;
    double t2 = 0.0;
    double t3 = 0.0;
};

/// Eigenvalues (1 + 2(s₁t₁ + s₂t₂ + s₃t₃))/4 over the four Bell states, in
/// the order Φ⁺, Φ⁻, Ψ⁺, Ψ⁻.
std::array<double, 4> bell_diagonal_eigenvalues(const BellDiagonalParams& t);
bool bell_diagonal_valid(const BellDiagonalParams& t, double tol = 1e-12);

/// ρ = I⊗I/4 + Σ_i (t_i/2) σ_i⊗σ_i with (σ₁, σ₂, σ₃) = (σ_x, σ_y, σ_z).
BipartiteState bell_diagonal_state(const BellDiagonalParams& t);

enum class BellClass { Outside, Detected, Undetected };
std::string_view to_string(BellClass c) noexcept;

struct BellGridPoint {
    BellDiagonalParams t;
    BellClass cls = BellClass::Outside;
    double lhs = 0.0;
    double rhs = 0.0;
};

/// Classifies the grid t_i = −1/2 + k·resolution (k = 0, 1, … while t_i ≤ 1/2)
/// with the LOO criterion.
std::vector<BellGridPoint> bell_diagonal_scan(double resolution);

} // namespace steerlab
