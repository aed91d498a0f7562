#pragma once

#include <string>

#include "steerlab/hermitian.hpp"
#include "steerlab/state.hpp"
#include "steerlab/steering.hpp"

namespace steerlab {

/// Largest mixing parameter for which τ-state entanglement certifies steering.
inline const double kDasMuMax = 1.0 / std::sqrt(3.0);
inline constexpr double kNptTol = 1e-10;

struct DasConfig {
    double mu = kDasMuMax;

    /// Throws InvalidParameter unless 0 ≤ μ ≤ 1/√3 + 1e-12.
    void validate() const;
};

enum class EntanglementMethod { Npt, Correlation };
std::string_view to_string(EntanglementMethod m) noexcept;

struct EntanglementVerdict {
    EntanglementMethod method = EntanglementMethod::Npt;
    /// NPT: minimum eigenvalue of the partial transpose. Correlation: lhs − rhs.
    double witness = 0.0;
    bool entangled = false;
    /// NPT only: true when d_A·d_B ≤ 6, where PPT implies separability.
    bool conclusive = false;
};

/// Transpose on the chosen factor, Alice-major ordering.
HermitianMatrix partial_transpose(const BipartiteState& rho, Subsystem subsystem);

/// Entangled ⇔ min eigenvalue of ρ^{T_B} < −1e-10.
EntanglementVerdict is_npt(const BipartiteState& rho);

/// τ = μρ + ((1−μ)/2)·I₂ ⊗ Tr_A ρ for a qubit on Alice's side.
BipartiteState das_tau(const BipartiteState& rho, const DasConfig& cfg = {});

/// Steering verdict from NPT of τ. lhs = −λ_min(τ^{T_B}) and rhs is offset
/// so that violated ⇔ λ_min < −1e-10. Verdicts for d_B > 3 carry the note
/// "npt-lower-bound".
SteeringVerdict das_steering_check(const BipartiteState& rho, const DasConfig& cfg = {});

/// Local-operator entanglement test
/// ‖C(G^A,G^B)‖₁ > √((1 − Tr ρ_A²)(1 − Tr ρ_B²)) + 1e-12.
EntanglementVerdict ccnr_entanglement_check(const BipartiteState& rho, const LooBasis& basis_a,
                                            const LooBasis& basis_b);

/// Both sides of the correlation test applied to τ at μ = 1/√3, divided by μ,
/// compared with loo_steering_check on ρ; returns the larger residual.
double das_local_equivalence_residual(const BipartiteState& rho);

} // namespace steerlab
