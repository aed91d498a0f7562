#include "steerlab/entanglement.hpp"

#include <cmath>
#include <string>

#include "steerlab/errors.hpp"

namespace steerlab {

void DasConfig::validate() const {
    if (!(mu >= 0.0) || mu > kDasMuMax + 1e-12)
        throw Error(ErrorCode::InvalidParameter,
                    "Das mixing parameter must lie in [0, 1/sqrt(3)], got " + std::to_string(mu));
}

std::string_view to_string(EntanglementMethod m) noexcept {
    return m == EntanglementMethod::Npt ? "npt" : "correlation";
}

HermitianMatrix partial_transpose(const BipartiteState& rho, Subsystem subsystem) {
    const int da = rho.da(), db = rho.db();
    const CMatrix& m = rho.matrix();
    CMatrix out(m.rows(), m.cols());
    for (int a = 0; a < da; ++a) {
        for (int a2 = 0; a2 < da; ++a2) {
            if (subsystem == Subsystem::B)
                out.block(a * db, a2 * db, db, db) = m.block(a * db, a2 * db, db, db).transpose();
            else
                out.block(a * db, a2 * db, db, db) = m.block(a2 * db, a * db, db, db);
        }
    }
    return HermitianMatrix(std::move(out));
}

EntanglementVerdict is_npt(const BipartiteState& rho) {
    EntanglementVerdict v;
    v.method = EntanglementMethod::Npt;
    v.witness = partial_transpose(rho, Subsystem::B).min_eigenvalue();
    v.entangled = v.witness < -kNptTol;
    v.conclusive = rho.dim() <= 6;
    return v;
}

namespace {

void require_qubit_alice(const BipartiteState& rho) {
    if (rho.da() != 2)
        throw Error(ErrorCode::Unsupported,
                    "the tau-state reduction needs a qubit on Alice's side (d_A = 2), got d_A = "
                        + std::to_string(rho.da()));
}

} // namespace

BipartiteState das_tau(const BipartiteState& rho, const DasConfig& cfg) {
    require_qubit_alice(rho);
    cfg.validate();
    const CMatrix rho_b = partial_trace_a(rho.matrix(), rho.da(), rho.db());
    CMatrix tau = cfg.mu * rho.matrix() + 0.5 * (1.0 - cfg.mu) * kron(CMatrix::Identity(2, 2), rho_b);
    // Convex combination of two states; positivity holds by construction.
    return BipartiteState::trusted(rho.da(), rho.db(), std::move(tau));
}

SteeringVerdict das_steering_check(const BipartiteState& rho, const DasConfig& cfg) {
    const EntanglementVerdict npt = is_npt(das_tau(rho, cfg));
    auto v = SteeringVerdict::from_sides(-npt.witness, kNptTol - kViolationTol, "das-npt");
    v.violated = npt.entangled;
    if (rho.db() > 3) v.note = "npt-lower-bound";
    return v;
}

EntanglementVerdict ccnr_entanglement_check(const BipartiteState& rho, const LooBasis& basis_a,
                                            const LooBasis& basis_b) {
    if (basis_a.dim() != rho.da() || basis_b.dim() != rho.db())
        throw Error(ErrorCode::Shape, "operator bases do not match the factor dimensions");
    const auto [ra, rb] = reduced_states(rho);
    const double lhs = trace_norm(correlation_matrix(rho, basis_a, basis_b));
    const double rhs =
        std::sqrt(std::max(0.0, 1.0 - ra.purity()) * std::max(0.0, 1.0 - rb.purity()));
    EntanglementVerdict v;
    v.method = EntanglementMethod::Correlation;
    v.witness = lhs - rhs;
    v.entangled = v.witness > kViolationTol;
    return v;
}

double das_local_equivalence_residual(const BipartiteState& rho) {
    require_qubit_alice(rho);
    const DasConfig cfg{kDasMuMax};
    const BipartiteState tau = das_tau(rho, cfg);
    const LooBasis ga = gellmann_basis(rho.da());
    const LooBasis gb = gellmann_basis(rho.db());

    const auto [ta, tb] = reduced_states(tau);
    const double tau_lhs = trace_norm(correlation_matrix(tau, ga, gb)) / cfg.mu;
    const double tau_rhs =
        std::sqrt(std::max(0.0, 1.0 - ta.purity()) * std::max(0.0, 1.0 - tb.purity())) / cfg.mu;

    const SteeringVerdict loo = loo_steering_check(rho, ga, gb);
    return std::max(std::abs(tau_lhs - loo.lhs), std::abs(tau_rhs - loo.rhs));
}

} // namespace steerlab
