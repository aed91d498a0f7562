#include "steerlab/steering.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "steerlab/errors.hpp"

namespace steerlab {

SteeringVerdict SteeringVerdict::from_sides(double lhs, double rhs, std::string detector) {
    SteeringVerdict v;
    v.lhs = lhs;
    v.rhs = rhs;
    v.margin = lhs - rhs;
    v.violated = v.margin > kViolationTol;
    v.detector = std::move(detector);
    return v;
}

CorrelationMatrix correlation_matrix(const BipartiteState& rho,
                                     std::span<const HermitianMatrix> alice,
                                     std::span<const HermitianMatrix> bob) {
    const int da = rho.da(), db = rho.db();
    for (const auto& a : alice)
        if (a.dim() != da) throw Error(ErrorCode::Shape, "Alice's operators do not match d_A");
    for (const auto& b : bob)
        if (b.dim() != db) throw Error(ErrorCode::Shape, "Bob's operators do not match d_B");

    const CMatrix& r = rho.matrix();
    const CMatrix delta = r - kron(partial_trace_b(r, da, db), partial_trace_a(r, da, db));

    CorrelationMatrix c(static_cast<Eigen::Index>(alice.size()), static_cast<Eigen::Index>(bob.size()));
    CMatrix reduced(db, db);
    for (std::size_t i = 0; i < alice.size(); ++i) {
        // reduced = Tr_A{(A_i ⊗ I) Δ}: (reduced)_{b'b} = Σ_{a,a'} (A_i)_{a a'} Δ_{(a' b'),(a b)}.
        const CMatrix& a = alice[i].matrix();
        reduced.setZero();
        for (int p = 0; p < da; ++p)
            for (int q = 0; q < da; ++q)
                if (a(p, q) != Complex(0.0)) reduced += a(p, q) * delta.block(q * db, p * db, db, db);
        for (std::size_t j = 0; j < bob.size(); ++j) {
            // Tr{B reduced} = Σ B_{b b'} reduced_{b' b}
            const Complex value = (bob[j].matrix().array() * reduced.transpose().array()).sum();
            c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = value.real();
        }
    }
    return c;
}

CorrelationMatrix correlation_matrix(const BipartiteState& rho, const LooBasis& alice,
                                     const LooBasis& bob) {
    return correlation_matrix(rho, std::span<const HermitianMatrix>(alice.elements()),
                              std::span<const HermitianMatrix>(bob.elements()));
}

CorrelationMatrix correlation_matrix(const BipartiteState& rho, const NmPovm& alice,
                                     const NmPovm& bob) {
    return correlation_matrix(rho, std::span<const HermitianMatrix>(alice.effects()),
                              std::span<const HermitianMatrix>(bob.effects()));
}

namespace {

void require_bases(const BipartiteState& rho, const LooBasis& basis_a, const LooBasis& basis_b) {
    if (basis_a.dim() != rho.da() || basis_b.dim() != rho.db())
        throw Error(ErrorCode::Shape, "operator bases do not match the factor dimensions");
}

void require_ic(const NmPovm& povm) {
    if (!povm.params().informationally_complete())
        throw Error(ErrorCode::Unsupported, "POVM steering check needs informationally complete POVMs");
}

double loo_bound(double d_steer, double purity_steer, double purity_other) {
    return std::sqrt(std::max(0.0, d_steer - purity_steer) * std::max(0.0, 1.0 - purity_other));
}

} // namespace

SteeringVerdict loo_steering_check(const BipartiteState& rho, const LooBasis& basis_a,
                                   const LooBasis& basis_b) {
    require_bases(rho, basis_a, basis_b);
    const auto [ra, rb] = reduced_states(rho);
    const double lhs = trace_norm(correlation_matrix(rho, basis_a, basis_b));
    return SteeringVerdict::from_sides(lhs, loo_bound(rho.da(), ra.purity(), rb.purity()), "loo");
}

SteeringVerdict loo_steering_check_reverse(const BipartiteState& rho, const LooBasis& basis_a,
                                           const LooBasis& basis_b) {
    require_bases(rho, basis_a, basis_b);
    const auto [ra, rb] = reduced_states(rho);
    const double lhs = trace_norm(correlation_matrix(rho, basis_a, basis_b));
    return SteeringVerdict::from_sides(lhs, loo_bound(rho.db(), rb.purity(), ra.purity()), "loo-reverse");
}

SteeringVerdict povm_steering_check(const BipartiteState& rho, const NmPovm& povm_a,
                                    const NmPovm& povm_b) {
    require_ic(povm_a);
    require_ic(povm_b);
    require_bases(rho, povm_a.basis(), povm_b.basis());
    const double scale = std::sqrt(gamma(povm_a.params()) * gamma(povm_b.params()));
    const auto [ra, rb] = reduced_states(rho);
    const double lhs = trace_norm(correlation_matrix(rho, povm_a, povm_b));
    const double loo_lhs = trace_norm(correlation_matrix(rho, povm_a.basis(), povm_b.basis()));
    auto v = SteeringVerdict::from_sides(lhs, scale * loo_bound(rho.da(), ra.purity(), rb.purity()),
                                         "povm");
    v.scaling_residual = std::abs(lhs / scale - loo_lhs);
    return v;
}

double PovmMoments::max_residual() const {
    return std::max({std::abs(sum_squared_means - direct_sum_squared_means),
                     std::abs(sum_second_moments - direct_sum_second_moments),
                     std::abs(max_sum_squared_means - direct_max_sum_squared_means)});
}

PovmMoments povm_moments(const HermitianMatrix& rho_side, const NmPovm& povm) {
    require_ic(povm);
    const PovmParams& p = povm.params();
    if (rho_side.dim() != p.d) throw Error(ErrorCode::Shape, "state dimension does not match the POVM");

    const double g = gamma(p);
    const double offset = (static_cast<double>(p.N) * p.d / p.M - g) / p.d;
    PovmMoments m;
    m.sum_squared_means = g * rho_side.purity() + offset;
    m.sum_second_moments = p.d * g + offset;
    m.max_sum_squared_means = g + offset;

    std::vector<double> pure_sums(static_cast<std::size_t>(p.d), 0.0);
    for (const auto& e : povm.effects()) {
        const double mean = hs_inner(e, rho_side);
        m.direct_sum_squared_means += mean * mean;
        m.direct_sum_second_moments += (e.matrix() * e.matrix() * rho_side.matrix()).trace().real();
        for (int k = 0; k < p.d; ++k) {
            const double diag = e.matrix()(k, k).real();
            pure_sums[static_cast<std::size_t>(k)] += diag * diag;
        }
    }
    m.direct_max_sum_squared_means = *std::max_element(pure_sums.begin(), pure_sums.end());
    return m;
}

double scaling_identity_residual(const BipartiteState& rho, const NmPovm& povm_a,
                                 const NmPovm& povm_b, const LooBasis& basis_a,
                                 const LooBasis& basis_b) {
    require_ic(povm_a);
    require_ic(povm_b);
    require_bases(rho, basis_a, basis_b);
    const double povm_norm = trace_norm(correlation_matrix(rho, povm_a, povm_b));
    const double loo_norm = trace_norm(correlation_matrix(rho, basis_a, basis_b));
    const double scale = std::sqrt(gamma(povm_a.params()) * gamma(povm_b.params()));
    return std::abs(povm_norm - scale * loo_norm);
}

} // namespace steerlab
