#pragma once

#include <utility>

#include "steerlab/hermitian.hpp"

namespace steerlab {

enum class Subsystem { A, B };

inline constexpr double kStateTol = 1e-10;

/// Density matrix on C^{dA} ⊗ C^{dB}, Alice-major: row index = a·dB + b.
class BipartiteState {
public:
    /// Checks hermiticity, unit trace and positivity (min eigenvalue ≥ −1e-10).
    BipartiteState(int da, int db, CMatrix rho);
    BipartiteState(int da, int db, HermitianMatrix rho);

    /// Skips the positivity check; for producers that guarantee a valid state.
    static BipartiteState trusted(int da, int db, CMatrix rho);

    int da() const noexcept { return da_; }
    int db() const noexcept { return db_; }
    int dim() const noexcept { return da_ * db_; }
    const HermitianMatrix& density() const noexcept { return rho_; }
    const CMatrix& matrix() const noexcept { return rho_.matrix(); }

private:
    struct TrustedTag {};
    BipartiteState(int da, int db, HermitianMatrix rho, TrustedTag);

    int da_ = 0;
    int db_ = 0;
    HermitianMatrix rho_;
};

CMatrix kron(const CMatrix& a, const CMatrix& b);

/// Tr_B and Tr_A of a (dA·dB)-dimensional operator.
CMatrix partial_trace_b(const CMatrix& m, int da, int db);
CMatrix partial_trace_a(const CMatrix& m, int da, int db);

/// (ρ_A, ρ_B) = (Tr_B ρ, Tr_A ρ).
std::pair<HermitianMatrix, HermitianMatrix> reduced_states(const BipartiteState& rho);

BipartiteState product_state(const HermitianMatrix& rho_a, const HermitianMatrix& rho_b);
BipartiteState maximally_mixed(int da, int db);

/// Two-qubit singlet |Ψ⁻⟩⟨Ψ⁻|, |Ψ⁻⟩ = (|01⟩ − |10⟩)/√2.
BipartiteState singlet();
/// w·|Ψ⁻⟩⟨Ψ⁻| + (1 − w)·I/4, valid for −1/3 ≤ w ≤ 1.
BipartiteState werner(double w);
/// v·|Φ⁺⟩⟨Φ⁺| + (1 − v)·I/d² on C^d ⊗ C^d, valid for −1/(d²−1) ≤ v ≤ 1.
BipartiteState isotropic(int d, double v);

} // namespace steerlab
