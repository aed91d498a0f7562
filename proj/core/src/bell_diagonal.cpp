#include "steerlab/steering.hpp"

#include <algorithm>
#include <cmath>

#include "steerlab/errors.hpp"

namespace steerlab {

namespace {

// ⟨σ_i⊗σ_i⟩ on Φ⁺, Φ⁻, Ψ⁺, Ψ⁻.
constexpr int kBellSigns[4][3] = {{1, -1, 1}, {-1, 1, 1}, {1, 1, -1}, {-1, -1, -1}};

} // namespace

std::array<double, 4> bell_diagonal_eigenvalues(const BellDiagonalParams& t) {
    std::array<double, 4> out{};
    for (int k = 0; k < 4; ++k)
        out[static_cast<std::size_t>(k)] =
            (1.0 + 2.0 * (kBellSigns[k][0] * t.t1 + kBellSigns[k][1] * t.t2 + kBellSigns[k][2] * t.t3))
            / 4.0;
    return out;
}

bool bell_diagonal_valid(const BellDiagonalParams& t, double tol) {
    const auto ev = bell_diagonal_eigenvalues(t);
    return *std::min_element(ev.begin(), ev.end()) >= -tol;
}

BipartiteState bell_diagonal_state(const BellDiagonalParams& t) {
    if (!bell_diagonal_valid(t))
        throw Error(ErrorCode::InvalidParameter, "Bell-diagonal parameters do not describe a state");
    const Complex i(0.0, 1.0);
    CMatrix sx(2, 2), sy(2, 2), sz(2, 2);
    sx << 0.0, 1.0, 1.0, 0.0;
    sy << 0.0, -i, i, 0.0;
    sz << 1.0, 0.0, 0.0, -1.0;
    CMatrix rho = CMatrix::Identity(4, 4) / 4.0;
    rho += t.t1 / 2.0 * kron(sx, sx);
    rho += t.t2 / 2.0 * kron(sy, sy);
    rho += t.t3 / 2.0 * kron(sz, sz);
    return BipartiteState(2, 2, std::move(rho));
}

std::string_view to_string(BellClass c) noexcept {
    switch (c) {
    case BellClass::Outside: return "outside";
    case BellClass::Detected: return "detected";
    case BellClass::Undetected: return "undetected";
    }
    return "unknown";
}

std::vector<BellGridPoint> bell_diagonal_scan(double resolution) {
    if (!(resolution > 0.0) || !std::isfinite(resolution))
        throw Error(ErrorCode::InvalidParameter, "scan resolution must be positive");
    const int steps = static_cast<int>(std::floor(1.0 / resolution + 1e-9));
    const LooBasis basis = gellmann_basis(2);
    std::vector<BellGridPoint> out;
    out.reserve(static_cast<std::size_t>(steps + 1) * (steps + 1) * (steps + 1));
    for (int i = 0; i <= steps; ++i) {
        for (int j = 0; j <= steps; ++j) {
            for (int k = 0; k <= steps; ++k) {
                BellGridPoint pt;
                pt.t = {-0.5 + i * resolution, -0.5 + j * resolution, -0.5 + k * resolution};
                if (bell_diagonal_valid(pt.t)) {
                    const auto v = loo_steering_check(bell_diagonal_state(pt.t), basis, basis);
                    pt.lhs = v.lhs;
                    pt.rhs = v.rhs;
                    pt.cls = v.violated ? BellClass::Detected : BellClass::Undetected;
                }
                out.push_back(pt);
            }
        }
    }
    return out;
}

} // namespace steerlab
