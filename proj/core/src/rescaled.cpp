#include "steerlab/steering.hpp"

#include <cmath>
#include <vector>

#include "steerlab/errors.hpp"

namespace steerlab {

namespace {

struct NormAndGradient {
    double value = 0.0;
    RVector gradient;
};

// F(g) = ‖diag(g)·Ĉ‖₁ and its gradient diag(U·Vᵀ·Ĉᵀ) restricted to the
// nonzero singular directions.
NormAndGradient evaluate(const RMatrix& c_hat, const RVector& g) {
    const RMatrix a = g.asDiagonal() * c_hat;
    Eigen::JacobiSVD<RMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RVector& s = svd.singularValues();
    NormAndGradient out;
    out.gradient = RVector::Zero(g.size());
    if (s.size() == 0 || s[0] <= 0.0) return out;
    const double cutoff = 1e-12 * s[0];
    Eigen::Index rank = 0;
    while (rank < s.size() && s[rank] > cutoff) ++rank;
    out.value = s.head(rank).sum();
    const RMatrix uv = svd.matrixU().leftCols(rank) * svd.matrixV().leftCols(rank).transpose();
    out.gradient = uv.cwiseProduct(c_hat).rowwise().sum();
    return out;
}

// Projected gradient ascent on the unit sphere from one start.
RVector ascend(const RMatrix& c_hat, RVector g, const RescaleOptions& opts, double stop_above,
               double& value) {
    g.normalize();
    NormAndGradient cur = evaluate(c_hat, g);
    double step = 1.0;
    for (int it = 0; it < opts.max_iterations && cur.value <= stop_above; ++it) {
        RVector trial = g + step * cur.gradient;
        const double n = trial.norm();
        if (!(n > 0.0)) break;
        trial /= n;
        NormAndGradient next = evaluate(c_hat, trial);
        if (next.value > cur.value) {
            const double rel = (next.value - cur.value) / std::max(cur.value, 1e-300);
            g = std::move(trial);
            cur = std::move(next);
            step *= 2.0;
            if (rel < opts.relative_tolerance) break;
        } else {
            step *= 0.5;
            if (step < 1e-12) break;
        }
    }
    value = cur.value;
    return g;
}

struct Reduced {
    std::vector<Eigen::Index> kept; // indices with v_i above the floor
    RMatrix c_hat;                   // rows C_i / √v_i for kept i
    RVector sqrt_v;                  // √v_i for kept i
    double variance_sum = 0.0;       // Σ v_i over kept i
};

Reduced reduce(const CorrelationMatrix& c, const RVector& v, double floor) {
    Reduced r;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (v[i] >= floor) r.kept.push_back(i);
    if (r.kept.empty())
        throw Error(ErrorCode::DegenerateVariance,
                    "all of Alice's observables have zero variance; rescaled bound is undefined");
    const auto k = static_cast<Eigen::Index>(r.kept.size());
    r.c_hat.resize(k, c.cols());
    r.sqrt_v.resize(k);
    for (Eigen::Index row = 0; row < k; ++row) {
        const Eigen::Index i = r.kept[static_cast<std::size_t>(row)];
        r.sqrt_v[row] = std::sqrt(v[i]);
        r.c_hat.row(row) = c.row(i) / r.sqrt_v[row];
        r.variance_sum += v[i];
    }
    return r;
}

} // namespace

SphereMaximum maximize_on_sphere(const RMatrix& c_hat, const RVector& uniform_start,
                                 const RescaleOptions& opts, double stop_above) {
    if (uniform_start.size() != c_hat.rows() || !(uniform_start.norm() > 0.0))
        throw Error(ErrorCode::Shape, "uniform start must be a nonzero vector matching the row count");
    SphereMaximum best;
    best.value = -1.0;
    Rng rng(opts.seed);
    for (int start = 0; start <= opts.restarts; ++start) {
        RVector g0(c_hat.rows());
        if (start == 0) {
            g0 = uniform_start;
        } else {
            for (Eigen::Index i = 0; i < g0.size(); ++i) g0[i] = rng.normal();
        }
        double value = 0.0;
        RVector g = ascend(c_hat, std::move(g0), opts, stop_above, value);
        ++best.starts_run;
        if (value > best.value) {
            best.value = value;
            best.g = std::move(g);
        }
        if (best.value > stop_above) break;
    }
    return best;
}

RVector observable_variances(const HermitianMatrix& rho_a, const LooBasis& basis_a) {
    if (rho_a.dim() != basis_a.dim()) throw Error(ErrorCode::Shape, "state does not match Alice's basis");
    RVector v(basis_a.size());
    for (int i = 0; i < basis_a.size(); ++i) {
        const CMatrix& g = basis_a[i].matrix();
        const double second = (g * g * rho_a.matrix()).trace().real();
        const double mean = hs_inner(basis_a[i], rho_a);
        v[i] = std::max(0.0, second - mean * mean);
    }
    return v;
}

RescaledResult optimize_rescaled_steering(const BipartiteState& rho, const LooBasis& basis_a,
                                          const LooBasis& basis_b, const RescaleOptions& opts) {
    if (basis_a.dim() != rho.da() || basis_b.dim() != rho.db())
        throw Error(ErrorCode::Shape, "operator bases do not match the factor dimensions");
    const auto [ra, rb] = reduced_states(rho);
    const CorrelationMatrix c = correlation_matrix(rho, basis_a, basis_b);
    RescaledResult result;
    result.variances = observable_variances(ra, basis_a);
    const Reduced red = reduce(c, result.variances, opts.variance_floor);

    const SphereMaximum best = maximize_on_sphere(red.c_hat, red.sqrt_v, opts);

    // h_i = g_i/√v_i on kept components; the rest are capped.
    RVector h = RVector::Zero(result.variances.size());
    double h_max = 0.0;
    for (std::size_t k = 0; k < red.kept.size(); ++k) {
        const auto row = static_cast<Eigen::Index>(k);
        h[red.kept[k]] = best.g[row] / red.sqrt_v[row];
        h_max = std::max(h_max, std::abs(h[red.kept[k]]));
    }
    for (Eigen::Index i = 0; i < h.size(); ++i)
        if (result.variances[i] < opts.variance_floor) h[i] = opts.cap_factor * h_max;
    result.h.h = h;

    const double scale = std::sqrt(red.variance_sum);
    const double lhs = trace_norm(RMatrix(h.asDiagonal() * c));
    const double rhs = std::sqrt(std::max(0.0, 1.0 - rb.purity()));
    result.verdict = SteeringVerdict::from_sides(scale * lhs, scale * rhs, "loo-rescaled");
    return result;
}

bool rescaled_steering_detects(const BipartiteState& rho, const LooBasis& basis_a,
                               const LooBasis& basis_b, const RescaleOptions& opts) {
    if (basis_a.dim() != rho.da() || basis_b.dim() != rho.db())
        throw Error(ErrorCode::Shape, "operator bases do not match the factor dimensions");
    const auto [ra, rb] = reduced_states(rho);
    const CorrelationMatrix c = correlation_matrix(rho, basis_a, basis_b);
    const Reduced red = reduce(c, observable_variances(ra, basis_a), opts.variance_floor);
    const double scale = std::sqrt(red.variance_sum);
    const double rhs = std::sqrt(std::max(0.0, 1.0 - rb.purity()));
    // max_g ‖diag(g)Ĉ‖₁ ≤ ‖Ĉ‖_F, so no rescaling can violate below this.
    if (red.c_hat.norm() <= rhs) return false;
    const double threshold = rhs + kViolationTol / scale;
    return maximize_on_sphere(red.c_hat, red.sqrt_v, opts, threshold).value > threshold;
}

} // namespace steerlab
