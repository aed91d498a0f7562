#include "steerlab/nm_povm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <sstream>

#include "steerlab/errors.hpp"
#include "steerlab/rng.hpp"

namespace steerlab {

double PovmParams::x_lower() const { return static_cast<double>(d) / (M * M); }

double PovmParams::x_upper() const {
    const double dd = d;
    return std::min(dd * dd / (M * M), dd / M);
}

bool PovmParams::x_admissible() const {
    // The upper end is attainable; allow round-off when it is computed elsewhere.
    return x > x_lower() && x <= x_upper() * (1.0 + 1e-14);
}

bool PovmParams::informationally_complete() const { return (M - 1) * N + 1 == d * d; }

void PovmParams::validate() const {
    if (d < 2) throw Error(ErrorCode::InvalidDimension, "POVM dimension must be >= 2");
    if (N < 1 || M < 2) throw Error(ErrorCode::InvalidParameter, "POVM needs N >= 1 and M >= 2");
    if (!x_admissible()) {
        std::ostringstream os;
        os.precision(17);
        os << "x = " << x << " outside admissible range (" << x_lower() << ", " << x_upper()
           << "] for d=" << d << ", M=" << M;
        throw Error(ErrorCode::InvalidParameter, os.str());
    }
}

PovmParams default_params(int d, int n, int m) {
    PovmParams p{d, n, m, 0.0};
    p.x = p.x_lower() + 0.1 * (p.x_upper() - p.x_lower());
    return p;
}

std::vector<IcFamily> enumerate_ic_families(int d) {
    if (d < 2) throw Error(ErrorCode::InvalidDimension, "IC families need d >= 2");
    const int target = d * d - 1;
    std::vector<IcFamily> out;
    for (int n = 1; n <= target; ++n)
        if (target % n == 0) out.push_back({n, target / n + 1});
    return out;
}

double gamma(const PovmParams& p) {
    p.validate();
    return (p.x * p.M * p.M - p.d) / (p.M * (p.M - 1.0));
}

RMatrix povm_eigenvectors(const PovmParams& p) {
    const int nm = p.effect_count();
    const int cols = p.N * (p.M - 1) + 1;
    RMatrix x = RMatrix::Zero(nm, cols);
    x.col(0).setConstant(1.0 / std::sqrt(static_cast<double>(nm)));
    for (int alpha = 0; alpha < p.N; ++alpha) {
        for (int j = 2; j <= p.M; ++j) {
            const int col = 1 + alpha * (p.M - 1) + (j - 2);
            const double f = 1.0 / std::sqrt(static_cast<double>(j) * (j - 1));
            for (int k = 0; k < j - 1; ++k) x(p.index(alpha, k), col) = f;
            x(p.index(alpha, j - 1), col) = -(j - 1) * f;
        }
    }
    return x;
}

RMatrix sts_closed_form(const PovmParams& p) {
    const double g = gamma(p);
    const int nm = p.effect_count();
    RMatrix out = RMatrix::Constant(nm, nm, static_cast<double>(p.d) / (p.M * p.M));
    for (int alpha = 0; alpha < p.N; ++alpha)
        out.block(alpha * p.M, alpha * p.M, p.M, p.M).array() -= g / p.M;
    out.diagonal().array() += g;
    return out;
}

std::vector<double> expected_sts_spectrum(const PovmParams& p) {
    const double g = gamma(p);
    std::vector<double> out;
    out.insert(out.end(), static_cast<std::size_t>(p.N - 1), 0.0);
    out.insert(out.end(), static_cast<std::size_t>(p.N * (p.M - 1)), g);
    out.push_back(static_cast<double>(p.d) * p.N / p.M);
    std::sort(out.begin(), out.end());
    return out;
}

NmPovm::NmPovm(PovmParams params, LooBasis basis, RMatrix coefficients)
    : params_(params), basis_(std::move(basis)), s_(std::move(coefficients)) {
    if (basis_.dim() != params_.d)
        throw Error(ErrorCode::Shape, "POVM basis dimension does not match d");
    if (s_.rows() != basis_.size() || s_.cols() != params_.effect_count())
        throw Error(ErrorCode::Shape, "POVM coefficient matrix must be d^2 x NM");
    effects_.reserve(static_cast<std::size_t>(s_.cols()));
    for (Eigen::Index i = 0; i < s_.cols(); ++i) {
        BlochVector r{params_.d, s_.col(i)};
        effects_.push_back(reconstruct(r, basis_));
    }
}

RMatrix aligned_rotation(const PovmParams& params) {
    return RMatrix::Identity(params.d * params.d, params.d * params.d);
}

NmPovm povm_candidate(const PovmParams& params, const ConstructOptions& options) {
    params.validate();
    if (!params.informationally_complete())
        throw Error(ErrorCode::Unsupported,
                    "construction is only supported for informationally complete (N,M): "
                    "need (M-1)N+1 = d^2");

    LooBasis basis = gellmann_basis(params.d);
    const int n = params.d * params.d;
    // Coefficients of I/√d: the first column of Oᵀ must equal this vector so
    // that every sub-POVM sums to the identity.
    const RVector id_coeffs =
        bloch_expand(HermitianMatrix(CMatrix::Identity(params.d, params.d)), basis).coefficients
        / std::sqrt(static_cast<double>(params.d));

    RMatrix o;
    if (options.rotation) {
        o = *options.rotation;
        if (o.rows() != n || o.cols() != n)
            throw Error(ErrorCode::Shape, "rotation must be d^2 x d^2");
        if (!is_orthogonal(o))
            throw Error(ErrorCode::InvalidTransform, "rotation matrix is not orthogonal within 1e-10");
        if ((o.row(0).transpose() - id_coeffs).cwiseAbs().maxCoeff() > kOrthonormalTol)
            throw Error(ErrorCode::InvalidTransform,
                        "rotation must map the first eigenvector onto the identity direction");
    } else {
        Rng rng(options.seed);
        o = random_orthogonal_with_first_column(id_coeffs, rng).transpose();
    }

    const double g = gamma(params);
    RVector sqrt_lambda = RVector::Constant(n, std::sqrt(g));
    sqrt_lambda[0] = std::sqrt(static_cast<double>(params.d) * params.N / params.M);
    const RMatrix x = povm_eigenvectors(params);
    RMatrix s = o.transpose() * sqrt_lambda.asDiagonal() * x.transpose();

    return NmPovm(params, std::move(basis), std::move(s));
}

NmPovm construct_povm(const PovmParams& params, const ConstructOptions& options) {
    NmPovm povm = povm_candidate(params, options);
    const ValidationReport report = validate_povm(povm);
    if (!report.passed) {
        std::ostringstream os;
        os.precision(6);
        os << "(N,M)-POVM construction failed for d=" << params.d << " N=" << params.N
           << " M=" << params.M << " x=" << params.x << ": " << report.failures()
           << " (min effect eigenvalue " << report.min_eigenvalue << ")";
        throw ConstructionFailed(report.min_eigenvalue, os.str());
    }
    return povm;
}

double ValidationReport::max_deviation() const {
    double m = 0.0;
    for (const auto& r : relations)
        if (r.name != "positivity") m = std::max(m, r.max_deviation);
    return m;
}

std::string ValidationReport::failures() const {
    std::string out;
    for (const auto& r : relations) {
        if (r.passed) continue;
        if (!out.empty()) out += ", ";
        out += r.name;
    }
    return out;
}

ValidationReport validate_povm(const NmPovm& povm) {
    const PovmParams& p = povm.params();
    const int d = p.d;
    const CMatrix id = CMatrix::Identity(d, d);

    double completeness = 0.0, trace = 0.0, intra_diag = 0.0, intra_off = 0.0, inter = 0.0;
    double min_eig = std::numeric_limits<double>::infinity();
    const double off_target = (d - p.M * p.x) / (p.M * (p.M - 1.0));
    const double inter_target = static_cast<double>(d) / (p.M * p.M);

    for (int alpha = 0; alpha < p.N; ++alpha) {
        CMatrix sum = CMatrix::Zero(d, d);
        for (int a = 0; a < p.M; ++a) sum += povm.effect(alpha, a).matrix();
        completeness = std::max(completeness, (sum - id).cwiseAbs().maxCoeff());
    }
    for (int i = 0; i < povm.size(); ++i) {
        const auto& e = povm.effects()[static_cast<std::size_t>(i)];
        trace = std::max(trace, std::abs(e.trace() - static_cast<double>(d) / p.M));
        min_eig = std::min(min_eig, e.min_eigenvalue());
    }
    for (int i = 0; i < povm.size(); ++i) {
        const int ai = i / p.M;
        for (int j = i; j < povm.size(); ++j) {
            const int aj = j / p.M;
            const double v = hs_inner(povm.effects()[static_cast<std::size_t>(i)],
                                      povm.effects()[static_cast<std::size_t>(j)]);
            if (i == j)
                intra_diag = std::max(intra_diag, std::abs(v - p.x));
            else if (ai == aj)
                intra_off = std::max(intra_off, std::abs(v - off_target));
            else
                inter = std::max(inter, std::abs(v - inter_target));
        }
    }

    ValidationReport report;
    auto add = [&](std::string name, double dev) {
        report.relations.push_back({std::move(name), dev, dev < kPovmRelationTol});
    };
    add("completeness", completeness);
    add("trace", trace);
    add("intra-overlap-diagonal", intra_diag);
    add("intra-overlap-offdiagonal", intra_off);
    add("inter-overlap", inter);
    report.min_eigenvalue = min_eig;
    report.relations.push_back(
        {"positivity", std::max(0.0, -min_eig), min_eig >= -kPovmPositivityTol});
    report.passed = std::all_of(report.relations.begin(), report.relations.end(),
                                [](const RelationCheck& r) { return r.passed; });
    return report;
}

std::vector<double> sts_spectrum(const NmPovm& povm) {
    const RMatrix& s = povm.coefficients();
    Eigen::SelfAdjointEigenSolver<RMatrix> es(s.transpose() * s, Eigen::EigenvaluesOnly);
    const RVector& ev = es.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

namespace {

/// Smoothed smallest effect eigenvalue −τ·log Σ exp(−λ/τ) over all effects,
/// with its gradient in the traceless coefficients.
struct SoftMin {
    double value = 0.0;
    double min_eigenvalue = 0.0;
    RMatrix grad;
};

SoftMin soft_min(const RMatrix& c, double identity_part, int d, double tau, bool with_grad) {
    const auto nm = static_cast<std::size_t>(c.cols());
    std::vector<Eigen::SelfAdjointEigenSolver<CMatrix>> solvers(nm);
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < nm; ++k) {
        const auto col = static_cast<Eigen::Index>(k);
        CMatrix t = gellmann_traceless_combination(d, std::span<const double>(c.col(col).data(),
                                                                              static_cast<std::size_t>(c.rows())));
        t.diagonal().array() += identity_part;
        solvers[k].compute(t, with_grad ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
        lo = std::min(lo, solvers[k].eigenvalues().minCoeff());
    }
    double z = 0.0;
    for (const auto& es : solvers) z += (-(es.eigenvalues().array() - lo) / tau).exp().sum();
    SoftMin out;
    out.min_eigenvalue = lo;
    out.value = lo - tau * std::log(z);
    if (!with_grad) return out;
    out.grad.resize(c.rows(), c.cols());
    for (std::size_t k = 0; k < nm; ++k) {
        const auto& es = solvers[k];
        const RVector w = (-(es.eigenvalues().array() - lo) / tau).exp() / z;
        const CMatrix& v = es.eigenvectors();
        const CMatrix weighted = v * w.cast<Complex>().asDiagonal() * v.adjoint();
        out.grad.col(static_cast<Eigen::Index>(k)) = gellmann_coefficients(weighted).tail(c.rows());
    }
    return out;
}

RMatrix cayley(const RMatrix& a) {
    const RMatrix id = RMatrix::Identity(a.rows(), a.cols());
    return (id - 0.5 * a).partialPivLu().solve(id + 0.5 * a);
}

/// Alternating projections for nearly positive starts: clip every effect to
/// its positive part, then pull the traceless coefficients back onto the
/// set R·K with R orthogonal (orthogonal Procrustes).
RMatrix polish_rotation(RMatrix r, const RMatrix& k_rest, double identity_part, int d, bool rank_one,
                        int iterations, double target, double& min_eig) {
    RMatrix best = r;
    min_eig = soft_min(r * k_rest, identity_part, d, 1.0, false).min_eigenvalue;
    for (int it = 0; it < iterations && min_eig < target; ++it) {
        const RMatrix c = r * k_rest;
        RMatrix clipped(c.rows(), c.cols());
        for (Eigen::Index k = 0; k < c.cols(); ++k) {
            CMatrix t = gellmann_traceless_combination(
                d, std::span<const double>(c.col(k).data(), static_cast<std::size_t>(c.rows())));
            t.diagonal().array() += identity_part;
            Eigen::SelfAdjointEigenSolver<CMatrix> es(t);
            CMatrix pos;
            if (rank_one) {
                // Tr Π² = (Tr Π)² forces Π = (d/M)·|v⟩⟨v|.
                const Eigen::VectorXcd v = es.eigenvectors().col(d - 1);
                pos = (identity_part * d) * (v * v.adjoint());
            } else {
                const RVector lam = es.eigenvalues().cwiseMax(0.0);
                pos = es.eigenvectors() * lam.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
            }
            clipped.col(k) = gellmann_coefficients(pos).tail(c.rows());
        }
        Eigen::JacobiSVD<RMatrix> svd(clipped * k_rest.transpose(), Eigen::ComputeFullU | Eigen::ComputeFullV);
        r = svd.matrixU() * svd.matrixV().transpose();
        const double m = soft_min(r * k_rest, identity_part, d, 1.0, false).min_eigenvalue;
        if (m > min_eig) {
            min_eig = m;
            best = r;
        }
    }
    return best;
}

} // namespace

RotationSearchResult search_positive_rotation(const PovmParams& params, const RotationSearchOptions& options) {
    params.validate();
    if (!params.informationally_complete())
        throw Error(ErrorCode::Unsupported, "rotation search needs informationally complete (N,M)");
    const int n = params.d * params.d;
    const int m = n - 1;
    const double identity_part = 1.0 / params.M;
    const double trace = static_cast<double>(params.d) / params.M;
    const bool rank_one = std::abs(params.x - trace * trace) < 1e-12;

    // Traceless block of √Λ·Xᵀ; the identity row is fixed by the alignment constraint.
    const RMatrix x = povm_eigenvectors(params);
    const RMatrix k_rest = std::sqrt(gamma(params)) * x.rightCols(m).transpose();

    Rng rng(options.seed);
    RotationSearchResult best;
    best.min_eigenvalue = -std::numeric_limits<double>::infinity();
    RMatrix best_r = RMatrix::Identity(m, m);

    const double tau_start = 0.05 / params.M;
    const double tau_end = 1e-7;
    for (int start = 0; start <= options.restarts; ++start) {
        RMatrix r = start == 0 ? RMatrix::Identity(m, m) : random_orthogonal(m, rng);
        ++best.starts;
        double tau = tau_start;
        double eta = 0.1;
        SoftMin cur = soft_min(r * k_rest, identity_part, params.d, tau, true);
        for (int it = 0; it < options.max_iterations; ++it) {
            if (cur.min_eigenvalue > best.min_eigenvalue) {
                best.min_eigenvalue = cur.min_eigenvalue;
                best_r = r;
            }
            if (cur.min_eigenvalue >= options.margin) break;
            const RMatrix g = cur.grad * k_rest.transpose();
            const RMatrix rg = r.transpose() * g;
            const RMatrix omega = 0.5 * (rg - rg.transpose());
            if (omega.norm() < 1e-14 || eta < 1e-14) {
                if (tau <= tau_end) break;
                tau = std::max(tau / 4.0, tau_end);
                eta = 0.1;
                cur = soft_min(r * k_rest, identity_part, params.d, tau, true);
                continue;
            }
            const RMatrix trial = r * cayley(eta * omega);
            SoftMin next = soft_min(trial * k_rest, identity_part, params.d, tau, true);
            if (next.value > cur.value) {
                r = trial;
                cur = std::move(next);
                eta = std::min(eta * 2.0, 10.0);
            } else {
                eta *= 0.5;
            }
        }
        if (cur.min_eigenvalue > best.min_eigenvalue) {
            best.min_eigenvalue = cur.min_eigenvalue;
            best_r = r;
        }
        if (best.min_eigenvalue < -kPovmPositivityTol && best.min_eigenvalue > -1e-3) {
            double polished = 0.0;
            RMatrix pr = polish_rotation(best_r, k_rest, identity_part, params.d, rank_one, options.max_iterations,
                                         -0.1 * kPovmPositivityTol, polished);
            if (polished > best.min_eigenvalue) {
                best.min_eigenvalue = polished;
                best_r = std::move(pr);
            }
        }
        if (best.min_eigenvalue >= options.margin) break;
    }

    // Oᵀ = diag(1, R), so the first row of O stays the identity direction.
    best.rotation = RMatrix::Identity(n, n);
    best.rotation.bottomRightCorner(m, m) = best_r.transpose();
    best.positive = best.min_eigenvalue >= -kPovmPositivityTol;
    return best;
}

} // namespace steerlab
