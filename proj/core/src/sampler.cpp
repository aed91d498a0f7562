#include "steerlab/sampler.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "steerlab/errors.hpp"

namespace steerlab {

namespace {

constexpr double kSingularTol = 1e-13;
constexpr double kChordShrink = 1e-9;

CMatrix traceless_part(int dim, const RVector& c) {
    return gellmann_traceless_combination(
        dim, std::span<const double>(c.data(), static_cast<std::size_t>(c.size())));
}

} // namespace

long SamplerConfig::resolved_burn_in() const {
    return burn_in.value_or(50L * (static_cast<long>(dim) * dim - 1));
}

long SamplerConfig::resolved_thinning() const {
    return thinning.value_or(static_cast<long>(dim) * dim - 1);
}

void SamplerConfig::validate() const {
    if (dim < 2) throw Error(ErrorCode::InvalidDimension, "sampler dimension must be >= 2");
    if (resolved_burn_in() < 0) throw Error(ErrorCode::Configuration, "burn-in must be >= 0");
    if (resolved_thinning() < 1) throw Error(ErrorCode::Configuration, "thinning must be >= 1");
}

ChainState ChainState::center(int dim) { return {dim, RVector::Zero(dim * dim - 1)}; }

CMatrix ChainState::density() const {
    CMatrix rho = traceless_part(dim, c);
    rho.diagonal().array() += 1.0 / dim;
    return rho;
}

RVector random_direction(Rng& rng, int n) {
    if (n < 1) throw Error(ErrorCode::InvalidDimension, "direction dimension must be >= 1");
    RVector u(n);
    double norm = 0.0;
    do {
        for (int i = 0; i < n; ++i) u[i] = rng.normal();
        norm = u.norm();
    } while (!(norm > 0.0));
    return u / norm;
}

Chord chord_endpoints(const ChainState& state, const RVector& u) {
    if (u.size() != state.c.size()) throw Error(ErrorCode::Shape, "direction has the wrong length");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(state.density());
    const RVector& lambda = es.eigenvalues();
    if (lambda[0] < kSingularTol)
        throw Error(ErrorCode::ChainRepair,
                    "chain state is numerically singular (min eigenvalue "
                        + std::to_string(lambda[0]) + ")");
    // ρ + tU = ρ^{1/2}(I + tW)ρ^{1/2} with W = ρ^{-1/2} U ρ^{-1/2}.
    const CMatrix inv_sqrt =
        es.eigenvectors() * lambda.cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().adjoint();
    const CMatrix w = inv_sqrt * traceless_part(state.dim, u) * inv_sqrt;
    Eigen::SelfAdjointEigenSolver<CMatrix> ws(w, Eigen::EigenvaluesOnly);
    const double w_min = ws.eigenvalues()[0];
    const double w_max = ws.eigenvalues()[ws.eigenvalues().size() - 1];
    if (!(w_min < 0.0) || !(w_max > 0.0))
        throw Error(ErrorCode::InvalidParameter, "direction must be a nonzero traceless operator");
    return {-1.0 / w_max, -1.0 / w_min};
}

ChainState hit_and_run_step(const ChainState& state, Rng& rng) {
    const RVector u = random_direction(rng, static_cast<int>(state.c.size()));
    const Chord chord = chord_endpoints(state, u);
    const double t = rng.uniform(chord.t_min + kChordShrink, chord.t_max - kChordShrink);
    return {state.dim, state.c + t * u};
}

namespace {

const SamplerConfig& validated(const SamplerConfig& config) {
    config.validate();
    return config;
}

} // namespace

HitAndRunChain::HitAndRunChain(const SamplerConfig& config)
    : config_(validated(config)), rng_(config.seed), state_(ChainState::center(config.dim)) {}

void HitAndRunChain::step() {
    try {
        state_ = hit_and_run_step(state_, rng_);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::ChainRepair) throw;
        state_.c *= 0.5;
        ++repairs_;
    }
    ++steps_;
}

const ChainState& HitAndRunChain::next() {
    if (!burned_in_) {
        for (long i = 0; i < config_.resolved_burn_in(); ++i) step();
        burned_in_ = true;
    }
    for (long i = 0; i < config_.resolved_thinning(); ++i) step();
    return state_;
}

void sample_states(const SamplerConfig& config, int da, int db, std::size_t n,
                   const std::function<void(const BipartiteState&)>& sink) {
    if (da * db != config.dim)
        throw Error(ErrorCode::Shape, "factor dimensions do not multiply to the sampler dimension");
    HitAndRunChain chain(config);
    for (std::size_t k = 0; k < n; ++k)
        sink(BipartiteState::trusted(da, db, chain.next().density()));
}

std::vector<BipartiteState> sample_states(const SamplerConfig& config, int da, int db,
                                          std::size_t n) {
    std::vector<BipartiteState> out;
    out.reserve(n);
    sample_states(config, da, db, n, [&](const BipartiteState& s) { out.push_back(s); });
    return out;
}

BlochDump sample_bloch_vectors(const SamplerConfig& config, std::size_t n) {
    HitAndRunChain chain(config);
    BlochDump dump{config.dim, config.seed, config.resolved_burn_in(), config.resolved_thinning(), {}};
    dump.samples.reserve(n);
    for (std::size_t k = 0; k < n; ++k) dump.samples.push_back(chain.next().c);
    return dump;
}

} // namespace steerlab
