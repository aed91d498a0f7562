#include <gtest/gtest.h>

#include <cmath>

#include "steerlab/entanglement.hpp"
#include "steerlab/errors.hpp"
#include "steerlab/sampler.hpp"
#include "support.hpp"

using namespace steerlab;
using namespace testing_support;

namespace {

double min_eig(const CMatrix& m) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(m);
    return es.eigenvalues().minCoeff();
}

} // namespace

TEST(SamplerConfig, DefaultsAndValidation) {
    SamplerConfig cfg;
    cfg.dim = 4;
    EXPECT_EQ(cfg.resolved_burn_in(), 50 * 15);
    EXPECT_EQ(cfg.resolved_thinning(), 15);
    cfg.thinning = 0;
    EXPECT_ERROR_CODE(cfg.validate(), ErrorCode::Configuration);
    cfg.thinning = 2;
    cfg.burn_in = -1;
    EXPECT_ERROR_CODE(cfg.validate(), ErrorCode::Configuration);
    cfg.dim = 1;
    cfg.burn_in = 0;
    EXPECT_ERROR_CODE(cfg.validate(), ErrorCode::InvalidDimension);
}

TEST(ChainState, CenterIsMaximallyMixed) {
    const ChainState c = ChainState::center(3);
    EXPECT_EQ(c.c.size(), 8);
    EXPECT_LT((c.density() - CMatrix::Identity(3, 3) / 3.0).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Chord, EndpointsTouchTheBoundary) {
    Rng rng(19);
    for (int dim : {2, 3, 4, 6}) {
        ChainState s = ChainState::center(dim);
        for (int k = 0; k < 20; ++k) s = hit_and_run_step(s, rng);
        const RVector u = random_direction(rng, dim * dim - 1);
        EXPECT_NEAR(u.norm(), 1.0, 1e-14);
        const Chord ch = chord_endpoints(s, u);
        EXPECT_LT(ch.t_min, 0.0);
        EXPECT_GT(ch.t_max, 0.0);
        const CMatrix base = s.density();
        const CMatrix dir = gellmann_traceless_combination(dim, std::span<const double>(u.data(), u.size()));
        EXPECT_NEAR(min_eig(base + ch.t_max * dir), 0.0, 1e-10) << dim;
        EXPECT_NEAR(min_eig(base + ch.t_min * dir), 0.0, 1e-10) << dim;
        EXPECT_LT(min_eig(base + 1.001 * ch.t_max * dir), 0.0);
        EXPECT_GT(min_eig(base + 0.999 * ch.t_max * dir), 0.0);
    }
    ChainState boundary = ChainState::center(2);
    boundary.c[0] = 1.0 / std::sqrt(2.0); // pure state
    EXPECT_ERROR_CODE(chord_endpoints(boundary, RVector::Unit(3, 1)), ErrorCode::ChainRepair);
    EXPECT_ERROR_CODE(chord_endpoints(ChainState::center(2), RVector::Unit(8, 0)), ErrorCode::Shape);
}

TEST(HitAndRun, StaysInsideAndIsDeterministic) {
    SamplerConfig cfg;
    cfg.dim = 6;
    cfg.seed = 42;
    const auto a = sample_states(cfg, 2, 3, 50);
    const auto b = sample_states(cfg, 2, 3, 50);
    ASSERT_EQ(a.size(), 50u);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].matrix(), b[i].matrix());
        EXPECT_NEAR(a[i].density().trace(), 1.0, 1e-12);
        EXPECT_GT(a[i].density().min_eigenvalue(), -1e-12);
    }
    cfg.seed = 43;
    const auto c = sample_states(cfg, 2, 3, 1);
    EXPECT_NE(c[0].matrix(), a[0].matrix());
    EXPECT_ERROR_CODE(sample_states(cfg, 2, 2, 1), ErrorCode::Shape);
}

TEST(HitAndRun, ChainCountsStepsAndBurnIn) {
    SamplerConfig cfg;
    cfg.dim = 2;
    cfg.burn_in = 10;
    cfg.thinning = 3;
    HitAndRunChain chain(cfg);
    chain.next();
    EXPECT_EQ(chain.steps(), 13u);
    chain.next();
    EXPECT_EQ(chain.steps(), 16u);
}

TEST(HitAndRun, BlochDumpReplaysStates) {
    SamplerConfig cfg;
    cfg.dim = 4;
    cfg.seed = 9;
    const BlochDump dump = sample_bloch_vectors(cfg, 20);
    EXPECT_EQ(dump.burn_in, cfg.resolved_burn_in());
    EXPECT_EQ(dump.thinning, cfg.resolved_thinning());
    const auto states = sample_states(cfg, 2, 2, 20);
    for (std::size_t i = 0; i < states.size(); ++i) {
        const CMatrix rho = CMatrix::Identity(4, 4) / 4.0 +
                            gellmann_traceless_combination(
                                4, std::span<const double>(dump.samples[i].data(), dump.samples[i].size()));
        EXPECT_LT((rho - states[i].matrix()).cwiseAbs().maxCoeff(), 1e-14);
    }
}

TEST(HitAndRun, QubitSamplesAreUniformInTheBlochBall) {
    SamplerConfig cfg;
    cfg.dim = 2;
    cfg.seed = 3;
    const std::size_t n = 40000;
    const BlochDump dump = sample_bloch_vectors(cfg, n);
    double r2 = 0.0, inner = 0.0, mean_z = 0.0;
    for (const auto& c : dump.samples) {
        const double r = std::sqrt(2.0) * c.norm();
        EXPECT_LE(r, 1.0 + 1e-12);
        r2 += r * r;
        inner += r <= 0.5;
        mean_z += std::sqrt(2.0) * c[0];
    }
    // Uniform ball: E[r²] = 3/5, P(r ≤ 1/2) = 1/8, E[z] = 0.
    EXPECT_NEAR(r2 / n, 0.6, 0.01);
    EXPECT_NEAR(inner / n, 0.125, 0.01);
    EXPECT_NEAR(mean_z / n, 0.0, 0.015);
}

TEST(HitAndRun, TwoQubitNptFractionMatchesHilbertSchmidtMeasure) {
    // Separable probability of two-qubit states under the Hilbert–Schmidt measure is 8/33.
    SamplerConfig cfg;
    cfg.dim = 4;
    cfg.seed = 5;
    std::size_t npt = 0, n = 0;
    sample_states(cfg, 2, 2, 20000, [&](const BipartiteState& rho) {
        npt += is_npt(rho).entangled;
        ++n;
    });
    EXPECT_NEAR(double(npt) / double(n), 25.0 / 33.0, 0.02);
}
