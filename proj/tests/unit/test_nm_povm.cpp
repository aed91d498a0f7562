#include <gtest/gtest.h>

#include <algorithm>

#include "steerlab/errors.hpp"
#include "steerlab/nm_povm.hpp"
#include "support.hpp"

using namespace steerlab;
using namespace testing_support;

namespace {

bool has_family(const std::vector<IcFamily>& f, int n, int m) {
    return std::find(f.begin(), f.end(), IcFamily{n, m}) != f.end();
}

CMatrix projector(const Eigen::Vector2cd& v) { return v * v.adjoint() / v.squaredNorm(); }

bool names_failure(const ValidationReport& r, const std::string& name) {
    for (const auto& c : r.relations)
        if (c.name == name) return !c.passed;
    return false;
}

} // namespace

TEST(IcFamilies, Enumeration) {
    const auto d2 = enumerate_ic_families(2);
    ASSERT_EQ(d2.size(), 2u);
    EXPECT_EQ(d2[0], (IcFamily{1, 4}));
    EXPECT_EQ(d2[1], (IcFamily{3, 2}));

    const auto d3 = enumerate_ic_families(3);
    const std::vector<IcFamily> expect3{{1, 9}, {2, 5}, {4, 3}, {8, 2}};
    EXPECT_EQ(d3, expect3);

    const auto d4 = enumerate_ic_families(4);
    EXPECT_TRUE(has_family(d4, 5, 4));
    EXPECT_TRUE(has_family(d4, 3, 6));
    for (int d = 3; d <= 7; ++d) {
        const auto f = enumerate_ic_families(d);
        EXPECT_TRUE(has_family(f, 1, d * d));
        EXPECT_TRUE(has_family(f, d + 1, d));
        EXPECT_TRUE(has_family(f, d * d - 1, 2));
        EXPECT_TRUE(has_family(f, d - 1, d + 2));
        EXPECT_TRUE(std::is_sorted(f.begin(), f.end(), [](auto a, auto b) { return a.N < b.N; }));
    }
}

TEST(PovmParams, AdmissibleRange) {
    PovmParams p{2, 3, 2, 1.0};
    EXPECT_TRUE(p.x_admissible());
    EXPECT_TRUE(p.informationally_complete());
    p.x = 2.0; // above d/M = 1
    EXPECT_ERROR_CODE(p.validate(), ErrorCode::InvalidParameter);
    p.x = 0.5; // equals d/M², excluded
    EXPECT_ERROR_CODE(p.validate(), ErrorCode::InvalidParameter);
    EXPECT_FALSE((PovmParams{2, 2, 2, 0.75}).informationally_complete());
    EXPECT_ERROR_CODE((PovmParams{1, 1, 4, 0.1}).validate(), ErrorCode::InvalidDimension);
}

TEST(Gamma, Examples) {
    EXPECT_NEAR(gamma({2, 3, 2, 1.0}), 1.0, 1e-15);
    EXPECT_NEAR(gamma({3, 4, 3, 1.0}), 1.0, 1e-15);
    EXPECT_NEAR(gamma({2, 1, 4, 0.125 + 1e-12}), 0.0, 1e-11);
    EXPECT_GT(gamma({2, 1, 4, 0.125 + 1e-12}), 0.0);
    EXPECT_ERROR_CODE(gamma({2, 3, 2, 1.5}), ErrorCode::InvalidParameter);
}

TEST(ConstructPovm, AlignedQubitMubIsThreeProjectiveMeasurements) {
    const PovmParams p{2, 3, 2, 1.0};
    const NmPovm povm = construct_povm(p, {aligned_rotation(p), 0});
    // Basis order {I, σz, σy, σx}: blocks measure σz, σy, σx in turn.
    const Eigen::Vector2cd up(1, 0), down(0, 1);
    const Eigen::Vector2cd yp(1, Complex(0, 1)), ym(1, Complex(0, -1));
    const Eigen::Vector2cd xp(1, 1), xm(1, -1);
    const std::vector<std::pair<Eigen::Vector2cd, Eigen::Vector2cd>> bases{{up, down}, {yp, ym}, {xp, xm}};
    for (int alpha = 0; alpha < 3; ++alpha) {
        const CMatrix e0 = povm.effect(alpha, 0).matrix(), e1 = povm.effect(alpha, 1).matrix();
        EXPECT_LT((e0 * e0 - e0).cwiseAbs().maxCoeff(), 1e-12);
        const CMatrix p0 = projector(bases[static_cast<std::size_t>(alpha)].first);
        const CMatrix p1 = projector(bases[static_cast<std::size_t>(alpha)].second);
        const bool direct = (e0 - p0).cwiseAbs().maxCoeff() < 1e-12 && (e1 - p1).cwiseAbs().maxCoeff() < 1e-12;
        const bool swapped = (e0 - p1).cwiseAbs().maxCoeff() < 1e-12 && (e1 - p0).cwiseAbs().maxCoeff() < 1e-12;
        EXPECT_TRUE(direct || swapped) << alpha;
    }
    EXPECT_TRUE(validate_povm(povm).passed);
}

TEST(ConstructPovm, QubitSicAtUpperEnd) {
    const PovmParams p{2, 1, 4, 0.25};
    const NmPovm povm = construct_povm(p, {aligned_rotation(p), 0});
    const ValidationReport r = validate_povm(povm);
    EXPECT_TRUE(r.passed) << r.failures();
    for (const auto& e : povm.effects()) EXPECT_NEAR(e.purity(), 0.25, 1e-12); // rank-one, weight 1/2
}

TEST(ConstructPovm, NearlyMixedGsicIsPositive) {
    const PovmParams p{2, 1, 4, 0.125 + 1e-3};
    const NmPovm povm = construct_povm(p, {std::nullopt, 4});
    for (const auto& e : povm.effects()) {
        EXPECT_LT((e.matrix() - CMatrix::Identity(2, 2) / 4.0).cwiseAbs().maxCoeff(), 0.05);
        EXPECT_GT(e.min_eigenvalue(), 0.0);
    }
}

TEST(ConstructPovm, DefaultParamsWithRandomRotationValidate) {
    for (int d = 2; d <= 4; ++d)
        for (const auto& f : enumerate_ic_families(d))
            for (std::uint64_t seed : {0ull, 1ull, 2ull}) {
                const PovmParams p = default_params(d, f.N, f.M);
                const NmPovm povm = construct_povm(p, {std::nullopt, seed});
                const ValidationReport r = validate_povm(povm);
                EXPECT_TRUE(r.passed) << d << " " << f.N << "," << f.M << ": " << r.failures();
                EXPECT_LT(r.max_deviation(), 1e-9);
            }
}

TEST(ConstructPovm, Errors) {
    EXPECT_ERROR_CODE(construct_povm({2, 2, 2, 0.75}), ErrorCode::Unsupported);
    EXPECT_ERROR_CODE(construct_povm({2, 3, 2, 1.5}), ErrorCode::InvalidParameter);

    const PovmParams p{2, 3, 2, 1.0};
    RMatrix bad = RMatrix::Identity(4, 4);
    bad.col(0).swap(bad.col(1));
    EXPECT_ERROR_CODE(construct_povm(p, {bad, 0}), ErrorCode::InvalidTransform);
    EXPECT_ERROR_CODE(construct_povm(p, {RMatrix::Identity(3, 3), 0}), ErrorCode::Shape);

    // Random rotations at the projective end are almost never positive.
    try {
        construct_povm({3, 4, 3, 1.0}, {std::nullopt, 3});
        ADD_FAILURE() << "expected a positivity failure";
    } catch (const ConstructionFailed& e) {
        EXPECT_LT(e.min_eigenvalue(), -kPovmPositivityTol);
        EXPECT_EQ(e.code(), ErrorCode::ConstructionFailed);
    }
}

TEST(ValidatePovm, FlagsPerturbations) {
    const PovmParams p{2, 3, 2, 1.0};
    const NmPovm good = construct_povm(p, {aligned_rotation(p), 0});
    EXPECT_TRUE(validate_povm(good).passed);

    RMatrix s = good.coefficients();
    s(2, 3) += 1e-3;
    const ValidationReport perturbed = validate_povm(NmPovm(p, gellmann_basis(2), s));
    EXPECT_FALSE(perturbed.passed);
    EXPECT_FALSE(perturbed.failures().empty());

    const ValidationReport scaled = validate_povm(NmPovm(p, gellmann_basis(2), 1.01 * good.coefficients()));
    EXPECT_FALSE(scaled.passed);
    EXPECT_TRUE(names_failure(scaled, "completeness"));
}

TEST(StsSpectrum, Examples) {
    const PovmParams mub2{2, 3, 2, 1.0};
    const auto s2 = sts_spectrum(construct_povm(mub2, {aligned_rotation(mub2), 0}));
    const std::vector<double> e2{0, 0, 1, 1, 1, 3};
    ASSERT_EQ(s2.size(), e2.size());
    for (std::size_t i = 0; i < e2.size(); ++i) EXPECT_NEAR(s2[i], e2[i], 1e-9);

    const auto e3 = expected_sts_spectrum({3, 4, 3, 1.0});
    std::vector<double> want3(3, 0.0);
    want3.insert(want3.end(), 8, 1.0);
    want3.push_back(4.0);
    EXPECT_EQ(e3, want3);

    const PovmParams sic{2, 1, 4, 0.2};
    const auto s = sts_spectrum(construct_povm(sic, {aligned_rotation(sic), 0}));
    EXPECT_GT(s.front(), 1e-6); // N = 1: no zero eigenvalue
}

TEST(StsSpectrum, ClosedFormAndRankAcrossFamilies) {
    for (int d = 2; d <= 4; ++d)
        for (const auto& f : enumerate_ic_families(d)) {
            const PovmParams p = default_params(d, f.N, f.M);
            const NmPovm povm = construct_povm(p, {std::nullopt, 7});
            const RMatrix& s = povm.coefficients();
            EXPECT_LT(((s.transpose() * s) - sts_closed_form(p)).cwiseAbs().maxCoeff(), 1e-9);
            const auto got = sts_spectrum(povm);
            const auto want = expected_sts_spectrum(p);
            ASSERT_EQ(got.size(), want.size());
            for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-9);
            Eigen::FullPivLU<RMatrix> lu(s);
            lu.setThreshold(1e-9);
            EXPECT_EQ(lu.rank(), d * d);
            // Effects expand back to the columns of S.
            for (int k = 0; k < povm.size(); ++k)
                EXPECT_LT((bloch_expand(povm.effects()[static_cast<std::size_t>(k)], povm.basis()).coefficients -
                           s.col(k))
                              .cwiseAbs()
                              .maxCoeff(),
                          1e-10);
        }
}

TEST(PovmEigenvectors, OrthonormalWithBlockZeroSums) {
    const PovmParams p = default_params(3, 2, 5);
    const RMatrix x = povm_eigenvectors(p);
    EXPECT_LT((x.transpose() * x - RMatrix::Identity(x.cols(), x.cols())).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(x(0, 0), 1.0 / std::sqrt(10.0), 1e-15);
    for (Eigen::Index c = 1; c < x.cols(); ++c)
        for (int alpha = 0; alpha < p.N; ++alpha) EXPECT_NEAR(x.col(c).segment(alpha * p.M, p.M).sum(), 0.0, 1e-14);
}

TEST(RotationSearch, FindsPositiveRotationsAtMidpoint) {
    for (int d = 2; d <= 3; ++d)
        for (const auto& f : enumerate_ic_families(d)) {
            PovmParams p{d, f.N, f.M, 0.0};
            p.x = p.x_midpoint();
            const auto r = search_positive_rotation(p);
            EXPECT_TRUE(r.positive) << d << " " << f.N << "," << f.M << " " << r.min_eigenvalue;
            const NmPovm povm = construct_povm(p, {r.rotation, 0});
            EXPECT_LT(validate_povm(povm).max_deviation(), 1e-9);
        }
}

TEST(RotationSearch, ReportsFailureWhenPositivityIsImpossible) {
    // Tr Π = Tr Π² = 3/2 with eigenvalues in [0, 1] has no solution at d = 3.
    PovmParams p{3, 8, 2, 1.5};
    RotationSearchOptions opts;
    opts.restarts = 2;
    opts.max_iterations = 300;
    const auto r = search_positive_rotation(p, opts);
    EXPECT_FALSE(r.positive);
    EXPECT_LT(r.min_eigenvalue, -0.05);
    EXPECT_TRUE(is_orthogonal(r.rotation));
}
