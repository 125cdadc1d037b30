#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "ruelle/rng.hpp"
#include "ruelle/transfer.hpp"

using namespace ruelle;

namespace {

const double r2 = 1.0 / std::sqrt(2.0);
const FilterSpec haar = make_filter(2, LaurentPoly::from_real(0, {r2, r2}));
const FilterSpec worked = make_filter(2, LaurentPoly::from_real(0, {r2, 0, 0, r2}));
const FilterSpec trivial = make_filter(2, LaurentPoly::constant(1.0));
const LaurentPoly h_phi = LaurentPoly::from_real(-2, {1.0 / 9, 2.0 / 9, 3.0 / 9, 2.0 / 9, 1.0 / 9});
const LaurentPoly h_check = rotate(h_phi, 1, 2);

FilterSpec daub4() {
    const double s = std::sqrt(3.0);
    const double d = 4 * std::sqrt(2.0);
    return make_filter(2, LaurentPoly::from_real(0, {(1 + s) / d, (3 + s) / d, (3 - s) / d, (1 - s) / d}));
}

}  // namespace

TEST(Ruelle, FixesHphi) {
    EXPECT_LT(max_coeff_diff(apply_ruelle(worked, h_phi), h_phi), 1e-15);
}

TEST(Ruelle, FixesConstantsForQuadratureFilters) {
    for (const auto& f : {haar, worked, daub4()})
        EXPECT_LT(max_coeff_diff(apply_ruelle(f, LaurentPoly::constant(1.0)), LaurentPoly::constant(1.0)), 1e-15);
}

TEST(Ruelle, RotatedDensityImage) {
    const LaurentPoly expected = LaurentPoly::from_real(-2, {-1.0 / 9, 0, 1.0 / 3, 0, -1.0 / 9});
    EXPECT_LT(max_coeff_diff(apply_ruelle(worked, h_check), expected), 1e-15);
    for (int t = 0; t < 64; ++t) {
        const double w = 2 * std::numbers::pi * t / 64;
        const cplx oracle = apply_ruelle_pointwise(worked, [](double x) { return h_check(x); }, w);
        EXPECT_NEAR(std::abs(oracle - expected(w)), 0.0, 1e-14);
    }
}

TEST(Ruelle, PointwiseValues) {
    auto f = [](double x) { return h_check(x); };
    EXPECT_NEAR(std::abs(apply_ruelle_pointwise(worked, f, std::numbers::pi) - 1.0 / 9), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(apply_ruelle_pointwise(worked, f, 0.0) - 1.0 / 9), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(apply_ruelle_pointwise(daub4(), [](double) { return 1.0; }, 1.234) - 1.0), 0.0, 1e-14);
}

TEST(RuelleProperties, CoefficientRouteMatchesPointwiseOracle) {
    RngStream rng(CounterRng(11), 0);
    for (const auto& filter : {haar, worked, daub4(), make_filter(3, LaurentPoly::from_real(0, {0.5, 0.3, 0.2, 0.4}))}) {
        for (int trial = 0; trial < 10; ++trial) {
            std::vector<cplx> c;
            for (int n = -4; n <= 4; ++n) c.emplace_back(rng.uniform(-1, 1), rng.uniform(-1, 1));
            const LaurentPoly f(-4, c);
            const LaurentPoly Rf = apply_ruelle(filter, f);
            for (int s = 0; s < 6; ++s) {
                const double w = rng.uniform(0, 2 * std::numbers::pi);
                EXPECT_NEAR(std::abs(Rf(w) - apply_ruelle_pointwise(filter, [&](double x) { return f(x); }, w)), 0.0,
                            1e-12);
            }
        }
    }
}

TEST(Predicates, Quadrature) {
    EXPECT_TRUE(check_quadrature(worked));
    EXPECT_TRUE(check_quadrature(trivial));
    EXPECT_TRUE(check_quadrature(daub4()));
    EXPECT_FALSE(check_quadrature(make_filter(2, LaurentPoly::from_real(0, {1, 1}))));
}

TEST(Predicates, Lowpass) {
    EXPECT_TRUE(check_lowpass(worked));
    EXPECT_FALSE(check_lowpass(trivial));
    EXPECT_TRUE(check_lowpass(haar));
}

TEST(TransferMatrix, HaarEntries) {
    const TransferMatrix T = build_transfer_matrix(haar);
    ASSERT_EQ(T.window, 1);
    const double expected[3][3] = {{.5, 0, 0}, {.5, 1, .5}, {0, 0, .5}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) EXPECT_NEAR(std::abs(T.entries(i, j) - expected[i][j]), 0.0, 1e-15);
}

TEST(TransferMatrix, WorkedFilterShape) {
    const TransferMatrix T = build_transfer_matrix(worked);
    EXPECT_EQ(T.window, 3);
    EXPECT_EQ(T.dim(), 7);
    for (Eigen::Index i = 0; i < 7; ++i)
        for (Eigen::Index j = 0; j < 7; ++j) {
            const double v = std::abs(T.entries(i, j));
            EXPECT_TRUE(v < 1e-15 || std::abs(v - 0.5) < 1e-15 || std::abs(v - 1.0) < 1e-15) << v;
        }
    const TransferMatrix one = build_transfer_matrix(trivial);
    EXPECT_EQ(one.window, 0);
    EXPECT_NEAR(std::abs(one.entries(0, 0) - 1.0), 0.0, 1e-15);
}

TEST(TransferMatrix, MatrixActionEqualsOperator) {
    const TransferMatrix T = build_transfer_matrix(worked);
    EXPECT_LT(max_coeff_diff(T.apply(h_check), apply_ruelle(worked, h_check)), 1e-15);
}

TEST(FixedSpace, Haar) {
    const EigenReport r = fixed_space(haar);
    EXPECT_EQ(r.dimension, 1);
    EXPECT_TRUE(r.pure);
    EXPECT_LT(span_residual(r.basis, LaurentPoly::constant(1.0)), 1e-9);
}

TEST(FixedSpace, WorkedFilterHasTwoDimensions) {
    const EigenReport r = fixed_space(worked);
    EXPECT_EQ(r.dimension, 2);
    EXPECT_FALSE(r.pure);
    EXPECT_LT(span_residual(r.basis, LaurentPoly::constant(1.0)), 1e-9);
    EXPECT_LT(span_residual(r.basis, h_phi), 1e-9);
    for (double res : r.residuals) EXPECT_LT(res, 1e-8);
}

TEST(FixedSpace, TrivialFilter) { EXPECT_EQ(fixed_space(trivial).dimension, 1); }

TEST(FixedSpace, Daubechies4IsPure) {
    const EigenReport r = fixed_space(daub4());
    EXPECT_EQ(r.dimension, 1);
    EXPECT_TRUE(r.pure);
}

TEST(HarmonicDensity, ValidatesInput) {
    EXPECT_NO_THROW(make_harmonic_density(worked, h_phi));
    EXPECT_THROW(make_harmonic_density(haar, h_phi), ContractError);
    EXPECT_THROW(make_harmonic_density(worked, h_check), ContractError);
}

TEST(FilterPower, Expansions) {
    const LaurentPoly m2 = filter_power(haar, 2);
    EXPECT_LT(max_coeff_diff(m2, LaurentPoly::from_real(0, {.5, .5, .5, .5})), 1e-15);
    EXPECT_EQ(filter_power(worked, 0), LaurentPoly::constant(1.0));
    EXPECT_EQ(filter_power(worked, 1), worked.m0);
}

TEST(Moments, NonTracialValues) {
    EXPECT_NEAR(std::abs(moment(worked, h_phi, 0, 0, LaurentPoly::monomial(1)) - 2.0 / 9), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(moment(worked, h_phi, 0, 0, LaurentPoly::monomial(2)) - 1.0 / 9), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(moment(worked, h_phi, 0, 1, LaurentPoly::constant(1.0)) - std::sqrt(2.0) / 6), 0.0, 1e-15);
    EXPECT_THROW(moment(worked, h_phi, 2, 1, LaurentPoly::constant(1.0)), ContractError);
}

TEST(Cocycle, TrivialPairs) {
    const LaurentPoly one = LaurentPoly::constant(1.0);
    EXPECT_EQ(cocycle_pair_residual(worked.m0, worked.m0, one, 2, 128), 0.0);
    EXPECT_GT(cocycle_pair_residual(worked.m0, scale(worked.m0, -1.0), one, 2, 128), 0.1);
}

TEST(Cocycle, TransformOfWorkedFilter) {
    const CocycleResult res = cocycle_transform(worked, h_phi, 384, 1e-9);
    EXPECT_LT(res.quadrature_residual, 1e-8);
    EXPECT_GT(res.admissible_points, 0);
    for (const auto& s : res.samples) {
        EXPECT_TRUE(std::isfinite(s.value.real()) && std::isfinite(s.value.imag()));
        // h(z^2) vanishes at omega = pi/3 and pi, whose doubles sit on the zero set of h
        if (std::abs(s.omega - std::numbers::pi / 3) < 1e-12 || std::abs(s.omega - 2 * std::numbers::pi / 3) < 1e-12) {
            EXPECT_FALSE(s.admissible);
        }
    }
    const auto m0h = cocycle_filter(worked, h_phi, 1e-9);
    const double res2 = cocycle_pair_residual(
        2, [](double w) { return worked.m0(w); }, m0h,
        [](double w) { return cplx(std::sqrt(std::max(0.0, h_phi(w).real()))); }, 384);
    EXPECT_LT(res2, 1e-9);
}

TEST(Cocycle, ConstantDensityLeavesFilter) {
    const CocycleResult res = cocycle_transform(worked, LaurentPoly::constant(1.0), 64, 1e-9);
    for (const auto& s : res.samples) EXPECT_NEAR(std::abs(s.value - worked.m0(s.omega)), 0.0, 1e-15);
    EXPECT_LT(res.quadrature_residual, 1e-12);
}

TEST(Cuntz, IsometryOfConstant) {
    EXPECT_EQ(cuntz_s(worked, 0, LaurentPoly::constant(1.0)), worked.m0);
}

TEST(CuntzProperties, RelationsHoldOnRandomInputs) {
    RngStream rng(CounterRng(5), 0);
    for (const auto& f : {haar, worked, daub4()}) {
        for (int t = 0; t < 10; ++t) {
            std::vector<cplx> c;
            for (int n = -5; n <= 5; ++n) c.emplace_back(rng.uniform(-1, 1), rng.uniform(-1, 1));
            const LaurentPoly x(-5, c);
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) {
                    const LaurentPoly y = cuntz_s_adjoint(f, i, cuntz_s(f, j, x));
                    EXPECT_LT(max_coeff_diff(y, i == j ? x : LaurentPoly{}), 1e-14);
                }
            const LaurentPoly sum = cuntz_s(f, 0, cuntz_s_adjoint(f, 0, x)) + cuntz_s(f, 1, cuntz_s_adjoint(f, 1, x));
            EXPECT_LT(max_coeff_diff(sum, x), 1e-14);
        }
    }
}

TEST(AdjointDecay, HaarShiftDecay) {
    const LaurentPoly f = LaurentPoly::from_real(-1, {0.5, 0, 0.5});
    const auto norms = weighted_adjoint_power_decay(haar, LaurentPoly::constant(1.0), f, 4, 64);
    ASSERT_EQ(norms.size(), 4u);
    for (std::size_t i = 1; i < norms.size(); ++i) EXPECT_LE(norms[i], norms[i - 1] + 1e-12);
    EXPECT_TRUE(weighted_adjoint_power_decay(haar, LaurentPoly::constant(1.0), f, 0, 64).empty());
}

TEST(ConditionalExpectation, Identities) {
    const LaurentPoly one = LaurentPoly::constant(1.0);
    for (const cplx v : conditional_expectation(haar, one, [](double) { return cplx(1.0); }, 32))
        EXPECT_NEAR(std::abs(v - 1.0), 0.0, 1e-14);
    const auto e = conditional_expectation(haar, one, [](double w) { return LaurentPoly::monomial(1)(w); }, 32);
    const LaurentPoly Re1 = apply_ruelle(haar, LaurentPoly::monomial(1));
    for (int t = 0; t < 32; ++t) EXPECT_NEAR(std::abs(e[t] - Re1(2 * std::numbers::pi * t / 32)), 0.0, 1e-14);
    EXPECT_LT(projection_identity_residual(worked, h_phi, LaurentPoly::monomial(1), LaurentPoly::monomial(2), 256), 1e-12);
    EXPECT_LT(pullout_residual(haar, one, [](double w) { return cplx(std::cos(3 * w), std::sin(w)); }, 64), 1e-12);
}

TEST(L1Norm, BoundWitness) {
    const auto one = l1_norm_bound_witness(trivial, 4);
    EXPECT_NEAR(one.bound, 1.0, 1e-12);
    EXPECT_NEAR(one.ratio, 1.0, 1e-9);
    for (const auto& f : {haar, worked}) {
        const auto w = l1_norm_bound_witness(f, 16);
        EXPECT_NEAR(w.bound, 2.0, 1e-9);
        EXPECT_GE(w.ratio, 1.8);
        EXPECT_LE(w.ratio, w.bound + 1e-12);
    }
}
