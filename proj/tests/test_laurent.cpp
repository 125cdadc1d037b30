#include <cmath>
#include <map>
#include <numbers>

#include <gtest/gtest.h>

#include "ruelle/laurent.hpp"
#include "ruelle/rng.hpp"

using namespace ruelle;

namespace {

const double r2 = 1.0 / std::sqrt(2.0);
const LaurentPoly h_phi = LaurentPoly::from_real(-2, {1.0 / 9, 2.0 / 9, 3.0 / 9, 2.0 / 9, 1.0 / 9});

LaurentPoly random_poly(RngStream& rng, int lo, int hi) {
    std::vector<cplx> c;
    for (int n = lo; n <= hi; ++n) c.emplace_back(rng.uniform(-1, 1), rng.uniform(-1, 1));
    return LaurentPoly(lo, std::move(c));
}

void expect_coeffs(const LaurentPoly& f, const std::map<int, cplx>& expected, double tol = 1e-15) {
    for (int n = std::min(f.lo(), expected.begin()->first) - 1; n <= std::max(f.hi(), expected.rbegin()->first) + 1; ++n) {
        const auto it = expected.find(n);
        const cplx want = it == expected.end() ? cplx{} : it->second;
        EXPECT_NEAR(std::abs(f[n] - want), 0.0, tol) << "coefficient " << n;
    }
}

}  // namespace

TEST(Laurent, AdditiveInverseIsZero) {
    EXPECT_TRUE((LaurentPoly::monomial(1) + LaurentPoly::monomial(1, -1.0)).is_zero());
    EXPECT_TRUE((h_phi - h_phi).is_zero());
}

TEST(Laurent, DisjointSupportsUnion) {
    expect_coeffs(LaurentPoly::constant(1.0) + LaurentPoly::monomial(3), {{0, 1.0}, {3, 1.0}});
}

TEST(Laurent, Products) {
    const LaurentPoly a = LaurentPoly::from_real(0, {1, 1});
    const LaurentPoly b = LaurentPoly::from_real(0, {1, -1});
    expect_coeffs(a * b, {{0, 1.0}, {2, -1.0}});
    const LaurentPoly p = LaurentPoly::from_real(0, {r2, r2}) * LaurentPoly::from_real(0, {r2, 0, r2});
    expect_coeffs(p, {{0, 0.5}, {1, 0.5}, {2, 0.5}, {3, 0.5}}, 1e-15);
    EXPECT_EQ(h_phi * LaurentPoly::constant(1.0), h_phi);
}

TEST(Laurent, ConjReflect) {
    expect_coeffs(conj_reflect(LaurentPoly::monomial(1)), {{-1, 1.0}});
    expect_coeffs(conj_reflect(LaurentPoly::from_real(0, {r2, 0, 0, r2})), {{-3, r2}, {0, r2}});
    expect_coeffs(conj_reflect(LaurentPoly::monomial(2, cplx{0, 1})), {{-2, cplx{0, -1}}});
}

TEST(Laurent, Autocorrelation) {
    expect_coeffs(autocorrelation(LaurentPoly::from_real(0, {r2, 0, 0, r2})), {{-3, 0.5}, {0, 1.0}, {3, 0.5}}, 1e-15);
    expect_coeffs(autocorrelation(LaurentPoly::from_real(0, {r2, r2})), {{-1, 0.5}, {0, 1.0}, {1, 0.5}}, 1e-15);
    expect_coeffs(autocorrelation(LaurentPoly::constant(1.0)), {{0, 1.0}});
}

TEST(Laurent, ComposePower) {
    const LaurentPoly haar = LaurentPoly::from_real(0, {r2, r2});
    expect_coeffs(compose_power(haar, 3), {{0, r2}, {3, r2}});
    EXPECT_EQ(compose_power(h_phi, 1), h_phi);
    expect_coeffs(compose_power(LaurentPoly::monomial(-1), 2), {{-2, 1.0}});
}

TEST(Laurent, DownsampleAverage) {
    expect_coeffs(downsample_average(LaurentPoly::from_real(0, {1, 0, 1}), 2), {{0, 1.0}, {1, 1.0}});
    EXPECT_TRUE(downsample_average(LaurentPoly::monomial(1), 2).is_zero());
    const LaurentPoly twice = downsample_average(downsample_average(h_phi, 2), 2);
    expect_coeffs(twice, {{0, 1.0 / 3}}, 1e-15);
}

TEST(Laurent, Rotate) {
    EXPECT_EQ(rotate(h_phi, 0, 3), h_phi);
    expect_coeffs(rotate(LaurentPoly::monomial(1), 1, 2), {{1, -1.0}}, 1e-15);
    EXPECT_NEAR(std::abs(rotate(h_phi, 1, 3)(0.0)), 0.0, 1e-15);
}

TEST(Laurent, Predicates) {
    EXPECT_TRUE(is_hermitian(h_phi));
    EXPECT_TRUE(is_real_nonneg(h_phi));
    EXPECT_FALSE(is_real_nonneg(LaurentPoly::monomial(1)));
    EXPECT_FALSE(is_hermitian(LaurentPoly::monomial(1)));
}

TEST(Laurent, IntegralAndNorm) {
    EXPECT_NEAR(integral_T(h_phi).real(), 1.0 / 3, 1e-16);
    EXPECT_NEAR(l2_norm(LaurentPoly::from_real(0, {3, 4})), 5.0, 1e-15);
    EXPECT_EQ(LaurentPoly{}[7], cplx{});
}

TEST(Laurent, EvaluationMatchesClosedForm) {
    for (int t = 0; t < 32; ++t) {
        const double w = 2 * std::numbers::pi * t / 32;
        const double s = 1 + 2 * std::cos(w);
        EXPECT_NEAR(std::abs(h_phi(w) - s * s / 9), 0.0, 1e-14);
    }
}

// Coefficient arithmetic against pointwise evaluation at random frequencies.
TEST(LaurentProperties, OperationsAgreeWithPointwiseOracle) {
    RngStream rng(CounterRng(7), 0);
    for (int trial = 0; trial < 50; ++trial) {
        const LaurentPoly f = random_poly(rng, -3, 4);
        const LaurentPoly g = random_poly(rng, -5, 1);
        const int p = 2 + trial % 3;
        for (int s = 0; s < 8; ++s) {
            const double w = rng.uniform(0, 2 * std::numbers::pi);
            EXPECT_NEAR(std::abs((f * g)(w) - f(w) * g(w)), 0.0, 1e-12);
            EXPECT_NEAR(std::abs((f + g)(w) - (f(w) + g(w))), 0.0, 1e-12);
            EXPECT_NEAR(std::abs(conj_reflect(f)(w) - std::conj(f(w))), 0.0, 1e-12);
            EXPECT_NEAR(std::abs(compose_power(f, p)(w) - f(p * w)), 0.0, 1e-12);
            cplx avg{};
            for (int k = 0; k < p; ++k) avg += f((w + 2 * std::numbers::pi * k) / p);
            EXPECT_NEAR(std::abs(downsample_average(f, p)(w) - avg / double(p)), 0.0, 1e-12);
            const int j = trial % p;
            EXPECT_NEAR(std::abs(rotate(f, j, p)(w) - f(w - 2 * std::numbers::pi * j / p)), 0.0, 1e-12);
        }
    }
}

TEST(LaurentProperties, WindowRoundTrip) {
    const auto v = window_coeffs(h_phi, 4);
    ASSERT_EQ(v.size(), 9u);
    EXPECT_EQ(from_window(v, 4), h_phi);
}

TEST(Filter, MakeFilterRejectsBadScale) {
    EXPECT_THROW(make_filter(1, LaurentPoly::constant(1.0)), ContractError);
}
