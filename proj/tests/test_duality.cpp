#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "ruelle/duality.hpp"

using namespace ruelle;

namespace {

const double r2 = 1.0 / std::sqrt(2.0);
const FilterSpec haar = make_filter(2, LaurentPoly::from_real(0, {r2, r2}));
const LaurentPoly h_phi = LaurentPoly::from_real(-2, {1.0 / 9, 2.0 / 9, 3.0 / 9, 2.0 / 9, 1.0 / 9});

// Brute-force count of the cycles of j -> N j on Z_p.
int brute_orbit_count(int N, int p) {
    std::vector<int> label(p, -1);
    int count = 0;
    for (int j = 0; j < p; ++j) {
        if (label[j] >= 0) continue;
        for (int x = j; label[x] < 0; x = N * x % p) label[x] = count;
        ++count;
    }
    return count;
}

}  // namespace

TEST(Orbits, SmallCases) {
    const auto o3 = orbits(2, 3);
    EXPECT_EQ(o3.orbits, (std::vector<std::vector<int>>{{0}, {1, 2}}));
    const auto o7 = orbits(2, 7);
    EXPECT_EQ(o7.orbits, (std::vector<std::vector<int>>{{0}, {1, 2, 4}, {3, 6, 5}}));
    EXPECT_EQ(orbits(2, 1).orbits, (std::vector<std::vector<int>>{{0}}));
}

TEST(Orbits, RejectsNonCoprime) { EXPECT_THROW(orbits(2, 6), ContractError); }

TEST(Orbits, Periods) {
    EXPECT_EQ(orbit_period(2, 3, 1), 2);
    EXPECT_EQ(orbit_period(2, 7, 0), 1);
    EXPECT_EQ(orbit_period(2, 15, 5), 2);
}

TEST(OrbitProperties, CountsAndPeriodsAgreeWithBruteForce) {
    for (int N : {2, 3, 5})
        for (int p = 1; p <= 40; ++p) {
            if (std::gcd(N, p) != 1) continue;
            const auto od = orbits(N, p);
            EXPECT_EQ(static_cast<int>(od.orbits.size()), brute_orbit_count(N, p));
            int total = 0;
            for (std::size_t i = 0; i < od.orbits.size(); ++i) {
                total += od.periods[i];
                for (int j : od.orbits[i]) EXPECT_EQ(orbit_period(N, p, j), od.periods[i]);
            }
            EXPECT_EQ(total, p);
        }
}

TEST(Symmetrize, DensityComponents) {
    const auto s0 = symmetrize(h_phi, 3, 0);
    EXPECT_LT(max_coeff_diff(s0.F, LaurentPoly::constant(1.0 / 3)), 1e-16);
    EXPECT_LT(max_coeff_diff(s0.H, LaurentPoly::constant(1.0 / 3)), 1e-16);
    EXPECT_LT(max_coeff_diff(symmetrize(h_phi, 3, 1).H, LaurentPoly::from_real(-1, {1.0 / 9, 2.0 / 9})), 1e-16);
    EXPECT_LT(max_coeff_diff(symmetrize(h_phi, 3, 2).H, LaurentPoly::from_real(-1, {2.0 / 9, 1.0 / 9})), 1e-16);
}

TEST(Symmetrize, ComponentsSumToInput) {
    LaurentPoly sum;
    for (int k = 0; k < 3; ++k) sum = sum + symmetrize(h_phi, 3, k).F;
    EXPECT_LT(max_coeff_diff(sum, h_phi), 1e-16);
}

TEST(Intertwining, HaarUpsampledByThree) {
    for (int k = 0; k < 3; ++k) EXPECT_LT(intertwine_residual(haar, h_phi, 3, k).twisted, 1e-15) << k;
    EXPECT_LT(max_coeff_diff(apply_ruelle(haar, symmetrize(h_phi, 3, 2).H), symmetrize(h_phi, 3, 1).H), 1e-15);
}

TEST(Intertwining, RejectsNonFixedInput) {
    EXPECT_THROW(intertwine_residual(haar, LaurentPoly::monomial(1), 3, 1), ContractError);
}

TEST(Reciprocity, HaarCases) {
    for (int p : {1, 3, 5, 7}) {
        const auto rep = reciprocity_check(haar, p);
        EXPECT_TRUE(rep.holds) << p;
        EXPECT_EQ(rep.base_dimension, 1);
        EXPECT_EQ(rep.invariant_dimension, 1);
    }
    EXPECT_EQ(reciprocity_check(haar, 5).upsampled_dimension, 2);
}

TEST(DimensionCount, MatchesOrbits) {
    const auto d3 = dimension_vs_orbits(haar, 3);
    EXPECT_EQ(d3.dimension, 2);
    EXPECT_EQ(d3.orbit_count, 2);
    EXPECT_TRUE(d3.equal);
    const auto d7 = dimension_vs_orbits(haar, 7);
    EXPECT_EQ(d7.dimension, 3);
    EXPECT_EQ(d7.orbit_count, 3);
    EXPECT_TRUE(d7.equal);
    const auto d1 = dimension_vs_orbits(haar, 1);
    EXPECT_EQ(d1.dimension, 1);
    EXPECT_TRUE(d1.equal);
}
