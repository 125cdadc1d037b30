#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "ruelle/cascade.hpp"
#include "ruelle/rng.hpp"

using namespace ruelle;

namespace {

const double r2 = 1.0 / std::sqrt(2.0);
const FilterSpec haar = make_filter(2, LaurentPoly::from_real(0, {r2, r2}));
const FilterSpec worked = make_filter(2, LaurentPoly::from_real(0, {r2, 0, 0, r2}));
const LaurentPoly h_phi = LaurentPoly::from_real(-2, {1.0 / 9, 2.0 / 9, 3.0 / 9, 2.0 / 9, 1.0 / 9});

constexpr double kUlp = 1e-15;

}  // namespace

TEST(Grid, BoxBasics) {
    const GridFunction b = GridFunction::box(2, 0, 3, 1.0 / 3);
    EXPECT_EQ(b.values().size(), 3u);
    EXPECT_NEAR(b.integral().real(), 1.0, 1e-15);
    EXPECT_NEAR(b.sup_norm(), 1.0 / 3, 1e-16);
    EXPECT_NEAR(std::abs(b(2.5) - 1.0 / 3), 0.0, 1e-16);
    EXPECT_EQ(b(3.0), cplx{});
    EXPECT_TRUE(GridFunction::box(2, 1, 1).empty());
}

TEST(Grid, RefineThenCoarsenRoundTrips) {
    const GridFunction b = GridFunction::box(3, -1, 2, 0.5);
    const GridFunction r = b.refined(3);
    EXPECT_EQ(r.level(), 3);
    EXPECT_EQ(r.values().size(), 81u);
    const GridFunction c = r.coarsened();
    EXPECT_EQ(c.level(), 0);
    EXPECT_EQ(sup_distance(b, c), 0.0);
}

TEST(Grid, CsvHeaderAndRows) {
    std::ostringstream os;
    GridFunction::box(2, 0, 2).write_csv(os);
    EXPECT_EQ(os.str(), "x,re,im\n0,1,0\n1,1,0\n");
}

TEST(CascadeStep, HaarFixesUnitBox) {
    const GridFunction box = GridFunction::box(2, 0, 1);
    EXPECT_LT(sup_distance(cascade_step(haar, box), box), kUlp);
    EXPECT_LT(refinement_residual(haar, box), kUlp);
}

TEST(CascadeStep, WorkedFilterFixesThirdBox) {
    const GridFunction phi = GridFunction::box(2, 0, 3, 1.0 / 3);
    EXPECT_LT(sup_distance(cascade_step(worked, phi), phi), kUlp);
    EXPECT_LT(refinement_residual(worked, phi), kUlp);
}

TEST(CascadeStep, ZeroStaysZero) {
    EXPECT_TRUE(cascade_step(haar, GridFunction::zero(2)).empty());
}

TEST(CascadeStep, LongBoxResidual) {
    EXPECT_NEAR(refinement_residual(haar, GridFunction::box(2, 0, 2)), 1.0, kUlp);
}

// (M phi)(x) = sqrt(N) sum_k a_k phi(N x - k), evaluated at cell midpoints.
TEST(CascadeProperties, StepMatchesPointwiseRefinementEquation) {
    RngStream rng(CounterRng(3), 0);
    const FilterSpec f3 = make_filter(3, LaurentPoly(-1, {cplx(0.4, 0.1), cplx(0.7, 0), cplx(0.2, -0.3), cplx(0.1, 0)}));
    for (const auto& filter : {haar, worked, f3}) {
        std::vector<cplx> v;
        for (int i = 0; i < 7; ++i) v.emplace_back(rng.uniform(-1, 1), rng.uniform(-1, 1));
        const GridFunction phi(filter.scale, 1, -3, v);
        const GridFunction next = cascade_step(filter, phi);
        ASSERT_EQ(next.level(), 2);
        const double w = next.cell_width();
        for (double x = -4.0 + w / 2; x < 5.0; x += w) {
            cplx expected{};
            for (int k = filter.m0.lo(); k <= filter.m0.hi(); ++k)
                expected += filter.m0[k] * phi(filter.scale * x - k);
            expected *= std::sqrt(static_cast<double>(filter.scale));
            EXPECT_NEAR(std::abs(next(x) - expected), 0.0, 1e-14) << x;
        }
    }
}

TEST(Cascade, HaarIterationStaysAtFixedPoint) {
    const CascadeRun run = cascade_iterate(haar, GridFunction::box(2, 0, 1), 5);
    EXPECT_EQ(run.iterations, 5);
    EXPECT_EQ(run.phi.level(), 0);
    EXPECT_LT(refinement_residual(haar, run.phi), kUlp);
}

TEST(Cascade, IterationKeepsUnitIntegral) {
    const CascadeRun run = cascade_iterate(worked, GridFunction::box(2, 0, 1), 10);
    EXPECT_FALSE(run.diverged);
    EXPECT_NEAR(run.phi.integral().real(), 1.0, 1e-12);
    EXPECT_LE(run.phi.level(), kCascadeMaxLevel);
}

TEST(Cascade, FixedPointInitIsStable) {
    const GridFunction phi = GridFunction::box(2, 0, 3, 1.0 / 3);
    const CascadeRun run = cascade_iterate(worked, phi, 6);
    EXPECT_LT(sup_distance(run.phi, phi), 1e-14);
}

TEST(Correlation, ThirdBoxGivesDensity) {
    const GridFunction phi = GridFunction::box(2, 0, 3, 1.0 / 3);
    EXPECT_LT(max_coeff_diff(correlation_density(phi, phi), h_phi), 1e-16);
}

TEST(Correlation, OrthonormalTranslates) {
    const GridFunction box = GridFunction::box(2, 0, 1);
    EXPECT_LT(max_coeff_diff(correlation_density(box, box), LaurentPoly::constant(1.0)), 1e-16);
    // conj(phi(x - n)) psi(x) overlaps only for n = 1
    const LaurentPoly c = correlation_density(box, GridFunction::box(2, 1, 2));
    EXPECT_LT(max_coeff_diff(c, LaurentPoly::monomial(1)), 1e-16);
}

TEST(Correlation, IntertwiningWithTransfer) {
    const GridFunction box = GridFunction::box(2, 0, 1);
    EXPECT_LT(transfer_intertwine_residual(haar, box, box), 1e-15);
    const GridFunction third = GridFunction::box(2, 0, 3, 1.0 / 3);
    EXPECT_LT(transfer_intertwine_residual(worked, third, third), 1e-12);
    EXPECT_LT(transfer_intertwine_residual(worked, box, GridFunction::box(2, 0, 2)), 1e-9);
}

TEST(Mallat, NormsForConstantDensity) {
    for (int n = 1; n <= 4; ++n) EXPECT_NEAR(mallat_partial(haar, std::nullopt, n, 1024).norm, 1.0, 1e-4);
}

TEST(Mallat, NormsForHarmonicDensity) {
    for (int n = 1; n <= 3; ++n)
        EXPECT_NEAR(mallat_partial(worked, h_phi, n, 1024).norm_squared, 1.0 / 3, 1e-4);
}

TEST(Mallat, RejectsBadInput) {
    EXPECT_THROW(mallat_partial(haar, std::nullopt, 0), ContractError);
    EXPECT_THROW(mallat_partial(haar, LaurentPoly::monomial(1), 1), ContractError);
}
