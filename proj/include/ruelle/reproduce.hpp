#pragma once

// The acceptance battery: fourteen numbered checks, each with its own
// independent oracle, tolerance and time budget.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "ruelle/bohr.hpp"
#include "ruelle/cascade.hpp"
#include "ruelle/duality.hpp"
#include "ruelle/format.hpp"
#include "ruelle/keane.hpp"
#include "ruelle/laurent.hpp"
#include "ruelle/rng.hpp"
#include "ruelle/transfer.hpp"

namespace ruelle::acceptance {

/// Round-off allowance for identities that hold exactly in rational
/// arithmetic but pass through the irrational coefficient 1/sqrt(2).
inline constexpr double kRoundoff = 1e-15;

struct Result {
    int id = 0;
    std::string title;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
    double limit_seconds = 0.0;
};

namespace detail {

inline const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

inline FilterSpec worked_filter() { return make_filter(2, LaurentPoly::from_real(0, {kInvSqrt2, 0.0, 0.0, kInvSqrt2})); }
inline FilterSpec haar_filter() { return make_filter(2, LaurentPoly::from_real(0, {kInvSqrt2, kInvSqrt2})); }
inline LaurentPoly h_phi() { return LaurentPoly::from_real(-2, {1.0 / 9, 2.0 / 9, 3.0 / 9, 2.0 / 9, 1.0 / 9}); }

inline double omega_at(int t, int M) { return 2.0 * std::numbers::pi * t / M; }

// Closed forms used as oracles, written without LaurentPoly.
inline cplx worked_m0(double w) { return (1.0 + std::polar(1.0, -3.0 * w)) * kInvSqrt2; }
inline double h_phi_closed(double w) {
    const double s = 1.0 + 2.0 * std::cos(w);
    return s * s / 9.0;
}

inline std::string yes_no(bool b) { return b ? "true" : "false"; }
inline std::string num(double x) { return format_number(x); }

inline LaurentPoly random_poly(RngStream& rng, int lo, int hi, bool complex_coeffs = true) {
    std::vector<cplx> c;
    for (int n = lo; n <= hi; ++n) c.emplace_back(rng.uniform(-1.0, 1.0), complex_coeffs ? rng.uniform(-1.0, 1.0) : 0.0);
    return LaurentPoly(lo, std::move(c));
}

// ---------------------------------------------------------------------------

inline Result quadrature_lowpass() {
    Result r{1, "quadrature and low-pass for (1+z^3)/sqrt2", false, "", 0.0, 0.1};
    const FilterSpec f = worked_filter();
    const bool q = check_quadrature(f);
    const bool lp = check_lowpass(f);
    double oracle = 0.0;  // |sum_k |m0(w_k)|^2 - 2| over 64 points
    for (int t = 0; t < 64; ++t) {
        const double w = omega_at(t, 64);
        oracle = std::max(oracle, std::abs(std::norm(worked_m0(w / 2)) + std::norm(worked_m0(w / 2 + std::numbers::pi)) - 2.0));
    }
    const double r1 = max_coeff_diff(apply_ruelle(f, LaurentPoly::constant(1.0)), LaurentPoly::constant(1.0));
    r.pass = q && lp && oracle < 1e-12 && r1 <= kRoundoff;
    r.detail = "quadrature=" + yes_no(q) + " lowpass=" + yes_no(lp) + " pointwise_sum_err=" + num(oracle) +
               " |R(1)-1|=" + num(r1);
    return r;
}

inline Result harmonic_density() {
    Result r{2, "harmonic density and purity", false, "", 0.0, 0.1};
    const EigenReport rep = fixed_space(worked_filter());
    const double proj = span_residual(rep.basis, h_phi());
    const EigenReport haar = fixed_space(haar_filter());
    double oracle = 0.0;  // R h = h via the root sum on the closed form
    for (int t = 0; t < 64; ++t) {
        const double w = omega_at(t, 64);
        const cplx rh = apply_ruelle_pointwise(worked_filter(), [](double x) { return cplx(h_phi_closed(x)); }, w);
        oracle = std::max(oracle, std::abs(rh - h_phi_closed(w)));
    }
    r.pass = rep.dimension == 2 && proj < 1e-9 && haar.dimension == 1 && haar.pure && oracle < 1e-12;
    r.detail = "dim=" + std::to_string(rep.dimension) + " projection_residual=" + num(proj) +
               " haar_dim=" + std::to_string(haar.dimension) + " pointwise_Rh-h=" + num(oracle);
    return r;
}

inline Result scaling_function() {
    Result r{3, "scaling function (1/3)chi[0,3) and its correlation density", false, "", 0.0, 0.1};
    const FilterSpec f = worked_filter();
    const GridFunction phi = GridFunction::box(2, 0, 3, 1.0 / 3.0);
    const double res = refinement_residual(f, phi);
    const LaurentPoly H = correlation_density(phi, phi);
    // rational oracle: overlap length of [0,3) and [n,n+3) is 3-|n|, times 1/9
    double corr = 0.0;
    for (int n = -3; n <= 3; ++n) corr = std::max(corr, std::abs(H[n] - std::max(0, 3 - std::abs(n)) / 9.0));
    r.pass = res <= kRoundoff && corr == 0.0 && H == h_phi();
    r.detail = "refinement_residual=" + num(res) + " correlation_err=" + num(corr);
    return r;
}

inline Result non_tracial_moments() {
    Result r{4, "non-tracial moments 2/9 and 1/9", false, "", 0.0, 0.1};
    const FilterSpec f = worked_filter();
    const cplx m1 = moment(f, h_phi(), 0, 0, LaurentPoly::monomial(1));
    const cplx m2 = moment(f, h_phi(), 0, 0, LaurentPoly::monomial(2));
    // quadrature of z^k h on 64 points is exact for these degrees
    cplx q1{}, q2{};
    for (int t = 0; t < 64; ++t) {
        const double w = omega_at(t, 64);
        q1 += std::polar(1.0, -w) * h_phi_closed(w) / 64.0;
        q2 += std::polar(1.0, -2.0 * w) * h_phi_closed(w) / 64.0;
    }
    const double e1 = std::abs(m1 - 2.0 / 9.0);
    const double e2 = std::abs(m2 - 1.0 / 9.0);
    const double eq = std::max(std::abs(q1 - 2.0 / 9.0), std::abs(q2 - 1.0 / 9.0));
    r.pass = e1 < 1e-12 && e2 < 1e-12 && eq < 1e-12 && std::abs(m1 - m2) > 0.1;
    r.detail = "moment(e1)=" + num(m1.real()) + " moment(e2)=" + num(m2.real()) + " err=" + num(std::max(e1, e2)) +
               " quadrature_err=" + num(eq);
    return r;
}

inline Result non_isometry() {
    Result r{5, "S_1 is not isometric: R(h_phi(-z)) differs from h_phi(-z)", false, "", 0.0, 0.1};
    const FilterSpec f = worked_filter();
    const LaurentPoly hc = rotate(h_phi(), 1, 2);
    const LaurentPoly Rh = apply_ruelle(f, hc);
    double oracle = 0.0, closed = 0.0, gap = 0.0;
    for (int t = 0; t < 64; ++t) {
        const double w = omega_at(t, 64);
        const cplx pw = apply_ruelle_pointwise(f, [](double x) { return cplx(h_phi_closed(x + std::numbers::pi)); }, w);
        oracle = std::max(oracle, std::abs(Rh(w) - pw));
        closed = std::max(closed, std::abs(Rh(w) - (1.0 / 3.0 - 2.0 / 9.0 * std::cos(2.0 * w))));
        gap = std::max(gap, std::abs(Rh(w) - hc(w)));
    }
    r.pass = oracle <= 1e-9 && closed <= 1e-9 && gap > 0.1;
    r.detail = "sup|R(h)-h|=" + num(gap) + " oracle_err=" + num(oracle) + " closed_form_err=" + num(closed);
    return r;
}

inline Result intertwining() {
    Result r{6, "R(H(phi,psi)) = H(M phi, M psi)", false, "", 0.0, 1.0};
    RngStream rng(CounterRng(6), 0);
    auto random_grid = [&](int level, std::int64_t start, int len) {
        std::vector<cplx> v;
        for (int i = 0; i < len; ++i) v.emplace_back(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
        return GridFunction(2, level, start, std::move(v));
    };
    const std::vector<std::pair<GridFunction, GridFunction>> pairs{
        {GridFunction::box(2, 0, 1), GridFunction::box(2, 0, 1)},
        {GridFunction::box(2, 0, 3, 1.0 / 3.0), GridFunction::box(2, 0, 3, 1.0 / 3.0)},
        {GridFunction::box(2, 0, 1), GridFunction::box(2, 0, 2)},
        {GridFunction::box(2, -1, 2), random_grid(1, -2, 7)},
        {random_grid(2, 3, 11), random_grid(1, -4, 9)},
    };
    double worst = 0.0;
    for (const FilterSpec& f : {haar_filter(), worked_filter()})
        for (const auto& [phi, psi] : pairs) worst = std::max(worst, transfer_intertwine_residual(f, phi, psi));
    r.pass = worst <= 1e-9;
    r.detail = "pairs=5 filters=2 max_residual=" + num(worst);
    return r;
}

inline Result mallat_norms() {
    Result r{7, "Mallat partial products have constant norm", false, "", 0.0, 5.0};
    double err1 = 0.0, errh = 0.0;
    for (const FilterSpec& f : {haar_filter(), worked_filter()})
        for (int n = 1; n <= 4; ++n) err1 = std::max(err1, std::abs(mallat_partial(f, std::nullopt, n).norm_squared - 1.0));
    std::vector<double> hn;
    for (int n = 1; n <= 4; ++n) {
        hn.push_back(mallat_partial(worked_filter(), h_phi(), n).norm_squared);
        errh = std::max(errh, std::abs(hn.back() - 1.0 / 3.0));
    }
    const double spread = *std::max_element(hn.begin(), hn.end()) - *std::min_element(hn.begin(), hn.end());
    r.pass = err1 <= 1e-4 && errh <= 1e-4 && spread <= 1e-4;
    r.detail = "h=1 max|norm^2-1|=" + num(err1) + " h=h_phi max|norm^2-1/3|=" + num(errh) + " spread=" + num(spread);
    return r;
}

inline Result cuntz_relations() {
    Result r{8, "Cuntz relations S_i*S_j = delta_ij I, sum S_i S_i* = I", false, "", 0.0, 0.5};
    RngStream rng(CounterRng(8), 0);
    double worst = 0.0;
    for (const FilterSpec& f : {worked_filter(), haar_filter()}) {
        for (int trial = 0; trial < 20; ++trial) {
            const LaurentPoly x = random_poly(rng, -6, 6);
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) {
                    const LaurentPoly y = cuntz_s_adjoint(f, i, cuntz_s(f, j, x));
                    worst = std::max(worst, max_coeff_diff(y, i == j ? x : LaurentPoly{}));
                }
            const LaurentPoly sum = cuntz_s(f, 0, cuntz_s_adjoint(f, 0, x)) + cuntz_s(f, 1, cuntz_s_adjoint(f, 1, x));
            worst = std::max(worst, max_coeff_diff(sum, x));
        }
    }
    r.pass = worst < 1e-12;
    r.detail = "inputs=20 filters=2 max_error=" + num(worst);
    return r;
}

inline int multiplicative_order(int a, int q) {
    if (q == 1) return 1;
    int x = a % q, k = 1;
    while (x != 1) {
        x = x * a % q;
        ++k;
    }
    return k;
}

inline Result duality() {
    Result r{9, "scale-2 versus scale-p duality and orbit counts", false, "", 0.0, 5.0};
    const auto o = orbits(2, 3);
    const bool orbits_ok = o.orbits == std::vector<std::vector<int>>{{0}, {1, 2}};
    bool dims_ok = true;
    std::string dims;
    for (int p : {3, 5, 7, 9, 15}) {
        const auto d = dimension_vs_orbits(haar_filter(), p);
        dims_ok = dims_ok && d.equal;
        dims += " p" + std::to_string(p) + "=" + std::to_string(d.dimension) + "/" + std::to_string(d.orbit_count);
    }
    double twisted = 0.0;
    for (int k = 0; k < 3; ++k) twisted = std::max(twisted, intertwine_residual(haar_filter(), h_phi(), 3, k).twisted);
    bool periods_ok = true;
    for (int p = 1; p <= 101; p += 2)
        for (int j = 0; j < p; ++j)
            periods_ok = periods_ok && orbit_period(2, p, j) == multiplicative_order(2, p / std::gcd(j, p));
    r.pass = orbits_ok && dims_ok && twisted <= 1e-9 && periods_ok;
    r.detail = "orbits(2,3)=" + std::string(orbits_ok ? "{{0},{1,2}}" : "unexpected") + " dim/orbits:" + dims +
               " twisted_residual=" + num(twisted) + " periods=" + yes_no(periods_ok);
    return r;
}

/// Root count of p(y) = x by sign changes on a dense grid.
inline int dense_root_count(const RealPolynomial& p, double x, double lo, double hi, int samples) {
    int count = 0;
    double prev = p(lo) - x;
    for (int s = 1; s <= samples; ++s) {
        const double cur = p(lo + (hi - lo) * s / samples) - x;
        if ((prev < 0) != (cur < 0)) ++count;
        prev = cur;
    }
    return count;
}

inline Result julia_brackets() {
    Result r{10, "real Julia brackets, inverse branches and balanced measure", false, "", 0.0, 10.0};
    const double a2 = 1.05 * 1.05, a4 = a2 * a2;
    struct Case {
        RealPolynomial p;
        double expected_b;
        std::uint64_t seed;
    };
    const std::vector<Case> cases{{RealPolynomial({1, 0, -5 * a2, 0, 5 * a4, 0}), 2.08411, 10},
                                  {RealPolynomial({1, 0, -4 * a2, 0, 2 * a4}), 2.08064, 11}};
    bool ok = true;
    std::ostringstream d;
    for (const auto& c : cases) {
        if (&c != &cases.front()) d << "; ";
        const JuliaSystem js = julia_bracket(c.p);
        const int N = js.degree();
        const bool b_ok = std::abs(js.b - c.expected_b) <= 1e-4;

        double worst = 0.0;
        bool sorted = true, counted = true;
        RngStream rng(CounterRng(c.seed), 1);
        for (int t = 0; t < 1000; ++t) {
            const double x = rng.uniform(js.a, js.b);
            const auto pre = js.preimages(x);
            for (std::size_t i = 0; i < pre.size(); ++i) {
                worst = std::max(worst, std::abs(c.p(pre[i]) - x));
                if (i > 0 && !(pre[i] < pre[i - 1])) sorted = false;
            }
            if (t < 50 && dense_root_count(c.p, x, js.a - 1.0, js.b + 1.0, 20000) != N) counted = false;
            if (static_cast<int>(pre.size()) != N) counted = false;
        }

        const std::size_t n = 100000;
        const auto pts = backward_sample(js, js.b, 25, n, c.seed);
        std::vector<std::array<double, 2>> cyl;
        for (int i = 1; i <= N; ++i)
            for (int j = 1; j <= N; ++j) cyl.push_back(cylinder(js, {i, j}));
        std::vector<std::size_t> hits(cyl.size(), 0);
        std::size_t unplaced = 0;
        for (double x : pts) {
            bool placed = false;
            for (std::size_t q = 0; q < cyl.size() && !placed; ++q)
                if (x >= cyl[q][0] - 1e-12 && x <= cyl[q][1] + 1e-12) {
                    ++hits[q];
                    placed = true;
                }
            if (!placed) ++unplaced;
        }
        const double p0 = 1.0 / (N * N);
        const double se = std::sqrt(p0 * (1.0 - p0) / static_cast<double>(n));
        double zmax = 0.0;
        for (std::size_t h : hits) zmax = std::max(zmax, std::abs(static_cast<double>(h) / static_cast<double>(n) - p0) / se);

        ok = ok && b_ok && worst < 1e-11 && sorted && counted && zmax <= 5.0 && unplaced == 0;
        d << "N=" << N << " b=" << num(js.b) << " case=" << to_string(js.kind) << " branch_residual=" << num(worst)
          << " sorted=" << yes_no(sorted) << " count=" << yes_no(counted) << " max_cylinder_z=" << num(zmax);
    }
    r.pass = ok;
    r.detail = d.str();
    return r;
}

inline Result cycle_measure() {
    Result r{11, "g-measure on the fixed-point cycle {1}", false, "", 0.0, 0.1};
    const CircleMap T{2};
    const auto e1 = [](double w) { return std::polar(1.0, -w); };
    double worst = 0.0;
    for (const FilterSpec& f : {haar_filter(), worked_filter()})
        worst = std::max(worst, cycle_measure_residual(T, filter_weight(f), {0.0}, e1));
    const double control =
        cycle_measure_residual(T, [](double) { return 0.5; }, {0.0}, e1, CycleCheck::Unchecked);
    r.pass = worst <= 1e-12 && std::abs(control - 1.0) <= 1e-12;
    r.detail = "residual=" + num(worst) + " constant_g_control=" + num(control);
    return r;
}

inline Result ulam_density() {
    Result r{12, "invariant density of the 1/|T'| operator by Ulam's method", false, "", 0.0, 10.0};
    const UlamResult dbl = ulam_fixed_density(MarkovMap::doubling(), 64);
    double dev = 0.0;
    for (double v : dbl.density) dev = std::max(dev, std::abs(v - 1.0));

    const double gamma = 0.4;
    const int bins = 100;
    const UlamResult two = ulam_fixed_density(MarkovMap::two_branch(gamma), bins);
    // orbit histogram oracle, map written out directly
    std::vector<double> hist(bins, 0.0);
    double x = 0.1234567;
    const int steps = 1000000;
    for (int s = 0; s < steps; ++s) {
        x = x < gamma ? x / gamma : (x - gamma) / (1.0 - gamma);
        if (x >= 1.0) x -= 1.0;
        hist[static_cast<std::size_t>(std::min(bins - 1, static_cast<int>(x * bins)))] += 1.0;
    }
    double l1 = 0.0;
    for (int i = 0; i < bins; ++i) l1 += std::abs(two.density[static_cast<std::size_t>(i)] - hist[static_cast<std::size_t>(i)] * bins / steps) / bins;

    r.pass = dev <= 1e-12 && dbl.residual <= 1e-10 && l1 < 0.02 && two.residual <= 1e-10 && two.min_entry >= -1e-12;
    r.detail = "doubling sup|d-1|=" + num(dev) + " two-branch L1_vs_orbit=" + num(l1) +
               " eigen_residual=" + num(std::max(dbl.residual, two.residual));
    return r;
}

inline Result bohr_kernel() {
    Result r{13, "moment kernel on Z[1/2]: consistency and positivity", false, "", 0.0, 1.0};
    const std::vector<NadicRational> lambda = nadic_grid(2, 4, 2);
    double consistency = 0.0, min_eig = 1e300;
    bool psd = true;
    const std::vector<std::pair<FilterSpec, LaurentPoly>> pairs{{worked_filter(), h_phi()},
                                                               {haar_filter(), LaurentPoly::constant(1.0)}};
    for (const auto& [f, h] : pairs) {
        const MomentKernel K(f, h);
        // every canonical depth up to 6, each against representatives one and two levels deeper
        for (int k = 0; k <= 6; ++k) {
            std::vector<NadicRational> level;
            for (int n = -4; n <= 4; ++n)
                if (canonicalize(n, k, 2).k == k) level.push_back(canonicalize(n, k, 2));
            consistency = std::max(consistency, projective_consistency(K, level, 2));
        }
        const PsdReport rep = psd_check(K, lambda);
        psd = psd && rep.pass;
        min_eig = std::min(min_eig, rep.min_eigenvalue);
    }
    const PsdReport delta = psd_check(delta_kernel, lambda);
    const auto m = static_cast<Eigen::Index>(lambda.size());
    const bool identity = delta.gram == Eigen::MatrixXcd::Identity(m, m);
    const MomentKernel trivial(make_filter(2, LaurentPoly::constant(1.0)), LaurentPoly::constant(1.0));
    const bool trivial_identity = psd_check(trivial, lambda).gram == Eigen::MatrixXcd::Identity(m, m);
    r.pass = consistency < 1e-10 && psd && min_eig >= -1e-9 && identity && trivial_identity;
    r.detail = "|Lambda|=" + std::to_string(lambda.size()) + " consistency=" + num(consistency) +
               " min_eigenvalue=" + num(min_eig) + " delta_identity=" + yes_no(identity && trivial_identity);
    return r;
}

inline Result oracle_equivalence() {
    Result r{14, "coefficient versus pointwise oracles and algebraic identities", false, "", 0.0, 5.0};
    RngStream rng(CounterRng(14), 0);
    double ruelle = 0.0, pullout = 0.0, parseval = 0.0, updown = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const int N = 2 + static_cast<int>(rng() % 2);
        const int mlo = static_cast<int>(rng() % 5) - 2;
        const FilterSpec f = make_filter(N, random_poly(rng, mlo, mlo + 7));
        const LaurentPoly x = random_poly(rng, -3, 3);
        const LaurentPoly Rx = apply_ruelle(f, x);
        for (int t = 0; t < 64; ++t) {
            const double w = omega_at(t, 64);
            ruelle = std::max(ruelle, std::abs(Rx(w) - apply_ruelle_pointwise(f, x, w)));
        }
        const LaurentPoly g = random_poly(rng, -2, 4);
        pullout = std::max(pullout, max_coeff_diff(apply_ruelle(f, compose_power(x, N) * g), x * apply_ruelle(f, g)));

        const int M = 32;
        double s = 0.0;
        for (int t = 0; t < M; ++t) s += std::norm(x(omega_at(t, M)));
        parseval = std::max(parseval, std::abs(s / M - l2_norm(x) * l2_norm(x)));

        updown = std::max(updown, max_coeff_diff(downsample_average(compose_power(x, N), N), x));
        LaurentPoly avg{};
        for (int j = 0; j < N; ++j) avg = avg + rotate(x, j, N);
        updown = std::max(updown, max_coeff_diff(compose_power(downsample_average(x, N), N), scale(avg, 1.0 / N)));
    }
    r.pass = ruelle <= 1e-9 && pullout <= 1e-10 && parseval <= 1e-12 && updown <= 1e-12;
    r.detail = "filters=50 ruelle_oracle=" + num(ruelle) + " pullout=" + num(pullout) + " parseval=" + num(parseval) +
               " up/down=" + num(updown);
    return r;
}

}  // namespace detail

inline const std::vector<std::function<Result()>>& battery() {
    static const std::vector<std::function<Result()>> all{
        detail::quadrature_lowpass, detail::harmonic_density, detail::scaling_function, detail::non_tracial_moments,
        detail::non_isometry,       detail::intertwining,     detail::mallat_norms,     detail::cuntz_relations,
        detail::duality,            detail::julia_brackets,   detail::cycle_measure,    detail::ulam_density,
        detail::bohr_kernel,        detail::oracle_equivalence};
    return all;
}

/// Runs one check; exceptions count as failures. A check that overruns its
/// time budget fails.
inline Result run(std::size_t index) {
    const auto start = std::chrono::steady_clock::now();
    Result r;
    try {
        r = battery().at(index)();
    } catch (const std::exception& e) {
        r.id = static_cast<int>(index) + 1;
        r.title = "check " + std::to_string(r.id);
        r.detail = std::string("exception: ") + e.what();
        r.pass = false;
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (r.limit_seconds > 0.0 && r.seconds > r.limit_seconds) {
        r.pass = false;
        r.detail += " (over time budget)";
    }
    return r;
}

inline std::vector<Result> run_all() {
    std::vector<Result> out;
    for (std::size_t i = 0; i < battery().size(); ++i) out.push_back(run(i));
    return out;
}

/// "PASS  3  title: detail", optionally followed by the elapsed time.
inline std::string format_line(const Result& r, bool with_time) {
    std::ostringstream os;
    os << (r.pass ? "PASS" : "FAIL") << ' ' << (r.id < 10 ? " " : "") << r.id << "  " << r.title << ": " << r.detail;
    if (with_time) os << " [" << format_number(r.seconds) << " s / " << format_number(r.limit_seconds) << " s]";
    return os.str();
}

}  // namespace ruelle::acceptance
