#pragma once

// The Ruelle transfer operator of a filter m0 at scale N,
//
//     (R f)(z) = (1/N) sum_{w^N = z} |m0(w)|^2 f(w),
//
// in coefficient form (R f)_n = sum_m c_{Nn-m} f_m with c = |m0|^2, together
// with the finite transfer matrix, the harmonic eigenspace R h = h, filter
// predicates, cocycle transforms, the Cuntz isometries S_0, S_1 and the
// state moments built from R.

#include <algorithm>
#include <cmath>
#include <complex>
#include <concepts>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ruelle/errors.hpp"
#include "ruelle/laurent.hpp"
#include "ruelle/linalg.hpp"
#include "ruelle/rng.hpp"

namespace ruelle {

/// Residual bound for R h = h.
inline constexpr double kTauEig = 1e-8;
/// Relative singular-value cutoff for kernel extraction.
inline constexpr double kTauRank = 1e-9;

using Evaluator = std::function<cplx(double)>;
using PartialEvaluator = std::function<std::optional<cplx>(double)>;

namespace detail {
inline double grid_omega(int t, int grid_size) { return 2.0 * std::numbers::pi * t / grid_size; }
}  // namespace detail

// ---------------------------------------------------------------------------
// Applying R

inline LaurentPoly apply_ruelle(const FilterSpec& filter, const LaurentPoly& f) {
    return downsample_average(mul(autocorrelation(filter.m0), f), filter.scale);
}

inline LaurentPoly apply_ruelle_power(const FilterSpec& filter, LaurentPoly f, int k) {
    const LaurentPoly c = autocorrelation(filter.m0);
    for (int i = 0; i < k; ++i) f = downsample_average(mul(c, f), filter.scale);
    return f;
}

/// Root-sum evaluation of (R f)(e^{-i omega}); independent of the coefficient
/// route and used as its oracle.
template <class F>
    requires std::invocable<F, double>
cplx apply_ruelle_pointwise(const FilterSpec& filter, F&& f, double omega) {
    const int N = filter.scale;
    cplx sum{0.0};
    for (int k = 0; k < N; ++k) {
        const double w = (omega + 2.0 * std::numbers::pi * k) / N;
        sum += std::norm(filter.m0(w)) * cplx(f(w));
    }
    return sum / static_cast<double>(N);
}

// ---------------------------------------------------------------------------
// Filter predicates

/// sum_{w^N=z} |m0(w)|^2 = N, checked in the equivalent form c_{Nn} = delta_{n,0}.
inline bool check_quadrature(const FilterSpec& filter, double tol = 1e-10) {
    const LaurentPoly c = autocorrelation(filter.m0);
    const int N = filter.scale;
    const int K = std::max(-c.lo(), c.hi()) / N;
    for (int n = -K; n <= K; ++n) {
        const cplx want = n == 0 ? cplx{1.0} : cplx{0.0};
        if (std::abs(c[N * n] - want) > tol) return false;
    }
    return true;
}

/// m0(1) = sqrt(N).
inline bool check_lowpass(const FilterSpec& filter, double tol = 1e-10) {
    return std::abs(filter.m0(0.0) - std::sqrt(static_cast<double>(filter.scale))) <= tol;
}

inline FilterSpec certify(FilterSpec filter) {
    filter.quadrature = check_quadrature(filter);
    filter.lowpass = check_lowpass(filter);
    return filter;
}

// ---------------------------------------------------------------------------
// Transfer matrix and harmonic eigenspace

struct TransferMatrix {
    int scale = 2;
    int window = 0;  // K; rows and columns are indexed by n in [-K, K]
    Eigen::MatrixXcd entries;

    int dim() const { return 2 * window + 1; }

    LaurentPoly apply(const LaurentPoly& f) const {
        const auto v = window_coeffs(f, window);
        const Eigen::Map<const Eigen::VectorXcd> x(v.data(), static_cast<Eigen::Index>(v.size()));
        const Eigen::VectorXcd y = entries * x;
        return from_window(std::vector<cplx>(y.data(), y.data() + y.size()), window);
    }
};

/// Smallest window K with every [-K, K]-supported input mapped back into
/// [-K, K]: K = ceil(D / (N-1)) with D the top exponent of |m0|^2.
inline int transfer_window(const FilterSpec& filter) {
    const LaurentPoly c = autocorrelation(filter.m0);
    const int D = std::max(0, c.hi());
    return (D + filter.scale - 2) / (filter.scale - 1);
}

inline TransferMatrix build_transfer_matrix(const FilterSpec& filter, std::optional<int> window = {}) {
    if (filter.m0.is_zero()) throw ContractError("transfer matrix of the zero filter");
    const LaurentPoly c = autocorrelation(filter.m0);
    const int K = window.value_or(transfer_window(filter));
    TransferMatrix T{filter.scale, K, Eigen::MatrixXcd::Zero(2 * K + 1, 2 * K + 1)};
    for (int n = -K; n <= K; ++n)
        for (int m = -K; m <= K; ++m) T.entries(n + K, m + K) = c[filter.scale * n - m];
    return T;
}

struct EigenReport {
    int dimension = 0;
    std::vector<LaurentPoly> basis;  // orthonormal, Hermitian coefficients
    std::vector<double> residuals;   // ||R b - b||_2 per basis vector
    double spectral_radius_estimate = 0.0;
    bool pure = false;
    int window = 0;
};

namespace detail {
inline double power_iteration_radius(const Eigen::MatrixXcd& A, int steps) {
    const Eigen::Index n = A.rows();
    Eigen::VectorXcd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = cplx(1.0 + 0.1 * static_cast<double>(i), 0.05 * static_cast<double>(i % 3));
    v.normalize();
    double ratio = 0.0;
    for (int s = 0; s < steps; ++s) {
        Eigen::VectorXcd w = A * v;
        ratio = w.norm();
        if (ratio == 0.0) return 0.0;
        v = w / ratio;
    }
    return ratio;
}
}  // namespace detail

/// Basis of {f : R f = f} on the transfer window.
inline EigenReport fixed_space(const FilterSpec& filter) {
    const TransferMatrix T = build_transfer_matrix(filter);
    const Eigen::Index n = T.dim();
    const Eigen::MatrixXcd A = T.entries - Eigen::MatrixXcd::Identity(n, n);
    const Eigen::MatrixXcd kernel = linalg::null_space(A, kTauRank);
    // The kernel is closed under f -> conj(f); pick a Hermitian orthonormal basis.
    const auto herm = linalg::hermitian_basis(kernel, T.window);

    EigenReport report;
    report.window = T.window;
    for (const auto& v : herm) {
        LaurentPoly b = from_window(std::vector<cplx>(v.data(), v.data() + v.size()), T.window);
        report.residuals.push_back(l2_norm(apply_ruelle(filter, b) - b));
        report.basis.push_back(std::move(b));
    }
    report.dimension = static_cast<int>(report.basis.size());
    report.pure = report.dimension == 1;
    report.spectral_radius_estimate = detail::power_iteration_radius(T.entries, 200);
    return report;
}

/// Orthogonal-projection residual ||f - P f||_2 of f onto span(basis).
inline double span_residual(const std::vector<LaurentPoly>& basis, const LaurentPoly& f) {
    int K = std::max(-f.lo(), f.hi());
    for (const auto& b : basis) K = std::max({K, -b.lo(), b.hi()});
    Eigen::MatrixXcd Q(2 * K + 1, static_cast<Eigen::Index>(basis.size()));
    for (std::size_t j = 0; j < basis.size(); ++j) {
        const auto v = window_coeffs(basis[j], K);
        for (int i = 0; i < 2 * K + 1; ++i) Q(i, static_cast<Eigen::Index>(j)) = v[static_cast<std::size_t>(i)];
    }
    const Eigen::MatrixXcd Qo = linalg::orthonormal_span(Q);
    const auto fv = window_coeffs(f, K);
    const Eigen::Map<const Eigen::VectorXcd> x(fv.data(), static_cast<Eigen::Index>(fv.size()));
    return linalg::projection_residual(Qo, x);
}

// ---------------------------------------------------------------------------
// Harmonic densities

enum class DensityNormalization { EvalAtOne, UnitIntegral };

struct HarmonicDensity {
    LaurentPoly h;
    DensityNormalization normalization = DensityNormalization::EvalAtOne;
};

/// h(1) = 1 when |h(1)| > 1e-9, otherwise unit integral.
inline HarmonicDensity normalize_density(const LaurentPoly& h) {
    const cplx at_one = h(0.0);
    if (std::abs(at_one) > 1e-9) return {scale(h, 1.0 / at_one), DensityNormalization::EvalAtOne};
    const cplx mass = integral_T(h);
    if (std::abs(mass) <= 1e-300) throw ContractError("density has zero value at 1 and zero integral");
    return {scale(h, 1.0 / mass), DensityNormalization::UnitIntegral};
}

inline double harmonic_residual(const FilterSpec& filter, const LaurentPoly& h) {
    return l2_norm(apply_ruelle(filter, h) - h);
}

/// Validates h as a nonnegative solution of R h = h, keeping its scaling.
inline HarmonicDensity make_harmonic_density(const FilterSpec& filter, const LaurentPoly& h,
                                             bool normalize = false) {
    if (!is_hermitian(h, 1e-10)) throw ContractError("density coefficients are not Hermitian");
    if (!is_real_nonneg(h, 256, 1e-9)) throw ContractError("density is negative somewhere on the circle");
    const double res = harmonic_residual(filter, h);
    if (res > kTauEig) throw ContractError("density is not harmonic: ||R h - h|| = " + std::to_string(res));
    if (normalize) return normalize_density(h);
    const bool at_one = std::abs(h(0.0) - 1.0) <= 1e-9;
    return {h, at_one ? DensityNormalization::EvalAtOne : DensityNormalization::UnitIntegral};
}

// ---------------------------------------------------------------------------
// Filter products and state moments

/// m0(z) m0(z^N) ... m0(z^{N^{n-1}}); n = 0 gives 1.
inline LaurentPoly filter_power(const FilterSpec& filter, int n) {
    if (n < 0) throw ContractError("filter_power needs n >= 0");
    LaurentPoly out = LaurentPoly::constant(1.0);
    int p = 1;
    for (int i = 0; i < n; ++i) {
        out = mul(out, compose_power(filter.m0, p));
        p *= filter.scale;
    }
    return out;
}

/// omega(U^{-k} f U^n) = int m0^{(n-k)} R^k(f h) dmu, 0 <= k <= n.
inline cplx moment(const FilterSpec& filter, const LaurentPoly& h, int k, int n, const LaurentPoly& f) {
    if (k < 0 || k > n) throw ContractError("moment needs 0 <= k <= n");
    const LaurentPoly inner = apply_ruelle_power(filter, mul(f, h), k);
    return integral_T(mul(filter_power(filter, n - k), inner));
}

// ---------------------------------------------------------------------------
// Cocycles

/// max over the grid of |f(z^N) m0'(z) - f(z) m0(z)|; grid points where m0'
/// is undefined are skipped.
inline double cocycle_pair_residual(int N, const Evaluator& m0, const PartialEvaluator& m0prime,
                                    const Evaluator& f, int grid_size) {
    double worst = 0.0;
    for (int t = 0; t < grid_size; ++t) {
        const double omega = detail::grid_omega(t, grid_size);
        const auto mp = m0prime(omega);
        if (!mp) continue;
        worst = std::max(worst, std::abs(f(N * omega) * *mp - f(omega) * m0(omega)));
    }
    return worst;
}

inline double cocycle_pair_residual(const LaurentPoly& m0, const LaurentPoly& m0prime, const LaurentPoly& f, int N,
                                    int grid_size) {
    return cocycle_pair_residual(
        N, [&](double w) { return m0(w); }, [&](double w) -> std::optional<cplx> { return m0prime(w); },
        [&](double w) { return f(w); }, grid_size);
}

struct CocycleSample {
    double omega = 0.0;
    cplx value{0.0};
    bool admissible = false;
};

struct CocycleResult {
    std::vector<CocycleSample> samples;
    double quadrature_residual = 0.0;
    int admissible_points = 0;
    int fibers_checked = 0;
};

/// m0^{(h)}(z) = m0(z) (h(z) / h(z^N))^{1/2} where h(z^N) > eps, or nullopt.
inline PartialEvaluator cocycle_filter(const FilterSpec& filter, const LaurentPoly& h, double eps) {
    return [filter, h, eps](double omega) -> std::optional<cplx> {
        const double down = h(filter.scale * omega).real();
        if (down <= eps) return std::nullopt;
        const double up = std::max(0.0, h(omega).real());
        return filter.m0(omega) * std::sqrt(up / down);
    };
}

inline CocycleResult cocycle_transform(const FilterSpec& filter, const LaurentPoly& h, int grid_size, double eps) {
    if (grid_size < 1) throw ContractError("grid_size must be >= 1");
    const auto mh = cocycle_filter(filter, h, eps);
    const int N = filter.scale;
    CocycleResult out;
    out.samples.reserve(static_cast<std::size_t>(grid_size));
    for (int t = 0; t < grid_size; ++t) {
        const double omega = detail::grid_omega(t, grid_size);
        const auto v = mh(omega);
        out.samples.push_back({omega, v.value_or(cplx{0.0}), v.has_value()});
        if (v) ++out.admissible_points;

        // All roots w of w^N = z share h(w^N) = h(z), so the fiber clears eps
        // exactly when h(z) does.
        if (h(omega).real() <= eps) continue;
        double sum = 0.0;
        for (int k = 0; k < N; ++k) {
            const auto mw = mh((omega + 2.0 * std::numbers::pi * k) / N);
            sum += std::norm(*mw);
        }
        out.quadrature_residual = std::max(out.quadrature_residual, std::abs(sum - N));
        ++out.fibers_checked;
    }
    if (out.fibers_checked == 0) throw ContractError("h vanishes on every fiber of the grid");
    return out;
}

// ---------------------------------------------------------------------------
// Cuntz isometries (N = 2)
//
//   m1(z) = z conj(m0(-z)),   (S_i f)(z) = m_i(z) f(z^2).
//
// The L^2(T) adjoint: <S_i f, g> = int conj(f(z^2)) conj(m_i(z)) g(z) dmu, and
// only the even coefficients of conj(m_i) g pair with f(z^2), so
// (S_i^* g)_n = (conj(m_i) g)_{2n}.

inline LaurentPoly cuntz_filter(const FilterSpec& filter, int i) {
    if (filter.scale != 2) throw ContractError("Cuntz isometries are implemented for N = 2 only");
    if (i == 0) return filter.m0;
    if (i == 1) return mul(LaurentPoly::monomial(1), conj_reflect(rotate(filter.m0, 1, 2)));
    throw ContractError("Cuntz index must be 0 or 1");
}

inline LaurentPoly cuntz_s(const FilterSpec& filter, int i, const LaurentPoly& f) {
    return mul(cuntz_filter(filter, i), compose_power(f, 2));
}

inline LaurentPoly cuntz_s_adjoint(const FilterSpec& filter, int i, const LaurentPoly& f) {
    return downsample_average(mul(conj_reflect(cuntz_filter(filter, i)), f), 2);
}

// ---------------------------------------------------------------------------
// Adjoint powers of S_0 in L^2(h)

/// ||S_0^{*n} f||_{L^2(h)} for n = 1..nmax, with S_0^* g = [R-type average of
/// conj(m0) g h] / h. Values live on nested uniform grids: the fiber of a
/// point on the grid of size G sits on the grid of size N G.
inline std::vector<double> weighted_adjoint_power_decay(const FilterSpec& filter, const LaurentPoly& h,
                                                        const LaurentPoly& f, int nmax, int grid_size) {
    std::vector<double> norms;
    if (nmax <= 0) return norms;
    const int N = filter.scale;
    long long fine = grid_size;
    for (int i = 0; i < nmax; ++i) fine *= N;
    if (fine > (1LL << 23)) throw ContractError("grid_size * N^nmax exceeds 2^23 samples");

    auto sample = [&](const LaurentPoly& p, long long size) {
        std::vector<cplx> v(static_cast<std::size_t>(size));
        for (long long t = 0; t < size; ++t) v[static_cast<std::size_t>(t)] = p(2.0 * std::numbers::pi * t / size);
        return v;
    };
    std::vector<cplx> values = sample(f, fine);
    std::vector<cplx> hv = sample(h, fine);
    std::vector<cplx> mv = sample(filter.m0, fine);
    for (const auto& x : hv)
        if (x.real() <= 1e-9) throw ContractError("h is singular on the grid");

    long long size = fine;
    for (int n = 1; n <= nmax; ++n) {
        const long long coarse = size / N;
        std::vector<cplx> next(static_cast<std::size_t>(coarse));
        for (long long t = 0; t < coarse; ++t) {
            cplx acc{0.0};
            for (int k = 0; k < N; ++k) {
                const auto idx = static_cast<std::size_t>(t + k * coarse);
                acc += std::conj(mv[idx]) * values[idx] * hv[idx].real();
            }
            // h on the coarse grid is h on the fine grid at stride N
            next[static_cast<std::size_t>(t)] = acc / (static_cast<double>(N) * hv[static_cast<std::size_t>(t * N)].real());
        }
        // keep h and m0 aligned with the new grid
        std::vector<cplx> hc(static_cast<std::size_t>(coarse)), mc(static_cast<std::size_t>(coarse));
        for (long long t = 0; t < coarse; ++t) {
            hc[static_cast<std::size_t>(t)] = hv[static_cast<std::size_t>(t * N)];
            mc[static_cast<std::size_t>(t)] = mv[static_cast<std::size_t>(t * N)];
        }
        values = std::move(next);
        hv = std::move(hc);
        mv = std::move(mc);
        size = coarse;

        double acc = 0.0;
        for (long long t = 0; t < size; ++t)
            acc += std::norm(values[static_cast<std::size_t>(t)]) * hv[static_cast<std::size_t>(t)].real();
        norms.push_back(std::sqrt(acc / static_cast<double>(size)));
    }
    return norms;
}

// ---------------------------------------------------------------------------
// Conditional expectation onto the first level: xi -> R(xi h) / h

inline std::vector<cplx> conditional_expectation(const FilterSpec& filter, const LaurentPoly& h, const Evaluator& xi,
                                                 int grid_size) {
    std::vector<cplx> out(static_cast<std::size_t>(grid_size));
    for (int t = 0; t < grid_size; ++t) {
        const double omega = detail::grid_omega(t, grid_size);
        const double hz = h(omega).real();
        if (hz <= 1e-9) throw ContractError("h vanishes on the grid");
        const cplx r = apply_ruelle_pointwise(filter, [&](double w) { return xi(w) * h(w); }, omega);
        out[static_cast<std::size_t>(t)] = r / hz;
    }
    return out;
}

/// | <E(xi), eta>_{L^2(h)} - int R(conj(eta(z^N)) xi h) dmu |: the defining
/// property of the projection, with the left side taken from grid samples of
/// the pointwise oracle and the right side from coefficients.
inline double projection_identity_residual(const FilterSpec& filter, const LaurentPoly& h, const LaurentPoly& xi,
                                           const LaurentPoly& eta, int grid_size) {
    const auto e = conditional_expectation(filter, h, [&](double w) { return xi(w); }, grid_size);
    cplx lhs{0.0};
    for (int t = 0; t < grid_size; ++t) {
        const double omega = detail::grid_omega(t, grid_size);
        lhs += std::conj(eta(omega)) * e[static_cast<std::size_t>(t)] * h(omega).real();
    }
    lhs /= static_cast<double>(grid_size);
    const cplx rhs =
        integral_T(apply_ruelle(filter, mul(mul(conj_reflect(compose_power(eta, filter.scale)), xi), h)));
    return std::abs(lhs - rhs);
}

/// max over the grid of |R((xi o T) h) - xi R(h)| computed by root sums.
inline double pullout_residual(const FilterSpec& filter, const LaurentPoly& h, const Evaluator& xi, int grid_size) {
    const int N = filter.scale;
    double worst = 0.0;
    for (int t = 0; t < grid_size; ++t) {
        const double omega = detail::grid_omega(t, grid_size);
        const cplx lhs = apply_ruelle_pointwise(filter, [&](double w) { return xi(N * w) * h(w); }, omega);
        const cplx rh = apply_ruelle_pointwise(filter, [&](double w) { return h(w); }, omega);
        worst = std::max(worst, std::abs(lhs - xi(omega) * rh));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// L^1 operator norm

struct L1NormWitness {
    double ratio = 0.0;  // best ||Rf||_1 / ||f||_1 found
    double bound = 0.0;  // max |m0|^2 on the grid
};

/// Searches random trigonometric polynomials and Fejer spikes at argmax |m0|
/// for the ratio ||Rf||_1 / ||f||_1. The fiber of the coarse grid of size G
/// is the fine grid of size N G, so the discrete ratio never exceeds the
/// discrete bound.
inline L1NormWitness l1_norm_bound_witness(const FilterSpec& filter, int trials, std::uint64_t seed = 1,
                                           int grid_size = 1024) {
    if (trials < 1) throw ContractError("trials must be >= 1");
    const int N = filter.scale;
    const int fine = grid_size * N;
    std::vector<double> weight(static_cast<std::size_t>(fine));
    L1NormWitness out;
    int argmax = 0;
    for (int t = 0; t < fine; ++t) {
        weight[static_cast<std::size_t>(t)] = std::norm(filter.m0(detail::grid_omega(t, fine)));
        if (weight[static_cast<std::size_t>(t)] > out.bound) {
            out.bound = weight[static_cast<std::size_t>(t)];
            argmax = t;
        }
    }

    auto ratio_of = [&](const std::vector<cplx>& fv) {
        double num = 0.0, den = 0.0;
        for (int t = 0; t < grid_size; ++t) {
            cplx acc{0.0};
            for (int k = 0; k < N; ++k) {
                const auto idx = static_cast<std::size_t>(t + k * grid_size);
                acc += weight[idx] * fv[idx];
            }
            num += std::abs(acc) / N;
        }
        for (const auto& v : fv) den += std::abs(v);
        return den > 0.0 ? (num / grid_size) / (den / fine) : 0.0;
    };
    auto sample = [&](const LaurentPoly& p) {
        std::vector<cplx> v(static_cast<std::size_t>(fine));
        for (int t = 0; t < fine; ++t) v[static_cast<std::size_t>(t)] = p(detail::grid_omega(t, fine));
        return v;
    };

    RngStream rng(CounterRng(seed), 0x11);
    for (int trial = 0; trial < trials; ++trial) {
        std::vector<cplx> c(17);
        for (auto& a : c) a = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
        out.ratio = std::max(out.ratio, ratio_of(sample(LaurentPoly(-8, c))));
    }
    const double peak = detail::grid_omega(argmax, fine);
    for (int degree : {16, 64, 256}) {
        if (degree >= grid_size / 2) break;
        std::vector<cplx> c(static_cast<std::size_t>(2 * degree + 1));
        for (int k = -degree; k <= degree; ++k) {
            // Fejer kernel centered at `peak` in the z = e^{-i omega} convention
            const double taper = 1.0 - static_cast<double>(std::abs(k)) / (degree + 1);
            c[static_cast<std::size_t>(k + degree)] = taper * std::polar(1.0, k * peak);
        }
        out.ratio = std::max(out.ratio, ratio_of(sample(LaurentPoly(-degree, c))));
    }
    return out;
}

}  // namespace ruelle
