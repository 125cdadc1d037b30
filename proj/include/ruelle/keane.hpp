#pragma once

// Transfer operators of N-to-1 maps,
//
//     (R_g f)(x) = sum_{T y = x} g(y) f(y),
//
// for three kinds of expanding dynamics: real monic polynomials with a real
// Julia interval [a, b] (balanced measure by backward iteration), the circle
// map z -> z^N, and piecewise monotone Markov maps of [0, 1] with the
// Lebesgue weight 1/|T'|.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ruelle/errors.hpp"
#include "ruelle/laurent.hpp"
#include "ruelle/parallel.hpp"
#include "ruelle/rng.hpp"

namespace ruelle {

// ---------------------------------------------------------------------------
// Real polynomials

class RealPolynomial {
public:
    /// Coefficients from the highest degree down; the leading one must be 1.
    explicit RealPolynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) {
        if (c_.size() < 2) throw ContractError("polynomial degree must be >= 1");
        for (double v : c_)
            if (!std::isfinite(v)) throw ContractError("polynomial coefficients must be finite");
        if (std::abs(c_.front() - 1.0) > 1e-12) throw ContractError("polynomial must be monic");
        c_.front() = 1.0;
        compute_critical_points();
    }

    int degree() const noexcept { return static_cast<int>(c_.size()) - 1; }
    const std::vector<double>& coeffs() const noexcept { return c_; }
    const std::vector<double>& critical_points() const noexcept { return crit_; }

    double operator()(double x) const noexcept {
        double acc = 0.0;
        for (double v : c_) acc = acc * x + v;
        return acc;
    }

    double derivative(double x) const noexcept {
        const int n = degree();
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc = acc * x + c_[static_cast<std::size_t>(i)] * (n - i);
        return acc;
    }

    /// Every real root lies in [-bound, bound] for p(t) = value.
    double cauchy_bound(double value = 0.0) const noexcept {
        double m = 0.0;
        for (std::size_t i = 1; i < c_.size(); ++i) {
            const double v = i + 1 == c_.size() ? c_[i] - value : c_[i];
            m = std::max(m, std::abs(v));
        }
        return 1.0 + m;
    }

    /// The solution of p(t) = value in [lo, hi], assuming p is monotone
    /// there; empty when there is no sign change.
    std::optional<double> monotone_solve(double lo, double hi, double value) const {
        double qlo = (*this)(lo) - value;
        const double qhi = (*this)(hi) - value;
        const double tol = 1e-13 * scale_at(std::max(std::abs(lo), std::abs(hi)));
        if (std::abs(qlo) <= tol) return lo;
        if (std::abs(qhi) <= tol) return hi;
        if ((qlo > 0) == (qhi > 0)) return std::nullopt;
        // Newton inside the bracket, bisecting whenever a step leaves it
        const bool rising = qhi > 0;
        double x = 0.5 * (lo + hi);
        for (int it = 0; it < 200; ++it) {
            const double qx = (*this)(x) - value;
            if (qx == 0.0) return x;
            if ((qx > 0) == rising)
                hi = x;
            else
                lo = x;
            const double d = derivative(x);
            double next = d != 0.0 ? x - qx / d : lo;
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            if (next == x || next <= lo || next >= hi) break;
            if (std::abs(next - x) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(x)) {
                x = next;
                break;
            }
            x = next;
        }
        return x;
    }

    /// All distinct real solutions of p(t) = value, ascending.
    std::vector<double> real_roots(double value = 0.0) const {
        const double R = cauchy_bound(value);
        std::vector<double> cuts{-R};
        for (double c : crit_)
            if (c > -R && c < R) cuts.push_back(c);
        cuts.push_back(R);
        std::vector<double> roots;
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            if (auto r = monotone_solve(cuts[i], cuts[i + 1], value)) {
                const double tol = 1e-12 * std::max(1.0, std::abs(*r));
                if (roots.empty() || std::abs(roots.back() - *r) > tol) roots.push_back(*r);
            }
        }
        return roots;
    }

    /// Size of |p| near |x|, used to scale residual tolerances.
    double scale_at(double x) const noexcept { return std::max(1.0, std::pow(std::abs(x), degree())); }

private:
    void compute_critical_points() {
        const int n = degree();
        if (n < 2) return;
        // companion matrix of p'(t) / n
        const int m = n - 1;
        Eigen::MatrixXd C = Eigen::MatrixXd::Zero(m, m);
        for (int i = 1; i < m; ++i) C(i, i - 1) = 1.0;
        for (int i = 0; i < m; ++i) {
            const double d = c_[static_cast<std::size_t>(i + 1)] * (n - i - 1) / static_cast<double>(n);
            C(m - 1 - i, m - 1) = -d;
        }
        Eigen::EigenSolver<Eigen::MatrixXd> es(C, false);
        std::vector<double> pts;
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
            const std::complex<double> ev = es.eigenvalues()[i];
            if (std::abs(ev.imag()) <= 1e-7 * (1.0 + std::abs(ev))) pts.push_back(polish_critical(ev.real()));
        }
        std::sort(pts.begin(), pts.end());
        for (double x : pts)
            if (crit_.empty() || std::abs(x - crit_.back()) > 1e-10 * std::max(1.0, std::abs(x))) crit_.push_back(x);
    }

    double second_derivative(double x) const noexcept {
        const int n = degree();
        double acc = 0.0;
        for (int i = 0; i < n - 1; ++i) acc = acc * x + c_[static_cast<std::size_t>(i)] * (n - i) * (n - i - 1);
        return acc;
    }

    double polish_critical(double x) const noexcept {
        for (int it = 0; it < 4; ++it) {
            const double d2 = second_derivative(x);
            if (d2 == 0.0) break;
            const double step = derivative(x) / d2;
            if (!std::isfinite(step)) break;
            x -= step;
        }
        return x;
    }

    std::vector<double> c_;
    std::vector<double> crit_;
};

// ---------------------------------------------------------------------------
// Julia systems

enum class JuliaCase { FixedA, MappedA };

inline std::string to_string(JuliaCase c) { return c == JuliaCase::FixedA ? "fixed-a" : "mapped-a"; }

struct JuliaSystem {
    using point_type = double;

    RealPolynomial poly;
    double a = 0.0;
    double b = 0.0;
    JuliaCase kind = JuliaCase::FixedA;
    double branch_tol = 0.0;
    std::vector<double> cuts;  // a = cuts[0] < critical points < cuts[N] = b

    int degree() const noexcept { return poly.degree(); }
    double map(double x) const noexcept { return poly(x); }

    /// sigma_i(x) for i = 1..N, sigma_1 the largest.
    double branch(double x, int i) const {
        const int N = degree();
        if (i < 1 || i > N) throw ContractError("branch index out of range");
        const double slack = 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
        if (!(x >= a - slack && x <= b + slack)) throw ContractError("point outside the Julia interval");
        const auto piece = static_cast<std::size_t>(N - i);
        const auto r = poly.monotone_solve(cuts[piece], cuts[piece + 1], x);
        if (!r) throw std::runtime_error("inverse branch not found");
        return *r;
    }

    /// All N inverse branches, strictly decreasing.
    std::vector<double> preimages(double x) const {
        std::vector<double> out(static_cast<std::size_t>(degree()));
        for (int i = 1; i <= degree(); ++i) out[static_cast<std::size_t>(i - 1)] = branch(x, i);
        return out;
    }
};

/// Locates the real Julia interval [a, b] of a monic polynomial and checks
/// that every point of it has N real preimages inside it.
inline JuliaSystem julia_bracket(const RealPolynomial& p) {
    const int N = p.degree();
    if (N < 2) throw ContractError("degree must be >= 2");

    std::vector<double> qc = p.coeffs();
    qc[qc.size() - 2] -= 1.0;
    const RealPolynomial q(qc);
    const std::vector<double> fixed = q.real_roots(0.0);
    std::vector<double> repelling;
    for (double t : fixed)
        if (std::abs(p.derivative(t)) > 1.0) repelling.push_back(t);
    if (fixed.empty() || repelling.empty() || repelling.back() != fixed.back())
        throw ContractError("no unstable real fixed point");

    JuliaSystem js{p, 0.0, fixed.back(), JuliaCase::FixedA, 0.0, {}};
    const std::vector<double> pre_b = p.real_roots(js.b);
    if (pre_b.empty()) throw ContractError("b has no real preimage");
    js.a = std::min(pre_b.front(), repelling.front());

    const double scale = p.scale_at(std::max(std::abs(js.a), std::abs(js.b)));
    const double class_tol = 1e-8 * scale;
    if (std::abs(p(js.a) - js.a) <= class_tol)
        js.kind = JuliaCase::FixedA;
    else if (std::abs(p(js.a) - js.b) <= class_tol)
        js.kind = JuliaCase::MappedA;
    else
        throw ContractError("left endpoint is neither fixed nor mapped to b");
    js.branch_tol = 1e-11 * scale;

    js.cuts.push_back(js.a);
    for (double c : p.critical_points())
        if (c > js.a && c < js.b) js.cuts.push_back(c);
    js.cuts.push_back(js.b);
    if (static_cast<int>(js.cuts.size()) != N + 1)
        throw ContractError("preimage count differs from the degree (critical points outside the interval)");

    const double width = js.b - js.a;
    const double slack = 1e-9 * scale;
    for (std::size_t i = 0; i + 1 < js.cuts.size(); ++i) {
        const double u = p(js.cuts[i]);
        const double v = p(js.cuts[i + 1]);
        if (std::min(u, v) > js.a + slack || std::max(u, v) < js.b - slack)
            throw ContractError("preimage count differs from the degree (a monotone piece does not cover [a, b])");
    }
    if (static_cast<int>(pre_b.size()) != N || pre_b.front() < js.a - slack || pre_b.back() > js.b + slack)
        throw ContractError("preimages of b are not N points inside [a, b]");
    for (int t = 1; t < 100; ++t) {
        const double x = js.a + width * t / 100.0;
        const auto roots = p.real_roots(x);
        if (static_cast<int>(roots.size()) != N) throw ContractError("preimage count differs from the degree");
        for (double r : roots)
            if (r < js.a - slack || r > js.b + slack) throw ContractError("preimage outside [a, b]");
    }
    return js;
}

inline std::vector<double> inverse_branches(const JuliaSystem& js, double x) { return js.preimages(x); }

/// Points sigma_{w_1} o ... o sigma_{w_depth}(x0) for uniform random words;
/// the word for sample s is drawn from stream s of the seeded generator.
inline std::vector<double> backward_sample(const JuliaSystem& js, double x0, int depth, std::size_t count,
                                           std::uint64_t seed) {
    if (depth < 1) throw ContractError("depth must be >= 1");
    const CounterRng rng(seed);
    const auto N = static_cast<std::uint64_t>(js.degree());
    std::vector<double> out(count);
    parallel_for(count, [&](std::size_t s) {
        double x = x0;
        for (int d = 0; d < depth; ++d) x = js.branch(x, 1 + static_cast<int>(rng.below(N, s, static_cast<std::uint64_t>(d))));
        out[s] = x;
    });
    return out;
}

/// Image sigma_{i_1} o ... o sigma_{i_k}([a, b]) as a closed interval.
inline std::array<double, 2> cylinder(const JuliaSystem& js, const std::vector<int>& word) {
    double lo = js.a;
    double hi = js.b;
    for (auto it = word.rbegin(); it != word.rend(); ++it) {
        const double u = js.branch(lo, *it);
        const double v = js.branch(hi, *it);
        lo = std::min(u, v);
        hi = std::max(u, v);
    }
    return {lo, hi};
}

// ---------------------------------------------------------------------------
// Circle map z -> z^N, points stored as omega with z = e^{-i omega}

struct CircleMap {
    using point_type = double;

    int N = 2;

    int degree() const noexcept { return N; }
    double map(double omega) const noexcept { return std::fmod(N * omega, 2.0 * std::numbers::pi); }
    std::vector<double> preimages(double omega) const {
        std::vector<double> out(static_cast<std::size_t>(N));
        for (int k = 0; k < N; ++k) out[static_cast<std::size_t>(k)] = (omega + 2.0 * std::numbers::pi * k) / N;
        return out;
    }
    static double distance(double u, double v) noexcept {
        return std::abs(std::polar(1.0, -u) - std::polar(1.0, -v));
    }
};

/// g = |m0|^2 / N as a weight on omega.
inline std::function<double(double)> filter_weight(const FilterSpec& filter) {
    return [m0 = filter.m0, N = filter.scale](double omega) { return std::norm(m0(omega)) / N; };
}

// ---------------------------------------------------------------------------
// Generic Keane operator

template <class System, class G, class F>
auto keane_apply(const System& sys, G&& g, F&& f, typename System::point_type x) {
    using R = std::decay_t<decltype(f(x))>;
    R acc{};
    for (const auto& y : sys.preimages(x)) acc += static_cast<R>(g(y)) * f(y);
    return acc;
}

/// max over `points` of |sum_{Ty=x} g(y) - 1|.
template <class System, class G>
double weight_normalization_residual(const System& sys, G&& g, const std::vector<typename System::point_type>& points) {
    double worst = 0.0;
    for (const auto& x : points) {
        double s = 0.0;
        for (const auto& y : sys.preimages(x)) s += g(y);
        worst = std::max(worst, std::abs(s - 1.0));
    }
    return worst;
}

enum class CycleCheck { Strict, Unchecked };

/// |(1/k) sum R_g f(x_i) - (1/k) sum f(x_i)| for the uniform measure on a
/// cycle x_1 -> x_2 -> ... -> x_k -> x_1. Strict mode requires the cycle
/// relations and g(x_i) = 1.
template <class System, class G, class F>
double cycle_measure_residual(const System& sys, G&& g, const std::vector<typename System::point_type>& cycle, F&& f,
                              CycleCheck mode = CycleCheck::Strict) {
    if (cycle.empty()) throw ContractError("cycle must be nonempty");
    const std::size_t k = cycle.size();
    if (mode == CycleCheck::Strict) {
        for (std::size_t i = 0; i < k; ++i) {
            const auto next = sys.map(cycle[i]);
            double gap;
            if constexpr (std::is_same_v<System, CircleMap>)
                gap = CircleMap::distance(next, cycle[(i + 1) % k]);
            else
                gap = std::abs(next - cycle[(i + 1) % k]);
            if (gap > 1e-10) throw ContractError("points do not form a cycle");
            if (std::abs(g(cycle[i]) - 1.0) > 1e-9) throw ContractError("g must equal 1 on the cycle");
        }
    }
    using R = std::decay_t<decltype(f(cycle.front()))>;
    R lhs{}, rhs{};
    for (const auto& x : cycle) {
        lhs += keane_apply(sys, g, f, x);
        rhs += f(x);
    }
    return std::abs(lhs - rhs) / static_cast<double>(k);
}

// ---------------------------------------------------------------------------
// Monte Carlo identities for the balanced measure

struct MonteCarloEstimate {
    std::complex<double> lhs;
    std::complex<double> rhs;
    double residual = 0.0;
    double stderr_ = 0.0;
    bool within(double sigmas) const noexcept { return residual <= sigmas * stderr_; }
};

namespace detail {
inline MonteCarloEstimate paired_estimate(const std::vector<std::complex<double>>& l,
                                          const std::vector<std::complex<double>>& r) {
    const auto n = static_cast<double>(l.size());
    MonteCarloEstimate est;
    if (l.empty()) return est;
    std::complex<double> mean_d{};
    for (std::size_t s = 0; s < l.size(); ++s) {
        est.lhs += l[s];
        est.rhs += r[s];
        mean_d += l[s] - r[s];
    }
    est.lhs /= n;
    est.rhs /= n;
    mean_d /= n;
    double var = 0.0;
    for (std::size_t s = 0; s < l.size(); ++s) var += std::norm(l[s] - r[s] - mean_d);
    var /= std::max(1.0, n - 1.0);
    est.residual = std::abs(mean_d);
    est.stderr_ = std::sqrt(var / n);
    return est;
}
}  // namespace detail

/// Estimates int f dmu against (1/N) sum_i int f o sigma_i dmu over
/// balanced-measure samples.
template <class System, class F>
MonteCarloEstimate invariance_residual(const System& sys, F&& f, const std::vector<typename System::point_type>& samples) {
    std::vector<std::complex<double>> l(samples.size()), r(samples.size());
    const double N = sys.degree();
    parallel_for(samples.size(), [&](std::size_t s) {
        l[s] = f(samples[s]);
        std::complex<double> acc{};
        for (const auto& y : sys.preimages(samples[s])) acc += std::complex<double>(f(y));
        r[s] = acc / N;
    });
    return detail::paired_estimate(l, r);
}

inline MonteCarloEstimate invariance_residual(const JuliaSystem& js, const std::function<double(double)>& f,
                                              std::size_t samples, std::uint64_t seed, int depth = 25) {
    return invariance_residual(js, f, backward_sample(js, js.b, depth, samples, seed));
}

/// Exact circle version for a trigonometric polynomial f and Haar measure.
inline double invariance_residual_circle(const LaurentPoly& f, int N) {
    return std::abs(integral_T(f) - integral_T(downsample_average(f, N)));
}

/// Both sides of N int g(x) xi(Tx) f(x) dmu = int xi(x) (R_g f)(x) dmu.
template <class System, class G, class Xi, class F>
MonteCarloEstimate duality_residual(const System& sys, G&& g, Xi&& xi, F&& f,
                                    const std::vector<typename System::point_type>& samples) {
    std::vector<std::complex<double>> l(samples.size()), r(samples.size());
    const double N = sys.degree();
    parallel_for(samples.size(), [&](std::size_t s) {
        const auto x = samples[s];
        l[s] = N * g(x) * std::complex<double>(xi(sys.map(x))) * std::complex<double>(f(x));
        r[s] = std::complex<double>(xi(x)) * std::complex<double>(keane_apply(sys, g, f, x));
    });
    return detail::paired_estimate(l, r);
}

inline MonteCarloEstimate duality_residual(const JuliaSystem& js, const std::function<double(double)>& g,
                                           const std::function<double(double)>& xi,
                                           const std::function<double(double)>& f, std::size_t samples,
                                           std::uint64_t seed, int depth = 25) {
    return duality_residual(js, g, xi, f, backward_sample(js, js.b, depth, samples, seed));
}

/// Exact circle version with g = |m0|^2 / N and Haar measure.
inline MonteCarloEstimate duality_residual_circle(const FilterSpec& filter, const LaurentPoly& xi, const LaurentPoly& f) {
    const LaurentPoly g = scale(autocorrelation(filter.m0), 1.0 / filter.scale);
    MonteCarloEstimate est;
    est.lhs = static_cast<double>(filter.scale) * integral_T(g * compose_power(xi, filter.scale) * f);
    est.rhs = integral_T(xi * downsample_average(mul(autocorrelation(filter.m0), f), filter.scale));
    est.residual = std::abs(est.lhs - est.rhs);
    return est;
}

// ---------------------------------------------------------------------------
// Piecewise monotone Markov maps of [0, 1]

struct MarkovPiece {
    double lo = 0.0;
    double hi = 1.0;
    double image_lo = 0.0;  // limit of T at lo from the right
    double image_hi = 1.0;  // limit of T at hi from the left
    std::function<double(double)> T;   // empty for the affine piece through the endpoint data
    std::function<double(double)> dT;

    bool linear() const noexcept { return !T; }
    double slope() const noexcept { return (image_hi - image_lo) / (hi - lo); }
    double eval(double x) const { return linear() ? image_lo + slope() * (x - lo) : T(x); }
    double deriv(double x) const { return linear() ? slope() : dT(x); }
};

class MarkovMap {
public:
    using point_type = double;

    explicit MarkovMap(std::vector<MarkovPiece> pieces) : pieces_(std::move(pieces)) { validate(); }

    static MarkovMap full_branch(const std::vector<double>& breaks) {
        std::vector<MarkovPiece> ps;
        for (std::size_t i = 0; i + 1 < breaks.size(); ++i) ps.push_back({breaks[i], breaks[i + 1], 0.0, 1.0, {}, {}});
        return MarkovMap(std::move(ps));
    }
    static MarkovMap doubling() { return full_branch({0.0, 0.5, 1.0}); }
    static MarkovMap tripling() { return full_branch({0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0}); }
    static MarkovMap two_branch(double gamma) {
        if (!(gamma > 0.0 && gamma < 1.0)) throw ContractError("gamma must lie in (0, 1)");
        return full_branch({0.0, gamma, 1.0});
    }

    const std::vector<MarkovPiece>& pieces() const noexcept { return pieces_; }
    const std::vector<double>& partition() const noexcept { return partition_; }
    double expansion() const noexcept { return beta_; }
    bool piecewise_linear() const noexcept {
        return std::all_of(pieces_.begin(), pieces_.end(), [](const MarkovPiece& p) { return p.linear(); });
    }
    int degree() const noexcept { return static_cast<int>(pieces_.size()); }

    const MarkovPiece& piece_at(double x) const {
        for (const auto& p : pieces_)
            if (x < p.hi) return p;
        return pieces_.back();
    }

    double map(double x) const {
        const double y = piece_at(x).eval(x);
        return y >= 1.0 ? y - 1.0 : y;
    }
    double derivative(double x) const { return piece_at(x).deriv(x); }

    /// Preimages of x in [0, 1), one per piece whose image contains x
    /// (half-open image intervals).
    std::vector<double> preimages(double x) const {
        std::vector<double> out;
        for (const auto& p : pieces_) {
            const double u = std::min(p.image_lo, p.image_hi);
            const double v = std::max(p.image_lo, p.image_hi);
            if (!(x >= u && x < v)) continue;
            if (p.linear()) {
                out.push_back(p.lo + (x - p.image_lo) / p.slope());
                continue;
            }
            double l = p.lo, r = p.hi;
            const bool up = p.image_hi > p.image_lo;
            for (int it = 0; it < 200; ++it) {
                const double m = 0.5 * (l + r);
                if (m <= l || m >= r) break;
                if ((p.T(m) < x) == up)
                    l = m;
                else
                    r = m;
            }
            out.push_back(0.5 * (l + r));
        }
        return out;
    }

private:
    void validate() {
        if (pieces_.empty()) throw ContractError("map needs at least one piece");
        if (pieces_.front().lo != 0.0 || pieces_.back().hi != 1.0) throw ContractError("pieces must cover [0, 1]");
        partition_.push_back(0.0);
        for (std::size_t i = 0; i < pieces_.size(); ++i) {
            const auto& p = pieces_[i];
            if (!(p.hi > p.lo)) throw ContractError("piece with empty domain");
            if (i > 0 && std::abs(p.lo - pieces_[i - 1].hi) > 1e-15) throw ContractError("pieces must be contiguous");
            if (p.T && !p.dT) throw ContractError("nonlinear piece needs a derivative");
            partition_.push_back(p.hi);
        }
        auto is_partition_point = [this](double y) {
            return std::any_of(partition_.begin(), partition_.end(),
                               [y](double x) { return std::abs(x - y) <= 1e-12; });
        };
        beta_ = std::numeric_limits<double>::infinity();
        for (const auto& p : pieces_) {
            if (!is_partition_point(p.image_lo) || !is_partition_point(p.image_hi))
                throw ContractError("Markov property fails: a piece image does not end on partition points");
            for (int s = 0; s <= 64; ++s) {
                const double x = p.lo + (p.hi - p.lo) * s / 64.0;
                beta_ = std::min(beta_, std::abs(p.deriv(x)));
            }
        }
        if (!(beta_ > 1.0)) throw ContractError("map is not expanding (inf |T'| <= 1)");
    }

    std::vector<MarkovPiece> pieces_;
    std::vector<double> partition_;
    double beta_ = 0.0;
};

/// sum_{Ty=x} f(y) / |T'(y)|.
inline double py_transfer_apply(const MarkovMap& map, const std::function<double(double)>& f, double x) {
    double acc = 0.0;
    for (double y : map.preimages(x)) acc += f(y) / std::abs(map.derivative(y));
    return acc;
}

struct UlamResult {
    std::vector<double> density;  // one value per bin, mean 1
    int steps = 0;
    double residual = 0.0;         // sup |v P - v| at the returned vector
    double min_entry = 0.0;
};

inline constexpr int kUlamMaxSteps = 10000;
inline constexpr double kUlamTolerance = 1e-12;

/// Row-stochastic Ulam matrix in sparse row form.
inline std::vector<std::vector<std::pair<int, double>>> ulam_matrix(const MarkovMap& map, int bins) {
    if (bins < 2) throw ContractError("bins must be >= 2");
    for (double x : map.partition())
        if (std::abs(x * bins - std::round(x * bins)) > 1e-9)
            throw ContractError("bins must refine the Markov partition");
    const double w = 1.0 / bins;
    std::vector<std::vector<std::pair<int, double>>> rows(static_cast<std::size_t>(bins));
    parallel_for(static_cast<std::size_t>(bins), [&](std::size_t i) {
        const double lo = static_cast<double>(i) * w;
        const MarkovPiece& p = map.piece_at(lo + 0.5 * w);
        auto& row = rows[i];
        if (p.linear()) {
            const double u = std::min(p.eval(lo), p.eval(lo + w));
            const double v = std::max(p.eval(lo), p.eval(lo + w));
            const double len = v - u;
            const int j0 = std::max(0, static_cast<int>(std::floor(u * bins + 1e-9)));
            const int j1 = std::min(bins - 1, static_cast<int>(std::ceil(v * bins - 1e-9)) - 1);
            for (int j = j0; j <= j1; ++j) {
                const double overlap = std::min(v, (j + 1) * w) - std::max(u, j * w);
                if (overlap > 0.0) row.emplace_back(j, overlap / len);
            }
        } else {
            constexpr int kSub = 32;
            std::vector<double> mass(static_cast<std::size_t>(bins), 0.0);
            for (int s = 0; s < kSub; ++s) {
                const double y = p.eval(lo + (s + 0.5) * w / kSub);
                const int j = std::clamp(static_cast<int>(std::floor(y * bins)), 0, bins - 1);
                mass[static_cast<std::size_t>(j)] += 1.0 / kSub;
            }
            for (int j = 0; j < bins; ++j)
                if (mass[static_cast<std::size_t>(j)] > 0.0) row.emplace_back(j, mass[static_cast<std::size_t>(j)]);
        }
    });
    return rows;
}

/// Invariant density of the Ulam chain, the fixed vector of v -> v P.
inline UlamResult ulam_fixed_density(const MarkovMap& map, int bins) {
    const auto rows = ulam_matrix(map, bins);
    const auto B = static_cast<std::size_t>(bins);
    auto step = [&](const std::vector<double>& v) {
        std::vector<double> out(B, 0.0);
        for (std::size_t i = 0; i < B; ++i)
            for (const auto& [j, m] : rows[i]) out[static_cast<std::size_t>(j)] += v[i] * m;
        const double mean = std::accumulate(out.begin(), out.end(), 0.0) / static_cast<double>(B);
        for (double& x : out) x /= mean;
        return out;
    };
    auto sup_diff = [](const std::vector<double>& x, const std::vector<double>& y) {
        double d = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) d = std::max(d, std::abs(x[i] - y[i]));
        return d;
    };

    std::vector<double> v(B);
    for (std::size_t i = 0; i < B; ++i)
        v[i] = 1.0 + 0.5 * std::cos(2.0 * std::numbers::pi * (static_cast<double>(i) + 0.5) / static_cast<double>(B));
    UlamResult res;
    for (res.steps = 1; res.steps <= kUlamMaxSteps; ++res.steps) {
        std::vector<double> next = step(v);
        const double d = sup_diff(next, v);
        v = std::move(next);
        if (d < kUlamTolerance) break;
    }
    if (res.steps > kUlamMaxSteps) throw std::runtime_error("Ulam power iteration did not converge");
    res.residual = sup_diff(step(v), v);
    res.min_entry = *std::min_element(v.begin(), v.end());
    res.density = std::move(v);
    return res;
}

}  // namespace ruelle
