#pragma once

// The cascade refinement operator
//
//     (M phi)(x) = sqrt(N) sum_k a_k phi(N x - k)
//
// on piecewise-constant functions over N-adic grids, the correlation density
// H(phi, psi)(z) = sum_n z^n <phi(. - n), psi>, and the Mallat partial
// products whose L^2(R) norms are conserved.
//
// A GridFunction at level j is constant on the cells [t N^-j, (t+1) N^-j).
// Characteristic functions of intervals with N-adic endpoints are exact in
// this representation and M maps level j to level j+1 without error.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <ostream>
#include <vector>

#include "ruelle/errors.hpp"
#include "ruelle/format.hpp"
#include "ruelle/laurent.hpp"
#include "ruelle/transfer.hpp"

namespace ruelle {

namespace detail {
inline std::int64_t ipow(std::int64_t base, int exp) {
    std::int64_t r = 1;
    for (int i = 0; i < exp; ++i) r *= base;
    return r;
}
inline std::int64_t floor_div64(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}
}  // namespace detail

class GridFunction {
public:
    GridFunction(int scale, int level, std::int64_t start, std::vector<cplx> values)
        : scale_(scale), level_(level), start_(start), values_(std::move(values)) {
        if (scale_ < 2) throw ContractError("grid scale must be >= 2");
        if (level_ < 0) throw ContractError("grid level must be >= 0");
        trim();
    }

    static GridFunction zero(int scale, int level = 0) { return GridFunction(scale, level, 0, {}); }

    /// height * chi_[lo, hi) with integer endpoints, at level 0.
    static GridFunction box(int scale, std::int64_t lo, std::int64_t hi, cplx height = 1.0) {
        if (hi <= lo) return zero(scale);
        return GridFunction(scale, 0, lo, std::vector<cplx>(static_cast<std::size_t>(hi - lo), height));
    }

    int scale() const noexcept { return scale_; }
    int level() const noexcept { return level_; }
    std::int64_t start() const noexcept { return start_; }
    const std::vector<cplx>& values() const noexcept { return values_; }
    bool empty() const noexcept { return values_.empty(); }
    std::int64_t cells_per_unit() const { return detail::ipow(scale_, level_); }
    double cell_width() const { return 1.0 / static_cast<double>(cells_per_unit()); }

    /// Left endpoint of cell index t (absolute index, not offset).
    double x_of(std::int64_t t) const { return static_cast<double>(t) * cell_width(); }
    double x0() const { return x_of(start_); }

    /// Value on the absolute cell index t.
    cplx cell(std::int64_t t) const {
        const std::int64_t i = t - start_;
        if (i < 0 || i >= static_cast<std::int64_t>(values_.size())) return cplx{0.0};
        return values_[static_cast<std::size_t>(i)];
    }

    cplx operator()(double x) const {
        return cell(static_cast<std::int64_t>(std::floor(x * static_cast<double>(cells_per_unit()))));
    }

    /// Same function at a finer level (each cell duplicated N^(j'-j) times).
    GridFunction refined(int level) const {
        if (level < level_) throw ContractError("refined() cannot lower the level");
        if (level == level_) return *this;
        const std::int64_t f = detail::ipow(scale_, level - level_);
        std::vector<cplx> v(values_.size() * static_cast<std::size_t>(f));
        for (std::size_t i = 0; i < values_.size(); ++i)
            std::fill_n(v.begin() + static_cast<std::ptrdiff_t>(i * static_cast<std::size_t>(f)), f, values_[i]);
        return GridFunction(scale_, level, start_ * f, std::move(v));
    }

    /// The same function at the lowest level that represents it exactly.
    GridFunction coarsened() const {
        GridFunction g = *this;
        while (g.level_ > 0) {
            const std::int64_t N = g.scale_;
            const std::int64_t s = detail::floor_div64(g.start_, N) * N;
            const std::int64_t e = detail::floor_div64(g.start_ + static_cast<std::int64_t>(g.values_.size()) + N - 1, N) * N;
            std::vector<cplx> merged;
            merged.reserve(static_cast<std::size_t>((e - s) / N));
            bool ok = true;
            for (std::int64_t t = s; t < e && ok; t += N) {
                const cplx v = g.cell(t);
                for (std::int64_t r = 1; r < N; ++r)
                    if (g.cell(t + r) != v) { ok = false; break; }
                merged.push_back(v);
            }
            if (!ok) break;
            g = GridFunction(g.scale_, g.level_ - 1, s / N, std::move(merged));
        }
        return g;
    }

    cplx integral() const {
        cplx s{0.0};
        for (const auto& v : values_) s += v;
        return s * cell_width();
    }

    double sup_norm() const {
        double m = 0.0;
        for (const auto& v : values_) m = std::max(m, std::abs(v));
        return m;
    }

    double l2_norm() const {
        double s = 0.0;
        for (const auto& v : values_) s += std::norm(v);
        return std::sqrt(s * cell_width());
    }

    GridFunction scaled(cplx s) const {
        std::vector<cplx> v = values_;
        for (auto& a : v) a *= s;
        return GridFunction(scale_, level_, start_, std::move(v));
    }

    /// CSV rows x,re,im (left cell endpoints).
    void write_csv(std::ostream& os) const {
        os << "x,re,im\n";
        for (std::size_t i = 0; i < values_.size(); ++i) {
            os << format_number(x_of(start_ + static_cast<std::int64_t>(i))) << ',' << format_number(values_[i].real())
               << ',' << format_number(values_[i].imag()) << '\n';
        }
    }

private:
    void trim() {
        std::size_t first = 0;
        while (first < values_.size() && values_[first] == cplx{0.0}) ++first;
        if (first == values_.size()) {
            values_.clear();
            start_ = 0;
            return;
        }
        std::size_t last = values_.size();
        while (values_[last - 1] == cplx{0.0}) --last;
        values_ = std::vector<cplx>(values_.begin() + static_cast<std::ptrdiff_t>(first),
                                    values_.begin() + static_cast<std::ptrdiff_t>(last));
        start_ += static_cast<std::int64_t>(first);
    }

    int scale_;
    int level_;
    std::int64_t start_;
    std::vector<cplx> values_;
};

/// max |f - g| after refining both to the finer level.
inline double sup_distance(const GridFunction& f, const GridFunction& g) {
    if (f.scale() != g.scale()) throw ContractError("grid functions have different scales");
    const int level = std::max(f.level(), g.level());
    const GridFunction a = f.refined(level);
    const GridFunction b = g.refined(level);
    if (a.empty() && b.empty()) return 0.0;
    std::int64_t lo = a.empty() ? b.start() : a.start();
    std::int64_t hi = a.empty() ? b.start() : a.start() + static_cast<std::int64_t>(a.values().size());
    if (!b.empty()) {
        lo = std::min(lo, b.start());
        hi = std::max(hi, b.start() + static_cast<std::int64_t>(b.values().size()));
    }
    double d = 0.0;
    for (std::int64_t t = lo; t < hi; ++t) d = std::max(d, std::abs(a.cell(t) - b.cell(t)));
    return d;
}

// ---------------------------------------------------------------------------

inline GridFunction cascade_step(const FilterSpec& filter, const GridFunction& phi) {
    const int N = filter.scale;
    if (phi.scale() != N) throw ContractError("grid scale differs from the filter scale");
    if (phi.empty() || filter.m0.is_zero()) return GridFunction::zero(N, phi.level() + 1);
    const std::int64_t per = phi.cells_per_unit();
    const std::int64_t s = phi.start();
    const std::int64_t L = static_cast<std::int64_t>(phi.values().size());
    const int klo = filter.m0.lo();
    const int khi = filter.m0.hi();
    const std::int64_t out_lo = s + klo * per;
    const std::int64_t out_hi = s + L - 1 + khi * per;
    const double root = std::sqrt(static_cast<double>(N));
    // On the output cell t (level j+1), N x - k runs over the level-j cell t - k N^j.
    std::vector<cplx> v(static_cast<std::size_t>(out_hi - out_lo + 1));
    for (std::int64_t t = out_lo; t <= out_hi; ++t) {
        cplx acc{0.0};
        for (int k = klo; k <= khi; ++k) {
            const cplx a = filter.m0[k];
            if (a == cplx{0.0}) continue;
            acc += a * phi.cell(t - k * per);
        }
        v[static_cast<std::size_t>(t - out_lo)] = root * acc;
    }
    return GridFunction(N, phi.level() + 1, out_lo, std::move(v));
}

/// sup |phi - M phi| on the common refined grid.
inline double refinement_residual(const FilterSpec& filter, const GridFunction& phi) {
    return sup_distance(phi, cascade_step(filter, phi));
}

struct CascadeRun {
    GridFunction phi;
    int iterations = 0;
    bool diverged = false;
    bool level_capped = false;
};

inline constexpr int kCascadeMaxLevel = 20;
inline constexpr double kCascadeDivergence = 1e6;

/// Iterates M from `init`, rescaling to unit integral when the integral is
/// nonzero and dropping to the coarsest exact level after every step. Stops
/// early at level 20 or when the sup norm exceeds 1e6.
inline CascadeRun cascade_iterate(const FilterSpec& filter, const GridFunction& init, int iterations) {
    auto normalized = [](const GridFunction& g) {
        const cplx I = g.integral();
        return std::abs(I) > 1e-12 ? g.scaled(1.0 / I) : g;
    };
    CascadeRun run{normalized(init).coarsened(), 0, false, false};
    for (int i = 0; i < iterations; ++i) {
        if (run.phi.level() >= kCascadeMaxLevel) {
            run.level_capped = true;
            break;
        }
        GridFunction next = normalized(cascade_step(filter, run.phi)).coarsened();
        run.phi = std::move(next);
        ++run.iterations;
        if (run.phi.sup_norm() > kCascadeDivergence) {
            run.diverged = true;
            break;
        }
    }
    return run;
}

// ---------------------------------------------------------------------------

/// H(phi, psi)(z) = sum_n z^n <pi(e_n) phi, psi> with pi(e_n) phi = phi(. - n)
/// and the inner product conjugate-linear in the first slot:
///     H_n = int conj(phi(x - n)) psi(x) dx.
/// For real-valued inputs this is int phi(x - n) conj(psi(x)) dx.
inline LaurentPoly correlation_density(const GridFunction& phi, const GridFunction& psi) {
    if (phi.scale() != psi.scale()) throw ContractError("grid functions have different scales");
    if (phi.empty() || psi.empty()) return LaurentPoly{};
    const int level = std::max(phi.level(), psi.level());
    const GridFunction a = phi.refined(level);
    const GridFunction b = psi.refined(level);
    const std::int64_t per = a.cells_per_unit();
    const std::int64_t la = static_cast<std::int64_t>(a.values().size());
    const std::int64_t lb = static_cast<std::int64_t>(b.values().size());
    // phi(. - n) occupies cells [sa + n per, sa + la + n per)
    const std::int64_t nlo = -detail::floor_div64(a.start() + la - 1 - b.start(), per);
    const std::int64_t nhi = detail::floor_div64(b.start() + lb - 1 - a.start(), per);
    std::vector<cplx> c(static_cast<std::size_t>(nhi - nlo + 1));
    for (std::int64_t n = nlo; n <= nhi; ++n) {
        cplx acc{0.0};
        const std::int64_t lo = std::max(b.start(), a.start() + n * per);
        const std::int64_t hi = std::min(b.start() + lb, a.start() + la + n * per);
        for (std::int64_t t = lo; t < hi; ++t) acc += std::conj(a.cell(t - n * per)) * b.cell(t);
        c[static_cast<std::size_t>(n - nlo)] = acc / static_cast<double>(per);
    }
    return LaurentPoly(static_cast<int>(nlo), std::move(c));
}

/// max over coefficients of |R(H(phi, psi)) - H(M phi, M psi)|.
inline double transfer_intertwine_residual(const FilterSpec& filter, const GridFunction& phi,
                                           const GridFunction& psi) {
    const LaurentPoly lhs = apply_ruelle(filter, correlation_density(phi, psi));
    const LaurentPoly rhs = correlation_density(cascade_step(filter, phi), cascade_step(filter, psi));
    return max_coeff_diff(lhs, rhs);
}

// ---------------------------------------------------------------------------

struct MallatPartial {
    std::vector<double> omega;
    std::vector<cplx> values;
    double norm_squared = 0.0;
    double norm = 0.0;
};

/// F_n(omega) = chi_[-pi,pi)(omega/N^n) h(omega/N^n)^{1/2} prod_{k=1}^n m0(omega/N^k)/sqrt(N)
/// sampled at `points_per_band` points per 2 pi band on [-pi N^n, pi N^n).
/// |F_n|^2 without the cutoff is 2 pi N^n periodic, so the one-period
/// trapezoid rule (equal weights) gives the (1/2pi) normalized norm.
inline MallatPartial mallat_partial(const FilterSpec& filter, const std::optional<LaurentPoly>& h, int n,
                                    int points_per_band = 4096, bool keep_samples = false) {
    if (n < 1) throw ContractError("mallat_partial needs n >= 1");
    if (h && !is_real_nonneg(*h, 256, 1e-9)) throw ContractError("h must be nonnegative");
    const int N = filter.scale;
    const std::int64_t Nn = detail::ipow(N, n);
    const std::int64_t total = Nn * points_per_band;
    const double span = 2.0 * std::numbers::pi * static_cast<double>(Nn);
    const double step = span / static_cast<double>(total);
    const double root = std::sqrt(static_cast<double>(N));

    MallatPartial out;
    if (keep_samples) {
        out.omega.reserve(static_cast<std::size_t>(total));
        out.values.reserve(static_cast<std::size_t>(total));
    }
    double acc = 0.0;
    for (std::int64_t t = 0; t < total; ++t) {
        const double omega = -0.5 * span + step * static_cast<double>(t);
        cplx v = 1.0;
        double scale_k = static_cast<double>(N);
        for (int k = 1; k <= n; ++k) {
            v *= filter.m0(omega / scale_k) / root;
            scale_k *= N;
        }
        if (h) v *= std::sqrt(std::max(0.0, (*h)(omega / static_cast<double>(Nn)).real()));
        acc += std::norm(v);
        if (keep_samples) {
            out.omega.push_back(omega);
            out.values.push_back(v);
        }
    }
    out.norm_squared = acc * step / (2.0 * std::numbers::pi);
    out.norm = std::sqrt(out.norm_squared);
    return out;
}

}  // namespace ruelle
