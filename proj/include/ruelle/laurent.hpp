#pragma once

// Two-sided trigonometric polynomials on the circle.
//
// A LaurentPoly holds the coefficients a_lo, ..., a_hi of
//
//     f(z) = sum_k a_k z^k,   z = e^{-i omega}.
//
// The z = e^{-i omega} convention is used throughout the library. All values
// are immutable after construction and every operation is a pure function.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ruelle/errors.hpp"

namespace ruelle {

using cplx = std::complex<double>;

inline constexpr double kTrimTolerance = 1e-14;

class LaurentPoly {
public:
    LaurentPoly() : lo_(0), coeffs_{cplx{0.0}} {}

    LaurentPoly(int lo, std::vector<cplx> coeffs) : lo_(lo), coeffs_(std::move(coeffs)) {
        normalize();
    }

    static LaurentPoly constant(cplx a) { return LaurentPoly(0, {a}); }
    static LaurentPoly monomial(int k, cplx a = 1.0) { return LaurentPoly(k, {a}); }

    /// Real coefficients for exponents lo, lo+1, ...
    static LaurentPoly from_real(int lo, const std::vector<double>& coeffs) {
        std::vector<cplx> c(coeffs.begin(), coeffs.end());
        return LaurentPoly(lo, std::move(c));
    }

    int lo() const noexcept { return lo_; }
    int hi() const noexcept { return lo_ + static_cast<int>(coeffs_.size()) - 1; }
    std::size_t size() const noexcept { return coeffs_.size(); }
    const std::vector<cplx>& coeffs() const noexcept { return coeffs_; }

    bool is_zero() const noexcept { return coeffs_.size() == 1 && coeffs_[0] == cplx{0.0}; }

    /// Coefficient of z^k (zero outside the stored range).
    cplx operator[](int k) const noexcept {
        if (k < lo_ || k > hi()) return cplx{0.0};
        return coeffs_[static_cast<std::size_t>(k - lo_)];
    }

    /// f(e^{-i omega}).
    cplx operator()(double omega) const {
        cplx sum{0.0};
        for (std::size_t t = 0; t < coeffs_.size(); ++t) {
            const double k = static_cast<double>(lo_ + static_cast<int>(t));
            sum += coeffs_[t] * std::polar(1.0, -omega * k);
        }
        return sum;
    }

    /// f(z) for an arbitrary nonzero complex z.
    cplx at(cplx z) const {
        cplx sum{0.0};
        cplx zk = lo_ >= 0 ? std::pow(z, lo_) : std::pow(1.0 / z, -lo_);
        for (const auto& a : coeffs_) {
            sum += a * zk;
            zk *= z;
        }
        return sum;
    }

    friend bool operator==(const LaurentPoly& f, const LaurentPoly& g) {
        return f.lo_ == g.lo_ && f.coeffs_ == g.coeffs_;
    }

private:
    void normalize() {
        auto small = [](const cplx& a) { return std::abs(a) <= kTrimTolerance; };
        std::size_t first = 0;
        while (first < coeffs_.size() && small(coeffs_[first])) ++first;
        if (first == coeffs_.size()) {
            lo_ = 0;
            coeffs_.assign(1, cplx{0.0});
            return;
        }
        std::size_t last = coeffs_.size();
        while (small(coeffs_[last - 1])) --last;
        coeffs_ = std::vector<cplx>(coeffs_.begin() + static_cast<std::ptrdiff_t>(first),
                                    coeffs_.begin() + static_cast<std::ptrdiff_t>(last));
        lo_ += static_cast<int>(first);
    }

    int lo_;
    std::vector<cplx> coeffs_;
};

/// A filter m0 together with its scale N. The certification flags are only
/// set by certify() in transfer.hpp after the corresponding checks pass.
struct FilterSpec {
    int scale = 2;
    LaurentPoly m0;
    bool quadrature = false;
    bool lowpass = false;
};

inline FilterSpec make_filter(int scale, LaurentPoly m0) {
    if (scale < 2) throw ContractError("filter scale must be >= 2, got " + std::to_string(scale));
    return FilterSpec{scale, std::move(m0), false, false};
}

// ---------------------------------------------------------------------------
// Arithmetic

inline LaurentPoly add(const LaurentPoly& f, const LaurentPoly& g) {
    const int lo = std::min(f.lo(), g.lo());
    const int hi = std::max(f.hi(), g.hi());
    std::vector<cplx> c(static_cast<std::size_t>(hi - lo + 1));
    for (int k = lo; k <= hi; ++k) c[static_cast<std::size_t>(k - lo)] = f[k] + g[k];
    return LaurentPoly(lo, std::move(c));
}

inline LaurentPoly scale(const LaurentPoly& f, cplx s) {
    std::vector<cplx> c = f.coeffs();
    for (auto& a : c) a *= s;
    return LaurentPoly(f.lo(), std::move(c));
}

inline LaurentPoly sub(const LaurentPoly& f, const LaurentPoly& g) { return add(f, scale(g, -1.0)); }

inline LaurentPoly mul(const LaurentPoly& f, const LaurentPoly& g) {
    if (f.is_zero() || g.is_zero()) return LaurentPoly{};
    const auto& a = f.coeffs();
    const auto& b = g.coeffs();
    std::vector<cplx> c(a.size() + b.size() - 1);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
    return LaurentPoly(f.lo() + g.lo(), std::move(c));
}

inline LaurentPoly operator+(const LaurentPoly& f, const LaurentPoly& g) { return add(f, g); }
inline LaurentPoly operator-(const LaurentPoly& f, const LaurentPoly& g) { return sub(f, g); }
inline LaurentPoly operator*(const LaurentPoly& f, const LaurentPoly& g) { return mul(f, g); }
inline LaurentPoly operator*(cplx s, const LaurentPoly& f) { return scale(f, s); }

/// g(z) = conj(f(z)) on |z| = 1, i.e. g_k = conj(f_{-k}).
inline LaurentPoly conj_reflect(const LaurentPoly& f) {
    const auto& a = f.coeffs();
    std::vector<cplx> c(a.size());
    for (std::size_t t = 0; t < a.size(); ++t) c[a.size() - 1 - t] = std::conj(a[t]);
    return LaurentPoly(-f.hi(), std::move(c));
}

/// |m(z)|^2 as a trigonometric polynomial.
inline LaurentPoly autocorrelation(const LaurentPoly& m) { return mul(m, conj_reflect(m)); }

/// f(z^p).
inline LaurentPoly compose_power(const LaurentPoly& f, int p) {
    if (p < 1) throw ContractError("compose_power needs p >= 1");
    if (p == 1 || f.is_zero()) return f;
    const auto& a = f.coeffs();
    std::vector<cplx> c((a.size() - 1) * static_cast<std::size_t>(p) + 1);
    for (std::size_t t = 0; t < a.size(); ++t) c[t * static_cast<std::size_t>(p)] = a[t];
    return LaurentPoly(f.lo() * p, std::move(c));
}

namespace detail {
inline int floor_div(int a, int b) {
    int q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}
inline int ceil_div(int a, int b) { return -floor_div(-a, b); }
}  // namespace detail

/// g_n = f_{Nn}; equals (1/N) sum_{w^N = z} f(w).
inline LaurentPoly downsample_average(const LaurentPoly& f, int N) {
    if (N < 2) throw ContractError("downsample_average needs N >= 2");
    const int lo = detail::ceil_div(f.lo(), N);
    const int hi = detail::floor_div(f.hi(), N);
    if (lo > hi) return LaurentPoly{};
    std::vector<cplx> c(static_cast<std::size_t>(hi - lo + 1));
    for (int n = lo; n <= hi; ++n) c[static_cast<std::size_t>(n - lo)] = f[N * n];
    return LaurentPoly(lo, std::move(c));
}

/// g(z) = f(rho^j z) with rho = e^{i 2 pi / p}: g_n = f_n e^{i 2 pi j n / p}.
inline LaurentPoly rotate(const LaurentPoly& f, int j, int p) {
    if (p < 1) throw ContractError("rotate needs p >= 1");
    const auto& a = f.coeffs();
    std::vector<cplx> c(a.size());
    for (std::size_t t = 0; t < a.size(); ++t) {
        const long long n = f.lo() + static_cast<long long>(t);
        // reduce j*n mod p first so that rotate(f, p, p) is exactly f
        long long r = (static_cast<long long>(j) * n) % p;
        if (r < 0) r += p;
        c[t] = r == 0 ? a[t] : a[t] * std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(r) / p);
    }
    return LaurentPoly(f.lo(), std::move(c));
}

inline cplx eval(const LaurentPoly& f, double omega) { return f(omega); }

/// Normalized Haar integral over the circle: the constant coefficient.
inline cplx integral_T(const LaurentPoly& f) { return f[0]; }

/// Euclidean norm of the coefficient vector (= L^2(T) norm by Parseval).
inline double l2_norm(const LaurentPoly& f) {
    double s = 0.0;
    for (const auto& a : f.coeffs()) s += std::norm(a);
    return std::sqrt(s);
}

/// max_k |f_k - g_k|
inline double max_coeff_diff(const LaurentPoly& f, const LaurentPoly& g) {
    const int lo = std::min(f.lo(), g.lo());
    const int hi = std::max(f.hi(), g.hi());
    double d = 0.0;
    for (int k = lo; k <= hi; ++k) d = std::max(d, std::abs(f[k] - g[k]));
    return d;
}

inline bool is_hermitian(const LaurentPoly& f, double tol = 1e-12) {
    const int K = std::max(-f.lo(), f.hi());
    for (int k = 0; k <= K; ++k)
        if (std::abs(f[k] - std::conj(f[-k])) > tol) return false;
    return true;
}

/// Hermitian coefficients and min over a uniform grid >= -tol.
inline bool is_real_nonneg(const LaurentPoly& f, int grid_size = 256, double tol = 1e-12) {
    if (grid_size < 1) throw ContractError("grid_size must be >= 1");
    if (!is_hermitian(f, std::max(tol, 1e-12))) return false;
    for (int t = 0; t < grid_size; ++t) {
        const double omega = 2.0 * std::numbers::pi * t / grid_size;
        if (f(omega).real() < -tol) return false;
    }
    return true;
}

/// Coefficient vector on the window [-K, K].
inline std::vector<cplx> window_coeffs(const LaurentPoly& f, int K) {
    std::vector<cplx> v(static_cast<std::size_t>(2 * K + 1));
    for (int n = -K; n <= K; ++n) v[static_cast<std::size_t>(n + K)] = f[n];
    return v;
}

inline LaurentPoly from_window(const std::vector<cplx>& v, int K) { return LaurentPoly(-K, v); }

}  // namespace ruelle
