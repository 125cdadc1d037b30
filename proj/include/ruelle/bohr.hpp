#pragma once

// Moment kernels on the N-adic rationals Z[1/N],
//
//     L(n / N^k) = int R^k(e_n h) dmu,   e_n(z) = z^n,
//
// which are well defined when R h = h, and the Gram matrices built from them.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ruelle/errors.hpp"
#include "ruelle/laurent.hpp"
#include "ruelle/linalg.hpp"
#include "ruelle/transfer.hpp"

namespace ruelle {

struct NadicRational {
    int N = 2;
    std::int64_t n = 0;
    int k = 0;

    double value() const noexcept { return static_cast<double>(n) / std::pow(static_cast<double>(N), k); }
    friend bool operator==(const NadicRational&, const NadicRational&) = default;
};

/// Removes common factors of N so that k = 0 or N does not divide n.
inline NadicRational canonicalize(std::int64_t n, int k, int N) {
    if (N < 2) throw ContractError("N must be >= 2");
    if (k < 0) throw ContractError("depth must be >= 0");
    if (n == 0) return {N, 0, 0};
    while (k > 0 && n % N == 0) {
        n /= N;
        --k;
    }
    return {N, n, k};
}

inline NadicRational canonicalize(const NadicRational& x) { return canonicalize(x.n, x.k, x.N); }

namespace detail {
inline std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_mul_overflow(a, b, &r)) throw ContractError("N-adic arithmetic overflow");
    return r;
}
inline std::int64_t checked_pow(std::int64_t base, int e) {
    std::int64_t r = 1;
    for (int i = 0; i < e; ++i) r = checked_mul(r, base);
    return r;
}
}  // namespace detail

inline NadicRational operator-(const NadicRational& x, const NadicRational& y) {
    if (x.N != y.N) throw ContractError("mismatched scales");
    const int K = std::max(x.k, y.k);
    const std::int64_t a = detail::checked_mul(x.n, detail::checked_pow(x.N, K - x.k));
    const std::int64_t b = detail::checked_mul(y.n, detail::checked_pow(y.N, K - y.k));
    return canonicalize(a - b, K, x.N);
}

inline NadicRational operator-(const NadicRational& x) { return canonicalize(-x.n, x.k, x.N); }

/// {n / N^k : |n| <= nmax, 0 <= k <= kmax}, canonical and without repeats,
/// ordered by value.
inline std::vector<NadicRational> nadic_grid(int N, int nmax, int kmax) {
    std::vector<NadicRational> out;
    for (int k = 0; k <= kmax; ++k)
        for (int n = -nmax; n <= nmax; ++n) {
            const NadicRational r = canonicalize(n, k, N);
            if (std::find(out.begin(), out.end(), r) == out.end()) out.push_back(r);
        }
    std::sort(out.begin(), out.end(), [](const NadicRational& a, const NadicRational& b) { return a.value() < b.value(); });
    return out;
}

class MomentKernel {
public:
    MomentKernel(FilterSpec filter, LaurentPoly h) : filter_(std::move(filter)), h_(std::move(h)) {
        if (filter_.m0.is_zero()) throw ContractError("filter must be nonzero");
        if (harmonic_residual(filter_, h_) > kTauEig) throw ContractError("h is not harmonic, the kernel is not well defined");
    }

    MomentKernel(const MomentKernel& other) : filter_(other.filter_), h_(other.h_) {
        std::lock_guard lock(other.mutex_);
        cache_ = other.cache_;
    }
    MomentKernel& operator=(const MomentKernel&) = delete;

    const FilterSpec& filter() const noexcept { return filter_; }
    const LaurentPoly& density() const noexcept { return h_; }

    cplx operator()(const NadicRational& lambda) const { return value(lambda); }

    cplx value(const NadicRational& lambda) const {
        if (lambda.N != filter_.scale) throw ContractError("N-adic scale differs from the filter scale");
        const NadicRational c = canonicalize(lambda);
        const std::pair key{c.n, c.k};
        {
            std::lock_guard lock(mutex_);
            if (auto it = cache_.find(key); it != cache_.end()) return it->second;
        }
        const cplx v = raw_value(c.n, c.k);
        std::lock_guard lock(mutex_);
        cache_[key] = v;
        return v;
    }

    /// int R^k(e_n h) dmu evaluated at the given representative, uncached.
    cplx raw_value(std::int64_t n, int k) const {
        if (k < 0) throw ContractError("depth must be >= 0");
        if (n < std::numeric_limits<int>::min() || n > std::numeric_limits<int>::max())
            throw ContractError("numerator out of range");
        const LaurentPoly f = mul(LaurentPoly::monomial(static_cast<int>(n), 1.0), h_);
        return integral_T(apply_ruelle_power(filter_, f, k));
    }

    std::size_t cache_size() const {
        std::lock_guard lock(mutex_);
        return cache_.size();
    }

private:
    FilterSpec filter_;
    LaurentPoly h_;
    mutable std::mutex mutex_;
    mutable std::map<std::pair<std::int64_t, int>, cplx> cache_;
};

/// max over lambda = n/N^k in `lambdas` and j = 1..extra of
/// |L(lambda) - int R^{k+j}(e_{N^j n} h)|, the second term evaluated without
/// canonicalization.
inline double projective_consistency(const MomentKernel& K, const std::vector<NadicRational>& lambdas, int extra) {
    double worst = 0.0;
    const int N = K.filter().scale;
    for (const auto& l : lambdas) {
        const cplx ref = K(l);
        for (int j = 1; j <= extra; ++j) {
            const std::int64_t n = detail::checked_mul(l.n, detail::checked_pow(N, j));
            worst = std::max(worst, std::abs(K.raw_value(n, l.k + j) - ref));
        }
    }
    return worst;
}

struct PsdReport {
    Eigen::MatrixXcd gram;
    double min_eigenvalue = 0.0;
    double hermitian_discrepancy = 0.0;
    bool pass = false;
};

inline constexpr double kPsdTolerance = 1e-9;

namespace detail {
inline PsdReport finish_psd(Eigen::MatrixXcd G) {
    PsdReport rep;
    rep.hermitian_discrepancy = G.size() ? linalg::hermitian_discrepancy(G) : 0.0;
    rep.min_eigenvalue = G.size() ? linalg::min_hermitian_eigenvalue(G) : 0.0;
    rep.pass = rep.hermitian_discrepancy < kPsdTolerance && rep.min_eigenvalue >= -kPsdTolerance;
    rep.gram = std::move(G);
    return rep;
}
}  // namespace detail

/// G[i][j] = L(lambda_j - lambda_i) for any kernel callable on NadicRational.
template <class Kernel>
PsdReport psd_check(const Kernel& L, const std::vector<NadicRational>& lambdas) {
    const auto m = static_cast<Eigen::Index>(lambdas.size());
    Eigen::MatrixXcd G(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j)
            G(i, j) = L(lambdas[static_cast<std::size_t>(j)] - lambdas[static_cast<std::size_t>(i)]);
    return detail::finish_psd(std::move(G));
}

/// The kernel of Haar measure on the compact dual: 1 at 0, else 0.
inline cplx delta_kernel(const NadicRational& lambda) { return canonicalize(lambda).n == 0 ? 1.0 : 0.0; }

struct GnsIndex {
    int n = 0;  // power of the dilation
    int j = 0;  // frequency of the multiplier e_j
};

/// Gram matrix of the vectors U^{-n} pi(e_j) phi, computed from h alone.
/// Entry (a, b) with d = n_b - n_a >= 0 is int e_{j_b} conj(e_{j_a}(z^{N^d})) conj(m^{(d)}) h dmu,
/// and the other half follows by conjugate symmetry of the derivation.
inline PsdReport gns_gram(const FilterSpec& filter, const LaurentPoly& h, const std::vector<GnsIndex>& index) {
    if (harmonic_residual(filter, h) > kTauEig) throw ContractError("h is not harmonic");
    const int N = filter.scale;
    const auto m = static_cast<Eigen::Index>(index.size());
    int dmax = 0;
    for (const auto& a : index)
        for (const auto& b : index) dmax = std::max(dmax, std::abs(a.n - b.n));
    std::vector<LaurentPoly> mh, conj_mh;  // m^{(d)} h and conj(m^{(d)}) h
    for (int d = 0; d <= dmax; ++d) {
        const LaurentPoly md = filter_power(filter, d);
        mh.push_back(mul(md, h));
        conj_mh.push_back(mul(conj_reflect(md), h));
    }
    Eigen::MatrixXcd G(m, m);
    for (Eigen::Index a = 0; a < m; ++a) {
        for (Eigen::Index b = 0; b < m; ++b) {
            const GnsIndex& x = index[static_cast<std::size_t>(a)];
            const GnsIndex& y = index[static_cast<std::size_t>(b)];
            if (y.n >= x.n) {
                const int d = y.n - x.n;
                const long long s = y.j - static_cast<long long>(x.j) * detail::checked_pow(N, d);
                G(a, b) = conj_mh[static_cast<std::size_t>(d)][static_cast<int>(-s)];
            } else {
                const int d = x.n - y.n;
                const long long s = -x.j + static_cast<long long>(y.j) * detail::checked_pow(N, d);
                G(a, b) = mh[static_cast<std::size_t>(d)][static_cast<int>(-s)];
            }
        }
    }
    PsdReport rep = detail::finish_psd(std::move(G));
    if (rep.hermitian_discrepancy > kPsdTolerance)
        throw std::logic_error("Gram case split is inconsistent (Hermitian discrepancy)");
    return rep;
}

inline std::vector<GnsIndex> default_gns_index(int nmax = 3, int jmax = 3) {
    std::vector<GnsIndex> out;
    for (int n = 0; n <= nmax; ++n)
        for (int j = -jmax; j <= jmax; ++j) out.push_back({n, j});
    return out;
}

struct KeaneSpecialization {
    cplx keane_value;      // N^{n/2} int f sqrt(g^{(n)}) h, g = |m0|^2 / N
    cplx abs_moment;       // int f |m^{(n)}| h
    cplx complex_moment;   // int f m^{(n)} h
    double agreement = 0.0;           // |keane_value - abs_moment|
    double phase_discrepancy = 0.0;   // |keane_value - complex_moment|
};

/// Compares the nonnegative-weight state formula with the filter moments on a
/// uniform grid of `points_per_band * N^n` points.
inline KeaneSpecialization keane_specialization(const FilterSpec& filter, const LaurentPoly& h, int n,
                                                const LaurentPoly& f, int points_per_band = 4096) {
    if (n < 0) throw ContractError("n must be >= 0");
    const int N = filter.scale;
    const auto M = static_cast<std::int64_t>(points_per_band) * detail::checked_pow(N, n);
    const LaurentPoly mn = filter_power(filter, n);
    KeaneSpecialization out;
    cplx kv{}, av{};
    for (std::int64_t t = 0; t < M; ++t) {
        const double w = 2.0 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(M);
        double gn = 1.0;
        double wi = w;
        for (int i = 0; i < n; ++i) {
            gn *= std::norm(filter.m0(wi)) / N;
            wi = std::fmod(wi * N, 2.0 * std::numbers::pi);
        }
        const cplx fh = f(w) * h(w);
        kv += std::pow(static_cast<double>(N), 0.5 * n) * std::sqrt(gn) * fh;
        av += std::abs(mn(w)) * fh;
    }
    out.keane_value = kv / static_cast<double>(M);
    out.abs_moment = av / static_cast<double>(M);
    out.complex_moment = moment(filter, h, 0, n, f);
    out.agreement = std::abs(out.keane_value - out.abs_moment);
    out.phase_discrepancy = std::abs(out.keane_value - out.complex_moment);
    return out;
}

}  // namespace ruelle
