#pragma once

// Scale-N versus scale-p duality for an upsampled filter m_p(z) = m0(z^p),
// gcd(N, p) = 1.
//
// If R_p f = f, the rotation components
//     F_k(z) = (1/p) sum_j e^{-i 2 pi j k / p} f(rho^j z) = z^k H_k(z^p)
// are intertwined by the base operator R_0. With k taken as an integer (not
// reduced mod p) the components satisfy H_{k+p}(u) = u^{-1} H_k(u), and the
// coefficientwise identity is R_0(H_{N k}) = H_k.

#include <algorithm>
#include <numeric>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ruelle/errors.hpp"
#include "ruelle/laurent.hpp"
#include "ruelle/linalg.hpp"
#include "ruelle/transfer.hpp"

namespace ruelle {

struct OrbitDecomposition {
    int N = 2;
    int p = 1;
    std::vector<std::vector<int>> orbits;  // cycles of j -> N j mod p
    std::vector<int> periods;
};

namespace detail {
inline void require_coprime(int N, int p) {
    if (p < 1) throw ContractError("p must be >= 1");
    if (std::gcd(N, p) != 1) throw ContractError("N and p must be coprime");
}
inline int mod(long long a, int p) {
    long long r = a % p;
    return static_cast<int>(r < 0 ? r + p : r);
}
}  // namespace detail

/// Cycles of j -> N j on Z_p, each started at the smallest unvisited j.
inline OrbitDecomposition orbits(int N, int p) {
    detail::require_coprime(N, p);
    OrbitDecomposition out{N, p, {}, {}};
    std::vector<char> seen(static_cast<std::size_t>(p), 0);
    for (int j = 0; j < p; ++j) {
        if (seen[static_cast<std::size_t>(j)]) continue;
        std::vector<int> cycle;
        int x = j;
        while (!seen[static_cast<std::size_t>(x)]) {
            seen[static_cast<std::size_t>(x)] = 1;
            cycle.push_back(x);
            x = detail::mod(static_cast<long long>(N) * x, p);
        }
        out.periods.push_back(static_cast<int>(cycle.size()));
        out.orbits.push_back(std::move(cycle));
    }
    return out;
}

inline int orbit_period(int N, int p, int j) {
    detail::require_coprime(N, p);
    const int start = detail::mod(j, p);
    int x = start;
    int len = 0;
    do {
        x = detail::mod(static_cast<long long>(N) * x, p);
        ++len;
    } while (x != start);
    return len;
}

struct Symmetrized {
    LaurentPoly F;  // exponents of f congruent to k mod p
    LaurentPoly H;  // H_m = f_{k + p m}
};

inline Symmetrized symmetrize(const LaurentPoly& f, int p, int k) {
    if (p < 1) throw ContractError("p must be >= 1");
    const int r = detail::mod(k, p);
    std::vector<cplx> fc(f.size());
    for (int n = f.lo(); n <= f.hi(); ++n)
        if (detail::mod(n, p) == r) fc[static_cast<std::size_t>(n - f.lo())] = f[n];
    LaurentPoly F(f.lo(), std::move(fc));

    // m ranges over k + p m in [lo, hi]
    const int mlo = detail::ceil_div(f.lo() - k, p);
    const int mhi = detail::floor_div(f.hi() - k, p);
    if (mlo > mhi) return {std::move(F), LaurentPoly{}};
    std::vector<cplx> hc(static_cast<std::size_t>(mhi - mlo + 1));
    for (int m = mlo; m <= mhi; ++m) hc[static_cast<std::size_t>(m - mlo)] = f[k + p * m];
    return {std::move(F), LaurentPoly(mlo, std::move(hc))};
}

struct IntertwineReport {
    double twisted = 0.0;  // || R_0(H_{N k}) - H_k ||, integer indices
    double literal = 0.0;  // || R_0(H_k) - H_{N^{-1} k mod p} ||, indices mod p, no twist
};

/// `base` is the scale-N filter m0; f must be fixed by the filter m0(z^p).
inline IntertwineReport intertwine_residual(const FilterSpec& base, const LaurentPoly& f, int p, int k) {
    const int N = base.scale;
    detail::require_coprime(N, p);
    const FilterSpec up = make_filter(N, compose_power(base.m0, p));
    if (harmonic_residual(up, f) > kTauEig) throw ContractError("f is not a fixed vector of the upsampled filter");

    IntertwineReport rep;
    const LaurentPoly Hk = symmetrize(f, p, k).H;
    rep.twisted = max_coeff_diff(apply_ruelle(base, symmetrize(f, p, N * k).H), Hk);

    // alpha_N^{-1}(k): the j with N j = k mod p
    int inv = 0;
    for (int j = 0; j < p; ++j)
        if (detail::mod(static_cast<long long>(N) * j, p) == detail::mod(k, p)) inv = j;
    rep.literal = max_coeff_diff(apply_ruelle(base, symmetrize(f, p, detail::mod(k, p)).H), symmetrize(f, p, inv).H);
    return rep;
}

namespace detail {
inline Eigen::MatrixXcd stack_window(const std::vector<LaurentPoly>& vs, int K) {
    Eigen::MatrixXcd M(2 * K + 1, static_cast<Eigen::Index>(vs.size()));
    for (std::size_t j = 0; j < vs.size(); ++j) {
        const auto w = window_coeffs(vs[j], K);
        for (int i = 0; i < 2 * K + 1; ++i) M(i, static_cast<Eigen::Index>(j)) = w[static_cast<std::size_t>(i)];
    }
    return M;
}
inline int common_window(const std::vector<LaurentPoly>& a, const std::vector<LaurentPoly>& b) {
    int K = 0;
    for (const auto* vs : {&a, &b})
        for (const auto& v : *vs) K = std::max({K, -v.lo(), v.hi()});
    return K;
}
}  // namespace detail

struct ReciprocityReport {
    bool holds = false;
    double residual = 0.0;  // worst mutual projection residual
    int base_dimension = 0;
    int upsampled_dimension = 0;
    int invariant_dimension = 0;
};

/// The rotation-invariant part of the fixed space of m0(z^p) equals
/// {h(z^p) : R_0 h = h}.
inline ReciprocityReport reciprocity_check(const FilterSpec& base, int p) {
    detail::require_coprime(base.scale, p);
    const FilterSpec up = make_filter(base.scale, compose_power(base.m0, p));
    const EigenReport base_fix = fixed_space(base);
    const EigenReport up_fix = fixed_space(up);

    std::vector<LaurentPoly> invariant, lifted;
    for (const auto& v : up_fix.basis) invariant.push_back(symmetrize(v, p, 0).F);
    for (const auto& h : base_fix.basis) lifted.push_back(compose_power(h, p));

    const int K = detail::common_window(invariant, lifted);
    const Eigen::MatrixXcd A = linalg::orthonormal_span(detail::stack_window(invariant, K), 1e-8);
    const Eigen::MatrixXcd B = linalg::orthonormal_span(detail::stack_window(lifted, K), 1e-8);

    ReciprocityReport rep;
    rep.base_dimension = base_fix.dimension;
    rep.upsampled_dimension = up_fix.dimension;
    rep.invariant_dimension = static_cast<int>(A.cols());
    for (Eigen::Index j = 0; j < A.cols(); ++j)
        rep.residual = std::max(rep.residual, linalg::projection_residual(B, A.col(j)));
    for (Eigen::Index j = 0; j < B.cols(); ++j)
        rep.residual = std::max(rep.residual, linalg::projection_residual(A, B.col(j)));
    rep.holds = A.cols() == B.cols() && rep.residual < 1e-8;
    return rep;
}

struct DimensionCount {
    int dimension = 0;
    int orbit_count = 0;
    bool base_pure = false;
    bool equal = false;  // only meaningful when base_pure
};

inline DimensionCount dimension_vs_orbits(const FilterSpec& base, int p) {
    detail::require_coprime(base.scale, p);
    DimensionCount out;
    out.orbit_count = static_cast<int>(orbits(base.scale, p).orbits.size());
    out.base_pure = fixed_space(base).pure;
    out.dimension = fixed_space(make_filter(base.scale, compose_power(base.m0, p))).dimension;
    out.equal = out.base_pure && out.dimension == out.orbit_count;
    return out;
}

}  // namespace ruelle
