#pragma once

// Small dense linear-algebra helpers on top of Eigen: kernels, orthonormal
// spans, and the real embedding of Hermitian coefficient windows.

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

namespace ruelle::linalg {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

/// Orthonormal basis (columns) of ker A. Singular values <= rel_tol * sigma_max
/// count as zero; a zero matrix has the whole space as kernel.
inline MatrixXcd null_space(const MatrixXcd& A, double rel_tol) {
    Eigen::JacobiSVD<MatrixXcd> svd(A, Eigen::ComputeFullV);
    const VectorXd& s = svd.singularValues();
    const Eigen::Index n = A.cols();
    const double smax = s.size() > 0 ? s(0) : 0.0;
    Eigen::Index rank = 0;
    if (smax > 0.0) {
        for (Eigen::Index i = 0; i < s.size(); ++i)
            if (s(i) > rel_tol * smax) ++rank;
    }
    return svd.matrixV().rightCols(n - rank);
}

/// Orthonormal basis of span(columns of V), dropping directions whose
/// singular value is <= rel_tol * sigma_max.
inline MatrixXcd orthonormal_span(const MatrixXcd& V, double rel_tol = 1e-9) {
    if (V.cols() == 0) return MatrixXcd(V.rows(), 0);
    Eigen::JacobiSVD<MatrixXcd> svd(V, Eigen::ComputeThinU);
    const VectorXd& s = svd.singularValues();
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > rel_tol * std::max(s(0), 1e-300)) ++rank;
    if (s.size() == 0 || s(0) == 0.0) rank = 0;
    return svd.matrixU().leftCols(rank);
}

/// || v - Q Q^* v || for Q with orthonormal columns.
inline double projection_residual(const MatrixXcd& Q, const VectorXcd& v) {
    if (Q.cols() == 0) return v.norm();
    return (v - Q * (Q.adjoint() * v)).norm();
}

// A Hermitian window h(-n) = conj(h(n)), n in [-K, K], is a real vector space
// of dimension 2K+1. The embedding below is an isometry onto R^{2K+1}.
inline VectorXd hermitian_to_real(const VectorXcd& h, int K) {
    VectorXd x(2 * K + 1);
    x(0) = h(K).real();
    for (int n = 1; n <= K; ++n) {
        x(2 * n - 1) = std::sqrt(2.0) * h(K + n).real();
        x(2 * n) = std::sqrt(2.0) * h(K + n).imag();
    }
    return x;
}

inline VectorXcd real_to_hermitian(const VectorXd& x, int K) {
    VectorXcd h(2 * K + 1);
    h(K) = x(0);
    for (int n = 1; n <= K; ++n) {
        const std::complex<double> a(x(2 * n - 1) / std::sqrt(2.0), x(2 * n) / std::sqrt(2.0));
        h(K + n) = a;
        h(K - n) = std::conj(a);
    }
    return h;
}

/// v*(n) = conj(v(-n)) on the window [-K, K].
inline VectorXcd reflect_conj(const VectorXcd& v) {
    const Eigen::Index m = v.size();
    VectorXcd r(m);
    for (Eigen::Index i = 0; i < m; ++i) r(i) = std::conj(v(m - 1 - i));
    return r;
}

/// Given a basis of a subspace closed under v -> v*, return an orthonormal
/// basis of the same complex span made of Hermitian vectors.
inline std::vector<VectorXcd> hermitian_basis(const MatrixXcd& basis, int K, double rel_tol = 1e-9) {
    const Eigen::Index cols = basis.cols();
    if (cols == 0) return {};
    MatrixXd cand(2 * K + 1, 2 * cols);
    const std::complex<double> i(0.0, 1.0);
    for (Eigen::Index c = 0; c < cols; ++c) {
        const VectorXcd v = basis.col(c);
        const VectorXcd vs = reflect_conj(v);
        cand.col(2 * c) = hermitian_to_real((v + vs) / 2.0, K);
        cand.col(2 * c + 1) = hermitian_to_real((v - vs) / (2.0 * i), K);
    }
    Eigen::JacobiSVD<MatrixXd> svd(cand, Eigen::ComputeThinU);
    const VectorXd& s = svd.singularValues();
    std::vector<VectorXcd> out;
    const double smax = s.size() > 0 ? s(0) : 0.0;
    for (Eigen::Index k = 0; k < s.size() && static_cast<Eigen::Index>(out.size()) < cols; ++k) {
        if (smax == 0.0 || s(k) <= rel_tol * smax) break;
        out.push_back(real_to_hermitian(svd.matrixU().col(k), K));
    }
    return out;
}

/// Smallest eigenvalue of the Hermitian part of G.
inline double min_hermitian_eigenvalue(const MatrixXcd& G) {
    if (G.rows() == 0) return 0.0;
    const MatrixXcd H = (G + G.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(H, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

inline double hermitian_discrepancy(const MatrixXcd& G) {
    if (G.rows() == 0) return 0.0;
    return (G - G.adjoint()).cwiseAbs().maxCoeff();
}

}  // namespace ruelle::linalg
