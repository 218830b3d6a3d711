#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "lsi/graphgen.hpp"
#include "lsi/rng.hpp"

namespace lsi {

/// Ordering used to pick the "top" k pairs of an indefinite matrix.
enum class EigenOrdering { Algebraic, MagnitudeThenSign };

struct EigenDecomposition {
    Eigen::VectorXd values;   // descending under the requested ordering
    Eigen::MatrixXd vectors;  // orthonormal columns matching values

    Eigen::Index rank() const { return values.size(); }
};

namespace detail {

inline EigenDecomposition select_pairs(const Eigen::VectorXd& vals_asc, const Eigen::MatrixXd& vecs,
                                       int k, EigenOrdering ordering) {
    const Eigen::Index n = vals_asc.size();
    std::vector<Eigen::Index> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    if (ordering == EigenOrdering::Algebraic) {
        std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return vals_asc[a] > vals_asc[b]; });
    } else {
        std::sort(idx.begin(), idx.end(), [&](auto a, auto b) {
            const double ma = std::abs(vals_asc[a]), mb = std::abs(vals_asc[b]);
            if (ma != mb) return ma > mb;
            return vals_asc[a] > vals_asc[b];
        });
    }
    EigenDecomposition out;
    out.values.resize(k);
    out.vectors.resize(vecs.rows(), k);
    for (int i = 0; i < k; ++i) {
        out.values[i] = vals_asc[idx[i]];
        out.vectors.col(i) = vecs.col(idx[i]);
    }
    return out;
}

}  // namespace detail

/// Top-k eigenpairs of a symmetric matrix (full dense decomposition).
inline EigenDecomposition symmetric_eigendecomposition(const Eigen::MatrixXd& M, int k,
                                                       EigenOrdering ordering = EigenOrdering::Algebraic) {
    if (M.rows() != M.cols()) throw std::invalid_argument("symmetric_eigendecomposition: matrix not square");
    if (k < 1 || k > M.rows()) throw std::invalid_argument("symmetric_eigendecomposition: bad k");
    const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
    if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw std::invalid_argument("symmetric_eigendecomposition: matrix not symmetric within 1e-10");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    if (es.info() != Eigen::Success) throw std::runtime_error("symmetric_eigendecomposition: no convergence");
    return detail::select_pairs(es.eigenvalues(), es.eigenvectors(), k, ordering);
}

/// Lanczos with full reorthogonalization for top-k pairs of a large sparse
/// operator. The start vector is derived from counter seed 0, so results are
/// deterministic for a fixed input regardless of threading.
inline EigenDecomposition lanczos_topk(const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& matvec,
                                       Eigen::Index n, int k,
                                       EigenOrdering ordering = EigenOrdering::Algebraic,
                                       double tol = 1e-10) {
    if (k < 1 || k > n) throw std::invalid_argument("lanczos_topk: bad k");
    Eigen::VectorXd v0(n);
    for (Eigen::Index i = 0; i < n; ++i) v0[i] = rng::uniform(0, static_cast<std::uint64_t>(i)) - 0.5;
    v0.normalize();

    Eigen::Index m = std::min<Eigen::Index>(n, std::max<Eigen::Index>(2 * k + 40, 80));
    for (;;) {
        Eigen::MatrixXd V(n, m + 1);
        Eigen::VectorXd alpha(m), beta(m);
        V.col(0) = v0;
        Eigen::VectorXd w(n);
        Eigen::Index steps = m;
        for (Eigen::Index j = 0; j < m; ++j) {
            matvec(V.col(j), w);
            alpha[j] = V.col(j).dot(w);
            w -= alpha[j] * V.col(j);
            if (j > 0) w -= beta[j - 1] * V.col(j - 1);
            // full reorthogonalization, twice
            for (int pass = 0; pass < 2; ++pass)
                w -= V.leftCols(j + 1) * (V.leftCols(j + 1).transpose() * w);
            beta[j] = w.norm();
            if (beta[j] < 1e-14) {
                steps = j + 1;  // invariant subspace found
                break;
            }
            V.col(j + 1) = w / beta[j];
        }
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(steps, steps);
        for (Eigen::Index j = 0; j < steps; ++j) {
            T(j, j) = alpha[j];
            if (j + 1 < steps) {
                T(j, j + 1) = beta[j];
                T(j + 1, j) = beta[j];
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
        if (es.info() != Eigen::Success) throw std::runtime_error("lanczos_topk: tridiagonal solve failed");
        if (steps >= k) {
            Eigen::MatrixXd ritz_vecs = V.leftCols(steps) * es.eigenvectors();
            EigenDecomposition cand = detail::select_pairs(es.eigenvalues(), ritz_vecs, std::min<int>(k, steps), ordering);
            const double norm_est = std::max(std::abs(es.eigenvalues()[0]), std::abs(es.eigenvalues()[steps - 1]));
            bool ok = (cand.rank() == k);
            for (Eigen::Index i = 0; ok && i < cand.rank(); ++i) {
                matvec(cand.vectors.col(i), w);
                if ((w - cand.values[i] * cand.vectors.col(i)).norm() > tol * std::max(norm_est, 1e-30)) ok = false;
            }
            if (ok || steps == n) {
                if (!ok) throw std::runtime_error("lanczos_topk: no convergence at full dimension");
                return cand;
            }
        }
        if (m == n) throw std::runtime_error("lanczos_topk: no convergence");
        m = std::min<Eigen::Index>(n, 2 * m);
    }
}

/// Top-k pairs of an adjacency matrix: dense below the limit, Lanczos above.
inline EigenDecomposition symmetric_eigendecomposition(const AdjacencyMatrix& A, int k,
                                                       EigenOrdering ordering = EigenOrdering::Algebraic,
                                                       std::size_t dense_limit = kDenseLimit) {
    if (A.n <= dense_limit) return symmetric_eigendecomposition(A.dense(dense_limit), k, ordering);
    auto matvec = [&A](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
        y.setZero(static_cast<Eigen::Index>(A.n));
        for (std::size_t i = 0; i < A.n; ++i) {
            double acc = 0.0;
            for (auto j : A.neighbors[i]) acc += x[j];
            y[static_cast<Eigen::Index>(i)] = acc;
        }
    };
    return lanczos_topk(matvec, static_cast<Eigen::Index>(A.n), k, ordering);
}

/// D^{-1/2} A D^{-1/2} with D = diag of row sums. Zero-sum rows are dropped;
/// `kept` maps the rows of the result back to the input.
struct NormalizedMatrix {
    Eigen::MatrixXd matrix;
    std::vector<std::size_t> kept;
};

inline NormalizedMatrix degree_normalize(const Eigen::MatrixXd& A) {
    if (A.rows() != A.cols()) throw std::invalid_argument("degree_normalize: matrix not square");
    if (((A.array() < 0.0).any())) throw std::invalid_argument("degree_normalize: negative entries");
    Eigen::VectorXd rowsum = A.rowwise().sum();
    NormalizedMatrix out;
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        if (rowsum[i] > 0.0) out.kept.push_back(static_cast<std::size_t>(i));
    const auto k = static_cast<Eigen::Index>(out.kept.size());
    out.matrix.resize(k, k);
    for (Eigen::Index a = 0; a < k; ++a)
        for (Eigen::Index b = 0; b < k; ++b) {
            const auto i = static_cast<Eigen::Index>(out.kept[a]);
            const auto j = static_cast<Eigen::Index>(out.kept[b]);
            out.matrix(a, b) = A(i, j) / std::sqrt(rowsum[i] * rowsum[j]);
        }
    return out;
}

/// Least-squares slope of log(lambda_i) against log(i) over ranks
/// [i_min, i_max] (1-based). The decay condition asks for slope <= -2.5.
inline double decay_diagnostic(const Eigen::VectorXd& values, int i_min, int i_max) {
    if (i_min < 1 || i_max > values.size() || i_max - i_min < 3)
        throw std::invalid_argument("decay_diagnostic: need a window of at least 4 ranks inside the spectrum");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int cnt = i_max - i_min + 1;
    for (int i = i_min; i <= i_max; ++i) {
        const double lam = values[i - 1];
        if (lam <= 0.0) throw std::invalid_argument("decay_diagnostic: nonpositive eigenvalue in window");
        const double lx = std::log(static_cast<double>(i)), ly = std::log(lam);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
}

}  // namespace lsi
