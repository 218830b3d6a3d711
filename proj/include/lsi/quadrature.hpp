#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "lsi/kernel.hpp"
#include "lsi/latent.hpp"

namespace lsi {

/// Quadrature rule for integrals against F: composite Gauss-Legendre on each
/// continuous piece, exact point masses on atoms. Weights sum to 1.
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
};

namespace detail {

/// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on P_n.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (z * p0 - p1) / (z * z - 1.0);
            double dz = p0 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
}

}  // namespace detail

/// Build a q-point rule under F. Continuous pieces receive points in
/// proportion to their mass (at least 8 each); atoms contribute one node.
inline QuadratureRule make_quadrature(const LatentDistribution& dist, int q) {
    if (q < 1) throw std::invalid_argument("make_quadrature: q must be positive");
    QuadratureRule rule;
    double continuous_mass = 0.0;
    for (const auto& p : dist.pieces())
        if (!p.is_atom()) continuous_mass += p.weight;
    for (const auto& p : dist.pieces()) {
        if (p.is_atom()) {
            rule.nodes.push_back(p.a);
            rule.weights.push_back(p.weight);
            continue;
        }
        int qi = std::max(8, static_cast<int>(std::lround(q * p.weight / continuous_mass)));
        std::vector<double> gx, gw;
        detail::gauss_legendre(qi, gx, gw);
        const double mid = 0.5 * (p.a + p.b), half = 0.5 * p.length();
        for (int i = 0; i < qi; ++i) {
            rule.nodes.push_back(mid + half * gx[i]);
            rule.weights.push_back(0.5 * gw[i] * p.weight);
        }
    }
    return rule;
}

/// Symmetrized discretization of the integral operator: H_ij = sqrt(w_i) g(u_i, u_j) sqrt(w_j).
/// Its eigenvalues approximate those of the operator.
template <typename Fn>
Eigen::MatrixXd operator_matrix(const QuadratureRule& rule, Fn&& g) {
    const auto q = static_cast<Eigen::Index>(rule.size());
    Eigen::MatrixXd H(q, q);
    for (Eigen::Index i = 0; i < q; ++i) {
        const double si = std::sqrt(rule.weights[i]);
        for (Eigen::Index j = 0; j <= i; ++j) {
            double v = si * g(rule.nodes[i], rule.nodes[j]) * std::sqrt(rule.weights[j]);
            H(i, j) = v;
            H(j, i) = v;
        }
    }
    return H;
}

inline Eigen::MatrixXd kernel_operator_matrix(const Kernel& k, const QuadratureRule& rule) {
    return operator_matrix(rule, [&](double x, double y) { return k(x, y); });
}

/// mu(x, y) = integral of kappa(x, z) kappa(z, y) dF(z), evaluated on the rule.
inline double mu_eval(const Kernel& k, const QuadratureRule& rule, double x, double y) {
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i)
        acc += rule.weights[i] * k(x, rule.nodes[i]) * k(rule.nodes[i], y);
    return acc;
}

inline double mu_eval(const Kernel& k, const LatentDistribution& dist, double x, double y, int q = 256) {
    if (q < 16) throw std::invalid_argument("mu_eval: q must be >= 16");
    return mu_eval(k, make_quadrature(dist, q), x, y);
}

/// Discretized squared-kernel operator: mu entries are quadrature sums
/// mu(u_i, u_j) = sum_k w_k kappa(u_i, u_k) kappa(u_k, u_j), assembled as a
/// matrix product. Built from the same rule as the kernel operator, so the
/// squared-spectrum identity holds to solver precision.
inline Eigen::MatrixXd mu_operator_matrix(const Kernel& k, const QuadratureRule& rule) {
    const auto q = static_cast<Eigen::Index>(rule.size());
    Eigen::MatrixXd G(q, q);
    for (Eigen::Index i = 0; i < q; ++i)
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double v = k(rule.nodes[i], rule.nodes[j]);
            G(i, j) = v;
            G(j, i) = v;
        }
    Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(rule.weights.data(), q);
    Eigen::MatrixXd mu = G * w.asDiagonal() * G;
    Eigen::VectorXd sw = w.cwiseSqrt();
    return sw.asDiagonal() * mu * sw.asDiagonal();
}

/// Top-k operator eigenvalues, descending.
inline Eigen::VectorXd operator_eigenvalues(const Kernel& k, const LatentDistribution& dist, int q, int kcount) {
    if (kcount > q) throw std::invalid_argument("operator_eigenvalues: k must not exceed q");
    QuadratureRule rule = make_quadrature(dist, q);
    Eigen::MatrixXd H = kernel_operator_matrix(k, rule);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw std::runtime_error("operator_eigenvalues: eigensolver failed");
    const auto q_actual = H.rows();
    const auto kk = std::min<Eigen::Index>(kcount, q_actual);
    Eigen::VectorXd out(kk);
    for (Eigen::Index i = 0; i < kk; ++i) out[i] = es.eigenvalues()[q_actual - 1 - i];
    return out;
}

/// Reference feature map Phi_d(X) via Nystrom extension of the quadrature
/// eigenfunctions. Test-oracle path: the inference pipeline never calls this.
///
/// psi_j(x) ~= (1/lambda_j) sum_i w_i kappa(x, u_i) psi_j(u_i), with
/// psi_j(u_i) = V_ij / sqrt(w_i) normalized so that sum_i w_i psi_j(u_i)^2 = 1.
/// Column j of the result is sqrt(lambda_j) psi_j(x_i).
inline Eigen::MatrixXd mercer_features(const Kernel& k, const LatentDistribution& dist,
                                       const LatentSample& sample, int d, int q = 512) {
    QuadratureRule rule = make_quadrature(dist, q);
    Eigen::MatrixXd H = kernel_operator_matrix(k, rule);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    if (es.info() != Eigen::Success) throw std::runtime_error("mercer_features: eigensolver failed");
    const auto qn = H.rows();
    if (d > qn) throw std::invalid_argument("mercer_features: d must not exceed the rule size");

    const auto n = static_cast<Eigen::Index>(sample.size());
    Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(n, d);
    Eigen::VectorXd sw(qn);
    for (Eigen::Index i = 0; i < qn; ++i) sw[i] = std::sqrt(rule.weights[i]);
    for (Eigen::Index j = 0; j < d; ++j) {
        const double lam = es.eigenvalues()[qn - 1 - j];
        if (lam <= 1e-14) continue;  // numerically null direction; feature coordinate is 0
        Eigen::VectorXd vj = es.eigenvectors().col(qn - 1 - j);
        // sqrt(lam) psi_j(x) = (1/sqrt(lam)) sum_i sqrt(w_i) V_ij kappa(x, u_i)
        for (Eigen::Index r = 0; r < n; ++r) {
            double acc = 0.0;
            for (Eigen::Index i = 0; i < qn; ++i) acc += sw[i] * vj[i] * k(sample[r], rule.nodes[i]);
            phi(r, j) = acc / std::sqrt(lam);
        }
    }
    return phi;
}

}  // namespace lsi
