#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "lsi/kernel.hpp"
#include "lsi/latent.hpp"
#include "lsi/rng.hpp"

namespace lsi {

constexpr std::size_t kDenseLimit = 4096;

/// Realized undirected graph from the simplified model. Sparse neighbor lists,
/// sorted; no self-loops; the density parameter rho used at generation rides along.
struct AdjacencyMatrix {
    std::size_t n = 0;
    double rho = 0.0;
    std::vector<std::vector<std::uint32_t>> neighbors;

    std::size_t edge_count() const {
        std::size_t total = 0;
        for (const auto& adj : neighbors) total += adj.size();
        return total / 2;
    }

    double average_degree() const { return n ? 2.0 * static_cast<double>(edge_count()) / n : 0.0; }

    Eigen::MatrixXd dense(std::size_t limit = kDenseLimit) const {
        if (n > limit) throw std::invalid_argument("AdjacencyMatrix::dense: size exceeds dense limit");
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (auto j : neighbors[i]) A(i, j) = 1.0;
        return A;
    }
};

/// Follower-influencer incidence: rows[j] lists the influencers follower j linked.
struct BipartiteMatrix {
    std::size_t m = 0;
    std::size_t n = 0;
    std::vector<std::vector<std::uint32_t>> rows;

    std::size_t edge_count() const {
        std::size_t total = 0;
        for (const auto& r : rows) total += r.size();
        return total;
    }

    /// B^T B as a dense n x n matrix; entry (i,k) counts common followers.
    Eigen::MatrixXd btb(std::size_t limit = kDenseLimit) const {
        if (n > limit) throw std::invalid_argument("BipartiteMatrix::btb: n exceeds dense limit");
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
        for (const auto& r : rows)
            for (std::size_t a = 0; a < r.size(); ++a)
                for (std::size_t b = 0; b <= a; ++b) {
                    A(r[a], r[b]) += 1.0;
                    if (r[a] != r[b]) A(r[b], r[a]) += 1.0;
                }
        return A;
    }
};

/// Each unordered pair {i,j} is an independent edge with probability
/// kappa(x_i, x_j) * rho / n, decided by hash(seed, i, j).
inline AdjacencyMatrix generate_simplified(const LatentSample& sample, const Kernel& kernel,
                                           double rho, std::uint64_t seed) {
    const std::size_t n = sample.size();
    if (rho <= 0.0) throw std::invalid_argument("generate_simplified: rho must be positive");
    if (kernel.max_value() * rho / static_cast<double>(n) > 1.0 + 1e-12)
        throw std::invalid_argument(
            "generate_simplified: kappa_max * rho / n exceeds 1; edge probabilities invalid");

    AdjacencyMatrix A;
    A.n = n;
    A.rho = rho;
    A.neighbors.resize(n);
    const double scale = rho / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double p = kernel(sample[i], sample[j]) * scale;
            if (rng::uniform(seed, i, j) < p) {
                A.neighbors[i].push_back(static_cast<std::uint32_t>(j));
                A.neighbors[j].push_back(static_cast<std::uint32_t>(i));
            }
        }
    }
    return A;
}

/// Follower j links influencer i independently with probability kappa(y_j, x_i) / n.
inline BipartiteMatrix generate_bipartite(const LatentSample& x_sample, const LatentSample& y_sample,
                                          const Kernel& kernel, std::uint64_t seed) {
    const std::size_t n = x_sample.size();
    const std::size_t m = y_sample.size();
    if (kernel.max_value() / static_cast<double>(n) > 1.0 + 1e-12)
        throw std::invalid_argument("generate_bipartite: kappa_max / n exceeds 1");

    BipartiteMatrix B;
    B.m = m;
    B.n = n;
    B.rows.resize(m);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            const double p = kernel(y_sample[j], x_sample[i]) * inv_n;
            if (rng::uniform(seed, j, i) < p) B.rows[j].push_back(static_cast<std::uint32_t>(i));
        }
    }
    return B;
}

/// Dense Gram matrix K with K_ij = kappa(x_i, x_j) (diagonal kappa(x,x) included).
inline Eigen::MatrixXd expected_kernel_matrix(const LatentSample& sample, const Kernel& kernel,
                                              std::size_t limit = kDenseLimit) {
    const std::size_t n = sample.size();
    if (n > limit) throw std::invalid_argument("expected_kernel_matrix: size exceeds dense limit");
    Eigen::MatrixXd K(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            const double v = kernel(sample[i], sample[j]);
            K(i, j) = v;
            K(j, i) = v;
        }
    return K;
}

}  // namespace lsi
