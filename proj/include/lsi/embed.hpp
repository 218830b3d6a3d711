#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "lsi/kernel.hpp"

namespace lsi {

/// 1-D coordinates reproducing a distance matrix, via trilateration from two
/// anchors: a = row with the largest row sum, b = farthest from a. Exact on
/// exact line metrics; `stress` reports the residual otherwise.
struct LineEmbedding {
    Eigen::VectorXd coordinates;
    int anchor_a = 0;
    int anchor_b = 0;
    double stress = 0.0;
};

inline LineEmbedding line_embed(const Eigen::MatrixXd& D) {
    const Eigen::Index k = D.rows();
    if (k == 0 || D.cols() != k) throw std::invalid_argument("line_embed: empty or non-square input");
    LineEmbedding out;
    out.coordinates = Eigen::VectorXd::Zero(k);

    Eigen::Index a, b;
    D.rowwise().sum().maxCoeff(&a);
    D.row(a).maxCoeff(&b);
    out.anchor_a = static_cast<int>(a);
    out.anchor_b = static_cast<int>(b);

    const double dab = D(a, b);
    if (dab > 0.0) {
        for (Eigen::Index i = 0; i < k; ++i)
            out.coordinates[i] = (D(a, i) * D(a, i) + dab * dab - D(b, i) * D(b, i)) / (2.0 * dab);
    }
    if (k > 1) {
        double ss = 0.0;
        for (Eigen::Index i = 0; i < k; ++i)
            for (Eigen::Index j = i + 1; j < k; ++j) {
                const double r = std::abs(out.coordinates[i] - out.coordinates[j]) - D(i, j);
                ss += r * r;
            }
        out.stress = std::sqrt(ss / (static_cast<double>(k) * (k - 1) / 2.0));
    }
    return out;
}

/// Grid-search MLE of a follower position given influencer coordinates.
/// Likelihood: prod_j (kappa(y, x_j)/n)^{B_j} (1 - kappa(y, x_j)/n)^{1-B_j},
/// evaluated in the log domain on {0, eps, 2 eps, ..., 1}. Ties break toward
/// the smaller coordinate. Zero-degree rows are uninformative.
inline std::optional<double> follower_mle(const std::vector<std::uint32_t>& linked,
                                          const Eigen::VectorXd& x_hat, const Kernel& kernel,
                                          double grid_eps = 0.01) {
    if (grid_eps <= 0.0 || grid_eps > 0.5) throw std::invalid_argument("follower_mle: grid_eps must be in (0, 0.5]");
    if (linked.empty()) return std::nullopt;
    const auto n = static_cast<double>(x_hat.size());
    std::vector<char> is_linked(x_hat.size(), 0);
    for (auto j : linked) {
        if (j >= x_hat.size()) throw std::invalid_argument("follower_mle: link index out of range");
        is_linked[j] = 1;
    }
    double best_ll = -std::numeric_limits<double>::infinity();
    double best_y = 0.0;
    for (double y = 0.0; y <= 1.0 + 1e-12; y += grid_eps) {
        const double yy = std::min(y, 1.0);
        double ll = 0.0;
        for (Eigen::Index j = 0; j < x_hat.size(); ++j) {
            const double p = kernel(yy, x_hat[j]) / n;
            ll += is_linked[j] ? std::log(p) : std::log1p(-p);
        }
        if (ll > best_ll + 1e-12) {
            best_ll = ll;
            best_y = yy;
        }
    }
    return best_y;
}

/// Cheap follower estimate: mean coordinate of the linked influencers.
inline std::optional<double> follower_neighbor_mean(const std::vector<std::uint32_t>& linked,
                                                    const Eigen::VectorXd& x_hat) {
    if (linked.empty()) return std::nullopt;
    double acc = 0.0;
    for (auto j : linked) {
        if (j >= x_hat.size()) throw std::invalid_argument("follower_neighbor_mean: link index out of range");
        acc += x_hat[j];
    }
    return acc / static_cast<double>(linked.size());
}

/// Heuristic global offsets for per-cluster line embeddings. The pipeline does
/// not estimate inter-cluster distances; for presentation we convert the mean
/// estimated kernel value between clusters into a distance via the kernel
/// inverse and line-embed the resulting k x k matrix. Flagged as a heuristic
/// in the output metadata.
inline Eigen::VectorXd cluster_offsets(const Eigen::MatrixXd& mean_gram, const Kernel& kernel) {
    const Eigen::Index k = mean_gram.rows();
    if (k == 1) return Eigen::VectorXd::Zero(1);
    const double kmin = kernel(0.0, 1.0);
    const double kmax = kernel.max_value();
    Eigen::MatrixXd D(k, k);
    for (Eigen::Index a = 0; a < k; ++a)
        for (Eigen::Index b = 0; b < k; ++b) {
            if (a == b) {
                D(a, b) = 0.0;
                continue;
            }
            const double khat = std::min(kmax, std::max(kmin, mean_gram(a, b)));
            D(a, b) = kernel.invert(khat);
        }
    D = 0.5 * (D + D.transpose()).eval();
    return line_embed(D).coordinates;
}

}  // namespace lsi
