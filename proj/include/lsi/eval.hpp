#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "lsi/eigensolve.hpp"
#include "lsi/embed.hpp"
#include "lsi/graphgen.hpp"
#include "lsi/latent.hpp"

namespace lsi {

/// Result of checking the (alpha, beta, gamma)-approximation conditions:
/// disjoint clusters inside single support intervals, two-sided distance
/// bounds D <= |x - x'| <= (1+beta) D + gamma on a subset G_i of each cluster,
/// and |union G_i| >= (1 - alpha) n.
struct ApproxReport {
    double alpha_achieved = 0.0;
    double beta_used = 0.0;
    double gamma_used = 0.0;
    std::vector<double> purity;        // per cluster, fraction inside its majority interval
    std::vector<int> interval;         // per cluster, the majority interval index
    std::vector<std::size_t> g_sizes;  // per cluster, |G_i| found by greedy removal
    bool clusters_in_intervals = false;
    bool pass = false;
};

namespace detail {

/// Largest Eq.-consistent subset by greedy removal of the row with the most
/// violations (ties: larger violation mass, then lower index). Greedy gives a
/// lower bound on |G_i|, which is conservative for pass/fail.
inline std::vector<char> greedy_consistent_subset(const Eigen::MatrixXd& D,
                                                  const std::vector<double>& truth,
                                                  double beta, double gamma) {
    const std::size_t k = truth.size();
    std::vector<char> active(k, 1);
    Eigen::MatrixXd viol = Eigen::MatrixXd::Zero(k, k);
    std::vector<int> counts(k, 0);
    std::vector<double> mass(k, 0.0);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j) {
            const double t = std::abs(truth[i] - truth[j]);
            const double lower_excess = D(i, j) - t;
            const double upper_excess = t - ((1.0 + beta) * D(i, j) + gamma);
            const double v = std::max(lower_excess, upper_excess);
            if (v > 1e-12) {
                viol(i, j) = v;
                viol(j, i) = v;
                ++counts[i];
                ++counts[j];
                mass[i] += v;
                mass[j] += v;
            }
        }
    for (;;) {
        int worst = -1;
        for (std::size_t i = 0; i < k; ++i) {
            if (!active[i] || counts[i] == 0) continue;
            if (worst < 0 || counts[i] > counts[worst] ||
                (counts[i] == counts[worst] && mass[i] > mass[worst]))
                worst = static_cast<int>(i);
        }
        if (worst < 0) break;
        active[worst] = 0;
        for (std::size_t j = 0; j < k; ++j)
            if (active[j] && viol(worst, j) > 0.0) {
                --counts[j];
                mass[j] -= viol(worst, j);
            }
        counts[worst] = 0;
    }
    return active;
}

}  // namespace detail

inline ApproxReport check_approximation(const LatentSample& truth, const LatentDistribution& dist,
                                        const std::vector<std::vector<std::size_t>>& clusters,
                                        const std::vector<Eigen::MatrixXd>& D_matrices,
                                        double alpha, double beta, double gamma) {
    if (clusters.size() != D_matrices.size())
        throw std::invalid_argument("check_approximation: clusters and distance matrices mismatch");
    std::vector<char> seen(truth.size(), 0);
    for (const auto& c : clusters)
        for (auto i : c) {
            if (i >= truth.size()) throw std::invalid_argument("check_approximation: node index out of range");
            if (seen[i]) throw std::invalid_argument("check_approximation: clusters overlap");
            seen[i] = 1;
        }

    ApproxReport rep;
    rep.beta_used = beta;
    rep.gamma_used = gamma;
    // With a single continuous support interval the membership condition is vacuous.
    const bool interval_check = dist.pieces().size() > 1;

    std::size_t in_g = 0;
    rep.clusters_in_intervals = true;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        const auto& nodes = clusters[c];
        if (D_matrices[c].rows() != static_cast<Eigen::Index>(nodes.size()))
            throw std::invalid_argument("check_approximation: distance matrix size mismatch");

        std::vector<int> votes(dist.pieces().size() + 1, 0);
        for (auto i : nodes) {
            const int iv = dist.interval_index(truth[i]);
            ++votes[iv < 0 ? dist.pieces().size() : static_cast<std::size_t>(iv)];
        }
        const int maj = static_cast<int>(std::max_element(votes.begin(), votes.end() - 1) - votes.begin());
        rep.interval.push_back(maj);
        rep.purity.push_back(static_cast<double>(votes[maj]) / static_cast<double>(nodes.size()));
        if (interval_check && votes[maj] != static_cast<int>(nodes.size()))
            rep.clusters_in_intervals = false;

        std::vector<double> tpos(nodes.size());
        for (std::size_t i = 0; i < nodes.size(); ++i) tpos[i] = truth[nodes[i]];
        auto active = detail::greedy_consistent_subset(D_matrices[c], tpos, beta, gamma);
        std::size_t g = 0;
        for (auto a : active) g += a;
        rep.g_sizes.push_back(g);
        in_g += g;
    }
    rep.alpha_achieved = 1.0 - static_cast<double>(in_g) / static_cast<double>(truth.size());
    rep.pass = rep.clusters_in_intervals && rep.alpha_achieved <= alpha + 1e-12;
    return rep;
}

struct Correlations {
    double pearson = 0.0;
    double spearman = 0.0;
    double kendall = 0.0;
    bool pearson_defined = true;  // false when an input is constant
};

namespace detail {

inline std::vector<double> average_ranks(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double r = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
        i = j + 1;
    }
    return ranks;
}

inline double pearson_of(const std::vector<double>& a, const std::vector<double>& b, bool& defined) {
    const auto n = static_cast<double>(a.size());
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double saa = 0, sbb = 0, sab = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
        sab += (a[i] - ma) * (b[i] - mb);
    }
    if (saa <= 0.0 || sbb <= 0.0) {
        defined = false;
        return 0.0;
    }
    defined = true;
    return sab / std::sqrt(saa * sbb);
}

}  // namespace detail

/// Pearson, Spearman (average ranks), and Kendall tau_a = (C - D) / (n(n-1)/2).
inline Correlations correlations(const std::vector<double>& est, const std::vector<double>& truth) {
    if (est.size() != truth.size() || est.size() < 2)
        throw std::invalid_argument("correlations: vectors must have equal length >= 2");
    Correlations out;
    out.pearson = detail::pearson_of(est, truth, out.pearson_defined);
    bool rank_defined = true;
    out.spearman = detail::pearson_of(detail::average_ranks(est), detail::average_ranks(truth), rank_defined);
    if (!rank_defined) out.spearman = 0.0;

    const std::size_t n = est.size();
    long long concordant_minus_discordant = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double s = (est[i] - est[j]) * (truth[i] - truth[j]);
            if (s > 0) ++concordant_minus_discordant;
            else if (s < 0) --concordant_minus_discordant;
        }
    out.kendall = static_cast<double>(concordant_minus_discordant) /
                  (static_cast<double>(n) * (n - 1) / 2.0);
    return out;
}

struct ThresholdClassifier {
    double threshold = 0.0;
    bool above_is_positive = true;
    double in_sample_accuracy = 0.0;
    double out_sample_accuracy = 0.0;
};

/// Midpoint scan maximizing in-sample accuracy; smallest maximizing threshold
/// wins ties. The in-sample split is the leading fraction of the index order.
inline ThresholdClassifier classify_threshold(const std::vector<double>& est, const std::vector<int>& labels,
                                              double in_sample_fraction = 0.5) {
    if (est.size() != labels.size() || est.empty())
        throw std::invalid_argument("classify_threshold: size mismatch");
    if (in_sample_fraction <= 0.0 || in_sample_fraction > 1.0)
        throw std::invalid_argument("classify_threshold: fraction must be in (0,1]");
    const std::size_t n_in = std::max<std::size_t>(1, static_cast<std::size_t>(
        std::ceil(in_sample_fraction * static_cast<double>(est.size()))));
    bool has0 = false, has1 = false;
    for (std::size_t i = 0; i < n_in; ++i) (labels[i] ? has1 : has0) = true;
    if (!has0 || !has1) throw std::invalid_argument("classify_threshold: in-sample split has a single class");

    std::vector<double> vals(est.begin(), est.begin() + static_cast<std::ptrdiff_t>(n_in));
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    std::vector<double> cuts;
    cuts.push_back(vals.front() - 1.0);
    for (std::size_t i = 0; i + 1 < vals.size(); ++i) cuts.push_back(0.5 * (vals[i] + vals[i + 1]));

    ThresholdClassifier best;
    best.in_sample_accuracy = -1.0;
    for (const double cut : cuts)
        for (const bool above : {true, false}) {
            std::size_t correct = 0;
            for (std::size_t i = 0; i < n_in; ++i) {
                const int pred = (est[i] > cut) == above ? 1 : 0;
                correct += pred == labels[i];
            }
            const double acc = static_cast<double>(correct) / static_cast<double>(n_in);
            if (acc > best.in_sample_accuracy + 1e-12) {
                best.in_sample_accuracy = acc;
                best.threshold = cut;
                best.above_is_positive = above;
            }
        }

    std::size_t correct = 0, total = 0;
    for (std::size_t i = n_in; i < est.size(); ++i) {
        const int pred = (est[i] > best.threshold) == best.above_is_positive ? 1 : 0;
        correct += pred == labels[i];
        ++total;
    }
    best.out_sample_accuracy = total ? static_cast<double>(correct) / static_cast<double>(total)
                                     : best.in_sample_accuracy;
    return best;
}

struct ModularityPartition {
    std::vector<int> labels;
    double leading_eigenvalue = 0.0;
    bool has_structure = true;  // false when the leading eigenvalue is <= 0 (e.g. complete graphs)
};

/// Sign partition of the leading eigenvector of B = A - k k^T / (2E).
inline ModularityPartition modularity_baseline(const AdjacencyMatrix& A) {
    if (A.edge_count() == 0) throw std::invalid_argument("modularity_baseline: graph has no edges");
    Eigen::MatrixXd dense = A.dense();
    Eigen::VectorXd deg = dense.rowwise().sum();
    const double two_e = deg.sum();
    Eigen::MatrixXd B = dense - (deg * deg.transpose()) / two_e;
    EigenDecomposition ed = symmetric_eigendecomposition(B, 1, EigenOrdering::Algebraic);

    ModularityPartition out;
    out.leading_eigenvalue = ed.values[0];
    out.has_structure = ed.values[0] > 1e-10;
    out.labels.resize(A.n);
    for (std::size_t i = 0; i < A.n; ++i) out.labels[i] = ed.vectors(static_cast<Eigen::Index>(i), 0) > 0 ? 1 : 0;
    return out;
}

struct MdsResult {
    Eigen::MatrixXd coordinates;
    double residual_mass = 0.0;  // spectrum mass not captured by the retained dimensions
};

/// Classical MDS: double-center -1/2 J D.^2 J and keep the top-dim positive eigenpairs.
inline MdsResult mds_baseline(const Eigen::MatrixXd& D, int dim) {
    const Eigen::Index n = D.rows();
    if (n == 0 || D.cols() != n) throw std::invalid_argument("mds_baseline: empty or non-square input");
    if (dim < 1) throw std::invalid_argument("mds_baseline: dim must be >= 1");
    Eigen::MatrixXd D2 = D.cwiseProduct(D);
    Eigen::VectorXd rowmean = D2.rowwise().mean();
    const double allmean = D2.mean();
    Eigen::MatrixXd B(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            B(i, j) = -0.5 * (D2(i, j) - rowmean[i] - rowmean[j] + allmean);
    B = 0.5 * (B + B.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
    if (es.info() != Eigen::Success) throw std::runtime_error("mds_baseline: eigensolver failed");
    const Eigen::VectorXd vals = es.eigenvalues();
    if ((vals.array() <= 1e-12).all() && n > 1)
        throw std::runtime_error("mds_baseline: spectrum has no positive part");

    MdsResult out;
    const int kept = std::min<int>(dim, static_cast<int>(n));
    out.coordinates = Eigen::MatrixXd::Zero(n, dim);
    double captured = 0.0, total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) total += std::abs(vals[i]);
    for (int j = 0; j < kept; ++j) {
        const Eigen::Index idx = n - 1 - j;
        if (vals[idx] <= 0.0) break;
        out.coordinates.col(j) = es.eigenvectors().col(idx) * std::sqrt(vals[idx]);
        captured += vals[idx];
    }
    out.residual_mass = total > 0.0 ? 1.0 - captured / total : 0.0;
    return out;
}

/// BFS hop distances as dissimilarities for graph-input MDS. Unreachable pairs
/// are assigned one hop beyond the largest finite distance.
inline Eigen::MatrixXd hop_distance_matrix(const AdjacencyMatrix& A) {
    const auto n = static_cast<Eigen::Index>(A.n);
    Eigen::MatrixXi H = Eigen::MatrixXi::Constant(n, n, -1);
    std::vector<int> dist(A.n);
    for (std::size_t s = 0; s < A.n; ++s) {
        std::fill(dist.begin(), dist.end(), -1);
        std::deque<std::uint32_t> q{static_cast<std::uint32_t>(s)};
        dist[s] = 0;
        while (!q.empty()) {
            auto u = q.front();
            q.pop_front();
            for (auto v : A.neighbors[u])
                if (dist[v] < 0) {
                    dist[v] = dist[u] + 1;
                    q.push_back(v);
                }
        }
        for (std::size_t j = 0; j < A.n; ++j) H(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(j)) = dist[j];
    }
    int maxfinite = 0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) maxfinite = std::max(maxfinite, H(i, j));
    Eigen::MatrixXd D(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) D(i, j) = H(i, j) < 0 ? maxfinite + 1 : H(i, j);
    return D;
}

inline MdsResult mds_baseline(const AdjacencyMatrix& A, int dim) {
    return mds_baseline(hop_distance_matrix(A), dim);
}

enum class PointQuality { Good1, Good2, Bad, Unclear };

/// Distance-to-curve labels used by the denoise analysis. The curve is given
/// as a dense sample of true feature rows; Proj is the nearest sampled point.
inline std::vector<PointQuality> point_quality_oracle(const Eigen::MatrixXd& curve_samples,
                                                      const Eigen::MatrixXd& true_rows,
                                                      const Eigen::MatrixXd& est_rows, double f) {
    if (curve_samples.rows() < 1000)
        throw std::invalid_argument("point_quality_oracle: need >= 1000 curve samples");
    if (true_rows.rows() != est_rows.rows() || true_rows.cols() != est_rows.cols())
        throw std::invalid_argument("point_quality_oracle: row matrices mismatch");
    const double r1 = 1.0 / std::sqrt(f);
    std::vector<PointQuality> labels(static_cast<std::size_t>(est_rows.rows()));
    for (Eigen::Index i = 0; i < est_rows.rows(); ++i) {
        double proj = std::numeric_limits<double>::infinity();
        for (Eigen::Index s = 0; s < curve_samples.rows(); ++s)
            proj = std::min(proj, (est_rows.row(i) - curve_samples.row(s)).norm());
        const double direct = (est_rows.row(i) - true_rows.row(i)).norm();
        if (direct <= r1)
            labels[i] = PointQuality::Good1;
        else if (proj <= r1)
            labels[i] = PointQuality::Good2;
        else if (proj > 4.0 * r1)
            labels[i] = PointQuality::Bad;
        else
            labels[i] = PointQuality::Unclear;
    }
    return labels;
}

}  // namespace lsi
