#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "lsi/kernel.hpp"
#include "lsi/rng.hpp"
#include "lsi/spectral.hpp"

namespace lsi {

enum class IsomapMode { Theory, Calibrated };

/// Resolution parameters for denoising and the short-range neighbor graph.
///
/// Theory mode uses the paper formulas verbatim: denoise radius 3/sqrt(f),
/// count cutoff n/f, graph radius ell/sqrt(f). Those are vacuous at n <= 1e4
/// when f is tied to rho, so calibrated mode (the default in the CLI) derives
/// the radius from the distance distribution of the embedding itself:
///   - denoise radius r0 = `percentile`-th percentile of pairwise distances,
///     cutoff = count_fraction * median ball count;
///   - graph radius = r0, widened to the middle of a spectral gap in the
///     post-denoise distance quantiles when one is decisive (adjacent-quantile
///     ratio >= gap_ratio). A decisive gap is the blockmodel signature: inside
///     it, clusters become radius-cliques and all within-cluster hop counts
///     collapse to 1, as the zero-distance case demands.
struct IsomapParams {
    IsomapMode mode = IsomapMode::Calibrated;
    double f = 0.0;             // theory mode resolution, must be > 0 there
    double ell = 10.0;
    double percentile = 10.0;
    double count_fraction = 0.1;
    double gap_ratio = 1.3;
    std::size_t min_cluster = 5;

    void validate() const {
        if (ell <= 3.0) throw std::invalid_argument("IsomapParams: ell must exceed 3");
        if (mode == IsomapMode::Theory && f <= 0.0)
            throw std::invalid_argument("IsomapParams: theory mode requires f > 0");
        if (percentile <= 0.0 || percentile >= 100.0)
            throw std::invalid_argument("IsomapParams: percentile must lie in (0,100)");
        if (count_fraction <= 0.0) throw std::invalid_argument("IsomapParams: count_fraction must be positive");
        if (gap_ratio <= 1.0) throw std::invalid_argument("IsomapParams: gap_ratio must exceed 1");
    }
};

struct NeighborGraph {
    std::vector<std::size_t> kept;                       // original row indices, ascending
    std::vector<std::vector<std::uint32_t>> adjacency;   // local indices into kept
    double radius = 0.0;
    bool radius_snapped = false;
};

struct ClusterDistances {
    std::vector<std::vector<std::size_t>> clusters;  // original row indices
    std::vector<Eigen::MatrixXi> hops;
    std::vector<Eigen::MatrixXd> distances;
    std::vector<std::size_t> left_out;               // kept rows in clusters below min_cluster
    double denoise_radius = 0.0;
    double graph_radius = 0.0;
    double step = 0.0;
    bool radius_snapped = false;
    std::size_t removed = 0;                         // rows eliminated by denoising
};

namespace detail {

/// Ball counts with a sorted first-coordinate prefilter; exact distances.
inline std::vector<std::size_t> ball_counts(const Eigen::MatrixXd& rows, double radius) {
    const Eigen::Index n = rows.rows();
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return rows(a, 0) < rows(b, 0); });
    const double r2 = radius * radius * (1.0 + 1e-12) + 1e-300;
    std::vector<std::size_t> count(n, 1);  // closed ball includes the point itself
    for (Eigen::Index a = 0; a < n; ++a) {
        const Eigen::Index i = order[a];
        for (Eigen::Index b = a + 1; b < n; ++b) {
            const Eigen::Index j = order[b];
            const double dx = rows(j, 0) - rows(i, 0);
            if (dx * dx > r2) break;
            if ((rows.row(i) - rows.row(j)).squaredNorm() <= r2) {
                ++count[i];
                ++count[j];
            }
        }
    }
    return count;
}

/// Pairwise distances of the given rows; deterministically subsampled above a cap.
inline std::vector<double> pair_distances(const Eigen::MatrixXd& rows,
                                          const std::vector<std::size_t>& subset,
                                          std::size_t cap = 4'000'000) {
    const std::size_t k = subset.size();
    const std::size_t total = k * (k - 1) / 2;
    std::vector<double> d;
    if (total <= cap) {
        d.reserve(total);
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t b = a + 1; b < k; ++b)
                d.push_back((rows.row(subset[a]) - rows.row(subset[b])).norm());
    } else {
        const double p = static_cast<double>(cap) / static_cast<double>(total);
        d.reserve(cap + cap / 8);
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t b = a + 1; b < k; ++b)
                if (rng::uniform(0x15f0, a, b) < p)
                    d.push_back((rows.row(subset[a]) - rows.row(subset[b])).norm());
    }
    std::sort(d.begin(), d.end());
    return d;
}

inline double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return 0.0;
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace detail

/// Denoise radius: 3/sqrt(f) in theory mode, percentile radius otherwise.
inline double denoise_radius(const Eigen::MatrixXd& rows, const IsomapParams& params) {
    if (params.mode == IsomapMode::Theory) return 3.0 / std::sqrt(params.f);
    std::vector<std::size_t> all(rows.rows());
    std::iota(all.begin(), all.end(), std::size_t{0});
    auto d = detail::pair_distances(rows, all);
    return detail::quantile_sorted(d, params.percentile / 100.0);
}

/// Counting rule: remove rows whose ball holds fewer points than the cutoff.
inline std::vector<std::size_t> denoise(const FeatureEmbedding& embedding, const IsomapParams& params) {
    params.validate();
    const Eigen::Index n = embedding.rows.rows();
    if (n < 1) throw std::invalid_argument("denoise: empty embedding");
    const double radius = denoise_radius(embedding.rows, params);
    auto counts = detail::ball_counts(embedding.rows, radius);

    double cutoff;
    if (params.mode == IsomapMode::Theory) {
        cutoff = std::ceil(static_cast<double>(n) / params.f);
    } else {
        std::vector<std::size_t> sorted_counts = counts;
        std::nth_element(sorted_counts.begin(), sorted_counts.begin() + sorted_counts.size() / 2,
                         sorted_counts.end());
        cutoff = params.count_fraction * static_cast<double>(sorted_counts[sorted_counts.size() / 2]);
    }

    std::vector<std::size_t> kept;
    for (Eigen::Index i = 0; i < n; ++i)
        if (static_cast<double>(counts[i]) >= cutoff) kept.push_back(static_cast<std::size_t>(i));
    return kept;
}

/// Graph radius for calibrated mode: percentile radius of the kept rows'
/// pairwise distances, snapped into a decisive distribution gap if present.
struct CalibratedRadius {
    double radius = 0.0;
    bool snapped = false;
};

inline CalibratedRadius calibrated_radius(const Eigen::MatrixXd& rows,
                                          const std::vector<std::size_t>& kept,
                                          const IsomapParams& params) {
    auto d = detail::pair_distances(rows, kept);
    CalibratedRadius out;
    out.radius = detail::quantile_sorted(d, params.percentile / 100.0);
    double best_ratio = 1.0, best_mid = out.radius;
    for (double q = params.percentile; q < 60.0; q += 0.5) {
        const double lo = detail::quantile_sorted(d, q / 100.0);
        const double hi = detail::quantile_sorted(d, (q + 0.5) / 100.0);
        if (lo <= 0.0) continue;
        const double ratio = hi / lo;
        if (ratio > best_ratio) {
            best_ratio = ratio;
            best_mid = std::sqrt(lo * hi);
        }
    }
    if (best_ratio >= params.gap_ratio) {
        out.radius = best_mid;
        out.snapped = true;
    }
    return out;
}

/// Exact closed-ball radius graph over the kept rows.
inline NeighborGraph build_neighbor_graph(const FeatureEmbedding& embedding,
                                          std::vector<std::size_t> kept, const IsomapParams& params) {
    params.validate();
    if (kept.empty()) throw std::invalid_argument("build_neighbor_graph: kept set is empty");
    std::sort(kept.begin(), kept.end());

    NeighborGraph g;
    if (params.mode == IsomapMode::Theory) {
        g.radius = params.ell / std::sqrt(params.f);
    } else {
        auto cal = calibrated_radius(embedding.rows, kept, params);
        g.radius = cal.radius;
        g.radius_snapped = cal.snapped;
    }
    g.kept = std::move(kept);

    const std::size_t k = g.kept.size();
    g.adjacency.assign(k, {});
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto& rows = embedding.rows;
    std::sort(order.begin(), order.end(),
              [&](auto a, auto b) { return rows(g.kept[a], 0) < rows(g.kept[b], 0); });
    const double r2 = g.radius * g.radius * (1.0 + 1e-12) + 1e-300;
    for (std::size_t a = 0; a < k; ++a) {
        const auto i = order[a];
        for (std::size_t b = a + 1; b < k; ++b) {
            const auto j = order[b];
            const double dx = rows(g.kept[j], 0) - rows(g.kept[i], 0);
            if (dx * dx > r2) break;
            if ((rows.row(g.kept[i]) - rows.row(g.kept[j])).squaredNorm() <= r2) {
                g.adjacency[i].push_back(static_cast<std::uint32_t>(j));
                g.adjacency[j].push_back(static_cast<std::uint32_t>(i));
            }
        }
    }
    for (auto& adj : g.adjacency) std::sort(adj.begin(), adj.end());
    return g;
}

/// Maximal connected components in local index space, largest first;
/// deterministic order (by smallest member on ties).
inline std::vector<std::vector<std::uint32_t>> connected_components(const NeighborGraph& g) {
    const std::size_t k = g.kept.size();
    std::vector<int> comp(k, -1);
    std::vector<std::vector<std::uint32_t>> comps;
    for (std::size_t s = 0; s < k; ++s) {
        if (comp[s] >= 0) continue;
        const int id = static_cast<int>(comps.size());
        comps.emplace_back();
        std::deque<std::uint32_t> q{static_cast<std::uint32_t>(s)};
        comp[s] = id;
        while (!q.empty()) {
            auto u = q.front();
            q.pop_front();
            comps[id].push_back(u);
            for (auto v : g.adjacency[u])
                if (comp[v] < 0) {
                    comp[v] = id;
                    q.push_back(v);
                }
        }
        std::sort(comps[id].begin(), comps[id].end());
    }
    std::stable_sort(comps.begin(), comps.end(), [](const auto& a, const auto& b) {
        if (a.size() != b.size()) return a.size() > b.size();
        return a.front() < b.front();
    });
    return comps;
}

/// All-pairs unweighted BFS hop counts within one connected component.
inline Eigen::MatrixXi shortest_path_hops(const NeighborGraph& g, const std::vector<std::uint32_t>& cluster) {
    const std::size_t k = cluster.size();
    std::vector<int> local(g.kept.size(), -1);
    for (std::size_t i = 0; i < k; ++i) local[cluster[i]] = static_cast<int>(i);

    Eigen::MatrixXi hops = Eigen::MatrixXi::Constant(k, k, -1);
    std::vector<int> dist(g.kept.size());
    for (std::size_t si = 0; si < k; ++si) {
        std::fill(dist.begin(), dist.end(), -1);
        std::deque<std::uint32_t> q{cluster[si]};
        dist[cluster[si]] = 0;
        while (!q.empty()) {
            auto u = q.front();
            q.pop_front();
            for (auto v : g.adjacency[u])
                if (dist[v] < 0) {
                    dist[v] = dist[u] + 1;
                    q.push_back(v);
                }
        }
        for (std::size_t j = 0; j < k; ++j) {
            if (dist[cluster[j]] < 0)
                throw std::logic_error("shortest_path_hops: cluster is not a connected component");
            hops(si, j) = dist[cluster[j]];
        }
    }
    return hops;
}

/// Per-hop latent step: (c/2)^{1/Delta} ((ell-3)/sqrt(f))^{2/Delta} in theory
/// mode; calibrated replaces (ell-3)/sqrt(f) with (1 - 3/ell) * radius.
inline double hop_step(const IsomapParams& params, const Kernel& kernel, double graph_radius) {
    if (!kernel.normalized())
        throw std::invalid_argument("hop_step: distance conversion requires a normalized kernel (c0 == c1)");
    const double c = kernel.c1;
    const double reach = params.mode == IsomapMode::Theory
                             ? (params.ell - 3.0) / std::sqrt(params.f)
                             : (1.0 - 3.0 / params.ell) * graph_radius;
    return std::pow(c / 2.0, 1.0 / kernel.delta) * std::pow(reach, 2.0 / kernel.delta);
}

/// D = (hops - 1) * step for hops >= 1; adjacent nodes sit below resolution.
inline Eigen::MatrixXd hops_to_distance(const Eigen::MatrixXi& hops, const IsomapParams& params,
                                        const Kernel& kernel, double graph_radius) {
    const double step = hop_step(params, kernel, graph_radius);
    return (hops.cast<double>().array() - 1.0).max(0.0).matrix() * step;
}

/// Denoise -> neighbor graph -> components -> BFS hops -> distances.
inline ClusterDistances isomap_algo(const FeatureEmbedding& embedding, const IsomapParams& params,
                                    const Kernel& kernel) {
    params.validate();
    auto kept = denoise(embedding, params);
    if (kept.empty()) throw std::runtime_error("isomap_algo: denoising removed every row");

    ClusterDistances out;
    out.removed = static_cast<std::size_t>(embedding.rows.rows()) - kept.size();
    out.denoise_radius = denoise_radius(embedding.rows, params);

    NeighborGraph g = build_neighbor_graph(embedding, std::move(kept), params);
    out.graph_radius = g.radius;
    out.radius_snapped = g.radius_snapped;
    out.step = hop_step(params, kernel, g.radius);

    for (const auto& comp : connected_components(g)) {
        if (comp.size() < params.min_cluster) {
            for (auto v : comp) out.left_out.push_back(g.kept[v]);
            continue;
        }
        Eigen::MatrixXi hops = shortest_path_hops(g, comp);
        out.hops.push_back(hops);
        out.distances.push_back(hops_to_distance(hops, params, kernel, g.radius));
        std::vector<std::size_t> orig;
        orig.reserve(comp.size());
        for (auto v : comp) orig.push_back(g.kept[v]);
        out.clusters.push_back(std::move(orig));
    }
    std::sort(out.left_out.begin(), out.left_out.end());
    return out;
}

/// Kernel-inversion distance estimate from a Gram value; unreliable for small
/// khat, offered as an optional edge-weight mode only.
inline double invert_kernel(double khat, const Kernel& kernel) { return kernel.invert(khat); }

}  // namespace lsi
