#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lsi/embed.hpp"
#include "lsi/eval.hpp"
#include "lsi/graphgen.hpp"
#include "lsi/io.hpp"
#include "lsi/isomap.hpp"
#include "lsi/quadrature.hpp"
#include "lsi/spectral.hpp"

namespace lsi {

/// Flat key=value configuration for the generate/infer/eval pipeline.
/// Unknown keys are rejected with the offending line.
struct PipelineConfig {
    // model
    std::string dist = "uniform";  // uniform | atoms:loc:w,... | pieces:a-b:w,...
    double kernel_c0 = 1.0;
    double kernel_c1 = 1.0;
    double kernel_delta = 2.0;
    std::size_t n = 1000;
    std::size_t m = 0;  // > 0 selects the bipartite model
    double rho = 0.0;   // 0 -> ceil(log2(n)^2)
    std::uint64_t seed = 1;
    // spectral
    double spectral_t = 0.0;  // 0 -> rho^(2/3)
    double spectral_constant = 0.1;
    double spectral_exponent = 2.0 / 29.0;
    int spectral_max_rank = 30;
    std::string spectral_theta = "remove";  // remove (= -inf) or a real < 1
    double spectral_gap_exponent = 2.0 / 43.0;
    bool degree_normalize = false;
    // isomap
    std::string isomap_mode = "calibrated";
    double isomap_f = 0.0;
    double isomap_ell = 10.0;
    double isomap_percentile = 10.0;
    double isomap_count_fraction = 0.1;
    double isomap_gap_ratio = 1.3;
    std::size_t isomap_min_cluster = 5;
    // embed
    double embed_grid_eps = 0.01;
    std::string follower_method = "mle";  // mle | neighbor-mean
    // eval
    double eval_alpha = 0.05;
    double eval_beta = 0.1;
    double eval_gamma = 0.1;
    double eval_in_sample_fraction = 0.5;

    Kernel kernel() const { return Kernel(kernel_c0, kernel_c1, kernel_delta); }

    double effective_rho() const {
        if (rho > 0.0) return rho;
        const double lg = std::log2(static_cast<double>(n));
        return std::ceil(lg * lg);
    }

    LatentDistribution distribution() const {
        if (dist == "uniform") return LatentDistribution::uniform();
        auto parse_items = [](const std::string& body) {
            std::vector<std::string> items;
            std::stringstream ss(body);
            std::string item;
            while (std::getline(ss, item, ',')) items.push_back(item);
            return items;
        };
        if (dist.rfind("atoms:", 0) == 0) {
            std::vector<std::pair<double, double>> aw;
            for (const auto& item : parse_items(dist.substr(6))) {
                const auto sep = item.find(':');
                if (sep == std::string::npos)
                    throw std::invalid_argument("config: atoms item must be loc:weight, got '" + item + "'");
                aw.emplace_back(std::stod(item.substr(0, sep)), std::stod(item.substr(sep + 1)));
            }
            return LatentDistribution::atoms(std::move(aw));
        }
        if (dist.rfind("pieces:", 0) == 0) {
            std::vector<SupportPiece> ps;
            for (const auto& item : parse_items(dist.substr(7))) {
                const auto dash = item.find('-');
                const auto sep = item.find(':');
                if (dash == std::string::npos || sep == std::string::npos || sep < dash)
                    throw std::invalid_argument("config: pieces item must be a-b:weight, got '" + item + "'");
                ps.push_back({std::stod(item.substr(0, dash)),
                              std::stod(item.substr(dash + 1, sep - dash - 1)),
                              std::stod(item.substr(sep + 1))});
            }
            return LatentDistribution::piecewise(std::move(ps));
        }
        throw std::invalid_argument("config: unknown dist '" + dist + "'");
    }

    ThresholdParams threshold_params() const {
        ThresholdParams p;
        p.rho = effective_rho();
        p.t = spectral_t;
        p.constant = spectral_constant;
        p.exponent = spectral_exponent;
        p.max_rank = spectral_max_rank;
        return p;
    }

    IsomapParams isomap_params() const {
        IsomapParams p;
        if (isomap_mode == "theory")
            p.mode = IsomapMode::Theory;
        else if (isomap_mode == "calibrated")
            p.mode = IsomapMode::Calibrated;
        else
            throw std::invalid_argument("config: isomap.mode must be theory or calibrated");
        p.f = isomap_f > 0.0 ? isomap_f : std::pow(effective_rho(), 2.0 / 87.0);
        p.ell = isomap_ell;
        p.percentile = isomap_percentile;
        p.count_fraction = isomap_count_fraction;
        p.gap_ratio = isomap_gap_ratio;
        p.min_cluster = isomap_min_cluster;
        return p;
    }

    double theta_value() const {
        if (spectral_theta == "remove") return kThetaRemoveDiagonal;
        return std::stod(spectral_theta);
    }

    void set(const std::string& key, const std::string& value);
    std::string serialize() const;
    static PipelineConfig load(const std::filesystem::path& path);
};

inline void PipelineConfig::set(const std::string& key, const std::string& value) {
    auto as_bool = [&](const std::string& v) {
        if (v == "1" || v == "true") return true;
        if (v == "0" || v == "false") return false;
        throw std::invalid_argument("config: boolean key '" + key + "' needs 0/1/true/false");
    };
    if (key == "dist") dist = value;
    else if (key == "kernel.c0") kernel_c0 = std::stod(value);
    else if (key == "kernel.c1") kernel_c1 = std::stod(value);
    else if (key == "kernel.delta") kernel_delta = std::stod(value);
    else if (key == "n") n = std::stoull(value);
    else if (key == "m") m = std::stoull(value);
    else if (key == "rho") rho = std::stod(value);
    else if (key == "seed") seed = std::stoull(value);
    else if (key == "spectral.t") spectral_t = std::stod(value);
    else if (key == "spectral.constant") spectral_constant = std::stod(value);
    else if (key == "spectral.exponent") spectral_exponent = std::stod(value);
    else if (key == "spectral.max-rank") spectral_max_rank = std::stoi(value);
    else if (key == "spectral.theta") spectral_theta = value;
    else if (key == "spectral.gap-exponent") spectral_gap_exponent = std::stod(value);
    else if (key == "spectral.degree-normalize") degree_normalize = as_bool(value);
    else if (key == "isomap.mode") isomap_mode = value;
    else if (key == "isomap.f") isomap_f = std::stod(value);
    else if (key == "isomap.ell") isomap_ell = std::stod(value);
    else if (key == "isomap.percentile") isomap_percentile = std::stod(value);
    else if (key == "isomap.count-fraction") isomap_count_fraction = std::stod(value);
    else if (key == "isomap.gap-ratio") isomap_gap_ratio = std::stod(value);
    else if (key == "isomap.min-cluster") isomap_min_cluster = std::stoull(value);
    else if (key == "embed.grid-eps") embed_grid_eps = std::stod(value);
    else if (key == "embed.follower-method") follower_method = value;
    else if (key == "eval.alpha") eval_alpha = std::stod(value);
    else if (key == "eval.beta") eval_beta = std::stod(value);
    else if (key == "eval.gamma") eval_gamma = std::stod(value);
    else if (key == "eval.in-sample-fraction") eval_in_sample_fraction = std::stod(value);
    else throw std::invalid_argument("config: unknown key '" + key + "'");
}

inline std::string PipelineConfig::serialize() const {
    std::ostringstream out;
    out << "dist = " << dist << '\n';
    out << "kernel.c0 = " << detail::fmt_g(kernel_c0) << '\n';
    out << "kernel.c1 = " << detail::fmt_g(kernel_c1) << '\n';
    out << "kernel.delta = " << detail::fmt_g(kernel_delta) << '\n';
    out << "n = " << n << '\n';
    out << "m = " << m << '\n';
    out << "rho = " << detail::fmt_g(rho) << '\n';
    out << "seed = " << seed << '\n';
    out << "spectral.t = " << detail::fmt_g(spectral_t) << '\n';
    out << "spectral.constant = " << detail::fmt_g(spectral_constant) << '\n';
    out << "spectral.exponent = " << detail::fmt_g(spectral_exponent) << '\n';
    out << "spectral.max-rank = " << spectral_max_rank << '\n';
    out << "spectral.theta = " << spectral_theta << '\n';
    out << "spectral.gap-exponent = " << detail::fmt_g(spectral_gap_exponent) << '\n';
    out << "spectral.degree-normalize = " << (degree_normalize ? 1 : 0) << '\n';
    out << "isomap.mode = " << isomap_mode << '\n';
    out << "isomap.f = " << detail::fmt_g(isomap_f) << '\n';
    out << "isomap.ell = " << detail::fmt_g(isomap_ell) << '\n';
    out << "isomap.percentile = " << detail::fmt_g(isomap_percentile) << '\n';
    out << "isomap.count-fraction = " << detail::fmt_g(isomap_count_fraction) << '\n';
    out << "isomap.gap-ratio = " << detail::fmt_g(isomap_gap_ratio) << '\n';
    out << "isomap.min-cluster = " << isomap_min_cluster << '\n';
    out << "embed.grid-eps = " << detail::fmt_g(embed_grid_eps) << '\n';
    out << "embed.follower-method = " << follower_method << '\n';
    out << "eval.alpha = " << detail::fmt_g(eval_alpha) << '\n';
    out << "eval.beta = " << detail::fmt_g(eval_beta) << '\n';
    out << "eval.gamma = " << detail::fmt_g(eval_gamma) << '\n';
    out << "eval.in-sample-fraction = " << detail::fmt_g(eval_in_sample_fraction) << '\n';
    return out.str();
}

inline PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
    auto in = detail::open_in(path);
    PipelineConfig cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos) return std::string();
            const auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) +
                                        ": expected 'key = value'");
        try {
            cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const std::exception& e) {
            throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return cfg;
}

// ---------------------------------------------------------------------------

namespace streams {
// Independent sub-seeds per randomness consumer, so latent draws and edge
// draws never share counter keys.
inline std::uint64_t latents(std::uint64_t seed) { return rng::hash(seed, 1); }
inline std::uint64_t followers(std::uint64_t seed) { return rng::hash(seed, 2); }
inline std::uint64_t edges(std::uint64_t seed) { return rng::hash(seed, 3); }
}  // namespace streams

struct GenerateResult {
    std::filesystem::path graph_path;
    std::filesystem::path positions_path;
    std::optional<std::filesystem::path> follower_positions_path;
    std::size_t nodes = 0;
    std::size_t edges = 0;
    double average_degree = 0.0;
};

inline GenerateResult run_generate(const PipelineConfig& cfg, const std::filesystem::path& out_dir) {
    if (cfg.n == 0) throw std::invalid_argument("generate: n must be positive");
    std::filesystem::create_directories(out_dir);
    const auto dist = cfg.distribution();
    const auto kernel = cfg.kernel();
    const auto xs = sample_latents(dist, cfg.n, streams::latents(cfg.seed));

    GenerateResult res;
    res.nodes = cfg.n;
    res.positions_path = out_dir / "positions.csv";
    write_positions(res.positions_path, xs);
    res.graph_path = out_dir / "graph.edges";

    if (cfg.m > 0) {
        const auto ys = sample_latents(dist, cfg.m, streams::followers(cfg.seed));
        res.follower_positions_path = out_dir / "follower_positions.csv";
        write_positions(*res.follower_positions_path, ys);
        const auto B = generate_bipartite(xs, ys, kernel, streams::edges(cfg.seed));
        write_edges(res.graph_path, B);
        res.edges = B.edge_count();
        res.average_degree = static_cast<double>(res.edges) / static_cast<double>(cfg.m);
    } else {
        const auto A = generate_simplified(xs, kernel, cfg.effective_rho(), streams::edges(cfg.seed));
        write_edges(res.graph_path, A);
        res.edges = A.edge_count();
        res.average_degree = A.average_degree();
    }
    {
        auto out = detail::open_out(out_dir / "effective.config");
        out << cfg.serialize();
    }
    return res;
}

struct InferResult {
    FeatureEmbedding embedding;
    ClusterDistances isomap;
    std::vector<std::vector<std::size_t>> node_clusters;  // clusters in node-index space
    std::vector<CoordinateRow> coordinates;               // simplified nodes / influencers
    std::vector<CoordinateRow> follower_coordinates;      // bipartite only
    GraphKind kind = GraphKind::Simplified;
    std::size_t node_count = 0;
    std::vector<std::string> warnings;
};

namespace detail {

inline Eigen::MatrixXd mean_cross_gram(const FeatureEmbedding& emb,
                                       const std::vector<std::vector<std::size_t>>& row_clusters) {
    const auto k = static_cast<Eigen::Index>(row_clusters.size());
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(k, k);
    std::vector<Eigen::VectorXd> sums;
    for (const auto& c : row_clusters) {
        Eigen::VectorXd s = Eigen::VectorXd::Zero(emb.rows.cols());
        for (auto i : c) s += emb.rows.row(static_cast<Eigen::Index>(i)).transpose();
        sums.push_back(std::move(s));
    }
    for (Eigen::Index a = 0; a < k; ++a)
        for (Eigen::Index b = 0; b < k; ++b)
            G(a, b) = sums[a].dot(sums[b]) /
                      (static_cast<double>(row_clusters[a].size()) * static_cast<double>(row_clusters[b].size()));
    return G;
}

/// Line-embed every cluster, allocate heuristic offsets between clusters, and
/// assemble the coordinate table over all nodes.
inline void finish_coordinates(InferResult& res, const Kernel& kernel,
                               const std::vector<std::size_t>& row_to_node) {
    const auto& iso = res.isomap;
    res.node_clusters.clear();
    for (const auto& rows : iso.clusters) {
        std::vector<std::size_t> nodes;
        nodes.reserve(rows.size());
        for (auto r : rows) nodes.push_back(row_to_node[r]);
        res.node_clusters.push_back(std::move(nodes));
    }

    Eigen::VectorXd offsets = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(iso.clusters.size()));
    if (iso.clusters.size() > 1)
        offsets = cluster_offsets(mean_cross_gram(res.embedding, iso.clusters), kernel);

    std::vector<CoordinateRow> table(res.node_count);
    for (std::size_t node = 0; node < res.node_count; ++node)
        table[node] = {node, -1, 0.0, "uninformative"};
    for (std::size_t c = 0; c < iso.clusters.size(); ++c) {
        LineEmbedding le = line_embed(iso.distances[c]);
        const double center = le.coordinates.mean();
        for (std::size_t i = 0; i < res.node_clusters[c].size(); ++i) {
            const std::size_t node = res.node_clusters[c][i];
            table[node] = {node, static_cast<int>(c),
                           offsets[static_cast<Eigen::Index>(c)] +
                               (le.coordinates[static_cast<Eigen::Index>(i)] - center),
                           "line"};
        }
    }
    res.coordinates = std::move(table);
}

}  // namespace detail

inline InferResult infer_from_graph(const std::filesystem::path& graph_path, const PipelineConfig& cfg) {
    InferResult res;
    res.kind = peek_graph_kind(graph_path);
    const auto kernel = cfg.kernel();
    std::vector<std::size_t> row_to_node;  // embedding row -> node (degree-normalize may drop rows)

    if (res.kind == GraphKind::Simplified) {
        AdjacencyMatrix A = read_simplified_edges(graph_path);
        res.node_count = A.n;
        const double rho = cfg.rho > 0.0 ? cfg.rho : A.rho;
        ThresholdParams tp = cfg.threshold_params();
        tp.rho = rho;
        if (cfg.degree_normalize) {
            NormalizedMatrix nm = degree_normalize(A.dense());
            row_to_node = nm.kept;
            res.embedding = sm_est_matrix(nm.matrix, rho, tp);
        } else {
            row_to_node.resize(A.n);
            for (std::size_t i = 0; i < A.n; ++i) row_to_node[i] = i;
            res.embedding = sm_est(A, tp);
        }
        if (tp.t_condition_weak(A.n))
            res.warnings.push_back("t^2/rho below log n; rank-selection guarantee is weak at this scale");
        if (res.embedding.rank_fallback)
            res.warnings.push_back("no eigengap met the threshold; fell back to rank 1");
    } else {
        BipartiteMatrix B = read_bipartite_edges(graph_path);
        res.node_count = B.n;
        res.embedding = bipartite_est(B, cfg.theta_value(), cfg.spectral_gap_exponent, cfg.spectral_max_rank);
        row_to_node.resize(B.n);
        for (std::size_t i = 0; i < B.n; ++i) row_to_node[i] = i;
        if (cfg.degree_normalize) res.warnings.push_back("degree-normalize is ignored on the bipartite path");
        if (res.embedding.rank_fallback)
            res.warnings.push_back("no eigengap met the threshold; fell back to rank 1");

        res.isomap = isomap_algo(res.embedding, cfg.isomap_params(), kernel);
        detail::finish_coordinates(res, kernel, row_to_node);

        Eigen::VectorXd x_hat(B.n);
        for (std::size_t i = 0; i < B.n; ++i) {
            const auto& row = res.coordinates[i];
            x_hat[static_cast<Eigen::Index>(i)] = row.method == "uninformative" ? 0.5 : row.coordinate;
        }
        const bool use_mle = cfg.follower_method == "mle";
        if (!use_mle && cfg.follower_method != "neighbor-mean")
            throw std::invalid_argument("config: embed.follower-method must be mle or neighbor-mean");
        res.follower_coordinates.reserve(B.m);
        for (std::size_t j = 0; j < B.m; ++j) {
            std::optional<double> est = use_mle ? follower_mle(B.rows[j], x_hat, kernel, cfg.embed_grid_eps)
                                                : follower_neighbor_mean(B.rows[j], x_hat);
            res.follower_coordinates.push_back({j, -1, est.value_or(0.0),
                                                est ? (use_mle ? std::string("mle") : std::string("neighbor-mean"))
                                                    : std::string("uninformative")});
        }
        return res;
    }

    res.isomap = isomap_algo(res.embedding, cfg.isomap_params(), kernel);
    detail::finish_coordinates(res, kernel, row_to_node);
    return res;
}

inline void write_infer_outputs(const InferResult& res, const PipelineConfig& cfg,
                                const std::filesystem::path& graph_path,
                                const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    write_embedding(out_dir / "embedding.csv", res.embedding);
    write_embedding_meta(out_dir / "embedding.meta", res.embedding);
    write_cluster_manifest(out_dir / "clusters.csv", res.node_clusters);
    for (std::size_t c = 0; c < res.node_clusters.size(); ++c)
        write_distance_matrix(out_dir / ("dist_" + std::to_string(c) + ".csv"), res.node_clusters[c],
                              res.isomap.distances[c]);
    write_coordinates(out_dir / "coordinates.csv", res.coordinates);
    if (res.kind == GraphKind::Bipartite)
        write_coordinates(out_dir / "follower_coordinates.csv", res.follower_coordinates);

    nlohmann::ordered_json meta;
    meta["graph"] = graph_path.string();
    meta["kind"] = res.kind == GraphKind::Simplified ? "simplified" : "bipartite";
    meta["rank"] = res.embedding.rank;
    meta["rank_fallback"] = res.embedding.rank_fallback;
    meta["selected_gap"] = res.embedding.selected_gap;
    meta["gap_threshold"] = res.embedding.threshold;
    meta["theta"] = res.kind == GraphKind::Bipartite ? cfg.spectral_theta : "";
    meta["isomap_mode"] = cfg.isomap_mode;
    meta["isomap_f"] = cfg.isomap_params().f;
    meta["denoise_radius"] = res.isomap.denoise_radius;
    meta["graph_radius"] = res.isomap.graph_radius;
    meta["radius_snapped"] = res.isomap.radius_snapped;
    meta["hop_step"] = res.isomap.step;
    meta["clusters"] = res.node_clusters.size();
    meta["removed_by_denoise"] = res.isomap.removed;
    meta["left_out_small_clusters"] = res.isomap.left_out.size();
    meta["cluster_offsets_heuristic"] = res.node_clusters.size() > 1;
    meta["warnings"] = res.warnings;
    auto out = detail::open_out(out_dir / "infer.json");
    out << meta.dump(2) << '\n';
}

// ---------------------------------------------------------------------------

struct EvalOutputs {
    ApproxReport approx;
    Correlations coordinate_corr;           // gauge-fixed coordinates vs truth, pooled
    double pipeline_pair_pearson = 0.0;     // D-hat vs |x_i - x_j| over in-cluster pairs
    bool pipeline_pair_defined = false;
    double modularity_pair_pearson = 0.0;   // 0/1 partition distance on the same pairs
    bool modularity_pair_defined = false;
    bool modularity_has_structure = true;
    double pipeline_accuracy = 0.0;         // threshold classification on coordinates
    double mds_accuracy = 0.0;              // same on 1-D classical MDS of hop distances
    bool classification_defined = false;
};

namespace detail {

inline std::vector<int> truth_labels(const LatentSample& truth, const LatentDistribution& dist) {
    std::vector<int> labels(truth.size());
    if (dist.pieces().size() > 1) {
        for (std::size_t i = 0; i < truth.size(); ++i) labels[i] = dist.interval_index(truth[i]) > 0 ? 1 : 0;
    } else {
        for (std::size_t i = 0; i < truth.size(); ++i) labels[i] = truth[i] > 0.5 ? 1 : 0;
    }
    return labels;
}

}  // namespace detail

/// Metrics for a finished inference run against ground truth. The baselines
/// need the realized graph; pass an empty path to skip them.
inline EvalOutputs evaluate_inference(const LatentSample& truth, const LatentDistribution& dist,
                                      const std::vector<std::vector<std::size_t>>& clusters,
                                      const std::vector<Eigen::MatrixXd>& distances,
                                      const std::vector<CoordinateRow>& coordinates,
                                      const PipelineConfig& cfg,
                                      const AdjacencyMatrix* graph,
                                      std::vector<double>* scatter_true = nullptr,
                                      std::vector<double>* scatter_est = nullptr) {
    EvalOutputs out;
    out.approx = check_approximation(truth, dist, clusters, distances, cfg.eval_alpha, cfg.eval_beta,
                                     cfg.eval_gamma);

    // gauge-fixed coordinates: per-cluster sign and offset chosen against truth
    std::vector<double> est_pool, truth_pool;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        std::vector<double> e, t;
        for (auto node : clusters[c]) {
            e.push_back(coordinates[node].coordinate);
            t.push_back(truth[node]);
        }
        double me = 0, mt = 0;
        for (std::size_t i = 0; i < e.size(); ++i) {
            me += e[i];
            mt += t[i];
        }
        me /= static_cast<double>(e.size());
        mt /= static_cast<double>(t.size());
        double cov = 0;
        for (std::size_t i = 0; i < e.size(); ++i) cov += (e[i] - me) * (t[i] - mt);
        const double sign = cov < 0 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < e.size(); ++i) {
            est_pool.push_back(sign * (e[i] - me) + mt);
            truth_pool.push_back(t[i]);
        }
    }
    if (est_pool.size() >= 2) out.coordinate_corr = correlations(est_pool, truth_pool);

    // pairwise distance quality over in-cluster pairs, shared with baselines
    ModularityPartition mod;
    if (graph != nullptr && graph->edge_count() > 0) {
        mod = modularity_baseline(*graph);
        out.modularity_has_structure = mod.has_structure;
    }
    std::vector<double> dt, de, dm;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        const auto& nodes = clusters[c];
        for (std::size_t a = 0; a < nodes.size(); ++a)
            for (std::size_t b = a + 1; b < nodes.size(); ++b) {
                dt.push_back(std::abs(truth[nodes[a]] - truth[nodes[b]]));
                de.push_back(distances[c](static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)));
                if (graph != nullptr && !mod.labels.empty())
                    dm.push_back(mod.labels[nodes[a]] == mod.labels[nodes[b]] ? 0.0 : 1.0);
            }
    }
    if (dt.size() >= 2) {
        out.pipeline_pair_pearson = detail::pearson_of(de, dt, out.pipeline_pair_defined);
        if (!dm.empty()) out.modularity_pair_pearson = detail::pearson_of(dm, dt, out.modularity_pair_defined);
    }
    if (scatter_true != nullptr && scatter_est != nullptr) {
        const std::size_t cap = 100000;
        const double keep = dt.size() <= cap ? 1.0 : static_cast<double>(cap) / static_cast<double>(dt.size());
        for (std::size_t i = 0; i < dt.size(); ++i)
            if (keep >= 1.0 || rng::uniform(0xCA77E8, i) < keep) {
                scatter_true->push_back(dt[i]);
                scatter_est->push_back(de[i]);
            }
    }

    // binary classification: pipeline coordinates vs 1-D MDS baseline
    auto labels = detail::truth_labels(truth, dist);
    std::vector<double> est_all(truth.size(), 0.0);
    for (const auto& row : coordinates)
        if (row.index < est_all.size()) est_all[row.index] = row.coordinate;
    try {
        out.pipeline_accuracy = classify_threshold(est_all, labels, cfg.eval_in_sample_fraction).out_sample_accuracy;
        if (graph != nullptr) {
            MdsResult mds = mds_baseline(*graph, 1);
            std::vector<double> mds_est(truth.size());
            for (std::size_t i = 0; i < truth.size(); ++i) mds_est[i] = mds.coordinates(static_cast<Eigen::Index>(i), 0);
            out.mds_accuracy = classify_threshold(mds_est, labels, cfg.eval_in_sample_fraction).out_sample_accuracy;
        }
        out.classification_defined = true;
    } catch (const std::invalid_argument&) {
        out.classification_defined = false;  // single-class split
    }
    return out;
}

inline nlohmann::ordered_json eval_report_json(const EvalOutputs& ev) {
    nlohmann::ordered_json j;
    j["approximation"]["alpha_achieved"] = ev.approx.alpha_achieved;
    j["approximation"]["beta_used"] = ev.approx.beta_used;
    j["approximation"]["gamma_used"] = ev.approx.gamma_used;
    j["approximation"]["clusters_in_intervals"] = ev.approx.clusters_in_intervals;
    j["approximation"]["purity"] = ev.approx.purity;
    j["approximation"]["interval"] = ev.approx.interval;
    j["approximation"]["g_sizes"] = ev.approx.g_sizes;
    j["approximation"]["pass"] = ev.approx.pass;
    j["correlations"]["pearson"] = ev.coordinate_corr.pearson;
    j["correlations"]["spearman"] = ev.coordinate_corr.spearman;
    j["correlations"]["kendall"] = ev.coordinate_corr.kendall;
    j["correlations"]["pearson_defined"] = ev.coordinate_corr.pearson_defined;
    j["pairs"]["pipeline_pearson"] = ev.pipeline_pair_pearson;
    j["pairs"]["pipeline_defined"] = ev.pipeline_pair_defined;
    j["pairs"]["modularity_pearson"] = ev.modularity_pair_pearson;
    j["pairs"]["modularity_defined"] = ev.modularity_pair_defined;
    j["pairs"]["modularity_has_structure"] = ev.modularity_has_structure;
    j["classification"]["defined"] = ev.classification_defined;
    j["classification"]["pipeline_accuracy"] = ev.pipeline_accuracy;
    j["classification"]["mds_accuracy"] = ev.mds_accuracy;
    return j;
}

inline EvalOutputs run_eval(const std::filesystem::path& truth_path,
                            const std::filesystem::path& inference_dir, const PipelineConfig& cfg,
                            const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    const LatentSample truth = read_positions(truth_path);
    const auto dist = cfg.distribution();
    auto clusters = read_cluster_manifest(inference_dir / "clusters.csv");
    std::vector<Eigen::MatrixXd> distances;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
        auto [nodes, D] = read_distance_matrix(inference_dir / ("dist_" + std::to_string(c) + ".csv"));
        if (nodes != clusters[c]) throw io_error("eval: cluster manifest and distance matrix disagree");
        distances.push_back(std::move(D));
    }
    auto coordinates = read_coordinates(inference_dir / "coordinates.csv");
    for (const auto& row : coordinates)
        if (row.index >= truth.size()) throw io_error("eval: coordinate index outside the truth file");
    std::vector<CoordinateRow> full(truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i) full[i] = {i, -1, 0.0, "uninformative"};
    for (const auto& row : coordinates) full[row.index] = row;

    std::optional<AdjacencyMatrix> graph;
    {
        std::ifstream meta_in(inference_dir / "infer.json");
        if (meta_in) {
            nlohmann::json meta = nlohmann::json::parse(meta_in);
            if (meta.value("kind", "") == "simplified") {
                const std::string gp = meta.value("graph", "");
                if (!gp.empty() && std::filesystem::exists(gp)) graph = read_simplified_edges(gp);
            }
        }
    }

    std::vector<double> scatter_true, scatter_est;
    EvalOutputs ev = evaluate_inference(truth, dist, clusters, distances, full, cfg,
                                        graph ? &*graph : nullptr, &scatter_true, &scatter_est);
    write_scatter(out_dir / "scatter.csv", scatter_true, scatter_est);
    auto out = detail::open_out(out_dir / "report.json");
    out << eval_report_json(ev).dump(2) << '\n';
    return ev;
}

struct PipelineOutputs {
    GenerateResult gen;
    EvalOutputs eval;
};

/// generate -> infer -> eval under one output directory with a single seed.
inline PipelineOutputs run_pipeline(const PipelineConfig& cfg, const std::filesystem::path& out_dir) {
    PipelineOutputs out;
    out.gen = run_generate(cfg, out_dir / "data");
    InferResult inf = infer_from_graph(out.gen.graph_path, cfg);
    write_infer_outputs(inf, cfg, out.gen.graph_path, out_dir / "inference");
    out.eval = run_eval(out.gen.positions_path, out_dir / "inference", cfg, out_dir / "eval");
    return out;
}

}  // namespace lsi
