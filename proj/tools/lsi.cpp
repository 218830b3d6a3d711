// Command-line front end: generate latent-space graphs, infer positions,
// evaluate against ground truth. See README for the config schema.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include "lsi/pipeline.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

struct CommonFlags {
    std::string config_path;
    std::string out_dir = "out";
    std::string seed;
    std::string mode;
    std::string theta;
    std::string ell;
    std::string gap_exponent;
    bool degree_normalize = false;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool need_config = true) {
    auto* opt = cmd->add_option("--config", f.config_path, "key=value config file");
    if (need_config) opt->required();
    cmd->add_option("--out", f.out_dir, "output directory");
    cmd->add_option("--seed", f.seed, "override the config seed");
    cmd->add_option("--mode", f.mode, "isomap mode: theory | calibrated");
    cmd->add_option("--theta", f.theta, "bipartite diagonal shrinkage exponent (or 'remove')");
    cmd->add_option("--ell", f.ell, "isomap neighbor-graph constant");
    cmd->add_option("--gap-exponent", f.gap_exponent, "bipartite rank-selection gap exponent");
    cmd->add_flag("--degree-normalize", f.degree_normalize, "apply D^{-1/2} A D^{-1/2} before the spectral step");
}

lsi::PipelineConfig load_config(const CommonFlags& f) {
    lsi::PipelineConfig cfg =
        f.config_path.empty() ? lsi::PipelineConfig{} : lsi::PipelineConfig::load(f.config_path);
    if (!f.seed.empty()) cfg.set("seed", f.seed);
    if (!f.mode.empty()) cfg.set("isomap.mode", f.mode);
    if (!f.theta.empty()) cfg.set("spectral.theta", f.theta);
    if (!f.ell.empty()) cfg.set("isomap.ell", f.ell);
    if (!f.gap_exponent.empty()) cfg.set("spectral.gap-exponent", f.gap_exponent);
    if (f.degree_normalize) cfg.set("spectral.degree-normalize", "1");
    return cfg;
}

int dispatch(int argc, char** argv) {
    CLI::App app{"latent-space graph generation and inference"};
    app.require_subcommand(1);

    CommonFlags gen_flags, infer_flags, eval_flags, pipe_flags;
    std::string graph_path, truth_path, inference_dir;

    auto* gen = app.add_subcommand("generate", "sample a graph and its ground-truth positions");
    add_common(gen, gen_flags);

    auto* infer = app.add_subcommand("infer", "estimate latent structure from an edge list");
    infer->add_option("--graph", graph_path, "edge-list file (model chosen by its header)")->required();
    add_common(infer, infer_flags);

    auto* ev = app.add_subcommand("eval", "score an inference run against ground truth");
    ev->add_option("--truth", truth_path, "ground-truth positions CSV")->required();
    ev->add_option("--inference", inference_dir, "directory written by 'infer'")->required();
    add_common(ev, eval_flags);

    auto* pipe = app.add_subcommand("pipeline", "generate + infer + eval in one run");
    add_common(pipe, pipe_flags);

    CLI11_PARSE(app, argc, argv);

    if (gen->parsed()) {
        auto cfg = load_config(gen_flags);
        auto res = lsi::run_generate(cfg, gen_flags.out_dir);
        std::printf("generated %s: n=%zu edges=%zu avg_degree=%.3f\n", res.graph_path.string().c_str(),
                    res.nodes, res.edges, res.average_degree);
        return 0;
    }
    if (infer->parsed()) {
        auto cfg = load_config(infer_flags);
        auto res = lsi::infer_from_graph(graph_path, cfg);
        lsi::write_infer_outputs(res, cfg, graph_path, infer_flags.out_dir);
        std::printf("inferred %s: kind=%s rank=%d clusters=%zu removed=%zu\n", graph_path.c_str(),
                    res.kind == lsi::GraphKind::Simplified ? "simplified" : "bipartite",
                    res.embedding.rank, res.node_clusters.size(), res.isomap.removed);
        for (const auto& w : res.warnings) std::printf("warning: %s\n", w.c_str());
        return 0;
    }
    if (ev->parsed()) {
        auto cfg = load_config(eval_flags);
        auto res = lsi::run_eval(truth_path, inference_dir, cfg, eval_flags.out_dir);
        std::printf("eval: approx_pass=%d alpha_achieved=%.4f pearson=%.4f spearman=%.4f\n",
                    res.approx.pass ? 1 : 0, res.approx.alpha_achieved, res.coordinate_corr.pearson,
                    res.coordinate_corr.spearman);
        return 0;
    }
    // pipeline
    auto cfg = load_config(pipe_flags);
    auto res = lsi::run_pipeline(cfg, pipe_flags.out_dir);
    std::printf("pipeline: edges=%zu approx_pass=%d alpha_achieved=%.4f pair_pearson=%.4f spearman=%.4f\n",
                res.gen.edges, res.eval.approx.pass ? 1 : 0, res.eval.approx.alpha_achieved,
                res.eval.pipeline_pair_pearson, res.eval.coordinate_corr.spearman);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const lsi::io_error& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "invalid input: %s\n", e.what());
        return kExitValidation;
    } catch (const std::runtime_error& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
