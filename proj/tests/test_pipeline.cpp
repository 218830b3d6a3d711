#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "lsi/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag)
        : path(fs::temp_directory_path() / ("lsi_pl_" + tag + "_" + std::to_string(::getpid()))) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// recursive byte comparison of two directory trees
void check_trees_identical(const fs::path& a, const fs::path& b) {
    std::vector<fs::path> fa, fb;
    for (auto& e : fs::recursive_directory_iterator(a))
        if (e.is_regular_file()) fa.push_back(fs::relative(e.path(), a));
    for (auto& e : fs::recursive_directory_iterator(b))
        if (e.is_regular_file()) fb.push_back(fs::relative(e.path(), b));
    std::sort(fa.begin(), fa.end());
    std::sort(fb.begin(), fb.end());
    REQUIRE(fa == fb);
    for (const auto& rel : fa) CHECK(slurp(a / rel) == slurp(b / rel));
}

lsi::PipelineConfig small_sbm() {
    lsi::PipelineConfig cfg;
    cfg.dist = "atoms:0:0.5,1:0.5";
    cfg.kernel_c0 = 0.5;
    cfg.kernel_c1 = 0.5;
    cfg.n = 256;
    cfg.rho = 96.0;
    cfg.seed = 5;
    return cfg;
}

}  // namespace

TEST_CASE("config parsing, overrides, and validation") {
    TempDir tmp("cfg");
    {
        std::ofstream out(tmp.path / "a.config");
        out << "# comment\n"
            << "dist = atoms:0:0.5,1:0.5\n"
            << "n = 300\n"
            << "rho = 40\n"
            << "isomap.mode = theory\n"
            << "isomap.f = 9\n";
    }
    auto cfg = lsi::PipelineConfig::load(tmp.path / "a.config");
    CHECK(cfg.n == 300);
    CHECK(cfg.isomap_mode == "theory");
    CHECK(cfg.isomap_params().f == 9.0);
    CHECK(cfg.distribution().pieces().size() == 2);

    cfg.set("seed", "17");
    CHECK(cfg.seed == 17);
    CHECK_THROWS_AS(cfg.set("no.such.key", "1"), std::invalid_argument);

    {
        std::ofstream out(tmp.path / "b.config");
        out << "n = 100\nbogus-key = 3\n";
    }
    try {
        lsi::PipelineConfig::load(tmp.path / "b.config");
        FAIL("expected a validation error");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find(":2:") != std::string::npos);
    }

    // effective rho defaults to ceil(log2(n)^2)
    lsi::PipelineConfig d;
    d.n = 1024;
    CHECK(d.effective_rho() == 100.0);
    d.n = 2000;
    CHECK(d.effective_rho() == 121.0);
}

TEST_CASE("generate is deterministic byte for byte") {
    TempDir ta("gen1"), tb("gen2");
    auto cfg = small_sbm();
    auto r1 = lsi::run_generate(cfg, ta.path);
    auto r2 = lsi::run_generate(cfg, tb.path);
    CHECK(r1.edges == r2.edges);
    check_trees_identical(ta.path, tb.path);

    lsi::PipelineConfig zero = cfg;
    zero.n = 0;
    CHECK_THROWS_AS(lsi::run_generate(zero, ta.path / "z"), std::invalid_argument);
}

TEST_CASE("infer dispatches on the header and records metadata") {
    TempDir tmp("infer");
    auto cfg = small_sbm();
    auto gen = lsi::run_generate(cfg, tmp.path / "data");
    auto inf = lsi::infer_from_graph(gen.graph_path, cfg);
    CHECK(inf.kind == lsi::GraphKind::Simplified);
    CHECK(inf.embedding.rank >= 1);
    lsi::write_infer_outputs(inf, cfg, gen.graph_path, tmp.path / "inference");
    CHECK(fs::exists(tmp.path / "inference" / "clusters.csv"));
    CHECK(fs::exists(tmp.path / "inference" / "coordinates.csv"));

    // bipartite path: theta lands in the metadata
    lsi::PipelineConfig bip;
    bip.dist = "uniform";
    bip.n = 60;
    bip.m = 1500;
    bip.seed = 9;
    bip.isomap_min_cluster = 3;
    bip.follower_method = "neighbor-mean";
    auto bgen = lsi::run_generate(bip, tmp.path / "bdata");
    auto binf = lsi::infer_from_graph(bgen.graph_path, bip);
    CHECK(binf.kind == lsi::GraphKind::Bipartite);
    CHECK(binf.follower_coordinates.size() == 1500);
    lsi::write_infer_outputs(binf, bip, bgen.graph_path, tmp.path / "binference");
    auto meta = slurp(tmp.path / "binference" / "infer.json");
    CHECK(meta.find("\"theta\": \"remove\"") != std::string::npos);
    CHECK(fs::exists(tmp.path / "binference" / "follower_coordinates.csv"));

    // malformed header is a parse error naming the line
    {
        std::ofstream out(tmp.path / "junk.edges");
        out << "garbage\n";
    }
    CHECK_THROWS_AS(lsi::infer_from_graph(tmp.path / "junk.edges", cfg), lsi::io_error);
}

TEST_CASE("eval of ground truth passes at alpha zero") {
    TempDir tmp("selfeval");
    auto cfg = small_sbm();
    auto gen = lsi::run_generate(cfg, tmp.path / "data");
    auto truth = lsi::read_positions(gen.positions_path);

    // hand the checker the exact distances as if the pipeline produced them
    std::vector<std::vector<std::size_t>> clusters(2);
    for (std::size_t i = 0; i < truth.size(); ++i) clusters[truth[i] > 0.5 ? 1 : 0].push_back(i);
    std::vector<Eigen::MatrixXd> D;
    for (const auto& c : clusters) D.push_back(Eigen::MatrixXd::Zero(c.size(), c.size()));
    auto rep = lsi::check_approximation(truth, cfg.distribution(), clusters, D, 0.0, 0.0, 0.0);
    CHECK(rep.pass);
    CHECK(rep.alpha_achieved == 0.0);
}

TEST_CASE("full pipeline runs end to end on a small blockmodel") {
    TempDir tmp("full");
    auto cfg = small_sbm();
    auto out = lsi::run_pipeline(cfg, tmp.path);
    CHECK(fs::exists(tmp.path / "eval" / "report.json"));
    CHECK(fs::exists(tmp.path / "eval" / "scatter.csv"));
    // the small blockmodel should already separate cleanly
    CHECK(out.eval.approx.purity.size() >= 1);
    for (double p : out.eval.approx.purity) CHECK(p >= 0.95);

    // missing truth file surfaces as an I/O error
    CHECK_THROWS_AS(lsi::run_eval(tmp.path / "nope.csv", tmp.path / "inference", cfg, tmp.path / "eval2"),
                    lsi::io_error);
}
