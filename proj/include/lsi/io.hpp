#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lsi/graphgen.hpp"
#include "lsi/latent.hpp"
#include "lsi/spectral.hpp"

namespace lsi {

struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.15g", v);
    return buf;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open for writing: " + path.string());
    return out;
}

inline std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open for reading: " + path.string());
    return in;
}

inline std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

[[noreturn]] inline void parse_fail(const std::filesystem::path& path, std::size_t lineno,
                                    const std::string& what) {
    throw io_error(path.string() + ":" + std::to_string(lineno) + ": " + what);
}

}  // namespace detail

// -------- latent positions: header `index,position`, >= 12 significant digits

inline void write_positions(const std::filesystem::path& path, const LatentSample& sample) {
    auto out = detail::open_out(path);
    out << "index,position\n";
    for (std::size_t i = 0; i < sample.size(); ++i)
        out << i << ',' << detail::fmt_g(sample[i]) << '\n';
}

inline LatentSample read_positions(const std::filesystem::path& path) {
    auto in = detail::open_in(path);
    std::string line;
    if (!std::getline(in, line) || line != "index,position")
        detail::parse_fail(path, 1, "expected header 'index,position'");
    LatentSample s;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto parts = detail::split(line, ',');
        if (parts.size() != 2) detail::parse_fail(path, lineno, "expected 'index,position'");
        if (std::stoull(parts[0]) != s.positions.size())
            detail::parse_fail(path, lineno, "indices must be consecutive from 0");
        s.positions.push_back(std::stod(parts[1]));
    }
    return s;
}

// -------- edge lists: `# simplified n=<n> rho=<rho>` or `# bipartite m=<m> n=<n>`,
// one `i<TAB>j` per line, zero-based, simplified graphs list i<j once.

inline void write_edges(const std::filesystem::path& path, const AdjacencyMatrix& A) {
    auto out = detail::open_out(path);
    out << "# simplified n=" << A.n << " rho=" << detail::fmt_g(A.rho) << '\n';
    for (std::size_t i = 0; i < A.n; ++i)
        for (auto j : A.neighbors[i])
            if (i < j) out << i << '\t' << j << '\n';
}

inline void write_edges(const std::filesystem::path& path, const BipartiteMatrix& B) {
    auto out = detail::open_out(path);
    out << "# bipartite m=" << B.m << " n=" << B.n << '\n';
    for (std::size_t j = 0; j < B.m; ++j)
        for (auto i : B.rows[j]) out << j << '\t' << i << '\n';
}

enum class GraphKind { Simplified, Bipartite };

inline GraphKind peek_graph_kind(const std::filesystem::path& path) {
    auto in = detail::open_in(path);
    std::string line;
    if (!std::getline(in, line)) detail::parse_fail(path, 1, "empty file");
    if (line.rfind("# simplified ", 0) == 0) return GraphKind::Simplified;
    if (line.rfind("# bipartite ", 0) == 0) return GraphKind::Bipartite;
    detail::parse_fail(path, 1, "unrecognized header: '" + line + "'");
}

inline AdjacencyMatrix read_simplified_edges(const std::filesystem::path& path) {
    auto in = detail::open_in(path);
    std::string line;
    std::getline(in, line);
    std::size_t n = 0;
    double rho = 0.0;
    if (std::sscanf(line.c_str(), "# simplified n=%zu rho=%lf", &n, &rho) != 2)
        detail::parse_fail(path, 1, "expected '# simplified n=<n> rho=<rho>'");
    AdjacencyMatrix A;
    A.n = n;
    A.rho = rho;
    A.neighbors.resize(n);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::size_t i = 0, j = 0;
        if (std::sscanf(line.c_str(), "%zu\t%zu", &i, &j) != 2)
            detail::parse_fail(path, lineno, "expected 'i<TAB>j'");
        if (i >= j || j >= n) detail::parse_fail(path, lineno, "edge endpoints must satisfy i < j < n");
        A.neighbors[i].push_back(static_cast<std::uint32_t>(j));
        A.neighbors[j].push_back(static_cast<std::uint32_t>(i));
    }
    for (auto& adj : A.neighbors) std::sort(adj.begin(), adj.end());
    return A;
}

inline BipartiteMatrix read_bipartite_edges(const std::filesystem::path& path) {
    auto in = detail::open_in(path);
    std::string line;
    std::getline(in, line);
    std::size_t m = 0, n = 0;
    if (std::sscanf(line.c_str(), "# bipartite m=%zu n=%zu", &m, &n) != 2)
        detail::parse_fail(path, 1, "expected '# bipartite m=<m> n=<n>'");
    BipartiteMatrix B;
    B.m = m;
    B.n = n;
    B.rows.resize(m);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::size_t j = 0, i = 0;
        if (std::sscanf(line.c_str(), "%zu\t%zu", &j, &i) != 2)
            detail::parse_fail(path, lineno, "expected 'j<TAB>i'");
        if (j >= m || i >= n) detail::parse_fail(path, lineno, "edge endpoints out of range");
        B.rows[j].push_back(static_cast<std::uint32_t>(i));
    }
    for (auto& r : B.rows) std::sort(r.begin(), r.end());
    return B;
}

// -------- feature embedding: `index,z1,...,zd` + key=value sidecar

inline void write_embedding(const std::filesystem::path& path, const FeatureEmbedding& emb) {
    auto out = detail::open_out(path);
    out << "index";
    for (int j = 1; j <= emb.rank; ++j) out << ",z" << j;
    out << '\n';
    for (Eigen::Index i = 0; i < emb.rows.rows(); ++i) {
        out << i;
        for (Eigen::Index j = 0; j < emb.rows.cols(); ++j) out << ',' << detail::fmt_g(emb.rows(i, j));
        out << '\n';
    }
}

inline void write_embedding_meta(const std::filesystem::path& path, const FeatureEmbedding& emb) {
    auto out = detail::open_out(path);
    out << "rank=" << emb.rank << '\n'
        << "scale=" << detail::fmt_g(emb.scale) << '\n'
        << "source=" << (emb.source == EmbeddingSource::Simplified ? "simplified" : "bipartite") << '\n'
        << "rank_fallback=" << (emb.rank_fallback ? 1 : 0) << '\n'
        << "selected_gap=" << detail::fmt_g(emb.selected_gap) << '\n'
        << "threshold=" << detail::fmt_g(emb.threshold) << '\n';
}

inline Eigen::MatrixXd read_embedding(const std::filesystem::path& path) {
    auto in = detail::open_in(path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("index", 0) != 0)
        detail::parse_fail(path, 1, "expected 'index,z1,...' header");
    const auto cols = detail::split(line, ',').size() - 1;
    std::vector<std::vector<double>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto parts = detail::split(line, ',');
        if (parts.size() != cols + 1) detail::parse_fail(path, lineno, "column count mismatch");
        std::vector<double> row(cols);
        for (std::size_t j = 0; j < cols; ++j) row[j] = std::stod(parts[j + 1]);
        rows.push_back(std::move(row));
    }
    Eigen::MatrixXd M(rows.size(), cols);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols; ++j) M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return M;
}

// -------- cluster manifest `index,cluster` and per-cluster dense distance CSVs
// with row/column headers equal to the original node indices

inline void write_cluster_manifest(const std::filesystem::path& path,
                                   const std::vector<std::vector<std::size_t>>& clusters) {
    auto out = detail::open_out(path);
    out << "index,cluster\n";
    for (std::size_t c = 0; c < clusters.size(); ++c)
        for (auto i : clusters[c]) out << i << ',' << c << '\n';
}

inline std::vector<std::vector<std::size_t>> read_cluster_manifest(const std::filesystem::path& path) {
    auto in = detail::open_in(path);
    std::string line;
    if (!std::getline(in, line) || line != "index,cluster")
        detail::parse_fail(path, 1, "expected header 'index,cluster'");
    std::vector<std::vector<std::size_t>> clusters;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto parts = detail::split(line, ',');
        if (parts.size() != 2) detail::parse_fail(path, lineno, "expected 'index,cluster'");
        const std::size_t idx = std::stoull(parts[0]);
        const std::size_t c = std::stoull(parts[1]);
        if (c >= clusters.size()) clusters.resize(c + 1);
        clusters[c].push_back(idx);
    }
    return clusters;
}

inline void write_distance_matrix(const std::filesystem::path& path,
                                  const std::vector<std::size_t>& nodes, const Eigen::MatrixXd& D) {
    auto out = detail::open_out(path);
    for (auto i : nodes) out << ',' << i;
    out << '\n';
    for (std::size_t r = 0; r < nodes.size(); ++r) {
        out << nodes[r];
        for (std::size_t c = 0; c < nodes.size(); ++c)
            out << ',' << detail::fmt_g(D(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
        out << '\n';
    }
}

inline std::pair<std::vector<std::size_t>, Eigen::MatrixXd> read_distance_matrix(
    const std::filesystem::path& path) {
    auto in = detail::open_in(path);
    std::string line;
    if (!std::getline(in, line)) detail::parse_fail(path, 1, "empty file");
    auto header = detail::split(line, ',');
    std::vector<std::size_t> nodes;
    for (std::size_t i = 1; i < header.size(); ++i) nodes.push_back(std::stoull(header[i]));
    Eigen::MatrixXd D(nodes.size(), nodes.size());
    std::size_t lineno = 1;
    for (std::size_t r = 0; r < nodes.size(); ++r) {
        if (!std::getline(in, line)) detail::parse_fail(path, lineno + 1, "truncated distance matrix");
        ++lineno;
        auto parts = detail::split(line, ',');
        if (parts.size() != nodes.size() + 1) detail::parse_fail(path, lineno, "column count mismatch");
        for (std::size_t c = 0; c < nodes.size(); ++c)
            D(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = std::stod(parts[c + 1]);
    }
    return {nodes, D};
}

// -------- final coordinates `index,cluster,coordinate,method`

struct CoordinateRow {
    std::size_t index = 0;
    int cluster = -1;  // -1: not clustered
    double coordinate = 0.0;
    std::string method;  // line | mle | neighbor-mean | uninformative
};

inline void write_coordinates(const std::filesystem::path& path, const std::vector<CoordinateRow>& rows) {
    auto out = detail::open_out(path);
    out << "index,cluster,coordinate,method\n";
    for (const auto& r : rows)
        out << r.index << ',' << r.cluster << ',' << detail::fmt_g(r.coordinate) << ',' << r.method << '\n';
}

inline std::vector<CoordinateRow> read_coordinates(const std::filesystem::path& path) {
    auto in = detail::open_in(path);
    std::string line;
    if (!std::getline(in, line) || line != "index,cluster,coordinate,method")
        detail::parse_fail(path, 1, "expected header 'index,cluster,coordinate,method'");
    std::vector<CoordinateRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto parts = detail::split(line, ',');
        if (parts.size() != 4) detail::parse_fail(path, lineno, "expected 4 columns");
        rows.push_back({std::stoull(parts[0]), std::stoi(parts[1]), std::stod(parts[2]), parts[3]});
    }
    return rows;
}

inline void write_scatter(const std::filesystem::path& path, const std::vector<double>& true_d,
                          const std::vector<double>& est_d) {
    auto out = detail::open_out(path);
    out << "true_distance,estimated_distance\n";
    for (std::size_t i = 0; i < true_d.size(); ++i)
        out << detail::fmt_g(true_d[i]) << ',' << detail::fmt_g(est_d[i]) << '\n';
}

}  // namespace lsi
