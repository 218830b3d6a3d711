#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "lsi/eigensolve.hpp"
#include "lsi/graphgen.hpp"
#include "lsi/quadrature.hpp"

using lsi::Kernel;
using lsi::LatentDistribution;

namespace {

double opnorm(const Eigen::MatrixXd& M) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
    return std::max(std::abs(es.eigenvalues()[0]), std::abs(es.eigenvalues()[M.rows() - 1]));
}

}  // namespace

TEST_CASE("complete graph when every probability is one") {
    // all positions equal and rho = n makes kappa * rho / n = 1 everywhere
    auto sample = lsi::sample_latents(LatentDistribution::atoms({{0.5, 1.0}}), 12, 1);
    auto A = lsi::generate_simplified(sample, Kernel(1.0, 1.0, 2.0), 12.0, 3);
    CHECK(A.edge_count() == 12 * 11 / 2);
    for (const auto& adj : A.neighbors) CHECK(adj.size() == 11);
}

TEST_CASE("expected edge count shrinks with rho") {
    auto sample = lsi::sample_latents(LatentDistribution::uniform(), 400, 2);
    Kernel k(1.0, 1.0, 2.0);
    // E[edges] = rho * n * E kappa / 2; with rho = 0.05 that is ~ 8.8 edges
    auto A = lsi::generate_simplified(sample, k, 0.05, 4);
    const double expected = 0.05 * 400.0 * 0.8776491462349513 / 2.0;
    CHECK(static_cast<double>(A.edge_count()) < expected + 6.0 * std::sqrt(expected));
    CHECK(A.rho == 0.05);
}

TEST_CASE("generation is deterministic and validates probabilities") {
    auto sample = lsi::sample_latents(LatentDistribution::uniform(), 60, 8);
    Kernel k(1.0, 1.0, 2.0);
    auto A1 = lsi::generate_simplified(sample, k, 10.0, 5);
    auto A2 = lsi::generate_simplified(sample, k, 10.0, 5);
    CHECK(A1.neighbors == A2.neighbors);
    auto A3 = lsi::generate_simplified(sample, k, 10.0, 6);
    CHECK(A1.neighbors != A3.neighbors);

    // kappa_max * rho / n = 2 * 61 / 60 > 1 must be rejected
    CHECK_THROWS_AS(lsi::generate_simplified(sample, Kernel(2.0, 1.0, 2.0), 61.0, 5),
                    std::invalid_argument);
}

TEST_CASE("realized average degree tracks the quadrature expectation") {
    const std::size_t n = 2000;
    auto sample = lsi::sample_latents(LatentDistribution::uniform(), n, 7);
    Kernel k(1.0, 1.0, 2.0);
    const double lg = std::log2(static_cast<double>(n));
    const double rho = std::ceil(lg * lg);

    auto rule = lsi::make_quadrature(LatentDistribution::uniform(), 256);
    double ek = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i)
        for (std::size_t j = 0; j < rule.size(); ++j)
            ek += rule.weights[i] * rule.weights[j] * k(rule.nodes[i], rule.nodes[j]);
    CHECK(ek == Catch::Approx(0.8776491462349513).margin(1e-9));

    auto A = lsi::generate_simplified(sample, k, rho, 11);
    const double expected_degree = rho * ek;
    CHECK(std::abs(A.average_degree() - expected_degree) / expected_degree < 0.15);
}

TEST_CASE("bipartite generation: unit out-degree under a constant kernel") {
    // all influencers and followers at the same atom -> kappa identically 1,
    // so each follower links each influencer with probability 1/n
    auto atom = LatentDistribution::atoms({{0.5, 1.0}});
    auto xs = lsi::sample_latents(atom, 50, 1);
    auto ys = lsi::sample_latents(atom, 20000, 2);
    auto B = lsi::generate_bipartite(xs, ys, Kernel(1.0, 1.0, 2.0), 9);
    const double mean_degree = static_cast<double>(B.edge_count()) / 20000.0;
    CHECK(std::abs(mean_degree - 1.0) < 0.05);  // sd of the mean ~ 0.007

    auto B2 = lsi::generate_bipartite(xs, ys, Kernel(1.0, 1.0, 2.0), 9);
    CHECK(B.rows == B2.rows);

    CHECK_THROWS_AS(lsi::generate_bipartite(xs, ys, Kernel(60.0, 1.0, 2.0), 9),
                    std::invalid_argument);
}

TEST_CASE("bipartite column sums match the quadrature expectation") {
    const std::size_t n = 300;
    const std::size_t m = n * 186;
    auto dist = LatentDistribution::uniform();
    auto xs = lsi::sample_latents(dist, n, 21);
    auto ys = lsi::sample_latents(dist, m, 22);
    Kernel k(1.0, 1.0, 2.0);
    auto B = lsi::generate_bipartite(xs, ys, k, 23);

    std::vector<double> colsum(n, 0.0);
    for (const auto& r : B.rows)
        for (auto i : r) colsum[i] += 1.0;

    auto rule = lsi::make_quadrature(dist, 256);
    std::size_t within = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double ek = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) ek += rule.weights[q] * k(rule.nodes[q], xs[i]);
        const double expect = static_cast<double>(m) * ek / static_cast<double>(n);
        within += std::abs(colsum[i] - expect) / expect <= 0.20;
    }
    CHECK(static_cast<double>(within) / static_cast<double>(n) >= 0.95);
}

TEST_CASE("expected kernel matrix") {
    Kernel k(1.0, 1.0, 2.0);
    lsi::LatentSample one;
    one.positions = {0.3};
    CHECK(lsi::expected_kernel_matrix(one, k)(0, 0) == 1.0);

    lsi::LatentSample two;
    two.positions = {0.0, 1.0};
    Eigen::MatrixXd K = lsi::expected_kernel_matrix(two, k);
    CHECK(K(0, 0) == 1.0);
    CHECK(K(0, 1) == 0.5);
    CHECK(K(1, 0) == 0.5);

    // SBM-style two-atom sample: K is exactly 2-block and rank 2, with
    // eigenvalues n_0 * in + cross structure matching (p+q)/2, (p-q)/2 scaling
    auto sample = lsi::sample_latents(LatentDistribution::atoms({{0.0, 0.5}, {1.0, 0.5}}), 64, 3);
    Kernel kb(0.5, 0.5, 2.0);
    Eigen::MatrixXd Kb = lsi::expected_kernel_matrix(sample, kb);
    std::size_t n0 = 0;
    for (double x : sample.positions) n0 += x == 0.0;
    for (int i = 0; i < 64; ++i)
        for (int j = 0; j < 64; ++j) {
            const bool same = sample[i] == sample[j];
            CHECK(Kb(i, j) == Catch::Approx(same ? 1.0 : 1.0 / 3.0).margin(1e-15));
        }
    // equal blocks would give eigenvalues n(p+q)/2 and n(p-q)/2 with p=1, q=1/3
    if (n0 == 32) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Kb, Eigen::EigenvaluesOnly);
        CHECK(es.eigenvalues()[63] == Catch::Approx(64.0 * (1.0 + 1.0 / 3.0) / 2.0).margin(1e-9));
        CHECK(es.eigenvalues()[62] == Catch::Approx(64.0 * (1.0 - 1.0 / 3.0) / 2.0).margin(1e-9));
    }
}

TEST_CASE("mean adjacency matches K rho / n over repeated draws") {
    const std::size_t n = 200;
    const double rho = 150.0;
    auto sample = lsi::sample_latents(LatentDistribution::uniform(), n, 13);
    Kernel k(1.0, 1.0, 2.0);
    Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(n, n);
    for (std::uint64_t seed = 0; seed < 200; ++seed)
        mean += lsi::generate_simplified(sample, k, rho, seed).dense();
    mean /= 200.0;
    Eigen::MatrixXd P = lsi::expected_kernel_matrix(sample, k) * (rho / static_cast<double>(n));
    P.diagonal().setZero();
    const double p_max = rho / static_cast<double>(n);
    CHECK((mean - P).cwiseAbs().maxCoeff() <= 5.0 / std::sqrt(200.0) * p_max);
}

TEST_CASE("operator-norm concentration improves with density") {
    const std::size_t n = 1024;
    const double ln = std::log(static_cast<double>(n));
    Kernel k(1.0, 1.0, 2.0);
    auto sample = lsi::sample_latents(LatentDistribution::uniform(), n, 17);
    Eigen::MatrixXd K = lsi::expected_kernel_matrix(sample, k);

    std::vector<double> medians;
    for (double rho : {ln, ln * ln, ln * ln * ln}) {
        std::vector<double> vals;
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            auto A = lsi::generate_simplified(sample, k, rho, 100 + seed);
            Eigen::MatrixXd diff = A.dense() - K * (rho / static_cast<double>(n));
            vals.push_back(opnorm(diff) / rho);
        }
        std::nth_element(vals.begin(), vals.begin() + 5, vals.end());
        medians.push_back(vals[5]);
    }
    CHECK(medians[1] < medians[0]);
    CHECK(medians[2] < medians[1]);
}

TEST_CASE("bipartite product concentrates on the mu-gram") {
    const std::size_t n = 100;
    auto dist = LatentDistribution::uniform();
    Kernel k(1.0, 1.0, 2.0);
    auto xs = lsi::sample_latents(dist, n, 31);
    auto rule = lsi::make_quadrature(dist, 256);
    Eigen::MatrixXd Mtilde(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            Mtilde(i, j) = i == j ? 0.0 : lsi::mu_eval(k, rule, xs[i], xs[j]);

    std::vector<double> medians;
    for (std::size_t m : {n * 16, n * 64}) {
        std::vector<double> vals;
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            auto ys = lsi::sample_latents(dist, m, 500 + seed);
            auto B = lsi::generate_bipartite(xs, ys, k, 700 + seed);
            Eigen::MatrixXd A = B.btb();
            A.diagonal().setZero();
            vals.push_back(opnorm(A * (static_cast<double>(n) / static_cast<double>(m)) -
                                  Mtilde / static_cast<double>(n)));
        }
        std::nth_element(vals.begin(), vals.begin() + 5, vals.end());
        medians.push_back(vals[5]);
    }
    CHECK(medians[1] < medians[0]);
}
