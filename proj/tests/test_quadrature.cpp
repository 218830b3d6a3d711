#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "lsi/graphgen.hpp"
#include "lsi/quadrature.hpp"

using lsi::Kernel;
using lsi::LatentDistribution;

namespace {

// test-local adaptive Simpson oracle, independent of the Gauss-Legendre path
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double eps,
                        int depth = 30) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    std::function<double(double, double, double, double, double, double, int)> rec =
        [&](double lo, double hi, double flo, double fmid, double fhi, double tol, int d) -> double {
        const double mid = 0.5 * (lo + hi);
        const double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
        const double flm = f(lm), frm = f(rm);
        const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
        const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
        const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
        if (d <= 0 || std::abs(left + right - whole) < 15.0 * tol)
            return left + right + (left + right - whole) / 15.0;
        return rec(lo, mid, flo, flm, fmid, 0.5 * tol, d - 1) +
               rec(mid, hi, fmid, frm, fhi, 0.5 * tol, d - 1);
    };
    return rec(a, b, fa, fm, fb, eps, depth);
}

}  // namespace

TEST_CASE("quadrature weights integrate to one") {
    for (const auto& dist :
         {LatentDistribution::uniform(), LatentDistribution::atoms({{0.0, 0.5}, {1.0, 0.5}}),
          LatentDistribution::piecewise({{0.0, 0.3, 0.25}, {0.5, 1.0, 0.75}})}) {
        auto rule = lsi::make_quadrature(dist, 64);
        double total = 0.0;
        for (double w : rule.weights) total += w;
        CHECK(total == Catch::Approx(1.0).margin(1e-13));
    }
}

TEST_CASE("mu against point masses and the adaptive oracle") {
    Kernel k(1.0, 1.0, 2.0);

    // single atom: mu(x, y) = kappa(x, z0) kappa(z0, y) exactly
    auto atom = LatentDistribution::atoms({{0.25, 1.0}});
    CHECK(lsi::mu_eval(k, atom, 0.1, 0.9, 32) ==
          Catch::Approx(k(0.1, 0.25) * k(0.25, 0.9)).margin(1e-15));
    // constant kernel (single atom, x = y = atom) integrates to kappa(a,a)^2 = 1
    CHECK(lsi::mu_eval(k, atom, 0.25, 0.25, 32) == Catch::Approx(1.0).margin(1e-15));

    // uniform F at x = y = 0.5: frozen adaptive-quadrature value
    // (closed form 2*(0.5/2.5 + atan(0.5)/2) agrees to 1e-15)
    const double frozen = 0.8636476090008061;
    CHECK(lsi::mu_eval(k, LatentDistribution::uniform(), 0.5, 0.5, 256) ==
          Catch::Approx(frozen).margin(1e-10));
    const double simpson = adaptive_simpson(
        [&](double z) { return k(0.5, z) * k(z, 0.5); }, 0.0, 1.0, 1e-12);
    CHECK(simpson == Catch::Approx(frozen).margin(1e-10));
    CHECK(lsi::mu_eval(k, LatentDistribution::uniform(), 0.0, 1.0, 256) ==
          Catch::Approx(0.5914181375829574).margin(1e-10));

    CHECK_THROWS_AS(lsi::mu_eval(k, atom, 0.1, 0.9, 8), std::invalid_argument);
}

TEST_CASE("operator eigenvalues: closed forms") {
    Kernel k(1.0, 1.0, 2.0);

    // rank-1: single atom, lambda_1 = kappa(a, a) = 1
    auto ev1 = lsi::operator_eigenvalues(k, LatentDistribution::atoms({{0.3, 1.0}}), 16, 1);
    CHECK(ev1[0] == Catch::Approx(1.0).margin(1e-13));

    // two equal atoms at 0 and 1: weighted Gram [[.5,.25],[.25,.5]] -> {0.75, 0.25}
    auto ev2 = lsi::operator_eigenvalues(k, LatentDistribution::atoms({{0.0, 0.5}, {1.0, 0.5}}), 16, 2);
    CHECK(ev2[0] == Catch::Approx(0.75).margin(1e-13));
    CHECK(ev2[1] == Catch::Approx(0.25).margin(1e-13));

    CHECK_THROWS_AS(lsi::operator_eigenvalues(k, LatentDistribution::uniform(), 16, 17),
                    std::invalid_argument);
}

TEST_CASE("squared-kernel operator has squared spectrum") {
    Kernel k(1.0, 1.0, 2.0);
    auto dist = LatentDistribution::uniform();
    auto rule = lsi::make_quadrature(dist, 128);
    Eigen::MatrixXd Hk = lsi::kernel_operator_matrix(k, rule);
    Eigen::MatrixXd Hm = lsi::mu_operator_matrix(k, rule);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ek(Hk), em(Hm);
    const auto q = Hk.rows();
    for (int i = 0; i < 10; ++i) {
        const double lk = ek.eigenvalues()[q - 1 - i];
        const double lm = em.eigenvalues()[q - 1 - i];
        CHECK(std::abs(lm - lk * lk) <= 1e-6 * std::max(1.0, lk * lk));
        // eigenvectors aligned up to sign
        const double dot = std::abs(ek.eigenvectors().col(q - 1 - i).dot(em.eigenvectors().col(q - 1 - i)));
        CHECK(dot == Catch::Approx(1.0).margin(1e-6));
    }
}

TEST_CASE("mercer features reproduce the kernel") {
    Kernel k(1.0, 1.0, 2.0);
    auto dist = LatentDistribution::uniform();
    auto sample = lsi::sample_latents(dist, 100, 5);
    Eigen::MatrixXd phi = lsi::mercer_features(k, dist, sample, 8, 512);
    REQUIRE(phi.rows() == 100);
    REQUIRE(phi.cols() == 8);
    Eigen::MatrixXd gram = phi * phi.transpose();
    double max_err = 0.0;
    for (int i = 0; i < 100; ++i)
        for (int j = 0; j < 100; ++j) {
            const double target = k(sample[i], sample[j]);
            max_err = std::max(max_err, std::abs(gram(i, j) - target));
            // Mercer truncation: the Gram underestimates kappa (nonnegative tail)
            CHECK(gram(i, j) <= target + 1e-6);
        }
    CHECK(max_err <= 0.02);

    // richer truncation shrinks the error
    Eigen::MatrixXd phi12 = lsi::mercer_features(k, dist, sample, 12, 512);
    Eigen::MatrixXd gram12 = phi12 * phi12.transpose();
    double max_err12 = 0.0;
    for (int i = 0; i < 100; ++i)
        for (int j = 0; j < 100; ++j)
            max_err12 = std::max(max_err12, std::abs(gram12(i, j) - k(sample[i], sample[j])));
    CHECK(max_err12 <= max_err + 1e-12);
}

TEST_CASE("mercer features of a two-atom distribution have rank 2") {
    Kernel k(1.0, 1.0, 2.0);
    auto dist = LatentDistribution::atoms({{0.0, 0.5}, {1.0, 0.5}});
    auto sample = lsi::sample_latents(dist, 50, 9);
    Eigen::MatrixXd phi = lsi::mercer_features(k, dist, sample, 4, 64);
    for (int i = 0; i < phi.rows(); ++i) {
        CHECK(std::abs(phi(i, 2)) < 1e-10);
        CHECK(std::abs(phi(i, 3)) < 1e-10);
    }
    Eigen::MatrixXd gram = phi * phi.transpose();
    for (int i = 0; i < phi.rows(); ++i)
        for (int j = 0; j < phi.rows(); ++j)
            CHECK(gram(i, j) == Catch::Approx(k(sample[i], sample[j])).margin(1e-10));
}
