#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include "cdecomp/covariance.hpp"
#include "cdecomp/errors.hpp"
#include "cdecomp/rng.hpp"

#include "support/helpers.hpp"

using namespace cdecomp;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("covariance matrix round-trips through correlations") {
    auto cov = CovarianceMatrix::from_correlations({1.5, 0.8}, {0.3});
    CHECK(cov.dim() == 2);
    CHECK_THAT(cov.sigma(0), WithinRel(1.5, 1e-15));
    CHECK_THAT(cov.sigma(1), WithinRel(0.8, 1e-15));
    CHECK_THAT(cov.correlation(0, 1), WithinRel(0.3, 1e-14));
    CHECK_THAT(cov(0, 1), WithinRel(0.3 * 1.5 * 0.8, 1e-14));
    CHECK(cov(0, 1) == cov(1, 0));

    auto cov3 = CovarianceMatrix::from_correlations({1.0, 2.0, 0.5}, {0.2, -0.4, 0.1});
    CHECK(cov3.dim() == 3);
    auto rs = cov3.correlations();
    REQUIRE(rs.size() == 3);
    CHECK_THAT(rs[0], WithinRel(0.2, 1e-14));   // (1,2)
    CHECK_THAT(rs[1], WithinRel(-0.4, 1e-14));  // (1,3)
    CHECK_THAT(rs[2], WithinRel(0.1, 1e-14));   // (2,3)
}

TEST_CASE("covariance matrix validation rejects malformed input") {
    Eigen::MatrixXd m(2, 2);
    m << 1.0, 0.5, 0.4, 1.0;  // asymmetric
    CHECK_THROWS_AS(CovarianceMatrix(m), domain_error);
    m << -1.0, 0.0, 0.0, 1.0;  // nonpositive diagonal
    CHECK_THROWS_AS(CovarianceMatrix(m), domain_error);
    m << 1.0, 1.2, 1.2, 1.0;  // |corr| > 1
    CHECK_THROWS_AS(CovarianceMatrix(m), domain_error);
    Eigen::MatrixXd m4 = Eigen::MatrixXd::Identity(4, 4);
    CHECK_THROWS_AS(CovarianceMatrix(m4), domain_error);  // only 2 or 3 mediators
    CHECK_THROWS_AS(CovarianceMatrix::from_correlations({1.0, 1.0}, {1.3}), domain_error);
}

TEST_CASE("chol_lower factors and reports the failing pivot") {
    auto cov = CovarianceMatrix::from_correlations({2.0, 1.0}, {0.5});
    auto L = chol_lower(cov);
    Eigen::MatrixXd re = L * L.transpose();
    CHECK_THAT((re - cov.matrix()).cwiseAbs().maxCoeff(), WithinAbs(0.0, 1e-12));

    // rho ~ 1 makes the second pivot collapse
    auto bad = CovarianceMatrix::from_correlations({1.0, 1.0}, {0.9999999999999});
    try {
        chol_lower(bad, 1e-10);
        FAIL("expected numerical_error");
    } catch (const numerical_error& e) {
        CHECK(std::string(e.what()).find("pivot 2") != std::string::npos);
    }
}

TEST_CASE("mvn_sample reproduces the requested covariance") {
    auto cov = CovarianceMatrix::from_correlations({1.2, 0.7}, {0.55});
    Eigen::Vector2d mu(1.0, -2.0);
    Sampler s(RngStream(314));
    const int n = 200000;
    auto draws = mvn_sample(mu, cov, s, n);
    REQUIRE(draws.rows() == n);
    REQUIRE(draws.cols() == 2);
    Eigen::RowVector2d mean = draws.colwise().mean();
    Eigen::Matrix2d centered_cov =
        (draws.rowwise() - mean).transpose() * (draws.rowwise() - mean) / double(n - 1);
    CHECK_THAT(mean(0), WithinAbs(1.0, 0.02));
    CHECK_THAT(mean(1), WithinAbs(-2.0, 0.02));
    CHECK_THAT(centered_cov(0, 0), WithinAbs(1.2 * 1.2, 0.03));
    CHECK_THAT(centered_cov(1, 1), WithinAbs(0.7 * 0.7, 0.02));
    CHECK_THAT(centered_cov(0, 1), WithinAbs(0.55 * 1.2 * 0.7, 0.02));

    // deterministic: same stream gives the same draws
    Sampler s2(RngStream(314));
    auto draws2 = mvn_sample(mu, cov, s2, 5);
    Sampler s3(RngStream(314));
    auto draws3 = mvn_sample(mu, cov, s3, 5);
    CHECK((draws2 - draws3).cwiseAbs().maxCoeff() == 0.0);
}
