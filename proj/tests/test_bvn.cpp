#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "cdecomp/bvn.hpp"
#include "cdecomp/errors.hpp"
#include "cdecomp/normal.hpp"

#include "support/quad_oracle.hpp"

using namespace cdecomp;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("bvn_cdf known closed forms") {
    // P(X<=0, Y<=0) = 1/4 + asin(rho) / (2 pi)
    const double pi = 3.14159265358979323846;
    for (double rho : {-0.9, -0.5, 0.0, 0.3, 0.6, 0.95})
        CHECK_THAT(bvn_cdf(0.0, 0.0, rho), WithinRel(0.25 + std::asin(rho) / (2 * pi), 1e-12));
    CHECK_THAT(bvn_cdf(0.0, 0.0, 0.5), WithinRel(1.0 / 3.0, 1e-13));
    // independence factorizes exactly
    CHECK(bvn_cdf(0.7, -1.2, 0.0) == norm_cdf(0.7) * norm_cdf(-1.2));
}

TEST_CASE("bvn_cdf agrees with the quadrature oracle over the grid") {
    for (double rho : {-0.95, -0.6, -0.3, 0.15, 0.45, 0.75, 0.95})
        for (int hi = -3; hi <= 3; ++hi)
            for (int ki = -3; ki <= 3; ++ki) {
                double h = hi, k = ki;
                INFO("h=" << h << " k=" << k << " rho=" << rho);
                CHECK_THAT(bvn_cdf(h, k, rho),
                           WithinAbs(testsupport::quad_bvn(h, k, rho), 1e-7));
            }
}

TEST_CASE("bvn_cdf respects symmetry and marginal limits") {
    CHECK(bvn_cdf(1.3, -0.4, 0.62) == bvn_cdf(-0.4, 1.3, 0.62));
    for (double rho : {-0.8, 0.2, 0.9}) {
        CHECK_THAT(bvn_cdf(0.9, 8.5, rho), WithinAbs(norm_cdf(0.9), 1e-9));
        CHECK_THAT(bvn_cdf(8.5, -1.7, rho), WithinAbs(norm_cdf(-1.7), 1e-9));
    }
    // monotone in each argument
    CHECK(bvn_cdf(0.5, 0.5, 0.4) > bvn_cdf(0.2, 0.5, 0.4));
    CHECK(bvn_cdf(0.5, 0.5, 0.4) > bvn_cdf(0.5, 0.2, 0.4));
}

TEST_CASE("bvn_cdf stays within probability bounds in deep corners") {
    for (double rho : {-0.999, -0.7, 0.0, 0.7, 0.999})
        for (double h : {-8.0, -1.0, 2.0, 8.0})
            for (double k : {-8.0, 0.5, 8.0}) {
                double p = bvn_cdf(h, k, rho);
                CHECK(p >= 0.0);
                CHECK(p <= 1.0);
            }
    // perfectly dependent corner case approached: P(X<=h, Y<=k) -> min(P,Q)
    CHECK_THAT(bvn_cdf(0.3, 1.0, 0.9999999), WithinAbs(norm_cdf(0.3), 1e-5));
    CHECK_THAT(bvn_cdf(0.3, 1.0, -0.9999999),
               WithinAbs(std::max(0.0, norm_cdf(0.3) + norm_cdf(1.0) - 1.0), 1e-5));
}

TEST_CASE("bvn_cdf rejects correlations at or beyond one") {
    CHECK_THROWS_AS(bvn_cdf(0.0, 0.0, 1.0), domain_error);
    CHECK_THROWS_AS(bvn_cdf(0.0, 0.0, -1.0), domain_error);
    CHECK_THROWS_AS(bvn_cdf(0.0, 0.0, 1.5), domain_error);
}

TEST_CASE("tvn_cdf matches independently computed references") {
    // references from a separately implemented integration method
    CHECK_THAT(tvn_cdf(0.3, -0.2, 0.5, 0.4, 0.2, -0.3), WithinAbs(0.205605333941, 1e-6));
    CHECK_THAT(tvn_cdf(1.0, -1.0, 0.5, 0.6, 0.3, 0.5), WithinAbs(0.144654881842, 1e-6));
    CHECK_THAT(tvn_cdf(-0.5, 0.8, 1.2, 0.582029, 0.3, 0.2), WithinAbs(0.278874024529, 1e-6));
    CHECK_THAT(tvn_cdf(2.0, 2.0, 2.0, 0.9, 0.8, 0.75), WithinAbs(0.956643553440, 1e-6));
    CHECK_THAT(tvn_cdf(-1.0, -1.0, -1.0, 0.5, 0.5, 0.5), WithinAbs(0.033796989625, 1e-6));
    CHECK_THAT(tvn_cdf(0.0, 0.0, 0.0, 0.0, 0.0, 0.6), WithinAbs(0.176208191174, 1e-9));
}

TEST_CASE("tvn_cdf factorizes when the first variable is independent") {
    CHECK_THAT(tvn_cdf(0.7, -0.3, 1.1, 0.0, 0.0, 0.45),
               WithinRel(norm_cdf(0.7) * bvn_cdf(-0.3, 1.1, 0.45), 1e-12));
}

TEST_CASE("tvn_cdf marginalizes to bvn_cdf when one limit is far right") {
    CHECK_THAT(tvn_cdf(8.6, 0.4, -0.9, 0.2, 0.1, 0.5), WithinAbs(bvn_cdf(0.4, -0.9, 0.5), 1e-7));
    CHECK_THAT(tvn_cdf(0.4, 8.6, -0.9, 0.2, 0.1, 0.5), WithinAbs(bvn_cdf(0.4, -0.9, 0.1), 1e-7));
}

TEST_CASE("tvn_cdf rejects a correlation matrix that is not positive definite") {
    CHECK_THROWS_AS(tvn_cdf(0.0, 0.0, 0.0, 0.9, 0.9, -0.9), domain_error);
}
