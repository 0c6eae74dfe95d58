#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <Eigen/Dense>

#include "cdecomp/errors.hpp"
#include "cdecomp/optimize.hpp"

#include "support/helpers.hpp"

using namespace cdecomp;
using Catch::Matchers::WithinAbs;

TEST_CASE("maximize finds the peak of a concave quadratic") {
    auto f = [](const Eigen::VectorXd& x) {
        double dx = x[0] - 2.0 / 7.0, dy = x[1] - 13.0 / 7.0;
        return 1.0 - dx * dx - 3.0 * dy * dy;
    };
    auto grad = [](const Eigen::VectorXd& x) {
        Eigen::VectorXd g(2);
        g[0] = -2.0 * (x[0] - 2.0 / 7.0);
        g[1] = -6.0 * (x[1] - 13.0 / 7.0);
        return g;
    };
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(2);

    auto res = maximize(f, grad, x0, {});
    CHECK(res.converged);
    CHECK_THAT(res.x[0], WithinAbs(2.0 / 7.0, 1e-7));
    CHECK_THAT(res.x[1], WithinAbs(13.0 / 7.0, 1e-7));
    CHECK_THAT(res.value, WithinAbs(1.0, 1e-12));
    CHECK(res.gradient.cwiseAbs().maxCoeff() <= 1e-6);

    // numerical gradient fallback reaches the same answer
    auto res2 = maximize(f, nullptr, x0, {});
    CHECK(res2.converged);
    CHECK_THAT(res2.x[0], WithinAbs(2.0 / 7.0, 1e-5));
    CHECK_THAT(res2.x[1], WithinAbs(13.0 / 7.0, 1e-5));
}

TEST_CASE("maximize handles a banana-shaped ridge") {
    // negated Rosenbrock: maximum 0 at (1, 1)
    auto f = [](const Eigen::VectorXd& x) {
        double a = 1.0 - x[0], b = x[1] - x[0] * x[0];
        return -(a * a + 100.0 * b * b);
    };
    auto grad = [](const Eigen::VectorXd& x) {
        Eigen::VectorXd g(2);
        double b = x[1] - x[0] * x[0];
        g[0] = 2.0 * (1.0 - x[0]) + 400.0 * x[0] * b;
        g[1] = -200.0 * b;
        return g;
    };
    Eigen::VectorXd x0(2);
    x0 << -1.2, 1.0;
    MaximizeOptions opts;
    opts.max_iter = 2000;
    auto res = maximize(f, grad, x0, opts);
    CHECK(res.converged);
    CHECK_THAT(res.x[0], WithinAbs(1.0, 1e-5));
    CHECK_THAT(res.x[1], WithinAbs(1.0, 1e-5));
}

TEST_CASE("maximize reports nonconvergence at the iteration cap") {
    auto f = [](const Eigen::VectorXd& x) {
        double a = 1.0 - x[0], b = x[1] - x[0] * x[0];
        return -(a * a + 100.0 * b * b);
    };
    Eigen::VectorXd x0(2);
    x0 << -1.2, 1.0;
    MaximizeOptions opts;
    opts.max_iter = 2;
    auto res = maximize(f, nullptr, x0, opts);
    CHECK_FALSE(res.converged);
    CHECK(res.message == "iteration cap reached");
    CHECK(res.iterations == 2);
}

TEST_CASE("maximize rejects a start point where the objective is not finite") {
    auto f = [](const Eigen::VectorXd& x) { return std::log(x[0]); };
    Eigen::VectorXd x0(1);
    x0 << -1.0;
    CHECK_THROWS_AS(maximize(f, nullptr, x0, {}), domain_error);
}

TEST_CASE("maximize stays inside the region where the objective is finite") {
    // -inf outside x < 2: the line search must backtrack, not explode
    auto f = [](const Eigen::VectorXd& x) {
        if (x[0] >= 2.0) return -std::numeric_limits<double>::infinity();
        return std::log(2.0 - x[0]) - x[0] * x[0];
    };
    Eigen::VectorXd x0(1);
    x0 << 0.0;
    auto res = maximize(f, nullptr, x0, {});
    CHECK(res.converged);
    // maximum of log(2-x) - x^2: -1/(2-x) - 2x = 0 -> 2x^2 - 4x - 1 = 0
    double root = 1.0 - std::sqrt(1.5);
    CHECK_THAT(res.x[0], WithinAbs(root, 1e-5));
}

TEST_CASE("the observer sees every accepted iterate") {
    auto f = [](const Eigen::VectorXd& x) { return -(x[0] - 3.0) * (x[0] - 3.0); };
    Eigen::VectorXd x0(1);
    x0 << 0.0;
    MaximizeOptions opts;
    int calls = 0;
    opts.observer = [&](const Eigen::VectorXd&) { ++calls; };
    auto res = maximize(f, nullptr, x0, opts);
    CHECK(res.converged);
    CHECK(calls == res.iterations);
}

TEST_CASE("numerical_gradient matches an analytic gradient") {
    auto f = [](const Eigen::VectorXd& x) {
        return std::sin(x[0]) * std::exp(0.3 * x[1]) + x[0] * x[1];
    };
    Eigen::VectorXd x(2);
    x << 0.7, -1.1;
    auto g = numerical_gradient(f)(x);
    CHECK_THAT(g[0], WithinAbs(std::cos(0.7) * std::exp(0.3 * -1.1) + -1.1, 1e-6));
    CHECK_THAT(g[1], WithinAbs(0.3 * std::sin(0.7) * std::exp(0.3 * -1.1) + 0.7, 1e-6));
}
