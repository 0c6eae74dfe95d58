#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "cdecomp/errors.hpp"

namespace cdecomp {

struct MaximizeOptions {
    double grad_tol = 1e-6;   // max-norm of the gradient at the solution
    int max_iter = 500;
    // Called with each accepted iterate; lets callers watch for runaway
    // parameters (e.g. separation) without owning the loop.
    std::function<void(const Eigen::VectorXd&)> observer;
};

struct MaximizeResult {
    Eigen::VectorXd x;
    double value = 0.0;
    Eigen::VectorXd gradient;
    int iterations = 0;
    bool converged = false;
    std::string message;
};

using Objective = std::function<double(const Eigen::VectorXd&)>;
using Gradient = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Central-difference gradient for objectives without an analytic one.
inline Gradient numerical_gradient(const Objective& f) {
    return [f](const Eigen::VectorXd& x) {
        Eigen::VectorXd g(x.size());
        for (int j = 0; j < x.size(); ++j) {
            double h = 6e-6 * std::max(1.0, std::fabs(x(j)));
            Eigen::VectorXd xp = x, xm = x;
            xp(j) += h;
            xm(j) -= h;
            g(j) = (f(xp) - f(xm)) / (2.0 * h);
        }
        return g;
    };
}

// BFGS ascent with backtracking Armijo line search. Maximizes f; pass grad as
// the analytic gradient or leave empty to fall back to central differences.
// Returns converged=false (never silently) when the iteration cap is hit or
// the line search stalls with the gradient still above tolerance.
inline MaximizeResult maximize(const Objective& f, const Gradient& grad_in,
                               const Eigen::VectorXd& x0, const MaximizeOptions& opts = {}) {
    const int n = static_cast<int>(x0.size());
    Gradient grad = grad_in ? grad_in : numerical_gradient(f);

    MaximizeResult res;
    res.x = x0;
    res.value = f(x0);
    if (!std::isfinite(res.value))
        throw domain_error("maximize: objective is not finite at the starting point");
    res.gradient = grad(x0);
    if (!res.gradient.allFinite())
        throw numerical_error("maximize: gradient is not finite at the starting point");

    Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);  // approximate inverse Hessian of -f
    const double c1 = 1e-4;

    for (res.iterations = 0; res.iterations < opts.max_iter; ++res.iterations) {
        if (res.gradient.lpNorm<Eigen::Infinity>() <= opts.grad_tol) {
            res.converged = true;
            res.message = "gradient tolerance reached";
            return res;
        }
        Eigen::VectorXd d = H * res.gradient;  // ascent direction
        double slope = res.gradient.dot(d);
        if (!(slope > 0.0) || !d.allFinite()) {  // lost positive definiteness; reset
            H.setIdentity();
            d = res.gradient;
            slope = res.gradient.squaredNorm();
        }

        double t = 1.0;
        double fnew = -std::numeric_limits<double>::infinity();
        Eigen::VectorXd xnew;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            xnew = res.x + t * d;
            fnew = f(xnew);
            if (std::isfinite(fnew) && fnew >= res.value + c1 * t * slope) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            res.message = "line search failed to make progress";
            return res;
        }

        Eigen::VectorXd gnew = grad(xnew);
        if (!gnew.allFinite()) {
            res.message = "gradient became non-finite";
            return res;
        }
        Eigen::VectorXd s = xnew - res.x;
        Eigen::VectorXd y = res.gradient - gnew;  // gradient change of -f
        double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            // standard BFGS update of the inverse Hessian of -f
            Eigen::VectorXd Hy = H * y;
            double yHy = y.dot(Hy);
            H += ((sy + yHy) / (sy * sy)) * (s * s.transpose()) -
                 (Hy * s.transpose() + s * Hy.transpose()) / sy;
        }

        res.x = xnew;
        res.value = fnew;
        res.gradient = gnew;
        if (opts.observer) opts.observer(res.x);
    }

    res.message = "iteration cap reached";
    return res;
}

}  // namespace cdecomp
