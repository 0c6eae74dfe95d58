#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "cdecomp/design.hpp"
#include "cdecomp/errors.hpp"
#include "cdecomp/normal.hpp"
#include "cdecomp/optimize.hpp"

namespace cdecomp {

struct FitOptions {
    double tol = 1e-8;       // max-norm of the score at convergence
    int max_iter = 100;
    double coef_cap = 30.0;  // |coefficient| beyond this flags separation
};

enum class ResponseModel { logistic, probit, linear };

struct RegressionFit {
    ResponseModel model = ResponseModel::linear;
    DesignSpec spec;
    std::vector<std::string> term_names;
    Eigen::VectorXd coef;
    double sigma = 0.0;      // linear only, n-p convention
    double sigma_mle = 0.0;  // linear only, n convention (joint-model scale)
    double loglik = 0.0;
    int iterations = 0;
};

namespace detail {

inline void check_rank(const Eigen::ColPivHouseholderQR<Eigen::MatrixXd>& qr,
                       const std::vector<std::string>& names) {
    auto p = qr.cols();
    if (qr.rank() < p) {
        Eigen::Index bad = qr.colsPermutation().indices()(qr.rank());
        std::string name = (bad < static_cast<Eigen::Index>(names.size()))
                               ? names[static_cast<std::size_t>(bad)]
                               : ("column " + std::to_string(bad + 1));
        throw design_error("design matrix is rank deficient (term '" + name + "' is collinear)");
    }
}

inline double bernoulli_loglik(const Eigen::VectorXd& y, const Eigen::VectorXd& p) {
    double ll = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        double pi = std::min(std::max(p(i), 1e-300), 1.0 - 1e-16);
        ll += (y(i) == 1.0) ? std::log(pi) : std::log1p(-pi);
    }
    return ll;
}

// Collapse (x-row, y) patterns so likelihood sums run over unique cells. With
// categorical covariates this turns O(n) likelihood work into a handful of
// terms, which is what makes bootstrap probit refits cheap.
struct GroupedBinary {
    Eigen::MatrixXd X;      // unique covariate rows
    Eigen::VectorXd count1; // successes per row
    Eigen::VectorXd count0; // failures per row
};

inline GroupedBinary group_binary(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    std::map<std::vector<double>, std::pair<double, double>> cells;
    std::vector<double> key(static_cast<std::size_t>(X.cols()));
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        for (Eigen::Index j = 0; j < X.cols(); ++j) key[static_cast<std::size_t>(j)] = X(i, j);
        auto& c = cells[key];
        (y(i) == 1.0 ? c.first : c.second) += 1.0;
    }
    GroupedBinary g;
    g.X.resize(static_cast<Eigen::Index>(cells.size()), X.cols());
    g.count1.resize(static_cast<Eigen::Index>(cells.size()));
    g.count0.resize(static_cast<Eigen::Index>(cells.size()));
    Eigen::Index r = 0;
    for (const auto& [k, c] : cells) {
        for (Eigen::Index j = 0; j < X.cols(); ++j) g.X(r, j) = k[static_cast<std::size_t>(j)];
        g.count1(r) = c.first;
        g.count0(r) = c.second;
        ++r;
    }
    return g;
}

}  // namespace detail

// Ordinary least squares via column-pivoted QR. sigma uses n-p; sigma_mle the
// n-denominator value used wherever a joint Gaussian likelihood needs it.
inline RegressionFit fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             const std::vector<std::string>& names = {}) {
    const auto n = X.rows(), p = X.cols();
    if (n < p) throw design_error("linear model: fewer observations than parameters");
    if (n == p) throw design_error("linear model: no residual degrees of freedom (n == p)");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    detail::check_rank(qr, names);
    RegressionFit fit;
    fit.model = ResponseModel::linear;
    fit.term_names = names;
    fit.coef = qr.solve(y);
    Eigen::VectorXd resid = y - X * fit.coef;
    double rss = resid.squaredNorm();
    fit.sigma = std::sqrt(rss / static_cast<double>(n - p));
    fit.sigma_mle = std::sqrt(rss / static_cast<double>(n));
    fit.loglik = -0.5 * static_cast<double>(n) *
                 (std::log(2.0 * M_PI * fit.sigma_mle * fit.sigma_mle) + 1.0);
    return fit;
}

// Logistic regression by iteratively reweighted least squares with
// step-halving, so the log-likelihood never decreases. Throws on separation
// (runaway coefficients), rank deficiency, and nonconvergence.
inline RegressionFit fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                  const std::vector<std::string>& names = {},
                                  const FitOptions& opts = {}) {
    const auto n = X.rows(), p = X.cols();
    if (n < p) throw design_error("logistic model: fewer observations than parameters");
    {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
        detail::check_rank(qr, names);
    }
    RegressionFit fit;
    fit.model = ResponseModel::logistic;
    fit.term_names = names;
    fit.coef = Eigen::VectorXd::Zero(p);

    Eigen::VectorXd eta = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd prob = Eigen::VectorXd::Constant(n, 0.5);
    double ll = detail::bernoulli_loglik(y, prob);

    for (int iter = 0; iter < opts.max_iter; ++iter) {
        Eigen::VectorXd score = X.transpose() * (y - prob);
        if (score.lpNorm<Eigen::Infinity>() <= opts.tol) {
            fit.loglik = ll;
            fit.iterations = iter;
            return fit;
        }
        Eigen::VectorXd w = prob.array() * (1.0 - prob.array()) + 1e-10;
        Eigen::VectorXd sw = w.cwiseSqrt();
        Eigen::VectorXd z = eta + ((y - prob).cwiseQuotient(w));
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sw.asDiagonal() * X);
        Eigen::VectorXd proposal = qr.solve(sw.cwiseProduct(z));

        // halve back toward the current iterate until the likelihood improves;
        // the cushion grows with the likelihood's summation noise so a true
        // Newton step near the optimum is not rejected for losing a few ulps
        const double flat_tol = 1e-12 + std::numeric_limits<double>::epsilon() * std::abs(ll) *
                                            std::sqrt(static_cast<double>(n));
        Eigen::VectorXd beta_new = proposal;
        Eigen::VectorXd eta_new;
        Eigen::VectorXd prob_new;
        double ll_new = 0.0;
        bool improved = false;
        for (int h = 0; h < 40; ++h) {
            eta_new = X * beta_new;
            prob_new = eta_new.unaryExpr([](double v) { return expit(v); });
            ll_new = detail::bernoulli_loglik(y, prob_new);
            if (ll_new >= ll - flat_tol) {
                improved = true;
                break;
            }
            beta_new = 0.5 * (beta_new + fit.coef);
        }
        if (!improved) {
            // Forty halvings without improvement mean the likelihood is flat at
            // double precision and the iterate cannot move. The fit is done when
            // the leftover score is negligible for the sample size.
            if (score.lpNorm<Eigen::Infinity>() <= 1e-6 * static_cast<double>(n)) {
                fit.loglik = ll;
                fit.iterations = iter;
                return fit;
            }
            throw nonconvergence_error("logistic model: step halving stalled away from the optimum");
        }
        fit.coef = beta_new;
        eta = eta_new;
        prob = prob_new;
        ll = ll_new;
        if (fit.coef.lpNorm<Eigen::Infinity>() > opts.coef_cap)
            throw separation_error(
                "logistic model: coefficients diverged (separation suspected, |coef| > " +
                std::to_string(opts.coef_cap) + ")");
    }
    throw nonconvergence_error("logistic model: IRLS did not converge in " +
                               std::to_string(opts.max_iter) + " iterations");
}

// Probit regression: BFGS on the pattern-grouped log-likelihood with the
// analytic score, separation watched through the iterate observer.
inline RegressionFit fit_probit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                const std::vector<std::string>& names = {},
                                const FitOptions& opts = {}) {
    const auto p = X.cols();
    if (X.rows() < p) throw design_error("probit model: fewer observations than parameters");
    {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
        detail::check_rank(qr, names);
    }
    auto g = detail::group_binary(X, y);

    auto loglik = [&](const Eigen::VectorXd& beta) {
        Eigen::VectorXd lp = g.X * beta;
        double ll = 0.0;
        for (Eigen::Index i = 0; i < lp.size(); ++i) {
            if (g.count1(i) > 0.0) ll += g.count1(i) * log_norm_cdf(lp(i));
            if (g.count0(i) > 0.0) ll += g.count0(i) * log_norm_cdf(-lp(i));
        }
        return ll;
    };
    auto score = [&](const Eigen::VectorXd& beta) {
        Eigen::VectorXd lp = g.X * beta;
        Eigen::VectorXd wt(lp.size());
        for (Eigen::Index i = 0; i < lp.size(); ++i) {
            double s = 0.0;
            if (g.count1(i) > 0.0) s += g.count1(i) * inv_mills(lp(i));
            if (g.count0(i) > 0.0) s -= g.count0(i) * inv_mills(-lp(i));
            wt(i) = s;
        }
        return Eigen::VectorXd(g.X.transpose() * wt);
    };

    MaximizeOptions mo;
    // Scaled with the sample: the summed score cannot reliably be driven below
    // ~1e-7 per observation once line-search improvements drop under the
    // log-likelihood's floating-point resolution.
    double score_tol = opts.tol > 1e-8 ? opts.tol : 1e-6;
    mo.grad_tol = std::max(score_tol, 1e-7 * static_cast<double>(X.rows()));
    mo.max_iter = opts.max_iter > 100 ? opts.max_iter : 200;
    mo.observer = [&](const Eigen::VectorXd& b) {
        if (b.lpNorm<Eigen::Infinity>() > opts.coef_cap)
            throw separation_error(
                "probit model: coefficients diverged (separation suspected, |coef| > " +
                std::to_string(opts.coef_cap) + ")");
    };
    auto res = maximize(loglik, score, Eigen::VectorXd::Zero(p), mo);
    if (!res.converged)
        throw nonconvergence_error("probit model: " + res.message + " after " +
                                   std::to_string(res.iterations) + " iterations");
    RegressionFit fit;
    fit.model = ResponseModel::probit;
    fit.term_names = names;
    fit.coef = res.x;
    fit.loglik = res.value;
    fit.iterations = res.iterations;
    return fit;
}

inline RegressionFit fit_ols(const Dataset& data, const DesignSpec& spec,
                             const std::string& response) {
    auto fit = fit_ols(build_design(data, spec), data.column(response), spec.term_names());
    fit.spec = spec;
    return fit;
}

inline RegressionFit fit_logistic(const Dataset& data, const DesignSpec& spec,
                                  const std::string& response, const FitOptions& opts = {}) {
    auto fit =
        fit_logistic(build_design(data, spec), data.column(response), spec.term_names(), opts);
    fit.spec = spec;
    return fit;
}

inline RegressionFit fit_probit(const Dataset& data, const DesignSpec& spec,
                                const std::string& response, const FitOptions& opts = {}) {
    auto fit =
        fit_probit(build_design(data, spec), data.column(response), spec.term_names(), opts);
    fit.spec = spec;
    return fit;
}

// Mean response on the fit's own scale: probabilities for the binary models,
// the linear predictor for the linear one. Stable against extreme predictors.
inline Eigen::VectorXd predict_response(const RegressionFit& fit, const Eigen::MatrixXd& X) {
    Eigen::VectorXd lp = X * fit.coef;
    switch (fit.model) {
        case ResponseModel::logistic:
            return lp.unaryExpr([](double v) { return expit(v); });
        case ResponseModel::probit:
            return lp.unaryExpr([](double v) { return norm_cdf(v); });
        case ResponseModel::linear: return lp;
    }
    return lp;
}

inline Eigen::VectorXd predict_response(const RegressionFit& fit, const Dataset& data) {
    return predict_response(fit, build_design(data, fit.spec));
}

}  // namespace cdecomp
