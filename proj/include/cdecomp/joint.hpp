#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "cdecomp/bvn.hpp"
#include "cdecomp/covariance.hpp"
#include "cdecomp/data.hpp"
#include "cdecomp/design.hpp"
#include "cdecomp/errors.hpp"
#include "cdecomp/normal.hpp"
#include "cdecomp/optimize.hpp"
#include "cdecomp/regression.hpp"
#include "cdecomp/rng.hpp"

namespace cdecomp {

// Joint model for 2-3 mediators sharing a latent Gaussian error structure.
// Supported families: all continuous (seemingly unrelated regressions), all
// binary (multivariate probit), and one binary + one continuous. Two or three
// mediators with a mixed trio is rejected, matching the fitting machinery the
// approach builds on.
struct JointMediatorSpec {
    std::string group;
    std::vector<MediatorRole> mediators;
    std::vector<DesignSpec> designs;  // one equation per mediator

    static JointMediatorSpec from_roles(const VariableRoles& roles) {
        JointMediatorSpec s;
        s.group = roles.group;
        s.mediators = roles.mediators;
        s.designs.assign(roles.mediators.size(), DesignSpec::mediator_default(roles));
        return s;
    }

    std::size_t dim() const { return mediators.size(); }

    void validate() const {
        if (dim() < 2 || dim() > 3)
            throw usage_error("joint mediator model: expected 2 or 3 mediators");
        if (designs.size() != dim())
            throw usage_error("joint mediator model: one design per mediator equation required");
        int binary = 0;
        for (const auto& m : mediators) binary += (m.kind == MediatorKind::binary);
        if (dim() == 3 && binary != 0 && binary != 3)
            throw usage_error(
                "joint mediator model: three mediators must be all continuous or all binary "
                "(mixed trios are not supported)");
        for (const auto& d : designs) {
            d.validate();
            for (const auto& t : d.terms) {
                for (const auto& m : mediators) {
                    if ((t.kind == Term::Kind::main && t.a == m.name) ||
                        (t.kind == Term::Kind::product && (t.a == m.name || t.b == m.name)))
                        throw usage_error("mediator equation must not contain mediator '" +
                                          m.name + "' as a regressor");
                }
            }
        }
    }
};

struct JointMediatorFit {
    JointMediatorSpec spec;
    std::vector<Eigen::VectorXd> coef;  // per equation
    CovarianceMatrix sigma;             // binary margins have unit variance
    double loglik = 0.0;
    int iterations = 0;
    bool independent = false;  // true when fit with the diagonal (existing) structure
    bool boundary_rho = false; // any |rho| > 0.99
};

struct CovarianceDiagnostic {
    CovarianceMatrix sigma_group0;
    CovarianceMatrix sigma_group1;
    double max_abs_diff = 0.0;
};

namespace detail {

struct BinaryCells {
    // One row per observed (covariate pattern, outcome pattern) cell.
    std::vector<Eigen::MatrixXd> X;  // per equation: cell rows
    Eigen::MatrixXd q;               // cells x dim, entries +-1
    Eigen::VectorXd count;
};

inline BinaryCells group_cells(const std::vector<Eigen::MatrixXd>& X,
                               const std::vector<Eigen::VectorXd>& m) {
    const std::size_t d = X.size();
    const Eigen::Index n = X[0].rows();
    std::map<std::vector<double>, double> cells;
    std::vector<double> key;
    for (Eigen::Index i = 0; i < n; ++i) {
        key.clear();
        for (std::size_t j = 0; j < d; ++j)
            for (Eigen::Index c = 0; c < X[j].cols(); ++c) key.push_back(X[j](i, c));
        for (std::size_t j = 0; j < d; ++j) key.push_back(m[j](i));
        cells[key] += 1.0;
    }
    BinaryCells out;
    const auto ncell = static_cast<Eigen::Index>(cells.size());
    out.q.resize(ncell, static_cast<Eigen::Index>(d));
    out.count.resize(ncell);
    for (std::size_t j = 0; j < d; ++j)
        out.X.emplace_back(ncell, X[j].cols());
    Eigen::Index r = 0;
    for (const auto& [k, c] : cells) {
        std::size_t pos = 0;
        for (std::size_t j = 0; j < d; ++j)
            for (Eigen::Index cc = 0; cc < X[j].cols(); ++cc)
                out.X[j](r, cc) = k[pos++];
        for (std::size_t j = 0; j < d; ++j)
            out.q(r, static_cast<Eigen::Index>(j)) = 2.0 * k[pos++] - 1.0;
        out.count(r) = c;
        ++r;
    }
    return out;
}

inline double safe_log(double p) { return std::log(std::max(p, 1e-300)); }

// --- family log-likelihood evaluators (shared by fitting and by tests) ---

inline double loglik_continuous(const std::vector<Eigen::MatrixXd>& X,
                                const std::vector<Eigen::VectorXd>& m,
                                const std::vector<Eigen::VectorXd>& coef,
                                const Eigen::MatrixXd& sigma) {
    const std::size_t d = X.size();
    const Eigen::Index n = X[0].rows();
    Eigen::MatrixXd resid(n, static_cast<Eigen::Index>(d));
    for (std::size_t j = 0; j < d; ++j)
        resid.col(static_cast<Eigen::Index>(j)) = m[j] - X[j] * coef[j];
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success)
        throw numerical_error("gaussian log-likelihood: covariance is not positive definite");
    double logdet = 0.0;
    for (Eigen::Index j = 0; j < llt.matrixL().rows(); ++j)
        logdet += 2.0 * std::log(llt.matrixL()(j, j));
    double quad = llt.matrixL().solve(resid.transpose()).squaredNorm();
    return -0.5 * (static_cast<double>(n) *
                       (static_cast<double>(d) * std::log(2.0 * M_PI) + logdet) +
                   quad);
}

inline double loglik_bivprobit(const BinaryCells& cells, const Eigen::VectorXd& a,
                               const Eigen::VectorXd& g, double rho) {
    Eigen::VectorXd lp1 = cells.X[0] * a, lp2 = cells.X[1] * g;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < cells.count.size(); ++i) {
        double q1 = cells.q(i, 0), q2 = cells.q(i, 1);
        double p = bvn_cdf(q1 * lp1(i), q2 * lp2(i), q1 * q2 * rho);
        ll += cells.count(i) * safe_log(p);
    }
    return ll;
}

inline double loglik_mixed(const Eigen::MatrixXd& Xb, const Eigen::MatrixXd& Xc,
                           const Eigen::VectorXd& mb, const Eigen::VectorXd& mc,
                           const Eigen::VectorXd& a, const Eigen::VectorXd& g, double sigma,
                           double rho) {
    const Eigen::Index n = Xb.rows();
    double d = std::sqrt(1.0 - rho * rho);
    Eigen::VectorXd lpb = Xb * a, lpc = Xc * g;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        double e = (mc(i) - lpc(i)) / sigma;
        double t = (2.0 * mb(i) - 1.0) * (lpb(i) + rho * e) / d;
        ll += -std::log(sigma) - 0.5 * e * e - log_sqrt_2pi + log_norm_cdf(t);
    }
    return ll;
}

inline double loglik_trivprobit(const BinaryCells& cells, const std::vector<Eigen::VectorXd>& coef,
                                double r12, double r13, double r23) {
    // reject correlation matrices outside the positive definite region
    double det = 1.0 - r12 * r12 - r13 * r13 - r23 * r23 + 2.0 * r12 * r13 * r23;
    if (det <= 1e-12) return -std::numeric_limits<double>::infinity();
    std::array<Eigen::VectorXd, 3> lp;
    for (int j = 0; j < 3; ++j) lp[j] = cells.X[static_cast<std::size_t>(j)] * coef[static_cast<std::size_t>(j)];
    double ll = 0.0;
    for (Eigen::Index i = 0; i < cells.count.size(); ++i) {
        double q1 = cells.q(i, 0), q2 = cells.q(i, 1), q3 = cells.q(i, 2);
        double p = tvn_cdf(q1 * lp[0](i), q2 * lp[1](i), q3 * lp[2](i), q1 * q2 * r12,
                           q1 * q3 * r13, q2 * q3 * r23);
        ll += cells.count(i) * safe_log(p);
    }
    return ll;
}

// conditional pieces for the trivariate gradient (Plackett identities)
inline double tvn_dh(double h1, double h2, double h3, double r12, double r13, double r23) {
    double s2 = std::sqrt(1.0 - r12 * r12), s3 = std::sqrt(1.0 - r13 * r13);
    double rc = std::clamp((r23 - r12 * r13) / (s2 * s3), -1.0 + 1e-12, 1.0 - 1e-12);
    return norm_pdf(h1) * bvn_cdf((h2 - r12 * h1) / s2, (h3 - r13 * h1) / s3, rc);
}

inline double tvn_drho(double h1, double h2, double h3, double r12, double r13, double r23) {
    // derivative with respect to the (1,2) correlation
    double om = 1.0 - r12 * r12;
    double b1 = (r13 - r12 * r23) / om, b2 = (r23 - r12 * r13) / om;
    double v = 1.0 - (r13 * r13 + r23 * r23 - 2.0 * r12 * r13 * r23) / om;
    v = std::max(v, 1e-12);
    return bvn_pdf(h1, h2, r12) * norm_cdf((h3 - b1 * h1 - b2 * h2) / std::sqrt(v));
}

}  // namespace detail

// Evaluate the joint mediator log-likelihood at given parameters (any family).
inline double joint_loglik(const Dataset& data, const JointMediatorSpec& spec,
                           const std::vector<Eigen::VectorXd>& coef,
                           const CovarianceMatrix& sigma) {
    spec.validate();
    const std::size_t d = spec.dim();
    std::vector<Eigen::MatrixXd> X;
    std::vector<Eigen::VectorXd> m;
    for (std::size_t j = 0; j < d; ++j) {
        X.push_back(build_design(data, spec.designs[j]));
        m.push_back(data.column(spec.mediators[j].name));
    }
    int nbin = 0;
    for (const auto& mr : spec.mediators) nbin += (mr.kind == MediatorKind::binary);
    if (nbin == 0) return detail::loglik_continuous(X, m, coef, sigma.matrix());
    if (nbin == static_cast<int>(d)) {
        auto cells = detail::group_cells(X, m);
        if (d == 2) return detail::loglik_bivprobit(cells, coef[0], coef[1], sigma.correlation(0, 1));
        return detail::loglik_trivprobit(cells, coef, sigma.correlation(0, 1),
                                         sigma.correlation(0, 2), sigma.correlation(1, 2));
    }
    std::size_t bi = (spec.mediators[0].kind == MediatorKind::binary) ? 0 : 1;
    std::size_t ci = 1 - bi;
    return detail::loglik_mixed(X[bi], X[ci], m[bi], m[ci], coef[bi], coef[ci],
                                sigma.sigma(static_cast<int>(ci)),
                                sigma.correlation(static_cast<int>(bi), static_cast<int>(ci)));
}

namespace detail {

struct JointCore {
    std::vector<Eigen::VectorXd> coef;
    Eigen::MatrixXd sigma;
    double loglik = 0.0;
    int iterations = 0;
};

// Independent (existing-approach) fits: univariate model per mediator with a
// diagonal covariance. Continuous margins carry the MLE scale so that the
// joint fit with correlations pinned at zero coincides exactly.
inline JointCore fit_core_independent(const std::vector<Eigen::MatrixXd>& X,
                                      const std::vector<Eigen::VectorXd>& m,
                                      const std::vector<MediatorKind>& kinds,
                                      const std::vector<std::vector<std::string>>& names,
                                      const FitOptions& opts) {
    const std::size_t d = X.size();
    JointCore core;
    core.sigma = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(d),
                                           static_cast<Eigen::Index>(d));
    for (std::size_t j = 0; j < d; ++j) {
        if (kinds[j] == MediatorKind::continuous) {
            auto fit = fit_ols(X[j], m[j], names[j]);
            core.coef.push_back(fit.coef);
            core.sigma(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) =
                fit.sigma_mle * fit.sigma_mle;
            core.loglik += -0.5 * static_cast<double>(X[j].rows()) *
                           (std::log(2.0 * M_PI * fit.sigma_mle * fit.sigma_mle) + 1.0);
        } else {
            auto fit = fit_probit(X[j], m[j], names[j], opts);
            core.coef.push_back(fit.coef);
            core.loglik += fit.loglik;
            core.iterations += fit.iterations;
        }
    }
    return core;
}

inline JointCore fit_core_continuous(const std::vector<Eigen::MatrixXd>& X,
                                     const std::vector<Eigen::VectorXd>& m,
                                     const std::vector<std::vector<std::string>>& names) {
    const std::size_t d = X.size();
    for (std::size_t j = 1; j < d; ++j)
        if (X[j].rows() != X[0].rows() || X[j].cols() != X[0].cols() ||
            (X[j] - X[0]).lpNorm<Eigen::Infinity>() != 0.0)
            throw usage_error(
                "continuous joint fit requires identical regressors across equations");
    const Eigen::Index n = X[0].rows(), p = X[0].cols();
    if (n <= p) throw design_error("joint linear model: not enough observations");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X[0]);
    check_rank(qr, names[0]);

    JointCore core;
    Eigen::MatrixXd resid(n, static_cast<Eigen::Index>(d));
    for (std::size_t j = 0; j < d; ++j) {
        core.coef.push_back(qr.solve(m[j]));
        resid.col(static_cast<Eigen::Index>(j)) = m[j] - X[0] * core.coef[j];
    }
    core.sigma = resid.transpose() * resid / static_cast<double>(n);
    // surfaces collinear mediators as a named pivot failure
    chol_lower(CovarianceMatrix(core.sigma));
    core.loglik = loglik_continuous(X, m, core.coef, core.sigma);
    return core;
}

// tanh with the image clamped strictly inside (-1, 1). Long line-search probes
// saturate tanh to exactly +-1, which the Gaussian CDFs reject; clamping keeps
// the objective finite there so the search backs off instead of aborting.
inline double tanh_rho(double z) {
    const double cap = 1.0 - 1e-10;
    return std::clamp(std::tanh(z), -cap, cap);
}

inline JointCore fit_core_bivprobit(const std::vector<Eigen::MatrixXd>& X,
                                    const std::vector<Eigen::VectorXd>& m,
                                    const std::vector<std::vector<std::string>>& names,
                                    const FitOptions& opts) {
    auto start1 = fit_probit(X[0], m[0], names[0], opts);  // also screens for separation
    auto start2 = fit_probit(X[1], m[1], names[1], opts);
    auto cells = group_cells(X, m);
    const Eigen::Index p1 = X[0].cols(), p2 = X[1].cols();

    auto unpack = [&](const Eigen::VectorXd& th) {
        return std::tuple<Eigen::VectorXd, Eigen::VectorXd, double>(
            th.segment(0, p1), th.segment(p1, p2), tanh_rho(th(p1 + p2)));
    };
    auto f = [&](const Eigen::VectorXd& th) {
        auto [a, g, rho] = unpack(th);
        return loglik_bivprobit(cells, a, g, rho);
    };
    auto grad = [&](const Eigen::VectorXd& th) {
        auto [a, g, rho] = unpack(th);
        Eigen::VectorXd lp1 = cells.X[0] * a, lp2 = cells.X[1] * g;
        Eigen::VectorXd w1(cells.count.size()), w2(cells.count.size());
        double drho = 0.0;
        double om = std::sqrt(1.0 - rho * rho);
        for (Eigen::Index i = 0; i < cells.count.size(); ++i) {
            double q1 = cells.q(i, 0), q2 = cells.q(i, 1);
            double h = q1 * lp1(i), k = q2 * lp2(i), r = q1 * q2 * rho;
            double p = std::max(bvn_cdf(h, k, r), 1e-300);
            double c = cells.count(i) / p;
            w1(i) = c * q1 * norm_pdf(h) * norm_cdf((k - r * h) / om);
            w2(i) = c * q2 * norm_pdf(k) * norm_cdf((h - r * k) / om);
            drho += c * q1 * q2 * bvn_pdf(h, k, r);
        }
        Eigen::VectorXd out(p1 + p2 + 1);
        out.segment(0, p1) = cells.X[0].transpose() * w1;
        out.segment(p1, p2) = cells.X[1].transpose() * w2;
        out(p1 + p2) = drho * (1.0 - rho * rho);  // chain rule through tanh
        return out;
    };

    Eigen::VectorXd th0(p1 + p2 + 1);
    th0 << start1.coef, start2.coef, 0.0;
    MaximizeOptions mo;
    // scaled like fit_probit: ~1e-7 per observation is the reachable floor
    mo.grad_tol = std::max(1e-6, 1e-7 * cells.count.sum());
    mo.max_iter = opts.max_iter > 200 ? opts.max_iter : 200;
    mo.observer = [&](const Eigen::VectorXd& th) {
        if (th.segment(0, p1 + p2).lpNorm<Eigen::Infinity>() > opts.coef_cap)
            throw separation_error("bivariate probit: coefficients diverged (separation)");
    };
    auto res = maximize(f, grad, th0, mo);
    if (!res.converged)
        throw nonconvergence_error("bivariate probit: " + res.message);

    auto [a, g, rho] = unpack(res.x);
    JointCore core;
    core.coef = {a, g};
    core.sigma = Eigen::Matrix2d{{1.0, rho}, {rho, 1.0}};
    core.loglik = res.value;
    core.iterations = res.iterations;
    return core;
}

inline JointCore fit_core_mixed(const std::vector<Eigen::MatrixXd>& X,
                                const std::vector<Eigen::VectorXd>& m,
                                const std::vector<MediatorKind>& kinds,
                                const std::vector<std::vector<std::string>>& names,
                                const FitOptions& opts) {
    const std::size_t bi = (kinds[0] == MediatorKind::binary) ? 0 : 1;
    const std::size_t ci = 1 - bi;
    auto startb = fit_probit(X[bi], m[bi], names[bi], opts);
    auto startc = fit_ols(X[ci], m[ci], names[ci]);
    const Eigen::Index pb = X[bi].cols(), pc = X[ci].cols();
    const Eigen::MatrixXd &Xb = X[bi], &Xc = X[ci];
    const Eigen::VectorXd &mb = m[bi], &mc = m[ci];

    auto unpack = [&](const Eigen::VectorXd& th) {
        return std::tuple<Eigen::VectorXd, Eigen::VectorXd, double, double>(
            th.segment(0, pb), th.segment(pb, pc), std::exp(th(pb + pc)),
            tanh_rho(th(pb + pc + 1)));
    };
    auto f = [&](const Eigen::VectorXd& th) {
        auto [a, g, sigma, rho] = unpack(th);
        return loglik_mixed(Xb, Xc, mb, mc, a, g, sigma, rho);
    };
    auto grad = [&](const Eigen::VectorXd& th) {
        auto [a, g, sigma, rho] = unpack(th);
        double d = std::sqrt(1.0 - rho * rho);
        Eigen::VectorXd lpb = Xb * a, lpc = Xc * g;
        Eigen::VectorXd wb(Xb.rows()), wc(Xc.rows());
        double dls = 0.0, deta = 0.0;
        for (Eigen::Index i = 0; i < Xb.rows(); ++i) {
            double q = 2.0 * mb(i) - 1.0;
            double e = (mc(i) - lpc(i)) / sigma;
            double w = (lpb(i) + rho * e) / d;
            double G = inv_mills(q * w);
            wb(i) = q * G / d;
            wc(i) = (e - q * G * rho / d) / sigma;
            dls += (e * e - 1.0) - q * G * rho * e / d;
            deta += q * G * (e * d + w * rho);
        }
        Eigen::VectorXd out(pb + pc + 2);
        out.segment(0, pb) = Xb.transpose() * wb;
        out.segment(pb, pc) = Xc.transpose() * wc;
        out(pb + pc) = dls;
        out(pb + pc + 1) = deta;
        return out;
    };

    Eigen::VectorXd th0(pb + pc + 2);
    th0 << startb.coef, startc.coef, std::log(startc.sigma_mle), 0.0;
    MaximizeOptions mo;
    // scaled like fit_probit: ~1e-7 per observation is the reachable floor
    mo.grad_tol = std::max(1e-6, 1e-7 * static_cast<double>(Xb.rows()));
    mo.max_iter = opts.max_iter > 200 ? opts.max_iter : 200;
    mo.observer = [&](const Eigen::VectorXd& th) {
        if (th.segment(0, pb + pc).lpNorm<Eigen::Infinity>() > opts.coef_cap)
            throw separation_error("mixed mediator model: coefficients diverged (separation)");
    };
    auto res = maximize(f, grad, th0, mo);
    if (!res.converged)
        throw nonconvergence_error("mixed mediator model: " + res.message);

    auto [a, g, sigma, rho] = unpack(res.x);
    JointCore core;
    core.coef.resize(2);
    core.coef[bi] = a;
    core.coef[ci] = g;
    core.sigma = Eigen::Matrix2d::Identity();
    core.sigma(static_cast<Eigen::Index>(ci), static_cast<Eigen::Index>(ci)) = sigma * sigma;
    core.sigma(0, 1) = core.sigma(1, 0) = rho * sigma;
    core.loglik = res.value;
    core.iterations = res.iterations;
    return core;
}

inline JointCore fit_core_trivprobit(const std::vector<Eigen::MatrixXd>& X,
                                     const std::vector<Eigen::VectorXd>& m,
                                     const std::vector<std::vector<std::string>>& names,
                                     const FitOptions& opts) {
    std::vector<RegressionFit> starts;
    for (std::size_t j = 0; j < 3; ++j) starts.push_back(fit_probit(X[j], m[j], names[j], opts));
    auto cells = group_cells(X, m);
    const std::array<Eigen::Index, 3> p = {X[0].cols(), X[1].cols(), X[2].cols()};
    const Eigen::Index pt = p[0] + p[1] + p[2];

    auto unpack = [&](const Eigen::VectorXd& th) {
        std::vector<Eigen::VectorXd> coef{th.segment(0, p[0]), th.segment(p[0], p[1]),
                                          th.segment(p[0] + p[1], p[2])};
        return std::pair<std::vector<Eigen::VectorXd>, std::array<double, 3>>(
            coef, {tanh_rho(th(pt)), tanh_rho(th(pt + 1)), tanh_rho(th(pt + 2))});
    };
    auto f = [&](const Eigen::VectorXd& th) {
        auto [coef, r] = unpack(th);
        return loglik_trivprobit(cells, coef, r[0], r[1], r[2]);
    };
    auto grad = [&](const Eigen::VectorXd& th) {
        auto [coef, r] = unpack(th);
        std::array<Eigen::VectorXd, 3> lp;
        for (std::size_t j = 0; j < 3; ++j) lp[j] = cells.X[j] * coef[j];
        std::array<Eigen::VectorXd, 3> w;
        for (auto& v : w) v.resize(cells.count.size());
        std::array<double, 3> dr{0.0, 0.0, 0.0};
        for (Eigen::Index i = 0; i < cells.count.size(); ++i) {
            double q1 = cells.q(i, 0), q2 = cells.q(i, 1), q3 = cells.q(i, 2);
            double h1 = q1 * lp[0](i), h2 = q2 * lp[1](i), h3 = q3 * lp[2](i);
            double r12 = q1 * q2 * r[0], r13 = q1 * q3 * r[1], r23 = q2 * q3 * r[2];
            double pr = std::max(tvn_cdf(h1, h2, h3, r12, r13, r23), 1e-300);
            double c = cells.count(i) / pr;
            w[0](i) = c * q1 * tvn_dh(h1, h2, h3, r12, r13, r23);
            w[1](i) = c * q2 * tvn_dh(h2, h1, h3, r12, r23, r13);
            w[2](i) = c * q3 * tvn_dh(h3, h1, h2, r13, r23, r12);
            dr[0] += c * q1 * q2 * tvn_drho(h1, h2, h3, r12, r13, r23);
            dr[1] += c * q1 * q3 * tvn_drho(h1, h3, h2, r13, r12, r23);
            dr[2] += c * q2 * q3 * tvn_drho(h2, h3, h1, r23, r12, r13);
        }
        Eigen::VectorXd out(pt + 3);
        out.segment(0, p[0]) = cells.X[0].transpose() * w[0];
        out.segment(p[0], p[1]) = cells.X[1].transpose() * w[1];
        out.segment(p[0] + p[1], p[2]) = cells.X[2].transpose() * w[2];
        for (int k = 0; k < 3; ++k) out(pt + k) = dr[static_cast<std::size_t>(k)] * (1.0 - r[static_cast<std::size_t>(k)] * r[static_cast<std::size_t>(k)]);
        return out;
    };

    Eigen::VectorXd th0(pt + 3);
    th0 << starts[0].coef, starts[1].coef, starts[2].coef, 0.0, 0.0, 0.0;
    MaximizeOptions mo;
    // Score tolerance scaled to the sample: a mean per-observation score below
    // 1e-6 puts the iterate far inside any standard error, while an absolute
    // cutoff would be unreachable at large n (the summed score's resolution in
    // doubles grows with the log-likelihood's magnitude).
    mo.grad_tol = std::max(1e-5, 1e-6 * cells.count.sum());
    mo.max_iter = opts.max_iter > 300 ? opts.max_iter : 300;
    mo.observer = [&](const Eigen::VectorXd& th) {
        if (th.segment(0, pt).lpNorm<Eigen::Infinity>() > opts.coef_cap)
            throw separation_error("trivariate probit: coefficients diverged (separation)");
    };
    auto res = maximize(f, grad, th0, mo);
    if (!res.converged)
        throw nonconvergence_error("trivariate probit: " + res.message);

    auto [coef, r] = unpack(res.x);
    JointCore core;
    core.coef = coef;
    core.sigma = Eigen::Matrix3d::Identity();
    core.sigma(0, 1) = core.sigma(1, 0) = r[0];
    core.sigma(0, 2) = core.sigma(2, 0) = r[1];
    core.sigma(1, 2) = core.sigma(2, 1) = r[2];
    core.loglik = res.value;
    core.iterations = res.iterations;
    return core;
}

inline JointCore fit_core(const std::vector<Eigen::MatrixXd>& X,
                          const std::vector<Eigen::VectorXd>& m,
                          const std::vector<MediatorKind>& kinds,
                          const std::vector<std::vector<std::string>>& names,
                          const FitOptions& opts, bool independent) {
    if (independent) return fit_core_independent(X, m, kinds, names, opts);
    int nbin = 0;
    for (auto k : kinds) nbin += (k == MediatorKind::binary);
    const auto d = kinds.size();
    if (nbin == 0) return fit_core_continuous(X, m, names);
    if (nbin == static_cast<int>(d))
        return (d == 2) ? fit_core_bivprobit(X, m, names, opts)
                        : fit_core_trivprobit(X, m, names, opts);
    return fit_core_mixed(X, m, kinds, names, opts);
}

}  // namespace detail

inline JointMediatorFit fit_joint_impl(const Dataset& data, const JointMediatorSpec& spec,
                                       const FitOptions& opts, bool independent) {
    spec.validate();
    std::vector<Eigen::MatrixXd> X;
    std::vector<Eigen::VectorXd> m;
    std::vector<MediatorKind> kinds;
    std::vector<std::vector<std::string>> names;
    for (std::size_t j = 0; j < spec.dim(); ++j) {
        X.push_back(build_design(data, spec.designs[j]));
        m.push_back(data.column(spec.mediators[j].name));
        kinds.push_back(spec.mediators[j].kind);
        names.push_back(spec.designs[j].term_names());
    }
    auto core = detail::fit_core(X, m, kinds, names, opts, independent);
    JointMediatorFit fit;
    fit.spec = spec;
    fit.coef = std::move(core.coef);
    fit.sigma = CovarianceMatrix(core.sigma);
    fit.loglik = core.loglik;
    fit.iterations = core.iterations;
    fit.independent = independent;
    for (double r : fit.sigma.correlations())
        if (std::fabs(r) > 0.99) fit.boundary_rho = true;
    return fit;
}

// Joint fit with correlated errors (the proposed approach).
inline JointMediatorFit fit_joint(const Dataset& data, const JointMediatorSpec& spec,
                                  const FitOptions& opts = {}) {
    return fit_joint_impl(data, spec, opts, false);
}

// Independent univariate fits (the existing approach), in the same shape.
inline JointMediatorFit fit_independent(const Dataset& data, const JointMediatorSpec& spec,
                                        const FitOptions& opts = {}) {
    return fit_joint_impl(data, spec, opts, true);
}

// Linear-predictor decomposition used by the simulation engine: per equation,
// the part that never changes under assignments plus the coefficient that
// multiplies the (possibly counterfactual) group value. Supports group main
// effects and group-by-confounder products; relies on the group being 0/1.
struct MediatorEngineModel {
    int dim = 0;
    std::array<bool, 3> binary{};
    Eigen::MatrixXd base;    // n x dim
    Eigen::MatrixXd gslope;  // n x dim
    Eigen::MatrixXd chol;    // dim x dim lower factor of the error covariance
};

inline MediatorEngineModel engine_model(const JointMediatorFit& fit, const Dataset& data) {
    const auto n = static_cast<Eigen::Index>(data.n());
    const int d = static_cast<int>(fit.spec.dim());
    MediatorEngineModel em;
    em.dim = d;
    em.base = Eigen::MatrixXd::Zero(n, d);
    em.gslope = Eigen::MatrixXd::Zero(n, d);
    em.chol = chol_lower(fit.sigma);
    const std::string& grp = fit.spec.group;
    for (int j = 0; j < d; ++j) {
        em.binary[static_cast<std::size_t>(j)] =
            fit.spec.mediators[static_cast<std::size_t>(j)].kind == MediatorKind::binary;
        const auto& terms = fit.spec.designs[static_cast<std::size_t>(j)].terms;
        const auto& beta = fit.coef[static_cast<std::size_t>(j)];
        for (std::size_t t = 0; t < terms.size(); ++t) {
            const Term& tm = terms[t];
            double b = beta(static_cast<Eigen::Index>(t));
            switch (tm.kind) {
                case Term::Kind::intercept:
                    em.base.col(j).array() += b;
                    break;
                case Term::Kind::main:
                    if (tm.a == grp)
                        em.gslope.col(j).array() += b;
                    else
                        em.base.col(j) += b * data.column(tm.a);
                    break;
                case Term::Kind::product: {
                    bool ag = tm.a == grp, bg = tm.b == grp;
                    if (ag && bg)
                        em.gslope.col(j).array() += b;  // group is 0/1 so a^2 = a
                    else if (ag)
                        em.gslope.col(j) += b * data.column(tm.b);
                    else if (bg)
                        em.gslope.col(j) += b * data.column(tm.a);
                    else
                        em.base.col(j) +=
                            b * data.column(tm.a).cwiseProduct(data.column(tm.b)).eval();
                    break;
                }
            }
        }
    }
    return em;
}

// Draw one pseudopopulation of mediators under a per-mediator assignment
// (entry -1 keeps each individual's own group, i.e. the natural course).
// Consumes dim normals per row, in row order.
inline Eigen::MatrixXd simulate_mediators(const JointMediatorFit& fit, const Dataset& data,
                                          const std::vector<int>& assign, Sampler& sampler) {
    if (assign.size() != fit.spec.dim())
        throw usage_error("simulate_mediators: assignment length must match mediator count");
    auto em = engine_model(fit, data);
    const auto n = static_cast<Eigen::Index>(data.n());
    const auto& a_col = data.column(fit.spec.group);
    Eigen::MatrixXd out(n, em.dim);
    Eigen::VectorXd z(em.dim), eps(em.dim);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int j = 0; j < em.dim; ++j) z(j) = sampler.normal();
        eps = em.chol * z;
        for (int j = 0; j < em.dim; ++j) {
            double a = assign[static_cast<std::size_t>(j)] < 0
                           ? a_col(i)
                           : static_cast<double>(assign[static_cast<std::size_t>(j)]);
            double v = em.base(i, j) + em.gslope(i, j) * a + eps(j);
            out(i, j) = em.binary[static_cast<std::size_t>(j)] ? (v > 0.0 ? 1.0 : 0.0) : v;
        }
    }
    return out;
}

// Fits the joint model separately in each group (dropping the group term,
// which is constant within a group) and reports how close the two error
// covariance matrices are. Supports judging the shared-covariance assumption.
inline CovarianceDiagnostic covariance_equality_check(const Dataset& data,
                                                      const JointMediatorSpec& spec,
                                                      const FitOptions& opts = {}) {
    spec.validate();
    JointMediatorSpec reduced = spec;
    for (auto& d : reduced.designs) {
        std::vector<Term> kept;
        for (const auto& t : d.terms) {
            bool touches_group = (t.kind == Term::Kind::main && t.a == spec.group) ||
                                 (t.kind == Term::Kind::product &&
                                  (t.a == spec.group || t.b == spec.group));
            if (!touches_group) kept.push_back(t);
        }
        d.terms = std::move(kept);
    }

    std::array<Eigen::MatrixXd, 2> sig;
    for (int g = 0; g < 2; ++g) {
        const auto& rows = data.group_rows(g);
        std::vector<Eigen::MatrixXd> X;
        std::vector<Eigen::VectorXd> m;
        std::vector<MediatorKind> kinds;
        std::vector<std::vector<std::string>> names;
        for (std::size_t j = 0; j < reduced.dim(); ++j) {
            Eigen::MatrixXd Xfull = build_design(data, reduced.designs[j]);
            const auto& mfull = data.column(reduced.mediators[j].name);
            Eigen::MatrixXd Xg(rows.size(), Xfull.cols());
            Eigen::VectorXd mg(rows.size());
            for (std::size_t i = 0; i < rows.size(); ++i) {
                Xg.row(static_cast<Eigen::Index>(i)) = Xfull.row(rows[i]);
                mg(static_cast<Eigen::Index>(i)) = mfull(rows[i]);
            }
            X.push_back(std::move(Xg));
            m.push_back(std::move(mg));
            kinds.push_back(reduced.mediators[j].kind);
            names.push_back(reduced.designs[j].term_names());
        }
        try {
            sig[static_cast<std::size_t>(g)] =
                detail::fit_core(X, m, kinds, names, opts, false).sigma;
        } catch (const error& e) {
            throw error(e.code(), std::string("group ") + std::to_string(g) +
                                      " covariance fit: " + e.what());
        }
    }
    CovarianceDiagnostic diag;
    diag.sigma_group0 = CovarianceMatrix(sig[0]);
    diag.sigma_group1 = CovarianceMatrix(sig[1]);
    diag.max_abs_diff = (sig[0] - sig[1]).cwiseAbs().maxCoeff();
    return diag;
}

}  // namespace cdecomp
