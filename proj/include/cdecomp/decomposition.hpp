#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cdecomp/data.hpp"
#include "cdecomp/design.hpp"
#include "cdecomp/errors.hpp"
#include "cdecomp/joint.hpp"
#include "cdecomp/normal.hpp"
#include "cdecomp/parallel.hpp"
#include "cdecomp/regression.hpp"
#include "cdecomp/rng.hpp"

namespace cdecomp {

enum class ContrastMeasure { rr, rd };
enum class EstimatorKind { proposed, existing };

inline const char* measure_name(ContrastMeasure m) { return m == ContrastMeasure::rr ? "rr" : "rd"; }
inline const char* estimator_name(EstimatorKind e) {
    return e == EstimatorKind::proposed ? "proposed" : "existing";
}

// Stream-id tags so independent random streams never collide.
namespace streams {
inline constexpr std::uint64_t boot = 1;
inline constexpr std::uint64_t mc = 2;
inline constexpr std::uint64_t scenario = 3;
inline constexpr std::uint64_t oracle = 4;
inline constexpr std::uint64_t replicate = 5;
inline constexpr std::uint64_t fixture = 6;
}  // namespace streams

// A per-mediator group assignment: -1 keeps the individual's own group
// (natural course), 0/1 equalizes that mediator to the named group's
// distribution.
struct Intervention {
    std::vector<int> assign;

    static Intervention natural(std::size_t dim) {
        return Intervention{std::vector<int>(dim, -1)};
    }
    static Intervention equalize(std::vector<int> v) { return Intervention{std::move(v)}; }

    bool is_natural() const {
        return std::all_of(assign.begin(), assign.end(), [](int a) { return a < 0; });
    }

    std::string key() const {
        if (is_natural()) return "natural";
        std::string k;
        for (int a : assign) k += static_cast<char>('0' + a);
        return k;
    }

    void validate(std::size_t dim) const {
        if (assign.size() != dim)
            throw usage_error("intervention: assignment length must equal mediator count");
        for (int a : assign)
            if (a < -1 || a > 1) throw usage_error("intervention: entries must be -1, 0, or 1");
        bool any_nat = false, all_nat = true;
        for (int a : assign) {
            any_nat |= (a < 0);
            all_nat &= (a < 0);
        }
        if (any_nat && !all_nat)
            throw usage_error("intervention: mixed natural/equalized assignments not supported");
    }
};

// Natural course plus every 0/1 assignment except all-ones, which duplicates
// the natural course on the numerator (group 1) rows.
inline std::vector<Intervention> intervention_lattice(std::size_t dim) {
    std::vector<Intervention> out{Intervention::natural(dim)};
    for (std::uint32_t mask = 0; mask + 1 < (1u << dim); ++mask) {
        std::vector<int> v(dim);
        for (std::size_t j = 0; j < dim; ++j) v[j] = (mask >> (dim - 1 - j)) & 1u;
        out.push_back(Intervention::equalize(std::move(v)));
    }
    return out;
}

// Outcome linear predictor split into: a per-row part that never changes under
// interventions, per-row coefficients on each mediator (mediator main effects
// plus mediator-by-covariate products), and constant mediator-pair products.
struct OutcomePredictor {
    Eigen::VectorXd ybase;
    Eigen::MatrixXd slope;       // n x dim
    double inter[3][3] = {{0}};  // inter[j][l], j <= l
    int dim = 0;
};

inline OutcomePredictor outcome_predictor(const RegressionFit& yfit, const Dataset& data) {
    const auto& meds = data.roles().mediators;
    const auto n = static_cast<Eigen::Index>(data.n());
    OutcomePredictor pr;
    pr.dim = static_cast<int>(meds.size());
    pr.ybase = Eigen::VectorXd::Zero(n);
    pr.slope = Eigen::MatrixXd::Zero(n, pr.dim);
    auto med_index = [&](const std::string& name) {
        for (std::size_t j = 0; j < meds.size(); ++j)
            if (meds[j].name == name) return static_cast<int>(j);
        return -1;
    };
    const auto& terms = yfit.spec.terms;
    if (terms.empty()) throw usage_error("outcome fit carries no design terms");
    for (std::size_t t = 0; t < terms.size(); ++t) {
        const Term& tm = terms[t];
        double b = yfit.coef(static_cast<Eigen::Index>(t));
        switch (tm.kind) {
            case Term::Kind::intercept: pr.ybase.array() += b; break;
            case Term::Kind::main: {
                int j = med_index(tm.a);
                if (j >= 0)
                    pr.slope.col(j).array() += b;
                else
                    pr.ybase += b * data.column(tm.a);
                break;
            }
            case Term::Kind::product: {
                int j = med_index(tm.a), l = med_index(tm.b);
                if (j >= 0 && l >= 0) {
                    if (j > l) std::swap(j, l);
                    pr.inter[j][l] += b;
                } else if (j >= 0) {
                    pr.slope.col(j) += b * data.column(tm.b);
                } else if (l >= 0) {
                    pr.slope.col(l) += b * data.column(tm.a);
                } else {
                    pr.ybase += b * data.column(tm.a).cwiseProduct(data.column(tm.b)).eval();
                }
                break;
            }
        }
    }
    return pr;
}

namespace detail {

inline double outcome_lp(const OutcomePredictor& pr, Eigen::Index i, const double* m) {
    double lp = pr.ybase(i);
    for (int j = 0; j < pr.dim; ++j) {
        lp += pr.slope(i, j) * m[j];
        for (int l = j; l < pr.dim; ++l) {
            double c = pr.inter[j][l];
            if (c != 0.0) lp += c * m[j] * m[l];
        }
    }
    return lp;
}

}  // namespace detail

// Reference pseudopopulation generator (the readable form of the engine): K
// repetitions of the whole population under one intervention. Per repetition
// k the stream is rng.child(k); each row consumes dim normals then one
// uniform, so repeated calls with different interventions share the same
// errors and outcome draws (common random numbers).
inline Eigen::MatrixXd pseudopopulation_outcomes(const RegressionFit& yfit,
                                                 const JointMediatorFit& mfit,
                                                 const Dataset& data, const Intervention& iv,
                                                 int K, const RngStream& rng,
                                                 bool expected = false) {
    iv.validate(mfit.spec.dim());
    auto pr = outcome_predictor(yfit, data);
    auto em = engine_model(mfit, data);
    const auto n = static_cast<Eigen::Index>(data.n());
    const auto& a_col = data.column(mfit.spec.group);
    Eigen::MatrixXd out(K, n);
    double z[3], eps[3], m[3];
    for (int k = 0; k < K; ++k) {
        Sampler s(rng.child(static_cast<std::uint64_t>(k)));
        for (Eigen::Index i = 0; i < n; ++i) {
            for (int j = 0; j < em.dim; ++j) z[j] = s.normal();
            double u = s.uniform01();
            for (int j = 0; j < em.dim; ++j) {
                eps[j] = 0.0;
                for (int l = 0; l <= j; ++l) eps[j] += em.chol(j, l) * z[l];
            }
            for (int j = 0; j < em.dim; ++j) {
                int aj = iv.assign[static_cast<std::size_t>(j)];
                double a = aj < 0 ? a_col(i) : static_cast<double>(aj);
                double v = em.base(i, j) + em.gslope(i, j) * a + eps[j];
                m[j] = em.binary[static_cast<std::size_t>(j)] ? (v > 0.0 ? 1.0 : 0.0) : v;
            }
            double p = expit(detail::outcome_lp(pr, i, m));
            out(k, i) = expected ? p : (u < p ? 1.0 : 0.0);
        }
    }
    return out;
}

struct ContrastResult {
    double estimate = 0.0;
    Eigen::VectorXd per_rep;
};

// Ratio or difference of group-1 mean risk under `num` to group-0 mean risk
// under `den`, averaged over repetitions. The denominator draws come from the
// natural course, so every contrast in a decomposition shares it.
inline ContrastResult contrast(const Eigen::MatrixXd& num, const Eigen::MatrixXd& den,
                               const Eigen::VectorXd& group, ContrastMeasure measure) {
    if (num.rows() != den.rows() || num.cols() != den.cols() ||
        num.cols() != group.size())
        throw usage_error("contrast: draw matrices and group vector must agree in shape");
    const auto K = num.rows();
    ContrastResult res;
    res.per_rep.resize(K);
    double n1 = 0.0, n0 = 0.0;
    for (Eigen::Index i = 0; i < group.size(); ++i) (group(i) == 1.0 ? n1 : n0) += 1.0;
    if (n1 == 0.0 || n0 == 0.0) throw validation_error("contrast: both groups must be present");
    for (Eigen::Index k = 0; k < K; ++k) {
        double s1 = 0.0, s0 = 0.0;
        for (Eigen::Index i = 0; i < group.size(); ++i) {
            if (group(i) == 1.0)
                s1 += num(k, i);
            else
                s0 += den(k, i);
        }
        double risk1 = s1 / n1, risk0 = s0 / n0;
        if (measure == ContrastMeasure::rr) {
            if (risk0 == 0.0)
                throw degenerate_contrast_error(
                    "group-0 mean risk is zero in repetition " + std::to_string(k + 1) +
                    "; risk ratio undefined");
            res.per_rep(k) = risk1 / risk0;
        } else {
            res.per_rep(k) = risk1 - risk0;
        }
    }
    res.estimate = res.per_rep.mean();
    return res;
}

struct EffectEstimate {
    double estimate = std::numeric_limits<double>::quiet_NaN();
    bool has_ci = false;
    double lower = std::numeric_limits<double>::quiet_NaN();
    double upper = std::numeric_limits<double>::quiet_NaN();
};

struct EffectSet {
    ContrastMeasure measure = ContrastMeasure::rr;
    EstimatorKind estimator = EstimatorKind::proposed;
    std::uint64_t seed = 0;
    int K = 0, B = 0;
    bool expected_outcomes = false;
    std::size_t n = 0, n_group1 = 0, n_group0 = 0, dropped_rows = 0;
    std::vector<std::string> mediator_names;
    std::vector<MediatorKind> mediator_kinds;
    std::vector<std::pair<std::string, double>> rho;  // empty for the existing estimator
    Eigen::MatrixXd sigma;                            // fitted mediator-error covariance
    int bootstrap_failures = 0;
    EffectEstimate natural;
    std::vector<std::pair<std::string, EffectEstimate>> counterfactual;
    std::vector<std::pair<std::string, EffectEstimate>> reduction;
    std::optional<CovarianceDiagnostic> diagnostic;

    const EffectEstimate& counterfactual_at(const std::string& key) const {
        for (const auto& [k, e] : counterfactual)
            if (k == key) return e;
        throw usage_error("no counterfactual effect '" + key + "'");
    }
    const EffectEstimate& reduction_at(const std::string& key) const {
        for (const auto& [k, e] : reduction)
            if (k == key) return e;
        throw usage_error("no reduction effect '" + key + "'");
    }
};

struct DecompositionConfig {
    int K = 500;
    int B = 200;
    ContrastMeasure measure = ContrastMeasure::rr;
    EstimatorKind estimator = EstimatorKind::proposed;
    std::uint64_t seed = 0;
    int workers = 1;
    bool expected_outcomes = false;
    bool covariance_diagnostic = false;
    FitOptions fit;
};

namespace detail {

// type-7 (R default) quantile on a sorted copy
inline double quantile_type7(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    if (n == 1) return v[0];
    double h = (static_cast<double>(n) - 1.0) * p;
    auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= n) return v[n - 1];
    return v[lo] + (h - static_cast<double>(lo)) * (v[lo + 1] - v[lo]);
}

// One full engine pass for one fitted model pair: per repetition, the group-1
// mean risk under every intervention and the group-0 natural-course mean risk.
// Row i of repetition k consumes dim normals + 1 uniform from rng.child(k),
// matching pseudopopulation_outcomes draw for draw.
struct EnginePass {
    Eigen::MatrixXd num;  // K x niv
    Eigen::VectorXd den;  // K
};

inline EnginePass engine_pass(const Dataset& ds, const RegressionFit& yfit,
                              const JointMediatorFit& mfit,
                              const std::vector<Intervention>& ivs, int K,
                              const RngStream& rng, bool expected) {
    const auto pr = outcome_predictor(yfit, ds);
    const auto em = engine_model(mfit, ds);
    const auto n = static_cast<Eigen::Index>(ds.n());
    const int d = em.dim;
    const auto niv = static_cast<Eigen::Index>(ivs.size());
    const auto& a_col = ds.column(mfit.spec.group);

    // effective group value per intervention for numerator (group-1) rows
    std::vector<std::array<double, 3>> aval(ivs.size());
    for (std::size_t v = 0; v < ivs.size(); ++v)
        for (int j = 0; j < d; ++j) {
            int a = ivs[v].assign[static_cast<std::size_t>(j)];
            aval[v][static_cast<std::size_t>(j)] = a < 0 ? 1.0 : static_cast<double>(a);
        }

    // per-row linear predictors at a=0 and a=1 per equation
    Eigen::MatrixXd lp0 = em.base;
    Eigen::MatrixXd lp1 = em.base + em.gslope;

    bool all_binary = true;
    for (int j = 0; j < d; ++j) all_binary &= em.binary[static_cast<std::size_t>(j)];

    // with all-binary mediators the outcome probability table per row has one
    // entry per mediator pattern; precomputing it removes exp() from the loop
    Eigen::MatrixXd ptab;
    if (all_binary) {
        const int cells = 1 << d;
        ptab.resize(n, cells);
        double m[3];
        for (Eigen::Index i = 0; i < n; ++i)
            for (int c = 0; c < cells; ++c) {
                for (int j = 0; j < d; ++j) m[j] = (c >> j) & 1;
                ptab(i, c) = expit(outcome_lp(pr, i, m));
            }
    }

    EnginePass out;
    out.num = Eigen::MatrixXd::Zero(K, niv);
    out.den = Eigen::VectorXd::Zero(K);
    const double n1 = static_cast<double>(ds.group_rows(1).size());
    const double n0 = static_cast<double>(ds.group_rows(0).size());

    double z[3], eps[3], m[3];
    for (int k = 0; k < K; ++k) {
        Sampler s(rng.child(static_cast<std::uint64_t>(k)));
        Eigen::VectorXd numrow = Eigen::VectorXd::Zero(niv);
        double denk = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            for (int j = 0; j < d; ++j) z[j] = s.normal();
            double u = s.uniform01();
            for (int j = 0; j < d; ++j) {
                eps[j] = 0.0;
                for (int l = 0; l <= j; ++l) eps[j] += em.chol(j, l) * z[l];
            }
            if (a_col(i) == 1.0) {
                if (all_binary) {
                    for (Eigen::Index v = 0; v < niv; ++v) {
                        int cell = 0;
                        for (int j = 0; j < d; ++j) {
                            double lp = aval[static_cast<std::size_t>(v)][static_cast<std::size_t>(j)] == 1.0 ? lp1(i, j) : lp0(i, j);
                            if (lp + eps[j] > 0.0) cell |= (1 << j);
                        }
                        double p = ptab(i, cell);
                        numrow(v) += expected ? p : (u < p ? 1.0 : 0.0);
                    }
                } else {
                    for (Eigen::Index v = 0; v < niv; ++v) {
                        for (int j = 0; j < d; ++j) {
                            double lp = aval[static_cast<std::size_t>(v)][static_cast<std::size_t>(j)] == 1.0 ? lp1(i, j) : lp0(i, j);
                            double val = lp + eps[j];
                            m[j] = em.binary[static_cast<std::size_t>(j)] ? (val > 0.0 ? 1.0 : 0.0) : val;
                        }
                        double p = expit(outcome_lp(pr, i, m));
                        numrow(v) += expected ? p : (u < p ? 1.0 : 0.0);
                    }
                }
            } else {
                // denominator rows follow their natural course (all a = 0)
                if (all_binary) {
                    int cell = 0;
                    for (int j = 0; j < d; ++j)
                        if (lp0(i, j) + eps[j] > 0.0) cell |= (1 << j);
                    double p = ptab(i, cell);
                    denk += expected ? p : (u < p ? 1.0 : 0.0);
                } else {
                    for (int j = 0; j < d; ++j) {
                        double val = lp0(i, j) + eps[j];
                        m[j] = em.binary[static_cast<std::size_t>(j)] ? (val > 0.0 ? 1.0 : 0.0) : val;
                    }
                    double p = expit(outcome_lp(pr, i, m));
                    denk += expected ? p : (u < p ? 1.0 : 0.0);
                }
            }
        }
        out.num.row(k) = numrow.transpose() / n1;
        out.den(k) = denk / n0;
    }
    return out;
}

struct PointEstimates {
    // effect values in lattice order: natural then counterfactuals
    std::vector<double> rr;  // empty if a zero denominator made RR undefined
    std::vector<double> rd;
    int degenerate_rep = 0;  // 1-based repetition index when RR was undefined
};

inline PointEstimates extract_effects(const EnginePass& pass) {
    PointEstimates pt;
    const auto K = pass.den.size();
    const auto niv = pass.num.cols();
    bool rr_ok = true;
    int bad = 0;
    for (Eigen::Index k = 0; k < K; ++k)
        if (pass.den(k) == 0.0) {
            rr_ok = false;
            bad = static_cast<int>(k) + 1;
            break;
        }
    pt.degenerate_rep = bad;
    for (Eigen::Index v = 0; v < niv; ++v) {
        double srr = 0.0, srd = 0.0;
        for (Eigen::Index k = 0; k < K; ++k) {
            if (rr_ok) srr += pass.num(k, v) / pass.den(k);
            srd += pass.num(k, v) - pass.den(k);
        }
        if (rr_ok) pt.rr.push_back(srr / static_cast<double>(K));
        pt.rd.push_back(srd / static_cast<double>(K));
    }
    return pt;
}

}  // namespace detail

struct DualEffects {
    std::optional<EffectSet> rr;
    std::optional<EffectSet> rd;
};

// Full decomposition pipeline: fit outcome and mediator models, run the Monte
// Carlo engine for the natural course and the equalization lattice, bootstrap
// the whole procedure stratified by group, and assemble percentile intervals.
// Computes RR and RD in one pass (they share all draws).
inline DualEffects run_decomposition(const Dataset& data, const DesignSpec& outcome_spec,
                                     const JointMediatorSpec& med_spec,
                                     const DecompositionConfig& cfg, bool need_rr = true,
                                     bool need_rd = true) {
    if (cfg.K < 1) throw usage_error("K must be at least 1");
    if (cfg.B < 0) throw usage_error("B must be nonnegative");
    med_spec.validate();
    const std::size_t dim = med_spec.dim();
    auto ivs = intervention_lattice(dim);
    const auto niv = ivs.size();

    RngStream root(cfg.seed);
    const std::uint64_t est_id = cfg.estimator == EstimatorKind::proposed ? 1 : 2;
    auto mc_for = [&](int b) {
        return root.child(streams::mc, est_id, static_cast<std::uint64_t>(b));
    };

    auto fit_models = [&](const Dataset& ds) {
        std::pair<RegressionFit, JointMediatorFit> fits{
            fit_logistic(ds, outcome_spec, ds.roles().outcome, cfg.fit),
            cfg.estimator == EstimatorKind::proposed ? fit_joint(ds, med_spec, cfg.fit)
                                                     : fit_independent(ds, med_spec, cfg.fit)};
        return fits;
    };

    // point estimates (b = 0)
    auto [yfit, mfit] = fit_models(data);
    auto point = detail::extract_effects(
        detail::engine_pass(data, yfit, mfit, ivs, cfg.K, mc_for(0), cfg.expected_outcomes));
    if (need_rr && point.rr.empty())
        throw degenerate_contrast_error("group-0 mean risk is zero in repetition " +
                                        std::to_string(point.degenerate_rep) +
                                        "; risk ratio undefined");

    // bootstrap replicates
    const auto B = static_cast<std::size_t>(cfg.B);
    std::vector<char> ok(B, 0);
    std::vector<std::string> why(B);
    std::vector<std::vector<double>> boot_rr(B), boot_rd(B);
    const auto& rows0 = data.group_rows(0);
    const auto& rows1 = data.group_rows(1);
    parallel_for(B, cfg.workers, [&](std::size_t bi) {
        int b = static_cast<int>(bi) + 1;
        Sampler s(root.child(streams::boot, static_cast<std::uint64_t>(b)));
        std::vector<Eigen::Index> idx;
        idx.reserve(data.n());
        for (std::size_t i = 0; i < rows0.size(); ++i) idx.push_back(rows0[s.below(rows0.size())]);
        for (std::size_t i = 0; i < rows1.size(); ++i) idx.push_back(rows1[s.below(rows1.size())]);
        try {
            Dataset ds = data.subset(idx);
            auto [yb, mb] = fit_models(ds);
            auto est = detail::extract_effects(detail::engine_pass(
                ds, yb, mb, ivs, cfg.K, mc_for(b), cfg.expected_outcomes));
            if (need_rr && est.rr.empty()) {  // degenerate replicate: drop and count
                why[bi] = "group-0 mean risk is zero in a repetition";
                return;
            }
            boot_rr[bi] = std::move(est.rr);
            boot_rd[bi] = std::move(est.rd);
            ok[bi] = 1;
        } catch (const error& e) {
            why[bi] = e.what();  // fit failure in a resample: drop and count
        }
    });
    int failures = 0;
    std::string first_reason;
    for (std::size_t bi = 0; bi < B; ++bi) {
        if (ok[bi]) continue;
        ++failures;
        if (first_reason.empty() && !why[bi].empty()) first_reason = why[bi];
    }
    if (cfg.B > 0 && failures > cfg.B / 10)
        throw nonconvergence_error("bootstrap: " + std::to_string(failures) + " of " +
                                   std::to_string(cfg.B) +
                                   " resamples failed to produce estimates (more than 10%); "
                                   "first: " +
                                   first_reason);

    // assemble one EffectSet per measure
    auto assemble = [&](ContrastMeasure measure) {
        const auto& pt = measure == ContrastMeasure::rr ? point.rr : point.rd;
        EffectSet es;
        es.measure = measure;
        es.estimator = cfg.estimator;
        es.seed = cfg.seed;
        es.K = cfg.K;
        es.B = cfg.B;
        es.expected_outcomes = cfg.expected_outcomes;
        es.n = data.n();
        es.n_group1 = data.group_rows(1).size();
        es.n_group0 = data.group_rows(0).size();
        es.dropped_rows = data.dropped_rows();
        for (const auto& m : med_spec.mediators) {
            es.mediator_names.push_back(m.name);
            es.mediator_kinds.push_back(m.kind);
        }
        es.sigma = mfit.sigma.matrix();
        if (cfg.estimator == EstimatorKind::proposed) {
            int r = 0;
            for (int i = 0; i < mfit.sigma.dim(); ++i)
                for (int j = i + 1; j < mfit.sigma.dim(); ++j, ++r)
                    es.rho.emplace_back("rho_" + std::to_string(i + 1) + std::to_string(j + 1),
                                        mfit.sigma.correlation(i, j));
        }
        es.bootstrap_failures = failures;

        // per-effect bootstrap columns: natural, counterfactuals, reductions
        auto column = [&](std::size_t v, bool reduction) {
            std::vector<double> col;
            for (std::size_t b = 0; b < B; ++b) {
                if (!ok[b]) continue;
                const auto& src = measure == ContrastMeasure::rr ? boot_rr[b] : boot_rd[b];
                col.push_back(reduction ? src[0] - src[v] : src[v]);
            }
            return col;
        };
        auto make_estimate = [&](double est, std::vector<double>&& col) {
            EffectEstimate e;
            e.estimate = est;
            if (cfg.B > 0 && !col.empty()) {
                e.has_ci = true;
                e.lower = detail::quantile_type7(col, 0.025);
                e.upper = detail::quantile_type7(std::move(col), 0.975);
            }
            return e;
        };
        es.natural = make_estimate(pt[0], column(0, false));
        for (std::size_t v = 1; v < niv; ++v) {
            es.counterfactual.emplace_back(ivs[v].key(), make_estimate(pt[v], column(v, false)));
            es.reduction.emplace_back(ivs[v].key(),
                                      make_estimate(pt[0] - pt[v], column(v, true)));
        }
        return es;
    };

    DualEffects out;
    if (need_rr) out.rr = assemble(ContrastMeasure::rr);
    if (need_rd) out.rd = assemble(ContrastMeasure::rd);

    if (cfg.covariance_diagnostic) {
        auto diag = covariance_equality_check(data, med_spec, cfg.fit);
        if (out.rr) out.rr->diagnostic = diag;
        if (out.rd) out.rd->diagnostic = diag;
    }
    return out;
}

inline EffectSet decompose(const Dataset& data, const DesignSpec& outcome_spec,
                           const JointMediatorSpec& med_spec, const DecompositionConfig& cfg) {
    bool rr = cfg.measure == ContrastMeasure::rr;
    auto dual = run_decomposition(data, outcome_spec, med_spec, cfg, rr, !rr);
    return rr ? *dual.rr : *dual.rd;
}

inline EffectSet decompose_existing(const Dataset& data, const DesignSpec& outcome_spec,
                                    const JointMediatorSpec& med_spec,
                                    DecompositionConfig cfg) {
    cfg.estimator = EstimatorKind::existing;
    return decompose(data, outcome_spec, med_spec, cfg);
}

}  // namespace cdecomp
