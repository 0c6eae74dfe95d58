#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "cdecomp/decomposition.hpp"
#include "cdecomp/errors.hpp"
#include "cdecomp/oracle.hpp"
#include "cdecomp/parallel.hpp"
#include "cdecomp/scenario.hpp"

namespace cdecomp {

struct StudyConfig {
    ScenarioConfig scenario;
    int replicates = 200;  // desk scale; the paper's full runs use 1000
    int K = 500;
    int B = 200;
    std::uint64_t master_seed = 0;
    int workers = 1;
    bool run_proposed = true;
    bool run_existing = true;
    bool expected_outcomes = false;
    double max_failure_share = 0.05;
};

struct MetricRow {
    int scenario = 0;
    std::string estimator;  // proposed / existing / all
    std::string effect;     // rr_red_00, rd_natural, ... or all
    std::string metric;     // mean_estimate, mc_se, percent_bias, coverage, avg_ci_width, ...
    double value = 0.0;
};

struct StudyMetrics {
    int scenario_id = 0;
    int replicates = 0;
    int failures = 0;
    std::vector<MetricRow> rows;

    double at(const std::string& estimator, const std::string& effect,
              const std::string& metric) const {
        for (const auto& r : rows)
            if (r.estimator == estimator && r.effect == effect && r.metric == metric)
                return r.value;
        throw usage_error("study metrics: no row (" + estimator + ", " + effect + ", " + metric +
                          ")");
    }
};

namespace detail {

struct ReplicateEffects {
    // per effect key: estimate and interval, both measures
    std::vector<double> est;
    std::vector<double> lo, hi;
    bool has_ci = false;
};

inline void collect_effects(const EffectSet& es, ReplicateEffects& out) {
    auto push = [&](const EffectEstimate& e) {
        out.est.push_back(e.estimate);
        out.lo.push_back(e.lower);
        out.hi.push_back(e.upper);
        out.has_ci = e.has_ci;
    };
    push(es.natural);
    for (const auto& [k, e] : es.counterfactual) push(e);
    for (const auto& [k, e] : es.reduction) push(e);
}

inline std::vector<std::string> effect_keys(std::size_t dim, const std::string& prefix) {
    auto ivs = intervention_lattice(dim);
    std::vector<std::string> keys{prefix + "_natural"};
    for (std::size_t v = 1; v < ivs.size(); ++v) keys.push_back(prefix + "_count_" + ivs[v].key());
    for (std::size_t v = 1; v < ivs.size(); ++v) keys.push_back(prefix + "_red_" + ivs[v].key());
    return keys;
}

}  // namespace detail

// Repeatedly generate data from the scenario, run both estimator arms on the
// same replicate datasets, and score estimates against the oracle truth:
// signed percent bias of the replicate-mean estimate, percentile-interval
// coverage of the truth, and mean interval width. Replicates where an arm
// fails to fit are dropped and counted; more than max_failure_share aborts.
inline StudyMetrics run_study(const StudyConfig& cfg, const TrueEffectSet& truth) {
    if (cfg.replicates < 2) throw usage_error("study: at least 2 replicates required");
    if (!cfg.run_proposed && !cfg.run_existing)
        throw usage_error("study: no estimator arm selected");
    const auto R = static_cast<std::size_t>(cfg.replicates);
    RngStream master(cfg.master_seed);

    struct ArmResult {
        detail::ReplicateEffects rr, rd;
    };
    std::vector<std::array<ArmResult, 2>> results(R);  // [replicate][arm]
    std::vector<char> ok(R, 1);
    std::vector<std::string> why(R);

    const VariableRoles roles = cfg.scenario.roles();
    const std::vector<std::string> rr_keys = detail::effect_keys(roles.mediators.size(), "rr");
    const std::vector<std::string> rd_keys = detail::effect_keys(roles.mediators.size(), "rd");
    const DesignSpec outcome_spec = DesignSpec::outcome_default(roles, true);
    const JointMediatorSpec med_spec = JointMediatorSpec::from_roles(roles);

    std::vector<EstimatorKind> arms;
    if (cfg.run_proposed) arms.push_back(EstimatorKind::proposed);
    if (cfg.run_existing) arms.push_back(EstimatorKind::existing);

    parallel_for(R, cfg.workers, [&](std::size_t r) {
        Dataset data = generate_scenario_data(cfg.scenario, r, master);
        for (auto arm : arms) {
            DecompositionConfig dc;
            dc.K = cfg.K;
            dc.B = cfg.B;
            dc.estimator = arm;
            dc.expected_outcomes = cfg.expected_outcomes;
            dc.workers = 1;
            dc.seed = master
                          .child(streams::replicate, static_cast<std::uint64_t>(cfg.scenario.id),
                                 static_cast<std::uint64_t>(r))
                          .state();
            try {
                auto dual = run_decomposition(data, outcome_spec, med_spec, dc, true, true);
                auto& slot = results[r][arm == EstimatorKind::proposed ? 0 : 1];
                detail::collect_effects(*dual.rr, slot.rr);
                detail::collect_effects(*dual.rd, slot.rd);
            } catch (const error& e) {
                ok[r] = 0;
                why[r] = e.what();
                return;
            }
        }
    });

    int failures = 0;
    std::string first_reason;
    for (std::size_t r = 0; r < R; ++r)
        if (!ok[r]) {
            ++failures;
            if (first_reason.empty()) first_reason = why[r];
        }
    if (failures > cfg.max_failure_share * cfg.replicates)
        throw nonconvergence_error("study: " + std::to_string(failures) + " of " +
                                   std::to_string(cfg.replicates) +
                                   " replicates failed (above the tolerated share); first: " +
                                   first_reason);
    if (failures == cfg.replicates)
        throw nonconvergence_error("study: no replicate produced estimates");

    StudyMetrics out;
    out.scenario_id = cfg.scenario.id;
    out.replicates = cfg.replicates;
    out.failures = failures;

    auto add = [&](const std::string& est, const std::string& eff, const std::string& met,
                   double v) {
        out.rows.push_back(MetricRow{cfg.scenario.id, est, eff, met, v});
    };

    for (auto arm : arms) {
        const std::string arm_name = estimator_name(arm);
        const std::size_t ai = arm == EstimatorKind::proposed ? 0 : 1;
        for (int measure = 0; measure < 2; ++measure) {
            const auto& keys = measure == 0 ? rr_keys : rd_keys;
            const std::string prefix = measure == 0 ? "rr_" : "rd_";
            for (std::size_t e = 0; e < keys.size(); ++e) {
                double sum = 0.0, sumsq = 0.0, wsum = 0.0;
                double nok = 0.0, covered = 0.0;
                bool has_ci = false;
                for (std::size_t r = 0; r < R; ++r) {
                    if (!ok[r]) continue;
                    const auto& arm_res = results[r][ai];
                    const auto& eff = measure == 0 ? arm_res.rr : arm_res.rd;
                    double v = eff.est[e];
                    sum += v;
                    sumsq += v * v;
                    nok += 1.0;
                    if (eff.has_ci) {
                        has_ci = true;
                        wsum += eff.hi[e] - eff.lo[e];
                        double t = truth.at(keys[e]).value;
                        covered += (eff.lo[e] <= t && t <= eff.hi[e]) ? 1.0 : 0.0;
                    }
                }
                double mean = sum / nok;
                double var = (sumsq - nok * mean * mean) / (nok - 1.0);
                double tval = truth.at(keys[e]).value;
                add(arm_name, keys[e], "mean_estimate", mean);
                add(arm_name, keys[e], "mc_se", std::sqrt(var / nok));
                add(arm_name, keys[e], "truth", tval);
                add(arm_name, keys[e], "percent_bias", 100.0 * (mean - tval) / std::abs(tval));
                if (has_ci) {
                    add(arm_name, keys[e], "coverage", covered / nok);
                    add(arm_name, keys[e], "avg_ci_width", wsum / nok);
                }
            }
        }
    }
    add("all", "all", "replicates", static_cast<double>(cfg.replicates));
    add("all", "all", "replicate_failures", static_cast<double>(failures));
    return out;
}

}  // namespace cdecomp
