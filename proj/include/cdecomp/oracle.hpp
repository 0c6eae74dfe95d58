#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "cdecomp/errors.hpp"
#include "cdecomp/normal.hpp"
#include "cdecomp/rng.hpp"
#include "cdecomp/scenario.hpp"

namespace cdecomp {

struct OracleSlot {
    double value = 0.0;
    double se = 0.0;
};

// Ground-truth effects for one scenario, from Monte Carlo integration of the
// generating mechanism itself (no fitted models anywhere).
struct TrueEffectSet {
    int scenario_id = 0;
    std::uint64_t seed = 0;
    std::size_t mc_samples = 0;
    int mc_repeats = 0;
    std::vector<std::pair<std::string, OracleSlot>> values;

    const OracleSlot& at(const std::string& key) const {
        for (const auto& [k, v] : values)
            if (k == key) return v;
        throw usage_error("oracle: no slot named '" + key + "'");
    }
};

namespace detail {

// P(U2 = 1 | A = a) by Bayes from P(U2) and the group assignment model.
inline double u2_given_group(const ScenarioConfig& cfg, int a) {
    double p1 = expit(cfg.a_u2);   // P(A=1 | U2=1)
    double p0 = expit(0.0);        // P(A=1 | U2=0)
    double num = a == 1 ? cfg.u2_prob * p1 : cfg.u2_prob * (1.0 - p1);
    double den = num + (a == 1 ? (1.0 - cfg.u2_prob) * p0 : (1.0 - cfg.u2_prob) * (1.0 - p0));
    return num / den;
}

struct OracleMean {
    double mean = 0.0;
    double var = 0.0;  // of the integrand, for the repeats=1 fallback SE
};

// E[Y(a, M ~ f(.|a1, a2, C))]: draw (C, U1, L|a2, eps), form the mediators
// under source groups (a1, a2), and average the outcome probability exactly
// over U2 | A = a (two-term mixture; no outcome noise enters the oracle).
inline OracleMean expectation_slot(const ScenarioConfig& cfg, int a, int a1, int a2,
                                   std::size_t samples, Sampler& s) {
    const double pu2 = u2_given_group(cfg, a);
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        double c = s.uniform01() < cfg.conf_prob ? 1.0 : 0.0;
        double u1 = s.normal();
        double l = cfg.l_group * a2 + cfg.l_sd * s.normal();
        double v1 = cfg.lp_m1(a1, c, u1) + s.normal();
        double v2 = cfg.lp_m2(a2, c, u1, l) + s.normal();
        double m1 = cfg.kinds[0] == MediatorKind::binary ? (v1 > 0.0 ? 1.0 : 0.0) : v1;
        double m2 = cfg.kinds[1] == MediatorKind::binary ? (v2 > 0.0 ? 1.0 : 0.0) : v2;
        double p = pu2 * expit(cfg.outcome_logit(1.0, m1, m2, c)) +
                   (1.0 - pu2) * expit(cfg.outcome_logit(0.0, m1, m2, c));
        sum += p;
        sumsq += p * p;
    }
    OracleMean om;
    om.mean = sum / static_cast<double>(samples);
    om.var = sumsq / static_cast<double>(samples) - om.mean * om.mean;
    return om;
}

}  // namespace detail

// Monte Carlo integration of the generating mechanism: mc_repeats independent
// repeats of mc_samples draws per expectation slot. Values are means over
// repeats; standard errors are across-repeat sd / sqrt(repeats), or a
// delta-method within-repeat SE when only one repeat is requested.
inline TrueEffectSet oracle_true_effects(const ScenarioConfig& cfg, std::size_t mc_samples,
                                         int mc_repeats, const RngStream& master) {
    if (mc_samples < 2 || mc_repeats < 1)
        throw usage_error("oracle: mc_samples must be >= 2 and mc_repeats >= 1");
    // slot order: (a, a1, a2) for natural(1), natural(0)=denominator, 00, 01, 10
    static constexpr std::array<std::array<int, 3>, 5> combos{
        {{1, 1, 1}, {0, 0, 0}, {1, 0, 0}, {1, 0, 1}, {1, 1, 0}}};
    static const std::array<std::string, 4> keys{"natural", "count_00", "count_01", "count_10"};

    // per repeat: rr and rd for (natural, count_00, count_01, count_10) and reductions
    std::vector<std::array<double, 4>> rr(static_cast<std::size_t>(mc_repeats));
    std::vector<std::array<double, 4>> rd(static_cast<std::size_t>(mc_repeats));
    std::array<detail::OracleMean, 5> last{};
    RngStream root = master.child(streams::oracle, static_cast<std::uint64_t>(cfg.id));
    for (int r = 0; r < mc_repeats; ++r) {
        std::array<detail::OracleMean, 5> e{};
        for (std::size_t sidx = 0; sidx < combos.size(); ++sidx) {
            Sampler s(root.child(static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(sidx)));
            e[sidx] = detail::expectation_slot(cfg, combos[sidx][0], combos[sidx][1],
                                               combos[sidx][2], mc_samples, s);
        }
        double den = e[1].mean;
        if (den <= 0.0) throw numerical_error("oracle: denominator expectation is zero");
        auto& rrr = rr[static_cast<std::size_t>(r)];
        auto& rdr = rd[static_cast<std::size_t>(r)];
        rrr = {e[0].mean / den, e[2].mean / den, e[3].mean / den, e[4].mean / den};
        rdr = {e[0].mean - den, e[2].mean - den, e[3].mean - den, e[4].mean - den};
        last = e;
    }

    auto across = [&](auto get) {
        double m = 0.0;
        for (int r = 0; r < mc_repeats; ++r) m += get(static_cast<std::size_t>(r));
        m /= mc_repeats;
        if (mc_repeats == 1) return std::pair<double, double>(m, -1.0);  // caller fills SE
        double ss = 0.0;
        for (int r = 0; r < mc_repeats; ++r) {
            double d = get(static_cast<std::size_t>(r)) - m;
            ss += d * d;
        }
        double sd = std::sqrt(ss / (mc_repeats - 1));
        return std::pair<double, double>(m, sd / std::sqrt(static_cast<double>(mc_repeats)));
    };

    // delta-method SE pieces for the single-repeat fallback
    const double ns = static_cast<double>(mc_samples);
    auto vm = [&](std::size_t i) { return last[i].var / ns; };
    const double den = last[1].mean;
    auto rr_se1 = [&](std::size_t num_idx) {
        double r = last[num_idx].mean / den;
        return std::sqrt(vm(num_idx) / (den * den) + r * r * vm(1) / (den * den));
    };
    auto rr_red_se1 = [&](std::size_t num_idx) {
        double diff = last[0].mean - last[num_idx].mean;
        return std::sqrt((vm(0) + vm(num_idx)) / (den * den) +
                         diff * diff * vm(1) / (den * den * den * den));
    };

    TrueEffectSet truth;
    truth.scenario_id = cfg.id;
    truth.mc_samples = mc_samples;
    truth.mc_repeats = mc_repeats;

    for (std::size_t j = 0; j < keys.size(); ++j) {
        auto [m, se] = across([&](std::size_t r) { return rr[r][j]; });
        if (se < 0.0) se = rr_se1(j == 0 ? 0 : j + 1);
        truth.values.emplace_back("rr_" + keys[j], OracleSlot{m, se});
    }
    for (std::size_t j = 1; j < keys.size(); ++j) {
        auto [m, se] = across([&](std::size_t r) { return rr[r][0] - rr[r][j]; });
        if (se < 0.0) se = rr_red_se1(j + 1);
        truth.values.emplace_back("rr_red_" + keys[j].substr(6), OracleSlot{m, se});
    }
    for (std::size_t j = 0; j < keys.size(); ++j) {
        auto [m, se] = across([&](std::size_t r) { return rd[r][j]; });
        if (se < 0.0)
            se = j == 0 ? std::sqrt(vm(0) + vm(1)) : std::sqrt(vm(j + 1) + vm(1));
        truth.values.emplace_back("rd_" + keys[j], OracleSlot{m, se});
    }
    for (std::size_t j = 1; j < keys.size(); ++j) {
        auto [m, se] = across([&](std::size_t r) { return rd[r][0] - rd[r][j]; });
        if (se < 0.0) se = std::sqrt(vm(0) + vm(j + 1));
        truth.values.emplace_back("rd_red_" + keys[j].substr(6), OracleSlot{m, se});
    }
    return truth;
}

}  // namespace cdecomp
