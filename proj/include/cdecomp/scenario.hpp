#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "cdecomp/data.hpp"
#include "cdecomp/decomposition.hpp"
#include "cdecomp/errors.hpp"
#include "cdecomp/normal.hpp"
#include "cdecomp/rng.hpp"

namespace cdecomp {

// Simulation design: two mediators whose shared dependence on a latent U1
// induces residual correlation (theta1, theta2), an optional mediator-mediator
// outcome interaction (theta3), an unobserved binary U2 confounding the
// group-outcome relation, and a group-dependent L feeding the second mediator.
// Scenarios 1-6 are continuous/continuous, 7-12 binary M1 + continuous M2,
// 13-18 binary/binary; within each family theta runs over
// (0,0,0), (.7,.7,0), (1.25,1.25,0), (0,0,.5), (.7,.7,.5), (1.25,1.25,.5).
struct ScenarioConfig {
    int id = 0;  // 1..18 from the table, 0 for custom settings
    std::array<MediatorKind, 2> kinds{MediatorKind::continuous, MediatorKind::continuous};
    double theta1 = 0.0, theta2 = 0.0, theta3 = 0.0;
    std::size_t n = 500;

    // generating constants, overridable for sensitivity work
    double conf_prob = 0.5;  // P(C = 1)
    double u2_prob = 0.5;    // P(U2 = 1)
    double a_u2 = 2.0;       // logit P(A=1 | U2) = a_u2 * U2
    double l_group = 2.0;    // L ~ N(l_group * A, l_sd^2)
    double l_sd = 1.0;
    double m_intercept = -1.0, m_group = 0.5, m_conf = 0.5, m2_l = 0.5;
    double y_intercept = -2.0, y_u2 = 0.5, y_m1 = 0.5, y_m2 = 0.5, y_conf = 0.5;

    static ScenarioConfig from_table(int id) {
        if (id < 1 || id > 18)
            throw usage_error("scenario id must be between 1 and 18, got " + std::to_string(id));
        ScenarioConfig c;
        c.id = id;
        int family = (id - 1) / 6;  // 0 continuous, 1 mixed, 2 binary
        if (family == 1) c.kinds = {MediatorKind::binary, MediatorKind::continuous};
        if (family == 2) c.kinds = {MediatorKind::binary, MediatorKind::binary};
        switch ((id - 1) % 6) {
            case 0: break;
            case 1: c.theta1 = c.theta2 = 0.7; break;
            case 2: c.theta1 = c.theta2 = 1.25; break;
            case 3: c.theta3 = 0.5; break;
            case 4: c.theta1 = c.theta2 = 0.7; c.theta3 = 0.5; break;
            case 5: c.theta1 = c.theta2 = 1.25; c.theta3 = 0.5; break;
        }
        return c;
    }

    VariableRoles roles() const {
        VariableRoles r;
        r.outcome = "y";
        r.group = "a";
        r.mediators = {{"m1", kinds[0]}, {"m2", kinds[1]}};
        r.confounders = {"c"};
        return r;
    }

    // conditional mediator linear predictors given the latent draws
    double lp_m1(double a, double c, double u1) const {
        return m_intercept + m_group * a + m_conf * c + theta1 * u1;
    }
    double lp_m2(double a, double c, double u1, double l) const {
        return m_intercept + m_group * a + m_conf * c + m2_l * l + theta2 * u1;
    }
    double outcome_logit(double u2, double m1, double m2, double c) const {
        return y_intercept + y_u2 * u2 + y_m1 * m1 + y_m2 * m2 + theta3 * m1 * m2 + y_conf * c;
    }
};

// One simulated dataset. Replicate streams derive from (master, scenario id,
// replicate), and each row consumes a fixed set of draws in a fixed order, so
// any replicate is reproducible in isolation.
inline Dataset generate_scenario_data(const ScenarioConfig& cfg, std::uint64_t replicate,
                                      const RngStream& master) {
    Sampler s(master.child(streams::scenario, static_cast<std::uint64_t>(cfg.id), replicate));
    std::vector<double> y(cfg.n), a(cfg.n), m1(cfg.n), m2(cfg.n), c(cfg.n);
    for (std::size_t i = 0; i < cfg.n; ++i) {
        double ci = s.uniform01() < cfg.conf_prob ? 1.0 : 0.0;
        double u1 = s.normal();
        double u2 = s.uniform01() < cfg.u2_prob ? 1.0 : 0.0;
        double ai = s.uniform01() < expit(cfg.a_u2 * u2) ? 1.0 : 0.0;
        double l = cfg.l_group * ai + cfg.l_sd * s.normal();
        double v1 = cfg.lp_m1(ai, ci, u1) + s.normal();
        double v2 = cfg.lp_m2(ai, ci, u1, l) + s.normal();
        double m1i = cfg.kinds[0] == MediatorKind::binary ? (v1 > 0.0 ? 1.0 : 0.0) : v1;
        double m2i = cfg.kinds[1] == MediatorKind::binary ? (v2 > 0.0 ? 1.0 : 0.0) : v2;
        double yi = s.uniform01() < expit(cfg.outcome_logit(u2, m1i, m2i, ci)) ? 1.0 : 0.0;
        c[i] = ci;
        a[i] = ai;
        m1[i] = m1i;
        m2[i] = m2i;
        y[i] = yi;
    }
    return Dataset::from_columns(cfg.roles(), {{"y", y}, {"a", a}, {"m1", m1}, {"m2", m2}, {"c", c}});
}

}  // namespace cdecomp
