#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cdecomp/cdecomp.hpp"

namespace {

struct CommonOpts {
    std::uint64_t seed = 0;
    int workers = 1;
    std::string out;
    std::string format = "json";
};

void add_common(CLI::App* sub, CommonOpts& c) {
    sub->add_option("--seed", c.seed, "master seed for all random streams")
        ->envname("CDECOMP_SEED");
    sub->add_option("--workers", c.workers, "worker threads")->check(CLI::Range(1, 256));
    sub->add_option("--out", c.out, "output file (omit to print machine output to stdout)");
    sub->add_option("--format", c.format, "output format")
        ->check(CLI::IsMember({"json", "csv"}));
}

cdecomp::VariableRoles parse_roles(const std::string& outcome, const std::string& group,
                                   const std::vector<std::string>& mediators,
                                   const std::vector<std::string>& confounders) {
    cdecomp::VariableRoles roles;
    roles.outcome = outcome;
    roles.group = group;
    for (const auto& spec : mediators) {
        auto pos = spec.rfind(':');
        if (pos == std::string::npos || pos == 0 || pos + 1 == spec.size())
            throw cdecomp::usage_error("mediator spec '" + spec +
                                       "' must look like name:kind (kind binary or continuous)");
        roles.mediators.push_back(
            {spec.substr(0, pos), cdecomp::parse_mediator_kind(spec.substr(pos + 1))});
    }
    roles.confounders = confounders;
    roles.validate();
    return roles;
}

int cmd_decompose(const CommonOpts& c, const std::string& data_path, const std::string& outcome,
                  const std::string& group, const std::vector<std::string>& mediators,
                  const std::vector<std::string>& confounders, bool interaction,
                  const std::string& estimator, int K, int B, const std::string& measure,
                  bool expected, bool diagnostic) {
    auto roles = parse_roles(outcome, group, mediators, confounders);
    auto data = cdecomp::Dataset::load_csv(data_path, roles);
    auto outcome_spec = cdecomp::DesignSpec::outcome_default(roles, interaction);
    auto med_spec = cdecomp::JointMediatorSpec::from_roles(roles);

    cdecomp::DecompositionConfig cfg;
    cfg.K = K;
    cfg.B = B;
    cfg.measure =
        measure == "rr" ? cdecomp::ContrastMeasure::rr : cdecomp::ContrastMeasure::rd;
    cfg.estimator = estimator == "proposed" ? cdecomp::EstimatorKind::proposed
                                            : cdecomp::EstimatorKind::existing;
    cfg.seed = c.seed;
    cfg.workers = c.workers;
    cfg.expected_outcomes = expected;
    cfg.covariance_diagnostic = diagnostic;

    auto es = cdecomp::decompose(data, outcome_spec, med_spec, cfg);
    auto fmt = cdecomp::io::parse_format(c.format);
    if (c.out.empty()) {
        if (fmt == cdecomp::io::Format::json)
            cdecomp::io::write_effectset_json(es, std::cout);
        else
            cdecomp::io::write_effectset_csv(es, std::cout);
    } else {
        cdecomp::io::write_effectset(es, fmt, c.out);
        cdecomp::io::print_effectset_summary(es, std::cout);
        std::cout << "written: " << c.out << "\n";
    }
    return 0;
}

int cmd_simulate(const CommonOpts& c, const std::vector<int>& scenarios, int replicates, int K,
                 int B, std::size_t mc_samples, int mc_repeats, const std::string& estimator,
                 bool expected, double theta1, double theta2, double theta3, std::size_t n,
                 bool t1set, bool t2set, bool t3set, bool nset) {
    std::vector<cdecomp::StudyMetrics> all;
    for (int id : scenarios) {
        auto sc = cdecomp::ScenarioConfig::from_table(id);
        if (t1set) sc.theta1 = theta1;
        if (t2set) sc.theta2 = theta2;
        if (t3set) sc.theta3 = theta3;
        if (nset) sc.n = n;
        auto truth =
            cdecomp::oracle_true_effects(sc, mc_samples, mc_repeats, cdecomp::RngStream(c.seed));

        cdecomp::StudyConfig cfg;
        cfg.scenario = sc;
        cfg.replicates = replicates;
        cfg.K = K;
        cfg.B = B;
        cfg.master_seed = c.seed;
        cfg.workers = c.workers;
        cfg.run_proposed = estimator != "existing";
        cfg.run_existing = estimator != "proposed";
        cfg.expected_outcomes = expected;
        all.push_back(cdecomp::run_study(cfg, truth));
        std::cerr << "scenario " << id << ": done (" << all.back().failures
                  << " replicate failures)\n";
    }
    auto fmt = cdecomp::io::parse_format(c.format);
    if (c.out.empty()) {
        if (fmt == cdecomp::io::Format::json)
            cdecomp::io::write_metrics_json(all, std::cout);
        else
            cdecomp::io::write_metrics_csv(all, std::cout);
    } else {
        cdecomp::io::write_metrics(all, fmt, c.out);
        std::cout << "written: " << c.out << "\n";
    }
    return 0;
}

int cmd_oracle(const CommonOpts& c, int scenario, std::size_t mc_samples, int mc_repeats,
               double theta1, double theta2, double theta3, bool t1set, bool t2set, bool t3set) {
    auto sc = cdecomp::ScenarioConfig::from_table(scenario);
    if (t1set) sc.theta1 = theta1;
    if (t2set) sc.theta2 = theta2;
    if (t3set) sc.theta3 = theta3;
    auto truth =
        cdecomp::oracle_true_effects(sc, mc_samples, mc_repeats, cdecomp::RngStream(c.seed));
    auto fmt = cdecomp::io::parse_format(c.format);
    if (c.out.empty()) {
        if (fmt == cdecomp::io::Format::json)
            cdecomp::io::write_truth_json(truth, std::cout);
        else
            cdecomp::io::write_truth_csv(truth, std::cout);
    } else {
        cdecomp::io::write_truth(truth, fmt, c.out);
        cdecomp::io::print_truth_summary(truth, std::cout);
        std::cout << "written: " << c.out << "\n";
    }
    return 0;
}

int cmd_report(const CommonOpts& c, const std::string& metrics_path) {
    auto rows = cdecomp::io::load_metrics(metrics_path);
    if (c.out.empty()) {
        cdecomp::io::print_metrics_summary(rows, std::cout);
    } else {
        cdecomp::io::write_metric_rows(rows, cdecomp::io::parse_format(c.format), c.out);
        std::cout << "written: " << c.out << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"causal decomposition analysis with multiple correlated mediators"};
    app.require_subcommand(1);
    app.set_config("--config", "",
                   "read options from an INI file (one [section] per subcommand)");
    app.allow_config_extras(CLI::config_extras_mode::error);

    // decompose
    auto* dec = app.add_subcommand("decompose", "run a decomposition on a CSV dataset");
    CommonOpts dec_c;
    std::string data_path, outcome, group, estimator = "proposed", measure = "rr";
    std::vector<std::string> mediators, confounders;
    bool interaction = false, expected = false, diagnostic = false;
    int K = 500, B = 200;
    dec->add_option("--data", data_path, "CSV file with a header row")->required();
    dec->add_option("--outcome", outcome, "binary outcome column")->required();
    dec->add_option("--group", group, "binary group column")->required();
    dec->add_option("--mediator", mediators, "mediator column as name:kind (repeatable)")
        ->required();
    dec->add_option("--confounder", confounders, "confounder column (repeatable)");
    dec->add_flag("--interaction", interaction,
                  "include pairwise mediator products in the outcome model");
    dec->add_option("--estimator", estimator, "estimator arm")
        ->check(CLI::IsMember({"proposed", "existing"}));
    dec->add_option("--K", K, "Monte Carlo repetitions per pseudopopulation")
        ->check(CLI::PositiveNumber);
    dec->add_option("--B", B, "bootstrap resamples (0 disables intervals)")
        ->check(CLI::NonNegativeNumber);
    dec->add_option("--measure", measure, "contrast measure")
        ->check(CLI::IsMember({"rr", "rd"}));
    dec->add_flag("--expected-outcomes", expected,
                  "average model probabilities instead of drawing outcomes");
    dec->add_flag("--diagnostic", diagnostic, "add the per-group covariance equality check");
    add_common(dec, dec_c);

    // simulate
    auto* sim = app.add_subcommand("simulate", "run the simulation study over scenarios");
    CommonOpts sim_c;
    std::vector<int> scenarios;
    int replicates = 200, sim_K = 500, sim_B = 200, mc_repeats = 100;
    std::size_t mc_samples = 100000, custom_n = 500;
    std::string sim_estimator = "both";
    bool sim_expected = false, full = false;
    double theta1 = 0, theta2 = 0, theta3 = 0;
    sim->add_option("--scenario", scenarios, "scenario id 1-18 (repeatable)")->required();
    sim->add_option("--replicates", replicates, "datasets per scenario")
        ->check(CLI::Range(2, 100000));
    sim->add_flag("--full", full, "paper-scale 1000 replicates (unless --replicates is given)");
    sim->add_option("--K", sim_K, "Monte Carlo repetitions per pseudopopulation")
        ->check(CLI::PositiveNumber);
    sim->add_option("--B", sim_B, "bootstrap resamples per replicate")
        ->check(CLI::NonNegativeNumber);
    sim->add_option("--estimator", sim_estimator, "which arms to run")
        ->check(CLI::IsMember({"proposed", "existing", "both"}));
    sim->add_option("--mc-samples", mc_samples, "oracle draws per repeat")
        ->check(CLI::Range(std::size_t{2}, std::size_t{1} << 40));
    sim->add_option("--mc-repeats", mc_repeats, "oracle repeats (SE from spread across them)")
        ->check(CLI::PositiveNumber);
    sim->add_flag("--expected-outcomes", sim_expected,
                  "average model probabilities instead of drawing outcomes");
    auto* t1 = sim->add_option("--theta1", theta1, "override latent loading on mediator 1");
    auto* t2 = sim->add_option("--theta2", theta2, "override latent loading on mediator 2");
    auto* t3 = sim->add_option("--theta3", theta3, "override the outcome interaction");
    auto* no = sim->add_option("--n", custom_n, "override the per-replicate sample size")
                   ->check(CLI::Range(std::size_t{10}, std::size_t{10000000}));
    add_common(sim, sim_c);

    // oracle
    auto* orc = app.add_subcommand("oracle", "compute true effects by Monte Carlo integration");
    CommonOpts orc_c;
    int orc_scenario = 0, orc_repeats = 100;
    std::size_t orc_samples = 100000;
    double o_theta1 = 0, o_theta2 = 0, o_theta3 = 0;
    orc->add_option("--scenario", orc_scenario, "scenario id 1-18")->required();
    orc->add_option("--mc-samples", orc_samples, "draws per repeat")
        ->check(CLI::Range(std::size_t{2}, std::size_t{1} << 40));
    orc->add_option("--mc-repeats", orc_repeats, "repeats (SE from spread across them)")
        ->check(CLI::PositiveNumber);
    auto* ot1 = orc->add_option("--theta1", o_theta1, "override latent loading on mediator 1");
    auto* ot2 = orc->add_option("--theta2", o_theta2, "override latent loading on mediator 2");
    auto* ot3 = orc->add_option("--theta3", o_theta3, "override the outcome interaction");
    add_common(orc, orc_c);

    // report
    auto* rep = app.add_subcommand("report", "reload a metrics file; summarize or convert it");
    CommonOpts rep_c;
    std::string metrics_path;
    rep->add_option("--metrics", metrics_path, "metrics file from simulate (csv or json)")
        ->required();
    add_common(rep, rep_c);

    try {
        app.parse(argc, argv);
        if (dec->parsed())
            return cmd_decompose(dec_c, data_path, outcome, group, mediators, confounders,
                                 interaction, estimator, K, B, measure, expected, diagnostic);
        if (sim->parsed()) {
            if (full && sim->count("--replicates") == 0) replicates = 1000;
            return cmd_simulate(sim_c, scenarios, replicates, sim_K, sim_B, mc_samples,
                                mc_repeats, sim_estimator, sim_expected, theta1, theta2, theta3,
                                custom_n, t1->count() > 0, t2->count() > 0, t3->count() > 0,
                                no->count() > 0);
        }
        if (orc->parsed())
            return cmd_oracle(orc_c, orc_scenario, orc_samples, orc_repeats, o_theta1, o_theta2,
                              o_theta3, ot1->count() > 0, ot2->count() > 0, ot3->count() > 0);
        if (rep->parsed()) return cmd_report(rep_c, metrics_path);
        return 0;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: usage: " << e.what() << "\n";
        return 2;
    } catch (const cdecomp::error& e) {
        std::cerr << "error: " << e.label() << ": " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << "\n";
        return 1;
    }
}
