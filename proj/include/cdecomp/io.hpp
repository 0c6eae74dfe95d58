#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cdecomp/decomposition.hpp"
#include "cdecomp/errors.hpp"
#include "cdecomp/oracle.hpp"
#include "cdecomp/study.hpp"

namespace cdecomp::io {

enum class Format { json, csv };

inline Format parse_format(const std::string& s) {
    if (s == "json") return Format::json;
    if (s == "csv") return Format::csv;
    throw usage_error("unknown format '" + s + "' (expected json or csv)");
}

// Machine output carries 17 significant digits: enough to round-trip any
// double exactly.
inline std::string num17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string num4(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

namespace detail {

inline std::string json_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

class JsonWriter {
  public:
    explicit JsonWriter(std::ostream& os) : os_(os) {}

    void open(char c) {
        sep();
        os_ << c;
        first_ = true;
    }
    void close(char c) {
        os_ << c;
        first_ = false;
    }
    void key(const std::string& k) {
        sep();
        os_ << '"' << json_escape(k) << "\":";
        first_ = true;  // next value needs no comma
    }
    void value_raw(const std::string& v) {
        sep();
        os_ << v;
    }
    void value(double v) {
        if (std::isfinite(v))
            value_raw(num17(v));
        else
            value_raw("null");
    }
    void value(const std::string& s) { value_raw('"' + json_escape(s) + '"'); }
    void value(std::uint64_t v) { value_raw(std::to_string(v)); }
    void value(int v) { value_raw(std::to_string(v)); }
    void value(bool b) { value_raw(b ? "true" : "false"); }

  private:
    void sep() {
        if (!first_) os_ << ',';
        first_ = false;
    }
    std::ostream& os_;
    bool first_ = true;
};

inline void write_effect(JsonWriter& w, const EffectEstimate& e) {
    w.open('{');
    w.key("estimate");
    w.value(e.estimate);
    w.key("lower");
    if (e.has_ci)
        w.value(e.lower);
    else
        w.value_raw("null");
    w.key("upper");
    if (e.has_ci)
        w.value(e.upper);
    else
        w.value_raw("null");
    w.close('}');
}

}  // namespace detail

inline void write_effectset_json(const EffectSet& es, std::ostream& os) {
    detail::JsonWriter w(os);
    w.open('{');
    w.key("tool");
    w.value(std::string("cdecomp"));
    w.key("kind");
    w.value(std::string("effects"));
    w.key("estimator");
    w.value(std::string(estimator_name(es.estimator)));
    w.key("measure");
    w.value(std::string(measure_name(es.measure)));
    w.key("n");
    w.value(static_cast<std::uint64_t>(es.n));
    w.key("n_group1");
    w.value(static_cast<std::uint64_t>(es.n_group1));
    w.key("n_group0");
    w.value(static_cast<std::uint64_t>(es.n_group0));
    w.key("dropped_rows");
    w.value(static_cast<std::uint64_t>(es.dropped_rows));
    w.key("K");
    w.value(es.K);
    w.key("B");
    w.value(es.B);
    w.key("seed");
    w.value(static_cast<std::uint64_t>(es.seed));
    w.key("expected_outcomes");
    w.value(es.expected_outcomes);
    w.key("mediators");
    w.open('[');
    for (std::size_t j = 0; j < es.mediator_names.size(); ++j) {
        w.open('{');
        w.key("name");
        w.value(es.mediator_names[j]);
        w.key("kind");
        w.value(std::string(mediator_kind_name(es.mediator_kinds[j])));
        w.close('}');
    }
    w.close(']');
    w.key("rho");
    if (es.rho.empty()) {
        w.value_raw("null");
    } else {
        w.open('{');
        for (const auto& [k, v] : es.rho) {
            w.key(k);
            w.value(v);
        }
        w.close('}');
    }
    w.key("sigma");
    w.open('[');
    for (Eigen::Index i = 0; i < es.sigma.rows(); ++i) {
        w.open('[');
        for (Eigen::Index j = 0; j < es.sigma.cols(); ++j) w.value(es.sigma(i, j));
        w.close(']');
    }
    w.close(']');
    if (es.diagnostic) {
        w.key("covariance_diagnostic");
        w.open('{');
        for (int g = 0; g < 2; ++g) {
            const auto& m = g == 0 ? es.diagnostic->sigma_group0.matrix()
                                   : es.diagnostic->sigma_group1.matrix();
            w.key(g == 0 ? "sigma_group0" : "sigma_group1");
            w.open('[');
            for (Eigen::Index i = 0; i < m.rows(); ++i) {
                w.open('[');
                for (Eigen::Index j = 0; j < m.cols(); ++j) w.value(m(i, j));
                w.close(']');
            }
            w.close(']');
        }
        w.key("max_abs_diff");
        w.value(es.diagnostic->max_abs_diff);
        w.close('}');
    }
    w.key("bootstrap_failures");
    w.value(es.bootstrap_failures);
    w.key("effects");
    w.open('{');
    w.key("natural");
    detail::write_effect(w, es.natural);
    for (const auto& [k, e] : es.counterfactual) {
        w.key("count_" + k);
        detail::write_effect(w, e);
    }
    for (const auto& [k, e] : es.reduction) {
        w.key("red_" + k);
        detail::write_effect(w, e);
    }
    w.close('}');
    w.close('}');
    os << "\n";
}

inline void write_effectset_csv(const EffectSet& es, std::ostream& os) {
    os << "quantity,estimate,lower,upper\n";
    auto row = [&](const std::string& name, const EffectEstimate& e) {
        os << name << ',' << num17(e.estimate) << ',';
        if (e.has_ci)
            os << num17(e.lower) << ',' << num17(e.upper);
        else
            os << ',';
        os << '\n';
    };
    row("natural", es.natural);
    for (const auto& [k, e] : es.counterfactual) row("count_" + k, e);
    for (const auto& [k, e] : es.reduction) row("red_" + k, e);
    for (const auto& [k, v] : es.rho) os << k << ',' << num17(v) << ",,\n";
    for (Eigen::Index i = 0; i < es.sigma.rows(); ++i)
        for (Eigen::Index j = 0; j < es.sigma.cols(); ++j)
            os << "sigma_" << (i + 1) << (j + 1) << ',' << num17(es.sigma(i, j)) << ",,\n";
    if (es.diagnostic) {
        for (int g = 0; g < 2; ++g) {
            const auto& m = g == 0 ? es.diagnostic->sigma_group0.matrix()
                                   : es.diagnostic->sigma_group1.matrix();
            for (Eigen::Index i = 0; i < m.rows(); ++i)
                for (Eigen::Index j = 0; j < m.cols(); ++j)
                    os << "sigma_group" << g << "_" << (i + 1) << (j + 1) << ','
                       << num17(m(i, j)) << ",,\n";
        }
        os << "diagnostic_max_abs_diff," << num17(es.diagnostic->max_abs_diff) << ",,\n";
    }
    os << "estimator," << estimator_name(es.estimator) << ",,\n";
    os << "measure," << measure_name(es.measure) << ",,\n";
    os << "n," << es.n << ",,\n";
    os << "n_group1," << es.n_group1 << ",,\n";
    os << "n_group0," << es.n_group0 << ",,\n";
    os << "dropped_rows," << es.dropped_rows << ",,\n";
    os << "K," << es.K << ",,\n";
    os << "B," << es.B << ",,\n";
    os << "seed," << es.seed << ",,\n";
    os << "expected_outcomes," << (es.expected_outcomes ? 1 : 0) << ",,\n";
    os << "bootstrap_failures," << es.bootstrap_failures << ",,\n";
}

inline void write_effectset(const EffectSet& es, Format f, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw usage_error("cannot write output file '" + path + "'");
    if (f == Format::json)
        write_effectset_json(es, os);
    else
        write_effectset_csv(es, os);
    if (!os) throw usage_error("failed while writing '" + path + "'");
}

inline void print_effectset_summary(const EffectSet& es, std::ostream& os) {
    os << "Decomposition (" << estimator_name(es.estimator) << " estimator, measure "
       << measure_name(es.measure) << ")\n";
    os << "  n = " << es.n << " (group 1: " << es.n_group1 << ", group 0: " << es.n_group0
       << ", dropped: " << es.dropped_rows << ")\n";
    os << "  K = " << es.K << ", B = " << es.B << ", seed = " << es.seed << "\n";
    if (!es.rho.empty()) {
        os << "  fitted residual correlation:";
        for (const auto& [k, v] : es.rho) os << "  " << k << " = " << num4(v);
        os << "\n";
    }
    if (es.bootstrap_failures > 0)
        os << "  bootstrap resamples dropped: " << es.bootstrap_failures << "\n";
    if (es.diagnostic)
        os << "  covariance equality check: max |Sigma1 - Sigma0| = "
           << num4(es.diagnostic->max_abs_diff) << "\n";
    auto line = [&](const std::string& name, const EffectEstimate& e) {
        os << "    " << name << ": " << num4(e.estimate);
        if (e.has_ci) os << "  (" << num4(e.lower) << ", " << num4(e.upper) << ")";
        os << "\n";
    };
    os << "  effects:\n";
    line("natural course", es.natural);
    for (const auto& [k, e] : es.counterfactual) line("equalize " + k, e);
    for (const auto& [k, e] : es.reduction) line("reduction " + k, e);
}

// --- study metrics ---

inline void write_metrics_csv(const std::vector<StudyMetrics>& all, std::ostream& os) {
    os << "scenario,estimator,effect,metric,value\n";
    for (const auto& sm : all)
        for (const auto& r : sm.rows)
            os << r.scenario << ',' << r.estimator << ',' << r.effect << ',' << r.metric << ','
               << num17(r.value) << '\n';
}

inline void write_metrics_json(const std::vector<StudyMetrics>& all, std::ostream& os) {
    detail::JsonWriter w(os);
    w.open('[');
    for (const auto& sm : all) {
        for (const auto& r : sm.rows) {
            w.open('{');
            w.key("scenario");
            w.value(r.scenario);
            w.key("estimator");
            w.value(r.estimator);
            w.key("effect");
            w.value(r.effect);
            w.key("metric");
            w.value(r.metric);
            w.key("value");
            w.value(r.value);
            w.close('}');
        }
    }
    w.close(']');
    os << "\n";
}

inline void write_metrics(const std::vector<StudyMetrics>& all, Format f,
                          const std::string& path) {
    std::ofstream os(path);
    if (!os) throw usage_error("cannot write output file '" + path + "'");
    if (f == Format::json)
        write_metrics_json(all, os);
    else
        write_metrics_csv(all, os);
    if (!os) throw usage_error("failed while writing '" + path + "'");
}

inline std::vector<MetricRow> load_metrics(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw usage_error("cannot open metrics file '" + path + "'");
    std::vector<MetricRow> rows;
    // sniff the format from the first non-space character
    char c = 0;
    while (in.get(c) && (c == ' ' || c == '\n' || c == '\t' || c == '\r')) {
    }
    in.seekg(0);
    if (c == '[') {
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw validation_error("metrics file '" + path + "': " + e.what());
        }
        for (const auto& item : j) {
            MetricRow r;
            r.scenario = item.at("scenario").get<int>();
            r.estimator = item.at("estimator").get<std::string>();
            r.effect = item.at("effect").get<std::string>();
            r.metric = item.at("metric").get<std::string>();
            r.value = item.at("value").get<double>();
            rows.push_back(std::move(r));
        }
        return rows;
    }
    std::string line;
    if (!std::getline(in, line)) throw validation_error("metrics file '" + path + "' is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "scenario,estimator,effect,metric,value")
        throw validation_error("metrics file '" + path + "': unexpected header '" + line + "'");
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ss(line);
        MetricRow r;
        std::string field;
        try {
            std::getline(ss, field, ',');
            r.scenario = std::stoi(field);
            std::getline(ss, r.estimator, ',');
            std::getline(ss, r.effect, ',');
            std::getline(ss, r.metric, ',');
            std::getline(ss, field);
            r.value = std::stod(field);
        } catch (const std::exception&) {
            throw validation_error("metrics file '" + path + "', line " +
                                   std::to_string(lineno) + ": malformed row");
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

inline void write_metric_rows(const std::vector<MetricRow>& rows, Format f,
                              const std::string& path) {
    StudyMetrics sm;
    sm.rows = rows;
    write_metrics({sm}, f, path);
}

// --- oracle truth ---

inline void write_truth_json(const TrueEffectSet& t, std::ostream& os) {
    detail::JsonWriter w(os);
    w.open('{');
    w.key("tool");
    w.value(std::string("cdecomp"));
    w.key("kind");
    w.value(std::string("oracle"));
    w.key("scenario");
    w.value(t.scenario_id);
    w.key("mc_samples");
    w.value(static_cast<std::uint64_t>(t.mc_samples));
    w.key("mc_repeats");
    w.value(t.mc_repeats);
    w.key("values");
    w.open('{');
    for (const auto& [k, slot] : t.values) {
        w.key(k);
        w.open('{');
        w.key("value");
        w.value(slot.value);
        w.key("se");
        w.value(slot.se);
        w.close('}');
    }
    w.close('}');
    w.close('}');
    os << "\n";
}

inline void write_truth_csv(const TrueEffectSet& t, std::ostream& os) {
    os << "quantity,value,se\n";
    for (const auto& [k, slot] : t.values)
        os << k << ',' << num17(slot.value) << ',' << num17(slot.se) << '\n';
    os << "scenario," << t.scenario_id << ",\n";
    os << "mc_samples," << t.mc_samples << ",\n";
    os << "mc_repeats," << t.mc_repeats << ",\n";
}

inline void write_truth(const TrueEffectSet& t, Format f, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw usage_error("cannot write output file '" + path + "'");
    if (f == Format::json)
        write_truth_json(t, os);
    else
        write_truth_csv(t, os);
    if (!os) throw usage_error("failed while writing '" + path + "'");
}

inline void print_truth_summary(const TrueEffectSet& t, std::ostream& os) {
    os << "Oracle truth for scenario " << t.scenario_id << " (" << t.mc_samples << " x "
       << t.mc_repeats << " draws)\n";
    for (const auto& [k, slot] : t.values)
        os << "    " << k << " = " << num4(slot.value) << "  (mc se " << num4(slot.se) << ")\n";
}

inline void print_metrics_summary(const std::vector<MetricRow>& rows, std::ostream& os) {
    int scenario = -1;
    std::string estimator;
    for (const auto& r : rows) {
        if (r.metric == "replicates" || r.metric == "replicate_failures") continue;
        if (r.scenario != scenario) {
            scenario = r.scenario;
            estimator.clear();
            os << "scenario " << scenario << "\n";
        }
        if (r.estimator != estimator) {
            estimator = r.estimator;
            os << "  " << estimator << "\n";
        }
        os << "    " << r.effect << "  " << r.metric << " = " << num4(r.value) << "\n";
    }
}

}  // namespace cdecomp::io
