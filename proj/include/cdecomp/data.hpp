#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cdecomp/errors.hpp"

namespace cdecomp {

enum class MediatorKind { binary, continuous };

inline const char* mediator_kind_name(MediatorKind k) {
    return k == MediatorKind::binary ? "binary" : "continuous";
}

inline MediatorKind parse_mediator_kind(const std::string& s) {
    if (s == "binary" || s == "bin" || s == "b") return MediatorKind::binary;
    if (s == "continuous" || s == "cont" || s == "c") return MediatorKind::continuous;
    throw usage_error("unknown mediator kind '" + s + "' (expected binary or continuous)");
}

struct MediatorRole {
    std::string name;
    MediatorKind kind;
};

// Which columns play which part. Mediators are ordered; the order defines the
// assignment digits used in effect names.
struct VariableRoles {
    std::string outcome;
    std::string group;
    std::vector<MediatorRole> mediators;
    std::vector<std::string> confounders;

    std::vector<std::string> column_names() const {
        std::vector<std::string> names{outcome, group};
        for (const auto& m : mediators) names.push_back(m.name);
        for (const auto& c : confounders) names.push_back(c);
        return names;
    }

    void validate() const {
        if (outcome.empty() || group.empty()) throw usage_error("roles: outcome and group are required");
        if (mediators.size() < 2 || mediators.size() > 3)
            throw usage_error("roles: expected 2 or 3 mediators, got " +
                              std::to_string(mediators.size()));
        std::vector<std::string> all{outcome, group};
        for (const auto& m : mediators) all.push_back(m.name);
        for (const auto& c : confounders) all.push_back(c);
        std::sort(all.begin(), all.end());
        if (std::adjacent_find(all.begin(), all.end()) != all.end())
            throw usage_error("roles: column names must be distinct");
    }
};

struct GroupSummary {
    std::size_t n = 0;
    std::size_t n_group[2] = {0, 0};
    double outcome_mean[2] = {0.0, 0.0};
    std::vector<std::array<double, 2>> mediator_means;  // per mediator, per group
};

// Column store for one analysis dataset. Only role columns are kept, in
// canonical order: outcome, group, mediators..., confounders...
class Dataset {
  public:
    static Dataset from_columns(const VariableRoles& roles,
                                const std::vector<std::pair<std::string, std::vector<double>>>& cols,
                                std::size_t dropped = 0) {
        Dataset d;
        d.roles_ = roles;
        d.dropped_ = dropped;
        std::map<std::string, const std::vector<double>*> byname;
        for (const auto& [name, v] : cols) byname[name] = &v;
        for (const auto& name : d.role_names()) {
            auto it = byname.find(name);
            if (it == byname.end())
                throw validation_error("dataset: required column '" + name + "' not found");
            d.names_.push_back(name);
            d.cols_.emplace_back(Eigen::Map<const Eigen::VectorXd>(it->second->data(),
                                                                   it->second->size()));
        }
        d.finish_validate();
        return d;
    }

    static Dataset load_csv(const std::string& path, const VariableRoles& roles) {
        std::ifstream in(path);
        if (!in) throw usage_error("cannot open data file '" + path + "'");
        std::string header;
        if (!std::getline(in, header)) throw validation_error("data file '" + path + "' is empty");
        if (!header.empty() && header.back() == '\r') header.pop_back();
        auto head = split_csv(header);
        for (auto& h : head) h = trim(h);

        Dataset d;
        d.roles_ = roles;
        std::vector<int> want;  // csv column index per role column
        for (const auto& name : d.role_names()) {
            auto it = std::find(head.begin(), head.end(), name);
            if (it == head.end())
                throw validation_error("data file is missing required column '" + name + "'");
            want.push_back(static_cast<int>(it - head.begin()));
            d.names_.push_back(name);
        }

        std::vector<std::vector<double>> cols(want.size());
        std::string line;
        std::size_t lineno = 1;
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (trim(line).empty()) continue;
            auto fields = split_csv(line);
            if (fields.size() != head.size())
                throw validation_error("row " + std::to_string(lineno) + ": expected " +
                                       std::to_string(head.size()) + " fields, got " +
                                       std::to_string(fields.size()));
            std::vector<double> vals(want.size());
            bool missing = false;
            for (std::size_t j = 0; j < want.size(); ++j) {
                const std::string f = trim(fields[static_cast<std::size_t>(want[j])]);
                if (f.empty() || f == "NA" || f == "na" || f == "NaN" || f == "nan" || f == ".") {
                    missing = true;
                    break;
                }
                char* end = nullptr;
                vals[j] = std::strtod(f.c_str(), &end);
                if (end == f.c_str() || *end != '\0')
                    throw validation_error("row " + std::to_string(lineno) + ", column '" +
                                           d.names_[j] + "': malformed numeric field '" + f + "'");
                if (!std::isfinite(vals[j])) {
                    missing = true;
                    break;
                }
            }
            if (missing) {
                ++d.dropped_;
                continue;
            }
            for (std::size_t j = 0; j < want.size(); ++j) cols[j].push_back(vals[j]);
        }
        for (std::size_t j = 0; j < cols.size(); ++j)
            d.cols_.emplace_back(
                Eigen::Map<const Eigen::VectorXd>(cols[j].data(), cols[j].size()));
        d.finish_validate();
        return d;
    }

    std::size_t n() const { return static_cast<std::size_t>(cols_.empty() ? 0 : cols_[0].size()); }
    std::size_t dropped_rows() const { return dropped_; }
    const VariableRoles& roles() const { return roles_; }
    const std::vector<std::string>& names() const { return names_; }

    const Eigen::VectorXd& column(const std::string& name) const {
        for (std::size_t j = 0; j < names_.size(); ++j)
            if (names_[j] == name) return cols_[j];
        throw validation_error("dataset: no column named '" + name + "'");
    }

    const Eigen::VectorXd& outcome() const { return cols_[0]; }
    const Eigen::VectorXd& group() const { return cols_[1]; }
    const Eigen::VectorXd& mediator(std::size_t j) const { return cols_[2 + j]; }
    const Eigen::VectorXd& confounder(std::size_t j) const {
        return cols_[2 + roles_.mediators.size() + j];
    }

    const std::vector<Eigen::Index>& group_rows(int g) const { return g ? rows1_ : rows0_; }

    Dataset subset(const std::vector<Eigen::Index>& rows) const {
        Dataset d;
        d.roles_ = roles_;
        d.names_ = names_;
        d.dropped_ = 0;
        d.cols_.reserve(cols_.size());
        for (const auto& c : cols_) {
            Eigen::VectorXd v(rows.size());
            for (std::size_t i = 0; i < rows.size(); ++i) v(static_cast<Eigen::Index>(i)) = c(rows[i]);
            d.cols_.push_back(std::move(v));
        }
        d.finish_validate();
        return d;
    }

    void write_csv(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw usage_error("cannot write data file '" + path + "'");
        for (std::size_t j = 0; j < names_.size(); ++j) out << (j ? "," : "") << names_[j];
        out << "\n";
        char buf[40];
        for (std::size_t i = 0; i < n(); ++i) {
            for (std::size_t j = 0; j < cols_.size(); ++j) {
                std::snprintf(buf, sizeof buf, "%.17g", cols_[j](static_cast<Eigen::Index>(i)));
                out << (j ? "," : "") << buf;
            }
            out << "\n";
        }
        if (!out) throw usage_error("failed while writing '" + path + "'");
    }

  private:
    std::vector<std::string> role_names() const {
        std::vector<std::string> names{roles_.outcome, roles_.group};
        for (const auto& m : roles_.mediators) names.push_back(m.name);
        for (const auto& c : roles_.confounders) names.push_back(c);
        return names;
    }

    static std::string trim(const std::string& s) {
        auto b = s.find_first_not_of(" \t");
        if (b == std::string::npos) return "";
        auto e = s.find_last_not_of(" \t");
        return s.substr(b, e - b + 1);
    }

    static std::vector<std::string> split_csv(const std::string& line) {
        std::vector<std::string> out;
        std::string cur;
        std::istringstream ss(line);
        while (std::getline(ss, cur, ',')) out.push_back(cur);
        if (!line.empty() && line.back() == ',') out.push_back("");
        return out;
    }

    static bool is01(double v) { return v == 0.0 || v == 1.0; }

    void finish_validate() {
        roles_.validate();
        if (n() == 0) throw validation_error("dataset has no usable rows");
        for (std::size_t j = 0; j < cols_.size(); ++j) {
            if (static_cast<std::size_t>(cols_[j].size()) != n())
                throw validation_error("column '" + names_[j] + "' has inconsistent length");
            if (!cols_[j].allFinite())
                throw validation_error("column '" + names_[j] + "' contains non-finite values");
        }
        auto check01 = [&](const Eigen::VectorXd& v, const std::string& what) {
            for (Eigen::Index i = 0; i < v.size(); ++i)
                if (!is01(v(i)))
                    throw validation_error(what + " must be coded 0/1 (row " +
                                           std::to_string(i + 1) + " has " +
                                           std::to_string(v(i)) + ")");
        };
        check01(outcome(), "outcome '" + roles_.outcome + "'");
        check01(group(), "group '" + roles_.group + "'");
        for (std::size_t j = 0; j < roles_.mediators.size(); ++j)
            if (roles_.mediators[j].kind == MediatorKind::binary)
                check01(mediator(j), "binary mediator '" + roles_.mediators[j].name + "'");
        rows0_.clear();
        rows1_.clear();
        for (Eigen::Index i = 0; i < group().size(); ++i)
            (group()(i) == 1.0 ? rows1_ : rows0_).push_back(i);
        if (rows0_.empty() || rows1_.empty())
            throw validation_error("both group levels must be present in the data");
    }

    VariableRoles roles_;
    std::vector<std::string> names_;
    std::vector<Eigen::VectorXd> cols_;
    std::vector<Eigen::Index> rows0_, rows1_;
    std::size_t dropped_ = 0;
};

inline GroupSummary summarize_groups(const Dataset& d) {
    GroupSummary s;
    s.n = d.n();
    s.mediator_means.resize(d.roles().mediators.size(), {0.0, 0.0});
    for (int g = 0; g < 2; ++g) {
        const auto& rows = d.group_rows(g);
        s.n_group[g] = rows.size();
        double ysum = 0.0;
        std::vector<double> msum(d.roles().mediators.size(), 0.0);
        for (auto i : rows) {
            ysum += d.outcome()(i);
            for (std::size_t j = 0; j < msum.size(); ++j) msum[j] += d.mediator(j)(i);
        }
        s.outcome_mean[g] = ysum / static_cast<double>(rows.size());
        for (std::size_t j = 0; j < msum.size(); ++j)
            s.mediator_means[j][g] = msum[j] / static_cast<double>(rows.size());
    }
    return s;
}

}  // namespace cdecomp
