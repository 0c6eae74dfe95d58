#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "cdecomp/data.hpp"
#include "cdecomp/errors.hpp"

namespace cdecomp {

// One model term: the intercept, a single column, or a product of two columns.
struct Term {
    enum class Kind { intercept, main, product };
    Kind kind = Kind::intercept;
    std::string a, b;

    static Term intercept() { return Term{}; }
    static Term main(std::string col) { return Term{Kind::main, std::move(col), ""}; }
    static Term product(std::string x, std::string y) {
        if (y < x) std::swap(x, y);  // canonical order so duplicates are detectable
        return Term{Kind::product, std::move(x), std::move(y)};
    }

    std::string name() const {
        switch (kind) {
            case Kind::intercept: return "(intercept)";
            case Kind::main: return a;
            case Kind::product: return a + ":" + b;
        }
        return "?";
    }

    bool operator==(const Term& o) const { return kind == o.kind && a == o.a && b == o.b; }
};

struct DesignSpec {
    std::vector<Term> terms;

    void validate() const {
        if (terms.empty()) throw usage_error("design: no terms");
        for (std::size_t i = 0; i < terms.size(); ++i)
            for (std::size_t j = i + 1; j < terms.size(); ++j)
                if (terms[i] == terms[j])
                    throw usage_error("design: duplicate term '" + terms[i].name() + "'");
    }

    std::vector<std::string> term_names() const {
        std::vector<std::string> out;
        for (const auto& t : terms) out.push_back(t.name());
        return out;
    }

    // Outcome model: intercept + group + mediators (+ pairwise mediator
    // products when requested) + confounders.
    static DesignSpec outcome_default(const VariableRoles& roles, bool interaction) {
        DesignSpec d;
        d.terms.push_back(Term::intercept());
        d.terms.push_back(Term::main(roles.group));
        for (const auto& m : roles.mediators) d.terms.push_back(Term::main(m.name));
        if (interaction) {
            for (std::size_t i = 0; i < roles.mediators.size(); ++i)
                for (std::size_t j = i + 1; j < roles.mediators.size(); ++j)
                    d.terms.push_back(
                        Term::product(roles.mediators[i].name, roles.mediators[j].name));
        }
        for (const auto& c : roles.confounders) d.terms.push_back(Term::main(c));
        return d;
    }

    // Mediator equation: intercept + group + confounders (no mediators on the
    // right-hand side; the mediators are contemporaneous).
    static DesignSpec mediator_default(const VariableRoles& roles) {
        DesignSpec d;
        d.terms.push_back(Term::intercept());
        d.terms.push_back(Term::main(roles.group));
        for (const auto& c : roles.confounders) d.terms.push_back(Term::main(c));
        return d;
    }
};

inline Eigen::MatrixXd build_design(const Dataset& data, const DesignSpec& spec) {
    spec.validate();
    const auto n = static_cast<Eigen::Index>(data.n());
    Eigen::MatrixXd X(n, static_cast<Eigen::Index>(spec.terms.size()));
    for (std::size_t j = 0; j < spec.terms.size(); ++j) {
        const auto& t = spec.terms[j];
        auto col = X.col(static_cast<Eigen::Index>(j));
        switch (t.kind) {
            case Term::Kind::intercept: col.setOnes(); break;
            case Term::Kind::main: col = data.column(t.a); break;
            case Term::Kind::product:
                col = data.column(t.a).cwiseProduct(data.column(t.b));
                break;
        }
    }
    return X;
}

}  // namespace cdecomp
