#include <catch2/catch_amalgamated.hpp>

#include "cdecomp/design.hpp"

using namespace cdecomp;
using Catch::Matchers::ContainsSubstring;

namespace {

VariableRoles roles3() {
    VariableRoles r;
    r.outcome = "y";
    r.group = "a";
    r.mediators = {{"m1", MediatorKind::continuous},
                   {"m2", MediatorKind::continuous},
                   {"m3", MediatorKind::binary}};
    r.confounders = {"c1", "c2"};
    return r;
}

}  // namespace

TEST_CASE("terms name themselves and products are order-free") {
    CHECK(Term::intercept().name() == "(intercept)");
    CHECK(Term::main("age").name() == "age");
    CHECK(Term::product("m2", "m1").name() == "m1:m2");
    CHECK(Term::product("m1", "m2") == Term::product("m2", "m1"));
    CHECK_FALSE(Term::main("m1") == Term::intercept());
}

TEST_CASE("design spec validation") {
    DesignSpec d;
    CHECK_THROWS_AS(d.validate(), usage_error);

    d.terms = {Term::intercept(), Term::main("x"), Term::product("a", "b"),
               Term::product("b", "a")};
    try {
        d.validate();
        FAIL("expected usage_error");
    } catch (const usage_error& e) {
        CHECK_THAT(e.what(), ContainsSubstring("duplicate term 'a:b'"));
    }
}

TEST_CASE("default outcome design covers group, mediators, products, confounders") {
    auto r = roles3();
    auto with = DesignSpec::outcome_default(r, true);
    CHECK(with.term_names() ==
          std::vector<std::string>{"(intercept)", "a", "m1", "m2", "m3", "m1:m2", "m1:m3",
                                   "m2:m3", "c1", "c2"});
    auto without = DesignSpec::outcome_default(r, false);
    CHECK(without.term_names() ==
          std::vector<std::string>{"(intercept)", "a", "m1", "m2", "m3", "c1", "c2"});
    CHECK_NOTHROW(with.validate());
}

TEST_CASE("default mediator design is intercept, group, confounders") {
    auto d = DesignSpec::mediator_default(roles3());
    CHECK(d.term_names() == std::vector<std::string>{"(intercept)", "a", "c1", "c2"});
}

TEST_CASE("build_design fills columns term by term") {
    VariableRoles r;
    r.outcome = "y";
    r.group = "a";
    r.mediators = {{"m1", MediatorKind::continuous}, {"m2", MediatorKind::continuous}};
    auto data = Dataset::from_columns(
        r, {{"y", {1, 0, 1}}, {"a", {1, 0, 1}}, {"m1", {2.0, -1.5, 0.25}}, {"m2", {3.0, 4.0, -8.0}}});

    DesignSpec spec;
    spec.terms = {Term::intercept(), Term::main("a"), Term::main("m1"),
                  Term::product("m1", "m2")};
    auto X = build_design(data, spec);
    REQUIRE(X.rows() == 3);
    REQUIRE(X.cols() == 4);
    CHECK(X.col(0).isConstant(1.0));
    CHECK(X(1, 1) == 0.0);
    CHECK(X(1, 2) == -1.5);
    CHECK(X(0, 3) == 6.0);
    CHECK(X(2, 3) == -2.0);

    DesignSpec unknown;
    unknown.terms = {Term::intercept(), Term::main("zzz")};
    CHECK_THROWS_AS(build_design(data, unknown), validation_error);
}
