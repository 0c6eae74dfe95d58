#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <string>
#include <unistd.h>

#include "cdecomp/data.hpp"
#include "cdecomp/errors.hpp"

using namespace cdecomp;
using Catch::Matchers::ContainsSubstring;

namespace {

VariableRoles demo_roles() {
    VariableRoles r;
    r.outcome = "y";
    r.group = "a";
    r.mediators = {{"m1", MediatorKind::continuous}, {"m2", MediatorKind::continuous}};
    r.confounders = {"c"};
    return r;
}

struct TempCsv {
    std::filesystem::path path;
    explicit TempCsv(const std::string& text) {
        static int counter = 0;
        path = std::filesystem::temp_directory_path() /
               ("cdecomp_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++) +
                ".csv");
        std::ofstream(path) << text;
    }
    ~TempCsv() { std::filesystem::remove(path); }
    std::string str() const { return path.string(); }
};

}  // namespace

TEST_CASE("mediator kinds parse and reject unknown text") {
    CHECK(parse_mediator_kind("binary") == MediatorKind::binary);
    CHECK(parse_mediator_kind("bin") == MediatorKind::binary);
    CHECK(parse_mediator_kind("b") == MediatorKind::binary);
    CHECK(parse_mediator_kind("continuous") == MediatorKind::continuous);
    CHECK(parse_mediator_kind("cont") == MediatorKind::continuous);
    CHECK(parse_mediator_kind("c") == MediatorKind::continuous);
    CHECK_THROWS_AS(parse_mediator_kind("categorical"), usage_error);
}

TEST_CASE("roles validation enforces shape and distinct names") {
    auto r = demo_roles();
    CHECK_NOTHROW(r.validate());
    r.mediators.push_back({"m3", MediatorKind::binary});
    CHECK_NOTHROW(r.validate());
    r.mediators.push_back({"m4", MediatorKind::binary});
    CHECK_THROWS_AS(r.validate(), usage_error);  // four mediators

    r = demo_roles();
    r.mediators.pop_back();
    CHECK_THROWS_AS(r.validate(), usage_error);  // one mediator

    r = demo_roles();
    r.confounders = {"m1"};
    CHECK_THROWS_AS(r.validate(), usage_error);  // duplicate column name

    r = demo_roles();
    r.outcome = "";
    CHECK_THROWS_AS(r.validate(), usage_error);
}

TEST_CASE("csv loads, reorders columns, and counts dropped rows") {
    // extra column ignored; role columns picked by name; 2 incomplete rows
    TempCsv f(
        "c,ignored,y,a,m2,m1\n"
        "0,9,1,1,2.5,0.5\n"
        "1,9,0,0,-1.0,1.5\n"
        "0,9,1,1,,0.25\n"
        "1,9,0,1,3.5,NA\n"
        "1,9,1,0,0.125,2.0\n");
    auto d = Dataset::load_csv(f.str(), demo_roles());
    CHECK(d.n() == 3);
    CHECK(d.dropped_rows() == 2);
    REQUIRE(d.names() == std::vector<std::string>{"y", "a", "m1", "m2", "c"});
    CHECK(d.outcome()(0) == 1.0);
    CHECK(d.group()(2) == 0.0);
    CHECK(d.mediator(0)(1) == 1.5);
    CHECK(d.mediator(1)(0) == 2.5);
    CHECK(d.confounder(0)(1) == 1.0);
    CHECK(d.group_rows(1) == std::vector<Eigen::Index>{0});
    CHECK(d.group_rows(0) == std::vector<Eigen::Index>{1, 2});
}

TEST_CASE("csv missing-value spellings and non-finite numbers drop the row") {
    TempCsv f(
        "y,a,m1,m2,c\n"
        "1,1,nan,1,0\n"
        "0,0,1,NaN,0\n"
        "1,1,1,1,.\n"
        "0,0,inf,1,1\n"
        "1,1,0.5,0.5,1\n"
        "0,0,0.5,0.5,0\n");
    auto d = Dataset::load_csv(f.str(), demo_roles());
    CHECK(d.n() == 2);
    CHECK(d.dropped_rows() == 4);
}

TEST_CASE("csv reports malformed text with row and column") {
    TempCsv f(
        "y,a,m1,m2,c\n"
        "1,1,0.5,2.0,0\n"
        "0,zero,0.5,2.0,1\n");
    try {
        Dataset::load_csv(f.str(), demo_roles());
        FAIL("expected validation_error");
    } catch (const validation_error& e) {
        CHECK_THAT(e.what(), ContainsSubstring("row 3"));
        CHECK_THAT(e.what(), ContainsSubstring("'a'"));
        CHECK_THAT(e.what(), ContainsSubstring("zero"));
    }
}

TEST_CASE("csv loader rejects structural problems") {
    CHECK_THROWS_AS(Dataset::load_csv("/nonexistent/nope.csv", demo_roles()), usage_error);

    TempCsv empty("");
    CHECK_THROWS_AS(Dataset::load_csv(empty.str(), demo_roles()), validation_error);

    TempCsv missing_col("y,a,m1,c\n1,1,0.5,0\n");
    CHECK_THROWS_AS(Dataset::load_csv(missing_col.str(), demo_roles()), validation_error);

    TempCsv ragged("y,a,m1,m2,c\n1,1,0.5,2.0\n");
    CHECK_THROWS_AS(Dataset::load_csv(ragged.str(), demo_roles()), validation_error);

    TempCsv all_dropped("y,a,m1,m2,c\n1,1,NA,2.0,0\n0,0,NA,1.0,1\n");
    CHECK_THROWS_AS(Dataset::load_csv(all_dropped.str(), demo_roles()), validation_error);
}

TEST_CASE("validation pins 0/1 coding with the offending row") {
    TempCsv bad_outcome("y,a,m1,m2,c\n2,1,0.5,1.0,0\n0,0,0.5,1.0,1\n");
    try {
        Dataset::load_csv(bad_outcome.str(), demo_roles());
        FAIL("expected validation_error");
    } catch (const validation_error& e) {
        CHECK_THAT(e.what(), ContainsSubstring("outcome 'y'"));
        CHECK_THAT(e.what(), ContainsSubstring("row 1"));
    }

    TempCsv bad_group("y,a,m1,m2,c\n1,1,0.5,1.0,0\n0,0.5,0.5,1.0,1\n");
    CHECK_THROWS_AS(Dataset::load_csv(bad_group.str(), demo_roles()), validation_error);

    auto roles = demo_roles();
    roles.mediators[0].kind = MediatorKind::binary;
    TempCsv bad_med("y,a,m1,m2,c\n1,1,0.5,1.0,0\n0,0,1,1.0,1\n");
    CHECK_THROWS_AS(Dataset::load_csv(bad_med.str(), roles), validation_error);

    TempCsv one_group("y,a,m1,m2,c\n1,1,0.5,1.0,0\n0,1,0.5,1.0,1\n");
    CHECK_THROWS_AS(Dataset::load_csv(one_group.str(), demo_roles()), validation_error);
}

TEST_CASE("crlf line endings and padded fields are tolerated") {
    TempCsv f("y,a,m1,m2,c\r\n1, 1 ,0.5,2.0,0\r\n0,0, 1.5 ,1.0,1\r\n");
    auto d = Dataset::load_csv(f.str(), demo_roles());
    CHECK(d.n() == 2);
    CHECK(d.mediator(0)(1) == 1.5);
}

TEST_CASE("write then load round-trips every bit") {
    TempCsv src(
        "y,a,m1,m2,c\n"
        "1,1,0.123456789012345678,2.0000000000000004,0\n"
        "0,0,-1.9999999999999998,0.1,1\n"
        "1,0,3.141592653589793,-2.718281828459045,0\n"
        "0,1,1e-15,1e300,1\n");
    auto d = Dataset::load_csv(src.str(), demo_roles());
    TempCsv dst("");
    d.write_csv(dst.str());
    auto d2 = Dataset::load_csv(dst.str(), demo_roles());
    REQUIRE(d2.n() == d.n());
    for (const auto& name : d.names())
        CHECK((d.column(name) - d2.column(name)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("subset keeps roles and revalidates") {
    TempCsv f(
        "y,a,m1,m2,c\n"
        "1,1,0.5,2.0,0\n"
        "0,0,1.5,1.0,1\n"
        "1,0,2.5,0.5,1\n");
    auto d = Dataset::load_csv(f.str(), demo_roles());
    auto s = d.subset({2, 0, 2});
    CHECK(s.n() == 3);
    CHECK(s.mediator(0)(0) == 2.5);
    CHECK(s.mediator(0)(1) == 0.5);
    CHECK(s.group_rows(1) == std::vector<Eigen::Index>{1});
    // subsetting away one group level is caught
    CHECK_THROWS_AS(d.subset({1, 2}), validation_error);
}

TEST_CASE("from_columns demands every role column") {
    auto roles = demo_roles();
    std::vector<std::pair<std::string, std::vector<double>>> cols{
        {"y", {1, 0}}, {"a", {1, 0}}, {"m1", {0.5, 1.5}}, {"m2", {2.0, 1.0}}};
    CHECK_THROWS_AS(Dataset::from_columns(roles, cols), validation_error);
    cols.push_back({"c", {0, 1}});
    auto d = Dataset::from_columns(roles, cols);
    CHECK(d.n() == 2);
}

TEST_CASE("group summary reports per-group means") {
    TempCsv f(
        "y,a,m1,m2,c\n"
        "1,1,1.0,4.0,0\n"
        "0,1,3.0,6.0,0\n"
        "1,0,5.0,0.0,1\n");
    auto d = Dataset::load_csv(f.str(), demo_roles());
    auto s = summarize_groups(d);
    CHECK(s.n == 3);
    CHECK(s.n_group[1] == 2);
    CHECK(s.n_group[0] == 1);
    CHECK(s.outcome_mean[1] == 0.5);
    CHECK(s.outcome_mean[0] == 1.0);
    CHECK(s.mediator_means[0][1] == 2.0);
    CHECK(s.mediator_means[1][1] == 5.0);
    CHECK(s.mediator_means[0][0] == 5.0);
}
