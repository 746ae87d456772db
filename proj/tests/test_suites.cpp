#include <doctest.h>

#include <algorithm>

#include "adjset/suites.hpp"

using namespace adjset;

namespace {

SuiteOptions small() {
    SuiteOptions o;
    o.n = 3000;
    o.n_runs = 3;
    o.dims = {3, 5};
    o.irm_dims = {7};
    o.thresholds = {0.1, 0.5};
    o.irm_iterations = 400;
    return o;
}

}  // namespace

TEST_SUITE("suites") {

TEST_CASE("ATE-error grid shape and determinism") {
    SuiteOptions o = small();
    const auto rows = suite_ate_error(o, 5);
    // per d in dims: 4 fixed sets + baseline + 2 thresholds + 2 IRM arms; per irm dim: 2 IRM arms
    CHECK(rows.size() == 2 * (4 + 1 + 2 + 2) + 2);
    for (const auto& r : rows) {
        CHECK(r.suite == "ate-error");
        CHECK(r.mean >= 0.0);
        CHECK(r.stderr_ >= 0.0);
    }
    CHECK(find_row(rows, "adjust", 3, "{x2}").count == 3);
    CHECK(find_row(rows, "baseline", 5, "{x1,x2,x3}").mean == find_row(rows, "adjust", 5, "{x1,x2,x3}").mean);
    CHECK(find_row(rows, "irm-t", 7).count == 3);
    CHECK(find_row(rows, "exhaustive", 3, "", 0.5).threshold == 0.5);
    CHECK_THROWS_AS(find_row(rows, "exhaustive", 9), std::out_of_range);

    CHECK(suite_csv(suite_ate_error(o, 5)) == suite_csv(rows));
    o.exec = Exec::serial;
    CHECK(suite_csv(suite_ate_error(o, 5)) == suite_csv(rows));
    CHECK(suite_csv(suite_ate_error(small(), 6)) != suite_csv(rows));

    o.dims = {4};
    CHECK_THROWS(suite_ate_error(o, 1));
}

TEST_CASE("success probabilities") {
    SuiteOptions o = small();
    o.n_runs = 6;
    const auto rows = suite_success_probability(o, 2);
    CHECK(rows.size() == 4);
    for (const auto& r : rows) {
        CHECK(r.mean >= 0.0);
        CHECK(r.mean <= 1.0);
        CHECK(r.count == 6);
        CHECK(r.subset == "{x2}");
    }
    // a higher threshold never accepts more often
    CHECK(find_row(rows, "rcot", 3, "{x2}", 0.5).mean <= find_row(rows, "rcot", 3, "{x2}", 0.1).mean);
    o.exec = Exec::serial;
    CHECK(suite_csv(suite_success_probability(o, 2)) == suite_csv(rows));
}

TEST_CASE("p-value tables") {
    SuiteOptions o = small();
    o.dims = {3};
    const auto rows = suite_pvalue_tables(o, 3);
    CHECK(rows.size() == 8);
    for (const char* g : {"toy", "toy_x1y"})
        for (const char* z : {"{}", "{x2}", "{x3}", "{x2,x3}"}) {
            const SuiteRow& r = find_row(rows, "rcot", 3, z, std::nullopt, g);
            CHECK(r.mean >= 0.0);
            CHECK(r.mean <= 1.0);
            CHECK(r.count == 3);
        }
}

TEST_CASE("CSV layout") {
    SuiteRow r{"ate-error", "toy", "exhaustive", 3, 0.1, "{x2}", 0.25, 0.5, 4};
    const std::string csv = suite_csv({r});
    CHECK(csv == "suite,graph,method,d,threshold,subset,mean,stderr,count\n"
                 "ate-error,toy,exhaustive,3,0.10000000000000001,\"{x2}\",0.25,0.5,4\n");
    r.threshold.reset();
    CHECK(suite_csv({r}).find(",3,,\"{x2}\"") != std::string::npos);
}

}  // TEST_SUITE
