#pragma once

#include <optional>
#include <string>
#include <vector>

#include "adjset/citest.hpp"
#include "adjset/exec.hpp"
#include "adjset/rng.hpp"

namespace adjset {

struct SuiteOptions {
    std::size_t n = 50000;
    int n_runs = 100;
    int scm_draws = 1;  // independent toy SCMs per dimension
    std::vector<int> dims{3, 5, 7};
    std::vector<int> irm_dims{15, 25, 35, 45, 55, 65};
    std::vector<double> thresholds{0.1, 0.2, 0.3, 0.4, 0.5};
    bool include_t = true;
    bool fixed_sets = true;
    bool exhaustive = true;
    bool irm = true;
    int irm_iterations = 15000;
    RcotParams rcot;
    Exec exec = Exec::parallel;
};

/// One aggregated cell. `mean` and `stderr` refer to |ATE error| for the
/// ATE-error suite, acceptance fraction for the success suite and p-value for
/// the table suite. `count` is the number of values aggregated.
struct SuiteRow {
    std::string suite;
    std::string graph;
    std::string method;
    int d = 0;
    std::optional<double> threshold;
    std::string subset;
    double mean = 0.0;
    double stderr_ = 0.0;
    int count = 0;
};

std::vector<SuiteRow> suite_ate_error(const SuiteOptions& options, Seed seed);
std::vector<SuiteRow> suite_success_probability(const SuiteOptions& options, Seed seed);
std::vector<SuiteRow> suite_pvalue_tables(const SuiteOptions& options, Seed seed);

std::string suite_csv(const std::vector<SuiteRow>& rows);

/// First row matching the keys; throws when absent.
const SuiteRow& find_row(const std::vector<SuiteRow>& rows, const std::string& method, int d,
                         const std::string& subset = "", std::optional<double> threshold = std::nullopt,
                         const std::string& graph = "");

}  // namespace adjset
