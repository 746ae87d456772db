#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "adjset/citest.hpp"
#include "adjset/dataset.hpp"
#include "adjset/envgen.hpp"
#include "adjset/exec.hpp"
#include "adjset/graph.hpp"
#include "adjset/ridge.hpp"
#include "adjset/subsets.hpp"

namespace adjset {

/// Invariance check e _||_ y | Z, t for a candidate set of scalar columns,
/// evaluated on the given rows. Returns a p-value; implementations must be
/// safe to call concurrently.
class InvarianceTester {
public:
    virtual ~InvarianceTester() = default;
    virtual double p_value(const std::vector<int>& columns, const RowIndex& rows, Seed seed) const = 0;
    virtual std::string name() const = 0;
};

/// RCoT on the data: candidate columns of `table`, labels of `env`.
class RcotTester : public InvarianceTester {
public:
    RcotTester(const ColumnTable& table, const Eigen::VectorXd& t, const Eigen::VectorXd& y, std::vector<int> env,
               RcotParams params);
    double p_value(const std::vector<int>& columns, const RowIndex& rows, Seed seed) const override;
    std::string name() const override;

private:
    const ColumnTable& table_;
    const Eigen::VectorXd& t_;
    const Eigen::VectorXd& y_;
    std::vector<int> env_;
    RcotParams params_;
};

/// Perfect CI oracle: 1 when e is d-separated from y by the owners of the
/// columns plus t in graph_with_env, else 0.
class DsepTester : public InvarianceTester {
public:
    DsepTester(Graph graph_with_env, std::vector<ColumnInfo> columns);
    double p_value(const std::vector<int>& columns, const RowIndex& rows, Seed seed) const override;
    std::string name() const override { return "dsep"; }

private:
    SeparationOracle oracle_;
    std::vector<ColumnInfo> columns_;
    std::size_t e_ = 0, y_ = 0, t_ = 0;
};

struct SearchParams {
    double p_threshold = 0.1;
    SizeRange sizes;
    int n_runs = 100;
    double train_fraction = 0.8;
    RidgeParams ridge;
    RcotParams rcot;
    bool regenerate_env = false;
    Exec exec = Exec::parallel;
};

struct SubsetRecord {
    std::vector<int> columns;
    std::vector<std::string> names;
    double mean_p = 0.0;
    int accepted_runs = 0;
    double mean_ate = 0.0;  // over accepted runs; meaningful only if accepted_runs > 0
};

enum class SearchStatus { ok, no_invariant_subset };

struct AdjustmentReport {
    SearchStatus status = SearchStatus::ok;
    std::uint64_t candidates_tested = 0;
    std::vector<SubsetRecord> subsets;  // every candidate, enumeration order
    std::optional<double> ate;
    int c1 = 0;
    std::vector<std::optional<double>> per_run_ate;
    std::vector<int> per_run_accepted;  // c2 of every run
    nlohmann::json config;

    std::vector<const SubsetRecord*> accepted() const;
};

/// Invariance-tested subset search over the scalar feature columns other
/// than the anchor's. The tester defaults to RCoT on the data.
AdjustmentReport exhaustive_ate(const Dataset& data, const EnvAssignment& env, const SearchParams& params, Seed seed,
                                const InvarianceTester* tester = nullptr);

/// One report per threshold from a single pass of CI tests; params.p_threshold
/// is ignored.
std::vector<AdjustmentReport> exhaustive_ate_thresholds(const Dataset& data, const EnvAssignment& env,
                                                        const SearchParams& params,
                                                        const std::vector<double>& thresholds, Seed seed,
                                                        const InvarianceTester* tester = nullptr);

nlohmann::json report_to_json(const AdjustmentReport& report);
/// One row per candidate: size, columns, mean p, acceptance rate, ATE.
std::string report_summary_csv(const AdjustmentReport& report);

using SubsetFamily = std::set<NodeSet>;

/// Decides e _||_ y | Z, t with e sub-sampled from `anchor`.
class BackdoorBackend {
public:
    virtual ~BackdoorBackend() = default;
    virtual bool invariant(const std::string& anchor, const NodeSet& z) const = 0;
};

/// Graph backend: e attached to the anchor and, optionally, t.
class DsepBackend : public BackdoorBackend {
public:
    explicit DsepBackend(Graph g, bool include_t = true);
    bool invariant(const std::string& anchor, const NodeSet& z) const override;
    const Graph& graph() const { return graph_; }

private:
    Graph graph_;
    bool include_t_;
};

/// Data backend: one environment assignment per anchor, single RCoT test
/// on all rows.
class CiBackend : public BackdoorBackend {
public:
    CiBackend(const Dataset& data, std::map<std::string, EnvAssignment> envs, double p_threshold, RcotParams params,
              Seed seed);
    bool invariant(const std::string& anchor, const NodeSet& z) const override;

private:
    const Dataset& data_;
    std::map<std::string, EnvAssignment> envs_;
    double threshold_;
    RcotParams params_;
    Seed seed_;
};

/// Every subset of `observed` that contains all parents, plus every subset
/// of observed minus some parent that passes the backend's invariance check.
/// With a graph backend and `check_parents`, refuses graphs where t has a
/// hidden parent (a bi-directed edge) or the declared parents are wrong.
SubsetFamily find_all_backdoors(const NodeSet& parents_of_t, const NodeSet& observed, const BackdoorBackend& backend,
                                bool check_parents = true);

/// Checks, for a graph backend, that the declared parents are exactly the
/// treatment's parents and that none of them is hidden.
void require_observed_parents(const Graph& g, const NodeSet& parents_of_t);

std::string format_subset(const NodeSet& z);

}  // namespace adjset
