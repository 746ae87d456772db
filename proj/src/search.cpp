#include "adjset/search.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <sstream>

#include "adjset/adjust.hpp"

namespace adjset {

RcotTester::RcotTester(const ColumnTable& table, const Eigen::VectorXd& t, const Eigen::VectorXd& y,
                       std::vector<int> env, RcotParams params)
    : table_(table), t_(t), y_(y), env_(std::move(env)), params_(params) {}

double RcotTester::p_value(const std::vector<int>& columns, const RowIndex& rows, Seed seed) const {
    std::vector<CiBlock> cond;
    if (!columns.empty()) cond.push_back(CiBlock::continuous(take_rows(table_.select(columns), rows)));
    cond.push_back(CiBlock::binary(take_rows(t_, rows)));
    return ci_pvalue_rcot(CiBlock::labels(take_rows(env_, rows)), CiBlock::continuous(take_rows(y_, rows)), cond,
                          params_, seed)
        .p_value;
}

std::string RcotTester::name() const { return params_.approx == NullApprox::gamma ? "rcot-gamma" : "rcot-permutation"; }

DsepTester::DsepTester(Graph graph_with_env, std::vector<ColumnInfo> columns)
    : oracle_(graph_with_env), columns_(std::move(columns)) {
    const Graph& g = oracle_.graph();
    if (!g.environment()) throw GraphError("d-separation tester needs a graph with an environment node");
    e_ = *g.environment();
    y_ = *g.outcome();
    t_ = *g.treatment();
    for (const auto& c : columns_) (void)g.index(c.owner);
}

double DsepTester::p_value(const std::vector<int>& columns, const RowIndex&, Seed) const {
    const Graph& g = oracle_.graph();
    std::vector<bool> in_z(g.size(), false);
    in_z[t_] = true;
    for (int c : columns) in_z[g.index(columns_.at(static_cast<std::size_t>(c)).owner)] = true;
    return oracle_.separated(e_, y_, in_z) ? 1.0 : 0.0;
}

std::vector<const SubsetRecord*> AdjustmentReport::accepted() const {
    std::vector<const SubsetRecord*> out;
    for (const auto& s : subsets)
        if (s.accepted_runs > 0) out.push_back(&s);
    return out;
}

std::vector<AdjustmentReport> exhaustive_ate_thresholds(const Dataset& data, const EnvAssignment& env,
                                                        const SearchParams& params,
                                                        const std::vector<double>& thresholds, Seed seed,
                                                        const InvarianceTester* tester) {
    if (params.n_runs < 1) throw DatasetError("n_runs must be positive");
    if (thresholds.empty()) throw DatasetError("at least one p-value threshold is required");
    if (env.labels.size() != data.rows()) throw DatasetError("environment labels do not match the dataset");
    const double lowest = *std::min_element(thresholds.begin(), thresholds.end());
    const ColumnTable table = flatten_except(data, NodeSet{env.anchor});
    const auto candidates = enumerate_subsets(static_cast<int>(table.size()), params.sizes);
    const std::size_t m = candidates.size();
    const std::size_t runs = static_cast<std::size_t>(params.n_runs);

    std::unique_ptr<RcotTester> own;
    if (!tester) {
        own = std::make_unique<RcotTester>(table, data.treatment, data.outcome, env.labels, params.rcot);
        tester = own.get();
    }

    std::vector<double> pvals(runs * m, 0.0);
    std::vector<double> ates(runs * m, std::nan(""));
    const Seed ci_base = derive_seed(seed, 0x5eedc1u);
    for (std::size_t r = 0; r < runs; ++r) {
        const Split split = run_split(data.rows(), params.train_fraction, seed, static_cast<int>(r));
        const InvarianceTester* run_tester = tester;
        std::unique_ptr<RcotTester> regenerated;
        std::vector<int> labels;
        if (own && params.regenerate_env) {
            labels = assign_environments(data, env.anchor, env.include_t, env.num_envs,
                                         derive_seed(env.seed, r + 1))
                         .labels;
            regenerated = std::make_unique<RcotTester>(table, data.treatment, data.outcome, labels, params.rcot);
            run_tester = regenerated.get();
        }
        auto evaluate = [&](std::size_t s) {
            const double p = run_tester->p_value(candidates[s], split.train, derive_seed(ci_base, r, s));
            pvals[r * m + s] = p;
            if (p > lowest)
                ates[r * m + s] =
                    adjusted_run(table.select(candidates[s]), data.treatment, data.outcome, split.train, params.ridge);
        };
        if (params.exec == Exec::parallel) {
            std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
            for (std::ptrdiff_t s = 0; s < static_cast<std::ptrdiff_t>(m); ++s) {
                try {
                    evaluate(static_cast<std::size_t>(s));
                } catch (...) {
#pragma omp critical
                    if (!failure) failure = std::current_exception();
                }
            }
            if (failure) std::rethrow_exception(failure);
        } else {
            for (std::size_t s = 0; s < m; ++s) evaluate(s);
        }
    }

    std::vector<AdjustmentReport> reports;
    for (double threshold : thresholds) {
        auto accepted = [&](std::size_t k) { return pvals[k] > threshold; };
        AdjustmentReport report;
        report.candidates_tested = m;
        report.subsets.resize(m);
        for (std::size_t s = 0; s < m; ++s) {
            auto& rec = report.subsets[s];
            rec.columns = candidates[s];
            rec.names = table.names_of(candidates[s]);
            double psum = 0.0, asum = 0.0;
            for (std::size_t r = 0; r < runs; ++r) {
                psum += pvals[r * m + s];
                if (accepted(r * m + s)) {
                    ++rec.accepted_runs;
                    asum += ates[r * m + s];
                }
            }
            rec.mean_p = psum / static_cast<double>(runs);
            rec.mean_ate = rec.accepted_runs > 0 ? asum / rec.accepted_runs : 0.0;
        }
        double total = 0.0;
        for (std::size_t r = 0; r < runs; ++r) {
            int c2 = 0;
            double ate_d = 0.0;
            for (std::size_t s = 0; s < m; ++s)
                if (accepted(r * m + s)) {
                    ++c2;
                    ate_d += ates[r * m + s];
                }
            report.per_run_accepted.push_back(c2);
            if (c2 > 0) {
                ++report.c1;
                total += ate_d / c2;
                report.per_run_ate.emplace_back(ate_d / c2);
            } else {
                report.per_run_ate.emplace_back(std::nullopt);
            }
        }
        if (report.c1 > 0)
            report.ate = total / report.c1;
        else
            report.status = SearchStatus::no_invariant_subset;

        report.config = {{"p_threshold", threshold},
                         {"ci_method", tester->name()},
                         {"anchor", env.anchor},
                         {"include_t", env.include_t},
                         {"num_envs", env.num_envs},
                         {"env_seed", env.seed},
                         {"regenerate_env", params.regenerate_env},
                         {"n_runs", params.n_runs},
                         {"train_fraction", params.train_fraction},
                         {"min_size", params.sizes.min_size},
                         {"max_size", params.sizes.max_size ? nlohmann::json(*params.sizes.max_size) : nlohmann::json()},
                         {"seed", seed}};
        reports.push_back(std::move(report));
    }
    return reports;
}

AdjustmentReport exhaustive_ate(const Dataset& data, const EnvAssignment& env, const SearchParams& params, Seed seed,
                                const InvarianceTester* tester) {
    return exhaustive_ate_thresholds(data, env, params, {params.p_threshold}, seed, tester).front();
}

nlohmann::json report_to_json(const AdjustmentReport& report) {
    using nlohmann::json;
    json accepted = json::array();
    for (const auto* s : report.accepted())
        accepted.push_back({{"columns", s->names},
                            {"mean_p", s->mean_p},
                            {"accepted_runs", s->accepted_runs},
                            {"mean_ate", s->mean_ate}});
    json per_run = json::array();
    for (const auto& a : report.per_run_ate) per_run.push_back(a ? json(*a) : json());
    return {{"status", report.status == SearchStatus::ok ? "ok" : "no_invariant_subset"},
            {"candidates_tested", report.candidates_tested},
            {"c1", report.c1},
            {"ate", report.ate ? json(*report.ate) : json()},
            {"per_run_ate", per_run},
            {"per_run_accepted", report.per_run_accepted},
            {"accepted", accepted},
            {"config", report.config}};
}

std::string report_summary_csv(const AdjustmentReport& report) {
    std::ostringstream out;
    out << "size,columns,mean_p,acceptance_rate,mean_ate\n";
    const double runs = static_cast<double>(report.per_run_ate.size());
    char buf[64];
    for (const auto& s : report.subsets) {
        out << s.columns.size() << ',';
        for (std::size_t i = 0; i < s.names.size(); ++i) out << (i ? ";" : "") << s.names[i];
        std::snprintf(buf, sizeof buf, ",%.17g,%.17g,", s.mean_p, runs > 0 ? s.accepted_runs / runs : 0.0);
        out << buf;
        if (s.accepted_runs > 0) {
            std::snprintf(buf, sizeof buf, "%.17g", s.mean_ate);
            out << buf;
        }
        out << '\n';
    }
    return out.str();
}

namespace {

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) h = (h ^ c) * 1099511628211ull;
    return h;
}

std::string free_env_id(const Graph& g) {
    std::string id = "e";
    while (g.contains(id)) id += "_";
    return id;
}

std::vector<NodeSet> power_set(const std::vector<std::string>& items) {
    std::vector<NodeSet> out;
    for (const auto& c : enumerate_subsets(static_cast<int>(items.size()))) {
        NodeSet s;
        for (int i : c) s.insert(items[static_cast<std::size_t>(i)]);
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace

DsepBackend::DsepBackend(Graph g, bool include_t) : graph_(std::move(g)), include_t_(include_t) {
    if (auto v = validate_graph(graph_); !v.empty()) throw GraphError("invalid graph: " + v.front().message);
}

bool DsepBackend::invariant(const std::string& anchor, const NodeSet& z) const {
    const std::string e = free_env_id(graph_);
    const std::string& t = graph_.node(*graph_.treatment()).id;
    const NodeSet v = include_t_ ? NodeSet{t} : NodeSet{};
    const Graph augmented = attach_environment_node(graph_, anchor, v, e);
    NodeSet cond = z;
    cond.insert(t);
    return d_separated(augmented, e, graph_.node(*graph_.outcome()).id, cond);
}

CiBackend::CiBackend(const Dataset& data, std::map<std::string, EnvAssignment> envs, double p_threshold,
                     RcotParams params, Seed seed)
    : data_(data), envs_(std::move(envs)), threshold_(p_threshold), params_(params), seed_(seed) {}

bool CiBackend::invariant(const std::string& anchor, const NodeSet& z) const {
    auto it = envs_.find(anchor);
    if (it == envs_.end()) throw DatasetError("no environment assignment for anchor '" + anchor + "'");
    std::vector<CiBlock> cond;
    if (!z.empty()) {
        const std::vector<std::string> ids(z.begin(), z.end());
        cond.push_back(CiBlock::continuous(flatten(data_, ids).values));
    }
    cond.push_back(CiBlock::binary(data_.treatment));
    const Seed s = derive_seed(seed_, fnv1a(anchor + "|" + format_subset(z)));
    const auto r = ci_pvalue_rcot(CiBlock::labels(it->second.labels), CiBlock::continuous(data_.outcome), cond, params_, s);
    return r.p_value > threshold_;
}

void require_observed_parents(const Graph& g, const NodeSet& parents_of_t) {
    const std::size_t t = *g.treatment();
    if (!g.spouses(t).empty())
        throw GraphError("treatment has a hidden parent (bi-directed edge); not all parents are observed");
    NodeSet actual;
    for (std::size_t p : g.parents(t)) {
        if (!g.node(p).observed) throw GraphError("treatment parent '" + g.node(p).id + "' is unobserved");
        actual.insert(g.node(p).id);
    }
    if (actual != parents_of_t)
        throw GraphError("declared parents " + format_subset(parents_of_t) + " differ from the graph's " +
                         format_subset(actual));
}

SubsetFamily find_all_backdoors(const NodeSet& parents_of_t, const NodeSet& observed, const BackdoorBackend& backend,
                                bool check_parents) {
    for (const auto& p : parents_of_t)
        if (!observed.count(p)) throw GraphError("parent '" + p + "' is not among the observed features");
    const auto* dsep = dynamic_cast<const DsepBackend*>(&backend);
    if (dsep && check_parents) require_observed_parents(dsep->graph(), parents_of_t);

    SubsetFamily result;
    std::vector<std::string> rest;
    for (const auto& o : observed)
        if (!parents_of_t.count(o)) rest.push_back(o);
    for (NodeSet z : power_set(rest)) {
        z.insert(parents_of_t.begin(), parents_of_t.end());
        result.insert(std::move(z));
    }
    for (const auto& anchor : parents_of_t) {
        std::vector<std::string> pool;
        for (const auto& o : observed)
            if (o != anchor) pool.push_back(o);
        for (const auto& z : power_set(pool))
            if (!result.count(z) && backend.invariant(anchor, z)) result.insert(z);
    }
    return result;
}

std::string format_subset(const NodeSet& z) {
    std::string out = "{";
    bool first = true;
    for (const auto& v : z) {
        out += (first ? "" : ",") + v;
        first = false;
    }
    return out + "}";
}

}  // namespace adjset
