#include "adjset/suites.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "adjset/adjust.hpp"
#include "adjset/envgen.hpp"
#include "adjset/irm.hpp"
#include "adjset/scm.hpp"
#include "adjset/search.hpp"

namespace adjset {

namespace {

struct Accumulator {
    double sum = 0.0, sq = 0.0;
    int count = 0;
    void add(double v) {
        sum += v;
        sq += v * v;
        ++count;
    }
    double mean() const { return count ? sum / count : 0.0; }
    double stderr_() const {
        if (count < 2) return 0.0;
        const double m = mean();
        return std::sqrt(std::max(0.0, (sq - count * m * m) / (count - 1)) / count);
    }
};

SuiteRow make_row(const std::string& suite, const std::string& graph, const std::string& method, int d,
                  std::optional<double> threshold, const std::string& subset, const Accumulator& acc) {
    return {suite, graph, method, d, threshold, subset, acc.mean(), acc.stderr_(), acc.count};
}

int d_tilde_of(int d) {
    if (d < 3 || d % 2 == 0) throw std::invalid_argument("toy dimension d must be odd and at least 3");
    return (d - 1) / 2;
}

struct ToyInstance {
    LinearScm scm;
    Dataset data;
    EnvAssignment env;
    double truth = 0.0;
};

ToyInstance toy_instance(int d, int draw, const SuiteOptions& options, Seed seed, bool anchor_outcome_edge = false) {
    ToyOptions to;
    to.anchor_outcome_edge = anchor_outcome_edge;
    ToyInstance inst;
    const auto stream = static_cast<std::uint64_t>(d) * 1000 + static_cast<std::uint64_t>(draw);
    inst.scm = gen_toy_scm(d_tilde_of(d), derive_seed(seed, stream, 0), to);
    SimulateOptions so;
    so.exec = options.exec;
    inst.data = simulate(inst.scm, options.n, derive_seed(seed, stream, 1), so);
    inst.env = assign_environments(inst.data, "x1", options.include_t, 3, derive_seed(seed, stream, 2));
    inst.data = with_environment(std::move(inst.data), inst.env);
    inst.truth = true_ate_analytic(inst.scm);
    return inst;
}

Seed run_seed(Seed seed, int d, int draw) {
    return derive_seed(seed, static_cast<std::uint64_t>(d) * 1000 + static_cast<std::uint64_t>(draw), 3);
}

std::vector<int> block_columns(const ColumnTable& table, const NodeSet& owners) { return table.columns_of(owners); }

}  // namespace

std::vector<SuiteRow> suite_ate_error(const SuiteOptions& options, Seed seed) {
    std::vector<SuiteRow> rows;
    const std::vector<std::pair<std::string, NodeSet>> fixed = {
        {"{x2}", {"x2"}}, {"{x1,x2}", {"x1", "x2"}}, {"{x2,x3}", {"x2", "x3"}}, {"{x1,x2,x3}", {"x1", "x2", "x3"}}};
    IrmAteParams irm;
    irm.n_runs = options.n_runs;
    irm.irm.iterations = options.irm_iterations;
    irm.exec = options.exec;
    AdjustParams adj;
    adj.n_runs = options.n_runs;
    adj.exec = options.exec;

    auto irm_rows = [&](int d, std::vector<ToyInstance>& insts) {
        for (Arm arm : {Arm::treatment, Arm::control}) {
            Accumulator acc;
            for (std::size_t k = 0; k < insts.size(); ++k) {
                const auto res = ate_irm(insts[k].data, insts[k].env, arm, irm, run_seed(seed, d, static_cast<int>(k)));
                for (const auto& r : res.runs) acc.add(std::abs(r.ate - insts[k].truth));
            }
            rows.push_back(make_row("ate-error", "toy", arm == Arm::treatment ? "irm-t" : "irm-c", d, std::nullopt, "", acc));
        }
    };

    for (int d : options.dims) {
        std::vector<ToyInstance> insts;
        for (int k = 0; k < options.scm_draws; ++k) insts.push_back(toy_instance(d, k, options, seed));
        if (options.fixed_sets) {
            for (const auto& [label, z] : fixed) {
                Accumulator acc;
                for (std::size_t k = 0; k < insts.size(); ++k) {
                    const auto res = ate_adjusted(insts[k].data, z, adj, run_seed(seed, d, static_cast<int>(k)));
                    for (double v : res.per_run) acc.add(std::abs(v - insts[k].truth));
                }
                rows.push_back(make_row("ate-error", "toy", "adjust", d, std::nullopt, label, acc));
                if (label == "{x1,x2,x3}") rows.push_back(make_row("ate-error", "toy", "baseline", d, std::nullopt, label, acc));
            }
        }
        if (options.exhaustive) {
            SearchParams sp;
            sp.n_runs = options.n_runs;
            sp.rcot = options.rcot;
            sp.exec = options.exec;
            std::vector<Accumulator> accs(options.thresholds.size());
            for (std::size_t k = 0; k < insts.size(); ++k) {
                const auto reports = exhaustive_ate_thresholds(insts[k].data, insts[k].env, sp, options.thresholds,
                                                               run_seed(seed, d, static_cast<int>(k)));
                for (std::size_t j = 0; j < reports.size(); ++j)
                    for (const auto& a : reports[j].per_run_ate)
                        if (a) accs[j].add(std::abs(*a - insts[k].truth));
            }
            for (std::size_t j = 0; j < accs.size(); ++j)
                rows.push_back(make_row("ate-error", "toy", "exhaustive", d, options.thresholds[j], "", accs[j]));
        }
        if (options.irm) irm_rows(d, insts);
    }
    if (options.irm)
        for (int d : options.irm_dims) {
            std::vector<ToyInstance> insts;
            for (int k = 0; k < options.scm_draws; ++k) insts.push_back(toy_instance(d, k, options, seed));
            irm_rows(d, insts);
        }
    return rows;
}

std::vector<SuiteRow> suite_success_probability(const SuiteOptions& options, Seed seed) {
    std::vector<SuiteRow> rows;
    for (int d : options.dims) {
        std::vector<Accumulator> accs(options.thresholds.size());
        for (int k = 0; k < options.scm_draws; ++k) {
            const ToyInstance inst = toy_instance(d, k, options, seed);
            const ColumnTable table = flatten_except(inst.data, NodeSet{"x1"});
            const RcotTester tester(table, inst.data.treatment, inst.data.outcome, inst.env.labels, options.rcot);
            const auto cols = block_columns(table, {"x2"});
            const Seed rs = run_seed(seed, d, k);
            std::vector<double> p(static_cast<std::size_t>(options.n_runs));
            auto one = [&](int r) {
                const Split split = run_split(inst.data.rows(), 0.8, rs, r);
                p[static_cast<std::size_t>(r)] = tester.p_value(cols, split.train, derive_seed(rs, 0x5eedc1u, static_cast<std::uint64_t>(r)));
            };
            if (options.exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
                for (int r = 0; r < options.n_runs; ++r) one(r);
            } else {
                for (int r = 0; r < options.n_runs; ++r) one(r);
            }
            for (std::size_t j = 0; j < options.thresholds.size(); ++j)
                for (double v : p) accs[j].add(v > options.thresholds[j] ? 1.0 : 0.0);
        }
        for (std::size_t j = 0; j < accs.size(); ++j)
            rows.push_back(make_row("success", "toy", "rcot", d, options.thresholds[j], "{x2}", accs[j]));
    }
    return rows;
}

std::vector<SuiteRow> suite_pvalue_tables(const SuiteOptions& options, Seed seed) {
    std::vector<SuiteRow> rows;
    const std::vector<std::pair<std::string, NodeSet>> sets = {
        {"{}", {}}, {"{x2}", {"x2"}}, {"{x3}", {"x3"}}, {"{x2,x3}", {"x2", "x3"}}};
    for (bool modified : {false, true}) {
        const std::string graph = modified ? "toy_x1y" : "toy";
        const Seed gseed = derive_seed(seed, modified ? 1 : 0);
        for (int d : options.dims) {
            std::vector<Accumulator> accs(sets.size());
            for (int k = 0; k < options.scm_draws; ++k) {
                const ToyInstance inst = toy_instance(d, k, options, gseed, modified);
                const ColumnTable table = flatten_except(inst.data, NodeSet{"x1"});
                const RcotTester tester(table, inst.data.treatment, inst.data.outcome, inst.env.labels, options.rcot);
                const Seed rs = run_seed(gseed, d, k);
                std::vector<double> p(static_cast<std::size_t>(options.n_runs) * sets.size());
                auto one = [&](int r) {
                    const Split split = run_split(inst.data.rows(), 0.8, rs, r);
                    for (std::size_t s = 0; s < sets.size(); ++s)
                        p[static_cast<std::size_t>(r) * sets.size() + s] =
                            tester.p_value(block_columns(table, sets[s].second), split.train,
                                           derive_seed(rs, static_cast<std::uint64_t>(r), s));
                };
                if (options.exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
                    for (int r = 0; r < options.n_runs; ++r) one(r);
                } else {
                    for (int r = 0; r < options.n_runs; ++r) one(r);
                }
                for (int r = 0; r < options.n_runs; ++r)
                    for (std::size_t s = 0; s < sets.size(); ++s)
                        accs[s].add(p[static_cast<std::size_t>(r) * sets.size() + s]);
            }
            for (std::size_t s = 0; s < sets.size(); ++s)
                rows.push_back(make_row("pvalues", graph, "rcot", d, std::nullopt, sets[s].first, accs[s]));
        }
    }
    return rows;
}

std::string suite_csv(const std::vector<SuiteRow>& rows) {
    std::ostringstream out;
    out << "suite,graph,method,d,threshold,subset,mean,stderr,count\n";
    char buf[96];
    for (const auto& r : rows) {
        out << r.suite << ',' << r.graph << ',' << r.method << ',' << r.d << ',';
        if (r.threshold) {
            std::snprintf(buf, sizeof buf, "%.17g", *r.threshold);
            out << buf;
        }
        out << ",\"" << r.subset << "\",";
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d", r.mean, r.stderr_, r.count);
        out << buf << '\n';
    }
    return out.str();
}

const SuiteRow& find_row(const std::vector<SuiteRow>& rows, const std::string& method, int d, const std::string& subset,
                         std::optional<double> threshold, const std::string& graph) {
    for (const auto& r : rows) {
        if (r.method != method || r.d != d || r.subset != subset) continue;
        if (!graph.empty() && r.graph != graph) continue;
        if (threshold && (!r.threshold || std::abs(*r.threshold - *threshold) > 1e-12)) continue;
        return r;
    }
    throw std::out_of_range("no suite row for method " + method + " d=" + std::to_string(d) + " subset " + subset);
}

}  // namespace adjset
