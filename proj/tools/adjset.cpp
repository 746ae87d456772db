#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "adjset/adjust.hpp"
#include "adjset/dataset_io.hpp"
#include "adjset/envgen.hpp"
#include "adjset/fixtures.hpp"
#include "adjset/graph_io.hpp"
#include "adjset/irm.hpp"
#include "adjset/json_out.hpp"
#include "adjset/oracle.hpp"
#include "adjset/scm.hpp"
#include "adjset/search.hpp"
#include "adjset/suites.hpp"

namespace fs = std::filesystem;
using namespace adjset;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kUsage = 1, kCounterexample = 2, kNoInvariant = 3 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write " + path.string());
    out << text;
    if (!out) throw UsageError("failed writing " + path.string());
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read " + path.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

NodeSet split_list(const std::string& text) {
    NodeSet out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ','))
        if (!item.empty()) out.insert(item);
    return out;
}

fs::path roles_path(const std::string& data, const std::string& roles) {
    return roles.empty() ? default_roles_path(data) : fs::path(roles);
}

struct GenArgs {
    int dim = 0;
    std::size_t n = 50000;
    Seed seed = 0;
    std::string out, scm, graph;
    bool x1y = false;
};

int cmd_gen(const GenArgs& a) {
    LinearScm scm;
    if (!a.graph.empty()) {
        scm = gen_random_scm(load_graph(a.graph), a.seed);
    } else {
        if (a.dim < 1) throw UsageError("--dim must be at least 1");
        ToyOptions to;
        to.anchor_outcome_edge = a.x1y;
        scm = gen_toy_scm(a.dim, a.seed, to);
    }
    const Dataset data = simulate(scm, a.n, derive_seed(a.seed, 1));
    save_dataset_csv(data, a.out);
    save_roles(roles_of(data), default_roles_path(a.out));
    const fs::path scm_path = a.scm.empty() ? fs::path(a.out).replace_extension(".scm.json") : fs::path(a.scm);
    write_text(scm_path, dump_json(scm_to_json(scm)) + "\n");
    std::printf("wrote %zu rows to %s; true ATE %.17g\n", data.rows(), a.out.c_str(), scm.treatment_effect());
    return kOk;
}

struct EnvArgs {
    std::string data, roles, anchor, out;
    bool no_t = false;
    int envs = 3;
    Seed seed = 0;
};

int cmd_env(const EnvArgs& a) {
    Roles roles = load_roles(roles_path(a.data, a.roles));
    Dataset data = load_dataset_csv(a.data, roles);
    const EnvAssignment env = assign_environments(data, a.anchor, !a.no_t, a.envs, a.seed);
    for (const auto& w : env.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    data = with_environment(std::move(data), env);
    const fs::path out = a.out.empty() ? fs::path(a.data) : fs::path(a.out);
    save_dataset_csv(data, out);
    roles.environment = data.environment_id;
    roles.extra["environment_assignment"] = env_to_json(env);
    save_roles(roles, a.out.empty() ? roles_path(a.data, a.roles) : default_roles_path(out));
    std::printf("assigned %d environments from %s%s\n", a.envs, a.anchor.c_str(), a.no_t ? "" : " and t");
    return kOk;
}

struct RunArgs {
    std::string data, roles, mode = "exhaustive", report, summary, scm, z;
    double pvalue = 0.1;
    int k = -1;
    int runs = 100;
    Seed seed = 0;
    bool serial = false;
};

int cmd_run(const RunArgs& a) {
    const Roles roles = load_roles(roles_path(a.data, a.roles));
    const Dataset data = load_dataset_csv(a.data, roles);
    std::optional<double> truth;
    if (!a.scm.empty()) truth = true_ate_analytic(scm_from_json(json::parse(read_text(a.scm))));
    const Exec exec = a.serial ? Exec::serial : Exec::parallel;

    auto need_env = [&] {
        if (!data.has_environment() || !roles.extra.contains("environment_assignment"))
            throw UsageError("mode " + a.mode + " needs environment labels; run `adjset env` first");
        return env_from_json(roles.extra.at("environment_assignment"), data.environment);
    };

    json report = {{"mode", a.mode}, {"seed", a.seed}, {"runs", a.runs}};
    std::string summary;
    std::optional<double> ate;
    int code = kOk;

    if (a.mode == "baseline" || a.mode == "adjust") {
        NodeSet z;
        if (a.mode == "baseline") {
            for (const auto& id : data.feature_ids()) z.insert(id);
        } else {
            z = split_list(a.z);
        }
        AdjustParams p;
        p.n_runs = a.runs;
        p.exec = exec;
        const AteResult r = ate_adjusted(data, z, p, a.seed);
        ate = r.ate;
        report["z"] = std::vector<std::string>(z.begin(), z.end());
        report["per_run_ate"] = r.per_run;
        report["status"] = "ok";
        std::ostringstream s;
        s << "run,ate\n";
        char buf[64];
        for (std::size_t i = 0; i < r.per_run.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, r.per_run[i]);
            s << buf;
        }
        summary = s.str();
    } else if (a.mode == "exhaustive" || a.mode == "sparse") {
        const EnvAssignment env = need_env();
        SearchParams p;
        p.p_threshold = a.pvalue;
        p.n_runs = a.runs;
        p.exec = exec;
        if (a.mode == "sparse") {
            if (a.k < 0) throw UsageError("sparse mode needs --k");
            p.sizes.max_size = a.k;
        }
        const AdjustmentReport r = exhaustive_ate(data, env, p, a.seed);
        report["search"] = report_to_json(r);
        report["status"] = r.status == SearchStatus::ok ? "ok" : "no_invariant_subset";
        ate = r.ate;
        summary = report_summary_csv(r);
        if (r.status == SearchStatus::no_invariant_subset) code = kNoInvariant;
    } else if (a.mode == "irm-t" || a.mode == "irm-c") {
        const EnvAssignment env = need_env();
        IrmAteParams p;
        p.n_runs = a.runs;
        p.exec = exec;
        const IrmResult r = ate_irm(data, env, a.mode == "irm-t" ? Arm::treatment : Arm::control, p, a.seed);
        report["irm"] = irm_result_to_json(r);
        report["status"] = "ok";
        ate = r.ate;
        std::ostringstream s;
        s << "run,selected,ate\n";
        char buf[64];
        for (std::size_t i = 0; i < r.runs.size(); ++i) {
            s << i << ",\"" << format_subset(r.runs[i].selected) << "\",";
            std::snprintf(buf, sizeof buf, "%.17g\n", r.runs[i].ate);
            s << buf;
        }
        summary = s.str();
    } else {
        throw UsageError("unknown mode '" + a.mode + "'");
    }

    report["ate"] = ate ? json(*ate) : json();
    if (truth) {
        report["true_ate"] = *truth;
        report["abs_error"] = ate ? json(std::abs(*ate - *truth)) : json();
    }
    if (!a.report.empty()) write_text(a.report, dump_json(report) + "\n");
    if (!a.summary.empty()) write_text(a.summary, summary);
    if (ate)
        std::printf("%s ATE %.17g%s\n", a.mode.c_str(), *ate,
                    truth ? (" (abs error " + std::to_string(std::abs(*ate - *truth)) + ")").c_str() : "");
    else
        std::printf("%s: no invariant subset found in any run\n", a.mode.c_str());
    return code;
}

struct ValidateArgs {
    int graphs = 200;
    int max_obs = 6;
    Seed seed = 0;
    std::string out;
};

int cmd_validate(const ValidateArgs& a) {
    std::vector<OracleReport> bad;
    std::size_t fixture_checks = 0;
    auto record = [&](OracleReport r) {
        fixture_checks += r.subsets_checked;
        if (!r.agree()) bad.push_back(std::move(r));
    };
    for (const auto& f : fixtures::all()) {
        const Graph g = f.build();
        if (!satisfies_sink_outcome(g)) continue;
        const std::size_t t = *g.treatment();
        for (std::size_t p : g.parents(t)) {
            if (!g.node(p).observed) continue;
            record(verify_parent_anchor(g, g.node(p).id, {}));
            record(verify_parent_anchor(g, g.node(p).id, {g.node(t).id}));
        }
        for (std::size_t s : g.spouses(t))
            if (g.node(s).role == Role::feature) record(verify_spouse_anchor(g, g.node(s).id, {g.node(t).id}));
    }
    ValidationOptions vo;
    vo.graphs = a.graphs;
    vo.max_observed = a.max_obs;
    ValidationSummary s = run_validation(vo, a.seed);
    for (auto& r : bad) s.counterexamples.push_back(std::move(r));
    std::printf("fixtures: %zu subset checks; random graphs: %d (%zu parent-anchor, %zu spouse, %zu route checks); "
                "counterexamples: %zu; route disagreements: %zu\n",
                fixture_checks, s.graphs, s.parent_checks, s.spouse_checks, s.route_checks,
                s.counterexamples.size(), s.route_failures.size());
    const bool failed = !s.counterexamples.empty() || !s.route_failures.empty();
    if (!a.out.empty()) write_text(a.out, dump_json(validation_to_json(s)) + "\n");
    return failed ? kCounterexample : kOk;
}

struct BackdoorArgs {
    std::string graph, parents, observed;
    bool brute = false;
    bool unchecked = false;
};

int cmd_backdoors(const BackdoorArgs& a) {
    const Graph g = parse_graph(read_text(a.graph));
    NodeSet parents, observed;
    const std::size_t t = *g.treatment();
    if (a.parents.empty()) {
        for (std::size_t p : g.parents(t)) parents.insert(g.node(p).id);
    } else {
        parents = split_list(a.parents);
    }
    if (a.observed.empty()) {
        for (const auto& f : g.observed_features()) observed.insert(f);
    } else {
        observed = split_list(a.observed);
    }
    const DsepBackend backend(g);
    const SubsetFamily found = find_all_backdoors(parents, observed, backend, !a.unchecked);
    for (const auto& z : found) std::printf("%s\n", format_subset(z).c_str());
    if (a.brute) {
        const SubsetFamily brute = enumerate_backdoor_sets(g);
        if (brute != found) {
            std::fprintf(stderr, "brute-force enumeration disagrees (%zu sets vs %zu)\n", brute.size(), found.size());
            return kCounterexample;
        }
        std::printf("brute-force enumeration agrees (%zu sets)\n", brute.size());
    }
    return kOk;
}

struct BenchArgs {
    std::string suite = "ate-error", out;
    int runs = 100, draws = 1;
    std::size_t n = 50000;
    Seed seed = 0;
    std::vector<int> dims{3, 5, 7}, irm_dims{15, 25, 35, 45, 55, 65};
    bool no_exhaustive = false, no_irm = false, no_t = false;
};

int cmd_bench(const BenchArgs& a) {
    SuiteOptions o;
    o.n = a.n;
    o.n_runs = a.runs;
    o.scm_draws = a.draws;
    o.dims = a.dims;
    o.irm_dims = a.irm_dims;
    o.exhaustive = !a.no_exhaustive;
    o.irm = !a.no_irm;
    o.include_t = !a.no_t;
    std::vector<SuiteRow> rows;
    if (a.suite == "ate-error")
        rows = suite_ate_error(o, a.seed);
    else if (a.suite == "success")
        rows = suite_success_probability(o, a.seed);
    else if (a.suite == "pvalues")
        rows = suite_pvalue_tables(o, a.seed);
    else
        throw UsageError("unknown suite '" + a.suite + "'");
    const std::string csv = suite_csv(rows);
    if (a.out.empty())
        std::fputs(csv.c_str(), stdout);
    else
        write_text(a.out, csv);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adjustment-set discovery by environment sub-sampling and invariance testing"};
    app.set_config("--config", "", "TOML-style key = value file; [subcommand] sections; flags win on conflict");
    app.require_subcommand(1);

    GenArgs gen;
    auto* g = app.add_subcommand("gen", "Simulate a toy (or graph-driven) linear SCM dataset");
    g->add_option("--dim", gen.dim, "d_tilde; observed dimension is 2*d_tilde+1");
    g->add_option("--n", gen.n, "Rows")->capture_default_str();
    g->add_option("--seed", gen.seed)->capture_default_str();
    g->add_option("--out", gen.out, "Dataset CSV")->required();
    g->add_option("--scm", gen.scm, "SCM JSON (default: <out> with extension .scm.json)");
    g->add_option("--graph", gen.graph, "Graph JSON for a random linear-Gaussian SCM instead of the toy model");
    g->add_flag("--x1y", gen.x1y, "Toy model with the extra x1 -> y edge");

    EnvArgs env;
    auto* e = app.add_subcommand("env", "Append sub-sampled environment labels");
    e->add_option("--data", env.data)->required();
    e->add_option("--roles", env.roles, "Roles sidecar (default: <data>.roles.json)");
    e->add_option("--anchor", env.anchor, "Scalar parent of t used as x_t")->required();
    e->add_flag("--no-t,!--with-t", env.no_t, "Leave t out of the environment softmax");
    e->add_option("--envs", env.envs)->capture_default_str();
    e->add_option("--seed", env.seed)->capture_default_str();
    e->add_option("--out", env.out, "Output CSV (default: overwrite --data)");

    RunArgs run;
    auto* r = app.add_subcommand("run", "Estimate the ATE");
    r->add_option("--data", run.data)->required();
    r->add_option("--roles", run.roles);
    r->add_option("--mode", run.mode)
        ->check(CLI::IsMember({"baseline", "adjust", "exhaustive", "sparse", "irm-t", "irm-c"}))
        ->capture_default_str();
    r->add_option("--pvalue", run.pvalue, "Acceptance threshold of the invariance test")->capture_default_str();
    r->add_option("--k", run.k, "Largest subset size in sparse mode");
    r->add_option("--z", run.z, "Comma-separated adjustment set for adjust mode");
    r->add_option("--runs", run.runs)->capture_default_str();
    r->add_option("--seed", run.seed)->capture_default_str();
    r->add_option("--report", run.report, "Report JSON");
    r->add_option("--summary", run.summary, "Summary CSV");
    r->add_option("--scm", run.scm, "SCM JSON with the ground-truth effect");
    r->add_flag("--serial", run.serial, "Run the serial reference path");

    ValidateArgs val;
    auto* v = app.add_subcommand("validate", "Check the invariance/back-door equivalence on fixtures and random graphs");
    v->add_option("--graphs", val.graphs)->capture_default_str();
    v->add_option("--max-obs", val.max_obs, "Largest observed node count, t and y included")->capture_default_str();
    v->add_option("--seed", val.seed)->capture_default_str();
    v->add_option("--out", val.out, "Write the summary and any counterexamples as JSON");

    BackdoorArgs bd;
    auto* b = app.add_subcommand("backdoors", "List every back-door set given the treatment's parents");
    b->add_option("--graph", bd.graph)->required();
    b->add_option("--parents", bd.parents, "Comma-separated parents of t (default: from the graph)");
    b->add_option("--observed", bd.observed, "Comma-separated observed features (default: all)");
    b->add_flag("--brute", bd.brute, "Also compare with brute-force enumeration");
    b->add_flag("--no-parent-check", bd.unchecked, "Run even if t has a hidden parent");

    BenchArgs bench;
    auto* s = app.add_subcommand("bench", "Run an experiment grid and emit CSV");
    s->add_option("--suite", bench.suite)->check(CLI::IsMember({"ate-error", "success", "pvalues"}))->capture_default_str();
    s->add_option("--runs", bench.runs)->capture_default_str();
    s->add_option("--draws", bench.draws, "Toy SCMs per dimension")->capture_default_str();
    s->add_option("--n", bench.n)->capture_default_str();
    s->add_option("--seed", bench.seed)->capture_default_str();
    s->add_option("--dims", bench.dims, "Observed dimensions d")->delimiter(',');
    s->add_option("--irm-dims", bench.irm_dims, "Extra IRM-only dimensions")->delimiter(',');
    s->add_flag("--no-exhaustive", bench.no_exhaustive);
    s->add_flag("--no-irm", bench.no_irm);
    s->add_flag("--no-t", bench.no_t, "Environment from the anchor only");
    s->add_option("--out", bench.out, "CSV path (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& err) {
        return app.exit(err);
    } catch (const CLI::CallForAllHelp& err) {
        return app.exit(err);
    } catch (const CLI::ParseError& err) {
        app.exit(err);
        return kUsage;
    }

    try {
        if (*g) return cmd_gen(gen);
        if (*e) return cmd_env(env);
        if (*r) return cmd_run(run);
        if (*v) return cmd_validate(val);
        if (*b) return cmd_backdoors(bd);
        if (*s) return cmd_bench(bench);
    } catch (const std::exception& err) {
        std::fprintf(stderr, "error: %s\n", err.what());
        return kUsage;
    }
    return kUsage;
}
