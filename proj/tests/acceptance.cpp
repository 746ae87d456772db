// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "adjset/adjust.hpp"
#include "adjset/citest.hpp"
#include "adjset/envgen.hpp"
#include "adjset/fixtures.hpp"
#include "adjset/irm.hpp"
#include "adjset/oracle.hpp"
#include "adjset/scm.hpp"
#include "adjset/search.hpp"
#include "adjset/suites.hpp"

using namespace adjset;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

int failures = 0;

void report(const char* id, bool ok, const std::string& detail) {
    std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
    std::fflush(stdout);
    failures += !ok;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

void criterion1() {
    const auto start = Clock::now();
    std::size_t bad = 0, checked = 0;
    auto record = [&](const OracleReport& r) {
        checked += r.subsets_checked;
        bad += r.mismatches.size();
    };
    for (const NodeSet& v : {NodeSet{}, NodeSet{"t"}}) {
        record(verify_parent_anchor(fixtures::toy(), "x1", v));
        record(verify_parent_anchor(fixtures::toy_latent(), "x1", v));
        record(verify_parent_anchor(fixtures::toy_x1y(), "x1", v));
        record(verify_parent_anchor(fixtures::backdoor_demo(), "x1", v));
        record(verify_parent_anchor(fixtures::backdoor_demo(), "x2", v));
    }
    ValidationOptions o;
    o.graphs = 200;
    o.max_observed = 6;
    const ValidationSummary s = run_validation(o, 2024);
    const double secs = seconds_since(start);
    const bool ok = bad == 0 && s.counterexamples.empty() && s.route_failures.empty() && s.graphs >= 200 && secs < 60;
    report("C1", ok,
           fmt("parent anchor: %zu fixture mismatches over %zu subsets; %d random graphs, %zu counterexamples over %zu "
               "checks, %zu route failures; %.1f s (limit 60 s)",
               bad, checked, s.graphs, s.counterexamples.size(), s.parent_checks, s.route_failures.size(), secs));
}

void criterion2() {
    const OracleReport bi = verify_spouse_anchor(fixtures::bi(), "x1", {"t"});
    RandomGraphOptions o;
    o.require_spouse_anchor = true;
    int graphs = 0;
    std::size_t violations = 0, checks = 0;
    for (Seed s = 0; graphs < 200; ++s) {
        o.n_observed = 3 + static_cast<int>(s % 4);
        const Graph g = random_sink_outcome_graph(o, derive_seed(777, s));
        for (std::size_t sp : g.spouses(*g.treatment()))
            if (g.node(sp).role == Role::feature) {
                const OracleReport r = verify_spouse_anchor(g, g.node(sp).id, {"t"});
                violations += r.mismatches.size();
                checks += r.subsets_checked;
            }
        ++graphs;
    }
    report("C2", bi.agree() && violations == 0,
           fmt("spouse anchor on the bi-directed toy graph: %zu violations over %zu subsets; %d random graphs: %zu "
               "violations over %zu subsets",
               bi.mismatches.size(), bi.subsets_checked, graphs, violations, checks));
}

void criterion3() {
    const std::set<NodeSet> expected{{"x3"},           {"x1", "x3"},       {"x2", "x3"},           {"x1", "x2"},
                                     {"x1", "x2", "x3"}, {"x1", "x2", "x4"}, {"x1", "x2", "x3", "x4"}};
    const NodeSet obs{"x1", "x2", "x3", "x4"};
    const auto bd = find_all_backdoors({"x1", "x2"}, obs, DsepBackend(fixtures::backdoor_demo()));
    const bool bd_ok = bd == expected && enumerate_backdoor_sets(fixtures::backdoor_demo()) == expected;

    // M-bias: t has only a hidden parent. The checked search refuses; the
    // unchecked one returns every superset of the empty parent set.
    bool m_refused = false;
    try {
        find_all_backdoors({}, {"x1"}, DsepBackend(fixtures::m_bias()));
    } catch (const GraphError&) {
        m_refused = true;
    }
    const auto m_unchecked = find_all_backdoors({}, {"x1"}, DsepBackend(fixtures::m_bias()), false);
    const auto m_brute = enumerate_backdoor_sets(fixtures::m_bias());
    const bool m_ok = m_refused && m_brute == SubsetFamily{{}};

    // Brute force against both back-door routes on every fixture, and against
    // the search wherever every parent of t is observed.
    int agree = 0, total = 0, searched = 0;
    for (const auto& f : fixtures::all()) {
        const Graph g = f.build();
        ++total;
        bool same = backdoor_route_disagreements(g).empty();
        NodeSet parents, observed;
        for (std::size_t p : g.parents(*g.treatment())) parents.insert(g.node(p).id);
        for (const auto& x : g.observed_features()) observed.insert(x);
        try {
            require_observed_parents(g, parents);
        } catch (const GraphError&) {
            agree += same;
            continue;
        }
        ++searched;
        same = same && find_all_backdoors(parents, observed, DsepBackend(g)) == enumerate_backdoor_sets(g);
        agree += same;
    }
    std::string m_desc;
    for (const auto& z : m_unchecked) m_desc += format_subset(z);
    report("C3", bd_ok && m_ok && agree == total,
           fmt("backdoor graph: %zu sets (expected 7, %s); M-bias: refused=%s, brute force {%zu set(s)}, unchecked "
               "search %s; brute force agrees on %d/%d fixtures (%d searchable)",
               bd.size(), bd == expected ? "exact" : "mismatch", m_refused ? "yes" : "no", m_brute.size(),
               m_desc.c_str(), agree, total, searched));
}

void criterion4() {
    const auto start = Clock::now();
    SuiteOptions o;
    o.n = 50000;
    o.n_runs = 20;
    o.dims = {3, 5, 7};
    o.exhaustive = false;
    o.irm = false;
    const auto rows = suite_ate_error(o, 4);
    const double secs = seconds_since(start);
    bool ok = secs < 600;
    std::string detail;
    for (int d : o.dims) {
        const double e2 = find_row(rows, "adjust", d, "{x2}").mean;
        const double e12 = find_row(rows, "adjust", d, "{x1,x2}").mean;
        const double e23 = find_row(rows, "adjust", d, "{x2,x3}").mean;
        const double e123 = find_row(rows, "adjust", d, "{x1,x2,x3}").mean;
        ok = ok && e2 < 0.05 && e12 < 0.05 && e23 > 2 * e2 && e123 > 2 * e2;
        detail += fmt("d=%d {x2}=%.4f {x1,x2}=%.4f {x2,x3}=%.4f {x1,x2,x3}=%.4f; ", d, e2, e12, e23, e123);
    }
    report("C4", ok, detail + fmt("%.1f s (limit 600 s)", secs));
}

void criterion5() {
    SuiteOptions o;
    o.n = 50000;
    o.n_runs = 20;
    o.dims = {3, 5, 7};
    const auto rows = suite_pvalue_tables(o, 5);
    bool ok = true;
    std::string detail;
    for (int d : o.dims) {
        const double p0 = find_row(rows, "rcot", d, "{}", std::nullopt, "toy").mean;
        const double p3 = find_row(rows, "rcot", d, "{x3}", std::nullopt, "toy").mean;
        ok = ok && p0 < 1e-6 && p3 < 1e-6;
        detail += fmt("d=%d p({})=%.3g p({x3})=%.3g p({x2})=%.3g; ", d, p0, p3,
                      find_row(rows, "rcot", d, "{x2}", std::nullopt, "toy").mean);
    }
    SuiteOptions s = o;
    s.dims = {3};
    s.thresholds = {0.1};
    const double acc = find_row(suite_success_probability(s, 5), "rcot", 3, "{x2}", 0.1).mean;
    ok = ok && acc > 0.5;
    report("C5", ok, detail + fmt("acceptance of {x2} at 0.1, d=3: %.2f (need > 0.5)", acc));
}

void criterion6() {
    const auto start = Clock::now();
    IrmAteParams p;
    p.n_runs = 100;
    bool ok = true;
    std::string detail;
    double err7 = 0.0, err65 = 0.0;
    for (int d : {3, 5, 7, 15, 25, 35, 45, 55, 65}) {
        const Seed seed = derive_seed(6, static_cast<std::uint64_t>(d));
        const LinearScm scm = gen_toy_scm((d - 1) / 2, derive_seed(seed, 0));
        Dataset data = simulate(scm, 50000, derive_seed(seed, 1));
        const EnvAssignment env = assign_environments(data, "x1", true, 3, derive_seed(seed, 2));
        data = with_environment(std::move(data), env);
        const IrmResult r = ate_irm(data, env, Arm::treatment, p, derive_seed(seed, 3));
        const double truth = true_ate_analytic(scm);
        int exact = 0;
        double err = 0.0;
        for (const auto& run : r.runs) {
            exact += run.selected == NodeSet{"x2"};
            err += std::abs(run.ate - truth);
        }
        err /= static_cast<double>(r.runs.size());
        if (d <= 7) {
            ok = ok && exact >= 90;
            detail += fmt("d=%d {x2} in %d/100, ", d, exact);
        }
        if (d == 7) err7 = err;
        if (d == 65) err65 = err;
        std::printf("  irm-t d=%d selected {x2} in %d/100 runs, mean |error| %.4f\n", d, exact, err);
        std::fflush(stdout);
    }
    const double secs = seconds_since(start);
    ok = ok && err65 <= 2 * err7 && secs < 1800;
    report("C6", ok,
           detail + fmt("irm-t error d=7 %.4f, d=65 %.4f (ratio %.2f, limit 2); %.1f s (limit 1800 s)", err7, err65,
                        err65 / err7, secs));
}

// Largest relative error of an analytic gradient against central differences.
double gradient_error(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& phi,
                      const Eigen::VectorXd& grad) {
    double worst = 0.0;
    for (Eigen::Index k = 0; k < phi.size(); ++k) {
        const double h = 1e-5 * std::max(1.0, std::abs(phi[k]));
        Eigen::VectorXd up = phi, dn = phi;
        up[k] += h;
        dn[k] -= h;
        const double fd = (f(up) - f(dn)) / (2 * h);
        worst = std::max(worst, std::abs(fd - grad[k]) / std::max(1.0, std::abs(grad[k])));
    }
    return worst;
}

Eigen::VectorXd normals(Eigen::Index n, Rng& rng) {
    std::normal_distribution<double> z;
    Eigen::VectorXd v(n);
    for (auto& x : v) x = z(rng);
    return v;
}

void criterion7() {
    double worst = 0.0;
    for (Seed s = 0; s < 50; ++s) {
        Rng rng(derive_seed(70, s));
        std::uniform_int_distribution<int> cols(1, 10), rows(20, 200);
        const int p = cols(rng), n = rows(rng);
        Eigen::MatrixXd x(n, p);
        for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normals(1, rng)[0];
        const Eigen::VectorXd y = x.col(0) + normals(n, rng);
        std::vector<int> env(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) env[static_cast<std::size_t>(i)] = i % 3;
        const auto envs = env_moments(x, y, env);
        const Eigen::VectorXd phi = normals(p, rng);
        Eigen::VectorXd g;
        for (const auto& m : envs) {
            irm_risk(m, phi, &g);
            worst = std::max(worst, gradient_error([&](const Eigen::VectorXd& v) { return irm_risk(m, v); }, phi, g));
            irm_penalty(m, phi, &g);
            worst = std::max(worst, gradient_error([&](const Eigen::VectorXd& v) { return irm_penalty(m, v); }, phi, g));
        }
        irm_objective(envs, phi, 0.3, &g);
        worst = std::max(
            worst, gradient_error([&](const Eigen::VectorXd& v) { return irm_objective(envs, v, 0.3); }, phi, g));
    }

    // a = w z + noise, b = v z + noise: a and b are independent given z.
    const int trials = 1000;
    int fz05 = 0, fz10 = 0, rc05 = 0, rc10 = 0;
    for (int s = 0; s < trials; ++s) {
        Rng rng(derive_seed(71, static_cast<std::uint64_t>(s)));
        std::uniform_real_distribution<double> w(-2.0, 2.0);
        const Eigen::VectorXd z = normals(500, rng);
        const Eigen::VectorXd a = w(rng) * z + normals(500, rng);
        const Eigen::VectorXd b = w(rng) * z + normals(500, rng);
        const double pf = ci_pvalue_fisherz(a, b, z).p_value;
        const double pr = ci_pvalue_rcot(CiBlock::continuous(a), CiBlock::continuous(b), {CiBlock::continuous(z)}, {},
                                         derive_seed(72, static_cast<std::uint64_t>(s)))
                              .p_value;
        fz05 += pf < 0.05;
        fz10 += pf < 0.1;
        rc05 += pr < 0.05;
        rc10 += pr < 0.1;
    }
    auto rate = [&](int c) { return static_cast<double>(c) / trials; };
    auto near = [&](int c, double alpha) { return std::abs(rate(c) - alpha) <= 0.02; };
    const bool ok = worst < 1e-5 && near(fz05, 0.05) && near(fz10, 0.1) && near(rc05, 0.05) && near(rc10, 0.1);
    report("C7", ok,
           fmt("max relative gradient error %.2e (limit 1e-5); H0 rejection at 0.05/0.10: fisherz %.3f/%.3f, rcot "
               "%.3f/%.3f (tolerance 0.02)",
               worst, rate(fz05), rate(fz10), rate(rc05), rate(rc10)));
}

void criterion8() {
    int cases = 0, good = 0;
    std::size_t sets_total = 0;
    double worst = 0.0;
    AdjustParams p;
    p.n_runs = 20;
    for (Seed s = 0; cases < 20; ++s) {
        RandomGraphOptions o;
        o.n_observed = 5 + static_cast<int>(s % 2);
        const Graph g = random_sink_outcome_graph(o, derive_seed(80, s));
        const SubsetFamily family = enumerate_backdoor_sets(g);
        if (family.empty()) continue;
        const LinearScm scm = gen_random_scm(g, derive_seed(81, s));
        const Dataset data = simulate(scm, 50000, derive_seed(82, s));
        const double truth = true_ate_analytic(scm);
        bool all_close = true;
        for (const NodeSet& z : family) {
            const double err = std::abs(ate_adjusted(data, z, p, derive_seed(83, s)).ate - truth);
            worst = std::max(worst, err);
            all_close = all_close && err <= 0.05;
            ++sets_total;
        }
        good += all_close;
        ++cases;
    }
    report("C8", good >= 18,
           fmt("%d/%d random SCMs with every back-door set (%zu in total) within 0.05 of the true ATE (need 18); "
               "worst error %.4f",
               good, cases, sets_total, worst));
}

}  // namespace

int main() {
    criterion1();
    criterion2();
    criterion3();
    criterion7();
    criterion8();
    criterion4();
    criterion5();
    criterion6();
    std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
