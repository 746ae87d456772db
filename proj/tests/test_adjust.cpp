#include <doctest.h>

#include <cmath>

#include "adjset/adjust.hpp"
#include "adjset/fixtures.hpp"
#include "adjset/graph.hpp"
#include "adjset/ridge.hpp"
#include "adjset/scm.hpp"

using namespace adjset;

namespace {

Eigen::MatrixXd randn(Eigen::Index r, Eigen::Index c, Rng& rng) {
    std::normal_distribution<double> z;
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = z(rng);
    return m;
}

Eigen::VectorXd coin(Eigen::Index n, Rng& rng) {
    std::bernoulli_distribution b(0.4);
    Eigen::VectorXd t(n);
    for (auto& v : t) v = b(rng);
    return t;
}

}  // namespace

TEST_SUITE("adjust") {

TEST_CASE("ridge: tiny alpha is least squares, intercept unpenalised") {
    Rng rng(1);
    const Eigen::MatrixXd x = randn(300, 3, rng);
    const Eigen::VectorXd beta = (Eigen::VectorXd(3) << 1.0, -2.0, 0.5).finished();
    const Eigen::VectorXd y = (x * beta).array() + 4.0 + 0.01 * randn(300, 1, rng).col(0).array();
    const RidgeModel m = fit_ridge(x, y, 1e-12);
    Eigen::MatrixXd design(300, 4);
    design << Eigen::VectorXd::Ones(300), x;
    const Eigen::VectorXd ols = design.colPivHouseholderQr().solve(y);
    CHECK(std::abs(m.intercept - ols[0]) < 1e-8);
    CHECK((m.coef - ols.tail(3)).norm() < 1e-8);

    const RidgeModel heavy = fit_ridge(x, y, 1e6);
    CHECK(heavy.coef.norm() < 1e-2);
    CHECK(heavy.intercept == doctest::Approx(y.mean()).epsilon(1e-2));

    const RidgeModel shifted = fit_ridge(x, y.array() + 10.0, 1.0);
    const RidgeModel base = fit_ridge(x, y, 1.0);
    CHECK((shifted.coef - base.coef).norm() < 1e-10);
    CHECK(shifted.intercept == doctest::Approx(base.intercept + 10.0));
    CHECK((m.predict(x) - (design * ols)).norm() < 1e-6);
}

TEST_CASE("ridge CV picks an alpha from the grid and refits") {
    Rng rng(2);
    const Eigen::MatrixXd x = randn(200, 2, rng);
    const Eigen::VectorXd y = x.col(0) + randn(200, 1, rng).col(0);
    const RidgeModel m = fit_ridge_cv(x, y);
    const RidgeParams p;
    CHECK(std::find(p.alphas.begin(), p.alphas.end(), m.alpha) != p.alphas.end());
    const RidgeModel refit = fit_ridge(x, y, m.alpha);
    CHECK(refit.coef == m.coef);
    const RidgeModel empty = fit_ridge_cv(Eigen::MatrixXd(200, 0), y);
    CHECK(empty.intercept == doctest::Approx(y.mean()));
}

TEST_CASE("run_split is a deterministic 80/20 partition") {
    const Split a = run_split(1000, 0.8, 5, 3), b = run_split(1000, 0.8, 5, 3), c = run_split(1000, 0.8, 5, 4);
    CHECK(a.train == b.train);
    CHECK(a.train != c.train);
    CHECK(a.train.size() == 800);
    CHECK(a.test.size() == 200);
    std::vector<Eigen::Index> all(a.train.begin(), a.train.end());
    all.insert(all.end(), a.test.begin(), a.test.end());
    std::sort(all.begin(), all.end());
    for (std::size_t i = 0; i < all.size(); ++i) REQUIRE(all[i] == static_cast<Eigen::Index>(i));
}

TEST_CASE("empty Z is the difference of fitted arm means") {
    Rng rng(3);
    const Eigen::VectorXd t = coin(500, rng);
    const Eigen::VectorXd y = 3.0 * t + randn(500, 1, rng).col(0);
    AdjustParams p;
    p.n_runs = 7;
    const AteResult r = ate_adjusted(Eigen::MatrixXd(500, 0), t, y, p, 11);
    for (int run = 0; run < p.n_runs; ++run) {
        const Split s = run_split(500, 0.8, 11, run);
        double s1 = 0, s0 = 0;
        int n1 = 0, n0 = 0;
        for (auto i : s.train) (t[i] == 1 ? (s1 += y[i], ++n1) : (s0 += y[i], ++n0));
        CHECK(std::abs(r.per_run[static_cast<std::size_t>(run)] - (s1 / n1 - s0 / n0)) < 1e-9);
    }
}

TEST_CASE("noiseless constant effect is recovered for any Z") {
    Rng rng(4);
    const Eigen::MatrixXd z = randn(400, 3, rng);
    const Eigen::VectorXd t = coin(400, rng);
    const Eigen::VectorXd y = 2.0 * t;
    AdjustParams p;
    p.n_runs = 5;
    for (int cols = 0; cols <= 3; ++cols) CHECK(std::abs(ate_adjusted(z.leftCols(cols), t, y, p, 1).ate - 2.0) < 1e-9);
}

TEST_CASE("column order of Z does not matter") {
    const Dataset d = simulate(gen_toy_scm(2, 6), 4000, 2);
    AdjustParams p;
    p.n_runs = 10;
    const AteResult a = ate_adjusted(d, {"x2", "x3"}, p, 4);
    const Eigen::MatrixXd x2 = d.feature("x2").values, x3 = d.feature("x3").values;
    Eigen::MatrixXd fwd(x2.rows(), 4), rev(x2.rows(), 4);
    fwd << x2, x3;
    rev << x3.col(1), x2.col(0), x3.col(0), x2.col(1);
    const AteResult b = ate_adjusted(fwd, d.treatment, d.outcome, p, 4);
    const AteResult c = ate_adjusted(rev, d.treatment, d.outcome, p, 4);
    CHECK(a.ate == b.ate);
    for (std::size_t r = 0; r < a.per_run.size(); ++r) CHECK(std::abs(c.per_run[r] - b.per_run[r]) < 1e-10);
}

TEST_CASE("serial and parallel runs are identical") {
    const Dataset d = simulate(gen_toy_scm(3, 6), 6000, 2);
    AdjustParams p;
    p.n_runs = 12;
    const AteResult par = ate_adjusted(d, {"x2"}, p, 9);
    p.exec = Exec::serial;
    const AteResult ser = ate_adjusted(d, {"x2"}, p, 9);
    CHECK(par.per_run == ser.per_run);
    CHECK(par.ate == ser.ate);
}

TEST_CASE("errors") {
    Rng rng(5);
    const Eigen::VectorXd t = Eigen::VectorXd::Zero(50);
    CHECK_THROWS_AS(ate_adjusted(Eigen::MatrixXd(50, 0), t, randn(50, 1, rng).col(0), {}, 1), DatasetError);
    const Dataset d = simulate(gen_toy_scm(1, 6), 200, 2);
    CHECK_THROWS_AS(ate_adjusted(d, {"x9"}, {}, 1), DatasetError);
    AdjustParams zero;
    zero.n_runs = 0;
    CHECK_THROWS_AS(ate_adjusted(d, {}, zero, 1), DatasetError);
}

TEST_CASE("toy SCM: back-door set is accurate, full set is biased") {
    const Graph g = fixtures::toy();
    REQUIRE(satisfies_backdoor(g, {"x2"}));
    REQUIRE_FALSE(satisfies_backdoor(g, {"x1", "x2", "x3"}));
    for (int dt : {1, 2, 3}) {
        const LinearScm scm = gen_toy_scm(dt, 100 + dt);
        const Dataset d = simulate(scm, 50000, 7);
        const double truth = true_ate_analytic(scm);
        AdjustParams p;
        const double good = std::abs(ate_adjusted(d, {"x2"}, p, 1).ate - truth);
        const double full = std::abs(ate_adjusted(d, {"x1", "x2", "x3"}, p, 1).ate - truth);
        CAPTURE(dt);
        CAPTURE(good);
        CAPTURE(full);
        CHECK(good <= 0.05);
        CHECK(full >= 2.0 * good);
    }
}

}  // TEST_SUITE
