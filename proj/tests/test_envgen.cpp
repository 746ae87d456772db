#include <doctest.h>

#include "adjset/envgen.hpp"
#include "adjset/scm.hpp"

using namespace adjset;

namespace {

Dataset scalar_data(const Eigen::VectorXd& x, Seed seed) {
    Dataset d;
    d.features.push_back({"x1", x});
    Rng rng(seed);
    std::bernoulli_distribution b(0.5);
    d.treatment.resize(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) d.treatment[i] = b(rng);
    d.outcome = Eigen::VectorXd::Zero(x.size());
    return d;
}

}  // namespace

TEST_SUITE("envgen") {

TEST_CASE("three-environment weights and labels") {
    const Dataset d = simulate(gen_toy_scm(1, 3), 20000, 4);
    const EnvAssignment env = assign_environments(d, "x1", true, 3, 11);
    REQUIRE(env.labels.size() == d.rows());
    for (int l : env.labels) REQUIRE((l >= 0 && l < 3));
    CHECK(env.anchor_weights[1] == 0.0);
    CHECK(env.treatment_weights[1] == 0.0);
    for (const Eigen::VectorXd* w : {&env.anchor_weights, &env.treatment_weights}) {
        CHECK((*w)[0] >= 1.0);
        CHECK((*w)[0] <= 2.0);
        CHECK((*w)[2] >= -2.0);
        CHECK((*w)[2] <= -1.0);
    }
    std::array<int, 3> count{};
    for (int l : env.labels) ++count[static_cast<std::size_t>(l)];
    for (int c : count) CHECK(c > 0);
    CHECK(env.anchor_mean == doctest::Approx(d.feature("x1").values.mean()));
    CHECK(env.treatment_mean == doctest::Approx(d.treatment.mean()));

    const Eigen::MatrixXd p = env.probabilities(d);
    CHECK(((p.rowwise().sum().array() - 1.0).abs() <= 1e-12).all());

    const Dataset labelled = with_environment(d, env);
    CHECK(labelled.environment == env.labels);
    CHECK(labelled.num_environments() == 3);
}

TEST_CASE("general E weights follow the linear envelope") {
    const Dataset d = simulate(gen_toy_scm(1, 3), 5000, 4);
    const EnvAssignment env = assign_environments(d, "x1", false, 5, 2);
    CHECK(env.anchor_weights.size() == 5);
    CHECK(env.treatment_weights.isZero());
    for (int k = 0; k < 5; ++k) {
        const double scale = 1.0 - 2.0 * k / 4.0;
        if (scale == 0.0) {
            CHECK(env.anchor_weights[k] == 0.0);
        } else {
            const double u = env.anchor_weights[k] / scale;
            CHECK(u >= 1.0);
            CHECK(u <= 2.0);
        }
    }
    for (int l : env.labels) REQUIRE(l < 5);
}

TEST_CASE("deterministic given inputs and seed") {
    const Dataset d = simulate(gen_toy_scm(2, 3), 8000, 4);
    const EnvAssignment a = assign_environments(d, "x1", true, 3, 5);
    const EnvAssignment b = assign_environments(d, "x1", true, 3, 5);
    const EnvAssignment c = assign_environments(d, "x1", true, 3, 6);
    CHECK(a.labels == b.labels);
    CHECK(a.anchor_weights == b.anchor_weights);
    CHECK(a.labels != c.labels);
}

TEST_CASE("constant anchor at its mean gives uniform probabilities") {
    const Dataset d = scalar_data(Eigen::VectorXd::Constant(300, 2.5), 1);
    const EnvAssignment env = assign_environments(d, "x1", false, 3, 5);
    const Eigen::MatrixXd p = env.probabilities(d);
    CHECK((p.array() == 1.0 / 3.0).all());
}

TEST_CASE("errors and warnings") {
    const Dataset d = simulate(gen_toy_scm(2, 3), 500, 4);
    CHECK_THROWS_AS(assign_environments(d, "x2", true, 3, 1), DatasetError);  // two columns
    CHECK_THROWS_AS(assign_environments(d, "nope", true, 3, 1), DatasetError);
    CHECK_THROWS_AS(assign_environments(d, "x1", true, 1, 1), DatasetError);

    // a very spread anchor leaves the zero-weight middle environment nearly empty
    Rng rng(3);
    std::normal_distribution<double> z(0.0, 1000.0);
    Eigen::VectorXd x(5000);
    for (auto& v : x) v = z(rng);
    const EnvAssignment env = assign_environments(scalar_data(x, 2), "x1", false, 3, 1);
    CHECK_FALSE(env.warnings.empty());
    CHECK(env.warnings.front().find("environment 1") != std::string::npos);
}

TEST_CASE("anchor mean is higher in the first environment than the last") {
    int ok = 0;
    for (Seed s = 0; s < 30; ++s) {
        const Dataset d = simulate(gen_toy_scm(1, s), 50000, s);
        const EnvAssignment env = assign_environments(d, "x1", true, 3, s);
        const Eigen::VectorXd x = d.feature("x1").values.col(0);
        double sum0 = 0, sum2 = 0;
        int n0 = 0, n2 = 0;
        for (std::size_t i = 0; i < env.labels.size(); ++i) {
            if (env.labels[i] == 0) sum0 += x[static_cast<Eigen::Index>(i)], ++n0;
            if (env.labels[i] == 2) sum2 += x[static_cast<Eigen::Index>(i)], ++n2;
        }
        ok += sum0 / n0 > sum2 / n2;
    }
    CHECK(ok == 30);
}

}  // TEST_SUITE
