#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "adjset/dataset.hpp"
#include "adjset/exec.hpp"
#include "adjset/graph.hpp"
#include "adjset/rng.hpp"

namespace adjset {

struct NoiseSpec {
    enum class Kind { uniform, gaussian };
    Kind kind = Kind::gaussian;
    double a = 0.0;  // uniform: lower bound; gaussian: mean
    double b = 0.0;  // uniform: upper bound; gaussian: variance

    static NoiseSpec uniform(double lo, double hi) { return {Kind::uniform, lo, hi}; }
    static NoiseSpec gaussian(double mean, double variance) { return {Kind::gaussian, mean, variance}; }
    double mean() const { return kind == Kind::uniform ? 0.5 * (a + b) : a; }
    double variance() const { return kind == Kind::uniform ? (b - a) * (b - a) / 12.0 : b; }
};

/// Linear structural causal model on a DAG without bi-directed edges.
///
/// Every node v other than the treatment is
///     v = noise_v + sum_{p in pa(v)} W_{p->v} p
/// with a dense (dim_v x dim_p) block per edge. The treatment is Bernoulli
/// with logit  intercept + sum_p W_{p->t} (p - E[p]),  i.e. the parents enter
/// centred at their population means. The outcome's coefficient on t is the
/// scalar treatment effect.
struct LinearScm {
    Graph graph;
    std::vector<int> dims;
    std::vector<Eigen::MatrixXd> weights;  // aligned with graph.directed()
    std::vector<NoiseSpec> noise;          // per node; unused for the treatment
    std::vector<Eigen::VectorXd> means;    // analytic E[v]; empty for t and y
    double treatment_intercept = 0.0;
    Seed seed = 0;
    std::string generator;
    int d_tilde = 0;

    const Eigen::MatrixXd& weight(std::string_view from, std::string_view to) const;
    Eigen::MatrixXd& weight(std::string_view from, std::string_view to);
    double treatment_effect() const;
};

struct ToyOptions {
    double noise_variance = 0.01;
    NoiseSpec latent = NoiseSpec::uniform(1.0, 2.0);
    bool anchor_outcome_edge = false;  // adds x1 -> y
    double weight_lo = 1.0;
    double weight_hi = 2.0;
};

struct RandomScmOptions {
    double noise_variance = 0.01;
    NoiseSpec latent = NoiseSpec::gaussian(0.0, 1.0);
    double weight_lo = 1.0;
    double weight_hi = 2.0;
};

/// Retries weight draws until both treatment arms hold at least this share
/// of a pilot sample.
inline constexpr double kMinArmFraction = 0.01;

/// Toy model over x1 (scalar), x2, x3 (d_tilde each) with hidden u1 (scalar)
/// and u2, u3, u4 (d_tilde each). Observed dimension is 2 * d_tilde + 1.
LinearScm gen_toy_scm(int d_tilde, Seed seed, const ToyOptions& options = {});

/// Linear-Gaussian SCM over latent_expansion(g) with scalar nodes.
LinearScm gen_random_scm(const Graph& g, Seed seed, const RandomScmOptions& options = {});

struct SimulateOptions {
    std::optional<int> intervention;  // do(t = value)
    bool keep_latents = false;
    Exec exec = Exec::parallel;
    std::size_t chunk_rows = 8192;  // part of the reproducibility contract
};

/// n iid rows in topological order. Row chunks draw from independent seeded
/// streams, so the output depends on (seed, chunk_rows) but not on threads.
Dataset simulate(const LinearScm& scm, std::size_t n, Seed seed, const SimulateOptions& options = {});

double treated_fraction(const LinearScm& scm, std::size_t n, Seed seed);

/// Coefficient of t in the outcome equation. Throws when t has a child other
/// than the outcome, since then the effect is not the direct coefficient.
double true_ate_analytic(const LinearScm& scm);

struct AteEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

/// Mean outcome difference between do(t=1) and do(t=0), m draws each.
AteEstimate true_ate_monte_carlo(const LinearScm& scm, std::size_t m, Seed seed);

nlohmann::json scm_to_json(const LinearScm& scm);
LinearScm scm_from_json(const nlohmann::json& j);

}  // namespace adjset
