#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "adjset/dataset.hpp"
#include "adjset/rng.hpp"

namespace adjset {

/// Synthetic environment labels drawn from
///     P(e = k) = softmax_k( a_k (x_t - mean x_t) + b_k (t - mean t) )
/// with the treatment term present only when include_t is set.
struct EnvAssignment {
    std::vector<int> labels;
    int num_envs = 0;
    std::string anchor;
    bool include_t = true;
    Eigen::VectorXd anchor_weights;     // a_k
    Eigen::VectorXd treatment_weights;  // b_k; zero when include_t is false
    double anchor_mean = 0.0;
    double treatment_mean = 0.0;
    Seed seed = 0;
    std::vector<std::string> warnings;

    /// Row-wise softmax probabilities (n x num_envs) for the given data.
    Eigen::MatrixXd probabilities(const Dataset& data) const;
};

/// Environments smaller than this share of the rows raise a warning.
inline constexpr double kMinEnvFraction = 0.02;

/// Env k weight is Uniform(1,2) * (1 - 2k/(E-1)): positive, zero in the
/// middle for odd E, negative for the last environment.
EnvAssignment assign_environments(const Dataset& data, const std::string& anchor, bool include_t, int num_envs,
                                  Seed seed);

/// Copy of data with the labels attached.
Dataset with_environment(Dataset data, const EnvAssignment& env);

nlohmann::json env_to_json(const EnvAssignment& env);
/// Inverse of env_to_json; labels come separately (the dataset's e column).
EnvAssignment env_from_json(const nlohmann::json& j, std::vector<int> labels);

}  // namespace adjset
