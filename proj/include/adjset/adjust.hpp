#pragma once

#include <vector>

#include <Eigen/Dense>

#include "adjset/dataset.hpp"
#include "adjset/exec.hpp"
#include "adjset/ridge.hpp"
#include "adjset/rng.hpp"

namespace adjset {

struct AdjustParams {
    RidgeParams ridge;
    int n_runs = 100;
    double train_fraction = 0.8;
    Exec exec = Exec::parallel;
};

struct AteResult {
    double ate = 0.0;
    std::vector<double> per_run;
};

/// Shared split schedule: run r of every estimator uses this split.
Split run_split(std::size_t n, double train_fraction, Seed seed, int run);

/// One outcome-regression run: a ridge fit per arm on the training rows,
/// both fits averaged over every row of z.
double adjusted_run(const Eigen::MatrixXd& z, const Eigen::VectorXd& t, const Eigen::VectorXd& y,
                    const RowIndex& train, const RidgeParams& ridge);

/// Average of adjusted_run over n_runs seeded splits.
AteResult ate_adjusted(const Eigen::MatrixXd& z, const Eigen::VectorXd& t, const Eigen::VectorXd& y,
                       const AdjustParams& params, Seed seed);
AteResult ate_adjusted(const Dataset& data, const NodeSet& z, const AdjustParams& params, Seed seed);

}  // namespace adjset
