#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "adjset/dataset.hpp"
#include "adjset/envgen.hpp"
#include "adjset/exec.hpp"
#include "adjset/ridge.hpp"
#include "adjset/rng.hpp"

namespace adjset {

class IrmError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Second moments of one environment: S = mean x x^T, c = mean x y, s = mean y^2.
struct EnvMoments {
    Eigen::MatrixXd xx;
    Eigen::VectorXd xy;
    double yy = 0.0;
    double rows = 0.0;
    int label = 0;
};

std::vector<EnvMoments> env_moments(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::vector<int>& env);

/// Squared-error risk of the linear predictor x^T phi and its gradient.
double irm_risk(const EnvMoments& m, const Eigen::VectorXd& phi, Eigen::VectorXd* grad = nullptr);
/// (d/dw risk(w phi) at w = 1)^2 and its gradient in phi.
double irm_penalty(const EnvMoments& m, const Eigen::VectorXd& phi, Eigen::VectorXd* grad = nullptr);
/// Sum of risks plus lambda times the sum of penalties.
double irm_objective(const std::vector<EnvMoments>& envs, const Eigen::VectorXd& phi, double lambda,
                     Eigen::VectorXd* grad = nullptr);

struct IrmHyper {
    double learning_rate = 0.01;
    double lambda = 0.1;
    int iterations = 15000;
    int decay_every = 5000;
    double decay = 0.5;
};

struct IrmParams {
    std::vector<double> learning_rates{0.01, 0.001};
    std::vector<double> lambdas{0.1, 0.001};
    int iterations = 15000;
    int decay_every = 5000;
    int record_every = 100;
};

struct IrmFit {
    Eigen::VectorXd phi;
    std::vector<double> penalty_trajectory;
    IrmHyper hyper;
    std::vector<int> train_envs;
    int validation_env = -1;
    double validation_risk = 0.0;
    std::vector<std::string> columns;
};

/// Adam from phi = 0 on the training environments.
IrmFit irm_train(const std::vector<EnvMoments>& train, const IrmHyper& hyper, int record_every);

/// Standardises x and y, then fits every (learning rate, lambda, held-out
/// environment) combination and keeps the lowest validation risk.
IrmFit irmv1_fit_linear(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::vector<int>& env,
                        const IrmParams& params);

/// Exact two-cluster k-means on |phi|; indices of the higher-mean cluster.
std::vector<int> select_cluster_columns(const Eigen::VectorXd& phi);
/// Features owning at least one selected column.
NodeSet select_cluster_subset(const Eigen::VectorXd& phi, const std::vector<ColumnInfo>& columns);

enum class Arm { control = 0, treatment = 1 };

struct IrmRun {
    IrmFit fit;
    NodeSet selected;
    double ate = 0.0;
};

struct IrmResult {
    double ate = 0.0;
    std::vector<IrmRun> runs;
};

struct IrmAteParams {
    IrmParams irm;
    RidgeParams ridge;
    int n_runs = 100;
    double train_fraction = 0.8;
    Exec exec = Exec::parallel;
};

/// Per run: IRM on the training rows of one arm, cluster selection, then
/// the adjusted estimate on the selected features.
IrmResult ate_irm(const Dataset& data, const EnvAssignment& env, Arm arm, const IrmAteParams& params, Seed seed);

nlohmann::json irm_fit_to_json(const IrmFit& fit);
nlohmann::json irm_result_to_json(const IrmResult& result);

}  // namespace adjset
