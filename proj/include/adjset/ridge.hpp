#pragma once

#include <vector>

#include <Eigen/Dense>

namespace adjset {

struct RidgeParams {
    std::vector<double> alphas{0.001, 0.01, 0.1, 1.0};
    int folds = 5;
};

/// y ~ intercept + X coef, with the intercept left unpenalised.
struct RidgeModel {
    Eigen::VectorXd coef;
    double intercept = 0.0;
    double alpha = 0.0;

    Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;
};

RidgeModel fit_ridge(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double alpha);

/// Chooses alpha by K-fold cross-validated squared error over contiguous
/// folds (the first minimum in list order wins), then refits on all rows.
RidgeModel fit_ridge_cv(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const RidgeParams& params = {});

}  // namespace adjset
