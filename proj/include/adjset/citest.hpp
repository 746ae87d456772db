#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "adjset/rng.hpp"

namespace adjset {

class CiTestError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One variable handed to a CI test. Discrete blocks hold integer codes in a
/// single column and are one-hot encoded before use.
struct CiBlock {
    Eigen::MatrixXd values;
    bool discrete = false;

    static CiBlock continuous(Eigen::MatrixXd m) { return {std::move(m), false}; }
    static CiBlock labels(const std::vector<int>& codes);
    static CiBlock binary(const Eigen::VectorXd& v) { return {v, true}; }
};

enum class NullApprox { gamma, permutation };

struct RcotParams {
    int features_ab = 5;
    int features_z = 25;
    int bandwidth_rows = 500;
    double ridge = 1e-10;
    NullApprox approx = NullApprox::gamma;
    int permutations = 500;
};

struct CiTestResult {
    double p_value = 1.0;
    double statistic = 0.0;
    std::string method;
    int features_xy = 0;
    int features_z = 0;
    Seed seed = 0;
};

nlohmann::json ci_result_to_json(const CiTestResult& r);

/// Random-Fourier-feature test of a _||_ b | cond. The result is a pure
/// function of the inputs and the seed.
CiTestResult ci_pvalue_rcot(const CiBlock& a, const CiBlock& b, const std::vector<CiBlock>& cond,
                            const RcotParams& params, Seed seed);

/// Partial-correlation test with the Fisher z transform. cond may have zero
/// columns. Requires n > cond.cols() + 3 and a full-rank [1, cond].
CiTestResult ci_pvalue_fisherz(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::MatrixXd& cond);

// Building blocks, exposed for tests.
Eigen::MatrixXd one_hot(const Eigen::VectorXd& codes);
Eigen::MatrixXd standardize_columns(const Eigen::MatrixXd& m);
double median_pairwise_distance(const Eigen::MatrixXd& m, int max_rows);
double gamma_tail(const Eigen::VectorXd& weights, double statistic);

}  // namespace adjset
