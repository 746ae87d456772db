#include "adjset/adjust.hpp"

#include <numeric>

namespace adjset {

Split run_split(std::size_t n, double train_fraction, Seed seed, int run) {
    return train_test_split(n, train_fraction, derive_seed(seed, static_cast<std::uint64_t>(run)));
}

double adjusted_run(const Eigen::MatrixXd& z, const Eigen::VectorXd& t, const Eigen::VectorXd& y,
                    const RowIndex& train, const RidgeParams& ridge) {
    RowIndex arm[2];
    for (Eigen::Index i : train) arm[t[i] != 0.0 ? 1 : 0].push_back(i);
    if (arm[0].empty() || arm[1].empty())
        throw DatasetError(std::string("training split has an empty ") + (arm[0].empty() ? "control" : "treated") +
                           " arm");
    const RidgeModel m1 = fit_ridge_cv(take_rows(z, arm[1]), take_rows(y, arm[1]), ridge);
    const RidgeModel m0 = fit_ridge_cv(take_rows(z, arm[0]), take_rows(y, arm[0]), ridge);
    return (m1.predict(z) - m0.predict(z)).mean();
}

AteResult ate_adjusted(const Eigen::MatrixXd& z, const Eigen::VectorXd& t, const Eigen::VectorXd& y,
                       const AdjustParams& params, Seed seed) {
    if (params.n_runs < 1) throw DatasetError("n_runs must be positive");
    const auto n = static_cast<std::size_t>(y.size());
    AteResult result;
    result.per_run.assign(static_cast<std::size_t>(params.n_runs), 0.0);
    auto one = [&](int r) {
        const Split split = run_split(n, params.train_fraction, seed, r);
        result.per_run[static_cast<std::size_t>(r)] = adjusted_run(z, t, y, split.train, params.ridge);
    };
    if (params.exec == Exec::parallel) {
        std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
        for (int r = 0; r < params.n_runs; ++r) {
            try {
                one(r);
            } catch (...) {
#pragma omp critical
                if (!failure) failure = std::current_exception();
            }
        }
        if (failure) std::rethrow_exception(failure);
    } else {
        for (int r = 0; r < params.n_runs; ++r) one(r);
    }
    result.ate = std::accumulate(result.per_run.begin(), result.per_run.end(), 0.0) / params.n_runs;
    return result;
}

AteResult ate_adjusted(const Dataset& data, const NodeSet& z, const AdjustParams& params, Seed seed) {
    for (const auto& id : z)
        if (!data.has_feature(id)) throw DatasetError("adjustment column '" + id + "' not in the dataset");
    const std::vector<std::string> ids(z.begin(), z.end());
    const ColumnTable table = flatten(data, ids);
    return ate_adjusted(table.values, data.treatment, data.outcome, params, seed);
}

}  // namespace adjset
