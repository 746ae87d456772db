#include "adjset/ridge.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace adjset {

namespace {

struct Moments {
    double count = 0.0;
    Eigen::VectorXd sx;
    double sy = 0.0;
    Eigen::MatrixXd xx;
    Eigen::VectorXd xy;

    explicit Moments(Eigen::Index p) : sx(Eigen::VectorXd::Zero(p)), xx(Eigen::MatrixXd::Zero(p, p)), xy(Eigen::VectorXd::Zero(p)) {}

    Moments& operator-=(const Moments& o) {
        count -= o.count;
        sx -= o.sx;
        sy -= o.sy;
        xx -= o.xx;
        xy -= o.xy;
        return *this;
    }
};

Moments moments(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Eigen::Index begin, Eigen::Index rows) {
    Moments m(x.cols());
    m.count = static_cast<double>(rows);
    const auto xb = x.middleRows(begin, rows);
    const auto yb = y.segment(begin, rows);
    m.sx = xb.colwise().sum().transpose();
    m.sy = yb.sum();
    m.xx.noalias() = xb.transpose() * xb;
    m.xy.noalias() = xb.transpose() * yb;
    return m;
}

RidgeModel solve(const Moments& m, double alpha) {
    if (m.count < 1.0) throw std::invalid_argument("ridge fit needs at least one row");
    RidgeModel model;
    model.alpha = alpha;
    const Eigen::VectorXd mx = m.sx / m.count;
    const double my = m.sy / m.count;
    const auto p = m.sx.size();
    if (p == 0) {
        model.coef.resize(0);
        model.intercept = my;
        return model;
    }
    Eigen::MatrixXd a = m.xx - m.count * mx * mx.transpose();
    a.diagonal().array() += alpha;
    const Eigen::VectorXd b = m.xy - m.count * mx * my;
    model.coef = a.ldlt().solve(b);
    model.intercept = my - mx.dot(model.coef);
    return model;
}

}  // namespace

Eigen::VectorXd RidgeModel::predict(const Eigen::MatrixXd& x) const {
    if (coef.size() == 0) return Eigen::VectorXd::Constant(x.rows(), intercept);
    return (x * coef).array() + intercept;
}

RidgeModel fit_ridge(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double alpha) {
    return solve(moments(x, y, 0, x.rows()), alpha);
}

RidgeModel fit_ridge_cv(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const RidgeParams& params) {
    if (params.alphas.empty()) throw std::invalid_argument("ridge needs at least one alpha");
    const Eigen::Index n = x.rows();
    if (y.size() != n) throw std::invalid_argument("ridge inputs have different row counts");
    const Moments total = moments(x, y, 0, n);
    const Eigen::Index folds = std::min<Eigen::Index>(params.folds, n);
    if (params.alphas.size() == 1 || folds < 2 || x.cols() == 0) return solve(total, params.alphas.front());

    std::vector<double> error(params.alphas.size(), 0.0);
    for (Eigen::Index f = 0; f < folds; ++f) {
        const Eigen::Index begin = f * n / folds;
        const Eigen::Index end = (f + 1) * n / folds;
        Moments train = total;
        train -= moments(x, y, begin, end - begin);
        for (std::size_t a = 0; a < params.alphas.size(); ++a) {
            const RidgeModel m = solve(train, params.alphas[a]);
            const Eigen::VectorXd r = y.segment(begin, end - begin) - m.predict(x.middleRows(begin, end - begin));
            error[a] += r.squaredNorm();
        }
    }
    const auto best = std::min_element(error.begin(), error.end()) - error.begin();
    return solve(total, params.alphas[static_cast<std::size_t>(best)]);
}

}  // namespace adjset
