#include "adjset/citest.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include <boost/math/special_functions/gamma.hpp>

namespace adjset {

CiBlock CiBlock::labels(const std::vector<int>& codes) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(codes.size()));
    for (std::size_t i = 0; i < codes.size(); ++i) v[static_cast<Eigen::Index>(i)] = codes[i];
    return {v, true};
}

nlohmann::json ci_result_to_json(const CiTestResult& r) {
    return {{"p_value", r.p_value},
            {"statistic", r.statistic},
            {"method", r.method},
            {"features_xy", r.features_xy},
            {"features_z", r.features_z},
            {"seed", r.seed}};
}

Eigen::MatrixXd one_hot(const Eigen::VectorXd& codes) {
    std::set<double> levels(codes.data(), codes.data() + codes.size());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(codes.size(), static_cast<Eigen::Index>(levels.size()));
    Eigen::Index k = 0;
    for (double level : levels) {
        for (Eigen::Index i = 0; i < codes.size(); ++i)
            if (codes[i] == level) out(i, k) = 1.0;
        ++k;
    }
    return out;
}

Eigen::MatrixXd standardize_columns(const Eigen::MatrixXd& m) {
    Eigen::MatrixXd out = m;
    const double n = static_cast<double>(m.rows());
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        const double mean = out.col(c).mean();
        out.col(c).array() -= mean;
        const double sd = std::sqrt(out.col(c).squaredNorm() / n);
        if (!(sd > 0.0)) throw CiTestError("zero-variance column in CI test input");
        out.col(c) /= sd;
    }
    return out;
}

double median_pairwise_distance(const Eigen::MatrixXd& m, int max_rows) {
    const Eigen::Index r = std::min<Eigen::Index>(m.rows(), max_rows);
    std::vector<double> d;
    d.reserve(static_cast<std::size_t>(r * (r - 1) / 2));
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = i + 1; j < r; ++j) d.push_back((m.row(i) - m.row(j)).norm());
    if (d.empty()) return 1.0;
    auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
    std::nth_element(d.begin(), mid, d.end());
    double med = *mid;
    if (d.size() % 2 == 0) med = 0.5 * (med + *std::max_element(d.begin(), mid));
    return med > 0.0 ? med : 1.0;
}

double gamma_tail(const Eigen::VectorXd& weights, double statistic) {
    double s1 = 0.0, s2 = 0.0;
    for (double w : weights)
        if (w > 0.0) {
            s1 += w;
            s2 += w * w;
        }
    if (!(s1 > 0.0)) return 1.0;
    const double shape = s1 * s1 / (2.0 * s2);
    const double scale = 2.0 * s2 / s1;
    if (statistic <= 0.0) return 1.0;
    return boost::math::gamma_q(shape, statistic / scale);
}

namespace {

Eigen::MatrixXd prepare(const CiBlock& block) {
    if (!block.discrete) return block.values;
    if (block.values.cols() != 1) throw CiTestError("discrete CI block must hold a single code column");
    return one_hot(block.values.col(0));
}

// Drops constant one-hot columns (absent categories); continuous columns
// must vary.
Eigen::MatrixXd standardized(const CiBlock& block) {
    Eigen::MatrixXd m = prepare(block);
    if (block.discrete) {
        std::vector<Eigen::Index> keep;
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            const double s = m.col(c).sum();
            if (s > 0.0 && s < static_cast<double>(m.rows())) keep.push_back(c);
        }
        if (keep.empty()) throw CiTestError("discrete CI block has a single level");
        Eigen::MatrixXd kept(m.rows(), static_cast<Eigen::Index>(keep.size()));
        for (std::size_t k = 0; k < keep.size(); ++k) kept.col(static_cast<Eigen::Index>(k)) = m.col(keep[k]);
        m = std::move(kept);
    }
    return standardize_columns(m);
}

// sqrt(2) cos(x W^T + b) with W ~ N(0, 1/sigma^2), b ~ U(0, 2 pi), then
// each feature column normalised to zero mean and unit variance.
Eigen::MatrixXd fourier_features(const Eigen::MatrixXd& x, int count, int bandwidth_rows, Rng& rng) {
    const double sigma = median_pairwise_distance(x, bandwidth_rows);
    std::normal_distribution<double> normal(0.0, 1.0 / sigma);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    Eigen::MatrixXd w(count, x.cols());
    for (Eigen::Index i = 0; i < w.rows(); ++i)
        for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = normal(rng);
    Eigen::VectorXd b(count);
    for (auto& v : b) v = phase(rng);
    Eigen::MatrixXd f = (x * w.transpose()).rowwise() + b.transpose();
    f = std::sqrt(2.0) * f.array().cos().matrix();
    const double n = static_cast<double>(f.rows());
    for (Eigen::Index c = 0; c < f.cols(); ++c) {
        f.col(c).array() -= f.col(c).mean();
        const double sd = std::sqrt(f.col(c).squaredNorm() / n);
        if (sd > 0.0) f.col(c) /= sd;
    }
    return f;
}

// Regularised pseudo-inverse of a symmetric PSD matrix.
Eigen::MatrixXd psd_inverse(const Eigen::MatrixXd& c, double ridge) {
    const double lift = ridge * std::max(c.trace() / static_cast<double>(c.rows()), 1e-300);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c + lift * Eigen::MatrixXd::Identity(c.rows(), c.cols()));
    const Eigen::VectorXd& ev = eig.eigenvalues();
    const double cutoff = 1e-12 * std::max(ev.maxCoeff(), 0.0);
    Eigen::VectorXd inv(ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i) inv[i] = ev[i] > cutoff ? 1.0 / ev[i] : 0.0;
    return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

double cross_statistic(const Eigen::MatrixXd& rx, const Eigen::MatrixXd& ry) {
    const double n = static_cast<double>(rx.rows());
    const Eigen::MatrixXd c = rx.transpose() * ry / n;
    return n * c.squaredNorm();
}

}  // namespace

CiTestResult ci_pvalue_rcot(const CiBlock& a, const CiBlock& b, const std::vector<CiBlock>& cond,
                            const RcotParams& params, Seed seed) {
    const Eigen::Index n = a.values.rows();
    if (b.values.rows() != n) throw CiTestError("CI test inputs have different row counts");
    for (const auto& c : cond)
        if (c.values.rows() != n) throw CiTestError("CI test inputs have different row counts");
    if (params.features_ab < 1 || params.features_z < 1) throw CiTestError("feature counts must be positive");
    if (n <= std::max(params.features_z, params.features_ab * params.features_ab) + 1)
        throw CiTestError("n = " + std::to_string(n) + " is too small for the requested feature counts");

    Rng rng(seed);
    const Eigen::MatrixXd fx = fourier_features(standardized(a), params.features_ab, params.bandwidth_rows, rng);
    const Eigen::MatrixXd fy = fourier_features(standardized(b), params.features_ab, params.bandwidth_rows, rng);

    Eigen::MatrixXd rx = fx, ry = fy;
    bool has_cond = false;
    std::vector<Eigen::MatrixXd> zparts;
    for (const auto& c : cond) zparts.push_back(standardized(c));
    Eigen::Index zcols = 0;
    for (const auto& p : zparts) zcols += p.cols();
    if (zcols > 0) {
        has_cond = true;
        Eigen::MatrixXd z(n, zcols);
        Eigen::Index at = 0;
        for (const auto& p : zparts) {
            z.middleCols(at, p.cols()) = p;
            at += p.cols();
        }
        const Eigen::MatrixXd fz = fourier_features(z, params.features_z, params.bandwidth_rows, rng);
        const double nd = static_cast<double>(n);
        const Eigen::MatrixXd czz = fz.transpose() * fz / nd;
        const Eigen::MatrixXd proj = psd_inverse(czz, params.ridge);
        rx -= fz * (proj * (fz.transpose() * fx / nd));
        ry -= fz * (proj * (fz.transpose() * fy / nd));
    }

    CiTestResult result;
    result.method = params.approx == NullApprox::gamma ? "rcot-gamma" : "rcot-permutation";
    result.features_xy = params.features_ab;
    result.features_z = has_cond ? params.features_z : 0;
    result.seed = seed;
    result.statistic = cross_statistic(rx, ry);

    if (params.approx == NullApprox::gamma) {
        const int m = params.features_ab * params.features_ab;
        Eigen::MatrixXd prod(n, m);
        for (int i = 0; i < params.features_ab; ++i)
            for (int j = 0; j < params.features_ab; ++j)
                prod.col(i * params.features_ab + j) = rx.col(i).cwiseProduct(ry.col(j));
        const Eigen::MatrixXd cov = prod.transpose() * prod / static_cast<double>(n);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
        result.p_value = gamma_tail(eig.eigenvalues(), result.statistic);
    } else {
        if (params.permutations < 1) throw CiTestError("permutation count must be positive");
        std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
        int exceed = 0;
        Rng prng(derive_seed(seed, 0x7e57u));
        for (int r = 0; r < params.permutations; ++r) {
            for (Eigen::Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
            std::shuffle(perm.begin(), perm.end(), prng);
            Eigen::MatrixXd shuffled(n, rx.cols());
            for (Eigen::Index i = 0; i < n; ++i) shuffled.row(i) = rx.row(perm[static_cast<std::size_t>(i)]);
            if (cross_statistic(shuffled, ry) >= result.statistic) ++exceed;
        }
        result.p_value = (1.0 + exceed) / (1.0 + params.permutations);
    }
    result.p_value = std::clamp(result.p_value, 0.0, 1.0);
    return result;
}

CiTestResult ci_pvalue_fisherz(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::MatrixXd& cond) {
    const Eigen::Index n = a.size();
    const Eigen::Index k = cond.cols();
    if (b.size() != n || (k > 0 && cond.rows() != n)) throw CiTestError("CI test inputs have different row counts");
    if (n <= k + 3)
        throw CiTestError("Fisher z needs n > |cond| + 3 (n = " + std::to_string(n) + ", |cond| = " +
                          std::to_string(k) + ")");
    Eigen::MatrixXd design(n, k + 1);
    design.col(0).setOnes();
    if (k > 0) design.rightCols(k) = cond;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    if (qr.rank() < k + 1) throw CiTestError("conditioning set is rank deficient (collinear columns)");
    const Eigen::VectorXd ra = a - design * qr.solve(a);
    const Eigen::VectorXd rb = b - design * qr.solve(b);
    const double na = ra.norm(), nb = rb.norm();
    double r = (na > 0.0 && nb > 0.0) ? ra.dot(rb) / (na * nb) : 0.0;
    if (na == 0.0 && nb == 0.0) r = 1.0;
    r = std::clamp(r, -1.0 + 1e-15, 1.0 - 1e-15);
    const double z = std::atanh(r) * std::sqrt(static_cast<double>(n - k - 3));
    CiTestResult result;
    result.method = "fisherz";
    result.statistic = std::abs(z);
    result.p_value = std::clamp(std::erfc(std::abs(z) / std::numbers::sqrt2), 0.0, 1.0);
    result.features_xy = 1;
    result.features_z = static_cast<int>(k);
    return result;
}

}  // namespace adjset
