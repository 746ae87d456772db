#include "adjset/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "adjset/rng.hpp"

namespace adjset {

bool Dataset::has_feature(std::string_view id) const {
    return std::any_of(features.begin(), features.end(), [&](const FeatureBlock& f) { return f.id == id; });
}

const FeatureBlock& Dataset::feature(std::string_view id) const {
    for (const auto& f : features)
        if (f.id == id) return f;
    throw DatasetError("dataset has no feature '" + std::string(id) + "'");
}

std::vector<std::string> Dataset::feature_ids() const {
    std::vector<std::string> out;
    for (const auto& f : features) out.push_back(f.id);
    return out;
}

int Dataset::num_environments() const {
    if (environment.empty()) return 0;
    return *std::max_element(environment.begin(), environment.end()) + 1;
}

void Dataset::validate() const {
    const auto n = static_cast<Eigen::Index>(rows());
    if (treatment.size() != n) throw DatasetError("treatment column length differs from outcome");
    for (const auto& f : features)
        if (f.values.rows() != n) throw DatasetError("feature '" + f.id + "' has a different row count");
    for (Eigen::Index i = 0; i < n; ++i)
        if (treatment[i] != 0.0 && treatment[i] != 1.0)
            throw DatasetError("treatment must be binary; row " + std::to_string(i) + " holds " +
                               std::to_string(treatment[i]));
    if (!environment.empty()) {
        if (static_cast<Eigen::Index>(environment.size()) != n)
            throw DatasetError("environment column length differs from outcome");
        for (int label : environment)
            if (label < 0) throw DatasetError("environment labels must be non-negative");
    }
}

std::string column_name(std::string_view id, Eigen::Index component, Eigen::Index dim) {
    if (dim == 1) return std::string(id);
    return std::string(id) + "__" + std::to_string(component);
}

std::vector<int> ColumnTable::columns_of(const NodeSet& owners) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (owners.count(columns[i].owner)) out.push_back(static_cast<int>(i));
    return out;
}

NodeSet ColumnTable::owners_of(std::span<const int> cols) const {
    NodeSet out;
    for (int c : cols) out.insert(columns.at(static_cast<std::size_t>(c)).owner);
    return out;
}

std::vector<std::string> ColumnTable::names_of(std::span<const int> cols) const {
    std::vector<std::string> out;
    for (int c : cols) out.push_back(columns.at(static_cast<std::size_t>(c)).name);
    return out;
}

Eigen::MatrixXd ColumnTable::select(std::span<const int> cols) const {
    Eigen::MatrixXd out(values.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = values.col(cols[j]);
    return out;
}

ColumnTable flatten(const Dataset& data, std::span<const std::string> feature_ids) {
    ColumnTable table;
    Eigen::Index total = 0;
    for (const auto& id : feature_ids) total += data.feature(id).values.cols();
    table.values.resize(static_cast<Eigen::Index>(data.rows()), total);
    Eigen::Index at = 0;
    for (const auto& id : feature_ids) {
        const auto& block = data.feature(id).values;
        for (Eigen::Index k = 0; k < block.cols(); ++k) {
            table.values.col(at++) = block.col(k);
            table.columns.push_back({column_name(id, k, block.cols()), id, k});
        }
    }
    return table;
}

ColumnTable flatten_except(const Dataset& data, const NodeSet& excluded) {
    std::vector<std::string> ids;
    for (const auto& f : data.features)
        if (!excluded.count(f.id)) ids.push_back(f.id);
    return flatten(data, ids);
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m, const RowIndex& rows) { return m(rows, Eigen::all); }

Eigen::VectorXd take_rows(const Eigen::VectorXd& v, const RowIndex& rows) { return v(rows); }

std::vector<int> take_rows(const std::vector<int>& v, const RowIndex& rows) {
    std::vector<int> out;
    out.reserve(rows.size());
    for (auto r : rows) out.push_back(v[static_cast<std::size_t>(r)]);
    return out;
}

Split train_test_split(std::size_t n, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction <= 1.0)) throw DatasetError("train fraction must be in (0, 1]");
    RowIndex order(n);
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    Rng rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
    Split split;
    split.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

}  // namespace adjset
