#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "adjset/graph.hpp"

namespace adjset {

class DatasetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using RowIndex = std::vector<Eigen::Index>;

struct FeatureBlock {
    std::string id;
    Eigen::MatrixXd values;  // rows x dim
};

/// Column-oriented sample table. Features keep their declared order; a
/// multi-dimensional feature is one block. Environment labels are optional.
struct Dataset {
    std::vector<FeatureBlock> features;
    std::string treatment_id = "t";
    Eigen::VectorXd treatment;
    std::string outcome_id = "y";
    Eigen::VectorXd outcome;
    std::string environment_id = "e";
    std::vector<int> environment;
    std::vector<FeatureBlock> latents;  // only filled on request by simulate()

    std::size_t rows() const { return static_cast<std::size_t>(outcome.size()); }
    bool has_feature(std::string_view id) const;
    const FeatureBlock& feature(std::string_view id) const;
    std::vector<std::string> feature_ids() const;
    bool has_environment() const { return !environment.empty(); }
    int num_environments() const;

    /// Throws DatasetError when row counts disagree, t is not binary or
    /// environment labels are negative.
    void validate() const;
};

/// Scalar column name: "x" for a one-dimensional feature, "x__k" otherwise.
std::string column_name(std::string_view id, Eigen::Index component, Eigen::Index dim);

struct ColumnInfo {
    std::string name;
    std::string owner;
    Eigen::Index component = 0;
};

/// Feature blocks flattened into a single matrix of scalar columns.
struct ColumnTable {
    Eigen::MatrixXd values;
    std::vector<ColumnInfo> columns;

    std::size_t size() const { return columns.size(); }
    /// Indices of all columns owned by the given features.
    std::vector<int> columns_of(const NodeSet& owners) const;
    NodeSet owners_of(std::span<const int> columns) const;
    std::vector<std::string> names_of(std::span<const int> columns) const;
    Eigen::MatrixXd select(std::span<const int> columns) const;
};

ColumnTable flatten(const Dataset& data, std::span<const std::string> feature_ids);
ColumnTable flatten_except(const Dataset& data, const NodeSet& excluded);

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m, const RowIndex& rows);
Eigen::VectorXd take_rows(const Eigen::VectorXd& v, const RowIndex& rows);
std::vector<int> take_rows(const std::vector<int>& v, const RowIndex& rows);

/// Random split of 0..n-1 into a training part of round(fraction * n) rows
/// and the remaining evaluation part; both sorted.
struct Split {
    RowIndex train;
    RowIndex test;
};
Split train_test_split(std::size_t n, double train_fraction, std::uint64_t seed);

}  // namespace adjset
