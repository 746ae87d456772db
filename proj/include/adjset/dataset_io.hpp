#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "adjset/dataset.hpp"

namespace adjset {

struct FeatureDecl {
    std::string id;
    int dim = 1;
};

/// Roles sidecar: which CSV columns hold the treatment, outcome, optional
/// environment labels and features. An empty feature list means "every
/// remaining column", grouping "name__k" headers into one block.
struct Roles {
    std::string treatment = "t";
    std::string outcome = "y";
    std::optional<std::string> environment;
    std::vector<FeatureDecl> features;
    nlohmann::json extra = nlohmann::json::object();  // e.g. environment weights
};

Roles roles_of(const Dataset& data);
nlohmann::json roles_to_json(const Roles& roles);
Roles roles_from_json(const nlohmann::json& j);
Roles load_roles(const std::filesystem::path& path);
void save_roles(const Roles& roles, const std::filesystem::path& path);

/// data.csv -> data.roles.json
std::filesystem::path default_roles_path(const std::filesystem::path& csv);

/// Header: feature columns, treatment, outcome, then environment if present.
/// Reals use 17 significant digits.
void save_dataset_csv(const Dataset& data, const std::filesystem::path& path);
std::string dataset_csv(const Dataset& data);

/// Rows with missing values ("", "NA", "nan") are rejected with their
/// 0-based data row indices.
Dataset load_dataset_csv(const std::filesystem::path& path, const Roles& roles);
Dataset parse_dataset_csv(const std::string& text, const Roles& roles);

}  // namespace adjset
