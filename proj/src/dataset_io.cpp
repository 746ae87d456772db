#include "adjset/dataset_io.hpp"
#include "adjset/json_out.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace adjset {

using nlohmann::json;

Roles roles_of(const Dataset& data) {
    Roles roles;
    roles.treatment = data.treatment_id;
    roles.outcome = data.outcome_id;
    if (data.has_environment()) roles.environment = data.environment_id;
    for (const auto& f : data.features) roles.features.push_back({f.id, static_cast<int>(f.values.cols())});
    return roles;
}

json roles_to_json(const Roles& roles) {
    json j;
    j["treatment"] = roles.treatment;
    j["outcome"] = roles.outcome;
    if (roles.environment) j["environment"] = *roles.environment;
    json features = json::array();
    for (const auto& f : roles.features) features.push_back({{"id", f.id}, {"dim", f.dim}});
    j["features"] = features;
    for (const auto& [key, value] : roles.extra.items()) j[key] = value;
    return j;
}

Roles roles_from_json(const json& j) {
    Roles roles;
    roles.treatment = j.value("treatment", std::string("t"));
    roles.outcome = j.value("outcome", std::string("y"));
    if (j.contains("environment")) roles.environment = j.at("environment").get<std::string>();
    if (j.contains("features"))
        for (const auto& f : j.at("features")) roles.features.push_back({f.at("id").get<std::string>(), f.value("dim", 1)});
    for (const auto& [key, value] : j.items())
        if (key != "treatment" && key != "outcome" && key != "environment" && key != "features") roles.extra[key] = value;
    return roles;
}

Roles load_roles(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DatasetError("cannot open roles file " + path.string());
    try {
        return roles_from_json(json::parse(in));
    } catch (const json::exception& err) {
        throw DatasetError("malformed roles file " + path.string() + ": " + err.what());
    }
}

void save_roles(const Roles& roles, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DatasetError("cannot write roles file " + path.string());
    out << dump_json(roles_to_json(roles)) << '\n';
}

std::filesystem::path default_roles_path(const std::filesystem::path& csv) {
    auto p = csv;
    p.replace_extension(".roles.json");
    return p;
}

namespace {

void append_real(std::string& out, double v) {
    char buf[32];
    const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
    out.append(buf, static_cast<std::size_t>(len));
}

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\"");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\"");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_line(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

bool is_missing(const std::string& field) {
    std::string lower = field;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    return lower.empty() || lower == "na" || lower == "nan" || lower == "null";
}

double parse_real(const std::string& field, std::size_t row, const std::string& column) {
    double v = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    if (!field.empty() && *begin == '+') ++begin;
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end)
        throw DatasetError("row " + std::to_string(row) + ", column '" + column + "': cannot parse '" + field + "'");
    return v;
}

}  // namespace

std::string dataset_csv(const Dataset& data) {
    data.validate();
    std::string out;
    std::vector<std::string> header;
    for (const auto& f : data.features)
        for (Eigen::Index k = 0; k < f.values.cols(); ++k) header.push_back(column_name(f.id, k, f.values.cols()));
    header.push_back(data.treatment_id);
    header.push_back(data.outcome_id);
    if (data.has_environment()) header.push_back(data.environment_id);
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out += ',';
        out += header[i];
    }
    out += '\n';
    for (std::size_t r = 0; r < data.rows(); ++r) {
        const auto row = static_cast<Eigen::Index>(r);
        for (const auto& f : data.features)
            for (Eigen::Index k = 0; k < f.values.cols(); ++k) {
                append_real(out, f.values(row, k));
                out += ',';
            }
        out += data.treatment[row] != 0.0 ? '1' : '0';
        out += ',';
        append_real(out, data.outcome[row]);
        if (data.has_environment()) {
            out += ',';
            out += std::to_string(data.environment[r]);
        }
        out += '\n';
    }
    return out;
}

void save_dataset_csv(const Dataset& data, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DatasetError("cannot write dataset " + path.string());
    out << dataset_csv(data);
    if (!out) throw DatasetError("failed writing dataset " + path.string());
}

Dataset parse_dataset_csv(const std::string& text, const Roles& roles) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || trim(line).empty()) throw DatasetError("dataset file is empty");
    const auto header = split_line(line);
    std::map<std::string, std::size_t, std::less<>> position;
    for (std::size_t i = 0; i < header.size(); ++i)
        if (!position.emplace(header[i], i).second) throw DatasetError("duplicate column '" + header[i] + "'");

    auto require = [&](const std::string& name) {
        auto it = position.find(name);
        if (it == position.end()) throw DatasetError("header lacks column '" + name + "' declared in roles");
        return it->second;
    };
    const std::size_t t_col = require(roles.treatment);
    const std::size_t y_col = require(roles.outcome);
    std::optional<std::size_t> e_col;
    if (roles.environment) e_col = require(*roles.environment);

    // Feature layout: declared in roles, or inferred from the remaining header.
    std::vector<FeatureDecl> decls = roles.features;
    if (decls.empty()) {
        std::map<std::string, int> dims;
        std::vector<std::string> order;
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i == t_col || i == y_col || (e_col && i == *e_col)) continue;
            std::string owner = header[i];
            if (auto sep = owner.rfind("__"); sep != std::string::npos && sep + 2 < owner.size() &&
                                              std::all_of(owner.begin() + static_cast<std::ptrdiff_t>(sep) + 2,
                                                          owner.end(), ::isdigit))
                owner = owner.substr(0, sep);
            if (!dims.count(owner)) order.push_back(owner);
            ++dims[owner];
        }
        for (const auto& id : order) decls.push_back({id, dims[id]});
    }
    std::vector<std::vector<std::size_t>> feature_cols;
    std::size_t accounted = 2 + (e_col ? 1 : 0);
    for (const auto& d : decls) {
        std::vector<std::size_t> cols;
        for (int k = 0; k < d.dim; ++k) cols.push_back(require(column_name(d.id, k, d.dim)));
        accounted += cols.size();
        feature_cols.push_back(std::move(cols));
    }
    if (accounted != header.size()) throw DatasetError("header has columns not declared in the roles sidecar");

    std::vector<std::vector<double>> values(header.size());
    std::vector<std::size_t> missing_rows;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto fields = split_line(line);
        if (fields.size() != header.size())
            throw DatasetError("row " + std::to_string(row) + " has " + std::to_string(fields.size()) +
                               " fields, header has " + std::to_string(header.size()));
        bool missing = false;
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (is_missing(fields[i])) {
                missing = true;
                values[i].push_back(0.0);
            } else {
                values[i].push_back(parse_real(fields[i], row, header[i]));
            }
        }
        if (missing) missing_rows.push_back(row);
        ++row;
    }
    if (row == 0) throw DatasetError("dataset has a header but no rows");
    if (!missing_rows.empty()) {
        std::string list;
        for (std::size_t i = 0; i < missing_rows.size() && i < 20; ++i)
            list += (i ? ", " : "") + std::to_string(missing_rows[i]);
        if (missing_rows.size() > 20) list += ", ...";
        throw DatasetError(std::to_string(missing_rows.size()) + " row(s) with missing values: " + list);
    }

    Dataset data;
    data.treatment_id = roles.treatment;
    data.outcome_id = roles.outcome;
    const auto n = static_cast<Eigen::Index>(row);
    data.treatment = Eigen::Map<Eigen::VectorXd>(values[t_col].data(), n);
    data.outcome = Eigen::Map<Eigen::VectorXd>(values[y_col].data(), n);
    for (std::size_t f = 0; f < decls.size(); ++f) {
        FeatureBlock block{decls[f].id, Eigen::MatrixXd(n, decls[f].dim)};
        for (int k = 0; k < decls[f].dim; ++k)
            block.values.col(k) = Eigen::Map<Eigen::VectorXd>(values[feature_cols[f][static_cast<std::size_t>(k)]].data(), n);
        data.features.push_back(std::move(block));
    }
    if (e_col) {
        data.environment_id = *roles.environment;
        for (std::size_t r = 0; r < row; ++r) {
            const double v = values[*e_col][r];
            if (v != std::floor(v) || v < 0)
                throw DatasetError("environment label in row " + std::to_string(r) + " is not a non-negative integer");
            data.environment.push_back(static_cast<int>(v));
        }
    }
    data.validate();
    return data;
}

Dataset load_dataset_csv(const std::filesystem::path& path, const Roles& roles) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DatasetError("cannot open dataset " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_dataset_csv(buffer.str(), roles);
}

}  // namespace adjset
