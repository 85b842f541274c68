#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "terra/content_hash.hpp"
#include "terra/csv.hpp"
#include "terra/error.hpp"
#include "terra/sampling.hpp"

namespace terra::sampling {

void write_dataset_csv(const Dataset& data, const std::string& path) {
    csv::Table table;
    for (const auto name : input_names()) table.header.emplace_back(name);
    for (const auto& name : data.target_names) table.header.push_back(name);
    table.rows.reserve(static_cast<std::size_t>(data.rows()));
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        std::vector<double> row;
        row.reserve(table.header.size());
        for (Eigen::Index j = 0; j < data.inputs.cols(); ++j) row.push_back(data.inputs(i, j));
        for (Eigen::Index j = 0; j < data.targets.cols(); ++j) row.push_back(data.targets(i, j));
        table.rows.push_back(std::move(row));
    }
    csv::write(table, path);
}

Dataset read_dataset_csv(const std::string& path) {
    const csv::Table table = csv::read(path);
    if (table.header.size() <= static_cast<std::size_t>(kInputDim)) {
        throw CorruptFileError("dataset '" + path + "' has no target columns");
    }
    for (int d = 0; d < kInputDim; ++d) {
        if (table.header[static_cast<std::size_t>(d)] != input_names()[static_cast<std::size_t>(d)]) {
            throw CorruptFileError("dataset '" + path + "' column " + std::to_string(d) +
                                   " is '" + table.header[static_cast<std::size_t>(d)] +
                                   "', expected '" +
                                   std::string(input_names()[static_cast<std::size_t>(d)]) + "'");
        }
    }
    Dataset data;
    const auto n = static_cast<Eigen::Index>(table.rows.size());
    const auto t = static_cast<Eigen::Index>(table.header.size()) - kInputDim;
    data.inputs.resize(n, kInputDim);
    data.targets.resize(n, t);
    data.target_names.assign(table.header.begin() + kInputDim, table.header.end());
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = table.rows[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < kInputDim; ++j) data.inputs(i, j) = row[static_cast<std::size_t>(j)];
        for (Eigen::Index j = 0; j < t; ++j) data.targets(i, j) = row[static_cast<std::size_t>(kInputDim + j)];
    }
    data.provenance.count = static_cast<std::size_t>(n);
    return data;
}

void write_dataset_manifest(const Dataset& data, const InputSpace& space,
                            const terramech::WheelGeometry& geom, const std::string& csv_path,
                            const std::string& manifest_path) {
    nlohmann::ordered_json bounds = nlohmann::ordered_json::object();
    for (std::size_t d = 0; d < space.bounds.size(); ++d) {
        bounds[std::string(input_names()[d])] = {space.bounds[d].min, space.bounds[d].max};
    }
    nlohmann::ordered_json manifest = {
        {"format", "terra-dataset"},
        {"version", 1},
        {"seed", data.provenance.seed},
        {"count", data.provenance.count},
        {"generated_at", data.provenance.generated_at},
        {"resampled_rows", data.provenance.resampled_rows},
        {"quality_warning", data.provenance.quality_warning},
        {"bounds", bounds},
        {"geometry", {{"radius", geom.radius}, {"width", geom.width}}},
        {"targets", data.target_names},
        {"csv", std::filesystem::path(csv_path).filename().string()},
        {"content_hash", git_blob_hash_file(csv_path)},
    };
    csv::ensure_parent(manifest_path);
    std::ofstream out(manifest_path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + manifest_path + "' for writing");
    out << manifest.dump(2) << '\n';
}

} // namespace terra::sampling
