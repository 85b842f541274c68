// Versioned JSON container for trained networks.
#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "terra/mlp.hpp"

namespace terra::nn {

inline constexpr int kModelFormatVersion = 1;

struct ModelFile {
    Mlp model;
    /// Free-form training manifest (seed, dataset hash, member MSEs).
    nlohmann::ordered_json manifest = nlohmann::ordered_json::object();
};

/// Doubles are written in shortest round-trip form, so load(save(m)) is
/// bit-exact on every parameter and normalization entry.
void save(const ModelFile& file, const std::string& path);
void save(const Mlp& model, const std::string& path);

/// Throws VersionMismatchError for a foreign format version and
/// CorruptFileError for anything unparsable or inconsistent.
ModelFile load_file(const std::string& path);
Mlp load(const std::string& path);

} // namespace terra::nn
