// Run configuration shared by every CLI command.
//
// The file is JSON. Every section is optional and falls back to the
// defaults below; unknown keys are rejected so typos fail early.
#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "terra/bicycle.hpp"
#include "terra/horizon.hpp"
#include "terra/plant.hpp"
#include "terra/sampling.hpp"
#include "terra/terramechanics.hpp"
#include "terra/training.hpp"
#include "terra/ukf.hpp"

namespace terra::config {

/// Output layout below the run directory.
struct Paths {
    std::string dataset = "data/dataset.csv";
    std::string dataset_manifest = "data/dataset.json";
    std::string model = "model/model.json";
    std::string training_report = "model/members.csv";
    std::string log = "sim/log.csv";
    std::string measurements = "sim/measurements.csv";
    std::string log_manifest = "sim/log.json";
    std::string estimate = "estimate/estimate.csv";
    std::string evaluation = "eval";
    std::string report = "report";
};

struct RunConfig {
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    Paths paths;

    std::string terrain_name = "clay";
    terramech::TerrainParams terrain = terramech::TerrainParams::clay();
    terramech::WheelGeometry geometry;
    bicycle::VehicleParams vehicle;

    sampling::InputSpace space = sampling::InputSpace::defaults();
    std::size_t dataset_count = 10000;
    sampling::GenerateOptions generate;

    nn::TrainConfig training;

    plant::Scenario scenario;
    plant::PlantConfig plant;
    plant::NoiseModel noise;

    ukf::UkfConfig ukf = ukf::UkfConfig::defaults();
    double n0 = 0.7;
    double n0_std = 0.2;

    eval::HorizonConfig horizon;
    /// Start prediction windows from filtered instead of true states.
    bool filtered_starts = false;

    /// Per-stage seeds derived from the master seed.
    std::uint64_t dataset_seed() const;
    std::uint64_t split_seed() const;
    std::uint64_t training_seed() const;
    std::uint64_t noise_seed() const;

    /// Resolves a Paths entry against out_dir.
    std::string path(const std::string& relative) const;

    /// Changes the master seed and re-derives the stage seeds.
    void set_seed(std::uint64_t seed);

    void validate() const;
};

/// Parses a config document; throws InvalidArgument naming the offending key.
RunConfig parse(const nlohmann::json& doc);
RunConfig load(const std::string& path);

/// Effective configuration, for manifests and `--dump`.
nlohmann::ordered_json to_json(const RunConfig& cfg);

} // namespace terra::config
