// Latin hypercube sampling over the surrogate input space and generation of
// (input, target) training pairs from the reference contact model.
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "terra/terramechanics.hpp"

namespace terra::sampling {

inline constexpr int kInputDim = 10;

/// Canonical column order of a surrogate input row.
enum Input : int {
    kSlipRatio = 0,
    kSlipAngle,
    kVelocity,
    kLoad,
    kSteeringRate,
    kKStar,
    kSinkageExponent,
    kShearModulus,
    kCohesion,
    kFrictionAngle,
};

/// Column names used in CSV headers, in canonical order.
const std::array<std::string_view, kInputDim>& input_names();

struct Bounds {
    double min = 0.0;
    double max = 1.0;
};

struct InputSpace {
    std::array<Bounds, kInputDim> bounds;

    /// The default training envelope (slip, slip angle, speed, load,
    /// steering rate, k*, n, k, c, phi).
    static InputSpace defaults();

    void validate() const;
    bool contains(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
};

/// Which reference-model outputs become training targets.
enum class TargetSet {
    Lateral, ///< fy only
    All,     ///< fx, fy, fz
};

struct Provenance {
    std::uint64_t seed = 0;
    std::size_t count = 0;
    std::string generated_at; ///< ISO-8601 UTC
    std::size_t resampled_rows = 0;
    bool quality_warning = false;
};

struct Dataset {
    Eigen::MatrixXd inputs;  ///< N x 10
    Eigen::MatrixXd targets; ///< N x T
    std::vector<std::string> target_names;
    Provenance provenance;

    Eigen::Index rows() const { return inputs.rows(); }
    /// Rows selected by index, provenance copied.
    Dataset subset(const std::vector<Eigen::Index>& rows) const;
};

struct Split {
    Dataset train;
    Dataset validation;
    Dataset test;
};

/// Plain Latin hypercube: every dimension has exactly one sample in each of
/// the `count` equal-width strata. Deterministic in `seed`.
Eigen::MatrixXd lhs_sample(const InputSpace& space, std::size_t count, std::uint64_t seed);

/// Maps a surrogate input row to reference-model arguments. k* is folded
/// entirely into k_phi (k_c = 0).
terramech::WheelState wheel_state_of(const Eigen::Ref<const Eigen::RowVectorXd>& row);
terramech::TerrainParams terrain_of(const Eigen::Ref<const Eigen::RowVectorXd>& row);

/// Evaluates the reference model on one input row.
terramech::TireForces evaluate_row(const Eigen::Ref<const Eigen::RowVectorXd>& row,
                                   const terramech::WheelGeometry& geom,
                                   int mesh = terramech::kDefaultMesh);

struct GenerateOptions {
    TargetSet targets = TargetSet::Lateral;
    int mesh = terramech::kDefaultMesh;
    /// Resample fraction above which the data-quality warning is raised.
    double warning_fraction = 0.01;
};

/// Samples `count` rows and labels them with the reference model. Rows the
/// reference model cannot carry (no static sinkage inside the bracket) are
/// resampled inside their strata, then re-paired with another row's load
/// stratum if that is not enough; either way the stratification holds.
Dataset generate_dataset(const InputSpace& space, std::size_t count, std::uint64_t seed,
                         const terramech::WheelGeometry& geom,
                         const GenerateOptions& options = {});

/// Disjoint 70/15/15 partition; the rounding residue goes to training.
Split split_dataset(const Dataset& data, std::uint64_t seed);

/// CSV with a header naming the 10 inputs and the targets. Values are
/// written with 17 significant digits so a reload is bit-exact.
void write_dataset_csv(const Dataset& data, const std::string& path);
Dataset read_dataset_csv(const std::string& path);

/// Sidecar manifest: seed, bounds, count, geometry, content hash.
void write_dataset_manifest(const Dataset& data, const InputSpace& space,
                            const terramech::WheelGeometry& geom, const std::string& csv_path,
                            const std::string& manifest_path);

} // namespace terra::sampling
