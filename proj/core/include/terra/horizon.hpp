// Multi-second prediction scoring and surrogate force comparison on a
// plant log.
#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "terra/bicycle.hpp"
#include "terra/mlp.hpp"
#include "terra/plant.hpp"

namespace terra::eval {

struct HorizonConfig {
    double horizon = 2.5;  ///< [s]
    double stride = 0.1;   ///< between window starts [s]
    int substeps = 1;      ///< Euler steps per log interval

    void validate() const;
};

struct HorizonResult {
    std::array<double, 6> mse{}; ///< x, y, psi, u, v, omega_z
    std::size_t windows = 0;
};

/// For every window start t0 (every `stride`), initializes the bicycle at
/// `starts[i0]` (the logged true state when `starts` is empty), rolls it
/// forward over the horizon with the logged inputs and surrogate forces at
/// `terrain`, and scores the state at t0 + horizon against the log. Windows
/// running past the end of the log are skipped.
HorizonResult horizon_mse(const plant::TrajectoryLog& log, const nn::Mlp& model,
                          const bicycle::SurrogateTerrain& terrain,
                          const bicycle::VehicleParams& vp, const HorizonConfig& cfg = {},
                          const std::vector<bicycle::StateVector>& starts = {});

/// Per-tire lateral force of the surrogate and the plant at each log sample.
struct ForceComparison {
    std::vector<double> t;
    std::vector<double> truth_front;
    std::vector<double> surrogate_front;
    std::vector<double> truth_rear;
    std::vector<double> surrogate_rear;

    double rmse_front() const;
    double rmse_rear() const;
    /// Over front and rear tires together.
    double rmse() const;
};

/// Evaluates the surrogate at the plant's logged wheel conditions (slip
/// ratio, slip angle, speed, static tire load, steering rate) and `terrain`.
ForceComparison compare_forces(const plant::TrajectoryLog& log, const nn::Mlp& model,
                               const bicycle::SurrogateTerrain& terrain,
                               const bicycle::VehicleParams& vp);

} // namespace terra::eval
