// Result tables and figures for an estimation run.
#pragma once

#include <string>
#include <vector>

#include "terra/horizon.hpp"
#include "terra/plant.hpp"
#include "terra/ukf.hpp"

namespace terra::report {

struct ConvergenceRow {
    double true_n = 0.0;
    double initial_n = 0.0;
    double estimated_n = 0.0;

    double error_percent() const;
};

struct HorizonRow {
    std::string label; ///< "initial", "estimated", "true"
    double n = 0.0;
    eval::HorizonResult result;
};

/// Estimated sinkage exponent against the truth.
void write_convergence_table(const ConvergenceRow& row, const std::string& path);
/// Per-state horizon MSE, one column per candidate n.
void write_horizon_table(const std::vector<HorizonRow>& rows, const std::string& path);
std::vector<HorizonRow> read_horizon_table(const std::string& path);

void write_force_csv(const eval::ForceComparison& forces, const std::string& path);
eval::ForceComparison read_force_csv(const std::string& path);

/// n estimate over time with a two-sigma band and the true value.
void plot_estimate(const ukf::EstimateTrace& trace, double true_n, const std::string& path);
/// Front-tire lateral force of plant and surrogate.
void plot_forces(const eval::ForceComparison& forces, const std::string& path);
/// Plant path against the filtered path.
void plot_trajectory(const plant::TrajectoryLog& log, const ukf::EstimateTrace& trace,
                     const std::string& path);

} // namespace terra::report
