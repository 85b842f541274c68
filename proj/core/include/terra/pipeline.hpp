// End-to-end commands behind the `terra` CLI. Each command reads its inputs
// from, and writes its outputs below, the configured run directory.
#pragma once

#include <string>

#include "terra/config.hpp"

namespace terra::pipeline {

void gen_data(const config::RunConfig& cfg);
void train(const config::RunConfig& cfg);
void simulate(const config::RunConfig& cfg);
void estimate(const config::RunConfig& cfg);

struct EvaluationSummary {
    double estimated_n = 0.0;
    double force_rmse = 0.0;       ///< per tire, front and rear, at the true n
    double force_rmse_front = 0.0;
    double force_rmse_rear = 0.0;
};
EvaluationSummary evaluate(const config::RunConfig& cfg);

void report(const config::RunConfig& cfg);

struct BenchResult {
    std::size_t steps = 0;
    double mean_ms = 0.0;
    double median_ms = 0.0;
    double max_ms = 0.0;
};

/// Times predict + update over `steps` filter steps of the simulated log
/// (cycling through it when shorter).
BenchResult bench(const config::RunConfig& cfg, std::size_t steps);

/// Runs gen-data, train, simulate, estimate, evaluate and report in order.
void run_all(const config::RunConfig& cfg);

} // namespace terra::pipeline
