// Ensemble training of the surrogate network.
//
// Each member minimizes beta * E_D + alpha * E_W (sum of squared normalized
// errors plus weight decay) with Levenberg-Marquardt. In Bayesian mode the
// hyperparameters follow MacKay's evidence updates
//   gamma = P - 2 alpha tr(H^-1),  alpha = gamma / (2 E_W),
//   beta  = (N - gamma) / (2 E_D),
// with H the Gauss-Newton Hessian of the objective. When the P x P normal
// equations do not fit in the memory budget, members fall back to Adam on
// the same objective with a fixed lambda.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "terra/mlp.hpp"
#include "terra/sampling.hpp"

namespace terra::nn {

enum class Regularization {
    Bayesian, ///< evidence re-estimation of (alpha, beta)
    Fixed,    ///< lambda = alpha / beta held at initial_lambda
};

struct TrainConfig {
    std::vector<int> hidden_layers{35, 35, 35};
    int max_epochs = 60;
    Regularization regularization = Regularization::Bayesian;
    double initial_lambda = 0.1;
    double mu_initial = 1e-3;
    double mu_increase = 10.0;
    double mu_decrease = 0.1;
    double mu_max = 1e10;
    /// Epochs without validation improvement before stopping.
    int patience = 25;
    int ensemble_size = 8;
    std::uint64_t seed = 1;
    /// Bytes allowed for the P x P normal-equation matrix.
    std::size_t memory_budget_bytes = std::size_t{1} << 30;
    /// Worker threads for ensemble members; 0 uses the hardware count.
    int threads = 0;
    /// Adam fallback settings.
    double learning_rate = 1e-3;
    int batch_size = 256;

    void validate() const;
};

enum class MemberStatus { Ok, Diverged };

struct MemberReport {
    int index = 0;
    std::uint64_t seed = 0;
    std::string solver;    ///< "levenberg-marquardt" or "adam"
    MemberStatus status = MemberStatus::Ok;
    int epochs = 0;
    double train_mse = 0.0; ///< raw units (N^2 for forces)
    double val_mse = 0.0;
    double test_mse = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0; ///< effective number of parameters
    std::string message;
};

struct TrainingReport {
    std::vector<MemberReport> members;
    int selected = -1;
    double seconds = 0.0;
};

struct TrainResult {
    Mlp model;
    TrainingReport report;
};

/// Initial weights uniform in +-1/sqrt(fan_in), seeded.
Mlp initialize(const std::vector<int>& widths, std::uint64_t seed);

/// Trains one network from `init`, whose normalization records must already
/// be set. Exposed for tests; `train` is the ensemble entry point.
TrainResult train_member(const Mlp& init, const sampling::Split& data, const TrainConfig& cfg,
                         int index, std::uint64_t seed);

/// Trains cfg.ensemble_size members and returns the one with the lowest
/// validation MSE. Throws ConvergenceError when every member diverged.
TrainResult train(const sampling::Split& data, const TrainConfig& cfg);

/// Mean squared error in raw units, averaged over outputs.
double mse(const Mlp& model, const sampling::Dataset& data);

} // namespace terra::nn
