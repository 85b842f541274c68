// Unscented Kalman filter over the bicycle state augmented with the sinkage
// exponent. Scaled unscented transform with 2L + 1 = 15 sigma points,
// additive process and measurement noise, direct observation of the six
// bicycle states.
#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "terra/bicycle.hpp"
#include "terra/mlp.hpp"

namespace terra::ukf {

inline constexpr int kStateDim = 7;
inline constexpr int kMeasDim = 6;
inline constexpr int kSigmaCount = 2 * kStateDim + 1;
/// Index of the sinkage exponent in the augmented state.
inline constexpr int kN = 6;

using AugVector = Eigen::Matrix<double, kStateDim, 1>;
using AugMatrix = Eigen::Matrix<double, kStateDim, kStateDim>;
using MeasVector = Eigen::Matrix<double, kMeasDim, 1>;
using MeasMatrix = Eigen::Matrix<double, kMeasDim, kMeasDim>;
using GainMatrix = Eigen::Matrix<double, kStateDim, kMeasDim>;

struct UkfConfig {
    double alpha = 1e-3;
    double beta = 2.0;
    double kappa = 0.0;
    AugMatrix Q;
    MeasMatrix R;
    double dt = 0.02;
    int substeps = 2;
    double n_min = 0.3;
    double n_max = 1.3;

    /// Q = diag(1e-6 (1, 1, 0.01, 1, 1, 0.01), 1e-6); R from the sensor
    /// standard deviations.
    static UkfConfig defaults();
    void validate() const;
    double lambda() const;
};

struct Gaussian {
    AugVector mean = AugVector::Zero();
    AugMatrix cov = AugMatrix::Identity();
};

struct SigmaPoints {
    Eigen::Matrix<double, kStateDim, kSigmaCount> points;
    Eigen::Matrix<double, kSigmaCount, 1> wm;
    Eigen::Matrix<double, kSigmaCount, 1> wc;
    /// Diagonal jitter that was needed to factor the covariance.
    double jitter = 0.0;
};

/// Points mean +- columns of chol((L + lambda) cov). Escalates diagonal
/// jitter 1e-12 -> 1e-6 (relative to the largest variance) before throwing
/// ConvergenceError.
SigmaPoints sigma_points(const AugVector& mean, const AugMatrix& cov, const UkfConfig& cfg);

/// Weighted mean and covariance of a point set. The mean is accumulated as
/// offsets from the centre point to avoid cancellation with the large
/// weights of small alpha.
Gaussian recombine(const Eigen::Matrix<double, kStateDim, kSigmaCount>& points,
                   const SigmaPoints& weights);

using Propagator = std::function<AugVector(const AugVector&)>;

/// Unscented prediction through an arbitrary propagator, plus Q. The
/// propagator is called once per sigma point.
Gaussian predict(const Gaussian& prior, const Propagator& f, const UkfConfig& cfg);

struct Surrogate {
    const nn::Mlp* model = nullptr;
    bicycle::SurrogateTerrain terrain; ///< nominal terrain; n comes from the state
    bicycle::VehicleParams vehicle;
    bicycle::AxleLoads loads;
};

/// Propagates one augmented state over cfg.dt with cfg.substeps Euler steps;
/// the sinkage exponent is carried unchanged.
AugVector propagate(const AugVector& x, const bicycle::BicycleInput& in, const Surrogate& s,
                    const UkfConfig& cfg);

Gaussian predict(const Gaussian& prior, const bicycle::BicycleInput& in, const Surrogate& s,
                 const UkfConfig& cfg);

struct Update {
    Gaussian posterior;
    GainMatrix gain;
    MeasVector innovation;
};

/// Innovation update on the six bicycle states. The posterior covariance is
/// symmetrized and n clamped into [n_min, n_max] (covariance untouched).
Update update(const Gaussian& predicted, const MeasVector& measurement, const UkfConfig& cfg);

struct EstimatePoint {
    double t = 0.0;
    AugVector mean;
    AugVector variance; ///< diagonal of the covariance
};

struct EstimateTrace {
    std::vector<EstimatePoint> points;
    /// Empty when the run finished; otherwise the error that stopped it.
    std::string error;

    double final_n() const;
};

/// Runs the filter over a log: predict with the inputs of sample k-1, update
/// with measurement k. The state starts at the first measurement with
/// covariance R, and n at n0 with variance n0_variance. A fatal filter error
/// ends the run and is reported in the trace alongside the partial result.
EstimateTrace run_estimator(const std::vector<double>& times,
                            const std::vector<bicycle::BicycleInput>& inputs,
                            const std::vector<bicycle::StateVector>& measurements,
                            const UkfConfig& cfg, const Surrogate& s, double n0,
                            double n0_variance = 0.04);

void write_estimate_csv(const EstimateTrace& trace, const std::string& path);
EstimateTrace read_estimate_csv(const std::string& path);

} // namespace terra::ukf
