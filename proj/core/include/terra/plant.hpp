// Planar double-axle plant driven by the reference contact model.
//
// The body follows the bicycle equations with the reference-model forces in
// place of the surrogate, plus longitudinal dynamics u' = (Fx_f + Fx_r) / M
// and one lumped spin state per axle driven by the drive torque against the
// soil shear torque. It is integrated with RK4 at 1 ms and
// logged at 50 Hz.
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "terra/bicycle.hpp"
#include "terra/terramechanics.hpp"

namespace terra::plant {

struct Scenario {
    double duration = 40.0;          ///< [s]
    double steer_amplitude = 0.35;   ///< A_delta [rad]
    double steer_frequency = 0.25;   ///< f_delta [Hz]
    /// Total drive torque, split between the axles in proportion to their
    /// static loads so both axles run at similar slip.
    double torque_mean = 1330.0;     ///< T0 [N m]
    double torque_amplitude = 320.0; ///< A_T [N m]
    double torque_frequency = 0.025; ///< f_T [Hz]
    double initial_speed = 3.0;      ///< [m/s]
    std::uint64_t seed = 7;

    /// Throws when the peak steering rate exceeds the surrogate envelope.
    void validate() const;
    double steer(double t) const;
    double steer_rate(double t) const;
    double torque(double t) const;
};

struct PlantConfig {
    double dt = 1e-3;          ///< integration step [s]
    double log_interval = 0.02; ///< [s]
    double wheel_inertia = 15.0; ///< per axle [kg m^2]
    double slip_epsilon = 0.1;  ///< slip-ratio denominator guard [m/s]
    int mesh = terramech::kDefaultMesh;

    void validate() const;
};

struct PlantState {
    bicycle::BicycleState body;
    double omega_wf = 0.0; ///< front axle spin [rad/s]
    double omega_wr = 0.0; ///< rear axle spin [rad/s]
};

/// One 50 Hz record. Forces are axle totals (two tires) in the wheel frame.
struct Sample {
    double t = 0.0;
    bicycle::BicycleState state;
    double omega_wf = 0.0;
    double omega_wr = 0.0;
    bicycle::BicycleInput input;
    double torque = 0.0;
    double slip_angle_f = 0.0;
    double slip_angle_r = 0.0;
    terramech::TireForces front;
    terramech::TireForces rear;
};

struct TrajectoryLog {
    std::vector<Sample> samples;
    double interval = 0.02;

    std::size_t size() const { return samples.size(); }
    double duration() const;
};

/// Slip ratio (r w - u) / max(|r w|, |u|, eps), clamped to [-1, 1].
double slip_ratio(double wheel_speed, double u, double epsilon);

/// Runs the scenario. a_x in each sample is the mean acceleration over the
/// following log interval, so Euler-stepping u with it reproduces the next
/// logged speed exactly. Throws SimulationError on blow-up (|v| > 20 m/s,
/// non-finite state, or speed below the slip-kinematics threshold).
TrajectoryLog simulate(const Scenario& scn, const terramech::TerrainParams& terrain,
                       const terramech::WheelGeometry& geom, const bicycle::VehicleParams& vp,
                       const PlantConfig& cfg = {});

/// Replaces the body trajectory of `log` by a rollout of the bicycle model
/// with surrogate forces, driven by the logged inputs and started from the
/// first logged state. `substeps` Euler steps per log interval.
TrajectoryLog replay_surrogate(const TrajectoryLog& log, const nn::Mlp& model,
                               const bicycle::SurrogateTerrain& terrain,
                               const bicycle::VehicleParams& vp, int substeps = 2);

struct NoiseModel {
    /// Standard deviations of x, y, psi, u, v, omega_z.
    std::array<double, 6> sigma{1.2, 1.2, 0.0175, 0.25, 0.25, 0.0175};
    std::uint64_t seed = 11;

    void validate() const;
};

/// Noisy copies of the logged states, one per sample.
std::vector<bicycle::StateVector> add_noise(const TrajectoryLog& log, const NoiseModel& nm);

/// CSV (one row per sample) and JSON manifest with a content hash.
void write_log_csv(const TrajectoryLog& log, const std::string& path);
TrajectoryLog read_log_csv(const std::string& path);
void write_measurements_csv(const TrajectoryLog& log,
                            const std::vector<bicycle::StateVector>& measurements,
                            const std::string& path);
std::vector<bicycle::StateVector> read_measurements_csv(const std::string& path);

} // namespace terra::plant
