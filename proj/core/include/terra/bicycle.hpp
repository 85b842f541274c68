// Planar 3-DoF bicycle model with forward Euler integration.
//
// State z_b = (x, y, psi, u, v, omega_z) with (x, y) the global position of
// the front axle. Lateral axle forces come from the neural surrogate; the
// longitudinal acceleration a_x is an exogenous input.
#pragma once

#include <Eigen/Core>

#include "terra/mlp.hpp"
#include "terra/terramechanics.hpp"

namespace terra::bicycle {

inline constexpr double kGravity = 9.81;
/// Below this speed the slip kinematics are singular.
inline constexpr double kMinSpeed = 0.5;
inline constexpr double kMaxStep = 0.05;

struct VehicleParams {
    double mass = 1800.0;        ///< M_t [kg]
    double yaw_inertia = 2600.0; ///< I_zz [kg m^2]
    double lf = 1.4;             ///< CG to front axle [m]
    double lr = 1.6;             ///< CG to rear axle [m]

    void validate() const;
};

/// Static axle loads [N]; each axle carries two tires.
struct AxleLoads {
    double front = 0.0;
    double rear = 0.0;

    static AxleLoads static_split(const VehicleParams& vp);
};

using StateVector = Eigen::Matrix<double, 6, 1>;

struct BicycleState {
    double x = 0.0;
    double y = 0.0;
    double psi = 0.0;
    double u = 0.0;
    double v = 0.0;
    double omega_z = 0.0;

    StateVector vector() const;
    static BicycleState from(const Eigen::Ref<const StateVector>& s);
};

struct BicycleInput {
    double a_x = 0.0;        ///< [m/s^2]
    double delta = 0.0;      ///< road-wheel steer [rad]
    double delta_rate = 0.0; ///< [rad/s]
    double slip_ratio_f = 0.0;
    double slip_ratio_r = 0.0;
};

struct SlipAngles {
    double front = 0.0;
    double rear = 0.0;
};

struct AxleForces {
    double front = 0.0; ///< F_yf [N]
    double rear = 0.0;  ///< F_yr [N]
};

/// Surrogate terrain inputs: k* plus the Janosi/Bekker parameters.
struct SurrogateTerrain {
    double k_star = 0.0;
    double n = 0.0;
    double k = 0.0;
    double c = 0.0;
    double phi = 0.0;

    static SurrogateTerrain from(const terramech::TerrainParams& params,
                                 const terramech::WheelGeometry& geom);
};

/// alpha_f = atan((v + L_f w) / u) - delta, alpha_r = atan((v - L_r w) / u).
/// Throws InvalidArgument for |u| < kMinSpeed.
SlipAngles slip_quantities(const BicycleState& z, double delta, const VehicleParams& vp);

StateVector derivatives(const BicycleState& z, const BicycleInput& in, const AxleForces& forces,
                        const VehicleParams& vp);

/// z + dt * derivatives(z). Throws for dt outside (0, kMaxStep].
BicycleState step_euler(const BicycleState& z, const BicycleInput& in, const AxleForces& forces,
                        const VehicleParams& vp, double dt);

/// Per-axle force = 2 x surrogate(one tire at half the axle load). The rear
/// axle sees zero steering rate. Below kMinSpeed the kinematics are frozen
/// at u = kMinSpeed.
AxleForces axle_lateral_forces(const BicycleState& z, const BicycleInput& in,
                               const SurrogateTerrain& terrain, const nn::Mlp& model,
                               const VehicleParams& vp, const AxleLoads& loads);

/// Surrogate input row for one tire.
Eigen::Matrix<double, 10, 1> surrogate_input(double slip_ratio, double slip_angle, double u,
                                             double tire_load, double steering_rate,
                                             const SurrogateTerrain& terrain);

} // namespace terra::bicycle
