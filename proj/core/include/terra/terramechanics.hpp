// Rigid-wheel / deformable-soil contact model.
//
// The contact arc between a rigid wheel and the soil is discretized from the
// entry angle down to the bottom-dead-centre exit. At every node the Bekker
// pressure-sinkage law gives the normal stress and the Janosi-Hanamoto law
// gives the shear stress from the accumulated shear displacement; the node
// tractions are resolved into the wheel frame and integrated over the arc
// and the tire width.
#pragma once

#include <vector>

namespace terra::terramech {

/// Bekker/Janosi soil description.
struct TerrainParams {
    double k_c = 0.0;   ///< cohesive modulus [N/m^(n+1)]
    double k_phi = 0.0; ///< frictional modulus [N/m^(n+2)]
    double n = 0.0;     ///< sinkage exponent [-]
    double k = 0.0;     ///< shear deformation modulus [m]
    double c = 0.0;     ///< cohesion [Pa]
    double phi = 0.0;   ///< internal friction angle [rad]

    /// Throws InvalidArgument when an invariant is violated.
    void validate() const;

    /// Clay terrain used throughout the evaluation experiments.
    static TerrainParams clay();
};

struct WheelGeometry {
    double radius = 0.45; ///< [m]
    double width = 0.25;  ///< [m]

    void validate() const;
};

struct WheelState {
    double slip_ratio = 0.0;            ///< [-], in [-1, 1]
    double slip_angle = 0.0;            ///< [rad]
    double longitudinal_velocity = 0.0; ///< [m/s]
    double normal_load = 0.0;           ///< [N] per tire
    double steering_rate = 0.0;         ///< [rad/s]
};

/// Forces in the wheel frame. Positive fy points to the wheel's left.
struct TireForces {
    double fx = 0.0;
    double fy = 0.0;
    double fz = 0.0;
    double sinkage = 0.0;
    /// Integral of the normal stress over the arc surface, b r int(sigma).
    /// Equals fz for a flat patch and exceeds it on a curved arc.
    double normal_resultant = 0.0;
    /// Moment of the longitudinal shear about the axle, b r^2 int(tau_x).
    /// Normal stress is radial and contributes none.
    double shear_torque = 0.0;
};

/// Stress state at a single node of the contact arc.
struct NodeStress {
    double theta = 0.0; ///< angle from bottom dead centre [rad]
    double sigma = 0.0; ///< normal stress [Pa]
    double tau = 0.0;   ///< shear stress magnitude [Pa]
    double tau_x = 0.0; ///< longitudinal shear component [Pa]
    double tau_y = 0.0; ///< lateral shear component [Pa]
    double j_x = 0.0;   ///< longitudinal shear displacement [m]
    double j_y = 0.0;   ///< lateral shear displacement [m]
};

/// Lead time constant turning steering rate into an effective slip angle
/// offset: alpha_eff = alpha + kSteeringLead * steering_rate.
inline constexpr double kSteeringLead = 0.1;
inline constexpr int kDefaultMesh = 128;
inline constexpr int kMinMesh = 16;
inline constexpr double kMinVelocity = 0.1;

/// k* = k_c / width + k_phi.
double aggregate_modulus(const TerrainParams& params, const WheelGeometry& geom);

/// Bekker normal stress (k_c / b + k_phi) z^n. Throws for z < 0.
double normal_pressure(double z, const TerrainParams& params, const WheelGeometry& geom);

/// Janosi-Hanamoto shear stress (c + sigma tan(phi)) (1 - exp(-j / k)).
double shear_stress(double sigma, double j, const TerrainParams& params);

/// Entry angle of the contact arc for a given static sinkage.
double entry_angle(double sinkage, const WheelGeometry& geom);

/// Area of the contact arc, width * radius * entry angle.
double contact_area(double sinkage, const WheelGeometry& geom);

/// Upper bound on the magnitude of any shear resultant over the arc,
/// c A + N tan(phi) with N the integrated normal stress. Follows from the
/// pointwise bound tau <= c + sigma tan(phi).
double shear_force_limit(const TireForces& forces, const TerrainParams& params,
                         const WheelGeometry& geom);

/// Vertical resultant of the normal stress for a wheel sunk to depth z.
/// Uses the same node layout as tire_forces with `mesh` nodes.
double vertical_load_at(double z, const TerrainParams& params, const WheelGeometry& geom,
                        int mesh);

/// Sinkage that puts the wheel in vertical equilibrium with `load`.
/// Bisection on [0, 0.8 radius] to 1e-6 relative force balance. Throws
/// ConvergenceError when the load cannot be carried inside the bracket.
double static_sinkage(double load, const TerrainParams& params, const WheelGeometry& geom);

/// Node stresses along the contact arc for a given sinkage, ordered from
/// the entry angle (index 0) to the exit at theta = 0.
std::vector<NodeStress> contact_profile(const WheelState& ws, double sinkage,
                                        const TerrainParams& params,
                                        const WheelGeometry& geom, int mesh = kDefaultMesh);

/// Full evaluation: static sinkage from the normal load, then the contact
/// arc integral.
TireForces tire_forces(const WheelState& ws, const TerrainParams& params,
                       const WheelGeometry& geom, int mesh = kDefaultMesh);

/// Contact arc integral at a known sinkage. Callers that evaluate the same
/// wheel repeatedly at a fixed load cache the sinkage and call this.
TireForces tire_forces_at_sinkage(const WheelState& ws, double sinkage,
                                  const TerrainParams& params, const WheelGeometry& geom,
                                  int mesh = kDefaultMesh);

} // namespace terra::terramech
