#include "terra/bicycle.hpp"

#include <cmath>
#include <string>

#include "terra/error.hpp"

namespace terra::bicycle {

void VehicleParams::validate() const {
    if (!(mass > 0.0) || !(yaw_inertia > 0.0) || !(lf > 0.0) || !(lr > 0.0)) {
        throw InvalidArgument("vehicle mass, yaw inertia and axle distances must be positive");
    }
}

AxleLoads AxleLoads::static_split(const VehicleParams& vp) {
    vp.validate();
    const double weight = vp.mass * kGravity;
    const double wheelbase = vp.lf + vp.lr;
    return AxleLoads{weight * vp.lr / wheelbase, weight * vp.lf / wheelbase};
}

StateVector BicycleState::vector() const {
    StateVector s;
    s << x, y, psi, u, v, omega_z;
    return s;
}

BicycleState BicycleState::from(const Eigen::Ref<const StateVector>& s) {
    return BicycleState{s(0), s(1), s(2), s(3), s(4), s(5)};
}

SurrogateTerrain SurrogateTerrain::from(const terramech::TerrainParams& params,
                                        const terramech::WheelGeometry& geom) {
    return SurrogateTerrain{terramech::aggregate_modulus(params, geom), params.n, params.k, params.c,
                            params.phi};
}

SlipAngles slip_quantities(const BicycleState& z, double delta, const VehicleParams& vp) {
    if (!(std::abs(z.u) >= kMinSpeed)) {
        throw InvalidArgument("slip angles undefined at u = " + std::to_string(z.u) + " m/s");
    }
    return SlipAngles{std::atan((z.v + vp.lf * z.omega_z) / z.u) - delta,
                      std::atan((z.v - vp.lr * z.omega_z) / z.u)};
}

StateVector derivatives(const BicycleState& z, const BicycleInput& in, const AxleForces& forces,
                        const VehicleParams& vp) {
    if (!std::isfinite(forces.front) || !std::isfinite(forces.rear)) {
        throw InvalidArgument("axle forces must be finite");
    }
    const double c = std::cos(z.psi);
    const double s = std::sin(z.psi);
    const double lateral = z.v + vp.lf * z.omega_z;
    StateVector d;
    d << z.u * c - lateral * s,
         z.u * s + lateral * c,
         z.omega_z,
         in.a_x,
         (forces.front + forces.rear) / vp.mass - z.u * z.omega_z,
         (forces.front * vp.lf - forces.rear * vp.lr) / vp.yaw_inertia;
    return d;
}

BicycleState step_euler(const BicycleState& z, const BicycleInput& in, const AxleForces& forces,
                        const VehicleParams& vp, double dt) {
    if (!(dt > 0.0 && dt <= kMaxStep)) {
        throw InvalidArgument("Euler step " + std::to_string(dt) + " s outside (0, 0.05]");
    }
    return BicycleState::from(z.vector() + dt * derivatives(z, in, forces, vp));
}

Eigen::Matrix<double, 10, 1> surrogate_input(double slip_ratio, double slip_angle, double u,
                                             double tire_load, double steering_rate,
                                             const SurrogateTerrain& terrain) {
    Eigen::Matrix<double, 10, 1> x;
    x << slip_ratio, slip_angle, u, tire_load, steering_rate, terrain.k_star, terrain.n, terrain.k,
        terrain.c, terrain.phi;
    return x;
}

AxleForces axle_lateral_forces(const BicycleState& z, const BicycleInput& in,
                               const SurrogateTerrain& terrain, const nn::Mlp& model,
                               const VehicleParams& vp, const AxleLoads& loads) {
    BicycleState guarded = z;
    if (std::abs(guarded.u) < kMinSpeed) guarded.u = kMinSpeed;
    const SlipAngles alpha = slip_quantities(guarded, in.delta, vp);
    const double front = model.value(surrogate_input(in.slip_ratio_f, alpha.front, guarded.u,
                                                     0.5 * loads.front, in.delta_rate, terrain));
    const double rear = model.value(
        surrogate_input(in.slip_ratio_r, alpha.rear, guarded.u, 0.5 * loads.rear, 0.0, terrain));
    return AxleForces{2.0 * front, 2.0 * rear};
}

} // namespace terra::bicycle
