#include "terra/terramechanics.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numbers>
#include <string>

#include "terra/error.hpp"

namespace terra::terramech {

namespace {

// Node count used when solving for static sinkage; finer than the default
// integration mesh so the round trip through tire_forces is dominated by
// the caller's mesh, not by the solve.
constexpr int kSinkageMesh = 512;
constexpr double kSinkageBracket = 0.8;
constexpr double kSinkageTolerance = 1e-6;
constexpr int kSinkageMaxIterations = 200;

// Node i of `mesh` sits at theta_e (1 - s^2), s = i / (mesh - 1). The
// quadratic map clusters nodes near the entry angle where the stress has
// an integrable (theta_e - theta)^n kink.
double node_angle(int i, int mesh, double theta_e) {
    const double s = static_cast<double>(i) / static_cast<double>(mesh - 1);
    return theta_e * (1.0 - s * s);
}

struct ArcContext {
    double radius;
    double theta_e;
    double cos_e;
    double sin_e;
    double k_star;
    double slip;
    double tan_alpha;
};

ArcContext make_context(const WheelState& ws, double sinkage, const TerrainParams& params,
                        const WheelGeometry& geom) {
    ArcContext ctx{};
    ctx.radius = geom.radius;
    ctx.theta_e = entry_angle(sinkage, geom);
    ctx.cos_e = std::cos(ctx.theta_e);
    ctx.sin_e = std::sin(ctx.theta_e);
    ctx.k_star = aggregate_modulus(params, geom);
    ctx.slip = std::clamp(ws.slip_ratio, -1.0, 1.0);
    ctx.tan_alpha = std::tan(ws.slip_angle + kSteeringLead * ws.steering_rate);
    return ctx;
}

NodeStress node_stress(double theta, const ArcContext& ctx, const TerrainParams& params) {
    NodeStress node;
    node.theta = theta;
    const double z = std::max(0.0, ctx.radius * (std::cos(theta) - ctx.cos_e));
    node.sigma = z > 0.0 ? ctx.k_star * std::pow(z, params.n) : 0.0;

    const double sweep = ctx.theta_e - theta;
    node.j_x = ctx.radius * (sweep - (1.0 - ctx.slip) * (ctx.sin_e - std::sin(theta)));
    node.j_y = ctx.radius * (1.0 - ctx.slip) * sweep * ctx.tan_alpha;
    const double j = std::hypot(node.j_x, node.j_y);
    node.tau = shear_stress(node.sigma, j, params);
    assert(node.tau <= params.c + node.sigma * std::tan(params.phi));
    if (j > 0.0) {
        node.tau_x = node.tau * node.j_x / j;
        // Lateral shear opposes the lateral slip direction.
        node.tau_y = -node.tau * node.j_y / j;
    }
    return node;
}

void check_mesh(int mesh) {
    if (mesh < kMinMesh) {
        throw InvalidArgument("contact mesh needs at least " + std::to_string(kMinMesh) +
                              " nodes, got " + std::to_string(mesh));
    }
}

} // namespace

void TerrainParams::validate() const {
    const bool ok = std::isfinite(k_c) && std::isfinite(k_phi) && std::isfinite(n) &&
                    std::isfinite(k) && std::isfinite(c) && std::isfinite(phi);
    if (!ok) throw InvalidArgument("terrain parameters must be finite");
    if (!(k_phi > 0.0)) throw InvalidArgument("terrain k_phi must be positive");
    if (k < 1e-4) throw InvalidArgument("terrain shear modulus k must be >= 1e-4 m");
    if (c < 0.0) throw InvalidArgument("terrain cohesion must be nonnegative");
    if (!(phi > 0.0 && phi < std::numbers::pi / 2.0)) {
        throw InvalidArgument("terrain friction angle must lie in (0, pi/2)");
    }
    if (n < 0.3 || n > 1.3) throw InvalidArgument("sinkage exponent must lie in [0.3, 1.3]");
}

TerrainParams TerrainParams::clay() {
    return TerrainParams{13200.0, 692200.0, 0.5, 0.01, 4140.0, 0.2269};
}

void WheelGeometry::validate() const {
    if (!(radius > 0.0) || !(width > 0.0)) {
        throw InvalidArgument("wheel radius and width must be positive");
    }
}

double aggregate_modulus(const TerrainParams& params, const WheelGeometry& geom) {
    return params.k_c / geom.width + params.k_phi;
}

double normal_pressure(double z, const TerrainParams& params, const WheelGeometry& geom) {
    if (!(z >= 0.0)) throw InvalidArgument("sinkage must be nonnegative");
    if (z == 0.0) return 0.0;
    return aggregate_modulus(params, geom) * std::pow(z, params.n);
}

double shear_stress(double sigma, double j, const TerrainParams& params) {
    return (params.c + sigma * std::tan(params.phi)) * -std::expm1(-j / params.k);
}

double entry_angle(double sinkage, const WheelGeometry& geom) {
    return std::acos(std::clamp(1.0 - sinkage / geom.radius, -1.0, 1.0));
}

double contact_area(double sinkage, const WheelGeometry& geom) {
    return geom.width * geom.radius * entry_angle(sinkage, geom);
}

double shear_force_limit(const TireForces& forces, const TerrainParams& params,
                         const WheelGeometry& geom) {
    return params.c * contact_area(forces.sinkage, geom) +
           forces.normal_resultant * std::tan(params.phi);
}

double vertical_load_at(double z, const TerrainParams& params, const WheelGeometry& geom,
                        int mesh) {
    check_mesh(mesh);
    if (z <= 0.0) return 0.0;
    const double theta_e = entry_angle(z, geom);
    const double cos_e = std::cos(theta_e);
    const double k_star = aggregate_modulus(params, geom);

    double sum = 0.0;
    double prev_theta = theta_e;
    double prev_value = 0.0; // sigma vanishes at the entry angle
    for (int i = 1; i < mesh; ++i) {
        const double theta = node_angle(i, mesh, theta_e);
        const double depth = std::max(0.0, geom.radius * (std::cos(theta) - cos_e));
        const double value = k_star * std::pow(depth, params.n) * std::cos(theta);
        sum += 0.5 * (prev_value + value) * (prev_theta - theta);
        prev_theta = theta;
        prev_value = value;
    }
    return geom.width * geom.radius * sum;
}

double static_sinkage(double load, const TerrainParams& params, const WheelGeometry& geom) {
    if (!(load > 0.0) || !std::isfinite(load)) {
        throw InvalidArgument("static sinkage needs a positive finite load");
    }
    params.validate();
    geom.validate();

    double lo = 0.0;
    double hi = kSinkageBracket * geom.radius;
    if (vertical_load_at(hi, params, geom, kSinkageMesh) < load) {
        throw ConvergenceError("load " + std::to_string(load) +
                               " N exceeds bearing capacity at 0.8 radius sinkage");
    }
    for (int it = 0; it < kSinkageMaxIterations; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double w = vertical_load_at(mid, params, geom, kSinkageMesh);
        if (std::abs(w - load) <= kSinkageTolerance * load) return mid;
        if (w < load) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    throw ConvergenceError("static sinkage bisection did not converge");
}

std::vector<NodeStress> contact_profile(const WheelState& ws, double sinkage,
                                        const TerrainParams& params,
                                        const WheelGeometry& geom, int mesh) {
    check_mesh(mesh);
    const ArcContext ctx = make_context(ws, sinkage, params, geom);
    std::vector<NodeStress> nodes;
    nodes.reserve(static_cast<std::size_t>(mesh));
    for (int i = 0; i < mesh; ++i) {
        nodes.push_back(node_stress(node_angle(i, mesh, ctx.theta_e), ctx, params));
    }
    return nodes;
}

TireForces tire_forces(const WheelState& ws, const TerrainParams& params,
                       const WheelGeometry& geom, int mesh) {
    check_mesh(mesh);
    if (std::abs(ws.longitudinal_velocity) < kMinVelocity) {
        throw InvalidArgument("wheel speed below 0.1 m/s: slip quantities are undefined");
    }
    return tire_forces_at_sinkage(ws, static_sinkage(ws.normal_load, params, geom), params,
                                  geom, mesh);
}

TireForces tire_forces_at_sinkage(const WheelState& ws, double sinkage,
                                  const TerrainParams& params, const WheelGeometry& geom,
                                  int mesh) {
    check_mesh(mesh);
    if (std::abs(ws.longitudinal_velocity) < kMinVelocity) {
        throw InvalidArgument("wheel speed below 0.1 m/s: slip quantities are undefined");
    }
    if (!(sinkage >= 0.0)) throw InvalidArgument("sinkage must be nonnegative");

    const ArcContext ctx = make_context(ws, sinkage, params, geom);
    double fx = 0.0;
    double fy = 0.0;
    double fz = 0.0;
    double fn = 0.0;
    double ft = 0.0;
    double prev_theta = 0.0;
    double prev_x = 0.0;
    double prev_y = 0.0;
    double prev_z = 0.0;
    double prev_n = 0.0;
    double prev_t = 0.0;
    for (int i = 0; i < mesh; ++i) {
        const double theta = node_angle(i, mesh, ctx.theta_e);
        const NodeStress node = node_stress(theta, ctx, params);
        const double c = std::cos(theta);
        const double s = std::sin(theta);
        const double gx = node.tau_x * c - node.sigma * s;
        const double gy = node.tau_y;
        const double gz = node.sigma * c;
        if (i > 0) {
            const double h = 0.5 * (prev_theta - theta);
            fx += h * (prev_x + gx);
            fy += h * (prev_y + gy);
            fz += h * (prev_z + gz);
            fn += h * (prev_n + node.sigma);
            ft += h * (prev_t + node.tau_x);
        }
        prev_theta = theta;
        prev_x = gx;
        prev_y = gy;
        prev_z = gz;
        prev_n = node.sigma;
        prev_t = node.tau_x;
    }
    const double scale = geom.width * geom.radius;
    return TireForces{scale * fx, scale * fy, scale * fz, sinkage, scale * fn,
                      scale * geom.radius * ft};
}

} // namespace terra::terramech
