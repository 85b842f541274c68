#include "terra/plant.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "terra/error.hpp"
#include "terra/random.hpp"

namespace terra::plant {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kMaxLateralSpeed = 20.0;

using Vec8 = Eigen::Matrix<double, 8, 1>;

struct Context {
    const Scenario& scn;
    const terramech::TerrainParams& terrain;
    const terramech::WheelGeometry& geom;
    const bicycle::VehicleParams& vp;
    const PlantConfig& cfg;
    bicycle::AxleLoads loads;
    double sinkage_f = 0.0;
    double sinkage_r = 0.0;
};

struct Evaluation {
    Vec8 derivative;
    double slip_ratio_f = 0.0;
    double slip_ratio_r = 0.0;
    bicycle::SlipAngles alpha;
    terramech::TireForces front;
    terramech::TireForces rear;
};

PlantState unpack(const Vec8& s) {
    return PlantState{bicycle::BicycleState::from(s.head<6>()), s(6), s(7)};
}

Vec8 pack(const PlantState& p) {
    Vec8 s;
    s << p.body.vector(), p.omega_wf, p.omega_wr;
    return s;
}

terramech::TireForces axle_total(const terramech::TireForces& tire) {
    return terramech::TireForces{2.0 * tire.fx,      2.0 * tire.fy,
                                 2.0 * tire.fz,      tire.sinkage,
                                 2.0 * tire.normal_resultant, 2.0 * tire.shear_torque};
}

Evaluation evaluate(const Context& ctx, double t, const Vec8& s) {
    const PlantState p = unpack(s);
    const auto& z = p.body;
    if (!s.allFinite() || std::abs(z.v) > kMaxLateralSpeed) {
        std::ostringstream msg;
        msg << "plant state blew up at t = " << t << " s (u = " << z.u << ", v = " << z.v
            << ", omega_z = " << z.omega_z << ")";
        throw SimulationError(msg.str());
    }
    if (z.u < bicycle::kMinSpeed) {
        std::ostringstream msg;
        msg << "plant speed fell to " << z.u << " m/s at t = " << t
            << " s; raise the drive torque or initial speed";
        throw SimulationError(msg.str());
    }
    const double r = ctx.geom.radius;
    Evaluation e;
    e.alpha = bicycle::slip_quantities(z, ctx.scn.steer(t), ctx.vp);
    e.slip_ratio_f = slip_ratio(r * p.omega_wf, z.u, ctx.cfg.slip_epsilon);
    e.slip_ratio_r = slip_ratio(r * p.omega_wr, z.u, ctx.cfg.slip_epsilon);
    const terramech::WheelState wf{e.slip_ratio_f, e.alpha.front, z.u, 0.5 * ctx.loads.front,
                                   ctx.scn.steer_rate(t)};
    const terramech::WheelState wr{e.slip_ratio_r, e.alpha.rear, z.u, 0.5 * ctx.loads.rear, 0.0};
    e.front = axle_total(
        terramech::tire_forces_at_sinkage(wf, ctx.sinkage_f, ctx.terrain, ctx.geom, ctx.cfg.mesh));
    e.rear = axle_total(
        terramech::tire_forces_at_sinkage(wr, ctx.sinkage_r, ctx.terrain, ctx.geom, ctx.cfg.mesh));

    bicycle::BicycleInput in;
    in.a_x = (e.front.fx + e.rear.fx) / ctx.vp.mass;
    const bicycle::StateVector body =
        bicycle::derivatives(z, in, bicycle::AxleForces{e.front.fy, e.rear.fy}, ctx.vp);
    const double torque = ctx.scn.torque(t);
    const double front_share = ctx.loads.front / (ctx.loads.front + ctx.loads.rear);
    e.derivative << body,
        (front_share * torque - e.front.shear_torque) / ctx.cfg.wheel_inertia,
        ((1.0 - front_share) * torque - e.rear.shear_torque) / ctx.cfg.wheel_inertia;
    return e;
}

} // namespace

void Scenario::validate() const {
    if (!(duration > 0.0)) throw InvalidArgument("scenario duration must be positive");
    if (!(steer_frequency >= 0.0) || !(torque_frequency >= 0.0)) {
        throw InvalidArgument("scenario frequencies must be nonnegative");
    }
    const double peak_rate = kTwoPi * steer_frequency * std::abs(steer_amplitude);
    if (peak_rate > 0.56 + 1e-12) {
        throw InvalidArgument("peak steering rate " + std::to_string(peak_rate) +
                              " rad/s exceeds the 0.56 rad/s surrogate envelope");
    }
    if (!(initial_speed >= 2.0 && initial_speed <= 10.0)) {
        throw InvalidArgument("initial speed must lie in [2, 10] m/s");
    }
}

double Scenario::steer(double t) const {
    return steer_amplitude * std::sin(kTwoPi * steer_frequency * t);
}

double Scenario::steer_rate(double t) const {
    return kTwoPi * steer_frequency * steer_amplitude * std::cos(kTwoPi * steer_frequency * t);
}

double Scenario::torque(double t) const {
    return torque_mean + torque_amplitude * std::sin(kTwoPi * torque_frequency * t);
}

void PlantConfig::validate() const {
    if (!(dt > 0.0) || !(log_interval >= dt)) throw InvalidArgument("invalid plant time steps");
    const double ratio = log_interval / dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-9) {
        throw InvalidArgument("log interval must be a whole number of plant steps");
    }
    if (!(wheel_inertia > 0.0) || !(slip_epsilon > 0.0)) {
        throw InvalidArgument("wheel inertia and slip guard must be positive");
    }
    if (mesh < terramech::kMinMesh) throw InvalidArgument("plant contact mesh too coarse");
}

double TrajectoryLog::duration() const {
    return samples.empty() ? 0.0 : samples.back().t - samples.front().t;
}

double slip_ratio(double wheel_speed, double u, double epsilon) {
    const double denom = std::max({std::abs(wheel_speed), std::abs(u), epsilon});
    return std::clamp((wheel_speed - u) / denom, -1.0, 1.0);
}

TrajectoryLog simulate(const Scenario& scn, const terramech::TerrainParams& terrain,
                       const terramech::WheelGeometry& geom, const bicycle::VehicleParams& vp,
                       const PlantConfig& cfg) {
    scn.validate();
    terrain.validate();
    geom.validate();
    vp.validate();
    cfg.validate();
    Context ctx{scn, terrain, geom, vp, cfg, bicycle::AxleLoads::static_split(vp)};
    ctx.sinkage_f = terramech::static_sinkage(0.5 * ctx.loads.front, terrain, geom);
    ctx.sinkage_r = terramech::static_sinkage(0.5 * ctx.loads.rear, terrain, geom);

    const long steps_per_log = std::lround(cfg.log_interval / cfg.dt);
    const long n_logs = static_cast<long>(std::floor(scn.duration / cfg.log_interval + 1e-9)) + 1;

    PlantState start;
    start.body.u = scn.initial_speed;
    start.omega_wf = start.omega_wr = scn.initial_speed / geom.radius;
    Vec8 s = pack(start);

    TrajectoryLog log;
    log.interval = cfg.log_interval;
    log.samples.reserve(static_cast<std::size_t>(n_logs));
    for (long i = 0; i < n_logs; ++i) {
        const double t = static_cast<double>(i) * cfg.log_interval;
        const Evaluation e = evaluate(ctx, t, s);
        const PlantState p = unpack(s);
        Sample rec;
        rec.t = t;
        rec.state = p.body;
        rec.omega_wf = p.omega_wf;
        rec.omega_wr = p.omega_wr;
        rec.input.delta = scn.steer(t);
        rec.input.delta_rate = scn.steer_rate(t);
        rec.input.slip_ratio_f = e.slip_ratio_f;
        rec.input.slip_ratio_r = e.slip_ratio_r;
        rec.torque = scn.torque(t);
        rec.slip_angle_f = e.alpha.front;
        rec.slip_angle_r = e.alpha.rear;
        rec.front = e.front;
        rec.rear = e.rear;
        log.samples.push_back(rec);
        if (i + 1 == n_logs) break;

        for (long k = 0; k < steps_per_log; ++k) {
            const double tk = t + static_cast<double>(k) * cfg.dt;
            const double h = cfg.dt;
            const Vec8 k1 = evaluate(ctx, tk, s).derivative;
            const Vec8 k2 = evaluate(ctx, tk + 0.5 * h, s + 0.5 * h * k1).derivative;
            const Vec8 k3 = evaluate(ctx, tk + 0.5 * h, s + 0.5 * h * k2).derivative;
            const Vec8 k4 = evaluate(ctx, tk + h, s + h * k3).derivative;
            s += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
    }
    for (std::size_t i = 0; i + 1 < log.samples.size(); ++i) {
        log.samples[i].input.a_x =
            (log.samples[i + 1].state.u - log.samples[i].state.u) / cfg.log_interval;
    }
    if (log.samples.size() > 1) {
        log.samples.back().input.a_x = log.samples[log.samples.size() - 2].input.a_x;
    }
    return log;
}

TrajectoryLog replay_surrogate(const TrajectoryLog& log, const nn::Mlp& model,
                               const bicycle::SurrogateTerrain& terrain,
                               const bicycle::VehicleParams& vp, int substeps) {
    if (log.samples.empty()) throw InvalidArgument("cannot replay an empty log");
    if (substeps < 1) throw InvalidArgument("replay needs at least one substep");
    const auto loads = bicycle::AxleLoads::static_split(vp);
    const double h = log.interval / substeps;
    TrajectoryLog out = log;
    bicycle::BicycleState z = log.samples.front().state;
    for (std::size_t i = 0; i < out.samples.size(); ++i) {
        auto& rec = out.samples[i];
        rec.state = z;
        const auto alpha = bicycle::slip_quantities(z, rec.input.delta, vp);
        rec.slip_angle_f = alpha.front;
        rec.slip_angle_r = alpha.rear;
        const auto forces = bicycle::axle_lateral_forces(z, rec.input, terrain, model, vp, loads);
        rec.front.fy = forces.front;
        rec.rear.fy = forces.rear;
        for (int k = 0; k < substeps; ++k) {
            const auto f = k == 0 ? forces
                                  : bicycle::axle_lateral_forces(z, rec.input, terrain, model, vp, loads);
            z = bicycle::step_euler(z, rec.input, f, vp, h);
        }
    }
    return out;
}

void NoiseModel::validate() const {
    for (double s : sigma) {
        if (!(s >= 0.0) || !std::isfinite(s)) throw InvalidArgument("noise deviations must be nonnegative");
    }
}

std::vector<bicycle::StateVector> add_noise(const TrajectoryLog& log, const NoiseModel& nm) {
    nm.validate();
    if (log.samples.empty()) throw InvalidArgument("cannot add noise to an empty log");
    Rng rng(mix_seed(nm.seed, 3));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<bicycle::StateVector> out;
    out.reserve(log.samples.size());
    for (const auto& rec : log.samples) {
        bicycle::StateVector m = rec.state.vector();
        for (int j = 0; j < 6; ++j) m(j) += nm.sigma[static_cast<std::size_t>(j)] * normal(rng);
        out.push_back(m);
    }
    return out;
}

} // namespace terra::plant
