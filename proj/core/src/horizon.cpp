#include "terra/horizon.hpp"

#include <cmath>

#include "terra/error.hpp"

namespace terra::eval {

namespace {

double rms_difference(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty()) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s / static_cast<double>(a.size()));
}

} // namespace

void HorizonConfig::validate() const {
    if (!(horizon > 0.0)) throw InvalidArgument("prediction horizon must be positive");
    if (!(stride > 0.0)) throw InvalidArgument("window stride must be positive");
    if (substeps < 1) throw InvalidArgument("horizon rollout needs at least one substep");
}

HorizonResult horizon_mse(const plant::TrajectoryLog& log, const nn::Mlp& model,
                          const bicycle::SurrogateTerrain& terrain,
                          const bicycle::VehicleParams& vp, const HorizonConfig& cfg,
                          const std::vector<bicycle::StateVector>& starts) {
    cfg.validate();
    if (!starts.empty() && starts.size() != log.size()) {
        throw InvalidArgument("window start states must cover every log sample");
    }
    const double dt = log.interval;
    const auto steps = static_cast<std::size_t>(std::lround(cfg.horizon / dt));
    const auto stride = static_cast<std::size_t>(std::max(1L, std::lround(cfg.stride / dt)));
    const auto loads = bicycle::AxleLoads::static_split(vp);
    const double h = dt / cfg.substeps;

    HorizonResult result;
    for (std::size_t i0 = 0; i0 + steps < log.size(); i0 += stride) {
        bicycle::BicycleState z =
            starts.empty() ? log.samples[i0].state : bicycle::BicycleState::from(starts[i0]);
        for (std::size_t j = 0; j < steps; ++j) {
            const auto& in = log.samples[i0 + j].input;
            for (int k = 0; k < cfg.substeps; ++k) {
                const auto f = bicycle::axle_lateral_forces(z, in, terrain, model, vp, loads);
                z = bicycle::step_euler(z, in, f, vp, h);
            }
        }
        const bicycle::StateVector err = z.vector() - log.samples[i0 + steps].state.vector();
        for (int s = 0; s < 6; ++s) result.mse[static_cast<std::size_t>(s)] += err(s) * err(s);
        ++result.windows;
    }
    if (result.windows == 0) {
        throw InvalidArgument("log of " + std::to_string(log.duration()) +
                              " s is shorter than the prediction horizon");
    }
    for (double& m : result.mse) m /= static_cast<double>(result.windows);
    return result;
}

double ForceComparison::rmse_front() const { return rms_difference(truth_front, surrogate_front); }
double ForceComparison::rmse_rear() const { return rms_difference(truth_rear, surrogate_rear); }
double ForceComparison::rmse() const {
    const double f = rmse_front();
    const double r = rmse_rear();
    return std::sqrt(0.5 * (f * f + r * r));
}

ForceComparison compare_forces(const plant::TrajectoryLog& log, const nn::Mlp& model,
                               const bicycle::SurrogateTerrain& terrain,
                               const bicycle::VehicleParams& vp) {
    const auto loads = bicycle::AxleLoads::static_split(vp);
    ForceComparison out;
    for (const auto& s : log.samples) {
        out.t.push_back(s.t);
        out.truth_front.push_back(0.5 * s.front.fy);
        out.truth_rear.push_back(0.5 * s.rear.fy);
        out.surrogate_front.push_back(model.value(bicycle::surrogate_input(
            s.input.slip_ratio_f, s.slip_angle_f, s.state.u, 0.5 * loads.front, s.input.delta_rate,
            terrain)));
        out.surrogate_rear.push_back(model.value(bicycle::surrogate_input(
            s.input.slip_ratio_r, s.slip_angle_r, s.state.u, 0.5 * loads.rear, 0.0, terrain)));
    }
    return out;
}

} // namespace terra::eval
