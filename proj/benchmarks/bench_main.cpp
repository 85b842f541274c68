#include <random>

#include <benchmark/benchmark.h>

#include "terra/bicycle.hpp"
#include "terra/mlp.hpp"
#include "terra/sampling.hpp"
#include "terra/terramechanics.hpp"
#include "terra/training.hpp"
#include "terra/ukf.hpp"

using namespace terra;

namespace {

nn::Mlp surrogate_shaped() {
    nn::Mlp m = nn::initialize({10, 35, 35, 35, 1}, 3);
    const auto space = sampling::InputSpace::defaults();
    Eigen::MatrixXd corners(2, 10);
    for (int d = 0; d < 10; ++d) {
        corners(0, d) = space.bounds[d].min;
        corners(1, d) = space.bounds[d].max;
    }
    m.set_input_norm(nn::Normalization::from_range(corners));
    auto out = nn::Normalization::identity(1);
    out.gain(0) = 1.0 / 1500.0;
    m.set_output_norm(out);
    return m;
}

Eigen::VectorXd interior_point() {
    Eigen::VectorXd x(10);
    x << 0.1, 0.05, 5.0, 3000.0, 0.1, 745000.0, 0.5, 0.0254, 4140.0, 0.2269;
    return x;
}

terramech::WheelState rolling() {
    terramech::WheelState ws;
    ws.slip_ratio = 0.15;
    ws.slip_angle = 0.08;
    ws.longitudinal_velocity = 5.0;
    ws.normal_load = 4000.0;
    ws.steering_rate = 0.1;
    return ws;
}

void BM_TireForces(benchmark::State& state) {
    const auto ws = rolling();
    const auto p = terramech::TerrainParams::clay();
    const int mesh = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(terramech::tire_forces(ws, p, {}, mesh));
}
BENCHMARK(BM_TireForces)->Arg(64)->Arg(128)->Arg(256);

void BM_TireForcesAtSinkage(benchmark::State& state) {
    const auto ws = rolling();
    const auto p = terramech::TerrainParams::clay();
    const double z0 = terramech::static_sinkage(ws.normal_load, p, {});
    for (auto _ : state) benchmark::DoNotOptimize(terramech::tire_forces_at_sinkage(ws, z0, p, {}));
}
BENCHMARK(BM_TireForcesAtSinkage);

void BM_MlpForward(benchmark::State& state) {
    const auto m = surrogate_shaped();
    const auto x = interior_point();
    for (auto _ : state) benchmark::DoNotOptimize(m.value(x));
}
BENCHMARK(BM_MlpForward);

void BM_MlpJacobian(benchmark::State& state) {
    const auto m = surrogate_shaped();
    const auto x = interior_point();
    for (auto _ : state) benchmark::DoNotOptimize(m.jacobian(x));
}
BENCHMARK(BM_MlpJacobian);

void BM_MlpHessianVec(benchmark::State& state) {
    const auto m = surrogate_shaped();
    const auto x = interior_point();
    const Eigen::VectorXd v = Eigen::VectorXd::Ones(10);
    for (auto _ : state) benchmark::DoNotOptimize(m.hessian_vec(x, v));
}
BENCHMARK(BM_MlpHessianVec);

void BM_UkfStep(benchmark::State& state) {
    const auto model = surrogate_shaped();
    bicycle::VehicleParams vp;
    const ukf::Surrogate s{&model,
                           bicycle::SurrogateTerrain::from(terramech::TerrainParams::clay(), {}), vp,
                           bicycle::AxleLoads::static_split(vp)};
    const auto cfg = ukf::UkfConfig::defaults();
    ukf::Gaussian prior;
    prior.mean << 0.0, 0.0, 0.1, 5.0, 0.2, 0.05, 0.7;
    prior.cov = ukf::AugMatrix::Identity() * 1e-2;
    bicycle::BicycleInput in;
    in.delta = 0.1;
    in.delta_rate = 0.05;
    in.slip_ratio_f = 0.1;
    in.slip_ratio_r = 0.1;
    const ukf::MeasVector z = prior.mean.head<ukf::kMeasDim>();
    for (auto _ : state) {
        benchmark::DoNotOptimize(ukf::update(ukf::predict(prior, in, s, cfg), z, cfg));
    }
}
BENCHMARK(BM_UkfStep)->Unit(benchmark::kMicrosecond);

} // namespace

BENCHMARK_MAIN();
