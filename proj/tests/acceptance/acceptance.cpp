// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits non-zero when any criterion fails.
//
//   terra_acceptance <config.json> <work-dir> [--reuse]
//
// --reuse skips the full pipeline when its outputs already exist below
// <work-dir>/full.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Cholesky>

#include "terra/config.hpp"
#include "terra/error.hpp"
#include "terra/horizon.hpp"
#include "terra/log.hpp"
#include "terra/mlp.hpp"
#include "terra/model_io.hpp"
#include "terra/pipeline.hpp"
#include "terra/plant.hpp"
#include "terra/report.hpp"
#include "terra/sampling.hpp"
#include "terra/terramechanics.hpp"
#include "terra/ukf.hpp"

namespace fs = std::filesystem;
using namespace terra;

namespace {

// Tolerances.
constexpr double kFidelityStdFraction = 0.05;
constexpr double kTraceRmseMax = 150.0;       // N per tire
constexpr double kTrainingSecondsMax = 1800.0;
constexpr double kJacobianTol = 1e-6;
constexpr double kHessianTol = 1e-4;
constexpr int kDerivativePoints = 1000;
constexpr double kConvergenceTol = 0.05;
constexpr double kMonotoneSlack = 0.005;      // on 1 s block means of |n - n*|
constexpr double kEstimateSecondsMax = 120.0;
constexpr double kSelfConsistencyTol = 0.005;
constexpr double kHorizonReduction = 3.0;
constexpr double kSpeedMseRelTol = 1e-12;
constexpr double kReconstructionTol = 1e-10;
constexpr double kWeightSumTol = 1e-14;
constexpr double kStepMsMax = 10.0;
constexpr std::size_t kBenchSteps = 1000;
constexpr double kMeshTol = 5e-3;

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void print(int id, const std::string& name, const Outcome& o) {
    std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
}

void criterion(int id, const std::string& name, const std::function<Outcome()>& body) {
    try {
        print(id, name, body());
    } catch (const std::exception& e) {
        print(id, name, {false, std::string("error: ") + e.what()});
    }
}

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

ukf::Surrogate surrogate(const config::RunConfig& cfg, const nn::Mlp& model) {
    return {&model, bicycle::SurrogateTerrain::from(cfg.terrain, cfg.geometry), cfg.vehicle,
            bicycle::AxleLoads::static_split(cfg.vehicle)};
}

bool outputs_exist(const config::RunConfig& cfg) {
    for (const auto* rel : {"report/manifest.json", "model/model.json", "sim/log.csv",
                            "estimate/estimate.csv", "eval/horizon_mse.csv", "eval/forces.csv"}) {
        if (!fs::exists(cfg.path(rel))) return false;
    }
    return true;
}

// Inputs: input-envelope corners first, then uniform interior points.
std::vector<Eigen::VectorXd> probe_points(int count, std::uint64_t seed) {
    const auto space = sampling::InputSpace::defaults();
    std::mt19937_64 rng(seed);
    std::vector<Eigen::VectorXd> pts;
    for (int c = 0; c < 1024 && static_cast<int>(pts.size()) < count / 4; ++c) {
        Eigen::VectorXd x(10);
        for (int d = 0; d < 10; ++d) x(d) = ((c >> d) & 1) ? space.bounds[d].max : space.bounds[d].min;
        pts.push_back(x);
    }
    while (static_cast<int>(pts.size()) < count) {
        Eigen::VectorXd x(10);
        for (int d = 0; d < 10; ++d) {
            x(d) = std::uniform_real_distribution<double>(space.bounds[d].min, space.bounds[d].max)(rng);
        }
        pts.push_back(x);
    }
    return pts;
}

Outcome fidelity(const config::RunConfig& cfg) {
    const auto file = nn::load_file(cfg.path(cfg.paths.model));
    const auto& m = file.manifest;
    const auto selected = m.at("selected").get<std::size_t>();
    const double test_rmse = std::sqrt(m.at("members").at(selected).at("test_mse").get<double>());
    const double seconds = m.at("training_seconds").get<double>();

    const auto data = sampling::read_dataset_csv(cfg.path(cfg.paths.dataset));
    const auto split = sampling::split_dataset(data, cfg.split_seed());
    const Eigen::VectorXd y = split.test.targets.col(0);
    const double std_dev = std::sqrt((y.array() - y.mean()).square().sum() / static_cast<double>(y.size()));

    const auto forces = report::read_force_csv(cfg.path((fs::path(cfg.paths.evaluation) / "forces.csv").string()));
    const double trace = std::max(forces.rmse_front(), forces.rmse_rear());

    const double ratio = test_rmse / std_dev;
    Outcome o;
    o.pass = ratio <= kFidelityStdFraction && trace <= kTraceRmseMax && seconds <= kTrainingSecondsMax;
    o.detail = "test RMSE " + fmt("%.2f", test_rmse) + " N = " + fmt("%.4f", ratio) +
               " of std (<= 0.05); trace RMSE front " + fmt("%.2f", forces.rmse_front()) + " N, rear " +
               fmt("%.2f", forces.rmse_rear()) + " N (<= 150); training " + fmt("%.0f", seconds) +
               " s (<= 1800)";
    return o;
}

Outcome differentiability(const config::RunConfig& cfg) {
    const auto m = nn::load(cfg.path(cfg.paths.model));
    const Eigen::VectorXd gain = m.input_norm().gain;
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> normal;
    double worst_j = 0.0;
    double worst_h = 0.0;
    for (const auto& x : probe_points(kDerivativePoints, 31)) {
        const Eigen::RowVectorXd jac = m.jacobian(x).row(0);
        Eigen::RowVectorXd fd(10);
        for (int d = 0; d < 10; ++d) {
            Eigen::VectorXd e = Eigen::VectorXd::Zero(10);
            e(d) = 1e-5 / gain(d);
            fd(d) = (m.value(x + e) - m.value(x - e)) / (2.0 * e(d));
        }
        const Eigen::RowVectorXd a = jac.cwiseQuotient(gain.transpose());
        const Eigen::RowVectorXd b = fd.cwiseQuotient(gain.transpose());
        worst_j = std::max(worst_j, (a - b).cwiseAbs().maxCoeff() / a.cwiseAbs().maxCoeff());

        Eigen::VectorXd vn(10);
        for (int d = 0; d < 10; ++d) vn(d) = normal(rng);
        const Eigen::VectorXd v = vn.cwiseQuotient(gain);
        const double h = 1e-4;
        const Eigen::VectorXd hv = m.hessian_vec(x, v).cwiseQuotient(gain);
        const Eigen::VectorXd hfd =
            ((m.jacobian(x + h * v).row(0) - m.jacobian(x - h * v).row(0)).transpose() / (2.0 * h))
                .cwiseQuotient(gain);
        worst_h = std::max(worst_h, (hv - hfd).cwiseAbs().maxCoeff() / hv.cwiseAbs().maxCoeff());
    }
    return {worst_j <= kJacobianTol && worst_h <= kHessianTol,
            "jacobian max rel err " + fmt("%.2e", worst_j) + " (<= 1e-6), hessian-vec " +
                fmt("%.2e", worst_h) + " (<= 1e-4) over 1000 points"};
}

Outcome convergence(const config::RunConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    pipeline::estimate(cfg);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto trace = ukf::read_estimate_csv(cfg.path(cfg.paths.estimate));
    const double truth = cfg.terrain.n;
    const double final_n = trace.final_n();
    const double err = std::abs(final_n - truth) / truth;

    // 1 s block means of |n - n*| over the last 75% of the run.
    const double t_end = trace.points.back().t;
    const double t_start = trace.points.front().t + 0.25 * (t_end - trace.points.front().t);
    std::vector<double> blocks;
    double sum = 0.0;
    int count = 0;
    double edge = t_start + 1.0;
    for (const auto& p : trace.points) {
        if (p.t < t_start) continue;
        if (p.t >= edge) {
            if (count > 0) blocks.push_back(sum / count);
            sum = 0.0;
            count = 0;
            edge += 1.0;
        }
        sum += std::abs(p.mean(ukf::kN) - truth);
        ++count;
    }
    double worst_rise = 0.0;
    for (std::size_t i = 1; i < blocks.size(); ++i) worst_rise = std::max(worst_rise, blocks[i] - blocks[i - 1]);

    Outcome o;
    o.pass = err <= kConvergenceTol && worst_rise <= kMonotoneSlack && seconds <= kEstimateSecondsMax;
    o.detail = "final n " + fmt("%.4f", final_n) + " vs " + fmt("%.2f", truth) + " (" +
               fmt("%.2f", 100.0 * err) + "% <= 5%); worst 1 s block rise of |n - n*| after 25% " +
               fmt("%.4f", worst_rise) + " (<= 0.005); estimate " + fmt("%.1f", seconds) + " s (<= 120)";
    return o;
}

Outcome self_consistency(const config::RunConfig& cfg) {
    const auto model = nn::load(cfg.path(cfg.paths.model));
    const auto s = surrogate(cfg, model);
    const auto log = plant::read_log_csv(cfg.path(cfg.paths.log));
    const auto replay = plant::replay_surrogate(log, model, s.terrain, cfg.vehicle, 2);
    std::vector<double> t;
    std::vector<bicycle::BicycleInput> in;
    std::vector<bicycle::StateVector> meas;
    for (const auto& smp : replay.samples) {
        t.push_back(smp.t);
        in.push_back(smp.input);
        meas.push_back(smp.state.vector());
    }
    const auto trace = ukf::run_estimator(t, in, meas, cfg.ukf, s, cfg.n0, cfg.n0_std * cfg.n0_std);
    if (!trace.error.empty()) return {false, "filter stopped: " + trace.error};
    const double err = std::abs(trace.final_n() - cfg.terrain.n) / cfg.terrain.n;
    return {err <= kSelfConsistencyTol,
            "final n " + fmt("%.5f", trace.final_n()) + " (" + fmt("%.3f", 100.0 * err) + "% <= 0.5%)"};
}

Outcome prediction(const config::RunConfig& cfg) {
    const auto rows = report::read_horizon_table(cfg.path((fs::path(cfg.paths.evaluation) / "horizon_mse.csv").string()));
    const report::HorizonRow* initial = nullptr;
    const report::HorizonRow* estimated = nullptr;
    for (const auto& r : rows) {
        if (r.label == "initial") initial = &r;
        if (r.label == "estimated") estimated = &r;
    }
    if (initial == nullptr || estimated == nullptr) return {false, "horizon table lacks initial/estimated rows"};
    const auto& a = initial->result.mse;
    const auto& b = estimated->result.mse;
    const double ry = a[1] / b[1];
    const double rv = a[4] / b[4];
    const double rw = a[5] / b[5];
    const double du = std::abs(a[3] - b[3]) / std::max(a[3], 1e-300);
    Outcome o;
    o.pass = ry >= kHorizonReduction && rv >= kHorizonReduction && rw >= kHorizonReduction &&
             du <= kSpeedMseRelTol;
    o.detail = "MSE ratio n0/n-hat: y " + fmt("%.2f", ry) + ", v " + fmt("%.2f", rv) + ", omega_z " +
               fmt("%.2f", rw) + " (>= 3); u rel diff " + fmt("%.1e", du);
    return o;
}

Outcome ukf_identities() {
    const auto cfg = ukf::UkfConfig::defaults();
    std::mt19937_64 rng(8);
    std::normal_distribution<double> normal;
    double worst_mean = 0.0;
    double worst_cov = 0.0;
    double worst_wm = 0.0;
    double worst_wc = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        ukf::AugVector mean;
        ukf::AugMatrix a;
        for (int i = 0; i < ukf::kStateDim; ++i) {
            mean(i) = normal(rng);
            for (int j = 0; j < ukf::kStateDim; ++j) a(i, j) = normal(rng);
        }
        const ukf::AugMatrix cov = a * a.transpose() + 0.1 * ukf::AugMatrix::Identity();
        const auto sp = ukf::sigma_points(mean, cov, cfg);
        const auto g = ukf::recombine(sp.points, sp);
        worst_mean = std::max(worst_mean, (g.mean - mean).cwiseAbs().maxCoeff());
        worst_cov = std::max(worst_cov, (g.cov - cov).cwiseAbs().maxCoeff());
        // Relative to the weight magnitudes: at alpha = 1e-3 the centre weight is ~ -1e6.
        worst_wm = std::max(worst_wm, std::abs(sp.wm.sum() - 1.0) / sp.wm.cwiseAbs().sum());
        worst_wc = std::max(worst_wc, std::abs(sp.wc.sum() - (2.0 - cfg.alpha * cfg.alpha + cfg.beta)) /
                                          sp.wc.cwiseAbs().sum());
    }

    // Extreme measurement noise: gain to zero and to the measured-block identity.
    ukf::Gaussian prior;
    prior.mean.setZero();
    prior.cov = ukf::AugMatrix::Identity() * 0.5;
    prior.cov(0, 6) = prior.cov(6, 0) = 0.1;
    const ukf::MeasVector z = ukf::MeasVector::Constant(0.3);
    auto huge = cfg;
    huge.R = ukf::MeasMatrix::Identity() * 1e12;
    const double gain_huge = ukf::update(prior, z, huge).gain.norm();
    auto tiny = cfg;
    tiny.R = ukf::MeasMatrix::Identity() * 1e-12;
    const auto u_tiny = ukf::update(prior, z, tiny);
    const double gain_tiny =
        (u_tiny.gain.topRows<ukf::kMeasDim>() - ukf::MeasMatrix::Identity()).cwiseAbs().maxCoeff();

    Outcome o;
    o.pass = ukf::kSigmaCount == 15 && worst_mean <= kReconstructionTol && worst_cov <= kReconstructionTol &&
             worst_wm <= kWeightSumTol && worst_wc <= kWeightSumTol && gain_huge <= 1e-6 && gain_tiny <= 1e-6;
    o.detail = std::to_string(ukf::kSigmaCount) + " points; mean err " + fmt("%.1e", worst_mean) +
               ", cov err " + fmt("%.1e", worst_cov) + " (<= 1e-10); weight sum rel err " + fmt("%.1e", worst_wm) +
               "/" + fmt("%.1e", worst_wc) + "; |K| at R=1e12 " + fmt("%.1e", gain_huge) +
               ", |K - I| at R=1e-12 " + fmt("%.1e", gain_tiny);
    return o;
}

Outcome performance(const config::RunConfig& cfg) {
    const auto r = pipeline::bench(cfg, kBenchSteps);
    return {r.steps >= kBenchSteps && r.mean_ms <= kStepMsMax,
            std::to_string(r.steps) + " steps, mean " + fmt("%.3f", r.mean_ms) + " ms (<= 10), median " +
                fmt("%.3f", r.median_ms) + " ms, max " + fmt("%.3f", r.max_ms) + " ms"};
}

Outcome terramechanics(const config::RunConfig& cfg) {
    const auto& p = cfg.terrain;
    const auto& geom = cfg.geometry;
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> slip(-1.0, 1.0), angle(-0.6, 0.6), load(500.0, 5500.0),
        rate(-0.56, 0.56), speed(2.0, 10.0);
    double worst_balance = 0.0;
    double worst_node = -1e300;
    int sign_errors = 0;
    double worst_mesh = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        terramech::WheelState ws;
        ws.slip_ratio = slip(rng);
        ws.slip_angle = angle(rng);
        ws.longitudinal_velocity = speed(rng);
        ws.normal_load = load(rng);
        ws.steering_rate = 0.0;
        const double z0 = terramech::static_sinkage(ws.normal_load, p, geom);
        const auto f = terramech::tire_forces_at_sinkage(ws, z0, p, geom);
        worst_balance = std::max(worst_balance, std::abs(f.fz - ws.normal_load) / ws.normal_load);
        if (std::abs(ws.slip_angle) > 1e-3 && f.fy * ws.slip_angle >= 0.0) ++sign_errors;

        ws.steering_rate = rate(rng);
        for (const auto& node : terramech::contact_profile(ws, z0, p, geom)) {
            worst_node = std::max(worst_node, node.tau - (p.c + node.sigma * std::tan(p.phi)));
        }
        if (trial % 10 == 0) {
            const auto a = terramech::tire_forces(ws, p, geom, 128);
            const auto b = terramech::tire_forces(ws, p, geom, 256);
            for (auto [x, y] : {std::pair{a.fx, b.fx}, {a.fy, b.fy}, {a.fz, b.fz}}) {
                worst_mesh = std::max(worst_mesh, std::abs(x - y) / std::max(std::abs(y), 1e-12));
            }
        }
    }
    Outcome o;
    o.pass = worst_balance < 1e-3 && sign_errors == 0 && worst_node <= 0.0 && worst_mesh < kMeshTol;
    o.detail = "load balance " + fmt("%.1e", worst_balance) + " (< 1e-3); sign errors " +
               std::to_string(sign_errors) + "; node shear excess " + fmt("%.1e", worst_node) +
               " Pa (<= 0); mesh 128->256 " + fmt("%.2e", worst_mesh) + " (< 5e-3)";
    return o;
}

Outcome reproducibility(config::RunConfig cfg, const fs::path& work) {
    cfg.dataset_count = 600;
    cfg.training.ensemble_size = 2;
    cfg.training.max_epochs = 5;
    cfg.scenario.duration = 10.0;
    std::vector<std::string> names{"convergence.csv", "horizon_mse.csv", "force_rmse.csv"};
    std::vector<std::string> first;
    for (const char* run : {"repro_a", "repro_b"}) {
        fs::remove_all(work / run);
        cfg.out_dir = (work / run).string();
        pipeline::run_all(cfg);
        std::vector<std::string> blobs;
        for (const auto& n : names) blobs.push_back(slurp(fs::path(cfg.path(cfg.paths.report)) / n));
        blobs.push_back(slurp(cfg.path(cfg.paths.estimate)));
        if (first.empty()) {
            first = blobs;
            continue;
        }
        for (std::size_t i = 0; i < blobs.size(); ++i) {
            if (blobs[i].empty() || blobs[i] != first[i]) {
                return {false, "run outputs differ in " + (i < names.size() ? names[i] : "estimate.csv")};
            }
        }
    }
    return {true, "report CSVs and estimate trace byte-identical across two seeded runs"};
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 3) {
        std::fprintf(stderr, "usage: %s <config.json> <work-dir> [--reuse]\n", argv[0]);
        return 2;
    }
    const bool reuse = argc > 3 && std::string(argv[3]) == "--reuse";
    const fs::path work = fs::absolute(argv[2]);
    log::set_level(log::Level::Warning);

    config::RunConfig cfg = config::load(argv[1]);
    cfg.out_dir = (work / "full").string();
    try {
        if (!(reuse && outputs_exist(cfg))) {
            fs::remove_all(cfg.out_dir);
            pipeline::run_all(cfg);
        }
    } catch (const std::exception& e) {
        std::printf("FAIL pipeline: %s\n", e.what());
        return 1;
    }

    criterion(1, "surrogate fidelity", [&] { return fidelity(cfg); });
    criterion(2, "differentiability", [&] { return differentiability(cfg); });
    criterion(3, "estimator convergence", [&] { return convergence(cfg); });
    criterion(4, "self-consistency", [&] { return self_consistency(cfg); });
    criterion(5, "prediction improvement", [&] { return prediction(cfg); });
    criterion(6, "UKF identities", [] { return ukf_identities(); });
    criterion(7, "performance", [&] { return performance(cfg); });
    criterion(8, "terramechanics invariants", [&] { return terramechanics(cfg); });
    criterion(9, "reproducibility", [&] { return reproducibility(cfg, work); });

    std::printf("%d of 9 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
