#include "terra/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>

#include "terra/content_hash.hpp"
#include "terra/csv.hpp"
#include "terra/error.hpp"
#include "terra/log.hpp"
#include "terra/model_io.hpp"
#include "terra/report.hpp"

namespace terra::pipeline {

namespace {

using Json = nlohmann::ordered_json;

std::string require(const config::RunConfig& cfg, const std::string& relative,
                    const std::string& producer) {
    const std::string p = cfg.path(relative);
    if (!std::filesystem::exists(p)) {
        throw IoError("missing '" + p + "'; run `terra " + producer + "` with this config first");
    }
    return p;
}

void write_json(const Json& doc, const std::string& path) {
    csv::ensure_parent(path);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << doc.dump(2) << '\n';
}

std::string status_name(nn::MemberStatus s) { return s == nn::MemberStatus::Ok ? "ok" : "diverged"; }

ukf::Surrogate surrogate_for(const config::RunConfig& cfg, const nn::Mlp& model) {
    ukf::Surrogate s;
    s.model = &model;
    s.terrain = bicycle::SurrogateTerrain::from(cfg.terrain, cfg.geometry);
    s.vehicle = cfg.vehicle;
    s.loads = bicycle::AxleLoads::static_split(cfg.vehicle);
    return s;
}

nn::Mlp load_model(const config::RunConfig& cfg) {
    nn::Mlp model = nn::load(require(cfg, cfg.paths.model, "train"));
    if (model.input_dim() != sampling::kInputDim) {
        throw InvalidArgument("model takes " + std::to_string(model.input_dim()) + " inputs, expected 10");
    }
    return model;
}

std::string eval_file(const config::RunConfig& cfg, const std::string& name) {
    return cfg.path((std::filesystem::path(cfg.paths.evaluation) / name).string());
}

std::string report_file(const config::RunConfig& cfg, const std::string& name) {
    return cfg.path((std::filesystem::path(cfg.paths.report) / name).string());
}

} // namespace

void gen_data(const config::RunConfig& cfg) {
    log::info("sampling " + std::to_string(cfg.dataset_count) + " rows");
    const auto data = sampling::generate_dataset(cfg.space, cfg.dataset_count, cfg.dataset_seed(),
                                                 cfg.geometry, cfg.generate);
    const std::string csv_path = cfg.path(cfg.paths.dataset);
    sampling::write_dataset_csv(data, csv_path);
    sampling::write_dataset_manifest(data, cfg.space, cfg.geometry, csv_path,
                                     cfg.path(cfg.paths.dataset_manifest));
    log::info("wrote " + csv_path);
}

void train(const config::RunConfig& cfg) {
    const std::string data_path = require(cfg, cfg.paths.dataset, "gen-data");
    const auto data = sampling::read_dataset_csv(data_path);
    const auto split = sampling::split_dataset(data, cfg.split_seed());
    log::info("training " + std::to_string(cfg.training.ensemble_size) + " members on " +
              std::to_string(split.train.rows()) + " rows");
    const auto result = nn::train(split, cfg.training);
    const auto& rep = result.report;

    csv::Table members;
    members.header = {"member", "selected", "ok", "epochs", "train_mse", "val_mse", "test_mse",
                      "alpha", "beta", "gamma"};
    Json member_json = Json::array();
    for (const auto& m : rep.members) {
        members.rows.push_back({static_cast<double>(m.index), m.index == rep.selected ? 1.0 : 0.0,
                                m.status == nn::MemberStatus::Ok ? 1.0 : 0.0,
                                static_cast<double>(m.epochs), m.train_mse, m.val_mse, m.test_mse,
                                m.alpha, m.beta, m.gamma});
        member_json.push_back(Json{{"index", m.index}, {"seed", m.seed}, {"solver", m.solver},
                                   {"status", status_name(m.status)}, {"epochs", m.epochs},
                                   {"train_mse", m.train_mse}, {"val_mse", m.val_mse},
                                   {"test_mse", m.test_mse}, {"message", m.message}});
    }
    csv::write(members, cfg.path(cfg.paths.training_report));

    nn::ModelFile file{result.model, Json::object()};
    file.manifest = Json{{"seed", cfg.training.seed},
                         {"dataset", std::filesystem::path(data_path).filename().string()},
                         {"dataset_hash", git_blob_hash_file(data_path)},
                         {"targets", data.target_names},
                         {"layer_sizes", result.model.widths()},
                         {"selected", rep.selected},
                         {"training_seconds", rep.seconds},
                         {"members", member_json}};
    nn::save(file, cfg.path(cfg.paths.model));
    const auto& best = rep.members[static_cast<std::size_t>(rep.selected)];
    log::info("selected member " + std::to_string(rep.selected) + ": test RMSE " +
              csv::format_sig(std::sqrt(best.test_mse), 5) + " N after " +
              csv::format_sig(rep.seconds, 4) + " s");
}

void simulate(const config::RunConfig& cfg) {
    const auto traj = plant::simulate(cfg.scenario, cfg.terrain, cfg.geometry, cfg.vehicle, cfg.plant);
    const auto meas = plant::add_noise(traj, cfg.noise);
    const std::string log_path = cfg.path(cfg.paths.log);
    const std::string meas_path = cfg.path(cfg.paths.measurements);
    plant::write_log_csv(traj, log_path);
    plant::write_measurements_csv(traj, meas, meas_path);
    Json manifest = config::to_json(cfg);
    manifest["samples"] = traj.size();
    manifest["noise_seed"] = cfg.noise.seed;
    manifest["log_hash"] = git_blob_hash_file(log_path);
    manifest["measurements_hash"] = git_blob_hash_file(meas_path);
    write_json(manifest, cfg.path(cfg.paths.log_manifest));
    log::info("simulated " + std::to_string(traj.size()) + " samples to " + log_path);
}

void estimate(const config::RunConfig& cfg) {
    const nn::Mlp model = load_model(cfg);
    const auto traj = plant::read_log_csv(require(cfg, cfg.paths.log, "simulate"));
    const auto meas = plant::read_measurements_csv(require(cfg, cfg.paths.measurements, "simulate"));
    std::vector<double> times;
    std::vector<bicycle::BicycleInput> inputs;
    for (const auto& s : traj.samples) {
        times.push_back(s.t);
        inputs.push_back(s.input);
    }
    const auto trace = ukf::run_estimator(times, inputs, meas, cfg.ukf, surrogate_for(cfg, model),
                                          cfg.n0, cfg.n0_std * cfg.n0_std);
    ukf::write_estimate_csv(trace, cfg.path(cfg.paths.estimate));
    if (!trace.error.empty()) {
        throw ConvergenceError("filter stopped at t = " + std::to_string(trace.points.back().t) +
                               " s: " + trace.error + " (partial trace written)");
    }
    log::info("final n estimate " + csv::format_sig(trace.final_n(), 6));
}

EvaluationSummary evaluate(const config::RunConfig& cfg) {
    const nn::Mlp model = load_model(cfg);
    const auto traj = plant::read_log_csv(require(cfg, cfg.paths.log, "simulate"));
    const auto trace = ukf::read_estimate_csv(require(cfg, cfg.paths.estimate, "estimate"));
    if (trace.points.empty()) throw InvalidArgument("estimate trace is empty");

    std::vector<bicycle::StateVector> starts;
    if (cfg.filtered_starts) {
        if (trace.points.size() != traj.size()) {
            throw InvalidArgument("filtered starts need an estimate for every log sample");
        }
        for (const auto& p : trace.points) starts.push_back(p.mean.head<6>());
    }
    EvaluationSummary summary;
    summary.estimated_n = trace.final_n();
    auto terrain = bicycle::SurrogateTerrain::from(cfg.terrain, cfg.geometry);
    std::vector<report::HorizonRow> rows;
    for (const auto& [label, n] : {std::pair<std::string, double>{"initial", cfg.n0},
                                   {"estimated", summary.estimated_n},
                                   {"true", cfg.terrain.n}}) {
        terrain.n = n;
        rows.push_back(report::HorizonRow{
            label, n, eval::horizon_mse(traj, model, terrain, cfg.vehicle, cfg.horizon, starts)});
    }
    report::write_horizon_table(rows, eval_file(cfg, "horizon_mse.csv"));

    terrain.n = cfg.terrain.n;
    const auto forces = eval::compare_forces(traj, model, terrain, cfg.vehicle);
    report::write_force_csv(forces, eval_file(cfg, "forces.csv"));
    summary.force_rmse = forces.rmse();
    summary.force_rmse_front = forces.rmse_front();
    summary.force_rmse_rear = forces.rmse_rear();
    write_json(Json{{"estimated_n", summary.estimated_n},
                    {"true_n", cfg.terrain.n},
                    {"initial_n", cfg.n0},
                    {"force_rmse", summary.force_rmse},
                    {"force_rmse_front", summary.force_rmse_front},
                    {"force_rmse_rear", summary.force_rmse_rear}},
               eval_file(cfg, "summary.json"));
    log::info("force RMSE " + csv::format_sig(summary.force_rmse, 5) + " N per tire");
    return summary;
}

void report(const config::RunConfig& cfg) {
    const auto trace = ukf::read_estimate_csv(require(cfg, cfg.paths.estimate, "estimate"));
    if (trace.points.empty()) throw InvalidArgument("estimate trace is empty; nothing to report");
    const auto traj = plant::read_log_csv(require(cfg, cfg.paths.log, "simulate"));
    const auto rows = report::read_horizon_table(
        require(cfg, (std::filesystem::path(cfg.paths.evaluation) / "horizon_mse.csv").string(), "evaluate"));
    const auto forces = report::read_force_csv(
        require(cfg, (std::filesystem::path(cfg.paths.evaluation) / "forces.csv").string(), "evaluate"));

    report::write_convergence_table(report::ConvergenceRow{cfg.terrain.n, cfg.n0, trace.final_n()},
                                    report_file(cfg, "convergence.csv"));
    report::write_horizon_table(rows, report_file(cfg, "horizon_mse.csv"));
    csv::Table rmse;
    rmse.header = {"rmse_front", "rmse_rear", "rmse"};
    rmse.rows.push_back({forces.rmse_front(), forces.rmse_rear(), forces.rmse()});
    csv::write(rmse, report_file(cfg, "force_rmse.csv"));

    report::plot_estimate(trace, cfg.terrain.n, report_file(cfg, "n_estimate.svg"));
    report::plot_forces(forces, report_file(cfg, "lateral_forces.svg"));
    report::plot_trajectory(traj, trace, report_file(cfg, "trajectory.svg"));

    Json hashes = Json::object();
    for (const char* name : {"convergence.csv", "horizon_mse.csv", "force_rmse.csv"}) {
        hashes[name] = git_blob_hash_file(report_file(cfg, name));
    }
    write_json(Json{{"seed", cfg.seed}, {"hashes", hashes}}, report_file(cfg, "manifest.json"));
    log::info("report written to " + cfg.path(cfg.paths.report));
}

BenchResult bench(const config::RunConfig& cfg, std::size_t steps) {
    if (steps == 0) throw InvalidArgument("benchmark needs at least one step");
    const nn::Mlp model = load_model(cfg);
    const auto traj = plant::read_log_csv(require(cfg, cfg.paths.log, "simulate"));
    const auto meas = plant::read_measurements_csv(require(cfg, cfg.paths.measurements, "simulate"));
    if (traj.size() < 2) throw InvalidArgument("benchmark needs a log with at least two samples");
    cfg.ukf.validate();
    const auto s = surrogate_for(cfg, model);

    ukf::Gaussian g;
    auto reset = [&] {
        g.mean << meas[0], cfg.n0;
        g.cov.setZero();
        g.cov.topLeftCorner<6, 6>() = cfg.ukf.R;
        g.cov(ukf::kN, ukf::kN) = cfg.n0_std * cfg.n0_std;
    };
    reset();
    std::vector<double> ms;
    ms.reserve(steps);
    std::size_t k = 1;
    for (std::size_t i = 0; i < steps; ++i) {
        if (k >= traj.size()) {
            k = 1;
            reset();
        }
        const auto t0 = std::chrono::steady_clock::now();
        g = ukf::update(ukf::predict(g, traj.samples[k - 1].input, s, cfg.ukf), meas[k], cfg.ukf).posterior;
        const auto t1 = std::chrono::steady_clock::now();
        ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
        ++k;
    }
    BenchResult r;
    r.steps = steps;
    for (double v : ms) r.mean_ms += v;
    r.mean_ms /= static_cast<double>(steps);
    r.max_ms = *std::max_element(ms.begin(), ms.end());
    std::nth_element(ms.begin(), ms.begin() + static_cast<long>(steps / 2), ms.end());
    r.median_ms = ms[steps / 2];
    return r;
}

void run_all(const config::RunConfig& cfg) {
    gen_data(cfg);
    train(cfg);
    simulate(cfg);
    estimate(cfg);
    evaluate(cfg);
    report(cfg);
}

} // namespace terra::pipeline
