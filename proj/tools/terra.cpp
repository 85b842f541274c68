// terra: dataset generation, surrogate training, simulation, estimation and
// reporting from one config file.
#include <cstdio>
#include <exception>
#include <functional>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "terra/error.hpp"
#include "terra/log.hpp"
#include "terra/pipeline.hpp"

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("-c,--config", c.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", c.seed, "master seed (overrides the config)");
    cmd->add_option("--out", c.out, "run directory (overrides the config)");
}

terra::config::RunConfig resolve(const Common& c) {
    auto cfg = terra::config::load(c.config);
    if (c.seed) cfg.set_seed(*c.seed);
    if (c.out) cfg.out_dir = *c.out;
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Terramechanics surrogate training and sinkage-exponent estimation"};
    app.require_subcommand(1);
    bool quiet = false;
    bool verbose = false;
    app.add_flag("-q,--quiet", quiet, "only print warnings and errors");
    app.add_flag("-v,--verbose", verbose, "print debug messages");

    Common common;
    std::function<void()> action;
    auto command = [&](const char* name, const char* help, std::function<void(const terra::config::RunConfig&)> fn) {
        CLI::App* cmd = app.add_subcommand(name, help);
        add_common(cmd, common);
        cmd->callback([&, fn] { action = [&, fn] { fn(resolve(common)); }; });
        return cmd;
    };

    command("gen-data", "sample the input space and label it with the reference model", terra::pipeline::gen_data);
    command("train", "train the surrogate ensemble and keep the best member", terra::pipeline::train);
    command("simulate", "run the plant scenario and write noisy measurements", terra::pipeline::simulate);
    command("estimate", "run the filter over the simulated log", terra::pipeline::estimate);
    command("evaluate", "score horizon predictions and surrogate forces", [](const auto& cfg) {
        const auto s = terra::pipeline::evaluate(cfg);
        std::printf("estimated n      %.6g\n", s.estimated_n);
        std::printf("force RMSE [N]   %.6g (front %.6g, rear %.6g)\n", s.force_rmse,
                    s.force_rmse_front, s.force_rmse_rear);
    });
    command("report", "write tables and figures", terra::pipeline::report);
    command("run", "gen-data, train, simulate, estimate, evaluate and report", terra::pipeline::run_all);

    std::size_t steps = 2000;
    CLI::App* bench = command("bench", "time filter steps on the simulated log", [&steps](const auto& cfg) {
        const auto r = terra::pipeline::bench(cfg, steps);
        std::printf("filter steps     %zu\n", r.steps);
        std::printf("mean [ms]        %.4f\n", r.mean_ms);
        std::printf("median [ms]      %.4f\n", r.median_ms);
        std::printf("max [ms]         %.4f\n", r.max_ms);
    });
    bench->add_option("--steps", steps, "number of predict+update steps")->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);
    if (quiet) terra::log::set_level(terra::log::Level::Warning);
    if (verbose) terra::log::set_level(terra::log::Level::Debug);
    try {
        action();
    } catch (const terra::InvalidArgument& e) {
        std::fprintf(stderr, "terra: invalid configuration or input: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "terra: %s\n", e.what());
        return 1;
    }
    return 0;
}
