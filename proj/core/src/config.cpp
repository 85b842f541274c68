#include "terra/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "terra/error.hpp"
#include "terra/random.hpp"

namespace terra::config {

namespace {

using Json = nlohmann::json;

// Reads typed keys from one JSON object and rejects the keys it never read.
class Section {
public:
    Section(const Json& doc, std::string name) : name_(std::move(name)) {
        if (!doc.is_object()) throw InvalidArgument("config section '" + name_ + "' must be an object");
        doc_ = &doc;
    }

    bool has(const std::string& key) const { return doc_->contains(key); }

    template <typename T>
    void get(const std::string& key, T& out) {
        seen_.insert(key);
        if (!doc_->contains(key)) return;
        try {
            out = doc_->at(key).get<T>();
        } catch (const nlohmann::json::exception&) {
            throw InvalidArgument("config key '" + qualified(key) + "' has the wrong type");
        }
    }

    void mark(const std::string& key) { seen_.insert(key); }

    const Json& child(const std::string& key) {
        seen_.insert(key);
        return doc_->at(key);
    }

    std::string qualified(const std::string& key) const {
        return name_.empty() ? key : name_ + "." + key;
    }

    void finish() const {
        for (const auto& [key, value] : doc_->items()) {
            if (!seen_.count(key)) throw InvalidArgument("unknown config key '" + qualified(key) + "'");
        }
    }

private:
    const Json* doc_ = nullptr;
    std::string name_;
    std::set<std::string> seen_;
};

template <typename F>
void section(Section& parent, const std::string& key, F&& read) {
    parent.mark(key);
    if (!parent.has(key)) return;
    Section s(parent.child(key), parent.qualified(key));
    read(s);
    s.finish();
}

terramech::TerrainParams terrain_preset(const std::string& name) {
    if (name == "clay") return terramech::TerrainParams::clay();
    throw InvalidArgument("unknown terrain preset '" + name + "' (available: clay)");
}

} // namespace

std::uint64_t RunConfig::dataset_seed() const { return mix_seed(seed, 1); }
std::uint64_t RunConfig::split_seed() const { return mix_seed(seed, 2); }
std::uint64_t RunConfig::training_seed() const { return mix_seed(seed, 3); }
std::uint64_t RunConfig::noise_seed() const { return mix_seed(seed, 4); }

void RunConfig::set_seed(std::uint64_t s) {
    seed = s;
    training.seed = training_seed();
    noise.seed = noise_seed();
    scenario.seed = s;
}

std::string RunConfig::path(const std::string& relative) const {
    const std::filesystem::path p(relative);
    if (p.is_absolute()) return p.string();
    return (std::filesystem::path(out_dir) / p).lexically_normal().string();
}

void RunConfig::validate() const {
    terrain.validate();
    geometry.validate();
    vehicle.validate();
    space.validate();
    if (dataset_count < 20) throw InvalidArgument("dataset.count must be at least 20 for the 70/15/15 split");
    if (generate.mesh < terramech::kMinMesh) throw InvalidArgument("dataset.mesh must be at least 16");
    training.validate();
    scenario.validate();
    plant.validate();
    noise.validate();
    ukf.validate();
    if (std::abs(plant.log_interval - ukf.dt) > 1e-12) {
        throw InvalidArgument("estimator.dt must equal plant.log_interval (the filter consumes every log sample)");
    }
    if (!(n0 >= ukf.n_min && n0 <= ukf.n_max)) throw InvalidArgument("estimator.n0 must lie in [0.3, 1.3]");
    if (!(n0_std > 0.0)) throw InvalidArgument("estimator.n0_std must be positive");
    horizon.validate();
    if (horizon.horizon >= scenario.duration) {
        throw InvalidArgument("evaluation.horizon must be shorter than scenario.duration");
    }
    const auto loads = bicycle::AxleLoads::static_split(vehicle);
    const auto& load = space.bounds[sampling::kLoad];
    for (double tire : {0.5 * loads.front, 0.5 * loads.rear}) {
        if (tire < load.min || tire > load.max) {
            throw InvalidArgument("static tire load " + std::to_string(tire) +
                                  " N lies outside the surrogate load range; adjust vehicle mass or geometry");
        }
    }
}

RunConfig parse(const Json& doc) {
    RunConfig cfg;
    Section root(doc, "");
    std::uint64_t seed = cfg.seed;
    root.get("seed", seed);
    root.get("out", cfg.out_dir);

    section(root, "paths", [&](Section& s) {
        auto& p = cfg.paths;
        s.get("dataset", p.dataset);
        s.get("dataset_manifest", p.dataset_manifest);
        s.get("model", p.model);
        s.get("training_report", p.training_report);
        s.get("log", p.log);
        s.get("measurements", p.measurements);
        s.get("log_manifest", p.log_manifest);
        s.get("estimate", p.estimate);
        s.get("evaluation", p.evaluation);
        s.get("report", p.report);
    });

    if (root.has("terrain")) {
        const Json& t = root.child("terrain");
        if (t.is_string()) {
            cfg.terrain_name = t.get<std::string>();
            cfg.terrain = terrain_preset(cfg.terrain_name);
        } else {
            Section s(t, "terrain");
            std::string preset;
            s.get("preset", preset);
            if (!preset.empty()) cfg.terrain = terrain_preset(preset);
            cfg.terrain_name = preset.empty() ? "custom" : preset;
            auto& p = cfg.terrain;
            s.get("k_c", p.k_c);
            s.get("k_phi", p.k_phi);
            s.get("n", p.n);
            s.get("k", p.k);
            s.get("c", p.c);
            s.get("phi", p.phi);
            s.finish();
        }
    }

    section(root, "geometry", [&](Section& s) {
        s.get("radius", cfg.geometry.radius);
        s.get("width", cfg.geometry.width);
    });

    section(root, "vehicle", [&](Section& s) {
        s.get("mass", cfg.vehicle.mass);
        s.get("yaw_inertia", cfg.vehicle.yaw_inertia);
        s.get("lf", cfg.vehicle.lf);
        s.get("lr", cfg.vehicle.lr);
    });

    section(root, "dataset", [&](Section& s) {
        s.get("count", cfg.dataset_count);
        s.get("mesh", cfg.generate.mesh);
        s.get("warning_fraction", cfg.generate.warning_fraction);
        std::string targets = "lateral";
        s.get("targets", targets);
        if (targets == "lateral") {
            cfg.generate.targets = sampling::TargetSet::Lateral;
        } else if (targets == "all") {
            cfg.generate.targets = sampling::TargetSet::All;
        } else {
            throw InvalidArgument("dataset.targets must be \"lateral\" or \"all\"");
        }
        if (s.has("bounds")) {
            Section b(s.child("bounds"), "dataset.bounds");
            for (std::size_t d = 0; d < sampling::kInputDim; ++d) {
                const std::string name(sampling::input_names()[d]);
                std::vector<double> range;
                b.get(name, range);
                if (range.empty()) continue;
                if (range.size() != 2) throw InvalidArgument("dataset.bounds." + name + " must be [min, max]");
                cfg.space.bounds[d] = sampling::Bounds{range[0], range[1]};
            }
            b.finish();
        }
    });

    section(root, "training", [&](Section& s) {
        auto& t = cfg.training;
        s.get("hidden_layers", t.hidden_layers);
        s.get("max_epochs", t.max_epochs);
        std::string mode = "bayesian";
        s.get("regularization", mode);
        if (mode == "bayesian") {
            t.regularization = nn::Regularization::Bayesian;
        } else if (mode == "fixed") {
            t.regularization = nn::Regularization::Fixed;
        } else {
            throw InvalidArgument("training.regularization must be \"bayesian\" or \"fixed\"");
        }
        s.get("initial_lambda", t.initial_lambda);
        s.get("mu_initial", t.mu_initial);
        s.get("patience", t.patience);
        s.get("ensemble_size", t.ensemble_size);
        s.get("threads", t.threads);
        double budget_mb = static_cast<double>(t.memory_budget_bytes) / (1024.0 * 1024.0);
        s.get("memory_budget_mb", budget_mb);
        if (!(budget_mb >= 0.0)) throw InvalidArgument("training.memory_budget_mb must be nonnegative");
        t.memory_budget_bytes = static_cast<std::size_t>(budget_mb * 1024.0 * 1024.0);
        s.get("learning_rate", t.learning_rate);
        s.get("batch_size", t.batch_size);
    });

    section(root, "scenario", [&](Section& s) {
        auto& c = cfg.scenario;
        s.get("duration", c.duration);
        s.get("steer_amplitude", c.steer_amplitude);
        s.get("steer_frequency", c.steer_frequency);
        s.get("torque_mean", c.torque_mean);
        s.get("torque_amplitude", c.torque_amplitude);
        s.get("torque_frequency", c.torque_frequency);
        s.get("initial_speed", c.initial_speed);
    });

    section(root, "plant", [&](Section& s) {
        s.get("dt", cfg.plant.dt);
        s.get("log_interval", cfg.plant.log_interval);
        s.get("wheel_inertia", cfg.plant.wheel_inertia);
        s.get("slip_epsilon", cfg.plant.slip_epsilon);
        s.get("mesh", cfg.plant.mesh);
    });

    std::vector<double> sigma(cfg.noise.sigma.begin(), cfg.noise.sigma.end());
    section(root, "noise", [&](Section& s) { s.get("sigma", sigma); });
    if (sigma.size() != 6) throw InvalidArgument("noise.sigma needs six entries (x, y, psi, u, v, omega_z)");
    std::copy(sigma.begin(), sigma.end(), cfg.noise.sigma.begin());

    section(root, "estimator", [&](Section& s) {
        auto& u = cfg.ukf;
        s.get("alpha", u.alpha);
        s.get("beta", u.beta);
        s.get("kappa", u.kappa);
        s.get("dt", u.dt);
        s.get("substeps", u.substeps);
        std::vector<double> q(ukf::kStateDim);
        for (int i = 0; i < ukf::kStateDim; ++i) q[static_cast<std::size_t>(i)] = u.Q(i, i);
        s.get("q_diag", q);
        if (q.size() != ukf::kStateDim) throw InvalidArgument("estimator.q_diag needs seven entries");
        u.Q.setZero();
        for (int i = 0; i < ukf::kStateDim; ++i) u.Q(i, i) = q[static_cast<std::size_t>(i)];
        // R defaults to the sensor model.
        std::vector<double> r = sigma;
        s.get("r_sigma", r);
        if (r.size() != ukf::kMeasDim) throw InvalidArgument("estimator.r_sigma needs six entries");
        u.R.setZero();
        for (int i = 0; i < ukf::kMeasDim; ++i) {
            u.R(i, i) = r[static_cast<std::size_t>(i)] * r[static_cast<std::size_t>(i)];
        }
        s.get("n0", cfg.n0);
        s.get("n0_std", cfg.n0_std);
    });
    if (!root.has("estimator")) {
        for (int i = 0; i < ukf::kMeasDim; ++i) {
            cfg.ukf.R(i, i) = cfg.noise.sigma[static_cast<std::size_t>(i)] * cfg.noise.sigma[static_cast<std::size_t>(i)];
        }
    }

    section(root, "evaluation", [&](Section& s) {
        s.get("horizon", cfg.horizon.horizon);
        s.get("stride", cfg.horizon.stride);
        s.get("substeps", cfg.horizon.substeps);
        std::string start = "truth";
        s.get("start", start);
        if (start != "truth" && start != "filtered") {
            throw InvalidArgument("evaluation.start must be \"truth\" or \"filtered\"");
        }
        cfg.filtered_starts = start == "filtered";
    });

    root.finish();
    cfg.set_seed(seed);
    cfg.validate();
    return cfg;
}

RunConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    Json doc;
    try {
        doc = Json::parse(buffer.str(), nullptr, true, true);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument("config file '" + path + "' is not valid JSON: " + e.what());
    }
    return parse(doc);
}

nlohmann::ordered_json to_json(const RunConfig& cfg) {
    using OJ = nlohmann::ordered_json;
    OJ bounds = OJ::object();
    for (std::size_t d = 0; d < sampling::kInputDim; ++d) {
        bounds[std::string(sampling::input_names()[d])] = {cfg.space.bounds[d].min, cfg.space.bounds[d].max};
    }
    std::vector<double> q(ukf::kStateDim);
    for (int i = 0; i < ukf::kStateDim; ++i) q[static_cast<std::size_t>(i)] = cfg.ukf.Q(i, i);
    std::vector<double> r(ukf::kMeasDim);
    for (int i = 0; i < ukf::kMeasDim; ++i) r[static_cast<std::size_t>(i)] = std::sqrt(cfg.ukf.R(i, i));
    const auto& t = cfg.terrain;
    return OJ{
        {"seed", cfg.seed},
        {"terrain", {{"preset", cfg.terrain_name}, {"k_c", t.k_c}, {"k_phi", t.k_phi}, {"n", t.n},
                     {"k", t.k}, {"c", t.c}, {"phi", t.phi}}},
        {"geometry", {{"radius", cfg.geometry.radius}, {"width", cfg.geometry.width}}},
        {"vehicle", {{"mass", cfg.vehicle.mass}, {"yaw_inertia", cfg.vehicle.yaw_inertia},
                     {"lf", cfg.vehicle.lf}, {"lr", cfg.vehicle.lr}}},
        {"dataset", {{"count", cfg.dataset_count}, {"mesh", cfg.generate.mesh},
                     {"targets", cfg.generate.targets == sampling::TargetSet::All ? "all" : "lateral"},
                     {"bounds", bounds}}},
        {"training", {{"hidden_layers", cfg.training.hidden_layers},
                      {"max_epochs", cfg.training.max_epochs},
                      {"regularization", cfg.training.regularization == nn::Regularization::Bayesian
                                             ? "bayesian" : "fixed"},
                      {"initial_lambda", cfg.training.initial_lambda},
                      {"patience", cfg.training.patience},
                      {"ensemble_size", cfg.training.ensemble_size}}},
        {"scenario", {{"duration", cfg.scenario.duration},
                      {"steer_amplitude", cfg.scenario.steer_amplitude},
                      {"steer_frequency", cfg.scenario.steer_frequency},
                      {"torque_mean", cfg.scenario.torque_mean},
                      {"torque_amplitude", cfg.scenario.torque_amplitude},
                      {"torque_frequency", cfg.scenario.torque_frequency},
                      {"initial_speed", cfg.scenario.initial_speed}}},
        {"plant", {{"dt", cfg.plant.dt}, {"log_interval", cfg.plant.log_interval},
                   {"wheel_inertia", cfg.plant.wheel_inertia}, {"mesh", cfg.plant.mesh}}},
        {"noise", {{"sigma", cfg.noise.sigma}}},
        {"estimator", {{"alpha", cfg.ukf.alpha}, {"beta", cfg.ukf.beta}, {"kappa", cfg.ukf.kappa},
                       {"dt", cfg.ukf.dt}, {"substeps", cfg.ukf.substeps}, {"q_diag", q},
                       {"r_sigma", r}, {"n0", cfg.n0}, {"n0_std", cfg.n0_std}}},
        {"evaluation", {{"horizon", cfg.horizon.horizon}, {"stride", cfg.horizon.stride},
                        {"substeps", cfg.horizon.substeps},
                        {"start", cfg.filtered_starts ? "filtered" : "truth"}}},
    };
}

} // namespace terra::config
