#include "terra/training.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include <Eigen/Cholesky>

#include "terra/error.hpp"
#include "terra/log.hpp"
#include "terra/random.hpp"

namespace terra::nn {

namespace {

constexpr Eigen::Index kChunk = 512;

// Training data in normalized units, samples as columns.
struct Problem {
    Eigen::MatrixXd x;
    Eigen::MatrixXd y;

    Eigen::Index samples() const { return x.cols(); }
    Eigen::Index residuals() const { return y.size(); }
};

Problem make_problem(const Mlp& model, const sampling::Dataset& data) {
    const auto& in = model.input_norm();
    const auto& out = model.output_norm();
    Problem p;
    p.x = ((data.inputs.rowwise() - in.offset.transpose()).array().rowwise() *
           in.gain.transpose().array())
              .matrix()
              .transpose();
    p.y = ((data.targets.rowwise() - out.offset.transpose()).array().rowwise() *
           out.gain.transpose().array())
              .matrix()
              .transpose();
    return p;
}

double sse(const Mlp& model, const Problem& p) {
    double total = 0.0;
    for (Eigen::Index c0 = 0; c0 < p.samples(); c0 += kChunk) {
        const Eigen::Index b = std::min(kChunk, p.samples() - c0);
        total += (model.forward_normalized(p.x.middleCols(c0, b)) - p.y.middleCols(c0, b))
                     .squaredNorm();
    }
    return total;
}

std::vector<Eigen::Index> layer_offsets(const Mlp& model) {
    std::vector<Eigen::Index> offsets;
    Eigen::Index k = 0;
    for (const auto& layer : model.layers()) {
        offsets.push_back(k);
        k += layer.weights.size() + layer.bias.size();
    }
    return offsets;
}

// Hidden activations of a batch; h[0] is the input batch itself.
std::vector<Eigen::MatrixXd> activations(const Mlp& model, const Eigen::Ref<const Eigen::MatrixXd>& x) {
    const auto& layers = model.layers();
    std::vector<Eigen::MatrixXd> h(layers.size());
    h[0] = x;
    for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
        h[l + 1] = ((layers[l].weights * h[l]).colwise() + layers[l].bias).array().tanh().matrix();
    }
    return h;
}

// Gauss-Newton pieces at the current parameters: lower triangle of J^T J,
// J^T e and the residual sum of squares. J is never held in full; it is
// assembled transposed (parameters x samples) one chunk at a time.
void normal_equations(const Mlp& model, const Problem& p, Eigen::MatrixXd& jtj,
                      Eigen::VectorXd& jte, double& total_sse) {
    const auto& layers = model.layers();
    const std::size_t last = layers.size() - 1;
    const auto offsets = layer_offsets(model);
    const auto n_params = static_cast<Eigen::Index>(model.parameter_count());
    const Eigen::Index n_out = model.output_dim();

    jtj.setZero(n_params, n_params);
    jte.setZero(n_params);
    total_sse = 0.0;
    Eigen::MatrixXd jt(n_params, std::min(kChunk, p.samples()));

    for (Eigen::Index c0 = 0; c0 < p.samples(); c0 += kChunk) {
        const Eigen::Index b = std::min(kChunk, p.samples() - c0);
        const auto h = activations(model, p.x.middleCols(c0, b));
        const Eigen::MatrixXd out =
            (layers[last].weights * h[last]).colwise() + layers[last].bias;
        const Eigen::MatrixXd err = out - p.y.middleCols(c0, b);
        total_sse += err.squaredNorm();

        for (Eigen::Index t = 0; t < n_out; ++t) {
            jt.setZero(n_params, b);
            // Output layer: only row t of the weights and bias t move output t.
            {
                const Eigen::Index cols = layers[last].weights.cols();
                const Eigen::Index w0 = offsets[last] + t * cols;
                const Eigen::Index b0 = offsets[last] + layers[last].weights.size() + t;
                jt.block(w0, 0, cols, b) = h[last];
                jt.row(b0).setOnes();
            }
            Eigen::MatrixXd delta =
                (layers[last].weights.row(t).transpose().replicate(1, b).array() *
                 (1.0 - h[last].array().square()))
                    .matrix();
            for (std::size_t l = last; l-- > 0;) {
                const Eigen::Index rows = layers[l].weights.rows();
                const Eigen::Index cols = layers[l].weights.cols();
                for (Eigen::Index s = 0; s < b; ++s) {
                    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
                        block(jt.col(s).data() + offsets[l], rows, cols);
                    block.noalias() = delta.col(s) * h[l].col(s).transpose();
                }
                jt.block(offsets[l] + layers[l].weights.size(), 0, rows, b) = delta;
                if (l > 0) {
                    delta = ((layers[l].weights.transpose() * delta).array() *
                             (1.0 - h[l].array().square()))
                                .matrix();
                }
            }
            const auto jt_b = jt.leftCols(b);
            jtj.selfadjointView<Eigen::Lower>().rankUpdate(jt_b);
            jte.noalias() += jt_b * err.row(t).transpose();
        }
    }
}

// Backprop gradient of the residual sum of squares over a batch.
double batch_gradient(const Mlp& model, const Eigen::Ref<const Eigen::MatrixXd>& x,
                      const Eigen::Ref<const Eigen::MatrixXd>& y, Eigen::VectorXd& grad) {
    const auto& layers = model.layers();
    const std::size_t last = layers.size() - 1;
    const auto offsets = layer_offsets(model);
    const auto h = activations(model, x);
    const Eigen::MatrixXd out = (layers[last].weights * h[last]).colwise() + layers[last].bias;
    Eigen::MatrixXd delta = 2.0 * (out - y);
    const double total = 0.25 * delta.squaredNorm();
    grad.setZero(static_cast<Eigen::Index>(model.parameter_count()));
    for (std::size_t l = last + 1; l-- > 0;) {
        const Eigen::Index rows = layers[l].weights.rows();
        const Eigen::Index cols = layers[l].weights.cols();
        Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> gw(
            grad.data() + offsets[l], rows, cols);
        gw.noalias() = delta * h[l].transpose();
        grad.segment(offsets[l] + rows * cols, rows) = delta.rowwise().sum();
        if (l > 0) {
            delta = ((layers[l].weights.transpose() * delta).array() *
                     (1.0 - h[l].array().square()))
                        .matrix();
        }
    }
    return total;
}

double raw_mse(const Mlp& model, const Problem& p) {
    if (p.samples() == 0) return 0.0;
    const Eigen::MatrixXd pred = model.forward_normalized(p.x);
    const Eigen::ArrayXd inv_gain2 = model.output_norm().gain.array().square().inverse();
    const Eigen::MatrixXd err = pred - p.y;
    double total = 0.0;
    for (Eigen::Index t = 0; t < err.rows(); ++t) total += err.row(t).squaredNorm() * inv_gain2(t);
    return total / static_cast<double>(err.size());
}

struct MemberState {
    Eigen::VectorXd best_params;
    double best_val = std::numeric_limits<double>::infinity();
    int stall = 0;
    int epochs = 0;

    // Returns true when early stopping triggers.
    bool observe(const Mlp& model, const Problem& val, int patience) {
        const double v = val.samples() > 0 ? raw_mse(model, val) : 0.0;
        if (v < best_val || best_params.size() == 0) {
            best_val = v;
            best_params = model.parameters();
            stall = 0;
            return false;
        }
        return ++stall >= patience;
    }
};

void train_levenberg_marquardt(Mlp& model, const Problem& train, const Problem& val,
                               const TrainConfig& cfg, MemberReport& report, MemberState& state) {
    const auto n_params = static_cast<Eigen::Index>(model.parameter_count());
    const double n_res = static_cast<double>(train.residuals());
    Eigen::VectorXd w = model.parameters();
    double ed = sse(model, train);
    double ew = w.squaredNorm();
    double beta = 1.0;
    double alpha = cfg.initial_lambda;
    double gamma = static_cast<double>(n_params);
    double objective = beta * ed + alpha * ew;
    double mu = cfg.mu_initial;

    Eigen::MatrixXd jtj;
    Eigen::VectorXd jte;
    Eigen::MatrixXd system(n_params, n_params);
    Eigen::LLT<Eigen::MatrixXd> llt(n_params);
    state.observe(model, val, cfg.patience);

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        double current_sse = 0.0;
        normal_equations(model, train, jtj, jte, current_sse);
        const Eigen::VectorXd grad = beta * jte + alpha * w;

        bool accepted = false;
        Eigen::VectorXd w_new;
        double ed_new = 0.0;
        double ew_new = 0.0;
        while (mu <= cfg.mu_max) {
            system.triangularView<Eigen::Lower>() = beta * jtj;
            system.diagonal().array() += alpha + mu;
            llt.compute(system);
            if (llt.info() == Eigen::Success) {
                w_new = w - llt.solve(grad);
                model.set_parameters(w_new);
                ed_new = sse(model, train);
                ew_new = w_new.squaredNorm();
                const double f_new = beta * ed_new + alpha * ew_new;
                if (std::isfinite(f_new) && f_new < objective) {
                    accepted = true;
                    mu = std::max(mu * cfg.mu_decrease, 1e-20);
                    break;
                }
            }
            mu *= cfg.mu_increase;
        }
        if (!accepted) {
            model.set_parameters(w);
            break;
        }
        w = w_new;
        ed = ed_new;
        ew = ew_new;
        state.epochs = epoch;

        if (cfg.regularization == Regularization::Bayesian) {
            system.triangularView<Eigen::Lower>() = beta * jtj;
            system.diagonal().array() += alpha;
            llt.compute(system);
            if (llt.info() == Eigen::Success) {
                Eigen::MatrixXd linv = Eigen::MatrixXd::Identity(n_params, n_params);
                llt.matrixL().solveInPlace(linv);
                const double trace_inv = linv.squaredNorm();
                gamma = std::clamp(static_cast<double>(n_params) - alpha * trace_inv, 1.0,
                                   std::min(static_cast<double>(n_params), n_res - 1.0));
                alpha = ew > 0.0 ? gamma / (2.0 * ew) : 1.0;
                beta = ed > 0.0 ? (n_res - gamma) / (2.0 * ed) : 1.0;
            }
        }
        objective = beta * ed + alpha * ew;
        if (!std::isfinite(objective)) {
            report.status = MemberStatus::Diverged;
            report.message = "non-finite objective at epoch " + std::to_string(epoch);
            return;
        }
        if (state.observe(model, val, cfg.patience)) break;
    }
    report.alpha = alpha;
    report.beta = beta;
    report.gamma = gamma;
}

void train_adam(Mlp& model, const Problem& train, const Problem& val, const TrainConfig& cfg,
                std::uint64_t seed, MemberReport& report, MemberState& state) {
    const auto n_params = static_cast<Eigen::Index>(model.parameter_count());
    const double lambda = cfg.initial_lambda;
    const double n_res = static_cast<double>(train.residuals());
    Eigen::VectorXd w = model.parameters();
    Eigen::VectorXd m = Eigen::VectorXd::Zero(n_params);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n_params);
    Eigen::VectorXd grad;
    constexpr double b1 = 0.9;
    constexpr double b2 = 0.999;
    constexpr double eps = 1e-8;
    long step = 0;
    Rng rng(mix_seed(seed, 7));
    std::vector<Eigen::Index> order(static_cast<std::size_t>(train.samples()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    state.observe(model, val, cfg.patience);

    const auto batch = static_cast<Eigen::Index>(cfg.batch_size);
    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[static_cast<std::size_t>(uniform_index(rng, i))]);
        }
        for (Eigen::Index c0 = 0; c0 < train.samples(); c0 += batch) {
            const Eigen::Index b = std::min(batch, train.samples() - c0);
            Eigen::MatrixXd x(train.x.rows(), b);
            Eigen::MatrixXd y(train.y.rows(), b);
            for (Eigen::Index s = 0; s < b; ++s) {
                x.col(s) = train.x.col(order[static_cast<std::size_t>(c0 + s)]);
                y.col(s) = train.y.col(order[static_cast<std::size_t>(c0 + s)]);
            }
            batch_gradient(model, x, y, grad);
            // Gradient of the per-residual objective (E_D + lambda E_W) / N.
            grad = grad / static_cast<double>(y.size()) + (2.0 * lambda / n_res) * w;
            ++step;
            m = b1 * m + (1.0 - b1) * grad;
            v = b2 * v + (1.0 - b2) * grad.cwiseAbs2();
            const double c1 = 1.0 - std::pow(b1, static_cast<double>(step));
            const double c2 = 1.0 - std::pow(b2, static_cast<double>(step));
            w.array() -= cfg.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
            model.set_parameters(w);
        }
        if (!w.allFinite()) {
            report.status = MemberStatus::Diverged;
            report.message = "non-finite weights at epoch " + std::to_string(epoch);
            return;
        }
        state.epochs = epoch;
        if (state.observe(model, val, cfg.patience)) break;
    }
    report.alpha = lambda;
    report.beta = 1.0;
    report.gamma = static_cast<double>(n_params);
}

} // namespace

void TrainConfig::validate() const {
    if (ensemble_size < 1) throw InvalidArgument("ensemble size must be at least 1");
    if (patience < 1) throw InvalidArgument("patience must be at least 1");
    if (max_epochs < 1) throw InvalidArgument("max_epochs must be at least 1");
    if (hidden_layers.empty()) throw InvalidArgument("network needs a hidden layer");
    for (int w : hidden_layers) {
        if (w < 1) throw InvalidArgument("hidden layer widths must be positive");
    }
    if (!(initial_lambda >= 0.0)) throw InvalidArgument("initial lambda must be nonnegative");
    if (!(mu_initial > 0.0) || !(mu_increase > 1.0) || !(mu_decrease > 0.0 && mu_decrease < 1.0)) {
        throw InvalidArgument("invalid Levenberg-Marquardt damping schedule");
    }
    if (batch_size < 1 || !(learning_rate > 0.0)) throw InvalidArgument("invalid Adam settings");
}

Mlp initialize(const std::vector<int>& widths, std::uint64_t seed) {
    Mlp model(widths);
    Rng rng(seed);
    for (auto& layer : model.layers()) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(layer.weights.cols()));
        for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) {
            for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) {
                layer.weights(i, j) = uniform(rng, -bound, bound);
            }
        }
        for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias(i) = uniform(rng, -bound, bound);
    }
    return model;
}

double mse(const Mlp& model, const sampling::Dataset& data) {
    if (data.rows() == 0) return 0.0;
    return (model.predict(data.inputs) - data.targets).squaredNorm() /
           static_cast<double>(data.targets.size());
}

TrainResult train_member(const Mlp& init, const sampling::Split& data, const TrainConfig& cfg,
                         int index, std::uint64_t seed) {
    TrainResult result{init, {}};
    Mlp& model = result.model;
    MemberReport report;
    report.index = index;
    report.seed = seed;

    const Problem train = make_problem(model, data.train);
    const Problem val = make_problem(model, data.validation);
    const double normal_bytes = static_cast<double>(model.parameter_count()) *
                                static_cast<double>(model.parameter_count()) * sizeof(double);
    MemberState state;
    if (normal_bytes <= static_cast<double>(cfg.memory_budget_bytes)) {
        report.solver = "levenberg-marquardt";
        train_levenberg_marquardt(model, train, val, cfg, report, state);
    } else {
        report.solver = "adam";
        train_adam(model, train, val, cfg, seed, report, state);
    }
    report.epochs = state.epochs;
    if (report.status == MemberStatus::Ok) {
        if (state.best_params.size() > 0) model.set_parameters(state.best_params);
        if (!model.all_finite()) {
            report.status = MemberStatus::Diverged;
            report.message = "non-finite parameters";
        }
    }
    if (report.status == MemberStatus::Ok) {
        report.train_mse = mse(model, data.train);
        report.val_mse = mse(model, data.validation);
        report.test_mse = mse(model, data.test);
    } else {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        report.train_mse = report.val_mse = report.test_mse = nan;
    }
    result.report.members.push_back(report);
    result.report.selected = report.status == MemberStatus::Ok ? 0 : -1;
    return result;
}

TrainResult train(const sampling::Split& data, const TrainConfig& cfg) {
    cfg.validate();
    if (data.train.rows() == 0) throw InvalidArgument("training split is empty");
    const auto start = std::chrono::steady_clock::now();

    std::vector<int> widths;
    widths.push_back(static_cast<int>(data.train.inputs.cols()));
    widths.insert(widths.end(), cfg.hidden_layers.begin(), cfg.hidden_layers.end());
    widths.push_back(static_cast<int>(data.train.targets.cols()));
    const Normalization in_norm = Normalization::from_range(data.train.inputs);
    const Normalization out_norm = Normalization::from_range(data.train.targets);

    const auto members = static_cast<std::size_t>(cfg.ensemble_size);
    std::vector<TrainResult> results(members);
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    auto worker = [&] {
        for (std::size_t m = next++; m < members; m = next++) {
            try {
                const std::uint64_t seed = mix_seed(cfg.seed, m);
                Mlp init = initialize(widths, seed);
                init.set_input_norm(in_norm);
                init.set_output_norm(out_norm);
                results[m] = train_member(init, data, cfg, static_cast<int>(m), seed);
                const auto& r = results[m].report.members.front();
                log::info("member " + std::to_string(m) + ": " + std::to_string(r.epochs) +
                          " epochs, val MSE " + std::to_string(r.val_mse));
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t n_threads =
        std::min<std::size_t>(members, cfg.threads > 0 ? static_cast<std::size_t>(cfg.threads) : hw);
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);

    TrainResult best;
    for (std::size_t m = 0; m < members; ++m) {
        auto report = results[m].report.members.front();
        report.index = static_cast<int>(m);
        best.report.members.push_back(report);
        if (report.status != MemberStatus::Ok) continue;
        const int sel = best.report.selected;
        if (sel < 0 || report.val_mse < best.report.members[static_cast<std::size_t>(sel)].val_mse) {
            best.report.selected = static_cast<int>(m);
        }
    }
    if (best.report.selected < 0) throw ConvergenceError("every ensemble member diverged");
    best.model = results[static_cast<std::size_t>(best.report.selected)].model;
    best.report.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return best;
}

} // namespace terra::nn
