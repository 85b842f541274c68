#include <random>

#include <gtest/gtest.h>

#include "terra/error.hpp"
#include "terra/training.hpp"

namespace nn = terra::nn;
namespace smp = terra::sampling;

namespace {

// Labels uniform random inputs with a fixed random teacher network.
smp::Dataset teacher_dataset(const nn::Mlp& teacher, int rows, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-2.0, 5.0);
    smp::Dataset d;
    d.inputs.resize(rows, teacher.input_dim());
    for (Eigen::Index i = 0; i < d.inputs.size(); ++i) d.inputs(i) = u(rng);
    d.targets = teacher.predict(d.inputs);
    d.target_names = {"y"};
    return d;
}

nn::Mlp teacher(int hidden, std::uint64_t seed) {
    nn::Mlp t = nn::initialize({10, hidden, hidden, 1}, seed);
    for (auto& layer : t.layers()) layer.weights *= 2.0;
    auto in = nn::Normalization::identity(10);
    in.offset.setConstant(1.5);
    in.gain.setConstant(2.0 / 7.0);
    t.set_input_norm(in);
    auto out = nn::Normalization::identity(1);
    out.offset(0) = 300.0;
    out.gain(0) = 1.0 / 800.0;
    t.set_output_norm(out);
    return t;
}

nn::TrainConfig small_config() {
    nn::TrainConfig cfg;
    cfg.hidden_layers = {10, 10};
    cfg.max_epochs = 40;
    cfg.ensemble_size = 3;
    cfg.threads = 2;
    cfg.seed = 21;
    return cfg;
}

double variance(const Eigen::MatrixXd& y) {
    return (y.array() - y.mean()).square().mean();
}

class TeacherStudent : public ::testing::Test {
protected:
    void SetUp() override {
        t_ = teacher(10, 77);
        split_ = smp::split_dataset(teacher_dataset(t_, 1500, 5), 6);
    }
    nn::Mlp t_;
    smp::Split split_;
};

} // namespace

TEST_F(TeacherStudent, RecoversRealizableTarget) {
    auto cfg = small_config();
    cfg.max_epochs = 300;
    cfg.patience = 50;
    const auto r = nn::train(split_, cfg);
    EXPECT_LT(nn::mse(r.model, split_.test), 1e-3 * variance(split_.test.targets));
}

TEST_F(TeacherStudent, SelectsLowestValidationMse) {
    const auto r = nn::train(split_, small_config());
    ASSERT_EQ(r.report.members.size(), 3u);
    ASSERT_GE(r.report.selected, 0);
    const auto& chosen = r.report.members[r.report.selected];
    for (const auto& m : r.report.members) EXPECT_LE(chosen.val_mse, m.val_mse);
    EXPECT_DOUBLE_EQ(nn::mse(r.model, split_.validation), chosen.val_mse);
    EXPECT_EQ(r.model.widths(), (std::vector<int>{10, 10, 10, 1}));
}

TEST_F(TeacherStudent, SingleMemberIsReturnedAsIs) {
    auto cfg = small_config();
    cfg.ensemble_size = 1;
    const auto r = nn::train(split_, cfg);
    ASSERT_EQ(r.report.members.size(), 1u);
    EXPECT_EQ(r.report.selected, 0);
    EXPECT_EQ(r.report.members[0].solver, "levenberg-marquardt");
}

TEST_F(TeacherStudent, DeterministicAcrossThreadCounts) {
    auto cfg = small_config();
    const auto a = nn::train(split_, cfg);
    cfg.threads = 1;
    const auto b = nn::train(split_, cfg);
    EXPECT_EQ(a.report.selected, b.report.selected);
    EXPECT_EQ(a.model.parameters(), b.model.parameters());
}

TEST_F(TeacherStudent, BayesianEvidenceKeepsEffectiveParametersInRange) {
    auto cfg = small_config();
    cfg.ensemble_size = 1;
    const auto r = nn::train(split_, cfg);
    const auto& m = r.report.members[0];
    EXPECT_GE(m.gamma, 1.0);
    EXPECT_LE(m.gamma, static_cast<double>(r.model.parameter_count()));
    EXPECT_GT(m.alpha, 0.0);
    EXPECT_GT(m.beta, 0.0);
}

TEST_F(TeacherStudent, FixedRegularizationTrains) {
    auto cfg = small_config();
    cfg.ensemble_size = 1;
    cfg.regularization = nn::Regularization::Fixed;
    cfg.initial_lambda = 1e-4;
    const auto r = nn::train(split_, cfg);
    EXPECT_LT(nn::mse(r.model, split_.test), 0.1 * variance(split_.test.targets));
}

TEST_F(TeacherStudent, FallsBackToAdamOverMemoryBudget) {
    auto cfg = small_config();
    cfg.ensemble_size = 1;
    cfg.memory_budget_bytes = 1024;
    cfg.max_epochs = 30;
    cfg.learning_rate = 3e-3;
    const auto r = nn::train(split_, cfg);
    EXPECT_EQ(r.report.members[0].solver, "adam");
    EXPECT_LT(nn::mse(r.model, split_.test), 0.5 * variance(split_.test.targets));
}

TEST_F(TeacherStudent, AffineRescaledInputsGiveSameOutputs) {
    auto cfg = small_config();
    cfg.ensemble_size = 1;
    cfg.max_epochs = 5;
    const auto a = nn::train(split_, cfg);
    auto scaled = split_;
    for (auto* part : {&scaled.train, &scaled.validation, &scaled.test}) {
        part->inputs = (part->inputs.array() * 4.0 + 10.0).matrix();
    }
    const auto b = nn::train(scaled, cfg);
    for (Eigen::Index i = 0; i < split_.test.rows(); ++i) {
        const double ya = a.model.value(split_.test.inputs.row(i).transpose());
        const double yb = b.model.value(scaled.test.inputs.row(i).transpose());
        EXPECT_NEAR(ya, yb, 1e-9 * std::max(1.0, std::abs(ya)));
    }
}

TEST(TrainConfig, RejectsInvalidSettings) {
    nn::TrainConfig cfg;
    cfg.ensemble_size = 0;
    EXPECT_THROW(cfg.validate(), terra::InvalidArgument);
    cfg = {};
    cfg.patience = 0;
    EXPECT_THROW(cfg.validate(), terra::InvalidArgument);
    cfg = {};
    cfg.hidden_layers = {};
    EXPECT_THROW(cfg.validate(), terra::InvalidArgument);
}

TEST(Initialize, WeightsWithinFanInBound) {
    const auto m = nn::initialize({10, 35, 35, 35, 1}, 4);
    for (const auto& layer : m.layers()) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(layer.weights.cols()));
        EXPECT_LE(layer.weights.cwiseAbs().maxCoeff(), bound);
        EXPECT_LE(layer.bias.cwiseAbs().maxCoeff(), bound);
    }
    EXPECT_EQ(nn::initialize({10, 5, 1}, 4).parameters(), nn::initialize({10, 5, 1}, 4).parameters());
}
