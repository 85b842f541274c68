#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "terra/error.hpp"
#include "terra/mlp.hpp"
#include "terra/sampling.hpp"
#include "terra/training.hpp"

namespace nn = terra::nn;
namespace smp = terra::sampling;

namespace {

// Random surrogate-shaped network with the default input envelope mapped
// onto [-1, 1] and a force-scaled output.
nn::Mlp random_surrogate(std::uint64_t seed) {
    nn::Mlp m = nn::initialize({10, 35, 35, 35, 1}, seed);
    // Stronger weights than the initializer so tanh curvature matters.
    for (auto& layer : m.layers()) layer.weights *= 2.5;
    const auto space = smp::InputSpace::defaults();
    Eigen::MatrixXd corners(2, 10);
    for (int d = 0; d < 10; ++d) {
        corners(0, d) = space.bounds[d].min;
        corners(1, d) = space.bounds[d].max;
    }
    m.set_input_norm(nn::Normalization::from_range(corners));
    nn::Normalization out = nn::Normalization::identity(1);
    out.offset(0) = 40.0;
    out.gain(0) = 1.0 / 1500.0;
    m.set_output_norm(out);
    return m;
}

// Test points: a slice of input-envelope corners plus uniform interior points.
std::vector<Eigen::VectorXd> probe_points(int count, std::uint64_t seed) {
    const auto space = smp::InputSpace::defaults();
    std::mt19937_64 rng(seed);
    std::vector<Eigen::VectorXd> pts;
    for (int c = 0; c < 64; ++c) {
        Eigen::VectorXd x(10);
        for (int d = 0; d < 10; ++d) x(d) = (rng() & 1) ? space.bounds[d].max : space.bounds[d].min;
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

// Raw-unit step corresponding to a step h in normalized coordinates.
Eigen::VectorXd raw_step(const nn::Mlp& m, int d, double h) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(m.input_dim());
    e(d) = h / m.input_norm().gain(d);
    return e;
}

} // namespace

TEST(Mlp, ZeroNetworkOutputsDenormalizedZero) {
    nn::Mlp m({10, 35, 35, 35, 1});
    auto out = nn::Normalization::identity(1);
    out.offset(0) = 123.0;
    out.gain(0) = 0.5;
    m.set_output_norm(out);
    const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(10, -1.0, 3.0);
    EXPECT_DOUBLE_EQ(m.value(x), 123.0);
    EXPECT_TRUE(m.jacobian(x).isZero(0.0));
}

TEST(Mlp, HiddenActivationsStayInsideTanhRange) {
    const auto m = random_surrogate(3);
    for (const auto& x : probe_points(100, 1)) {
        for (const auto& h : m.hidden_activations(x * 50.0)) {
            EXPECT_LE(h.cwiseAbs().maxCoeff(), 1.0);
        }
    }
}

TEST(Mlp, NonFiniteInputRejected) {
    const auto m = random_surrogate(3);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(10);
    x(4) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(m.value(x), terra::InvalidArgument);
    x(4) = std::numeric_limits<double>::infinity();
    EXPECT_THROW(m.value(x), terra::InvalidArgument);
}

TEST(Mlp, BatchedPredictMatchesSingleForward) {
    const auto m = random_surrogate(4);
    const auto pts = probe_points(80, 2);
    Eigen::MatrixXd rows(pts.size(), 10);
    for (std::size_t i = 0; i < pts.size(); ++i) rows.row(i) = pts[i].transpose();
    const Eigen::MatrixXd batch = m.predict(rows);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        EXPECT_NEAR(batch(i, 0), m.value(pts[i]), 1e-9 * std::abs(m.value(pts[i])) + 1e-9);
    }
}

TEST(Mlp, JacobianMatchesCentralDifferences) {
    const auto m = random_surrogate(5);
    const double h = 1e-5;
    double worst = 0.0;
    for (const auto& x : probe_points(1000, 3)) {
        const Eigen::RowVectorXd jac = m.jacobian(x).row(0);
        Eigen::RowVectorXd fd(10);
        for (int d = 0; d < 10; ++d) {
            const Eigen::VectorXd e = raw_step(m, d, h);
            fd(d) = (m.value(x + e) - m.value(x - e)) / (2.0 * e(d));
        }
        // Compare in normalized input units so every column is on one scale.
        const Eigen::RowVectorXd a = jac.cwiseQuotient(m.input_norm().gain.transpose());
        const Eigen::RowVectorXd b = fd.cwiseQuotient(m.input_norm().gain.transpose());
        worst = std::max(worst, (a - b).cwiseAbs().maxCoeff() / a.cwiseAbs().maxCoeff());
    }
    EXPECT_LT(worst, 1e-6);
}

TEST(Mlp, HessianVectorMatchesDifferencedJacobian) {
    const auto m = random_surrogate(6);
    std::mt19937_64 rng(9);
    std::normal_distribution<double> g;
    const double h = 1e-4;
    double worst = 0.0;
    for (const auto& x : probe_points(1000, 4)) {
        Eigen::VectorXd vn(10);
        for (int d = 0; d < 10; ++d) vn(d) = g(rng);
        // Direction expressed in raw units of a unit-scale normalized step.
        const Eigen::VectorXd v = vn.cwiseQuotient(m.input_norm().gain);
        const Eigen::VectorXd hv = m.hessian_vec(x, v);
        const Eigen::VectorXd fd =
            (m.jacobian(x + h * v).row(0) - m.jacobian(x - h * v).row(0)).transpose() / (2.0 * h);
        const Eigen::VectorXd a = hv.cwiseQuotient(m.input_norm().gain);
        const Eigen::VectorXd b = fd.cwiseQuotient(m.input_norm().gain);
        worst = std::max(worst, (a - b).cwiseAbs().maxCoeff() / a.cwiseAbs().maxCoeff());
    }
    EXPECT_LT(worst, 1e-4);
}

TEST(Mlp, HessianIsSymmetric) {
    const auto m = random_surrogate(7);
    const Eigen::VectorXd x = probe_points(70, 5).back();
    Eigen::MatrixXd hess(10, 10);
    for (int d = 0; d < 10; ++d) hess.col(d) = m.hessian_vec(x, Eigen::VectorXd::Unit(10, d));
    EXPECT_LT((hess - hess.transpose()).cwiseAbs().maxCoeff(), 1e-9 * hess.cwiseAbs().maxCoeff());
}

TEST(Mlp, InvariantUnderAffineRescalingOfInputs) {
    const auto m = random_surrogate(8);
    Eigen::VectorXd a(10), b(10);
    for (int d = 0; d < 10; ++d) {
        a(d) = 0.1 + 0.7 * d;
        b(d) = 3.0 - d;
    }
    nn::Mlp scaled = m;
    nn::Normalization norm = m.input_norm();
    norm.offset = m.input_norm().offset.cwiseProduct(a) + b;
    norm.gain = m.input_norm().gain.cwiseQuotient(a);
    scaled.set_input_norm(norm);
    for (const auto& x : probe_points(100, 6)) {
        const Eigen::VectorXd xs = x.cwiseProduct(a) + b;
        EXPECT_NEAR(scaled.value(xs), m.value(x), 1e-9 * std::max(1.0, std::abs(m.value(x))));
    }
}

TEST(Mlp, ParameterRoundTrip) {
    const auto m = random_surrogate(10);
    EXPECT_EQ(m.parameter_count(), 10u * 35 + 35 + 35 * 35 + 35 + 35 * 35 + 35 + 35 + 1);
    nn::Mlp copy({10, 35, 35, 35, 1});
    copy.set_input_norm(m.input_norm());
    copy.set_output_norm(m.output_norm());
    copy.set_parameters(m.parameters());
    const Eigen::VectorXd x = probe_points(70, 7).back();
    EXPECT_EQ(copy.value(x), m.value(x));
}

TEST(Normalization, FromRangeMapsOntoUnitInterval) {
    Eigen::MatrixXd data(3, 2);
    data << 1.0, 5.0, 3.0, 5.0, 2.0, 5.0;
    const auto n = nn::Normalization::from_range(data);
    EXPECT_DOUBLE_EQ((1.0 - n.offset(0)) * n.gain(0), -1.0);
    EXPECT_DOUBLE_EQ((3.0 - n.offset(0)) * n.gain(0), 1.0);
    EXPECT_DOUBLE_EQ(n.gain(1), 1.0);
}
