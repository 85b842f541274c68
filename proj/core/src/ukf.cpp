#include "terra/ukf.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "terra/csv.hpp"
#include "terra/error.hpp"

namespace terra::ukf {

namespace {

using Points = Eigen::Matrix<double, kStateDim, kSigmaCount>;

void symmetrize(AugMatrix& m) { m = 0.5 * (m + m.transpose()).eval(); }

} // namespace

UkfConfig UkfConfig::defaults() {
    UkfConfig cfg;
    cfg.Q.setZero();
    cfg.Q.diagonal() << 1e-3, 1e-3, 1e-5, 1e-4, 1e-4, 1e-6, 1e-7;
    const double sigma[kMeasDim] = {1.2, 1.2, 0.0175, 0.25, 0.25, 0.0175};
    cfg.R.setZero();
    for (int i = 0; i < kMeasDim; ++i) cfg.R(i, i) = sigma[i] * sigma[i];
    return cfg;
}

double UkfConfig::lambda() const { return alpha * alpha * (kStateDim + kappa) - kStateDim; }

void UkfConfig::validate() const {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidArgument("UKF alpha must lie in (0, 1]");
    if (!(kStateDim + lambda() > 0.0)) throw InvalidArgument("UKF spread L + lambda must be positive");
    if (!Q.allFinite() || !R.allFinite()) throw InvalidArgument("UKF noise covariances must be finite");
    if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, Q.cwiseAbs().maxCoeff())) {
        throw InvalidArgument("process noise Q must be symmetric");
    }
    if (Q.selfadjointView<Eigen::Lower>().eigenvalues().minCoeff() < -1e-15) {
        throw InvalidArgument("process noise Q must be positive semidefinite");
    }
    if ((R - R.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, R.cwiseAbs().maxCoeff())) {
        throw InvalidArgument("measurement noise R must be symmetric");
    }
    if (R.llt().info() != Eigen::Success) throw InvalidArgument("measurement noise R must be positive definite");
    if (!(dt > 0.0) || substeps < 1 || !(dt / substeps <= bicycle::kMaxStep)) {
        throw InvalidArgument("filter step must split into Euler steps of at most 0.05 s");
    }
    if (!(n_min < n_max)) throw InvalidArgument("sinkage exponent bounds are inverted");
}

SigmaPoints sigma_points(const AugVector& mean, const AugMatrix& cov, const UkfConfig& cfg) {
    if (!mean.allFinite() || !cov.allFinite()) throw ConvergenceError("non-finite filter state");
    const double spread = kStateDim + cfg.lambda();
    const AugMatrix scaled = spread * cov;
    Eigen::LLT<AugMatrix> llt(scaled);
    SigmaPoints sp;
    if (llt.info() != Eigen::Success) {
        const double scale = std::max(scaled.diagonal().cwiseAbs().maxCoeff(), 1e-300);
        bool ok = false;
        for (double j = 1e-12; j <= 1e-6 * (1.0 + 1e-9); j *= 10.0) {
            llt.compute(scaled + (j * scale) * AugMatrix::Identity());
            if (llt.info() == Eigen::Success) {
                sp.jitter = j * scale;
                ok = true;
                break;
            }
        }
        if (!ok) throw ConvergenceError("covariance is not factorizable even with 1e-6 jitter");
    }
    const AugMatrix root = llt.matrixL();
    sp.points.col(0) = mean;
    for (int i = 0; i < kStateDim; ++i) {
        sp.points.col(1 + i) = mean + root.col(i);
        sp.points.col(1 + kStateDim + i) = mean - root.col(i);
    }
    const double lambda = cfg.lambda();
    sp.wm.setConstant(0.5 / spread);
    sp.wc.setConstant(0.5 / spread);
    sp.wm(0) = lambda / spread;
    sp.wc(0) = lambda / spread + (1.0 - cfg.alpha * cfg.alpha + cfg.beta);
    return sp;
}

Gaussian recombine(const Points& points, const SigmaPoints& weights) {
    Gaussian g;
    AugVector offset = AugVector::Zero();
    for (int i = 1; i < kSigmaCount; ++i) offset += weights.wm(i) * (points.col(i) - points.col(0));
    g.mean = points.col(0) + offset;
    g.cov.setZero();
    for (int i = 0; i < kSigmaCount; ++i) {
        const AugVector d = points.col(i) - g.mean;
        g.cov.noalias() += weights.wc(i) * d * d.transpose();
    }
    symmetrize(g.cov);
    return g;
}

Gaussian predict(const Gaussian& prior, const Propagator& f, const UkfConfig& cfg) {
    const SigmaPoints sp = sigma_points(prior.mean, prior.cov, cfg);
    Points propagated;
    for (int i = 0; i < kSigmaCount; ++i) propagated.col(i) = f(sp.points.col(i));
    if (!propagated.allFinite()) throw ConvergenceError("prediction produced non-finite sigma points");
    Gaussian g = recombine(propagated, sp);
    g.cov += cfg.Q;
    return g;
}

AugVector propagate(const AugVector& x, const bicycle::BicycleInput& in, const Surrogate& s,
                    const UkfConfig& cfg) {
    bicycle::SurrogateTerrain terrain = s.terrain;
    terrain.n = x(kN);
    bicycle::BicycleState z = bicycle::BicycleState::from(x.head<6>());
    const double h = cfg.dt / cfg.substeps;
    for (int k = 0; k < cfg.substeps; ++k) {
        const auto forces = bicycle::axle_lateral_forces(z, in, terrain, *s.model, s.vehicle, s.loads);
        z = bicycle::step_euler(z, in, forces, s.vehicle, h);
    }
    AugVector out;
    out << z.vector(), x(kN);
    return out;
}

Gaussian predict(const Gaussian& prior, const bicycle::BicycleInput& in, const Surrogate& s,
                 const UkfConfig& cfg) {
    if (s.model == nullptr) throw InvalidArgument("UKF prediction needs a surrogate model");
    return predict(prior, [&](const AugVector& x) { return propagate(x, in, s, cfg); }, cfg);
}

Update update(const Gaussian& predicted, const MeasVector& measurement, const UkfConfig& cfg) {
    if (!measurement.allFinite()) throw InvalidArgument("measurement is not finite");
    const SigmaPoints sp = sigma_points(predicted.mean, predicted.cov, cfg);
    const Gaussian x = recombine(sp.points, sp);
    const MeasVector y_hat = x.mean.head<kMeasDim>();

    MeasMatrix s_cov = cfg.R;
    GainMatrix cross = GainMatrix::Zero();
    for (int i = 0; i < kSigmaCount; ++i) {
        const AugVector dx = sp.points.col(i) - x.mean;
        const MeasVector dy = dx.head<kMeasDim>();
        s_cov.noalias() += sp.wc(i) * dy * dy.transpose();
        cross.noalias() += sp.wc(i) * dx * dy.transpose();
    }
    s_cov = 0.5 * (s_cov + s_cov.transpose()).eval();
    Eigen::LLT<MeasMatrix> llt(s_cov);
    if (llt.info() != Eigen::Success) throw ConvergenceError("innovation covariance is singular");

    Update u;
    u.gain = llt.solve(cross.transpose()).transpose();
    u.innovation = measurement - y_hat;
    u.posterior.mean = x.mean + u.gain * u.innovation;
    u.posterior.cov = x.cov - u.gain * s_cov * u.gain.transpose();
    symmetrize(u.posterior.cov);
    u.posterior.mean(kN) = std::clamp(u.posterior.mean(kN), cfg.n_min, cfg.n_max);
    return u;
}

double EstimateTrace::final_n() const {
    if (points.empty()) throw InvalidArgument("estimate trace is empty");
    return points.back().mean(kN);
}

EstimateTrace run_estimator(const std::vector<double>& times,
                            const std::vector<bicycle::BicycleInput>& inputs,
                            const std::vector<bicycle::StateVector>& measurements,
                            const UkfConfig& cfg, const Surrogate& s, double n0,
                            double n0_variance) {
    cfg.validate();
    if (times.empty()) throw InvalidArgument("estimator needs at least one sample");
    if (inputs.size() != times.size() || measurements.size() != times.size()) {
        throw InvalidArgument("times, inputs and measurements differ in length");
    }
    for (std::size_t k = 1; k < times.size(); ++k) {
        if (std::abs(times[k] - times[k - 1] - cfg.dt) > 1e-9) {
            throw InvalidArgument("log is not sampled at the filter step " + std::to_string(cfg.dt) + " s");
        }
    }
    if (!(n0_variance > 0.0)) throw InvalidArgument("initial n variance must be positive");

    Gaussian g;
    g.mean << measurements[0], std::clamp(n0, cfg.n_min, cfg.n_max);
    g.cov.setZero();
    g.cov.topLeftCorner<kMeasDim, kMeasDim>() = cfg.R;
    g.cov(kN, kN) = n0_variance;

    EstimateTrace trace;
    auto record = [&](double t) {
        trace.points.push_back(EstimatePoint{t, g.mean, g.cov.diagonal()});
    };
    record(times[0]);
    try {
        for (std::size_t k = 1; k < times.size(); ++k) {
            g = update(predict(g, inputs[k - 1], s, cfg), measurements[k], cfg).posterior;
            record(times[k]);
        }
    } catch (const Error& e) {
        trace.error = e.what();
    }
    return trace;
}

namespace {

const std::vector<std::string>& estimate_columns() {
    static const std::vector<std::string> cols{
        "t",     "n",     "x",     "y",     "psi",   "u",     "v",         "omega_z",
        "var_n", "var_x", "var_y", "var_psi", "var_u", "var_v", "var_omega_z"};
    return cols;
}

} // namespace

void write_estimate_csv(const EstimateTrace& trace, const std::string& path) {
    csv::Table table;
    table.header = estimate_columns();
    for (const auto& p : trace.points) {
        std::vector<double> row{p.t, p.mean(kN)};
        for (int i = 0; i < 6; ++i) row.push_back(p.mean(i));
        row.push_back(p.variance(kN));
        for (int i = 0; i < 6; ++i) row.push_back(p.variance(i));
        table.rows.push_back(std::move(row));
    }
    csv::write(table, path);
}

EstimateTrace read_estimate_csv(const std::string& path) {
    const csv::Table table = csv::read(path);
    if (table.header != estimate_columns()) {
        throw CorruptFileError("'" + path + "' is not an estimate trace");
    }
    EstimateTrace trace;
    for (const auto& r : table.rows) {
        EstimatePoint p;
        p.t = r[0];
        p.mean(kN) = r[1];
        for (int i = 0; i < 6; ++i) p.mean(i) = r[static_cast<std::size_t>(2 + i)];
        p.variance(kN) = r[8];
        for (int i = 0; i < 6; ++i) p.variance(i) = r[static_cast<std::size_t>(9 + i)];
        trace.points.push_back(p);
    }
    return trace;
}

} // namespace terra::ukf
