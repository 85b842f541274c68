#include "terra/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "terra/content_hash.hpp"
#include "terra/error.hpp"
#include "terra/log.hpp"
#include "terra/random.hpp"

namespace terra::sampling {

namespace {

constexpr int kJitterAttempts = 4;
constexpr int kSwapAttempts = 2000;

// Keeps the in-stratum offset away from the stratum edges so that binning a
// point back to its stratum is robust to rounding.
double stratum_offset(Rng& rng) {
    return std::clamp(uniform01(rng), 1e-9, 1.0 - 1e-9);
}

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform_index(rng, i));
        std::swap(v[i - 1], v[j]);
    }
}

// Stratum index and in-stratum offset of every coordinate.
struct Design {
    std::size_t count = 0;
    std::vector<std::array<std::size_t, kInputDim>> stratum;
    std::vector<std::array<double, kInputDim>> offset;

    double value(const InputSpace& space, std::size_t row, int dim) const {
        const auto& b = space.bounds[static_cast<std::size_t>(dim)];
        const double u = (static_cast<double>(stratum[row][dim]) + offset[row][dim]) /
                         static_cast<double>(count);
        return b.min + (b.max - b.min) * u;
    }

    Eigen::RowVectorXd row_values(const InputSpace& space, std::size_t row) const {
        Eigen::RowVectorXd out(kInputDim);
        for (int d = 0; d < kInputDim; ++d) out(d) = value(space, row, d);
        return out;
    }
};

Design make_design(std::size_t count, std::uint64_t seed) {
    Design design;
    design.count = count;
    design.stratum.resize(count);
    design.offset.resize(count);
    Rng rng(seed);
    std::vector<std::size_t> perm(count);
    for (int d = 0; d < kInputDim; ++d) {
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        shuffle(perm, rng);
        for (std::size_t i = 0; i < count; ++i) {
            design.stratum[i][d] = perm[i];
            design.offset[i][d] = stratum_offset(rng);
        }
    }
    return design;
}

bool feasible(const Eigen::RowVectorXd& row, const terramech::WheelGeometry& geom) {
    try {
        terramech::static_sinkage(row(kLoad), terrain_of(row), geom);
        return true;
    } catch (const ConvergenceError&) {
        return false;
    }
}

} // namespace

const std::array<std::string_view, kInputDim>& input_names() {
    static constexpr std::array<std::string_view, kInputDim> kNames = {
        "slip_ratio", "slip_angle", "velocity", "load", "steering_rate",
        "k_star",     "n",          "k",        "c",    "phi"};
    return kNames;
}

InputSpace InputSpace::defaults() {
    InputSpace space;
    space.bounds = {{
        {-1.0, 1.0},
        {-0.6, 0.6},
        {2.0, 10.0},
        {500.0, 5500.0},
        {-0.56, 0.56},
        {43000.0, 2080000.0},
        {0.3, 1.3},
        {0.01, 0.024},
        {650.0, 20700.0},
        {0.105, 0.66},
    }};
    return space;
}

void InputSpace::validate() const {
    for (std::size_t d = 0; d < bounds.size(); ++d) {
        if (!(bounds[d].min < bounds[d].max)) {
            throw InvalidArgument("input space bound '" + std::string(input_names()[d]) +
                                  "' needs min < max");
        }
    }
}

bool InputSpace::contains(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
    if (row.size() != kInputDim) return false;
    for (int d = 0; d < kInputDim; ++d) {
        const auto& b = bounds[static_cast<std::size_t>(d)];
        if (!(row(d) >= b.min && row(d) <= b.max)) return false;
    }
    return true;
}

Dataset Dataset::subset(const std::vector<Eigen::Index>& rows) const {
    Dataset out;
    out.inputs.resize(static_cast<Eigen::Index>(rows.size()), inputs.cols());
    out.targets.resize(static_cast<Eigen::Index>(rows.size()), targets.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.inputs.row(static_cast<Eigen::Index>(i)) = inputs.row(rows[i]);
        out.targets.row(static_cast<Eigen::Index>(i)) = targets.row(rows[i]);
    }
    out.target_names = target_names;
    out.provenance = provenance;
    return out;
}

Eigen::MatrixXd lhs_sample(const InputSpace& space, std::size_t count, std::uint64_t seed) {
    space.validate();
    if (count == 0) throw InvalidArgument("LHS needs at least one sample");
    const Design design = make_design(count, seed);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(count), kInputDim);
    for (std::size_t i = 0; i < count; ++i) {
        out.row(static_cast<Eigen::Index>(i)) = design.row_values(space, i);
    }
    return out;
}

terramech::WheelState wheel_state_of(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
    return terramech::WheelState{row(kSlipRatio), row(kSlipAngle), row(kVelocity), row(kLoad),
                                 row(kSteeringRate)};
}

terramech::TerrainParams terrain_of(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
    return terramech::TerrainParams{0.0,
                                    row(kKStar),
                                    row(kSinkageExponent),
                                    row(kShearModulus),
                                    row(kCohesion),
                                    row(kFrictionAngle)};
}

terramech::TireForces evaluate_row(const Eigen::Ref<const Eigen::RowVectorXd>& row,
                                   const terramech::WheelGeometry& geom, int mesh) {
    return terramech::tire_forces(wheel_state_of(row), terrain_of(row), geom, mesh);
}

Dataset generate_dataset(const InputSpace& space, std::size_t count, std::uint64_t seed,
                         const terramech::WheelGeometry& geom, const GenerateOptions& options) {
    space.validate();
    geom.validate();
    if (count == 0) throw InvalidArgument("dataset needs at least one sample");
    if (options.mesh < terramech::kMinMesh) throw InvalidArgument("mesh too coarse");

    Design design = make_design(count, seed);
    Rng repair_rng(mix_seed(seed, 1));
    std::size_t resampled = 0;

    for (std::size_t i = 0; i < count; ++i) {
        if (feasible(design.row_values(space, i), geom)) continue;
        ++resampled;
        bool fixed = false;
        for (int attempt = 0; attempt < kJitterAttempts && !fixed; ++attempt) {
            for (int d = 0; d < kInputDim; ++d) design.offset[i][d] = stratum_offset(repair_rng);
            fixed = feasible(design.row_values(space, i), geom);
        }
        // Re-pair the load stratum with another row; a swap keeps every
        // dimension's stratification intact.
        for (int attempt = 0; attempt < kSwapAttempts && !fixed && count > 1; ++attempt) {
            const auto j = static_cast<std::size_t>(uniform_index(repair_rng, count));
            if (j == i) continue;
            std::swap(design.stratum[i][kLoad], design.stratum[j][kLoad]);
            std::swap(design.offset[i][kLoad], design.offset[j][kLoad]);
            if (feasible(design.row_values(space, i), geom) &&
                feasible(design.row_values(space, j), geom)) {
                fixed = true;
            } else {
                std::swap(design.stratum[i][kLoad], design.stratum[j][kLoad]);
                std::swap(design.offset[i][kLoad], design.offset[j][kLoad]);
            }
        }
        if (!fixed) {
            throw ConvergenceError("could not find a feasible resample for LHS row " +
                                   std::to_string(i));
        }
    }

    Dataset data;
    const Eigen::Index n = static_cast<Eigen::Index>(count);
    data.inputs.resize(n, kInputDim);
    const bool all = options.targets == TargetSet::All;
    data.target_names = all ? std::vector<std::string>{"fx", "fy", "fz"}
                            : std::vector<std::string>{"fy"};
    data.targets.resize(n, static_cast<Eigen::Index>(data.target_names.size()));
    for (Eigen::Index i = 0; i < n; ++i) {
        data.inputs.row(i) = design.row_values(space, static_cast<std::size_t>(i));
        const auto f = evaluate_row(data.inputs.row(i), geom, options.mesh);
        if (all) {
            data.targets.row(i) << f.fx, f.fy, f.fz;
        } else {
            data.targets(i, 0) = f.fy;
        }
    }

    data.provenance.seed = seed;
    data.provenance.count = count;
    data.provenance.generated_at = utc_timestamp();
    data.provenance.resampled_rows = resampled;
    const double rate = static_cast<double>(resampled) / static_cast<double>(count);
    data.provenance.quality_warning = rate > options.warning_fraction;
    if (data.provenance.quality_warning) {
        log::warn("data quality: " + std::to_string(resampled) + " of " +
                  std::to_string(count) +
                  " LHS rows exceeded the soil bearing capacity and were resampled (" +
                  std::to_string(100.0 * rate) + "%)");
    }
    return data;
}

Split split_dataset(const Dataset& data, std::uint64_t seed) {
    const auto n = static_cast<std::size_t>(data.rows());
    if (n < 20) throw InvalidArgument("dataset split needs at least 20 rows");
    std::vector<Eigen::Index> idx(n);
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    Rng rng(seed);
    shuffle(idx, rng);

    const std::size_t n_val = (n * 15) / 100;
    const std::size_t n_test = (n * 15) / 100;
    const std::size_t n_train = n - n_val - n_test;
    const auto first = idx.begin();
    Split split;
    split.train = data.subset({first, first + static_cast<std::ptrdiff_t>(n_train)});
    split.validation = data.subset({first + static_cast<std::ptrdiff_t>(n_train),
                                    first + static_cast<std::ptrdiff_t>(n_train + n_val)});
    split.test = data.subset({first + static_cast<std::ptrdiff_t>(n_train + n_val), idx.end()});
    return split;
}

} // namespace terra::sampling
