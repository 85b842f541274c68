#include <algorithm>
#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "terra/error.hpp"
#include "terra/sampling.hpp"
#include "test_support.hpp"

namespace smp = terra::sampling;
namespace tmech = terra::terramech;

namespace {

void expect_stratified(const Eigen::MatrixXd& m, const smp::InputSpace& space) {
    const auto n = m.rows();
    for (int d = 0; d < smp::kInputDim; ++d) {
        const auto [lo, hi] = space.bounds[d];
        std::vector<int> hits(n, 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto bin = static_cast<Eigen::Index>(std::floor((m(i, d) - lo) / (hi - lo) * n));
            ASSERT_GE(bin, 0);
            ASSERT_LT(bin, n);
            ++hits[bin];
        }
        for (int h : hits) EXPECT_EQ(h, 1) << "dimension " << d;
    }
}

} // namespace

TEST(Lhs, SinglePointInsideBounds) {
    const auto space = smp::InputSpace::defaults();
    const auto m = smp::lhs_sample(space, 1, 3);
    ASSERT_EQ(m.rows(), 1);
    EXPECT_TRUE(space.contains(m.row(0)));
}

TEST(Lhs, OneSamplePerStratum) {
    const auto space = smp::InputSpace::defaults();
    for (std::size_t count : {2u, 7u, 100u, 1000u}) {
        for (std::uint64_t seed : {1u, 99u}) expect_stratified(smp::lhs_sample(space, count, seed), space);
    }
}

TEST(Lhs, DeterministicPerSeed) {
    const auto space = smp::InputSpace::defaults();
    EXPECT_EQ(smp::lhs_sample(space, 50, 8), smp::lhs_sample(space, 50, 8));
    EXPECT_NE(smp::lhs_sample(space, 50, 8), smp::lhs_sample(space, 50, 9));
}

TEST(InputSpace, DefaultEnvelope) {
    const auto s = smp::InputSpace::defaults();
    EXPECT_EQ(s.bounds[smp::kSlipRatio].min, -1.0);
    EXPECT_EQ(s.bounds[smp::kSlipAngle].max, 0.6);
    EXPECT_EQ(s.bounds[smp::kVelocity].min, 2.0);
    EXPECT_EQ(s.bounds[smp::kLoad].max, 5500.0);
    EXPECT_EQ(s.bounds[smp::kSteeringRate].max, 0.56);
    EXPECT_EQ(s.bounds[smp::kKStar].min, 43000.0);
    EXPECT_EQ(s.bounds[smp::kKStar].max, 2080000.0);
    EXPECT_EQ(s.bounds[smp::kSinkageExponent].min, 0.3);
    EXPECT_EQ(s.bounds[smp::kSinkageExponent].max, 1.3);
}

class GeneratedDataset : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        data_ = new smp::Dataset(smp::generate_dataset(smp::InputSpace::defaults(), 300, 17, {}));
    }
    static void TearDownTestSuite() {
        delete data_;
        data_ = nullptr;
    }
    static smp::Dataset* data_;
};

smp::Dataset* GeneratedDataset::data_ = nullptr;

TEST_F(GeneratedDataset, FiniteTargetsInsideBoundsAndStratified) {
    const auto space = smp::InputSpace::defaults();
    ASSERT_EQ(data_->rows(), 300);
    ASSERT_EQ(data_->targets.cols(), 1);
    EXPECT_TRUE(data_->targets.allFinite());
    for (Eigen::Index i = 0; i < data_->rows(); ++i) EXPECT_TRUE(space.contains(data_->inputs.row(i)));
    expect_stratified(data_->inputs, space);
}

TEST_F(GeneratedDataset, RowsReproduceTheirTargetsExactly) {
    for (Eigen::Index i = 0; i < data_->rows(); i += 7) {
        EXPECT_EQ(smp::evaluate_row(data_->inputs.row(i), {}).fy, data_->targets(i, 0));
    }
}

TEST_F(GeneratedDataset, TargetsRespectShearSaturation) {
    const tmech::WheelGeometry g;
    for (Eigen::Index i = 0; i < data_->rows(); ++i) {
        const auto row = data_->inputs.row(i);
        const auto f = smp::evaluate_row(row, g);
        EXPECT_LE(std::abs(data_->targets(i, 0)),
                  tmech::shear_force_limit(f, smp::terrain_of(row), g));
    }
}

TEST_F(GeneratedDataset, AggregateModulusFoldedIntoFrictionalTerm) {
    const auto row = data_->inputs.row(0);
    const auto p = smp::terrain_of(row);
    EXPECT_EQ(p.k_c, 0.0);
    EXPECT_EQ(p.k_phi, row(smp::kKStar));
}

TEST_F(GeneratedDataset, SameSeedSameBytes) {
    terra::test::TempDir dir;
    const auto again = smp::generate_dataset(smp::InputSpace::defaults(), 300, 17, {});
    smp::write_dataset_csv(*data_, dir.file("a.csv"));
    smp::write_dataset_csv(again, dir.file("b.csv"));
    EXPECT_EQ(terra::test::slurp(dir.file("a.csv")), terra::test::slurp(dir.file("b.csv")));
}

TEST_F(GeneratedDataset, CsvRoundTripIsBitExact) {
    terra::test::TempDir dir;
    smp::write_dataset_csv(*data_, dir.file("d.csv"));
    const auto back = smp::read_dataset_csv(dir.file("d.csv"));
    EXPECT_EQ(back.inputs, data_->inputs);
    EXPECT_EQ(back.targets, data_->targets);
}

TEST(GenerateDataset, AllTargetsOption) {
    smp::GenerateOptions opt;
    opt.targets = smp::TargetSet::All;
    const auto d = smp::generate_dataset(smp::InputSpace::defaults(), 20, 4, {}, opt);
    ASSERT_EQ(d.targets.cols(), 3);
    for (Eigen::Index i = 0; i < d.rows(); ++i) EXPECT_GT(d.targets(i, 2), 0.0);
}

TEST(GenerateDataset, ResampledRowsKeepStratification) {
    auto space = smp::InputSpace::defaults();
    // Soft soils with heavy loads force frequent resampling.
    space.bounds[smp::kKStar] = {43000.0, 200000.0};
    const auto d = smp::generate_dataset(space, 60, 2, {});
    EXPECT_GT(d.provenance.resampled_rows, 0u);
    EXPECT_TRUE(d.provenance.quality_warning);
    expect_stratified(d.inputs, space);
}

namespace {

smp::Dataset indexed(Eigen::Index n) {
    smp::Dataset d;
    d.inputs = Eigen::MatrixXd::Zero(n, smp::kInputDim);
    d.targets.resize(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) d.targets(i, 0) = static_cast<double>(i);
    d.target_names = {"fy"};
    return d;
}

} // namespace

TEST(Split, HundredRows) {
    const auto s = smp::split_dataset(indexed(100), 1);
    EXPECT_EQ(s.train.rows(), 70);
    EXPECT_EQ(s.validation.rows(), 15);
    EXPECT_EQ(s.test.rows(), 15);
}

TEST(Split, TwentyRows) {
    const auto s = smp::split_dataset(indexed(20), 1);
    EXPECT_EQ(s.train.rows(), 14);
    EXPECT_EQ(s.validation.rows(), 3);
    EXPECT_EQ(s.test.rows(), 3);
}

TEST(Split, ResidueGoesToTraining) {
    const auto s = smp::split_dataset(indexed(103), 1);
    EXPECT_EQ(s.validation.rows(), 15);
    EXPECT_EQ(s.test.rows(), 15);
    EXPECT_EQ(s.train.rows(), 73);
}

TEST(Split, PartitionWithoutDuplicates) {
    const auto s = smp::split_dataset(indexed(257), 6);
    std::multiset<double> seen;
    for (const auto* part : {&s.train, &s.validation, &s.test}) {
        for (Eigen::Index i = 0; i < part->rows(); ++i) seen.insert(part->targets(i, 0));
    }
    ASSERT_EQ(seen.size(), 257u);
    double expect = 0.0;
    for (double v : seen) EXPECT_EQ(v, expect++);
}

TEST(Split, DeterministicPerSeed) {
    const auto a = smp::split_dataset(indexed(100), 3);
    const auto b = smp::split_dataset(indexed(100), 3);
    const auto c = smp::split_dataset(indexed(100), 4);
    EXPECT_EQ(a.test.targets, b.test.targets);
    EXPECT_NE(a.test.targets, c.test.targets);
}

TEST(Split, TooFewRowsRejected) {
    EXPECT_THROW(smp::split_dataset(indexed(19), 1), terra::Error);
}
