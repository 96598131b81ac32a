#include <doctest.h>

#include <limits>

#include "chanchart/dataset.hpp"
#include "helpers.hpp"

using namespace chanchart;

TEST_SUITE_BEGIN("dataset");

TEST_CASE("validate accepts a well-formed multi-UE dataset") {
    Dataset ds = testutil::line_dataset(5, 0.5, 1.0, /*ue_id=*/0);
    const Dataset other = testutil::line_dataset(4, 0.25, 2.0, /*ue_id=*/1);
    // interleave the two UEs; per-UE monotonicity is what matters
    ds.samples.insert(ds.samples.begin() + 2, other.samples.begin(), other.samples.end());
    CHECK_NOTHROW(ds.validate());
    CHECK(ds.has_ground_truth());
}

TEST_CASE("validate rejects dimension mismatches") {
    Dataset ds = testutil::line_dataset(3, 0.5, 1.0);
    ds.samples[1].h = Eigen::MatrixXcf::Ones(2, 2); // meta says 1x2
    CHECK_THROWS_AS(ds.validate(), ValidationError);
}

TEST_CASE("validate rejects non-finite CSI entries") {
    Dataset ds = testutil::line_dataset(3, 0.5, 1.0);
    ds.samples[2].h(0, 1) = std::complex<float>(std::numeric_limits<float>::quiet_NaN(), 0.0f);
    CHECK_THROWS_AS(ds.validate(), ValidationError);
}

TEST_CASE("validate rejects a bad cyclic prefix") {
    Dataset ds = testutil::line_dataset(3, 0.5, 1.0);
    ds.meta.cyclic_prefix = 0;
    CHECK_THROWS_AS(ds.validate(), ValidationError);
    ds.meta.cyclic_prefix = ds.meta.n_subcarriers + 1;
    CHECK_THROWS_AS(ds.validate(), ValidationError);
}

TEST_CASE("validate rejects non-monotone per-UE timestamps") {
    Dataset ds = testutil::line_dataset(4, 0.5, 1.0);
    std::swap(ds.samples[1].timestamp, ds.samples[2].timestamp);
    CHECK_THROWS_AS(ds.validate(), ValidationError);

    // equal timestamps are not strictly increasing either
    Dataset eq = testutil::line_dataset(3, 0.5, 1.0);
    eq.samples[1].timestamp = eq.samples[0].timestamp;
    CHECK_THROWS_AS(eq.validate(), ValidationError);
}

TEST_CASE("has_ground_truth is all-or-nothing over samples") {
    Dataset ds = testutil::line_dataset(3, 0.5, 1.0);
    CHECK(ds.has_ground_truth());
    ds.samples[1].ground_truth.reset();
    CHECK_FALSE(ds.has_ground_truth());
}

TEST_CASE("infer_sampling_interval returns the median same-UE gap") {
    Dataset ds = testutil::line_dataset(5, 0.5, 1.0);
    CHECK(infer_sampling_interval(ds) == doctest::Approx(0.5).epsilon(1e-12));

    // gaps 1, 1, 4 -> median 1
    Dataset uneven = testutil::line_dataset(3, 1.0, 1.0);
    CSISample extra = uneven.samples.back();
    extra.timestamp = 6.0;
    uneven.samples.push_back(extra);
    CHECK(infer_sampling_interval(uneven) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("infer_sampling_interval needs a UE with two samples") {
    Dataset ds = testutil::line_dataset(1, 0.5, 1.0, 0);
    const Dataset other = testutil::line_dataset(1, 0.5, 1.0, 1);
    ds.samples.push_back(other.samples.front());
    CHECK_THROWS_AS(infer_sampling_interval(ds), ValidationError);
}

TEST_CASE("array layouts expose consistent antenna counts") {
    CHECK(ArrayLayout::ula(8).antenna_count() == 8);
    CHECK(ArrayLayout::ula(8).rows == 1);
    CHECK(ArrayLayout::ura(2, 4).antenna_count() == 8);
    CHECK(ArrayLayout::ura(2, 4).kind == ArrayGeometry::URA);
}

TEST_SUITE_END();
