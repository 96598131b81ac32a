#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "chanchart/selection.hpp"
#include "helpers.hpp"

using namespace chanchart;

namespace {

bool same_triplets(const std::vector<Triplet>& a, const std::vector<Triplet>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i].anchor != b[i].anchor || a[i].positive != b[i].positive ||
            a[i].negative != b[i].negative || a[i].reidentified != b[i].reidentified)
            return false;
    return true;
}

std::vector<FeatureVector> constant_features(std::size_t n) {
    std::vector<FeatureVector> fs(n);
    for (std::size_t i = 0; i < n; ++i) {
        fs[i].values = Eigen::Vector2d::Zero();
        fs[i].source_index = int(i);
    }
    return fs;
}

// Sawtooth track x(t): up to 100 m and back, period 200 s, 1 m/s, so every
// position is revisited several times far apart in time.
Dataset sawtooth_dataset(int n) {
    Dataset ds = testutil::line_dataset(n, 1.0, 1.0);
    for (int i = 0; i < n; ++i) {
        const int phase = i % 200;
        const double x = phase <= 100 ? double(phase) : double(200 - phase);
        ds.samples[std::size_t(i)].ground_truth = Eigen::Vector2d(x, 0.0);
    }
    return ds;
}

double naive_quantile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    if (v.size() == 1) return v.front();
    const double h = q * double(v.size() - 1);
    const auto lo = std::size_t(h);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - double(lo)) * (v[hi] - v[lo]);
}

} // namespace

TEST_SUITE_BEGIN("selection");

TEST_CASE("config validation names the offending field") {
    SelectionConfig cfg;
    cfg.t_close = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.t_far = cfg.t_close;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.v_min = 3.0; // exceeds v_max
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.intersection_quantile = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.triplets_per_anchor = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.max_negative_retries = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    SelectionConfig ok;
    CHECK_NOTHROW(ok.validate());
    CHECK(ok.b_pos() == ok.v_max * ok.t_close);
    CHECK(ok.b_neg() == ok.v_min * ok.t_close);
}

TEST_CASE("feature_distance_threshold equals the interpolated quantile of all pairs") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> gauss;
    std::vector<FeatureVector> fs(50);
    for (auto& f : fs) f.values = Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng));
    std::vector<double> dists;
    for (std::size_t i = 0; i + 1 < fs.size(); ++i)
        for (std::size_t j = i + 1; j < fs.size(); ++j)
            dists.push_back((fs[i].values - fs[j].values).norm());
    for (double q : {0.01, 0.25, 0.5, 0.99})
        CHECK(feature_distance_threshold(fs, q) == naive_quantile(dists, q));

    CHECK_THROWS_AS(feature_distance_threshold(fs, 0.0), ConfigError);
    CHECK_THROWS_AS(feature_distance_threshold(fs, 1.0), ConfigError);
    CHECK_THROWS_AS(feature_distance_threshold({fs[0]}, 0.5), DegenerateInputError);
}

TEST_CASE("sampled quantile tracks the exact quantile") {
    std::mt19937_64 rng(22);
    std::normal_distribution<double> gauss;
    std::vector<FeatureVector> fs(300);
    for (auto& f : fs) f.values = Eigen::Vector2d(gauss(rng), gauss(rng));

    const double exact = feature_distance_threshold(fs, 0.5);
    QuantileOptions opts;
    opts.force_sampling = true;
    const double sampled = feature_distance_threshold(fs, 0.5, opts);
    CHECK(std::abs(sampled - exact) < 0.02 * exact);
    // sampling is seeded, hence repeatable
    CHECK(feature_distance_threshold(fs, 0.5, opts) == sampled);
}

TEST_CASE("triplets respect the time windows and speed-implied bounds") {
    const double dt = 0.5, speed = 1.3;
    const Dataset ds = testutil::line_dataset(200, dt, speed);
    const auto fs = testutil::features_from_truth(ds);

    SelectionConfig cfg;
    cfg.t_close = 2.0;
    cfg.t_far = 30.0;
    cfg.v_min = speed;
    cfg.v_max = speed;
    cfg.reidentify = false;
    cfg.rng_seed = 7;
    const auto sel = select_triplets(ds, fs, cfg);
    REQUIRE(!sel.triplets.empty());
    CHECK(sel.reidentified_count == 0);

    for (const auto& t : sel.triplets) {
        CHECK(!t.reidentified);
        const double dt_pos = std::abs(ds.samples[std::size_t(t.positive)].timestamp -
                                       ds.samples[std::size_t(t.anchor)].timestamp);
        const double dt_neg = std::abs(ds.samples[std::size_t(t.negative)].timestamp -
                                       ds.samples[std::size_t(t.anchor)].timestamp);
        CHECK(dt_pos > 0.0);
        CHECK(dt_pos < cfg.t_close);
        CHECK(dt_neg > cfg.t_close);
        CHECK(dt_neg < cfg.t_far);

        // distances equal speed * |time gap| on this track
        const double d_pos = (fs[std::size_t(t.anchor)].values - fs[std::size_t(t.positive)].values).norm();
        const double d_neg = (fs[std::size_t(t.anchor)].values - fs[std::size_t(t.negative)].values).norm();
        CHECK(d_pos < cfg.b_pos());
        CHECK(d_neg > cfg.b_neg());
    }
}

TEST_CASE("selection is deterministic and seed-sensitive") {
    const Dataset ds = testutil::line_dataset(120, 1.0, 1.0);
    const auto fs = constant_features(ds.samples.size());
    SelectionConfig cfg;
    cfg.t_close = 3.0;
    cfg.t_far = 60.0;
    cfg.rng_seed = 5;

    const auto a = select_triplets(ds, fs, cfg);
    const auto b = select_triplets(ds, fs, cfg);
    CHECK(same_triplets(a.triplets, b.triplets));
    CHECK(a.feature_threshold == b.feature_threshold);

    cfg.rng_seed = 6;
    const auto c = select_triplets(ds, fs, cfg);
    CHECK(!same_triplets(a.triplets, c.triplets));
}

TEST_CASE("appending another UE leaves earlier anchors' draws unchanged") {
    Dataset ds = testutil::line_dataset(80, 1.0, 1.0, 0);
    SelectionConfig cfg;
    cfg.t_close = 3.0;
    cfg.t_far = 60.0;
    cfg.rng_seed = 11;
    const auto before = select_triplets(ds, constant_features(ds.samples.size()), cfg);

    const Dataset extra = testutil::line_dataset(40, 1.0, 1.0, 1);
    ds.samples.insert(ds.samples.end(), extra.samples.begin(), extra.samples.end());
    const auto after = select_triplets(ds, constant_features(ds.samples.size()), cfg);

    // anchors are processed in index order, so the first UE's triplets
    // form a prefix that must be bit-for-bit unaffected
    REQUIRE(after.triplets.size() > before.triplets.size());
    CHECK(same_triplets(before.triplets,
                        {after.triplets.begin(),
                         after.triplets.begin() + std::ptrdiff_t(before.triplets.size())}));
    for (const auto& t : after.triplets) {
        const auto ue = ds.samples[std::size_t(t.anchor)].ue_id;
        CHECK(ds.samples[std::size_t(t.positive)].ue_id == ue);
        CHECK(ds.samples[std::size_t(t.negative)].ue_id == ue);
    }
}

TEST_CASE("identical features yield a zero threshold and no reidentification") {
    const Dataset ds = testutil::line_dataset(60, 1.0, 1.0);
    SelectionConfig cfg;
    cfg.t_close = 2.5;
    cfg.t_far = 50.0;
    cfg.reidentify = true;
    const auto sel = select_triplets(ds, constant_features(ds.samples.size()), cfg);
    CHECK(sel.feature_threshold == 0.0);
    // the comparison is strict, so nothing can fall below a zero threshold
    CHECK(sel.reidentified_count == 0);
    for (const auto& t : sel.triplets) CHECK(!t.reidentified);
}

TEST_CASE("revisits are recovered as positives on a sawtooth track") {
    const Dataset ds = sawtooth_dataset(400);
    const auto fs = testutil::features_from_truth(ds);
    SelectionConfig cfg;
    cfg.t_close = 3.0;
    cfg.t_far = 390.0;
    cfg.intersection_quantile = 0.05;
    cfg.reidentify = true;
    cfg.rng_seed = 3;
    const auto sel = select_triplets(ds, fs, cfg);

    REQUIRE(sel.feature_threshold > 0.0);
    CHECK(sel.reidentified_count > 0);

    std::size_t flagged = 0;
    for (const auto& t : sel.triplets) {
        const double gap = std::abs(ds.samples[std::size_t(t.positive)].timestamp -
                                    ds.samples[std::size_t(t.anchor)].timestamp);
        const double fd_pos =
            (fs[std::size_t(t.anchor)].values - fs[std::size_t(t.positive)].values).norm();
        const double fd_neg =
            (fs[std::size_t(t.anchor)].values - fs[std::size_t(t.negative)].values).norm();
        // negatives that survive are never feature-near
        CHECK(fd_neg >= sel.feature_threshold);
        if (t.reidentified) {
            ++flagged;
            // recovered positive: far in time, near in feature space
            CHECK(gap > cfg.t_close);
            CHECK(fd_pos < sel.feature_threshold);
        } else {
            CHECK(gap < cfg.t_close);
        }
    }
    CHECK(flagged == sel.reidentified_count);

    // with relabelling disabled the same draws redraw instead
    cfg.reidentify = false;
    const auto off = select_triplets(ds, fs, cfg);
    CHECK(off.reidentified_count == 0);
    for (const auto& t : off.triplets) {
        CHECK(!t.reidentified);
        const double gap = std::abs(ds.samples[std::size_t(t.positive)].timestamp -
                                    ds.samples[std::size_t(t.anchor)].timestamp);
        CHECK(gap < cfg.t_close);
    }
}

TEST_CASE("anchors without both windows are skipped, not fatal") {
    Dataset ds = testutil::line_dataset(50, 1.0, 1.0, 0);
    // second UE sampled too sparsely for any close-time positive
    const Dataset sparse = testutil::line_dataset(2, 100.0, 1.0, 1);
    ds.samples.insert(ds.samples.end(), sparse.samples.begin(), sparse.samples.end());

    SelectionConfig cfg;
    cfg.t_close = 3.0;
    cfg.t_far = 60.0;
    const auto sel = select_triplets(ds, constant_features(ds.samples.size()), cfg);
    CHECK(sel.skipped_anchors == 2);
    for (const auto& t : sel.triplets) CHECK(ds.samples[std::size_t(t.anchor)].ue_id == 0);
}

TEST_CASE("window boundaries are strict") {
    const Dataset ds = testutil::line_dataset(40, 1.0, 1.0);
    const auto fs = constant_features(ds.samples.size());
    SelectionConfig cfg;
    cfg.t_close = 1.0; // |dt| = 1 is not strictly inside (0, 1)
    cfg.t_far = 60.0;
    CHECK_THROWS_AS(select_triplets(ds, fs, cfg), DegenerateInputError);

    cfg.t_close = 1.5;
    cfg.t_far = 2.0; // the only candidate gap |dt| = 2 is excluded
    CHECK_THROWS_AS(select_triplets(ds, fs, cfg), DegenerateInputError);
}

TEST_CASE("inertial triples mirror the positive about the anchor") {
    const double dt = 0.5, speed = 1.3;
    const Dataset ds = testutil::line_dataset(200, dt, speed);
    const auto fs = testutil::features_from_truth(ds);
    SelectionConfig cfg;
    cfg.t_close = 2.0;
    cfg.t_far = 30.0;
    cfg.v_min = speed;
    cfg.v_max = speed;
    cfg.reidentify = false;
    const auto sel = select_triplets(ds, fs, cfg);
    const auto triples = select_inertial(ds, sel.triplets, cfg);
    REQUIRE(!triples.empty());

    for (const auto& tr : triples) {
        CHECK(tr.l != tr.i);
        CHECK(tr.l != tr.j);
        const double ti = ds.samples[std::size_t(tr.i)].timestamp;
        const double tj = ds.samples[std::size_t(tr.j)].timestamp;
        const double tl = ds.samples[std::size_t(tr.l)].timestamp;
        CHECK(std::abs(tl - (2.0 * ti - tj)) <= 0.5 * dt * (1.0 + 1e-9));
        // constant velocity makes the second difference of positions vanish
        const Eigen::Vector2d xi = *ds.samples[std::size_t(tr.i)].ground_truth;
        const Eigen::Vector2d xj = *ds.samples[std::size_t(tr.j)].ground_truth;
        const Eigen::Vector2d xl = *ds.samples[std::size_t(tr.l)].ground_truth;
        CHECK((xj + xl - 2.0 * xi).norm() <= speed * 0.5 * dt * (1.0 + 1e-9) + 1e-12);
    }
}

TEST_CASE("inertial triples on hand-picked timestamps") {
    Dataset ds = testutil::line_dataset(5, 1.0, 1.0);
    // timestamps 0, 0.9, 2, 3, 4: median gap is 1
    ds.samples[1].timestamp = 0.9;
    SelectionConfig cfg;

    const std::vector<Triplet> triplets = {
        {2, 4, 0, false}, // target 0: exact hit at index 0
        {2, 3, 0, false}, // target 1: index 1 at 0.9 is within half a gap
        {3, 0, 1, false}, // target 6: nothing within 0.5 of it
        {2, 4, 0, true},  // reidentified: always skipped
    };
    const auto triples = select_inertial(ds, triplets, cfg);
    REQUIRE(triples.size() == 2);
    CHECK(triples[0].i == 2);
    CHECK(triples[0].j == 4);
    CHECK(triples[0].l == 0);
    CHECK(triples[1].i == 2);
    CHECK(triples[1].j == 3);
    CHECK(triples[1].l == 1);
}

TEST_CASE("inertial tolerance is half the median gap, inclusive") {
    Dataset ds = testutil::line_dataset(4, 1.0, 1.0);
    ds.samples[3].timestamp = 3.5; // gaps 1, 1, 1.5 -> median 1
    // anchor t=2, positive t=3.5: mirrored target is 0.5, equidistant from
    // samples at 0 and 1; the error of exactly half a gap is accepted
    const auto triples = select_inertial(ds, {{2, 3, 0, false}}, {});
    REQUIRE(triples.size() == 1);
    CHECK(triples[0].l == 1); // equidistant tie resolves to the later sample

    // a mirror landing back on the anchor itself is rejected: with
    // timestamps 0, 1, 1.4 and triplet (1.4, 1.0) the target 1.8 is
    // nearest to the anchor's own sample
    Dataset coll = testutil::line_dataset(3, 1.0, 1.0);
    coll.samples[2].timestamp = 1.4;
    CHECK(select_inertial(coll, {{2, 1, 0, false}}, {}).empty());
}

TEST_CASE("triplet CSV has the documented shape") {
    const testutil::TempDir tmp;
    write_triplets_csv({{1, 2, 3, false}, {4, 5, 6, true}}, tmp / "triplets.csv");
    const auto lines = testutil::split_lines(testutil::read_file(tmp / "triplets.csv"));
    REQUIRE(lines.size() == 3);
    CHECK(lines[0] == "anchor,positive,negative,reidentified");
    CHECK(lines[1] == "1,2,3,0");
    CHECK(lines[2] == "4,5,6,1");
}

TEST_SUITE_END();
