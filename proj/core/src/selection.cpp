#include "chanchart/selection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <unordered_map>

#include "chanchart/errors.hpp"
#include "chanchart/util.hpp"

namespace chanchart {

namespace {

constexpr std::uint64_t kQuantileStream = 0x71u;

double quantile_sorted(std::vector<double>& values, double q) {
    std::sort(values.begin(), values.end());
    if (values.size() == 1) return values.front();
    const double h = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(h);
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = h - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

struct UeTrack {
    std::vector<int> order;     // sample indices sorted by time
    std::vector<double> times;  // matching timestamps
    double median_gap = 0.0;
};

std::unordered_map<std::uint32_t, UeTrack> build_tracks(const Dataset& ds) {
    std::unordered_map<std::uint32_t, UeTrack> tracks;
    for (int i = 0; i < static_cast<int>(ds.samples.size()); ++i) {
        auto& tr = tracks[ds.samples[i].ue_id];
        tr.order.push_back(i);
        tr.times.push_back(ds.samples[i].timestamp);
    }
    for (auto& [ue, tr] : tracks) {
        (void)ue;
        if (tr.times.size() < 2) continue;
        std::vector<double> gaps(tr.times.size() - 1);
        for (std::size_t g = 0; g + 1 < tr.times.size(); ++g) gaps[g] = tr.times[g + 1] - tr.times[g];
        auto mid = gaps.begin() + static_cast<std::ptrdiff_t>(gaps.size() / 2);
        std::nth_element(gaps.begin(), mid, gaps.end());
        tr.median_gap = *mid;
    }
    return tracks;
}

// Track positions with timestamp strictly inside (t_lo, t_hi).
void append_window(const UeTrack& tr, double t_lo, double t_hi, int exclude, std::vector<int>& out) {
    auto first = std::upper_bound(tr.times.begin(), tr.times.end(), t_lo);
    auto last = std::lower_bound(tr.times.begin(), tr.times.end(), t_hi);
    for (auto it = first; it != last; ++it) {
        const int idx = tr.order[static_cast<std::size_t>(it - tr.times.begin())];
        if (idx != exclude) out.push_back(idx);
    }
}

} // namespace

void SelectionConfig::validate() const {
    if (!(t_close > 0.0) || !std::isfinite(t_close))
        throw ConfigError("selection: t_close must be positive and finite");
    if (!(t_far > t_close) || !std::isfinite(t_far))
        throw ConfigError("selection: t_far must exceed t_close");
    if (!(v_min >= 0.0) || !(v_max >= v_min) || !std::isfinite(v_max))
        throw ConfigError("selection: need 0 <= v_min <= v_max < inf");
    if (!(intersection_quantile > 0.0) || !(intersection_quantile < 1.0))
        throw ConfigError("selection: intersection_quantile must lie in (0, 1)");
    if (triplets_per_anchor < 1) throw ConfigError("selection: triplets_per_anchor must be >= 1");
    if (max_negative_retries < 1) throw ConfigError("selection: max_negative_retries must be >= 1");
}

double feature_distance_threshold(const std::vector<FeatureVector>& features, double q,
                                  const QuantileOptions& opts) {
    if (!(q > 0.0) || !(q < 1.0))
        throw ConfigError("feature_distance_threshold: quantile must lie in (0, 1)");
    const std::size_t n = features.size();
    if (n < 2)
        throw DegenerateInputError("feature_distance_threshold: need at least two features");

    std::vector<double> dists;
    if (n <= opts.max_exact_n && !opts.force_sampling) {
        dists.reserve(n * (n - 1) / 2);
        for (std::size_t i = 0; i + 1 < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                dists.push_back((features[i].values - features[j].values).norm());
    } else {
        std::mt19937_64 rng(opts.rng_seed);
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        dists.reserve(opts.n_sample_pairs);
        while (dists.size() < opts.n_sample_pairs) {
            const std::size_t i = pick(rng);
            const std::size_t j = pick(rng);
            if (i == j) continue;
            dists.push_back((features[i].values - features[j].values).norm());
        }
    }
    return quantile_sorted(dists, q);
}

TripletSelection select_triplets(const Dataset& ds, const std::vector<FeatureVector>& features,
                                 const SelectionConfig& cfg) {
    cfg.validate();
    const int n = static_cast<int>(ds.samples.size());
    if (features.size() != ds.samples.size())
        throw ShapeError("select_triplets: features are not aligned with the dataset");
    if (n < 2) throw DegenerateInputError("select_triplets: need at least two samples");

    QuantileOptions qopts;
    qopts.rng_seed = derive_seed(cfg.rng_seed, kQuantileStream);
    const double threshold = feature_distance_threshold(features, cfg.intersection_quantile, qopts);

    const auto tracks = build_tracks(ds);

    TripletSelection out;
    out.feature_threshold = threshold;
    out.triplets.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(cfg.triplets_per_anchor));

    std::vector<int> positives;
    std::vector<int> negatives;
    for (int a = 0; a < n; ++a) {
        const auto& tr = tracks.at(ds.samples[a].ue_id);
        const double ta = ds.samples[a].timestamp;
        positives.clear();
        negatives.clear();
        append_window(tr, ta - cfg.t_close, ta + cfg.t_close, a, positives);
        append_window(tr, ta - cfg.t_far, ta - cfg.t_close, a, negatives);
        append_window(tr, ta + cfg.t_close, ta + cfg.t_far, a, negatives);
        if (positives.empty() || negatives.empty()) {
            ++out.skipped_anchors;
            continue;
        }

        std::mt19937_64 rng(derive_seed(cfg.rng_seed, static_cast<std::uint64_t>(a)));
        std::uniform_int_distribution<std::size_t> draw_pos(0, positives.size() - 1);
        std::uniform_int_distribution<std::size_t> draw_neg(0, negatives.size() - 1);

        bool exhausted = false;
        for (int t = 0; t < cfg.triplets_per_anchor && !exhausted; ++t) {
            int positive = positives[draw_pos(rng)];
            bool reidentified = false;
            bool emitted = false;
            for (int attempt = 0; attempt < cfg.max_negative_retries; ++attempt) {
                const int k = negatives[draw_neg(rng)];
                const double fd = (features[static_cast<std::size_t>(a)].values -
                                   features[static_cast<std::size_t>(k)].values)
                                      .norm();
                if (fd < threshold) {
                    // Far in time but close in feature space: a revisit of
                    // the same spot.  Recover it as the positive and look
                    // for a genuinely distant negative.
                    if (cfg.reidentify) {
                        positive = k;
                        reidentified = true;
                    }
                    continue;
                }
                if (k == positive) continue;
                out.triplets.push_back({a, positive, k, reidentified});
                if (reidentified) ++out.reidentified_count;
                emitted = true;
                break;
            }
            if (!emitted) {
                ++out.skipped_anchors;
                exhausted = true;
            }
        }
    }

    if (out.triplets.empty())
        throw DegenerateInputError(
            "select_triplets: no anchor had both a close-time and a far-time candidate");
    return out;
}

std::vector<InertialTriple> select_inertial(const Dataset& ds, const std::vector<Triplet>& triplets,
                                            const SelectionConfig& cfg) {
    cfg.validate();
    const auto tracks = build_tracks(ds);

    std::vector<InertialTriple> out;
    out.reserve(triplets.size());
    for (const auto& tp : triplets) {
        if (tp.reidentified) continue; // recovered positives carry no usable time offset
        const auto& si = ds.samples[static_cast<std::size_t>(tp.anchor)];
        const auto& sj = ds.samples[static_cast<std::size_t>(tp.positive)];
        const auto& tr = tracks.at(si.ue_id);
        if (tr.median_gap <= 0.0) continue;

        const double target = 2.0 * si.timestamp - sj.timestamp;
        auto it = std::lower_bound(tr.times.begin(), tr.times.end(), target);
        std::size_t best = tr.times.size(); // invalid
        double best_err = std::numeric_limits<double>::infinity();
        if (it != tr.times.end()) {
            best = static_cast<std::size_t>(it - tr.times.begin());
            best_err = std::abs(*it - target);
        }
        if (it != tr.times.begin()) {
            const std::size_t prev = static_cast<std::size_t>(it - tr.times.begin()) - 1;
            const double err = std::abs(tr.times[prev] - target);
            if (err < best_err) {
                best = prev;
                best_err = err;
            }
        }
        if (best >= tr.times.size()) continue;
        if (best_err > 0.5 * tr.median_gap * (1.0 + 1e-9)) continue;
        const int l = tr.order[best];
        if (l == tp.anchor || l == tp.positive) continue;
        out.push_back({tp.anchor, tp.positive, l});
    }
    return out;
}

void write_triplets_csv(const std::vector<Triplet>& triplets, const std::filesystem::path& path) {
    std::FILE* f = std::fopen(path.string().c_str(), "w");
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    std::fputs("anchor,positive,negative,reidentified\n", f);
    for (const auto& t : triplets)
        std::fprintf(f, "%d,%d,%d,%d\n", t.anchor, t.positive, t.negative, t.reidentified ? 1 : 0);
    if (std::fclose(f) != 0) throw IoError("failed to finalize " + path.string());
}

} // namespace chanchart
