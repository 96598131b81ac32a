#pragma once

// Triplet and inertial-triple selection from timestamps and feature
// distances.  Positives are drawn from the close-time window (0, T_c),
// negatives from (T_c, T_f); candidate negatives that are close in
// feature distance are treated as self-intersection revisits and
// re-labelled positive.  Inertial triples (i, j, l) mirror the positive
// about the anchor in time, giving second-difference regularization
// targets.

#include <cstdint>
#include <filesystem>
#include <vector>

#include "chanchart/dataset.hpp"
#include "chanchart/features.hpp"

namespace chanchart {

struct SelectionConfig {
    double t_close = 1.5; // T_c, seconds
    double t_far = 75.0;  // T_f
    double v_min = 0.5;   // m/s, physical speed bounds of the UE
    double v_max = 2.0;
    double intersection_quantile = 0.01;
    int triplets_per_anchor = 8;
    int max_negative_retries = 16;
    bool reidentify = true; // false: feature-near negatives are redrawn, never relabelled
    std::uint64_t rng_seed = 1;

    /// Chart-distance bounds implied by the speed limits over T_c.
    double b_pos() const { return v_max * t_close; }
    double b_neg() const { return v_min * t_close; }

    void validate() const; // throws ConfigError
};

struct Triplet {
    int anchor = 0;
    int positive = 0;
    int negative = 0;
    bool reidentified = false; // positive recovered from the far-time window
};

struct InertialTriple {
    int i = 0; // anchor
    int j = 0; // positive
    int l = 0; // sample mirroring j about i in time
};

struct QuantileOptions {
    std::size_t max_exact_n = 2000;      // above this, sample pairs instead
    std::size_t n_sample_pairs = 1000000;
    std::uint64_t rng_seed = 9;
    bool force_sampling = false;
};

/// q-quantile (linear interpolation) of pairwise Euclidean feature
/// distances.  Exact over all pairs for small N; estimated from
/// uniformly sampled pairs (fixed seed) for large N.
double feature_distance_threshold(const std::vector<FeatureVector>& features, double q,
                                  const QuantileOptions& opts = {});

struct TripletSelection {
    std::vector<Triplet> triplets;
    std::size_t skipped_anchors = 0;   // empty window or retry exhaustion
    std::size_t reidentified_count = 0;
    double feature_threshold = 0.0;    // the quantile threshold actually used
};

/// Draws triplets_per_anchor triplets for every sample as anchor.
/// Deterministic: each anchor uses an rng stream derived from
/// (rng_seed, anchor index), so processing order cannot change output.
/// Throws if no triplet can be emitted at all.
TripletSelection select_triplets(const Dataset& ds, const std::vector<FeatureVector>& features,
                                 const SelectionConfig& cfg);

/// For each non-reidentified triplet (i, j, .), finds the same-UE sample
/// nearest to timestamp t_i - (t_j - t_i) and emits (i, j, l) when the
/// match is within half a sampling interval.  Mismatches are skipped.
std::vector<InertialTriple> select_inertial(const Dataset& ds, const std::vector<Triplet>& triplets,
                                            const SelectionConfig& cfg);

/// CSV export: anchor,positive,negative,reidentified.
void write_triplets_csv(const std::vector<Triplet>& triplets, const std::filesystem::path& path);

} // namespace chanchart
