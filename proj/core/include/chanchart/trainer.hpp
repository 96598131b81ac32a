#pragma once

// Mini-batch Adam training of the chart model against the configured
// loss.  Deterministic given the seed: shuffles, batch boundaries, and
// the update are all derived from TrainConfig.rng_seed.

#include <cstdint>
#include <filesystem>
#include <vector>

#include "chanchart/dataset.hpp"
#include "chanchart/features.hpp"
#include "chanchart/losses.hpp"
#include "chanchart/model.hpp"
#include "chanchart/selection.hpp"

namespace chanchart {

struct TrainConfig {
    int epochs = 100;
    int batch_size = 256; // triplets (or pair groups) per Adam step
    double learning_rate = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    LossConfig loss; // houses kind, margins/bounds, and mu
    std::uint64_t rng_seed = 1;
    bool resample_each_epoch = false; // redraw triplets per epoch (needs a SelectionConfig)

    void validate() const; // throws ConfigError
};

struct EpochStats {
    double mean_main_loss = 0.0;     // mean over batches of per-batch mean main loss
    double mean_inertial_loss = 0.0; // same for the inertial term (unweighted by mu)
};

struct TrainResult {
    ChartModel model;
    std::vector<EpochStats> history; // one entry per epoch
};

/// Trains `model` on the given index sets.  For the sammon_siamese kind
/// the triplets are unrolled into (anchor,positive) and
/// (anchor,negative) pairs with their feature distances.  Inertial
/// triples ride along with the triplet that generated them (matched on
/// (anchor, positive)).  When cfg.resample_each_epoch is set, `reselect`
/// must be non-null and triplets are redrawn each epoch with a seed
/// derived from (reselect->rng_seed, epoch).
TrainResult train(ChartModel model, const Dataset& ds, const std::vector<FeatureVector>& features,
                  const std::vector<Triplet>& triplets, const std::vector<InertialTriple>& inertial,
                  const TrainConfig& cfg, const SelectionConfig* reselect = nullptr);

/// Order-preserving forward pass over all features.
std::vector<Eigen::Vector2d> embed_dataset(const ChartModel& model,
                                           const std::vector<FeatureVector>& features);

/// CSV: epoch,mean_main_loss,mean_inertial_loss (epoch is 1-based).
void write_loss_history_csv(const std::vector<EpochStats>& history,
                            const std::filesystem::path& path);

} // namespace chanchart
