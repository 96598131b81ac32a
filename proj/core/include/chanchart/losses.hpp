#pragma once

// Loss functions over chart points: the Sammon/Siamese benchmark, the
// conventional triplet hinge, the split triplet hinge pair, and the
// inertial (second-difference) regularizer.  Every function returns the
// summed value together with exact gradients with respect to the chart
// points; hinge kinks and zero-norm differences use subgradient 0.

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace chanchart {

enum class LossKind { sammon_siamese, triplet, split_triplet };

struct LossConfig {
    LossKind kind = LossKind::split_triplet;
    double lambda = 1.0; // triplet margin
    double b_pos = 0.0;  // split triplet: upper bound on positive distance (meters)
    double b_neg = 0.0;  // split triplet: lower bound on negative distance
    double mu = 0.0;     // inertial regularizer weight

    void validate() const; // throws ConfigError
};

struct LossPair {
    int i = 0;
    int j = 0;
    double feature_dist = 0.0;
};

struct LossTriplet {
    int anchor = 0;
    int positive = 0;
    int negative = 0;
};

struct LossInertial {
    int i = 0;
    int j = 0;
    int l = 0;
};

struct LossGrad {
    double value = 0.0;
    std::vector<Eigen::Vector2d> grads; // one per chart point
    std::size_t term_count = 0;         // terms that contributed
    std::size_t dropped_pairs = 0;      // Sammon pairs with ~zero feature distance
};

LossGrad sammon_siamese_loss(std::span<const LossPair> pairs,
                             std::span<const Eigen::Vector2d> points);
LossGrad triplet_loss(std::span<const LossTriplet> triplets,
                      std::span<const Eigen::Vector2d> points, double lambda);
LossGrad split_triplet_loss(std::span<const LossTriplet> triplets,
                            std::span<const Eigen::Vector2d> points, double b_pos, double b_neg);
LossGrad inertial_loss(std::span<const LossInertial> triples,
                       std::span<const Eigen::Vector2d> points);

struct LossBatch {
    std::vector<LossPair> pairs;        // used when kind == sammon_siamese
    std::vector<LossTriplet> triplets;  // used by the triplet kinds
    std::vector<LossInertial> inertial;
};

struct TotalLoss {
    double value = 0.0; // main + mu * inertial, both as sums
    double main_value = 0.0;
    double inertial_value = 0.0;
    std::vector<Eigen::Vector2d> grads;
    std::size_t dropped_pairs = 0;
};

/// Combined objective with sum semantics.  Throws ContractError when the
/// batch carries index sets of the wrong kind for cfg.
TotalLoss total_loss(const LossConfig& cfg, const LossBatch& batch,
                     std::span<const Eigen::Vector2d> points);

struct BatchMeanLoss {
    double value = 0.0; // main_mean + mu * inertial_mean
    double main_mean = 0.0;
    double inertial_mean = 0.0;
    std::vector<Eigen::Vector2d> grads; // gradients of `value`
    std::size_t dropped_pairs = 0;
};

/// Optimization variant: each component is averaged over its own term
/// count so mu stays batch-size independent.  Reported per the loss
/// definitions elsewhere; this is what the trainer steps on.
BatchMeanLoss batch_mean_loss(const LossConfig& cfg, const LossBatch& batch,
                              std::span<const Eigen::Vector2d> points);

} // namespace chanchart
