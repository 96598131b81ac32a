#pragma once

// Embedding quality metrics: Kruskal stress (global shape), the
// shift/stretch/rotate residual after orthogonal Procrustes alignment,
// and the rank-based trustworthiness/continuity pair.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace chanchart {

using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, 2>;

PointMatrix points_to_matrix(const std::vector<Eigen::Vector2d>& points);

/// sin of the angle between the vectorized upper-triangle pairwise
/// distance vectors of truth and embedding; 0 is perfect.
double kruskal_stress(const PointMatrix& truth, const PointMatrix& embedding);

/// Mean squared residual between the per-dimension standardized truth
/// and the standardized embedding mapped through the orthogonal
/// Procrustes optimum W = U V^T (reflections permitted).
double sr_metric(const PointMatrix& truth, const PointMatrix& embedding);

/// 1 - normalized penalty for embedding neighbors that are not truth
/// neighbors; ranks are 1-based, exclude self, and break distance ties
/// by ascending index.  Requires 1 <= K < N/2.
double trustworthiness(const PointMatrix& truth, const PointMatrix& embedding, int k);

/// Mirror image of trustworthiness (truth neighbors looked up in the
/// embedding).
double continuity(const PointMatrix& truth, const PointMatrix& embedding, int k);

struct MetricsReport {
    double ks = 0.0;
    double sr = 0.0;
    std::map<int, double> tw; // keyed by evaluated K
    std::map<int, double> ct;
    int n_evaluated = 0;
    std::uint64_t subsample_seed = 0;
};

struct EvaluateOptions {
    std::vector<double> k_percents = {1.0, 2.0, 3.0, 4.0, 5.0};
    int max_n = 5000; // subsample above this (seeded) to keep O(N^2) tractable
    std::uint64_t subsample_seed = 0;
};

/// All four metrics; K values are percents of the evaluated sample
/// count, rounded to the nearest integer and floored at 1.
MetricsReport evaluate(const PointMatrix& truth, const PointMatrix& embedding,
                       const EvaluateOptions& opts = {});

/// Fixed-schema JSON: {ks, sr, tw: {K: v}, ct: {K: v}, n_evaluated,
/// subsample_seed}.
std::string metrics_to_json(const MetricsReport& report);

} // namespace chanchart
