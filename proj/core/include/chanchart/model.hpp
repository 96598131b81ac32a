#pragma once

// The chart model: a three-layer MLP that maps a feature vector to a
// probability mass function over a fixed grid of 2-D centroids; the
// chart point is the PMF-weighted centroid average.  Keeping the output
// a convex combination of grid points bounds the chart and makes the
// map smooth in the network logits.

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>

namespace chanchart {

struct CentroidGrid {
    int side = 16;         // grid is side x side
    double extent = 150.0; // centroids span [-extent, extent] per axis
    Eigen::Matrix<double, Eigen::Dynamic, 2> centers; // (side*side) x 2

    /// Endpoint-inclusive lattice; centroid k = (row * side + col) sits at
    /// x = lattice[col], y = lattice[row].
    static CentroidGrid make(int side, double extent);

    int size() const { return static_cast<int>(centers.rows()); }
};

struct ChartModel {
    std::vector<int> layer_dims;          // [F, F/2, F/4, G]
    std::vector<Eigen::MatrixXd> weights; // weights[l]: dims[l+1] x dims[l]
    std::vector<Eigen::VectorXd> biases;  // biases[l]: dims[l+1]
    CentroidGrid grid;
    std::uint64_t revision = 0; // bumped on every parameter mutation

    int input_dim() const { return layer_dims.front(); }
    std::size_t parameter_count() const;
    void bump_revision() { ++revision; }
};

/// He-uniform weights (bound sqrt(6 / fan_in)), zero biases, hidden
/// widths F/2 and F/4 (integer division).  Requires input_dim >= 4.
ChartModel init_model(int input_dim, const CentroidGrid& grid, std::uint64_t rng_seed);

/// Per-layer activations kept for backprop.  `revision` records the
/// model revision the cache was computed against; backward refuses a
/// stale cache.
struct BatchCache {
    std::uint64_t revision = 0;
    Eigen::MatrixXd input; // n x F
    Eigen::MatrixXd z1, a1, z2, a2;
    Eigen::MatrixXd pmf; // n x G
};

/// Embeds a batch of feature rows (n x F) into chart points (n x 2).
/// Pure: identical inputs give bitwise-identical outputs.
Eigen::Matrix<double, Eigen::Dynamic, 2> forward_batch(const ChartModel& model,
                                                       const Eigen::MatrixXd& features,
                                                       BatchCache* cache = nullptr);

struct ForwardResult {
    Eigen::Vector2d chart_point;
    Eigen::VectorXd pmf;
    BatchCache cache; // single-row cache
};
ForwardResult forward(const ChartModel& model, const Eigen::VectorXd& feature);

struct ThetaGrad {
    std::vector<Eigen::MatrixXd> d_weights;
    std::vector<Eigen::VectorXd> d_biases;

    static ThetaGrad zeros_like(const ChartModel& model);
    void set_zero();
    bool all_finite() const;
};

/// Accumulates d(loss)/d(theta) into `grad` given d(loss)/d(chart point)
/// rows aligned with the cached batch.  Throws ContractError if the
/// cache does not match the model's current revision.
void backward_batch(const ChartModel& model, const BatchCache& cache,
                    const Eigen::Matrix<double, Eigen::Dynamic, 2>& grad_points, ThetaGrad& grad);

/// Checkpoint round-trip; little-endian, exact float64 parameters.
void write_model(const ChartModel& model, const std::filesystem::path& path);
ChartModel read_model(const std::filesystem::path& path);

} // namespace chanchart
