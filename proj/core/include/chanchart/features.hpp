#pragma once

// CSI feature pipeline: normalize -> delay transform -> beamspace
// transform -> circular autocorrelation -> magnitude vectorization.
//
// The resulting features are invariant to transmit power, global phase,
// and (for C == W) integer-tap timing offsets, which is what makes raw
// CSI usable for charting.

#include <Eigen/Dense>
#include <filesystem>
#include <vector>

#include "chanchart/dataset.hpp"

namespace chanchart {

/// Nonnegative feature vector f_i for one CSI sample.
struct FeatureVector {
    Eigen::VectorXd values;
    int source_index = 0;
    double timestamp = 0.0;
};

/// n x n unitary DFT matrix, F[k, m] = exp(-2*pi*i*k*m/n) / sqrt(n).
Eigen::MatrixXcd unitary_dft(int n);

/// Scales h to unit Frobenius norm.  Throws DegenerateInputError on the
/// zero matrix.
Eigen::MatrixXcd normalize(const Eigen::MatrixXcd& h);

/// Unitary inverse DFT along each row, keeping the first `cyclic_prefix`
/// delay taps.  Requires 1 <= cyclic_prefix <= W.
Eigen::MatrixXcd delay_transform(const Eigen::MatrixXcd& h_norm, int cyclic_prefix);

/// Angular-domain transform across antennas.  ULA: unitary B-point DFT on
/// each column.  URA(r, c): each column is reshaped to r x c (row-major
/// antenna indexing), 2D unitary DFT applied, then re-vectorized.
Eigen::MatrixXcd beamspace_transform(const Eigen::MatrixXcd& h_delay, const ArrayLayout& array);

/// 2D circular autocorrelation:
///   R[m, n] = sum_{a,b} H[a, b] * conj(H[(a+m) mod B, (b+n) mod C]).
/// R[0, 0] equals ||H||^2 and R is exactly invariant to a global phase.
Eigen::MatrixXcd autocorrelate(const Eigen::MatrixXcd& h_beam);

/// Full five-step pipeline.  Keeps autocorrelation rows 0 .. ceil(B/2)-1
/// (the conjugate symmetry R[-m, -n] = conj(R[m, n]) makes the rest
/// redundant in magnitude) and vectorizes row-major, so the feature
/// length is F = ceil(B/2) * C.
FeatureVector extract_feature(const CSISample& sample, const DatasetMeta& meta, int source_index = 0);

/// Feature length produced by extract_feature for a given meta.
int feature_length(const DatasetMeta& meta);

/// Extracts features for every sample in order.  n_threads > 1 splits
/// the samples across threads; each sample's feature is independent, so
/// the result is identical for any thread count.
std::vector<FeatureVector> extract_features(const Dataset& ds, int n_threads = 1);

/// Optional averaging pass: groups up to `group_size` consecutive
/// same-UE features and replaces each group by its mean (timestamp
/// averaged, source_index from the first member).  group_size <= 1
/// returns the input unchanged.
std::vector<FeatureVector> average_features(const std::vector<FeatureVector>& features,
                                            const Dataset& ds, int group_size);

/// CSV export, one row per feature: index,timestamp,v0,...,v{F-1}.
void write_features_csv(const std::vector<FeatureVector>& features,
                        const std::filesystem::path& path);

} // namespace chanchart
