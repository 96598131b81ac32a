#pragma once

// In-memory CSI dataset containers shared across the pipeline.
//
// A dataset is a list of SIMO-OFDM CSI snapshots H_i (B antennas x W
// subcarriers) tagged with UE id, timestamp, and, when available, the
// ground-truth UE position used for evaluation only.  Datasets are
// immutable after construction and safe to share read-only across threads.

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "chanchart/errors.hpp"

namespace chanchart {

enum class ArrayGeometry : std::uint8_t {
    ULA = 0,
    URA = 1,
};

/// Physical antenna layout at the BS.  ULA: rows == 1, cols == B.
/// URA: rows x cols == B, antennas indexed row-major.
struct ArrayLayout {
    ArrayGeometry kind = ArrayGeometry::ULA;
    std::uint16_t rows = 1;
    std::uint16_t cols = 1;

    static ArrayLayout ula(std::uint16_t n_antennas) { return {ArrayGeometry::ULA, 1, n_antennas}; }
    static ArrayLayout ura(std::uint16_t r, std::uint16_t c) { return {ArrayGeometry::URA, r, c}; }

    int antenna_count() const { return int(rows) * int(cols); }
    bool operator==(const ArrayLayout&) const = default;
};

struct DatasetMeta {
    std::uint32_t n_antennas = 0;    // B
    std::uint32_t n_subcarriers = 0; // W
    std::uint32_t cyclic_prefix = 0; // C, 1 <= C <= W
    ArrayLayout array;
    double bandwidth_hz = 0.0;
    double carrier_hz = 0.0;

    bool operator==(const DatasetMeta&) const = default;
};

/// One raw CSI measurement.  Entries are stored as complex<float>,
/// matching the on-disk precision, so file round-trips are bit-exact.
struct CSISample {
    Eigen::MatrixXcf h; // B x W
    std::uint32_t ue_id = 0;
    double timestamp = 0.0; // seconds
    std::optional<Eigen::Vector2d> ground_truth; // meters

    bool operator==(const CSISample& o) const {
        if (ue_id != o.ue_id || timestamp != o.timestamp) return false;
        if (ground_truth.has_value() != o.ground_truth.has_value()) return false;
        if (ground_truth && (*ground_truth != *o.ground_truth)) return false;
        return h.rows() == o.h.rows() && h.cols() == o.h.cols() && h == o.h;
    }
};

struct Dataset {
    DatasetMeta meta;
    std::vector<CSISample> samples;

    std::size_t size() const { return samples.size(); }

    /// True when every sample carries a ground-truth position.
    bool has_ground_truth() const;

    /// Throws ValidationError on any invariant violation: dimension
    /// mismatches, non-finite entries, bad cyclic prefix, or per-UE
    /// timestamps not strictly increasing in sample order.
    void validate() const;

    bool operator==(const Dataset&) const = default;
};

/// Median spacing of consecutive same-UE timestamps; used to default
/// time windows for triplet selection.  Throws ValidationError when no
/// UE has two samples.
double infer_sampling_interval(const Dataset& ds);

} // namespace chanchart
