#pragma once

// CCD1 binary dataset format.
//
// Layout (all integers and floats little-endian):
//   magic "CCD1"
//   u32 N, u32 B, u32 W, u32 C
//   u8 geometry tag (0 = ULA, 1 = URA), u16 rows, u16 cols
//   f64 bandwidth_hz, f64 carrier_hz
//   u8 has_ground_truth
//   N records:
//     u32 ue_id, f64 timestamp
//     [f64 truth_x, f64 truth_y]        iff has_ground_truth
//     B*W complex entries, row-major, interleaved f32 (real, imag)

#include <filesystem>

#include "chanchart/dataset.hpp"

namespace chanchart {

inline constexpr char kDatasetMagic[4] = {'C', 'C', 'D', '1'};

/// Validates the dataset, then writes it to `path`.  Nothing is written
/// when validation fails.  Mixed ground-truth presence (some samples
/// tagged, some not) is rejected since the header flag is dataset-wide.
void write_dataset(const Dataset& ds, const std::filesystem::path& path);

/// Reads a CCD1 file.  Throws FormatError on bad magic or truncation
/// (naming the offending record) and ValidationError when the decoded
/// dataset violates its invariants.
Dataset read_dataset(const std::filesystem::path& path);

} // namespace chanchart
