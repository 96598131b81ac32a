#pragma once

// Synthetic desk-scale scenario: a UE random-walks along the streets of a
// rectangular city-block grid while a multi-antenna BS collects SIMO-OFDM
// CSI through a geometric multipath channel (fixed point scatterers with
// log-normal gains, optional line-of-sight, thermal noise).
//
// Geometry conventions (right-handed, meters):
//   - UE positions live in the z = kUeHeight plane; the street grid is
//     centered on the origin.
//   - The BS sits at (bs_position, kBsHeight).  ULA elements lie along
//     the x-axis at half-wavelength spacing: element b at offset
//     b * lambda/2.  URA(r, c) elements span x (columns) and z (rows),
//     antenna b = row * c + col.
//   - Scatterers are drawn once per dataset, uniformly over the walk
//     area inflated by one block, with heights in [2, 15] m.
//
// Channel: H[b, w] = sum_p alpha_p * a(dir_p)[b] * exp(-2*pi*i*f_w*tau_p)
// with alpha_p carrying Friis-style spreading loss, the log-normal gain,
// and the carrier phase of the true path delay; tau_p is the excess delay
// after synchronizing to the earliest path; f_w = w * bandwidth / W.
// Complex Gaussian noise of per-entry variance k_B * T * bandwidth is
// added when noise_temperature_k > 0.

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "chanchart/dataset.hpp"

namespace chanchart {

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kBoltzmann = 1.380649e-23;
inline constexpr double kBsHeight = 10.0;
inline constexpr double kUeHeight = 1.5;

struct ScenarioConfig {
    int grid_blocks_x = 4;
    int grid_blocks_y = 4;
    double block_size_m = 20.0;
    double v_min = 0.5; // m/s
    double v_max = 2.0;
    double sample_rate_hz = 2.0;
    int n_samples = 2000;
    Eigen::Vector2d bs_position{0.0, 90.0}; // ~50 m beyond the walk area
    ArrayLayout array = ArrayLayout::ula(32);
    int n_subcarriers = 64;
    double bandwidth_hz = 20e6;
    double carrier_hz = 2.4e9;
    int cyclic_prefix = 16;
    int n_paths = 12;       // scatterer count; the LoS path is extra
    bool include_los = false;
    double noise_temperature_k = 300.0;
    double tx_power_dbm = 0.0;
    std::uint64_t rng_seed = 1;
    std::uint32_t ue_id = 0;

    void validate() const; // throws ConfigError
};

struct TrajectoryPoint {
    double timestamp = 0.0;
    Eigen::Vector2d position{0.0, 0.0};
    Eigen::Vector2d velocity{0.0, 0.0};
};

struct Trajectory {
    std::vector<TrajectoryPoint> points;
};

/// Walks the street grid: uniform choice among non-reversing directions
/// at intersections, speed following a bounded random walk clipped to
/// [v_min, v_max].  Starts at a grid node.  Deterministic in rng_seed.
Trajectory generate_trajectory(const ScenarioConfig& cfg);

/// Number of distinct street segments (edges between adjacent grid nodes).
int street_segment_count(const ScenarioConfig& cfg);

/// Visit count per street segment for a trajectory on this grid; a
/// segment counts as visited when a trajectory point lies on it.
std::vector<int> segment_visit_counts(const ScenarioConfig& cfg, const Trajectory& traj);

/// Synthesizes one CSISample per trajectory point through the geometric
/// multipath channel above.  The noiseless channel is a deterministic
/// function of UE position given the (seeded) scatterer layout.
/// Ground truth is copied from the trajectory.
Dataset synthesize_csi(const Trajectory& traj, const ScenarioConfig& cfg);

/// Per-entry thermal-noise variance in channel units,
/// k_B * noise_temperature_k * bandwidth_hz.
double noise_variance(const ScenarioConfig& cfg);

} // namespace chanchart
