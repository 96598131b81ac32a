#include "chanchart/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "chanchart/util.hpp"

namespace chanchart {

namespace {

constexpr double kAccelSigma = 0.5;     // m/s^2, speed random-walk scale
constexpr double kScatterGainStdDb = 4.0;
constexpr double kScatterHeightMin = 2.0;
constexpr double kScatterHeightMax = 15.0;

// rng stream ids
enum : std::uint64_t { kStreamTrajectory = 0, kStreamScatterers = 1, kStreamNoise = 2 };

struct Grid {
    int gx, gy;
    double s;
    Eigen::Vector2d origin;

    explicit Grid(const ScenarioConfig& cfg)
        : gx(cfg.grid_blocks_x), gy(cfg.grid_blocks_y), s(cfg.block_size_m),
          origin(-0.5 * cfg.block_size_m * cfg.grid_blocks_x,
                 -0.5 * cfg.block_size_m * cfg.grid_blocks_y) {}

    Eigen::Vector2d node_pos(int i, int j) const {
        return origin + Eigen::Vector2d(i * s, j * s);
    }
    int n_horizontal() const { return gx * (gy + 1); }
    int n_vertical() const { return (gx + 1) * gy; }
    int horizontal_id(int i, int j) const { return j * gx + i; }
    int vertical_id(int i, int j) const { return n_horizontal() + i * gy + j; }
};

// axis directions, fixed order for deterministic draws
const Eigen::Vector2i kDirs[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};

bool node_in_grid(const Grid& g, int i, int j) {
    return i >= 0 && i <= g.gx && j >= 0 && j <= g.gy;
}

} // namespace

void ScenarioConfig::validate() const {
    if (grid_blocks_x < 1 || grid_blocks_y < 1)
        throw ConfigError("grid_blocks must be at least 1x1");
    if (block_size_m <= 0.0)
        throw ConfigError("block_size_m must be positive");
    if (!(0.0 < v_min && v_min <= v_max))
        throw ConfigError("speed_range requires 0 < v_min <= v_max");
    if (sample_rate_hz <= 0.0)
        throw ConfigError("sample_rate_hz must be positive");
    if (n_samples < 1)
        throw ConfigError("n_samples must be at least 1");
    if (n_subcarriers < 2)
        throw ConfigError("n_subcarriers must be at least 2");
    if (cyclic_prefix < 1 || cyclic_prefix > n_subcarriers)
        throw ConfigError("cyclic_prefix must satisfy 1 <= C <= W");
    if (n_paths < 0 || (n_paths < 1 && !include_los))
        throw ConfigError("n_paths must be >= 1 (or >= 0 with include_los)");
    if (bandwidth_hz <= 0.0 || carrier_hz <= 0.0)
        throw ConfigError("bandwidth_hz and carrier_hz must be positive");
    if (array.antenna_count() < 1)
        throw ConfigError("array must have at least one antenna");
    if (array.kind == ArrayGeometry::ULA && array.rows != 1)
        throw ConfigError("ULA array must have rows == 1");
    if (noise_temperature_k < 0.0)
        throw ConfigError("noise_temperature_k must be nonnegative");
    if (v_max / sample_rate_hz < 1e-9)
        throw ConfigError("infeasible speed_range/sample_rate: v_max per step below numeric resolution");
}

double noise_variance(const ScenarioConfig& cfg) {
    return kBoltzmann * cfg.noise_temperature_k * cfg.bandwidth_hz;
}

int street_segment_count(const ScenarioConfig& cfg) {
    const Grid g(cfg);
    return g.n_horizontal() + g.n_vertical();
}

Trajectory generate_trajectory(const ScenarioConfig& cfg) {
    cfg.validate();
    const Grid grid(cfg);
    std::mt19937_64 rng(derive_seed(cfg.rng_seed, kStreamTrajectory));

    // start at a random node with a random outgoing direction
    std::uniform_int_distribution<int> node_x(0, grid.gx), node_y(0, grid.gy);
    int ni = node_x(rng), nj = node_y(rng);

    auto choose_direction = [&](int i, int j, int forbidden) {
        int cands[4], n_cands = 0;
        for (int d = 0; d < 4; ++d) {
            if (d == forbidden) continue;
            if (node_in_grid(grid, i + kDirs[d].x(), j + kDirs[d].y())) cands[n_cands++] = d;
        }
        std::uniform_int_distribution<int> pick(0, n_cands - 1);
        return cands[pick(rng)];
    };
    auto opposite = [](int d) { return d ^ 1; };

    int dir = choose_direction(ni, nj, -1);
    double along = 0.0; // distance from node (ni, nj) along dir

    std::uniform_real_distribution<double> speed0(cfg.v_min, cfg.v_max);
    double speed = std::clamp(speed0(rng), cfg.v_min, cfg.v_max);
    std::normal_distribution<double> accel(0.0, kAccelSigma);

    const double dt = 1.0 / cfg.sample_rate_hz;
    Trajectory traj;
    traj.points.reserve(cfg.n_samples);

    for (int k = 0; k < cfg.n_samples; ++k) {
        TrajectoryPoint pt;
        pt.timestamp = k * dt;
        pt.position = grid.node_pos(ni, nj) +
                      along * Eigen::Vector2d(kDirs[dir].x(), kDirs[dir].y());
        pt.velocity = speed * Eigen::Vector2d(kDirs[dir].x(), kDirs[dir].y());
        traj.points.push_back(pt);

        // advance one sampling interval at the current speed
        double remaining = speed * dt;
        while (remaining > 0.0) {
            const double to_node = grid.s - along;
            if (remaining < to_node) {
                along += remaining;
                remaining = 0.0;
            } else {
                remaining -= to_node;
                ni += kDirs[dir].x();
                nj += kDirs[dir].y();
                along = 0.0;
                dir = choose_direction(ni, nj, opposite(dir));
            }
        }
        speed = std::clamp(speed + accel(rng) * dt, cfg.v_min, cfg.v_max);
    }
    return traj;
}

std::vector<int> segment_visit_counts(const ScenarioConfig& cfg, const Trajectory& traj) {
    const Grid grid(cfg);
    std::vector<int> counts(street_segment_count(cfg), 0);
    const double tol = 1e-6;

    for (const TrajectoryPoint& pt : traj.points) {
        const Eigen::Vector2d rel = (pt.position - grid.origin) / grid.s;
        const double fx = rel.x() - std::floor(rel.x());
        const double fy = rel.y() - std::floor(rel.y());
        const bool on_x_line = fy < tol || fy > 1.0 - tol; // y at a node row
        const bool on_y_line = fx < tol || fx > 1.0 - tol;
        if (on_x_line && on_y_line) continue; // exactly at a node: ambiguous
        if (on_x_line) {
            const int i = int(std::floor(rel.x()));
            const int j = int(std::lround(rel.y()));
            if (i >= 0 && i < grid.gx && j >= 0 && j <= grid.gy)
                ++counts[grid.horizontal_id(i, j)];
        } else if (on_y_line) {
            const int i = int(std::lround(rel.x()));
            const int j = int(std::floor(rel.y()));
            if (i >= 0 && i <= grid.gx && j >= 0 && j < grid.gy)
                ++counts[grid.vertical_id(i, j)];
        }
    }
    return counts;
}

namespace {

struct Scatterer {
    Eigen::Vector3d pos;
    double amplitude_gain; // linear, log-normal
};

std::vector<Scatterer> place_scatterers(const ScenarioConfig& cfg) {
    const Grid grid(cfg);
    std::mt19937_64 rng(derive_seed(cfg.rng_seed, kStreamScatterers));

    const double margin = grid.s;
    std::uniform_real_distribution<double> ux(grid.origin.x() - margin,
                                              grid.origin.x() + grid.gx * grid.s + margin);
    std::uniform_real_distribution<double> uy(grid.origin.y() - margin,
                                              grid.origin.y() + grid.gy * grid.s + margin);
    std::uniform_real_distribution<double> uz(kScatterHeightMin, kScatterHeightMax);
    std::normal_distribution<double> gain_db(0.0, kScatterGainStdDb);

    std::vector<Scatterer> out(cfg.n_paths);
    for (Scatterer& s : out) {
        s.pos = Eigen::Vector3d(ux(rng), uy(rng), uz(rng));
        s.amplitude_gain = std::pow(10.0, gain_db(rng) / 20.0);
    }
    return out;
}

std::vector<Eigen::Vector3d> element_offsets(const ArrayLayout& array, double wavelength) {
    const double d = 0.5 * wavelength;
    std::vector<Eigen::Vector3d> e(array.antenna_count());
    if (array.kind == ArrayGeometry::ULA) {
        for (int b = 0; b < array.antenna_count(); ++b)
            e[b] = Eigen::Vector3d(b * d, 0.0, 0.0);
    } else {
        for (int m = 0; m < array.rows; ++m)
            for (int n = 0; n < array.cols; ++n)
                e[m * array.cols + n] = Eigen::Vector3d(n * d, 0.0, m * d);
    }
    return e;
}

} // namespace

Dataset synthesize_csi(const Trajectory& traj, const ScenarioConfig& cfg) {
    cfg.validate();
    if (traj.points.empty())
        throw ValidationError("cannot synthesize CSI from an empty trajectory");

    const int B = cfg.array.antenna_count();
    const int W = cfg.n_subcarriers;
    const double wavelength = kSpeedOfLight / cfg.carrier_hz;
    const double subcarrier_spacing = cfg.bandwidth_hz / W;
    const double tx_amplitude = std::sqrt(std::pow(10.0, (cfg.tx_power_dbm - 30.0) / 10.0));

    const std::vector<Scatterer> scatterers = place_scatterers(cfg);
    const std::vector<Eigen::Vector3d> elements = element_offsets(cfg.array, wavelength);
    const Eigen::Vector3d bs(cfg.bs_position.x(), cfg.bs_position.y(), kBsHeight);

    // per-path scratch
    struct Path {
        double total_dist;
        Eigen::Vector3d arrival_dir; // unit, BS -> source
        double gain;
    };
    std::vector<Path> paths;
    paths.reserve(scatterers.size() + 1);

    const double sigma2 = noise_variance(cfg);
    std::mt19937_64 noise_rng(derive_seed(cfg.rng_seed, kStreamNoise));
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double noise_comp_std = sigma2 > 0.0 ? std::sqrt(sigma2 / 2.0) : 0.0;

    Dataset ds;
    ds.meta.n_antennas = std::uint32_t(B);
    ds.meta.n_subcarriers = std::uint32_t(W);
    ds.meta.cyclic_prefix = std::uint32_t(cfg.cyclic_prefix);
    ds.meta.array = cfg.array;
    ds.meta.bandwidth_hz = cfg.bandwidth_hz;
    ds.meta.carrier_hz = cfg.carrier_hz;
    ds.samples.reserve(traj.points.size());

    Eigen::MatrixXcd h(B, W);
    Eigen::VectorXcd steer(B), ramp(W);

    for (const TrajectoryPoint& pt : traj.points) {
        const Eigen::Vector3d ue(pt.position.x(), pt.position.y(), kUeHeight);

        paths.clear();
        for (const Scatterer& s : scatterers) {
            Path p;
            p.total_dist = (ue - s.pos).norm() + (s.pos - bs).norm();
            p.arrival_dir = (s.pos - bs).normalized();
            p.gain = s.amplitude_gain;
            paths.push_back(p);
        }
        if (cfg.include_los) {
            Path p;
            p.total_dist = (ue - bs).norm();
            p.arrival_dir = (ue - bs).normalized();
            p.gain = 1.0;
            paths.push_back(p);
        }

        double tau_min = std::numeric_limits<double>::infinity();
        for (const Path& p : paths)
            tau_min = std::min(tau_min, p.total_dist / kSpeedOfLight);

        h.setZero();
        for (const Path& p : paths) {
            const double tau = p.total_dist / kSpeedOfLight;
            const double tau_sync = tau - tau_min; // receiver locks to first arrival
            const double amp = tx_amplitude * p.gain * wavelength /
                               (4.0 * std::numbers::pi * p.total_dist);
            const std::complex<double> alpha =
                std::polar(amp, -2.0 * std::numbers::pi * cfg.carrier_hz * tau);
            for (int b = 0; b < B; ++b)
                steer(b) = std::polar(1.0, 2.0 * std::numbers::pi *
                                               elements[b].dot(p.arrival_dir) / wavelength);
            for (int w = 0; w < W; ++w)
                ramp(w) = std::polar(1.0, -2.0 * std::numbers::pi * w * subcarrier_spacing * tau_sync);
            h.noalias() += alpha * steer * ramp.transpose();
        }

        CSISample sample;
        sample.h.resize(B, W);
        if (noise_comp_std > 0.0) {
            for (int b = 0; b < B; ++b)
                for (int w = 0; w < W; ++w) {
                    const double re = gauss(noise_rng) * noise_comp_std;
                    const double im = gauss(noise_rng) * noise_comp_std;
                    sample.h(b, w) = std::complex<float>(float(h(b, w).real() + re),
                                                         float(h(b, w).imag() + im));
                }
        } else {
            sample.h = h.cast<std::complex<float>>();
        }
        sample.ue_id = cfg.ue_id;
        sample.timestamp = pt.timestamp;
        sample.ground_truth = pt.position;
        ds.samples.push_back(std::move(sample));
    }

    ds.validate();
    return ds;
}

} // namespace chanchart
