#pragma once

// Flat key=value run configuration shared by all subcommands.  Keys map
// 1:1 onto --key command-line overrides (dashes and underscores are
// interchangeable); unknown keys are rejected.

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "chanchart/scenario.hpp"
#include "chanchart/selection.hpp"

namespace chanchart::cli {

struct RunConfig {
    // Scenario (generate / compare's shared dataset).
    int grid_blocks_x = 4;
    int grid_blocks_y = 4;
    double block_size = 20.0;   // meters
    double v_min = 0.5;         // m/s, also the selection speed bounds
    double v_max = 2.0;
    double sample_rate = 2.0;   // Hz
    int n_samples = 2000;
    double bs_x = 0.0;
    double bs_y = 90.0;
    std::string array_geometry = "ula"; // ula | ura
    int n_antennas = 32;                // ULA element count
    int array_rows = 4;                 // URA layout
    int array_cols = 8;
    int n_subcarriers = 64;
    double bandwidth_hz = 20e6;
    double carrier_hz = 2.4e9;
    int cyclic_prefix = 16;
    int n_paths = 12;
    bool include_los = false;
    double noise_temperature_k = 300.0;
    double tx_power_dbm = 0.0;
    std::uint32_t ue_id = 0;

    // Triplet selection.  t_close/t_far <= 0 mean "auto": three median
    // sampling intervals, and 50 * t_close respectively.
    double t_close = 0.0;
    double t_far = 0.0;
    double intersection_quantile = 0.01;
    int triplets_per_anchor = 8;
    int max_negative_retries = 16;
    bool reidentify = true;

    // Model.  chart_extent <= 0 means "auto": v_max * t_far.
    int grid_side = 16;
    double chart_extent = 0.0;

    // Loss.
    std::string loss = "split_triplet"; // sammon | triplet | split_triplet
    double lambda = 1.0;
    double mu = 0.2;

    // Training.
    int epochs = 100;
    int batch_size = 256;
    double learning_rate = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    bool resample_each_epoch = false;

    // Evaluation.
    int eval_max_n = 5000;

    // Misc / IO.
    int feature_group = 1; // featurize-only averaging window
    int threads = 1;
    std::uint64_t seed = 1;
    std::string label;
    std::string dataset = "dataset.ccd";
    std::string checkpoint; // empty: <out_dir>/checkpoint.ccm
    std::string out_dir = ".";
};

/// Sets one key (dashes normalized to underscores).  Throws ConfigError
/// for unknown keys or unparsable values, naming the key.
void apply_key(RunConfig& cfg, std::string key, const std::string& value);

/// Applies `key = value` lines from a file ('#' comments, blank lines ok).
void apply_file(RunConfig& cfg, const std::filesystem::path& path);

/// Canonical (sorted) key=value listing of every setting.
std::vector<std::pair<std::string, std::string>> config_items(const RunConfig& cfg);

/// FNV-1a 64-bit hash over the canonical listing, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

/// One help line per key for --help.
std::string keys_help();

/// Scenario portion of the config, with the antenna array resolved.
ScenarioConfig build_scenario(const RunConfig& cfg);

} // namespace chanchart::cli
