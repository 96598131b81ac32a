#include "run_config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "chanchart/errors.hpp"

namespace chanchart::cli {

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_auto(double v) { return v <= 0.0 ? "auto" : fmt_double(v); }

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("key " + key + ": expected a number, got '" + v + "'");
    }
}

double parse_auto(const std::string& key, const std::string& v) {
    if (v == "auto") return 0.0;
    const double d = parse_double(key, v);
    if (d <= 0.0) throw ConfigError("key " + key + ": expected 'auto' or a positive number");
    return d;
}

long long parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long long i = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return i;
    } catch (const std::exception&) {
        throw ConfigError("key " + key + ": expected an integer, got '" + v + "'");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const unsigned long long i = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return i;
    } catch (const std::exception&) {
        throw ConfigError("key " + key + ": expected an unsigned integer, got '" + v + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("key " + key + ": expected true/false, got '" + v + "'");
}

struct Entry {
    const char* name;
    const char* help;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

#define DOUBLE_KEY(field, help_text) \
    Entry{#field, help_text, \
          [](RunConfig& c, const std::string& v) { c.field = parse_double(#field, v); }, \
          [](const RunConfig& c) { return fmt_double(c.field); }}
#define AUTO_KEY(field, help_text) \
    Entry{#field, help_text, \
          [](RunConfig& c, const std::string& v) { c.field = parse_auto(#field, v); }, \
          [](const RunConfig& c) { return fmt_auto(c.field); }}
#define INT_KEY(field, help_text) \
    Entry{#field, help_text, \
          [](RunConfig& c, const std::string& v) { c.field = static_cast<int>(parse_int(#field, v)); }, \
          [](const RunConfig& c) { return std::to_string(c.field); }}
#define BOOL_KEY(field, help_text) \
    Entry{#field, help_text, \
          [](RunConfig& c, const std::string& v) { c.field = parse_bool(#field, v); }, \
          [](const RunConfig& c) { return c.field ? std::string("true") : std::string("false"); }}
#define STRING_KEY(field, help_text) \
    Entry{#field, help_text, [](RunConfig& c, const std::string& v) { c.field = v; }, \
          [](const RunConfig& c) { return c.field; }}

const std::vector<Entry>& registry() {
    static const std::vector<Entry> entries = {
        INT_KEY(grid_blocks_x, "street-grid blocks along x"),
        INT_KEY(grid_blocks_y, "street-grid blocks along y"),
        DOUBLE_KEY(block_size, "block edge length in meters"),
        DOUBLE_KEY(v_min, "minimum UE speed, m/s (also the negative-bound speed)"),
        DOUBLE_KEY(v_max, "maximum UE speed, m/s (also the positive-bound speed)"),
        DOUBLE_KEY(sample_rate, "CSI sampling rate, Hz"),
        INT_KEY(n_samples, "number of CSI samples to generate"),
        DOUBLE_KEY(bs_x, "base-station x position, m"),
        DOUBLE_KEY(bs_y, "base-station y position, m"),
        STRING_KEY(array_geometry, "antenna array type: ula | ura"),
        INT_KEY(n_antennas, "ULA element count"),
        INT_KEY(array_rows, "URA rows"),
        INT_KEY(array_cols, "URA columns"),
        INT_KEY(n_subcarriers, "OFDM subcarriers W"),
        DOUBLE_KEY(bandwidth_hz, "system bandwidth, Hz"),
        DOUBLE_KEY(carrier_hz, "carrier frequency, Hz"),
        INT_KEY(cyclic_prefix, "cyclic prefix length C (delay taps kept)"),
        INT_KEY(n_paths, "number of scatterer paths"),
        BOOL_KEY(include_los, "add a line-of-sight path"),
        DOUBLE_KEY(noise_temperature_k, "thermal noise temperature, K (0 = noiseless)"),
        DOUBLE_KEY(tx_power_dbm, "transmit power, dBm"),
        Entry{"ue_id", "user-equipment id recorded in the dataset",
              [](RunConfig& c, const std::string& v) {
                  c.ue_id = static_cast<std::uint32_t>(parse_u64("ue_id", v));
              },
              [](const RunConfig& c) { return std::to_string(c.ue_id); }},
        AUTO_KEY(t_close, "close-time window T_c, s (auto = 3 sampling intervals)"),
        AUTO_KEY(t_far, "far-time window T_f, s (auto = 50 * t_close)"),
        DOUBLE_KEY(intersection_quantile, "feature-distance quantile for revisit recovery"),
        INT_KEY(triplets_per_anchor, "triplets drawn per anchor"),
        INT_KEY(max_negative_retries, "negative redraws before skipping an anchor"),
        BOOL_KEY(reidentify, "re-label feature-near negatives as positives"),
        INT_KEY(grid_side, "centroid grid side length"),
        AUTO_KEY(chart_extent, "centroid grid half-width, m (auto = v_max * t_far)"),
        STRING_KEY(loss, "loss kind: sammon | triplet | split_triplet"),
        DOUBLE_KEY(lambda, "triplet margin"),
        DOUBLE_KEY(mu, "inertial regularizer weight"),
        INT_KEY(epochs, "training epochs"),
        INT_KEY(batch_size, "triplets per optimizer step"),
        DOUBLE_KEY(learning_rate, "Adam learning rate"),
        DOUBLE_KEY(adam_beta1, "Adam first-moment decay"),
        DOUBLE_KEY(adam_beta2, "Adam second-moment decay"),
        DOUBLE_KEY(adam_eps, "Adam epsilon"),
        BOOL_KEY(resample_each_epoch, "redraw triplets every epoch"),
        INT_KEY(eval_max_n, "metric subsample cap"),
        INT_KEY(feature_group, "featurize: average groups of this many consecutive features"),
        INT_KEY(threads, "worker thread cap for feature extraction"),
        Entry{"seed", "master RNG seed",
              [](RunConfig& c, const std::string& v) { c.seed = parse_u64("seed", v); },
              [](const RunConfig& c) { return std::to_string(c.seed); }},
        STRING_KEY(label, "run label used in comparison tables"),
        STRING_KEY(dataset, "dataset file path (CCD1)"),
        STRING_KEY(checkpoint, "model checkpoint path (CCM1)"),
        STRING_KEY(out_dir, "directory for emitted artifacts"),
    };
    return entries;
}

#undef DOUBLE_KEY
#undef AUTO_KEY
#undef INT_KEY
#undef BOOL_KEY
#undef STRING_KEY

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

} // namespace

void apply_key(RunConfig& cfg, std::string key, const std::string& value) {
    std::replace(key.begin(), key.end(), '-', '_');
    for (const Entry& e : registry()) {
        if (key == e.name) {
            e.set(cfg, value);
            return;
        }
    }
    throw ConfigError("unknown config key: " + key);
}

void apply_file(RunConfig& cfg, const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read config file: " + path.string());
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                              ": expected key = value");
        apply_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
}

std::vector<std::pair<std::string, std::string>> config_items(const RunConfig& cfg) {
    std::vector<std::pair<std::string, std::string>> items;
    items.reserve(registry().size());
    for (const Entry& e : registry()) items.emplace_back(e.name, e.get(cfg));
    std::sort(items.begin(), items.end());
    return items;
}

std::string config_hash(const RunConfig& cfg) {
    std::uint64_t h = 14695981039346656037ull;
    const auto mix = [&h](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ull;
        }
    };
    for (const auto& [k, v] : config_items(cfg)) {
        mix(k);
        mix("=");
        mix(v);
        mix("\n");
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string keys_help() {
    std::ostringstream os;
    RunConfig defaults;
    for (const Entry& e : registry()) {
        // Canonical values carry full precision for hashing; shorten
        // round-trippable numbers for display.
        std::string shown = e.get(defaults);
        if (!shown.empty() && shown.find_first_not_of("0123456789.e+-") == std::string::npos) {
            try {
                std::size_t pos = 0;
                const double d = std::stod(shown, &pos);
                if (pos == shown.size()) {
                    char buf[40];
                    std::snprintf(buf, sizeof(buf), "%g", d);
                    if (std::stod(buf) == d) shown = buf;
                }
            } catch (const std::exception&) {
            }
        }
        char line[160];
        std::snprintf(line, sizeof(line), "  --%-24s %s (default: %s)\n", e.name, e.help,
                      shown.empty() ? "<none>" : shown.c_str());
        os << line;
    }
    return os.str();
}

ScenarioConfig build_scenario(const RunConfig& cfg) {
    ScenarioConfig sc;
    sc.grid_blocks_x = cfg.grid_blocks_x;
    sc.grid_blocks_y = cfg.grid_blocks_y;
    sc.block_size_m = cfg.block_size;
    sc.v_min = cfg.v_min;
    sc.v_max = cfg.v_max;
    sc.sample_rate_hz = cfg.sample_rate;
    sc.n_samples = cfg.n_samples;
    sc.bs_position = Eigen::Vector2d(cfg.bs_x, cfg.bs_y);
    if (cfg.array_geometry == "ula") {
        sc.array = ArrayLayout::ula(static_cast<std::uint16_t>(cfg.n_antennas));
    } else if (cfg.array_geometry == "ura") {
        sc.array = ArrayLayout::ura(static_cast<std::uint16_t>(cfg.array_rows),
                                    static_cast<std::uint16_t>(cfg.array_cols));
    } else {
        throw ConfigError("key array_geometry: expected 'ula' or 'ura', got '" +
                          cfg.array_geometry + "'");
    }
    sc.n_subcarriers = cfg.n_subcarriers;
    sc.bandwidth_hz = cfg.bandwidth_hz;
    sc.carrier_hz = cfg.carrier_hz;
    sc.cyclic_prefix = cfg.cyclic_prefix;
    sc.n_paths = cfg.n_paths;
    sc.include_los = cfg.include_los;
    sc.noise_temperature_k = cfg.noise_temperature_k;
    sc.tx_power_dbm = cfg.tx_power_dbm;
    sc.rng_seed = cfg.seed;
    sc.ue_id = cfg.ue_id;
    return sc;
}

} // namespace chanchart::cli
