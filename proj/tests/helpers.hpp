#pragma once

// Shared fixtures and independent oracles for the test suite: naive
// O(n^2) DFT/correlation references, finite differences, brute-force
// rank metrics, and small hand-built datasets.  Oracles here are written
// from the definitions, not by calling back into the library, so a bug
// in an optimized code path cannot hide.

#include <atomic>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "chanchart/dataset.hpp"
#include "chanchart/features.hpp"
#include "chanchart/metrics.hpp"

#ifdef CHANCHART_CLI_PATH
#include <sys/wait.h>
#endif

namespace testutil {

// ---------------------------------------------------------------- files

class TempDir {
public:
    TempDir() {
        static std::atomic<unsigned> counter{0};
        const auto base = std::filesystem::temp_directory_path();
        path_ = base / ("chanchart_test_" + std::to_string(counter.fetch_add(1)) + "_" +
                        std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

inline std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) lines.push_back(line);
    return lines;
}

// ------------------------------------------------------- random builders

inline Eigen::MatrixXcd random_complex(std::mt19937_64& rng, int rows, int cols) {
    std::normal_distribution<double> gauss;
    Eigen::MatrixXcd m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = std::complex<double>(gauss(rng), gauss(rng));
    return m;
}

inline chanchart::PointMatrix random_points(std::mt19937_64& rng, int n, double scale = 1.0) {
    std::normal_distribution<double> gauss;
    chanchart::PointMatrix m(n, 2);
    for (int i = 0; i < n; ++i) m.row(i) << scale * gauss(rng), scale * gauss(rng);
    return m;
}

// --------------------------------------------------- transform oracles
//
// Direct-sum references for the feature pipeline stages, O(n^2) each.

inline Eigen::MatrixXcd naive_delay_transform(const Eigen::MatrixXcd& h, int taps) {
    const int w = static_cast<int>(h.cols());
    Eigen::MatrixXcd out(h.rows(), taps);
    for (int b = 0; b < h.rows(); ++b)
        for (int t = 0; t < taps; ++t) {
            std::complex<double> acc = 0.0;
            for (int k = 0; k < w; ++k)
                acc += h(b, k) * std::polar(1.0, 2.0 * std::numbers::pi * k * t / w);
            out(b, t) = acc / std::sqrt(double(w));
        }
    return out;
}

inline Eigen::MatrixXcd naive_beamspace_ula(const Eigen::MatrixXcd& h) {
    const int b_dim = static_cast<int>(h.rows());
    Eigen::MatrixXcd out(b_dim, h.cols());
    for (int k = 0; k < b_dim; ++k)
        for (int c = 0; c < h.cols(); ++c) {
            std::complex<double> acc = 0.0;
            for (int b = 0; b < b_dim; ++b)
                acc += h(b, c) * std::polar(1.0, -2.0 * std::numbers::pi * k * b / b_dim);
            out(k, c) = acc / std::sqrt(double(b_dim));
        }
    return out;
}

// Each column reshaped row-major to r x c, 2D unitary DFT, re-vectorized.
inline Eigen::MatrixXcd naive_beamspace_ura(const Eigen::MatrixXcd& h, int r, int c) {
    Eigen::MatrixXcd out(h.rows(), h.cols());
    for (int col = 0; col < h.cols(); ++col)
        for (int p = 0; p < r; ++p)
            for (int q = 0; q < c; ++q) {
                std::complex<double> acc = 0.0;
                for (int m = 0; m < r; ++m)
                    for (int n = 0; n < c; ++n)
                        acc += h(m * c + n, col) *
                               std::polar(1.0, -2.0 * std::numbers::pi *
                                                   (double(p) * m / r + double(q) * n / c));
                out(p * c + q, col) = acc / std::sqrt(double(r) * double(c));
            }
    return out;
}

inline Eigen::MatrixXcd naive_autocorrelate(const Eigen::MatrixXcd& h) {
    const int rows = static_cast<int>(h.rows());
    const int cols = static_cast<int>(h.cols());
    Eigen::MatrixXcd out(rows, cols);
    for (int m = 0; m < rows; ++m)
        for (int n = 0; n < cols; ++n) {
            std::complex<double> acc = 0.0;
            for (int a = 0; a < rows; ++a)
                for (int b = 0; b < cols; ++b)
                    acc += h(a, b) * std::conj(h((a + m) % rows, (b + n) % cols));
            out(m, n) = acc;
        }
    return out;
}

// Whole pipeline from the stage oracles above: normalize, delay,
// beamspace, autocorrelate, keep rows 0..ceil(B/2)-1, magnitudes
// vectorized row-major.
inline Eigen::VectorXd naive_feature(const Eigen::MatrixXcd& h, const chanchart::DatasetMeta& meta) {
    const Eigen::MatrixXcd norm = h / h.norm();
    const Eigen::MatrixXcd delay = naive_delay_transform(norm, static_cast<int>(meta.cyclic_prefix));
    const Eigen::MatrixXcd beam = meta.array.kind == chanchart::ArrayGeometry::ULA
                                      ? naive_beamspace_ula(delay)
                                      : naive_beamspace_ura(delay, meta.array.rows, meta.array.cols);
    const Eigen::MatrixXcd acorr = naive_autocorrelate(beam);
    const int kept = (static_cast<int>(meta.n_antennas) + 1) / 2;
    const int taps = static_cast<int>(meta.cyclic_prefix);
    Eigen::VectorXd f(kept * taps);
    for (int m = 0; m < kept; ++m)
        for (int n = 0; n < taps; ++n) f(m * taps + n) = std::abs(acorr(m, n));
    return f;
}

// ------------------------------------------------------ finite differences

inline double rel_err(double a, double b) {
    const double denom = std::max(std::abs(a), std::abs(b));
    if (denom < 1e-8) return 0.0; // both effectively zero
    return std::abs(a - b) / denom;
}

// Central difference of f() with respect to one designated scalar slot.
template <typename Fn>
double central_diff(Fn&& f, double& slot, double h) {
    const double saved = slot;
    slot = saved + h;
    const double fp = f();
    slot = saved - h;
    const double fm = f();
    slot = saved;
    return (fp - fm) / (2.0 * h);
}

// ------------------------------------------------------- metric oracles

inline std::vector<double> upper_triangle_distances(const chanchart::PointMatrix& x) {
    std::vector<double> d;
    for (Eigen::Index i = 0; i + 1 < x.rows(); ++i)
        for (Eigen::Index j = i + 1; j < x.rows(); ++j) d.push_back((x.row(i) - x.row(j)).norm());
    return d;
}

inline double naive_kruskal_stress(const chanchart::PointMatrix& truth,
                                   const chanchart::PointMatrix& emb) {
    const auto d = upper_triangle_distances(truth);
    const auto e = upper_triangle_distances(emb);
    double dot = 0.0, dd = 0.0, ee = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        dot += d[i] * e[i];
        dd += d[i] * d[i];
        ee += e[i] * e[i];
    }
    const double cos2 = dot * dot / (dd * ee);
    return std::sqrt(std::max(0.0, 1.0 - cos2));
}

// All other points sorted by distance from point i, ties by index.
inline std::vector<int> neighbors_by_distance(const chanchart::PointMatrix& x, int i) {
    std::vector<int> order;
    for (int j = 0; j < x.rows(); ++j)
        if (j != i) order.push_back(j);
    std::sort(order.begin(), order.end(), [&x, i](int a, int b) {
        const double da = (x.row(a) - x.row(i)).norm();
        const double db = (x.row(b) - x.row(i)).norm();
        if (da != db) return da < db;
        return a < b;
    });
    return order;
}

// Brute-force trustworthiness: neighbor sets from the embedding, ranks
// from ground truth, penalty (r - K) for the set members whose true rank
// exceeds K, normalized by (2N - 3K - 1) N K.
inline double naive_trustworthiness(const chanchart::PointMatrix& truth,
                                    const chanchart::PointMatrix& emb, int k) {
    const int n = static_cast<int>(truth.rows());
    double penalty = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto by_truth = neighbors_by_distance(truth, i);
        const auto by_emb = neighbors_by_distance(emb, i);
        std::vector<int> rank_truth(static_cast<std::size_t>(n), 0);
        for (std::size_t pos = 0; pos < by_truth.size(); ++pos)
            rank_truth[static_cast<std::size_t>(by_truth[pos])] = static_cast<int>(pos) + 1;
        for (int pos = 0; pos < k; ++pos) {
            const int r = rank_truth[static_cast<std::size_t>(by_emb[static_cast<std::size_t>(pos)])];
            if (r > k) penalty += r - k;
        }
    }
    return 1.0 - penalty / ((2.0 * n - 3.0 * k - 1.0) * n * k);
}

/// Brute-force continuity: neighbor sets from ground truth, ranks from
// the embedding.
inline double naive_continuity(const chanchart::PointMatrix& truth,
                               const chanchart::PointMatrix& emb, int k) {
    const int n = static_cast<int>(truth.rows());
    double penalty = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto by_truth = neighbors_by_distance(truth, i);
        const auto by_emb = neighbors_by_distance(emb, i);
        std::vector<int> rank_emb(static_cast<std::size_t>(n), 0);
        for (std::size_t pos = 0; pos < by_emb.size(); ++pos)
            rank_emb[static_cast<std::size_t>(by_emb[pos])] = static_cast<int>(pos) + 1;
        for (int pos = 0; pos < k; ++pos) {
            const int r = rank_emb[static_cast<std::size_t>(by_truth[static_cast<std::size_t>(pos)])];
            if (r > k) penalty += r - k;
        }
    }
    return 1.0 - penalty / ((2.0 * n - 3.0 * k - 1.0) * n * k);
}

inline Eigen::Matrix2d rotation2(double theta) {
    Eigen::Matrix2d r;
    r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    return r;
}

inline Eigen::Matrix2d reflection2(double theta) {
    Eigen::Matrix2d m;
    m << std::cos(theta), std::sin(theta), std::sin(theta), -std::cos(theta);
    return m; // orthogonal with det -1
}

// Centers the point set and maps it through Cov^(-1/2), so the sample
// covariance becomes the identity.  Rotating a whitened set leaves its
// per-axis standard deviations equal, which the per-dimension
// standardization inside sr_metric requires for exact rotation
// invariance.
inline chanchart::PointMatrix whiten(const chanchart::PointMatrix& x) {
    const double n = static_cast<double>(x.rows());
    chanchart::PointMatrix centered = x.rowwise() - (x.colwise().sum() / n);
    const Eigen::Matrix2d cov = centered.transpose() * centered / n;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
    return centered * es.operatorInverseSqrt();
}

// ------------------------------------------------- hand-built datasets

// Straight-line constant-speed track along the x-axis with placeholder
// 1x2 CSI.  Tests that exercise selection supply features directly.
inline chanchart::Dataset line_dataset(int n, double dt, double speed, std::uint32_t ue_id = 0) {
    chanchart::Dataset ds;
    ds.meta.n_antennas = 1;
    ds.meta.n_subcarriers = 2;
    ds.meta.cyclic_prefix = 1;
    ds.meta.array = chanchart::ArrayLayout::ula(1);
    ds.meta.bandwidth_hz = 1e6;
    ds.meta.carrier_hz = 1e9;
    for (int i = 0; i < n; ++i) {
        chanchart::CSISample s;
        s.h = Eigen::MatrixXcf::Constant(1, 2, std::complex<float>(1.0f, 0.0f));
        s.ue_id = ue_id;
        s.timestamp = i * dt;
        s.ground_truth = Eigen::Vector2d(speed * i * dt, 0.0);
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

// Features equal to the ground-truth coordinates; feature distances then
// coincide with physical distances, which makes reidentification
// behavior fully predictable.
inline std::vector<chanchart::FeatureVector> features_from_truth(const chanchart::Dataset& ds) {
    std::vector<chanchart::FeatureVector> fs(ds.samples.size());
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        fs[i].values = *ds.samples[i].ground_truth;
        fs[i].source_index = static_cast<int>(i);
        fs[i].timestamp = ds.samples[i].timestamp;
    }
    return fs;
}

// ------------------------------------------------------------ CLI runner

#ifdef CHANCHART_CLI_PATH
struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

inline CliResult run_cli(const std::string& args, const std::filesystem::path& scratch) {
    const auto out_path = scratch / "cli_stdout.txt";
    const auto err_path = scratch / "cli_stderr.txt";
    const std::string cmd = std::string(CHANCHART_CLI_PATH) + " " + args + " > " +
                            out_path.string() + " 2> " + err_path.string();
    const int raw = std::system(cmd.c_str());
    CliResult r;
    r.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = read_file(out_path);
    r.err = read_file(err_path);
    return r;
}
#endif

} // namespace testutil
