#include "chanchart/features.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <string>
#include <thread>

namespace chanchart {

Eigen::MatrixXcd unitary_dft(int n) {
    Eigen::MatrixXcd f(n, n);
    const double scale = 1.0 / std::sqrt(double(n));
    for (int k = 0; k < n; ++k) {
        for (int m = 0; m < n; ++m) {
            const double ang = -2.0 * std::numbers::pi * double(k) * double(m) / double(n);
            f(k, m) = std::polar(scale, ang);
        }
    }
    return f;
}

Eigen::MatrixXcd normalize(const Eigen::MatrixXcd& h) {
    const double nrm = h.norm();
    if (nrm == 0.0)
        throw DegenerateInputError("cannot normalize an all-zero CSI matrix");
    return h / nrm;
}

Eigen::MatrixXcd delay_transform(const Eigen::MatrixXcd& h_norm, int cyclic_prefix) {
    const int w = int(h_norm.cols());
    if (cyclic_prefix < 1 || cyclic_prefix > w)
        throw ConfigError("cyclic prefix must satisfy 1 <= C <= W, got C=" +
                          std::to_string(cyclic_prefix) + ", W=" + std::to_string(w));
    // H F^H, truncated: only the first C columns of F^H are needed.
    Eigen::MatrixXcd fh_cols(w, cyclic_prefix);
    const double scale = 1.0 / std::sqrt(double(w));
    for (int m = 0; m < w; ++m)
        for (int tap = 0; tap < cyclic_prefix; ++tap)
            fh_cols(m, tap) = std::polar(scale, 2.0 * std::numbers::pi * double(m) * double(tap) / double(w));
    return h_norm * fh_cols;
}

Eigen::MatrixXcd beamspace_transform(const Eigen::MatrixXcd& h_delay, const ArrayLayout& array) {
    const int b = int(h_delay.rows());
    if (array.antenna_count() != b)
        throw ConfigError("array layout antenna count " + std::to_string(array.antenna_count()) +
                          " does not match matrix rows " + std::to_string(b));
    if (array.kind == ArrayGeometry::ULA)
        return unitary_dft(b) * h_delay;

    const int r = array.rows, c = array.cols;
    const Eigen::MatrixXcd fr = unitary_dft(r);
    const Eigen::MatrixXcd fc = unitary_dft(c);
    Eigen::MatrixXcd out(b, h_delay.cols());
    for (int col = 0; col < h_delay.cols(); ++col) {
        // row-major antenna indexing: antenna (m, n) sits at row m*c + n
        Eigen::MatrixXcd panel(r, c);
        for (int m = 0; m < r; ++m)
            for (int n = 0; n < c; ++n)
                panel(m, n) = h_delay(m * c + n, col);
        Eigen::MatrixXcd spec = fr * panel * fc.transpose();
        for (int m = 0; m < r; ++m)
            for (int n = 0; n < c; ++n)
                out(m * c + n, col) = spec(m, n);
    }
    return out;
}

Eigen::MatrixXcd autocorrelate(const Eigen::MatrixXcd& h_beam) {
    const int b = int(h_beam.rows());
    const int c = int(h_beam.cols());
    // Direct O((B*C)^2) lag sums; B and C stay <= 64 in practice.
    Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(b, c);
    for (int m = 0; m < b; ++m) {
        for (int n = 0; n < c; ++n) {
            std::complex<double> acc = 0.0;
            for (int a = 0; a < b; ++a) {
                const int a2 = (a + m) % b;
                for (int k = 0; k < c; ++k)
                    acc += h_beam(a, k) * std::conj(h_beam(a2, (k + n) % c));
            }
            r(m, n) = acc;
        }
    }
    return r;
}

int feature_length(const DatasetMeta& meta) {
    const int b = int(meta.n_antennas);
    const int c = int(meta.cyclic_prefix);
    return ((b + 1) / 2) * c;
}

FeatureVector extract_feature(const CSISample& sample, const DatasetMeta& meta, int source_index) {
    const Eigen::MatrixXcd h = sample.h.cast<std::complex<double>>();
    const Eigen::MatrixXcd acorr = autocorrelate(
        beamspace_transform(delay_transform(normalize(h), int(meta.cyclic_prefix)), meta.array));

    const int kept_rows = (int(meta.n_antennas) + 1) / 2;
    const int c = int(acorr.cols());
    FeatureVector f;
    f.values.resize(kept_rows * c);
    for (int m = 0; m < kept_rows; ++m)
        for (int n = 0; n < c; ++n)
            f.values(m * c + n) = std::abs(acorr(m, n));
    f.source_index = source_index;
    f.timestamp = sample.timestamp;
    return f;
}

std::vector<FeatureVector> extract_features(const Dataset& ds, int n_threads) {
    if (n_threads < 1) throw ConfigError("extract_features: thread count must be >= 1");
    std::vector<FeatureVector> out(ds.samples.size());
    const auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            out[i] = extract_feature(ds.samples[i], ds.meta, int(i));
    };
    const std::size_t n = ds.samples.size();
    const std::size_t workers = std::min<std::size_t>(std::size_t(n_threads), std::max<std::size_t>(n, 1));
    if (workers <= 1) {
        work(0, n);
        return out;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        if (begin >= n) break;
        pool.emplace_back(work, begin, std::min(n, begin + chunk));
    }
    for (auto& t : pool) t.join();
    return out;
}

std::vector<FeatureVector> average_features(const std::vector<FeatureVector>& features,
                                            const Dataset& ds, int group_size) {
    if (group_size <= 1) return features;
    if (features.size() != ds.samples.size())
        throw ShapeError("feature list does not align with dataset");

    std::vector<FeatureVector> out;
    std::size_t i = 0;
    while (i < features.size()) {
        const std::uint32_t ue = ds.samples[i].ue_id;
        std::size_t j = i;
        while (j < features.size() && j - i < std::size_t(group_size) &&
               ds.samples[j].ue_id == ue)
            ++j;
        FeatureVector avg;
        avg.values = Eigen::VectorXd::Zero(features[i].values.size());
        double tsum = 0.0;
        for (std::size_t k = i; k < j; ++k) {
            avg.values += features[k].values;
            tsum += features[k].timestamp;
        }
        const double cnt = double(j - i);
        avg.values /= cnt;
        avg.timestamp = tsum / cnt;
        avg.source_index = features[i].source_index;
        out.push_back(std::move(avg));
        i = j;
    }
    return out;
}

void write_features_csv(const std::vector<FeatureVector>& features,
                        const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os)
        throw IoError("cannot open for writing: " + path.string());
    os << "index,timestamp";
    const int f = features.empty() ? 0 : int(features[0].values.size());
    for (int k = 0; k < f; ++k) os << ",v" << k;
    os << "\n";
    char buf[64];
    for (const FeatureVector& fv : features) {
        os << fv.source_index;
        std::snprintf(buf, sizeof buf, "%.17g", fv.timestamp);
        os << ',' << buf;
        for (int k = 0; k < fv.values.size(); ++k) {
            std::snprintf(buf, sizeof buf, "%.17g", fv.values(k));
            os << ',' << buf;
        }
        os << "\n";
    }
    if (!os)
        throw IoError("write failed: " + path.string());
}

} // namespace chanchart
