#include "chanchart/model.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <string>

#include "chanchart/binio.hpp"
#include "chanchart/errors.hpp"

namespace chanchart {

using namespace binio;

namespace {
constexpr char kModelMagic[4] = {'C', 'C', 'M', '1'};
}

CentroidGrid CentroidGrid::make(int side, double extent) {
    if (side < 2) throw ConfigError("centroid grid: side must be >= 2");
    if (!(extent > 0.0) || !std::isfinite(extent))
        throw ConfigError("centroid grid: extent must be positive and finite");
    CentroidGrid g;
    g.side = side;
    g.extent = extent;
    g.centers.resize(side * side, 2);
    for (int row = 0; row < side; ++row) {
        const double y = -extent + 2.0 * extent * row / (side - 1);
        for (int col = 0; col < side; ++col) {
            const double x = -extent + 2.0 * extent * col / (side - 1);
            g.centers.row(row * side + col) << x, y;
        }
    }
    return g;
}

std::size_t ChartModel::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l)
        n += static_cast<std::size_t>(weights[l].size()) + static_cast<std::size_t>(biases[l].size());
    return n;
}

ChartModel init_model(int input_dim, const CentroidGrid& grid, std::uint64_t rng_seed) {
    if (input_dim < 4) throw ConfigError("init_model: input dimension must be >= 4");
    if (grid.centers.rows() != static_cast<Eigen::Index>(grid.side) * grid.side)
        throw ContractError("init_model: centroid grid has not been materialized");

    ChartModel m;
    m.grid = grid;
    m.layer_dims = {input_dim, input_dim / 2, input_dim / 4, grid.size()};
    std::mt19937_64 rng(rng_seed);
    for (std::size_t l = 0; l + 1 < m.layer_dims.size(); ++l) {
        const int fan_in = m.layer_dims[l];
        const int fan_out = m.layer_dims[l + 1];
        const double bound = std::sqrt(6.0 / fan_in);
        std::uniform_real_distribution<double> dist(-bound, bound);
        Eigen::MatrixXd w(fan_out, fan_in);
        for (int r = 0; r < fan_out; ++r)
            for (int c = 0; c < fan_in; ++c) w(r, c) = dist(rng);
        m.weights.push_back(std::move(w));
        m.biases.push_back(Eigen::VectorXd::Zero(fan_out));
    }
    return m;
}

Eigen::Matrix<double, Eigen::Dynamic, 2> forward_batch(const ChartModel& model,
                                                       const Eigen::MatrixXd& features,
                                                       BatchCache* cache) {
    if (features.cols() != model.input_dim())
        throw ShapeError("forward: feature width " + std::to_string(features.cols()) +
                         " does not match model input " + std::to_string(model.input_dim()));

    const auto& w = model.weights;
    const auto& b = model.biases;
    Eigen::MatrixXd z1 = (features * w[0].transpose()).rowwise() + b[0].transpose();
    Eigen::MatrixXd a1 = z1.cwiseMax(0.0);
    Eigen::MatrixXd z2 = (a1 * w[1].transpose()).rowwise() + b[1].transpose();
    Eigen::MatrixXd a2 = z2.cwiseMax(0.0);
    Eigen::MatrixXd z3 = (a2 * w[2].transpose()).rowwise() + b[2].transpose();

    Eigen::MatrixXd pmf(z3.rows(), z3.cols());
    for (Eigen::Index i = 0; i < z3.rows(); ++i) {
        const double zmax = z3.row(i).maxCoeff();
        Eigen::ArrayXd e = (z3.row(i).array() - zmax).exp();
        pmf.row(i) = (e / e.sum()).matrix();
    }
    Eigen::Matrix<double, Eigen::Dynamic, 2> points = pmf * model.grid.centers;

    if (cache) {
        cache->revision = model.revision;
        cache->input = features;
        cache->z1 = std::move(z1);
        cache->a1 = std::move(a1);
        cache->z2 = std::move(z2);
        cache->a2 = std::move(a2);
        cache->pmf = std::move(pmf);
    }
    return points;
}

ForwardResult forward(const ChartModel& model, const Eigen::VectorXd& feature) {
    ForwardResult r;
    Eigen::MatrixXd one = feature.transpose();
    auto points = forward_batch(model, one, &r.cache);
    r.chart_point = points.row(0).transpose();
    r.pmf = r.cache.pmf.row(0).transpose();
    return r;
}

ThetaGrad ThetaGrad::zeros_like(const ChartModel& model) {
    ThetaGrad g;
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        g.d_weights.push_back(Eigen::MatrixXd::Zero(model.weights[l].rows(), model.weights[l].cols()));
        g.d_biases.push_back(Eigen::VectorXd::Zero(model.biases[l].size()));
    }
    return g;
}

void ThetaGrad::set_zero() {
    for (auto& w : d_weights) w.setZero();
    for (auto& b : d_biases) b.setZero();
}

bool ThetaGrad::all_finite() const {
    for (const auto& w : d_weights)
        if (!w.allFinite()) return false;
    for (const auto& b : d_biases)
        if (!b.allFinite()) return false;
    return true;
}

void backward_batch(const ChartModel& model, const BatchCache& cache,
                    const Eigen::Matrix<double, Eigen::Dynamic, 2>& grad_points, ThetaGrad& grad) {
    if (cache.revision != model.revision)
        throw ContractError("backward: forward cache is stale (parameters changed since forward)");
    if (grad_points.rows() != cache.pmf.rows())
        throw ShapeError("backward: gradient rows do not match cached batch");
    if (grad.d_weights.size() != model.weights.size())
        throw ShapeError("backward: gradient accumulator does not match model");

    const auto& w = model.weights;

    // d(chart)/d(logits) through the expectation over centroids and the
    // softmax Jacobian: dz = p .* (u - (p.u)) with u = grad_point . c_k.
    Eigen::MatrixXd u = grad_points * model.grid.centers.transpose();
    Eigen::ArrayXd rowdot = (cache.pmf.array() * u.array()).rowwise().sum();
    Eigen::MatrixXd dz3 = (cache.pmf.array() * (u.array().colwise() - rowdot)).matrix();

    grad.d_weights[2].noalias() += dz3.transpose() * cache.a2;
    grad.d_biases[2].noalias() += dz3.colwise().sum().transpose();

    Eigen::MatrixXd dz2 =
        ((dz3 * w[2]).array() * (cache.z2.array() > 0.0).cast<double>()).matrix();
    grad.d_weights[1].noalias() += dz2.transpose() * cache.a1;
    grad.d_biases[1].noalias() += dz2.colwise().sum().transpose();

    Eigen::MatrixXd dz1 =
        ((dz2 * w[1]).array() * (cache.z1.array() > 0.0).cast<double>()).matrix();
    grad.d_weights[0].noalias() += dz1.transpose() * cache.input;
    grad.d_biases[0].noalias() += dz1.colwise().sum().transpose();
}

void write_model(const ChartModel& model, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open for writing: " + path.string());

    os.write(kModelMagic, 4);
    write_u32(os, static_cast<std::uint32_t>(model.layer_dims.size()));
    for (int d : model.layer_dims) write_u32(os, static_cast<std::uint32_t>(d));
    write_u32(os, static_cast<std::uint32_t>(model.grid.side));
    write_f64(os, model.grid.extent);
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        const auto& w = model.weights[l];
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c) write_f64(os, w(r, c));
        for (Eigen::Index r = 0; r < model.biases[l].size(); ++r)
            write_f64(os, model.biases[l](r));
    }
    os.flush();
    if (!os) throw IoError("write failed: " + path.string());
}

ChartModel read_model(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open for reading: " + path.string());

    char magic[4] = {};
    is.read(magic, 4);
    if (!is || std::string(magic, 4) != std::string(kModelMagic, 4))
        throw FormatError(path.string() + ": not a CCM1 checkpoint");

    ChartModel m;
    const std::uint32_t n_dims = read_u32(is, "layer count");
    if (n_dims < 2 || n_dims > 64)
        throw FormatError(path.string() + ": implausible layer count");
    for (std::uint32_t i = 0; i < n_dims; ++i) {
        const std::uint32_t d = read_u32(is, "layer width");
        if (d == 0) throw FormatError(path.string() + ": zero layer width");
        m.layer_dims.push_back(static_cast<int>(d));
    }
    const std::uint32_t side = read_u32(is, "grid side");
    const double extent = read_f64(is, "grid extent");
    m.grid = CentroidGrid::make(static_cast<int>(side), extent);
    if (m.grid.size() != m.layer_dims.back())
        throw FormatError(path.string() + ": output width does not match centroid grid");
    for (std::size_t l = 0; l + 1 < m.layer_dims.size(); ++l) {
        Eigen::MatrixXd w(m.layer_dims[l + 1], m.layer_dims[l]);
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = read_f64(is, "weight");
        Eigen::VectorXd b(m.layer_dims[l + 1]);
        for (Eigen::Index r = 0; r < b.size(); ++r) b(r) = read_f64(is, "bias");
        m.weights.push_back(std::move(w));
        m.biases.push_back(std::move(b));
    }
    return m;
}

} // namespace chanchart
