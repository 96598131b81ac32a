// Microbenchmarks for the hot paths: feature extraction, batched model
// forward/backward, and the rank-based metrics.

#include <benchmark/benchmark.h>

#include <random>

#include "chanchart/features.hpp"
#include "chanchart/losses.hpp"
#include "chanchart/metrics.hpp"
#include "chanchart/model.hpp"
#include "chanchart/scenario.hpp"

namespace {

using namespace chanchart;

Dataset make_dataset(int n_samples, int antennas, int subcarriers) {
    ScenarioConfig cfg;
    cfg.n_samples = n_samples;
    cfg.array = ArrayLayout::ula(static_cast<std::uint16_t>(antennas));
    cfg.n_subcarriers = subcarriers;
    cfg.cyclic_prefix = subcarriers / 4;
    cfg.rng_seed = 7;
    return synthesize_csi(generate_trajectory(cfg), cfg);
}

void bm_extract_feature(benchmark::State& state) {
    const Dataset ds = make_dataset(4, static_cast<int>(state.range(0)), 64);
    for (auto _ : state)
        benchmark::DoNotOptimize(extract_feature(ds.samples[0], ds.meta));
}
BENCHMARK(bm_extract_feature)->Arg(8)->Arg(16)->Arg(32);

void bm_forward_batch(benchmark::State& state) {
    const int f_dim = 256;
    const auto grid = CentroidGrid::make(16, 150.0);
    const ChartModel model = init_model(f_dim, grid, 11);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> gauss;
    Eigen::MatrixXd x(state.range(0), f_dim);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = gauss(rng);
    for (auto _ : state) benchmark::DoNotOptimize(forward_batch(model, x, nullptr));
}
BENCHMARK(bm_forward_batch)->Arg(64)->Arg(256)->Arg(1024);

void bm_train_step(benchmark::State& state) {
    const int f_dim = 256;
    const int n = static_cast<int>(state.range(0));
    const auto grid = CentroidGrid::make(16, 150.0);
    ChartModel model = init_model(f_dim, grid, 11);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> gauss;
    Eigen::MatrixXd x(3 * n, f_dim);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = gauss(rng);

    LossBatch batch;
    for (int t = 0; t < n; ++t) batch.triplets.push_back({3 * t, 3 * t + 1, 3 * t + 2});
    LossConfig loss;
    loss.kind = LossKind::split_triplet;
    loss.b_pos = 3.0;
    loss.b_neg = 1.0;

    ThetaGrad grad = ThetaGrad::zeros_like(model);
    for (auto _ : state) {
        BatchCache cache;
        const auto pts = forward_batch(model, x, &cache);
        std::vector<Eigen::Vector2d> points(static_cast<std::size_t>(pts.rows()));
        for (Eigen::Index i = 0; i < pts.rows(); ++i) points[static_cast<std::size_t>(i)] = pts.row(i);
        const auto l = batch_mean_loss(loss, batch, points);
        Eigen::Matrix<double, Eigen::Dynamic, 2> gp(pts.rows(), 2);
        for (Eigen::Index i = 0; i < pts.rows(); ++i) gp.row(i) = l.grads[static_cast<std::size_t>(i)];
        grad.set_zero();
        backward_batch(model, cache, gp, grad);
        benchmark::DoNotOptimize(grad);
    }
}
BENCHMARK(bm_train_step)->Arg(64)->Arg(256);

void bm_rank_metrics(benchmark::State& state) {
    const Eigen::Index n = state.range(0);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> gauss;
    PointMatrix truth(n, 2), emb(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        truth.row(i) << gauss(rng), gauss(rng);
        emb.row(i) << gauss(rng), gauss(rng);
    }
    const int k = std::max(1, static_cast<int>(n / 20));
    for (auto _ : state) benchmark::DoNotOptimize(trustworthiness(truth, emb, k));
}
BENCHMARK(bm_rank_metrics)->Arg(200)->Arg(1000)->Arg(2000);

} // namespace

BENCHMARK_MAIN();
