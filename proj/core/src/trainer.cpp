#include "chanchart/trainer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <string>
#include <unordered_map>

#include "chanchart/errors.hpp"
#include "chanchart/util.hpp"

namespace chanchart {

namespace {

struct PairHash {
    std::size_t operator()(const std::pair<int, int>& p) const {
        return std::hash<std::uint64_t>{}((static_cast<std::uint64_t>(static_cast<std::uint32_t>(p.first)) << 32) |
                                          static_cast<std::uint32_t>(p.second));
    }
};

// Working copies of the index sets in the shape the loss wants.
struct WorkingSets {
    std::vector<Triplet> triplets;
    std::vector<std::array<LossPair, 2>> pair_groups; // sammon: two pairs per triplet
    std::unordered_map<std::pair<int, int>, LossInertial, PairHash> inertial_by_edge;
};

WorkingSets build_working_sets(const LossConfig& loss, const std::vector<FeatureVector>& features,
                               const std::vector<Triplet>& triplets,
                               const std::vector<InertialTriple>& inertial) {
    WorkingSets w;
    w.triplets = triplets;
    if (loss.kind == LossKind::sammon_siamese) {
        w.pair_groups.reserve(triplets.size());
        for (const auto& t : triplets) {
            const auto df = [&](int a, int b) {
                return (features[static_cast<std::size_t>(a)].values -
                        features[static_cast<std::size_t>(b)].values)
                    .norm();
            };
            w.pair_groups.push_back({LossPair{t.anchor, t.positive, df(t.anchor, t.positive)},
                                     LossPair{t.anchor, t.negative, df(t.anchor, t.negative)}});
        }
    }
    for (const auto& it : inertial)
        w.inertial_by_edge.emplace(std::make_pair(it.i, it.j), LossInertial{it.i, it.j, it.l});
    return w;
}

class AdamState {
public:
    explicit AdamState(const ChartModel& model) {
        for (std::size_t l = 0; l < model.weights.size(); ++l) {
            m_w_.push_back(Eigen::MatrixXd::Zero(model.weights[l].rows(), model.weights[l].cols()));
            v_w_.push_back(Eigen::MatrixXd::Zero(model.weights[l].rows(), model.weights[l].cols()));
            m_b_.push_back(Eigen::VectorXd::Zero(model.biases[l].size()));
            v_b_.push_back(Eigen::VectorXd::Zero(model.biases[l].size()));
        }
    }

    void step(ChartModel& model, const ThetaGrad& grad, const TrainConfig& cfg) {
        ++t_;
        const double c1 = 1.0 - std::pow(cfg.adam_beta1, t_);
        const double c2 = 1.0 - std::pow(cfg.adam_beta2, t_);
        for (std::size_t l = 0; l < model.weights.size(); ++l) {
            update(model.weights[l], grad.d_weights[l], m_w_[l], v_w_[l], c1, c2, cfg);
            update(model.biases[l], grad.d_biases[l], m_b_[l], v_b_[l], c1, c2, cfg);
        }
        model.bump_revision();
    }

private:
    template <typename Mat, typename GradMat>
    void update(Mat& theta, const GradMat& g, Mat& m, Mat& v, double c1, double c2,
                const TrainConfig& cfg) {
        m = cfg.adam_beta1 * m + (1.0 - cfg.adam_beta1) * g;
        v = (cfg.adam_beta2 * v.array() + (1.0 - cfg.adam_beta2) * g.array().square()).matrix();
        theta.array() -= cfg.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + cfg.adam_eps);
    }

    std::vector<Eigen::MatrixXd> m_w_, v_w_;
    std::vector<Eigen::VectorXd> m_b_, v_b_;
    long t_ = 0;
};

void check_indices(const std::vector<Triplet>& triplets, const std::vector<InertialTriple>& inertial,
                   std::size_t n) {
    const auto ok = [n](int i) { return i >= 0 && static_cast<std::size_t>(i) < n; };
    for (const auto& t : triplets)
        if (!ok(t.anchor) || !ok(t.positive) || !ok(t.negative))
            throw ShapeError("train: triplet index outside dataset");
    for (const auto& it : inertial)
        if (!ok(it.i) || !ok(it.j) || !ok(it.l))
            throw ShapeError("train: inertial index outside dataset");
}

} // namespace

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
    // learning_rate == 0 is allowed: it performs a null update, useful for
    // pipeline checks.
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
        throw ConfigError("train: learning_rate must be >= 0 and finite");
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0))
        throw ConfigError("train: adam betas must lie in [0, 1)");
    if (!(adam_eps > 0.0)) throw ConfigError("train: adam_eps must be > 0");
    loss.validate();
}

TrainResult train(ChartModel model, const Dataset& ds, const std::vector<FeatureVector>& features,
                  const std::vector<Triplet>& triplets, const std::vector<InertialTriple>& inertial,
                  const TrainConfig& cfg, const SelectionConfig* reselect) {
    cfg.validate();
    if (features.empty()) throw DegenerateInputError("train: no features");
    if (features.size() != ds.samples.size())
        throw ShapeError("train: features are not aligned with the dataset");
    if (static_cast<int>(features.front().values.size()) != model.input_dim())
        throw ShapeError("train: feature width does not match model input");
    if (triplets.empty()) throw DegenerateInputError("train: empty triplet set");
    if (cfg.resample_each_epoch && reselect == nullptr)
        throw ConfigError("train: resample_each_epoch requires a selection config");
    check_indices(triplets, inertial, features.size());

    const std::size_t n = features.size();
    const int f_dim = model.input_dim();
    Eigen::MatrixXd all_features(n, f_dim);
    for (std::size_t i = 0; i < n; ++i) all_features.row(static_cast<Eigen::Index>(i)) = features[i].values.transpose();

    WorkingSets work = build_working_sets(cfg.loss, features, triplets, inertial);

    AdamState adam(model);
    TrainResult result;
    result.history.reserve(static_cast<std::size_t>(cfg.epochs));

    ThetaGrad grad = ThetaGrad::zeros_like(model);
    std::vector<int> order;
    std::vector<int> local_of;          // global index -> local slot (+1), 0 = absent
    local_of.assign(n, 0);
    std::vector<int> batch_globals;
    std::vector<Eigen::Vector2d> points;
    long step_index = 0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (cfg.resample_each_epoch && epoch > 0) {
            SelectionConfig sc = *reselect;
            sc.rng_seed = derive_seed(reselect->rng_seed, static_cast<std::uint64_t>(epoch));
            const auto sel = select_triplets(ds, features, sc);
            const auto inert = select_inertial(ds, sel.triplets, sc);
            check_indices(sel.triplets, inert, n);
            work = build_working_sets(cfg.loss, features, sel.triplets, inert);
        }

        order.resize(work.triplets.size());
        std::iota(order.begin(), order.end(), 0);
        std::mt19937_64 shuffle_rng(derive_seed(cfg.rng_seed, static_cast<std::uint64_t>(epoch)));
        std::shuffle(order.begin(), order.end(), shuffle_rng);

        KahanSum epoch_main;
        KahanSum epoch_inertial;
        std::size_t n_batches = 0;

        for (std::size_t begin = 0; begin < order.size(); begin += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end = std::min(order.size(), begin + static_cast<std::size_t>(cfg.batch_size));
            ++step_index;

            // Remap the batch's global sample indices to a dense local range.
            batch_globals.clear();
            const auto local = [&](int g) {
                int& slot = local_of[static_cast<std::size_t>(g)];
                if (slot == 0) {
                    batch_globals.push_back(g);
                    slot = static_cast<int>(batch_globals.size());
                }
                return slot - 1;
            };

            LossBatch batch;
            for (std::size_t b = begin; b < end; ++b) {
                const Triplet& t = work.triplets[static_cast<std::size_t>(order[b])];
                if (cfg.loss.kind == LossKind::sammon_siamese) {
                    for (const LossPair& p : work.pair_groups[static_cast<std::size_t>(order[b])])
                        batch.pairs.push_back({local(p.i), local(p.j), p.feature_dist});
                } else {
                    batch.triplets.push_back({local(t.anchor), local(t.positive), local(t.negative)});
                }
                const auto it = work.inertial_by_edge.find({t.anchor, t.positive});
                if (it != work.inertial_by_edge.end()) {
                    const LossInertial& li = it->second;
                    batch.inertial.push_back({local(li.i), local(li.j), local(li.l)});
                }
            }

            Eigen::MatrixXd x(batch_globals.size(), f_dim);
            for (std::size_t i = 0; i < batch_globals.size(); ++i)
                x.row(static_cast<Eigen::Index>(i)) =
                    all_features.row(static_cast<Eigen::Index>(batch_globals[i]));

            BatchCache cache;
            const auto point_mat = forward_batch(model, x, &cache);
            points.assign(static_cast<std::size_t>(point_mat.rows()), Eigen::Vector2d::Zero());
            for (Eigen::Index i = 0; i < point_mat.rows(); ++i)
                points[static_cast<std::size_t>(i)] = point_mat.row(i).transpose();

            const BatchMeanLoss loss = batch_mean_loss(cfg.loss, batch, points);
            if (!std::isfinite(loss.value))
                throw NumericError("train: non-finite loss at step " + std::to_string(step_index) +
                                   " (epoch " + std::to_string(epoch + 1) + ")");

            Eigen::Matrix<double, Eigen::Dynamic, 2> grad_points(point_mat.rows(), 2);
            for (Eigen::Index i = 0; i < point_mat.rows(); ++i)
                grad_points.row(i) = loss.grads[static_cast<std::size_t>(i)].transpose();

            grad.set_zero();
            backward_batch(model, cache, grad_points, grad);
            if (!grad.all_finite())
                throw NumericError("train: non-finite gradient at step " + std::to_string(step_index) +
                                   " (epoch " + std::to_string(epoch + 1) + ")");

            adam.step(model, grad, cfg);
            for (const auto& w : model.weights)
                if (!w.allFinite())
                    throw NumericError("train: non-finite parameter after step " +
                                       std::to_string(step_index));

            epoch_main.add(loss.main_mean);
            epoch_inertial.add(loss.inertial_mean);
            ++n_batches;

            for (int g : batch_globals) local_of[static_cast<std::size_t>(g)] = 0;
        }

        EpochStats stats;
        stats.mean_main_loss = n_batches > 0 ? epoch_main.value() / static_cast<double>(n_batches) : 0.0;
        stats.mean_inertial_loss =
            n_batches > 0 ? epoch_inertial.value() / static_cast<double>(n_batches) : 0.0;
        result.history.push_back(stats);
    }

    result.model = std::move(model);
    return result;
}

std::vector<Eigen::Vector2d> embed_dataset(const ChartModel& model,
                                           const std::vector<FeatureVector>& features) {
    std::vector<Eigen::Vector2d> out;
    out.reserve(features.size());
    constexpr std::size_t kChunk = 4096;
    for (std::size_t begin = 0; begin < features.size(); begin += kChunk) {
        const std::size_t end = std::min(features.size(), begin + kChunk);
        Eigen::MatrixXd x(end - begin, model.input_dim());
        for (std::size_t i = begin; i < end; ++i) {
            if (static_cast<int>(features[i].values.size()) != model.input_dim())
                throw ShapeError("embed_dataset: feature width does not match model input");
            x.row(static_cast<Eigen::Index>(i - begin)) = features[i].values.transpose();
        }
        const auto pts = forward_batch(model, x, nullptr);
        for (Eigen::Index r = 0; r < pts.rows(); ++r) out.push_back(pts.row(r).transpose());
    }
    return out;
}

void write_loss_history_csv(const std::vector<EpochStats>& history,
                            const std::filesystem::path& path) {
    std::FILE* f = std::fopen(path.string().c_str(), "w");
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    std::fputs("epoch,mean_main_loss,mean_inertial_loss\n", f);
    for (std::size_t e = 0; e < history.size(); ++e)
        std::fprintf(f, "%zu,%.17g,%.17g\n", e + 1, history[e].mean_main_loss,
                     history[e].mean_inertial_loss);
    if (std::fclose(f) != 0) throw IoError("failed to finalize " + path.string());
}

} // namespace chanchart
