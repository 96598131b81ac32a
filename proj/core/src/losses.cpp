#include "chanchart/losses.hpp"

#include <cmath>
#include <string>

#include "chanchart/errors.hpp"
#include "chanchart/util.hpp"

namespace chanchart {

namespace {

constexpr double kMinFeatureDist = 1e-12;

void check_index(int idx, std::size_t n, const char* role) {
    if (idx < 0 || static_cast<std::size_t>(idx) >= n)
        throw ShapeError(std::string(role) + " index " + std::to_string(idx) +
                         " outside chart point range " + std::to_string(n));
}

// d(||xi - xj||)/dxi; subgradient 0 at coincident points.
Eigen::Vector2d dist_grad(const Eigen::Vector2d& xi, const Eigen::Vector2d& xj, double dist) {
    if (dist <= 0.0) return Eigen::Vector2d::Zero();
    return (xi - xj) / dist;
}

} // namespace

void LossConfig::validate() const {
    if (kind == LossKind::triplet && !(lambda > 0.0))
        throw ConfigError("loss: triplet margin lambda must be > 0");
    if (kind == LossKind::split_triplet && (!(b_pos > 0.0) || !(b_neg > 0.0)))
        throw ConfigError("loss: split triplet bounds b_pos and b_neg must be > 0");
    if (!(mu >= 0.0) || !std::isfinite(mu)) throw ConfigError("loss: mu must be >= 0 and finite");
}

LossGrad sammon_siamese_loss(std::span<const LossPair> pairs,
                             std::span<const Eigen::Vector2d> points) {
    LossGrad out;
    out.grads.assign(points.size(), Eigen::Vector2d::Zero());
    KahanSum value;
    for (const auto& p : pairs) {
        check_index(p.i, points.size(), "pair");
        check_index(p.j, points.size(), "pair");
        if (p.feature_dist < kMinFeatureDist) {
            ++out.dropped_pairs;
            continue;
        }
        const Eigen::Vector2d diff = points[p.i] - points[p.j];
        const double dhat = diff.norm();
        const double e = dhat - p.feature_dist;
        value.add(e * e / p.feature_dist);
        const Eigen::Vector2d g = (2.0 * e / p.feature_dist) * dist_grad(points[p.i], points[p.j], dhat);
        out.grads[p.i] += g;
        out.grads[p.j] -= g;
        ++out.term_count;
    }
    out.value = value.value();
    return out;
}

LossGrad triplet_loss(std::span<const LossTriplet> triplets,
                      std::span<const Eigen::Vector2d> points, double lambda) {
    if (!(lambda > 0.0)) throw ConfigError("triplet_loss: lambda must be > 0");
    LossGrad out;
    out.grads.assign(points.size(), Eigen::Vector2d::Zero());
    KahanSum value;
    for (const auto& t : triplets) {
        check_index(t.anchor, points.size(), "anchor");
        check_index(t.positive, points.size(), "positive");
        check_index(t.negative, points.size(), "negative");
        const double d_pos = (points[t.anchor] - points[t.positive]).norm();
        const double d_neg = (points[t.anchor] - points[t.negative]).norm();
        const double h = d_pos - d_neg + lambda;
        ++out.term_count;
        if (h <= 0.0) continue;
        value.add(h);
        const Eigen::Vector2d gp = dist_grad(points[t.anchor], points[t.positive], d_pos);
        const Eigen::Vector2d gn = dist_grad(points[t.anchor], points[t.negative], d_neg);
        out.grads[t.anchor] += gp - gn;
        out.grads[t.positive] -= gp;
        out.grads[t.negative] += gn;
    }
    out.value = value.value();
    return out;
}

LossGrad split_triplet_loss(std::span<const LossTriplet> triplets,
                            std::span<const Eigen::Vector2d> points, double b_pos, double b_neg) {
    if (!(b_pos > 0.0) || !(b_neg > 0.0))
        throw ConfigError("split_triplet_loss: b_pos and b_neg must be > 0");
    LossGrad out;
    out.grads.assign(points.size(), Eigen::Vector2d::Zero());
    KahanSum value;
    for (const auto& t : triplets) {
        check_index(t.anchor, points.size(), "anchor");
        check_index(t.positive, points.size(), "positive");
        check_index(t.negative, points.size(), "negative");
        const double d_pos = (points[t.anchor] - points[t.positive]).norm();
        const double d_neg = (points[t.anchor] - points[t.negative]).norm();
        ++out.term_count;
        if (d_pos > b_pos) {
            value.add(d_pos - b_pos);
            const Eigen::Vector2d gp = dist_grad(points[t.anchor], points[t.positive], d_pos);
            out.grads[t.anchor] += gp;
            out.grads[t.positive] -= gp;
        }
        if (d_neg < b_neg) {
            value.add(b_neg - d_neg);
            const Eigen::Vector2d gn = dist_grad(points[t.anchor], points[t.negative], d_neg);
            out.grads[t.anchor] -= gn;
            out.grads[t.negative] += gn;
        }
    }
    out.value = value.value();
    return out;
}

LossGrad inertial_loss(std::span<const LossInertial> triples,
                       std::span<const Eigen::Vector2d> points) {
    LossGrad out;
    out.grads.assign(points.size(), Eigen::Vector2d::Zero());
    KahanSum value;
    for (const auto& t : triples) {
        check_index(t.i, points.size(), "inertial i");
        check_index(t.j, points.size(), "inertial j");
        check_index(t.l, points.size(), "inertial l");
        const Eigen::Vector2d v = points[t.j] - 2.0 * points[t.i] + points[t.l];
        const double n = v.norm();
        ++out.term_count;
        if (n <= 0.0) continue;
        value.add(n);
        const Eigen::Vector2d g = v / n;
        out.grads[t.j] += g;
        out.grads[t.i] -= 2.0 * g;
        out.grads[t.l] += g;
    }
    out.value = value.value();
    return out;
}

namespace {

LossGrad main_loss(const LossConfig& cfg, const LossBatch& batch,
                   std::span<const Eigen::Vector2d> points) {
    if (cfg.kind == LossKind::sammon_siamese) {
        if (!batch.triplets.empty())
            throw ContractError("total_loss: sammon_siamese expects pairs, got triplets");
        return sammon_siamese_loss(batch.pairs, points);
    }
    if (!batch.pairs.empty())
        throw ContractError("total_loss: triplet losses expect triplets, got pairs");
    if (cfg.kind == LossKind::triplet) return triplet_loss(batch.triplets, points, cfg.lambda);
    return split_triplet_loss(batch.triplets, points, cfg.b_pos, cfg.b_neg);
}

} // namespace

TotalLoss total_loss(const LossConfig& cfg, const LossBatch& batch,
                     std::span<const Eigen::Vector2d> points) {
    cfg.validate();
    const LossGrad main = main_loss(cfg, batch, points);

    TotalLoss out;
    out.main_value = main.value;
    out.dropped_pairs = main.dropped_pairs;
    out.grads = main.grads;
    if (cfg.mu > 0.0) {
        const LossGrad inertial = inertial_loss(batch.inertial, points);
        out.inertial_value = inertial.value;
        for (std::size_t i = 0; i < out.grads.size(); ++i)
            out.grads[i] += cfg.mu * inertial.grads[i];
    }
    out.value = out.main_value + cfg.mu * out.inertial_value;
    return out;
}

BatchMeanLoss batch_mean_loss(const LossConfig& cfg, const LossBatch& batch,
                              std::span<const Eigen::Vector2d> points) {
    cfg.validate();
    const LossGrad main = main_loss(cfg, batch, points);
    const LossGrad inertial = inertial_loss(batch.inertial, points);

    const double wm = main.term_count > 0 ? 1.0 / static_cast<double>(main.term_count) : 0.0;
    const double wi =
        inertial.term_count > 0 ? cfg.mu / static_cast<double>(inertial.term_count) : 0.0;

    BatchMeanLoss out;
    out.main_mean = main.value * wm;
    out.inertial_mean = inertial.term_count > 0
                            ? inertial.value / static_cast<double>(inertial.term_count)
                            : 0.0;
    out.value = out.main_mean + cfg.mu * out.inertial_mean;
    out.dropped_pairs = main.dropped_pairs;
    out.grads.assign(points.size(), Eigen::Vector2d::Zero());
    for (std::size_t i = 0; i < points.size(); ++i)
        out.grads[i] = wm * main.grads[i] + wi * inertial.grads[i];
    return out;
}

} // namespace chanchart
