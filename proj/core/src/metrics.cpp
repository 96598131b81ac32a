#include "chanchart/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "chanchart/errors.hpp"
#include "chanchart/util.hpp"

namespace chanchart {

namespace {

void check_aligned(const PointMatrix& truth, const PointMatrix& embedding, Eigen::Index min_n,
                   const char* who) {
    if (truth.rows() != embedding.rows())
        throw ShapeError(std::string(who) + ": truth and embedding row counts differ");
    if (truth.rows() < min_n)
        throw DegenerateInputError(std::string(who) + ": need at least " + std::to_string(min_n) +
                                   " points");
    if (!truth.allFinite() || !embedding.allFinite())
        throw ValidationError(std::string(who) + ": non-finite coordinates");
}

// Penalty sums for trustworthiness (neighbors from embedding, ranks from
// truth) and continuity (the converse), for every requested K at once.
struct RankPenalties {
    std::map<int, double> tw_penalty;
    std::map<int, double> ct_penalty;
};

RankPenalties rank_penalties(const PointMatrix& truth, const PointMatrix& embedding,
                             const std::vector<int>& ks) {
    const Eigen::Index n = truth.rows();
    RankPenalties out;
    for (int k : ks) {
        out.tw_penalty[k] = 0.0;
        out.ct_penalty[k] = 0.0;
    }

    std::vector<int> order_truth(static_cast<std::size_t>(n));
    std::vector<int> order_emb(static_cast<std::size_t>(n));
    std::vector<int> rank_truth(static_cast<std::size_t>(n));
    std::vector<int> rank_emb(static_cast<std::size_t>(n));
    Eigen::VectorXd d_truth(n);
    Eigen::VectorXd d_emb(n);

    std::map<int, KahanSum> tw_sums;
    std::map<int, KahanSum> ct_sums;
    for (int k : ks) {
        tw_sums.emplace(k, KahanSum{});
        ct_sums.emplace(k, KahanSum{});
    }

    for (Eigen::Index i = 0; i < n; ++i) {
        d_truth = (truth.rowwise() - truth.row(i)).rowwise().norm();
        d_emb = (embedding.rowwise() - embedding.row(i)).rowwise().norm();

        auto fill_order = [i, n](const Eigen::VectorXd& d, std::vector<int>& order) {
            order.clear();
            for (Eigen::Index j = 0; j < n; ++j)
                if (j != i) order.push_back(static_cast<int>(j));
            std::sort(order.begin(), order.end(), [&d](int a, int b) {
                if (d(a) != d(b)) return d(a) < d(b);
                return a < b;
            });
        };
        fill_order(d_truth, order_truth);
        fill_order(d_emb, order_emb);

        // 1-based rank of j by distance from i, self excluded.
        for (std::size_t pos = 0; pos < order_truth.size(); ++pos) {
            rank_truth[static_cast<std::size_t>(order_truth[pos])] = static_cast<int>(pos) + 1;
            rank_emb[static_cast<std::size_t>(order_emb[pos])] = static_cast<int>(pos) + 1;
        }

        for (int k : ks) {
            KahanSum& tw = tw_sums.at(k);
            KahanSum& ct = ct_sums.at(k);
            for (int pos = 0; pos < k; ++pos) {
                const int u = order_emb[static_cast<std::size_t>(pos)];
                const int v = order_truth[static_cast<std::size_t>(pos)];
                if (rank_truth[static_cast<std::size_t>(u)] > k)
                    tw.add(rank_truth[static_cast<std::size_t>(u)] - k);
                if (rank_emb[static_cast<std::size_t>(v)] > k)
                    ct.add(rank_emb[static_cast<std::size_t>(v)] - k);
            }
        }
    }

    for (int k : ks) {
        out.tw_penalty[k] = tw_sums.at(k).value();
        out.ct_penalty[k] = ct_sums.at(k).value();
    }
    return out;
}

void check_k(int k, Eigen::Index n, const char* who) {
    if (k < 1 || 2 * static_cast<Eigen::Index>(k) >= n)
        throw ConfigError(std::string(who) + ": K must satisfy 1 <= K < N/2 (K=" +
                          std::to_string(k) + ", N=" + std::to_string(n) + ")");
}

double penalty_to_score(double penalty, Eigen::Index n, int k) {
    const double norm = (2.0 * static_cast<double>(n) - 3.0 * k - 1.0) * static_cast<double>(n) * k;
    return 1.0 - penalty / norm;
}

} // namespace

PointMatrix points_to_matrix(const std::vector<Eigen::Vector2d>& points) {
    PointMatrix m(static_cast<Eigen::Index>(points.size()), 2);
    for (std::size_t i = 0; i < points.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = points[i].transpose();
    return m;
}

double kruskal_stress(const PointMatrix& truth, const PointMatrix& embedding) {
    check_aligned(truth, embedding, 2, "kruskal_stress");
    const Eigen::Index n = truth.rows();
    KahanSum cross, tt, ee;
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double dt = (truth.row(i) - truth.row(j)).norm();
            const double de = (embedding.row(i) - embedding.row(j)).norm();
            cross.add(dt * de);
            tt.add(dt * dt);
            ee.add(de * de);
        }
    }
    if (tt.value() <= 0.0)
        throw DegenerateInputError("kruskal_stress: all ground-truth points coincide");
    if (ee.value() <= 0.0)
        throw DegenerateInputError("kruskal_stress: all embedded points coincide");
    double cos2 = (cross.value() * cross.value()) / (tt.value() * ee.value());
    cos2 = std::clamp(cos2, 0.0, 1.0);
    return std::sqrt(1.0 - cos2);
}

double sr_metric(const PointMatrix& truth, const PointMatrix& embedding) {
    check_aligned(truth, embedding, 3, "sr_metric");
    const double n = static_cast<double>(truth.rows());

    auto standardize = [n](const PointMatrix& x) {
        const Eigen::RowVector2d mu = x.colwise().sum() / n;
        PointMatrix centered = x.rowwise() - mu;
        const Eigen::RowVector2d sigma = (centered.array().square().colwise().sum() / n).sqrt();
        if (!(sigma(0) > 0.0) || !(sigma(1) > 0.0))
            throw DegenerateInputError("sr_metric: zero variance along a dimension");
        centered.array().rowwise() /= sigma.array();
        return centered;
    };
    const PointMatrix tn = standardize(truth);
    const PointMatrix en = standardize(embedding);

    // Orthogonal Procrustes in row form: W = U V^T from the SVD of
    // (embedding^T truth); reflections are allowed (no det correction).
    const Eigen::Matrix2d b = en.transpose() * tn;
    Eigen::JacobiSVD<Eigen::Matrix2d> svd(b, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::Matrix2d w = svd.matrixU() * svd.matrixV().transpose();

    return (tn - en * w).rowwise().squaredNorm().sum() / n;
}

double trustworthiness(const PointMatrix& truth, const PointMatrix& embedding, int k) {
    check_aligned(truth, embedding, 2, "trustworthiness");
    check_k(k, truth.rows(), "trustworthiness");
    const auto p = rank_penalties(truth, embedding, {k});
    return penalty_to_score(p.tw_penalty.at(k), truth.rows(), k);
}

double continuity(const PointMatrix& truth, const PointMatrix& embedding, int k) {
    check_aligned(truth, embedding, 2, "continuity");
    check_k(k, truth.rows(), "continuity");
    const auto p = rank_penalties(truth, embedding, {k});
    return penalty_to_score(p.ct_penalty.at(k), truth.rows(), k);
}

MetricsReport evaluate(const PointMatrix& truth, const PointMatrix& embedding,
                       const EvaluateOptions& opts) {
    check_aligned(truth, embedding, 2, "evaluate");
    if (opts.max_n < 2) throw ConfigError("evaluate: max_n must be >= 2");
    if (opts.k_percents.empty()) throw ConfigError("evaluate: need at least one K percent");

    PointMatrix t = truth;
    PointMatrix e = embedding;
    if (truth.rows() > opts.max_n) {
        std::vector<int> idx(static_cast<std::size_t>(truth.rows()));
        std::iota(idx.begin(), idx.end(), 0);
        std::mt19937_64 rng(opts.subsample_seed);
        for (int i = 0; i < opts.max_n; ++i) {
            std::uniform_int_distribution<int> pick(i, static_cast<int>(idx.size()) - 1);
            std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
        }
        idx.resize(static_cast<std::size_t>(opts.max_n));
        std::sort(idx.begin(), idx.end());
        t.resize(opts.max_n, 2);
        e.resize(opts.max_n, 2);
        for (int i = 0; i < opts.max_n; ++i) {
            t.row(i) = truth.row(idx[static_cast<std::size_t>(i)]);
            e.row(i) = embedding.row(idx[static_cast<std::size_t>(i)]);
        }
    }
    const Eigen::Index n = t.rows();

    MetricsReport report;
    report.n_evaluated = static_cast<int>(n);
    report.subsample_seed = opts.subsample_seed;
    report.ks = kruskal_stress(t, e);
    report.sr = sr_metric(t, e);

    std::vector<int> ks;
    for (double pct : opts.k_percents) {
        if (!(pct > 0.0)) throw ConfigError("evaluate: K percents must be positive");
        const int k = std::max(1, static_cast<int>(std::llround(pct / 100.0 * static_cast<double>(n))));
        check_k(k, n, "evaluate");
        if (std::find(ks.begin(), ks.end(), k) == ks.end()) ks.push_back(k);
    }
    const auto p = rank_penalties(t, e, ks);
    for (int k : ks) {
        report.tw[k] = penalty_to_score(p.tw_penalty.at(k), n, k);
        report.ct[k] = penalty_to_score(p.ct_penalty.at(k), n, k);
    }

    const auto in_unit = [](double v) { return v >= -1e-12 && v <= 1.0 + 1e-12; };
    if (!std::isfinite(report.ks) || !in_unit(report.ks) || !std::isfinite(report.sr) ||
        report.sr < 0.0)
        throw NumericError("evaluate: metric left its valid range");
    for (const auto& [k, v] : report.tw)
        if (!std::isfinite(v) || !in_unit(v)) throw NumericError("evaluate: TW left [0,1]");
    for (const auto& [k, v] : report.ct)
        if (!std::isfinite(v) || !in_unit(v)) throw NumericError("evaluate: CT left [0,1]");
    return report;
}

std::string metrics_to_json(const MetricsReport& report) {
    const auto num = [](double v) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    std::string out = "{\n  \"ks\": " + num(report.ks) + ",\n  \"sr\": " + num(report.sr) + ",\n";
    const auto map_block = [&num](const char* name, const std::map<int, double>& m) {
        std::string s = std::string("  \"") + name + "\": {";
        bool first = true;
        for (const auto& [k, v] : m) {
            if (!first) s += ", ";
            s += "\"" + std::to_string(k) + "\": " + num(v);
            first = false;
        }
        return s + "}";
    };
    out += map_block("tw", report.tw) + ",\n";
    out += map_block("ct", report.ct) + ",\n";
    out += "  \"n_evaluated\": " + std::to_string(report.n_evaluated) + ",\n";
    out += "  \"subsample_seed\": " + std::to_string(report.subsample_seed) + "\n}\n";
    return out;
}

} // namespace chanchart
