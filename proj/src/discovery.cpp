#include "tmex/discovery.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tmex/errors.hpp"
#include "tmex/measurement.hpp"
#include "tmex/metrics.hpp"
#include "tmex/regress.hpp"
#include "tmex/tmex_score.hpp"

namespace tmex {

void DiscoveryConfig::validate() const {
    if (!(prune_threshold > 0.0)) throw ConfigError("DiscoveryConfig: threshold must be > 0");
    if (max_nodes < 1 || max_nodes > 10)
        throw ConfigError("DiscoveryConfig: max_nodes must be in [1, 10]");
}

double distance_correlation(const Vec& a, const Vec& b) {
    const int n = static_cast<int>(a.size());
    if (b.size() != n) throw ShapeError("distance_correlation: lengths differ");
    if (n < 10) throw DataError("distance_correlation: need n >= 10");

    auto row_means = [n](const Vec& v, Vec& means, double& grand) {
        means.setZero(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) means[i] += std::fabs(v[i] - v[j]);
        means /= static_cast<double>(n);
        grand = means.mean();
    };
    Vec am, bm;
    double ag = 0.0, bg = 0.0;
    row_means(a, am, ag);
    row_means(b, bm, bg);
    if (ag <= 1e-300 || bg <= 1e-300) throw DegenerateError("distance_correlation: constant input");

    double sum_ab = 0.0, sum_aa = 0.0, sum_bb = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double A = std::fabs(a[i] - a[j]) - am[i] - am[j] + ag;
            const double B = std::fabs(b[i] - b[j]) - bm[i] - bm[j] + bg;
            sum_ab += A * B;
            sum_aa += A * A;
            sum_bb += B * B;
        }
    }
    const double denom = std::sqrt(sum_aa * sum_bb);
    if (denom <= 0.0) throw DegenerateError("distance_correlation: degenerate distances");
    const double dcor2 = std::max(0.0, sum_ab / denom);
    return std::sqrt(dcor2);
}

namespace {

// Residual of y on [1, x] (simple regression).
Vec simple_residual(const Vec& y, const Vec& x) {
    const double xm = x.mean(), ym = y.mean();
    const Vec xc = x.array() - xm;
    const double denom = xc.squaredNorm();
    if (denom <= 1e-300) return y.array() - ym;
    const double beta = xc.dot(y) / denom;
    return (y.array() - ym) - beta * xc.array();
}

}  // namespace

std::vector<int> causal_order(const Mat& data, const DiscoveryConfig& cfg) {
    cfg.validate();
    const int d = static_cast<int>(data.cols());
    const int n = static_cast<int>(data.rows());
    if (d > cfg.max_nodes) throw ConfigError("causal_order: too many columns for max_nodes");
    if (n < cfg.min_rows) throw DataError("causal_order: need more rows");

    Mat work = data;
    std::vector<int> remaining(d);
    std::iota(remaining.begin(), remaining.end(), 0);
    std::vector<int> order;
    order.reserve(d);

    while (remaining.size() > 1) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_pos = 0;
        for (std::size_t ci = 0; ci < remaining.size(); ++ci) {
            const Vec cand = work.col(remaining[ci]);
            double total = 0.0;
            for (std::size_t ri = 0; ri < remaining.size(); ++ri) {
                if (ri == ci) continue;
                const Vec resid = simple_residual(work.col(remaining[ri]), cand);
                total += distance_correlation(cand, resid);
            }
            if (total < best - 1e-15) {  // strict improvement; ties keep lowest index
                best = total;
                best_pos = ci;
            }
        }
        const int root = remaining[best_pos];
        order.push_back(root);
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best_pos));
        const Vec root_col = work.col(root);
        for (int r : remaining) work.col(r) = simple_residual(work.col(r), root_col);
    }
    order.push_back(remaining.front());
    return order;
}

Dag prune_edges(const std::vector<int>& order, const Mat& data, const DiscoveryConfig& cfg) {
    cfg.validate();
    const int d = static_cast<int>(data.cols());
    {
        std::vector<int> sorted = order;
        std::sort(sorted.begin(), sorted.end());
        for (int k = 0; k < d; ++k)
            if (k >= static_cast<int>(sorted.size()) || sorted[k] != k)
                throw ShapeError("prune_edges: order must be a permutation of the columns");
    }
    Mat std_data = data;
    for (int c = 0; c < d; ++c) {
        const double mean = std_data.col(c).mean();
        std_data.col(c).array() -= mean;
        const double sd = std::sqrt(std_data.col(c).squaredNorm() / std_data.rows());
        if (sd > 1e-150) std_data.col(c) /= sd;
    }

    Dag dag;
    dag.n_nodes = d;
    RegressorSpec ols;
    for (std::size_t pos = 1; pos < order.size(); ++pos) {
        const int node = order[pos];
        Mat preds(std_data.rows(), static_cast<int>(pos));
        for (std::size_t k = 0; k < pos; ++k) preds.col(static_cast<int>(k)) = std_data.col(order[k]);
        const FittedRegressor model = fit(ols, preds, std_data.col(node));
        const Vec& coef = model.coefficients();
        for (std::size_t k = 0; k < pos; ++k)
            if (std::fabs(coef[static_cast<int>(k)]) > cfg.prune_threshold)
                dag.add_edge(order[k], node);
    }
    return dag;
}

PitfallTrial shd_pitfall_trial(std::uint64_t seed, int n, const DiscoveryConfig& cfg) {
    Rng rng(derive_seed(seed, "pitfall"));
    const double a12 = rng.uniform(1.0, 10.0);
    const double a13 = rng.uniform(1.0, 10.0);
    const double a23 = rng.uniform(1.0, 10.0);
    const double b2 = rng.uniform(0.005, 0.02);
    const double b3 = rng.uniform(0.005, 0.02);
    const double g1 = rng.uniform(1.0, 10.0);
    const double g21 = rng.uniform(1.0, 10.0);
    const double g2 = rng.uniform(1.0, 10.0);
    const double g3 = rng.uniform(1.0, 10.0);

    ScmSpec spec;
    spec.dag.n_nodes = 3;
    spec.dag.add_edge(0, 1);
    spec.dag.add_edge(0, 2);
    spec.dag.add_edge(1, 2);
    spec.observed = {false, false, false};
    spec.mechanisms.resize(3);
    // Non-Gaussian (uniform) noise so residual-independence orientation applies.
    spec.mechanisms[0].noise = {NoiseFamily::Uniform, 1.0, 0.0};
    spec.mechanisms[1].linear_weights = {a12};
    spec.mechanisms[1].noise = {NoiseFamily::Uniform, b2, 0.0};
    spec.mechanisms[2].linear_weights = {a13, a23};
    spec.mechanisms[2].noise = {NoiseFamily::Uniform, b3, 0.0};

    const Mat z = sample_scm(spec, n, derive_seed(seed, "data"));

    MeasurementModel mm;
    mm.n_latents = 3;
    {
        MeasurementBlock blk1;
        blk1.parents = {0, 1};
        blk1.dim = 1;
        blk1.fn.kind = MeasurementKind::LinearMix;
        blk1.fn.linear_mix = (Mat(1, 2) << g1, g21).finished();
        MeasurementBlock blk2;
        blk2.parents = {1};
        blk2.dim = 1;
        blk2.fn.kind = MeasurementKind::LinearMix;
        blk2.fn.linear_mix = (Mat(1, 1) << g2).finished();
        MeasurementBlock blk3;
        blk3.parents = {2};
        blk3.dim = 1;
        blk3.fn.kind = MeasurementKind::LinearMix;
        blk3.fn.linear_mix = (Mat(1, 1) << g3).finished();
        mm.blocks = {blk1, blk2, blk3};
    }
    const PairedDataset ds = apply_measurements(mm, z, derive_seed(seed, "meas"));

    const std::vector<int> order = causal_order(ds.zhat, cfg);
    const Dag found = prune_edges(order, ds.zhat, cfg);

    PitfallTrial trial;
    trial.shd = shd(found, spec.dag);
    trial.n_edges_found = static_cast<int>(found.edges.size());
    trial.entangled = true;
    // Exclusive hypothesis (V = I) against the true parent structure.
    trial.oracle_tmex = tmex_score(Eigen::MatrixXi::Identity(3, 3), oracle_w(mm));
    return trial;
}

}  // namespace tmex
