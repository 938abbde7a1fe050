#include "tmex/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "tmex/errors.hpp"
#include "tmex/stats_util.hpp"

namespace tmex {

namespace {

double population_var(const Vec& v) {
    const double mean = v.mean();
    return (v.array() - mean).square().mean();
}

}  // namespace

double r2_score(const Vec& z_i, const Mat& zhat, const RegressorSpec& regressor, int folds,
                std::uint64_t seed) {
    const int n = static_cast<int>(z_i.size());
    if (zhat.rows() != n) throw ShapeError("r2_score: row counts differ");
    if (n < 4 * folds) throw DataError("r2_score: need n >= 4*folds");
    const double var = population_var(z_i);
    if (var <= 1e-12) throw DegenerateError("r2_score: zero-variance target");
    const Vec pred = cross_fit(regressor, zhat, z_i, folds, seed);
    const double mse = (z_i - pred).squaredNorm() / static_cast<double>(n);
    return 1.0 - mse / var;
}

double pearson(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw ShapeError("pearson: lengths differ");
    const double va = population_var(a), vb = population_var(b);
    if (va <= 1e-300 || vb <= 1e-300) throw DegenerateError("pearson: constant input");
    const double cov = ((a.array() - a.mean()) * (b.array() - b.mean())).mean();
    return cov / std::sqrt(va * vb);
}

Vec average_ranks(const Vec& v) {
    const int n = static_cast<int>(v.size());
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return v[a] < v[b]; });
    Vec ranks(n);
    int k = 0;
    while (k < n) {
        int j = k;
        while (j + 1 < n && v[idx[j + 1]] == v[idx[k]]) ++j;
        const double avg = 0.5 * (k + j) + 1.0;  // 1-based average rank of the tie group
        for (int t = k; t <= j; ++t) ranks[idx[t]] = avg;
        k = j + 1;
    }
    return ranks;
}

double spearman(const Vec& a, const Vec& b) {
    return pearson(average_ranks(a), average_ranks(b));
}

std::vector<int> hungarian_min_cost(const Mat& cost) {
    const int n = static_cast<int>(cost.rows());
    if (cost.cols() != n) throw ShapeError("hungarian: cost matrix must be square");
    const double kInf = std::numeric_limits<double>::infinity();
    // Potentials formulation over a (n+1)-padded array, 1-based.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, kInf);
        std::vector<bool> used(n + 1, false);
        do {
            used[j0] = true;
            const int i0 = p[j0];
            double delta = kInf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= n; ++j)
        if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
    return row_to_col;
}

MccResult mcc(const Mat& z, const Mat& zhat, CorrMode mode) {
    if (z.cols() != zhat.cols()) throw ShapeError("mcc: latent and representation widths differ");
    if (z.rows() != zhat.rows()) throw ShapeError("mcc: row counts differ");
    const int N = static_cast<int>(z.cols());
    Mat corr(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            const double c = mode == CorrMode::Pearson ? pearson(z.col(i), zhat.col(j))
                                                       : spearman(z.col(i), zhat.col(j));
            corr(i, j) = std::fabs(c);
        }
    MccResult result;
    result.correlation_matrix = corr;
    result.permutation = hungarian_min_cost(-corr);
    double total = 0.0;
    for (int i = 0; i < N; ++i) total += corr(i, result.permutation[i]);
    result.score = total / N;
    return result;
}

int shd(const Dag& g1, const Dag& g2) {
    if (g1.n_nodes != g2.n_nodes) throw ShapeError("shd: node counts differ");
    auto status = [](const Dag& g, int u, int v) -> int {
        if (g.has_edge(u, v)) return 1;
        if (g.has_edge(v, u)) return 2;
        return 0;
    };
    int dist = 0;
    for (int u = 0; u < g1.n_nodes; ++u)
        for (int v = u + 1; v < g1.n_nodes; ++v)
            if (status(g1, u, v) != status(g2, u, v)) ++dist;
    return dist;
}

double mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b,
                      Alternative alternative) {
    if (a.empty() || b.empty()) throw DataError("mann_whitney_u: empty sample");
    const double n1 = static_cast<double>(a.size());
    const double n2 = static_cast<double>(b.size());
    const int n = static_cast<int>(a.size() + b.size());
    Vec pooled(n);
    for (std::size_t k = 0; k < a.size(); ++k) pooled[static_cast<int>(k)] = a[k];
    for (std::size_t k = 0; k < b.size(); ++k) pooled[static_cast<int>(a.size() + k)] = b[k];
    const Vec ranks = average_ranks(pooled);
    double r1 = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) r1 += ranks[static_cast<int>(k)];
    const double u = r1 - n1 * (n1 + 1.0) / 2.0;

    const double mean = n1 * n2 / 2.0;
    std::map<double, int> tie_counts;
    for (int k = 0; k < n; ++k) ++tie_counts[pooled[k]];
    double tie_sum = 0.0;
    for (const auto& [val, t] : tie_counts) {
        (void)val;
        tie_sum += static_cast<double>(t) * t * t - t;
    }
    const double var =
        n1 * n2 / 12.0 * ((n + 1.0) - tie_sum / (static_cast<double>(n) * (n - 1.0)));
    if (var <= 0.0) return 1.0;  // all pooled values identical
    const double sd = std::sqrt(var);

    switch (alternative) {
        case Alternative::Greater:
            return 1.0 - normal_cdf((u - 0.5 - mean) / sd);
        case Alternative::Less:
            return normal_cdf((u + 0.5 - mean) / sd);
        case Alternative::TwoSided: {
            const double shifted = std::max(0.0, std::fabs(u - mean) - 0.5);
            return std::min(1.0, 2.0 * (1.0 - normal_cdf(shifted / sd)));
        }
    }
    return 1.0;
}

double ks_uniform(const std::vector<double>& p_values) {
    const int n = static_cast<int>(p_values.size());
    if (n < 10) throw DataError("ks_uniform: need at least 10 values");
    std::vector<double> sorted = p_values;
    for (double p : sorted)
        if (!(p >= 0.0 && p <= 1.0)) throw DataError("ks_uniform: values must be in [0,1]");
    std::sort(sorted.begin(), sorted.end());
    double d = 0.0;
    for (int k = 0; k < n; ++k) {
        const double hi = (k + 1.0) / n - sorted[k];
        const double lo = sorted[k] - static_cast<double>(k) / n;
        d = std::max(d, std::max(hi, lo));
    }
    return kolmogorov_sf(std::sqrt(static_cast<double>(n)) * d);
}

}  // namespace tmex
