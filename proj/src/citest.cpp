#include "tmex/citest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "tmex/errors.hpp"
#include "tmex/rng.hpp"
#include "tmex/stats_util.hpp"

namespace tmex {

void CiTestConfig::validate() const {
    regressor.validate();
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("CiTestConfig: alpha must be in (0,1)");
    if (!(pcm_split_fraction > 0.1 && pcm_split_fraction < 0.9))
        throw ConfigError("CiTestConfig: split fraction must be in (0.1, 0.9)");
    if (cv_folds < 2) throw ConfigError("CiTestConfig: cv_folds must be >= 2");
}

namespace {

constexpr double kProductSdFloor = 1e-12;
// Residuals (or the pcm direction) below this fraction of the response
// variance signal exact functional dependence rather than a statistical fit.
constexpr double kRelativeResidualFloor = 1e-16;

void standardize_inplace(Mat& m) {
    for (int c = 0; c < m.cols(); ++c) {
        const double mean = m.col(c).mean();
        m.col(c).array() -= mean;
        const double sd = std::sqrt(m.col(c).squaredNorm() / static_cast<double>(m.rows()));
        if (sd > 1e-150) m.col(c) /= sd;
    }
}

double population_var(const Vec& v) {
    const double mean = v.mean();
    return (v.array() - mean).square().mean();
}

std::vector<int> folds_from_order(const std::vector<int>& order, int folds) {
    const int n = static_cast<int>(order.size());
    std::vector<int> fold_of_row(n);
    const int base = n / folds, extra = n % folds;
    int pos = 0;
    for (int f = 0; f < folds; ++f) {
        const int size = base + (f < extra ? 1 : 0);
        for (int k = 0; k < size; ++k) fold_of_row[order[pos++]] = f;
    }
    return fold_of_row;
}

std::vector<int> shuffled_order(int n, std::uint64_t seed, const std::vector<int>& override_order) {
    if (!override_order.empty()) {
        if (static_cast<int>(override_order.size()) != n)
            throw ConfigError("CiTestConfig: split_override length != n");
        return override_order;
    }
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    rng.shuffle(order);
    return order;
}

// Cross-fitted residual of target on z; degenerate when the target is a
// function of z (or constant) up to numerical noise.
Vec residual_on(const Mat& z, const Vec& target, const RegressorSpec& reg,
                const std::vector<int>& fold_of_row, const char* label) {
    const double var = population_var(target);
    if (!(var > 1e-24)) throw DegenerateError(std::string("gcm: constant ") + label);
    Vec resid;
    if (z.cols() == 0) {
        resid = target.array() - target.mean();
    } else {
        resid = target - cross_fit_with_folds(reg, z, target, fold_of_row);
    }
    if (resid.squaredNorm() / static_cast<double>(resid.size()) < kRelativeResidualFloor * var)
        throw DegenerateError(std::string("gcm: ") + label +
                              " is functionally determined by the conditioning set");
    return resid;
}

}  // namespace

TestOutcome gcm_test(const Vec& x, const Mat& y, const Mat& z, const CiTestConfig& cfg) {
    cfg.validate();
    const int n = static_cast<int>(x.size());
    if (n < 20) throw SmallSampleError("gcm: need n >= 20");
    if (y.rows() != n || (z.cols() > 0 && z.rows() != n))
        throw ShapeError("gcm: row counts differ");
    const int d_y = static_cast<int>(y.cols());
    if (d_y < 1) throw ShapeError("gcm: y must have at least one column");

    Mat ys = y, zs = z;
    Vec xs = x;
    standardize_inplace(ys);
    standardize_inplace(zs);
    {
        Mat xm = xs;
        standardize_inplace(xm);
        xs = xm.col(0);
    }

    std::vector<int> fold_of_row;
    if (z.cols() > 0) {
        const std::vector<int> order =
            shuffled_order(n, derive_seed(cfg.seed, "split"), cfg.split_override);
        fold_of_row = folds_from_order(order, std::min(cfg.cv_folds, n));
    }

    const Vec rx = residual_on(zs, xs, cfg.regressor, fold_of_row, "x");

    double max_abs_t = 0.0;
    double min_p = 1.0;
    for (int c = 0; c < d_y; ++c) {
        const Vec ry = residual_on(zs, ys.col(c), cfg.regressor, fold_of_row, "y");
        const Vec products = rx.cwiseProduct(ry);
        const double mean = products.mean();
        const double sd = std::sqrt((products.array() - mean).square().mean());
        if (sd < kProductSdFloor)
            throw DegenerateError("gcm: residual products have (near-)zero variance");
        const double t = std::sqrt(static_cast<double>(n)) * mean / sd;
        const double p = 2.0 * (1.0 - normal_cdf(std::fabs(t)));
        max_abs_t = std::max(max_abs_t, std::fabs(t));
        min_p = std::min(min_p, p);
    }

    TestOutcome out;
    out.statistic = max_abs_t;
    out.p_value = std::min(1.0, d_y * min_p);
    out.reject = out.p_value < cfg.alpha;
    out.n_used = n;
    return out;
}

TestOutcome pcm_test(const Vec& y, const Mat& x, const Mat& z, const CiTestConfig& cfg) {
    cfg.validate();
    const int n = static_cast<int>(y.size());
    if (n < 40) throw SmallSampleError("pcm: need n >= 40");
    if (x.rows() != n || (z.cols() > 0 && z.rows() != n))
        throw ShapeError("pcm: row counts differ");

    Mat xs = x, zs = z;
    standardize_inplace(xs);
    standardize_inplace(zs);
    Vec ys = y;
    {
        const double mean = ys.mean();
        ys.array() -= mean;
        const double sd = std::sqrt(ys.squaredNorm() / n);
        if (!(sd > 1e-150)) throw DegenerateError("pcm: constant response");
        ys /= sd;
    }

    const std::vector<int> order =
        shuffled_order(n, derive_seed(cfg.seed, "split"), cfg.split_override);
    const int n1 = static_cast<int>(std::lround(cfg.pcm_split_fraction * n));
    const int n2 = n - n1;
    if (n1 < 20 || n2 < 20) throw SmallSampleError("pcm: each half needs >= 20 rows");

    const int d_x = static_cast<int>(xs.cols());
    const int d_z = static_cast<int>(zs.cols());
    Mat xz1(n1, d_x + d_z), z1(n1, d_z), xz2(n2, d_x + d_z), z2(n2, d_z);
    Vec y1(n1), y2(n2);
    for (int k = 0; k < n1; ++k) {
        const int r = order[k];
        xz1.row(k).head(d_x) = xs.row(r);
        xz1.row(k).tail(d_z) = zs.row(r);
        z1.row(k) = zs.row(r);
        y1[k] = ys[r];
    }
    for (int k = 0; k < n2; ++k) {
        const int r = order[n1 + k];
        xz2.row(k).head(d_x) = xs.row(r);
        xz2.row(k).tail(d_z) = zs.row(r);
        z2.row(k) = zs.row(r);
        y2[k] = ys[r];
    }

    // Direction learned on the first half.
    const FittedRegressor g_hat = fit(cfg.regressor, xz1, y1);
    const FittedRegressor m_tilde = fit(cfg.regressor, z1, g_hat.predict(xz1));
    const Vec direction = g_hat.predict(xz2) - m_tilde.predict(z2);
    if (direction.squaredNorm() / static_cast<double>(n2) < kRelativeResidualFloor)
        throw DegenerateError("pcm: projection direction is numerically zero");

    // Residuals on the second half.
    const FittedRegressor m_hat = fit(cfg.regressor, z2, y2);
    const Vec eps = y2 - m_hat.predict(z2);

    const Vec products = eps.cwiseProduct(direction);
    const double mean = products.mean();
    const double sd = std::sqrt((products.array() - mean).square().mean());
    if (sd < kProductSdFloor) throw DegenerateError("pcm: products have (near-)zero variance");

    TestOutcome out;
    out.statistic = std::sqrt(static_cast<double>(n2)) * mean / sd;
    out.p_value = 1.0 - normal_cdf(out.statistic);
    out.reject = out.p_value < cfg.alpha;
    out.n_used = n2;
    return out;
}

std::vector<double> holm_adjust(const std::vector<double>& p_values) {
    const int m = static_cast<int>(p_values.size());
    for (double p : p_values)
        if (!(p >= 0.0 && p <= 1.0)) throw DataError("holm_adjust: p-values must be in [0,1]");
    std::vector<int> idx(m);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](int a, int b) { return p_values[a] < p_values[b]; });
    std::vector<double> adjusted(m);
    double running = 0.0;
    for (int k = 0; k < m; ++k) {
        running = std::max(running, std::min(1.0, (m - k) * p_values[idx[k]]));
        adjusted[idx[k]] = running;
    }
    return adjusted;
}

}  // namespace tmex
