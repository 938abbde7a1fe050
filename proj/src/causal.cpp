#include "tmex/causal.hpp"

#include <Eigen/QR>

#include <cmath>

#include "tmex/errors.hpp"

namespace tmex {

AteResult ate_linear_adjust(const Vec& t, const Vec& y, const Mat& w) {
    const int n = static_cast<int>(t.size());
    if (y.size() != n || (w.cols() > 0 && w.rows() != n))
        throw ShapeError("ate_linear_adjust: row counts differ");
    const int p = 2 + static_cast<int>(w.cols());
    if (n <= p) throw DataError("ate_linear_adjust: need n > number of regressors");

    Mat X(n, p);
    X.col(0).setOnes();
    X.col(1) = t;
    if (w.cols() > 0) X.rightCols(w.cols()) = w;

    Eigen::ColPivHouseholderQR<Mat> qr(X);
    qr.setThreshold(1e-10);
    if (qr.rank() < p) throw SingularError("ate_linear_adjust: design is rank deficient");
    const Vec beta = qr.solve(y);
    const double rss = (y - X * beta).squaredNorm();
    const double sigma2 = rss / static_cast<double>(n - p);
    // (X'X)^-1 from the QR factors.
    const Mat xtx_inv = (X.transpose() * X).ldlt().solve(Mat::Identity(p, p));

    AteResult res;
    res.estimate = beta[1];
    res.std_error = std::sqrt(std::max(0.0, sigma2 * xtx_inv(1, 1)));
    res.method = "linear_adjust";
    res.n = n;
    return res;
}

AteResult ate_partially_linear(const Vec& t, const Vec& y, const Mat& w,
                               const RegressorSpec& regressor, int folds, std::uint64_t seed) {
    const int n = static_cast<int>(t.size());
    if (y.size() != n || (w.cols() > 0 && w.rows() != n))
        throw ShapeError("ate_partially_linear: row counts differ");
    if (n < 100) throw DataError("ate_partially_linear: need n >= 100");

    const std::vector<int> fold_of_row = cross_fit_folds(n, folds, derive_seed(seed, "plr"));
    const Vec rt = t - cross_fit_with_folds(regressor, w, t, fold_of_row);
    const Vec ry = y - cross_fit_with_folds(regressor, w, y, fold_of_row);

    const double denom = rt.squaredNorm();
    if (denom < 1e-10 * n)
        throw DegenerateError("ate_partially_linear: treatment residual variance vanishes");
    const double theta = ry.dot(rt) / denom;
    const Vec psi = rt.cwiseProduct(ry - theta * rt);

    AteResult res;
    res.estimate = theta;
    res.std_error = std::sqrt(psi.squaredNorm()) / denom;
    res.method = "partially_linear";
    res.n = n;
    return res;
}

AteResult ate_aipw(const Vec& t, const Vec& y, const Mat& w, double propensity,
                   const RegressorSpec& outcome_regressor, int folds, std::uint64_t seed) {
    const int n = static_cast<int>(t.size());
    if (y.size() != n || (w.cols() > 0 && w.rows() != n))
        throw ShapeError("ate_aipw: row counts differ");
    if (!(propensity >= 0.01 && propensity <= 0.99))
        throw OverlapError("ate_aipw: propensity outside [0.01, 0.99]");
    int n1 = 0;
    for (int k = 0; k < n; ++k) {
        if (t[k] != 0.0 && t[k] != 1.0) throw DataError("ate_aipw: treatment must be binary 0/1");
        n1 += t[k] == 1.0 ? 1 : 0;
    }
    if (n1 < 20 || n - n1 < 20) throw DataError("ate_aipw: each arm needs >= 20 units");

    const std::vector<int> fold_of_row = cross_fit_folds(n, folds, derive_seed(seed, "aipw"));
    const int n_folds = folds;
    Vec mu1(n), mu0(n);
    const int d = static_cast<int>(w.cols());
    for (int f = 0; f < n_folds; ++f) {
        std::vector<int> tr1, tr0, test;
        for (int k = 0; k < n; ++k) {
            if (fold_of_row[k] == f) {
                test.push_back(k);
            } else {
                (t[k] == 1.0 ? tr1 : tr0).push_back(k);
            }
        }
        if (test.empty()) continue;
        if (tr1.size() < 2 || tr0.size() < 2)
            throw DegenerateError("ate_aipw: a training fold lost an entire arm");
        auto fit_arm = [&](const std::vector<int>& rows) {
            Mat Xa(static_cast<int>(rows.size()), d);
            Vec ya(static_cast<int>(rows.size()));
            for (std::size_t k = 0; k < rows.size(); ++k) {
                if (d > 0) Xa.row(static_cast<int>(k)) = w.row(rows[k]);
                ya[static_cast<int>(k)] = y[rows[k]];
            }
            return fit(outcome_regressor, Xa, ya);
        };
        const FittedRegressor m1 = fit_arm(tr1);
        const FittedRegressor m0 = fit_arm(tr0);
        Mat Xte(static_cast<int>(test.size()), d);
        for (std::size_t k = 0; k < test.size(); ++k)
            if (d > 0) Xte.row(static_cast<int>(k)) = w.row(test[k]);
        const Vec p1 = m1.predict(Xte);
        const Vec p0 = m0.predict(Xte);
        for (std::size_t k = 0; k < test.size(); ++k) {
            mu1[test[k]] = p1[static_cast<int>(k)];
            mu0[test[k]] = p0[static_cast<int>(k)];
        }
    }

    Vec psi(n);
    for (int k = 0; k < n; ++k) {
        psi[k] = mu1[k] - mu0[k] + t[k] * (y[k] - mu1[k]) / propensity -
                 (1.0 - t[k]) * (y[k] - mu0[k]) / (1.0 - propensity);
    }
    AteResult res;
    res.estimate = psi.mean();
    res.std_error = std::sqrt((psi.array() - res.estimate).square().mean() / n);
    res.method = "aipw";
    res.n = n;
    return res;
}

AteResult ate_iv(const Vec& t, const Vec& y, const Vec& instrument) {
    const int n = static_cast<int>(t.size());
    if (y.size() != n || instrument.size() != n) throw ShapeError("ate_iv: lengths differ");
    if (n < 3) throw DataError("ate_iv: need n >= 3");
    const double t_mean = t.mean(), y_mean = y.mean(), i_mean = instrument.mean();
    const Vec tc = t.array() - t_mean;
    const Vec yc = y.array() - y_mean;
    const Vec ic = instrument.array() - i_mean;
    const double cov_ti = tc.dot(ic) / n;
    if (std::fabs(cov_ti) <= 1e-10)
        throw WeakInstrumentError("ate_iv: instrument and treatment are (near-)uncorrelated");
    const double cov_yi = yc.dot(ic) / n;
    const double theta = cov_yi / cov_ti;
    // Delta method on the ratio: psi_k = (y_k~ - theta t_k~) i_k~ / cov(t,i).
    const Vec psi = (yc - theta * tc).cwiseProduct(ic) / cov_ti;
    AteResult res;
    res.estimate = theta;
    res.std_error = std::sqrt((psi.array() - psi.mean()).square().mean() / n);
    res.method = "iv_ratio";
    res.n = n;
    return res;
}

}  // namespace tmex
