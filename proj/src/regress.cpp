#include "tmex/regress.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <numeric>
#include <string>

#include "tmex/errors.hpp"
#include "tmex/rng.hpp"

namespace tmex {

void RegressorSpec::validate() const {
    if (kind == RegressorKind::Ols) {
        if (ols_lambda < 0.0) throw ConfigError("RegressorSpec: ols lambda must be >= 0");
    } else {
        if (kr_lambda <= 0.0) throw ConfigError("RegressorSpec: kernel ridge lambda must be > 0");
        if (!kr_median_bandwidth && kr_bandwidth <= 0.0)
            throw ConfigError("RegressorSpec: fixed bandwidth must be > 0");
    }
}

namespace {

Mat rbf_kernel(const Mat& A, const Mat& B, double bandwidth) {
    const Vec an = A.rowwise().squaredNorm();
    const Vec bn = B.rowwise().squaredNorm();
    Mat K = -2.0 * (A * B.transpose());
    K.colwise() += an;
    K.rowwise() += bn.transpose();
    const double inv = 1.0 / (2.0 * bandwidth * bandwidth);
    return (-K.cwiseMax(0.0) * inv).array().exp();
}

}  // namespace

double median_heuristic_bandwidth(const Mat& X) {
    const int n_all = static_cast<int>(X.rows());
    if (n_all < 2) throw DataError("median_heuristic: need at least 2 rows");
    std::vector<int> rows;
    if (n_all <= 1000) {
        rows.resize(n_all);
        std::iota(rows.begin(), rows.end(), 0);
    } else {
        rows.reserve(1000);
        const double stride = static_cast<double>(n_all) / 1000.0;
        for (int k = 0; k < 1000; ++k) rows.push_back(static_cast<int>(k * stride));
    }
    const int n = static_cast<int>(rows.size());
    std::vector<double> dists;
    dists.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            dists.push_back((X.row(rows[i]) - X.row(rows[j])).norm());
    std::sort(dists.begin(), dists.end());
    const std::size_t m = dists.size();
    double med = (m % 2 == 1) ? dists[m / 2] : 0.5 * (dists[m / 2 - 1] + dists[m / 2]);
    if (!(med > 0.0)) {
        // All rows (nearly) coincide; any positive bandwidth gives K ~ ones.
        med = 1.0;
    }
    return med;
}

FittedRegressor fit(const RegressorSpec& spec, const Mat& X, const Vec& y) {
    spec.validate();
    const int n = static_cast<int>(X.rows());
    const int d = static_cast<int>(X.cols());
    if (n != static_cast<int>(y.size())) throw ShapeError("fit: X rows != y length");
    if (n < 2) throw DataError("fit: need at least 2 rows");

    FittedRegressor f;
    f.kind_ = spec.kind;
    f.input_dim_ = d;

    if (d == 0) {
        // Intercept-only for every kind: predicts the mean.
        f.kind_ = RegressorKind::Ols;
        f.beta_.resize(0);
        f.intercept_ = y.mean();
        return f;
    }

    if (spec.kind == RegressorKind::Ols) {
        Vec x_mean = Vec::Zero(d);
        double y_mean = 0.0;
        if (spec.intercept) {
            x_mean = X.colwise().mean();
            y_mean = y.mean();
        }
        const Mat Xc = X.rowwise() - x_mean.transpose();
        const Vec yc = y.array() - y_mean;
        Mat G = Xc.transpose() * Xc;
        G.diagonal().array() += spec.ols_lambda;
        // Condition estimate from the pivoted LDLT diagonal.
        Eigen::LDLT<Mat> ldlt(G);
        const Vec diag = ldlt.vectorD();
        const double dmax = diag.maxCoeff();
        const double dmin = diag.minCoeff();
        if (ldlt.info() != Eigen::Success || !(dmin > 0.0) || dmax / dmin > 1e12)
            throw SingularError("fit: regularized normal equations numerically singular");
        f.beta_ = ldlt.solve(Xc.transpose() * yc);
        f.intercept_ = y_mean - x_mean.dot(f.beta_);
        return f;
    }

    // Kernel ridge.
    const double bw = spec.kr_median_bandwidth ? median_heuristic_bandwidth(X) : spec.kr_bandwidth;
    f.bandwidth_ = bw;
    f.train_X_ = X;
    f.y_mean_ = y.mean();
    const Vec yc = y.array() - f.y_mean_;
    const Mat K = rbf_kernel(X, X, bw);
    for (double jitter : {1.0, 10.0, 100.0}) {
        Mat Kreg = K;
        Kreg.diagonal().array() += n * spec.kr_lambda * jitter;
        Eigen::LLT<Mat> llt(Kreg);
        if (llt.info() == Eigen::Success) {
            f.alpha_ = llt.solve(yc);
            return f;
        }
    }
    throw SingularError("fit: kernel system not positive definite after jitter escalation");
}

Vec FittedRegressor::predict(const Mat& X) const {
    if (static_cast<int>(X.cols()) != input_dim_)
        throw DimError("predict: input width " + std::to_string(X.cols()) +
                       " != training width " + std::to_string(input_dim_));
    if (kind_ == RegressorKind::Ols) {
        if (input_dim_ == 0) return Vec::Constant(X.rows(), intercept_);
        return (X * beta_).array() + intercept_;
    }
    const Mat K = rbf_kernel(X, train_X_, bandwidth_);
    return (K * alpha_).array() + y_mean_;
}

std::vector<int> cross_fit_folds(int n, int folds, std::uint64_t seed) {
    if (folds < 2) throw ConfigError("cross_fit: folds must be >= 2");
    if (n < folds) throw DataError("cross_fit: need n >= folds");
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(derive_seed(seed, "cv"));
    rng.shuffle(idx);
    std::vector<int> fold_of_row(n);
    const int base = n / folds, extra = n % folds;
    int pos = 0;
    for (int f = 0; f < folds; ++f) {
        const int size = base + (f < extra ? 1 : 0);
        for (int k = 0; k < size; ++k) fold_of_row[idx[pos++]] = f;
    }
    return fold_of_row;
}

Vec cross_fit_with_folds(const RegressorSpec& spec, const Mat& X, const Vec& y,
                         const std::vector<int>& fold_of_row) {
    const int n = static_cast<int>(X.rows());
    if (static_cast<int>(fold_of_row.size()) != n)
        throw ShapeError("cross_fit: fold assignment length != n");
    const int folds = *std::max_element(fold_of_row.begin(), fold_of_row.end()) + 1;
    Vec out(n);
    for (int f = 0; f < folds; ++f) {
        std::vector<int> train, test;
        for (int k = 0; k < n; ++k) (fold_of_row[k] == f ? test : train).push_back(k);
        if (test.empty()) continue;
        Mat Xtr(static_cast<int>(train.size()), X.cols());
        Vec ytr(static_cast<int>(train.size()));
        for (std::size_t k = 0; k < train.size(); ++k) {
            Xtr.row(static_cast<int>(k)) = X.row(train[k]);
            ytr[static_cast<int>(k)] = y[train[k]];
        }
        const FittedRegressor model = fit(spec, Xtr, ytr);
        Mat Xte(static_cast<int>(test.size()), X.cols());
        for (std::size_t k = 0; k < test.size(); ++k) Xte.row(static_cast<int>(k)) = X.row(test[k]);
        const Vec pred = model.predict(Xte);
        for (std::size_t k = 0; k < test.size(); ++k) out[test[k]] = pred[static_cast<int>(k)];
    }
    return out;
}

Vec cross_fit(const RegressorSpec& spec, const Mat& X, const Vec& y, int folds,
              std::uint64_t seed) {
    return cross_fit_with_folds(spec, X, y, cross_fit_folds(static_cast<int>(X.rows()), folds, seed));
}

}  // namespace tmex
