#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "tmex/scm.hpp"

namespace tmex {

enum class RegressorKind { Ols, KernelRidge };

struct RegressorSpec {
    RegressorKind kind = RegressorKind::Ols;
    // OLS: ridge stabilizer on the centered Gram matrix.
    double ols_lambda = 1e-8;
    bool intercept = true;
    // Kernel ridge: RBF bandwidth from the median heuristic unless fixed.
    bool kr_median_bandwidth = true;
    double kr_bandwidth = 1.0;
    double kr_lambda = 1e-3;

    void validate() const;
};

class FittedRegressor {
public:
    // Deterministic evaluation; throws DimError on width mismatch.
    Vec predict(const Mat& X) const;
    int input_dim() const { return input_dim_; }
    // OLS parameters (empty/zero for kernel ridge).
    const Vec& coefficients() const { return beta_; }
    double intercept() const { return intercept_; }

private:
    friend FittedRegressor fit(const RegressorSpec&, const Mat&, const Vec&);
    RegressorKind kind_ = RegressorKind::Ols;
    int input_dim_ = 0;
    // OLS on centered design: prediction = intercept + x . beta.
    Vec beta_;
    double intercept_ = 0.0;
    // Kernel ridge on centered targets: prediction = y_mean + k(x, X) . alpha.
    Mat train_X_;
    Vec alpha_;
    double bandwidth_ = 1.0;
    double y_mean_ = 0.0;
};

// OLS solves (Xc'Xc + lambda I) beta = Xc'y on the centered design (centering
// keeps lambda off the intercept); d = 0 predicts the mean. Kernel ridge
// solves (K + n*lambda I) alpha = y - mean(y) by Cholesky with jitter
// escalation (lambda, 10x, 100x). Throws SingularError when the regularized
// system is numerically singular (estimated condition number > 1e12).
FittedRegressor fit(const RegressorSpec& spec, const Mat& X, const Vec& y);

inline Vec predict(const FittedRegressor& f, const Mat& X) { return f.predict(X); }

// Out-of-fold predictions: row k's value comes from a model never trained on
// row k. Fold assignment is a seed-derived shuffle split into contiguous
// chunks; bitwise reproducible for a fixed seed.
Vec cross_fit(const RegressorSpec& spec, const Mat& X, const Vec& y, int folds,
              std::uint64_t seed);

// Fold id per row for the cross_fit assignment above (exposed for estimators
// that need matched folds across several targets).
std::vector<int> cross_fit_folds(int n, int folds, std::uint64_t seed);
Vec cross_fit_with_folds(const RegressorSpec& spec, const Mat& X, const Vec& y,
                         const std::vector<int>& fold_of_row);

// Median of pairwise Euclidean row distances. For n > 1000 a deterministic
// evenly-strided subsample of 1000 rows caps the O(n^2) cost.
double median_heuristic_bandwidth(const Mat& X);

}  // namespace tmex
