#pragma once

#include <cstdint>
#include <string>

#include "tmex/regress.hpp"

namespace tmex {

struct AteResult {
    double estimate = 0.0;
    double std_error = 0.0;
    std::string method;
    int n = 0;
};

// OLS of y on [1, t, w]; estimate = coefficient of t, homoskedastic SE.
// Exactly invariant to invertible linear maps of w. Throws SingularError on
// a rank-deficient design.
AteResult ate_linear_adjust(const Vec& t, const Vec& y, const Mat& w);

// Cross-fitted residual-on-residual: r_t = t - E[t|w], r_y = y - E[y|w],
// estimate = sum(r_y r_t) / sum(r_t^2), SE from the influence function.
AteResult ate_partially_linear(const Vec& t, const Vec& y, const Mat& w,
                               const RegressorSpec& regressor, int folds, std::uint64_t seed);

// Doubly robust estimator for a binary treatment with known propensity
// (randomized-trial mode); outcome models are cross-fitted per arm.
AteResult ate_aipw(const Vec& t, const Vec& y, const Mat& w, double propensity,
                   const RegressorSpec& outcome_regressor, int folds, std::uint64_t seed);

// Instrumental ratio cov(y, i) / cov(t, i) with delta-method SE. Throws
// WeakInstrumentError when |cov(t, i)| <= 1e-10.
AteResult ate_iv(const Vec& t, const Vec& y, const Vec& instrument);

inline double ate_bias(const AteResult& result, double truth) {
    return std::fabs(result.estimate - truth);
}

}  // namespace tmex
