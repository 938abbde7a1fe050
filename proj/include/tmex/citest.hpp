#pragma once

#include <cstdint>
#include <vector>

#include "tmex/regress.hpp"

namespace tmex {

enum class CiTestKind { Gcm, Pcm };

struct CiTestConfig {
    CiTestKind test = CiTestKind::Pcm;
    RegressorSpec regressor;
    double alpha = 0.05;
    std::uint64_t seed = 0;
    double pcm_split_fraction = 0.5;
    int cv_folds = 2;  // cross-fitting folds for the gcm regressions
    // Testing hook: explicit row order for the pcm split / gcm folds. When
    // set, element k gives the shuffled position of row k.
    std::vector<int> split_override;

    void validate() const;
};

struct TestOutcome {
    double statistic = 0.0;
    double p_value = 1.0;
    bool reject = false;
    int n_used = 0;
};

// Covariance-of-residuals test of x indep y | z. Residuals come from
// cross-fitted regressions on z (d_z = 0 centers the raw values). Per y
// coordinate: T_c = sqrt(n) * mean(R) / sd(R) with R the residual products,
// p_c = 2*(1 - Phi(|T_c|)); coordinates combine by Bonferroni and the
// reported statistic is max |T_c|. Throws DegenerateError when a residual
// vector is an exact functional artifact (zero relative to its input) or a
// product vector has sd < 1e-12.
TestOutcome gcm_test(const Vec& x, const Mat& y, const Mat& z, const CiTestConfig& cfg);

// Projection-based test of y indep x | z via the null E[y|x,z] = E[y|z].
// Single split: on the first half fit g ~ E[y|x,z] and project its
// predictions back onto z; the difference h is the test direction. On the
// second half regress y on z, multiply residuals by h, and compare the
// normalized mean against N(0,1) (one-sided). Throws SmallSampleError when a
// half has fewer than 20 rows and DegenerateError when the direction or the
// products are numerically zero.
TestOutcome pcm_test(const Vec& y, const Mat& x, const Mat& z, const CiTestConfig& cfg);

// Step-down Holm adjustment, returned in the input order.
std::vector<double> holm_adjust(const std::vector<double>& p_values);

}  // namespace tmex
