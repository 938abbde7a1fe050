#pragma once

#include <cstdint>
#include <vector>

#include "tmex/regress.hpp"
#include "tmex/scm.hpp"

namespace tmex {

enum class CorrMode { Pearson, Spearman };
enum class Alternative { Greater, Less, TwoSided };

struct MccResult {
    double score = 0.0;
    std::vector<int> permutation;  // latent index -> representation index
    Mat correlation_matrix;        // |corr|, latents x representations
};

// 1 - MSE(cross-fitted predictions) / Var(z_i); may be negative.
double r2_score(const Vec& z_i, const Mat& zhat, const RegressorSpec& regressor, int folds,
                std::uint64_t seed);

double pearson(const Vec& a, const Vec& b);
double spearman(const Vec& a, const Vec& b);

// Average ranks (ties averaged), 1-based.
Vec average_ranks(const Vec& v);

// Permutation-maximized mean |corr|, solved exactly by the Hungarian
// assignment algorithm.
MccResult mcc(const Mat& z, const Mat& zhat, CorrMode mode);

// Pair-based structural disagreement count: a reversed edge costs 1, a
// missing-vs-present edge costs 1.
int shd(const Dag& g1, const Dag& g2);

// Rank-sum test with tie-corrected normal approximation and continuity
// correction. "Greater" tests whether a is stochastically larger than b.
double mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b,
                      Alternative alternative);

// One-sample Kolmogorov-Smirnov test against Uniform(0,1), asymptotic p-value.
double ks_uniform(const std::vector<double>& p_values);

// Exact min-cost assignment (O(n^3) Hungarian with potentials); returns the
// column assigned to each row.
std::vector<int> hungarian_min_cost(const Mat& cost);

}  // namespace tmex
