#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tmex/citest.hpp"
#include "tmex/measurement.hpp"

namespace tmex {

// Exclusivity report: hypothesized adjacency V against the rejection matrix
// W_hat built from per-cell conditional-independence tests. Rows follow the
// tested latent grid, columns the measurement blocks.
struct TmexReport {
    std::vector<int> latents;  // tested latent indices (grid rows)
    Eigen::MatrixXi V;
    Eigen::MatrixXi W_hat;
    Mat p_values;
    int score = 0;
    double alpha = 0.05;
    bool holm = false;
    double bound = 0.0;          // expected-score bound at beta_for_bound
    double beta_for_bound = 1.0;
    std::string config_fingerprint;
    // Cells whose test degenerated (exact functional dependence on the
    // conditioning set); scored as non-rejections with p = 1.
    std::vector<std::pair<int, int>> degenerate_cells;
};

// Runs the configured CI test for every (latent i in grid, block j):
// response/predictor roles are response = Z_i, predictor = Zhat_block,
// conditioning = all other causal variables. For gcm, x = Z_i, y =
// Zhat_block. Cell seeds derive from (cfg.seed, i, j) so the result is
// independent of evaluation order. Returns (W_hat, p_values, degenerate
// cells); optional Holm adjustment over all grid cells before thresholding.
struct WhatResult {
    Eigen::MatrixXi W_hat;
    Mat p_values;
    std::vector<std::pair<int, int>> degenerate_cells;
};
WhatResult estimate_w_hat(const PairedDataset& ds, const std::vector<int>& latent_grid,
                          const CiTestConfig& cfg, bool holm);

// Hamming distance between two binary matrices of equal shape.
int tmex_score(const Eigen::MatrixXi& v, const Eigen::MatrixXi& w_hat);

// Full pipeline: adjacency of the hypothesized model (restricted to the
// grid), W_hat from the data, score, and the expected bound at beta = 1.
TmexReport tmex_from_data(const PairedDataset& ds, const MeasurementModel& hypothesis,
                          const CiTestConfig& cfg, bool holm,
                          const std::vector<int>& latent_grid = {});

// alpha*(MN - ||V||_1) + (1-beta)*||V||_1.
double expected_bound(const Eigen::MatrixXi& v, double alpha, double beta);

// Rejection matrix of a zero-error, full-power test: W[i][j] = 1 iff latent i
// is an effective parent of block j.
Eigen::MatrixXi oracle_w(const MeasurementModel& model);
Eigen::MatrixXi oracle_w(int n_latents, const std::vector<std::set<int>>& effective_parents,
                         const std::vector<int>& latent_grid = {});

// Restrict rows of an N x M adjacency to a latent grid.
Eigen::MatrixXi restrict_rows(const Eigen::MatrixXi& v, const std::vector<int>& latent_grid);

}  // namespace tmex
