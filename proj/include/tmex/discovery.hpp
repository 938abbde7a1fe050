#pragma once

#include <cstdint>

#include "tmex/scm.hpp"

namespace tmex {

struct DiscoveryConfig {
    double prune_threshold = 0.05;  // on standardized coefficients
    int max_nodes = 10;
    int min_rows = 200;

    void validate() const;
};

// Sample distance correlation via double-centered distance matrices,
// streamed in O(n) memory.
double distance_correlation(const Vec& a, const Vec& b);

// Iterative root search: the next root minimizes the summed distance
// correlation between the candidate and the residuals of the remaining
// variables regressed on it; remaining columns are then replaced by those
// residuals. Ties break to the lowest column index.
std::vector<int> causal_order(const Mat& data, const DiscoveryConfig& cfg);

// OLS of each node on all predecessors in `order` over standardized data;
// edges kept where |coefficient| > prune_threshold.
Dag prune_edges(const std::vector<int>& order, const Mat& data, const DiscoveryConfig& cfg);

struct PitfallTrial {
    int shd = 0;
    int n_edges_found = 0;
    bool entangled = true;
    int oracle_tmex = 1;
};

// One draw of the three-variable near-deterministic chain whose first
// measurement mixes two latents: runs discovery on the measurements and
// scores the recovered graph against the latent ground truth.
PitfallTrial shd_pitfall_trial(std::uint64_t seed, int n = 2000,
                               const DiscoveryConfig& cfg = {});

}  // namespace tmex
