#include "tmex/tmex_score.hpp"

#include <numeric>

#include "tmex/errors.hpp"
#include "tmex/rng.hpp"

namespace tmex {

namespace {

std::vector<int> full_grid(int n) {
    std::vector<int> g(n);
    std::iota(g.begin(), g.end(), 0);
    return g;
}

std::string fingerprint(const CiTestConfig& cfg, bool holm) {
    std::uint64_t h = hash_label(cfg.test == CiTestKind::Gcm ? "gcm" : "pcm");
    h = derive_seed(h, cfg.seed);
    h = derive_seed(h, static_cast<std::uint64_t>(cfg.cv_folds));
    h = derive_seed(h, static_cast<std::uint64_t>(cfg.pcm_split_fraction * 1e6));
    h = derive_seed(h, static_cast<std::uint64_t>(cfg.alpha * 1e6));
    h = derive_seed(h, cfg.regressor.kind == RegressorKind::Ols ? "ols" : "kernel_ridge");
    h = derive_seed(h, holm ? "holm" : "raw");
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

}  // namespace

WhatResult estimate_w_hat(const PairedDataset& ds, const std::vector<int>& latent_grid,
                          const CiTestConfig& cfg, bool holm) {
    ds.validate();
    cfg.validate();
    const int N = ds.n_latents();
    const int M = ds.n_blocks();
    const int n = ds.n_rows();
    if (n < 40) throw SmallSampleError("estimate_w_hat: need n >= 40");
    const std::vector<int> grid = latent_grid.empty() ? full_grid(N) : latent_grid;
    for (int i : grid)
        if (i < 0 || i >= N) throw ShapeError("estimate_w_hat: grid index out of range");

    WhatResult res;
    const int rows = static_cast<int>(grid.size());
    res.W_hat = Eigen::MatrixXi::Zero(rows, M);
    res.p_values = Mat::Ones(rows, M);

    for (int r = 0; r < rows; ++r) {
        const int i = grid[r];
        Mat z_others(n, N - 1);
        int col = 0;
        for (int other = 0; other < N; ++other)
            if (other != i) z_others.col(col++) = ds.z.col(other);
        const Vec z_i = ds.z.col(i);
        for (int j = 0; j < M; ++j) {
            CiTestConfig cell_cfg = cfg;
            cell_cfg.seed = derive_seed(cfg.seed, "cell", static_cast<std::uint64_t>(i),
                                        static_cast<std::uint64_t>(j));
            try {
                TestOutcome outcome;
                if (cfg.test == CiTestKind::Pcm) {
                    outcome = pcm_test(z_i, ds.block(j), z_others, cell_cfg);
                } else {
                    outcome = gcm_test(z_i, ds.block(j), z_others, cell_cfg);
                }
                res.p_values(r, j) = outcome.p_value;
            } catch (const DegenerateError&) {
                // Exact functional dependence on the conditioning set: the
                // conditional law is degenerate, so the null holds trivially.
                res.p_values(r, j) = 1.0;
                res.degenerate_cells.emplace_back(i, j);
            }
        }
    }

    Mat thresholded = res.p_values;
    if (holm) {
        std::vector<double> flat;
        flat.reserve(static_cast<std::size_t>(rows) * M);
        for (int r = 0; r < rows; ++r)
            for (int j = 0; j < M; ++j) flat.push_back(res.p_values(r, j));
        const std::vector<double> adj = holm_adjust(flat);
        int k = 0;
        for (int r = 0; r < rows; ++r)
            for (int j = 0; j < M; ++j) thresholded(r, j) = adj[static_cast<std::size_t>(k++)];
    }
    for (int r = 0; r < rows; ++r)
        for (int j = 0; j < M; ++j) res.W_hat(r, j) = thresholded(r, j) < cfg.alpha ? 1 : 0;
    return res;
}

int tmex_score(const Eigen::MatrixXi& v, const Eigen::MatrixXi& w_hat) {
    if (v.rows() != w_hat.rows() || v.cols() != w_hat.cols())
        throw ShapeError("tmex_score: shapes differ");
    int score = 0;
    for (int i = 0; i < v.rows(); ++i)
        for (int j = 0; j < v.cols(); ++j)
            if ((v(i, j) != 0) != (w_hat(i, j) != 0)) ++score;
    return score;
}

Eigen::MatrixXi restrict_rows(const Eigen::MatrixXi& v, const std::vector<int>& latent_grid) {
    if (latent_grid.empty()) return v;
    Eigen::MatrixXi out(static_cast<int>(latent_grid.size()), v.cols());
    for (std::size_t r = 0; r < latent_grid.size(); ++r) {
        if (latent_grid[r] < 0 || latent_grid[r] >= v.rows())
            throw ShapeError("restrict_rows: grid index out of range");
        out.row(static_cast<int>(r)) = v.row(latent_grid[r]);
    }
    return out;
}

TmexReport tmex_from_data(const PairedDataset& ds, const MeasurementModel& hypothesis,
                          const CiTestConfig& cfg, bool holm,
                          const std::vector<int>& latent_grid) {
    if (hypothesis.n_latents != ds.n_latents())
        throw ShapeError("tmex_from_data: model/latent column mismatch");
    if (static_cast<int>(hypothesis.blocks.size()) != ds.n_blocks())
        throw ShapeError("tmex_from_data: model/block count mismatch");
    for (int j = 0; j < ds.n_blocks(); ++j)
        if (hypothesis.blocks[j].dim != ds.block_dim(j))
            throw ShapeError("tmex_from_data: block dim mismatch at block " + std::to_string(j));

    const std::vector<int> grid =
        latent_grid.empty() ? full_grid(ds.n_latents()) : latent_grid;

    TmexReport report;
    report.latents = grid;
    report.V = restrict_rows(adjacency(hypothesis), grid);
    WhatResult res = estimate_w_hat(ds, grid, cfg, holm);
    report.W_hat = res.W_hat;
    report.p_values = res.p_values;
    report.degenerate_cells = std::move(res.degenerate_cells);
    report.score = tmex_score(report.V, report.W_hat);
    report.alpha = cfg.alpha;
    report.holm = holm;
    report.beta_for_bound = 1.0;
    report.bound = expected_bound(report.V, cfg.alpha, 1.0);
    report.config_fingerprint = fingerprint(cfg, holm);
    return report;
}

double expected_bound(const Eigen::MatrixXi& v, double alpha, double beta) {
    if (!(alpha > 0.0 && alpha <= 1.0) || !(beta > 0.0 && beta <= 1.0))
        throw ConfigError("expected_bound: alpha, beta must be in (0,1]");
    const double ones = static_cast<double>(v.cwiseAbs().sum());
    const double cells = static_cast<double>(v.rows()) * static_cast<double>(v.cols());
    return alpha * (cells - ones) + (1.0 - beta) * ones;
}

Eigen::MatrixXi oracle_w(const MeasurementModel& model) {
    return adjacency(model);
}

Eigen::MatrixXi oracle_w(int n_latents, const std::vector<std::set<int>>& effective_parents,
                         const std::vector<int>& latent_grid) {
    Eigen::MatrixXi w = Eigen::MatrixXi::Zero(n_latents, static_cast<int>(effective_parents.size()));
    for (std::size_t j = 0; j < effective_parents.size(); ++j)
        for (int p : effective_parents[j]) {
            if (p < 0 || p >= n_latents) throw ShapeError("oracle_w: parent index out of range");
            w(p, static_cast<int>(j)) = 1;
        }
    return restrict_rows(w, latent_grid);
}

}  // namespace tmex
