#include "tmex/calibration.hpp"

#include <chrono>
#include <cmath>
#include <functional>

#include "tmex/citest.hpp"
#include "tmex/errors.hpp"
#include "tmex/metrics.hpp"
#include "tmex/scenarios.hpp"
#include "tmex/threads.hpp"
#include "tmex/tmex_score.hpp"

namespace tmex {

bool CalibrationLedger::all_passed() const {
    for (const auto& c : cases)
        if (!c.skipped && !c.passed) return false;
    return true;
}

Json CalibrationLedger::to_json() const {
    Json arr = Json::array();
    for (const auto& c : cases) {
        arr.push_back(Json{{"name", c.name},
                           {"invariant", c.invariant},
                           {"seed", c.seed},
                           {"observed", c.observed},
                           {"required_lo", c.required_lo},
                           {"required_hi", c.required_hi},
                           {"passed", c.passed},
                           {"skipped", c.skipped},
                           {"seconds", c.seconds}});
    }
    return Json{{"cases", arr}, {"all_passed", all_passed()}};
}

namespace {

// Rejection rate of fn(seed) over n_seeds trials, computed in parallel.
double rejection_rate(int n_seeds, int threads, const std::function<bool(std::uint64_t)>& fn,
                      std::uint64_t base_seed) {
    std::vector<int> hits(static_cast<std::size_t>(n_seeds), 0);
    parallel_for(static_cast<std::size_t>(n_seeds), threads, [&](std::size_t k) {
        hits[k] = fn(derive_seed(base_seed, "mc", static_cast<std::uint64_t>(k))) ? 1 : 0;
    });
    int total = 0;
    for (int h : hits) total += h;
    return static_cast<double>(total) / static_cast<double>(n_seeds);
}

bool gcm_null_trial(std::uint64_t seed) {
    Rng rng(seed);
    const int n = 2000;
    Vec x(n), y(n);
    for (int k = 0; k < n; ++k) {
        x[k] = rng.normal();
        y[k] = rng.normal();
    }
    CiTestConfig cfg;
    cfg.test = CiTestKind::Gcm;
    cfg.seed = seed;
    return gcm_test(x, y, Mat(n, 0), cfg).reject;
}

bool gcm_power_trial(std::uint64_t seed) {
    Rng rng(seed);
    const int n = 4096;
    Vec z(n), x(n), y(n);
    for (int k = 0; k < n; ++k) {
        z[k] = rng.normal();
        x[k] = z[k] + rng.normal();
        y[k] = z[k] + 0.5 * x[k] + rng.normal();
    }
    CiTestConfig cfg;
    cfg.test = CiTestKind::Gcm;
    cfg.seed = seed;
    return gcm_test(x, y, z, cfg).reject;
}

bool pcm_null_trial(std::uint64_t seed) {
    Rng rng(seed);
    const int n = 4096;
    Vec z(n), x(n), y(n);
    for (int k = 0; k < n; ++k) {
        z[k] = rng.normal();
        x[k] = z[k] + rng.normal();
        y[k] = z[k] + rng.normal();
    }
    CiTestConfig cfg;
    cfg.test = CiTestKind::Pcm;
    cfg.seed = seed;
    return pcm_test(y, x, z, cfg).reject;
}

bool pcm_power_trial(std::uint64_t seed) {
    Rng rng(seed);
    const int n = 4096;
    Vec z(n), x(n), y(n);
    for (int k = 0; k < n; ++k) {
        z[k] = rng.normal();
        x[k] = z[k] + rng.normal();
        y[k] = z[k] + 0.5 * x[k] + rng.normal();
    }
    CiTestConfig cfg;
    cfg.test = CiTestKind::Pcm;
    cfg.seed = seed;
    return pcm_test(y, x, z, cfg).reject;
}

double pcm_null_pvalue(std::uint64_t seed) {
    Rng rng(seed);
    const int n = 2048;
    Vec z(n), x(n), y(n);
    for (int k = 0; k < n; ++k) {
        z[k] = rng.normal();
        x[k] = z[k] + rng.normal();
        y[k] = z[k] + rng.normal();
    }
    CiTestConfig cfg;
    cfg.test = CiTestKind::Pcm;
    cfg.seed = seed;
    return pcm_test(y, x, z, cfg).p_value;
}

}  // namespace

CalibrationLedger run_calibration(const std::vector<std::string>& suite,
                                  const CalibrationOptions& opt) {
    CalibrationLedger ledger;
    const int threads = opt.threads > 0 ? opt.threads : default_thread_count();
    const auto t_start = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    };
    auto wants = [&suite](const std::string& name) {
        if (suite.empty()) return true;
        for (const auto& s : suite)
            if (s == name) return true;
        return false;
    };
    auto out_of_budget = [&] {
        return !opt.ci_mode && opt.budget_seconds > 0.0 && elapsed() > opt.budget_seconds;
    };

    auto add_case = [&](const std::string& name, const std::string& invariant, double lo, double hi,
                        const std::function<double(std::uint64_t)>& observe) {
        if (!wants(name)) return;
        OracleCase c;
        c.name = name;
        c.invariant = invariant;
        c.seed = derive_seed(opt.seed, name);
        c.required_lo = lo;
        c.required_hi = hi;
        if (out_of_budget()) {
            c.skipped = true;
            ledger.cases.push_back(c);
            return;
        }
        const auto t0 = std::chrono::steady_clock::now();
        c.observed = observe(c.seed);
        c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        c.passed = c.observed >= lo && c.observed <= hi;
        ledger.cases.push_back(c);
    };

    // Type-I error windows are +-2 binomial SE at the stated replication
    // counts, matching the documented [0.03, 0.07] at 1000 seeds.
    add_case("gcm_validity", "gcm type-I error at alpha = 0.05", 0.03, 0.07,
             [&](std::uint64_t seed) {
                 return rejection_rate(opt.gcm_null_seeds, threads, gcm_null_trial, seed);
             });
    add_case("pcm_validity", "pcm type-I error at alpha = 0.05", 0.03, 0.07,
             [&](std::uint64_t seed) {
                 return rejection_rate(opt.pcm_null_seeds, threads, pcm_null_trial, seed);
             });
    add_case("gcm_power", "gcm power on the linear alternative at n = 4096", 0.95, 1.0,
             [&](std::uint64_t seed) {
                 return rejection_rate(opt.power_seeds, threads, gcm_power_trial, seed);
             });
    add_case("pcm_power", "pcm power on the linear alternative at n = 4096", 0.95, 1.0,
             [&](std::uint64_t seed) {
                 return rejection_rate(opt.power_seeds, threads, pcm_power_trial, seed);
             });
    add_case("pvalue_uniformity", "null p-values are KS-uniform at level 0.01", 0.01, 1.0,
             [&](std::uint64_t seed) {
                 std::vector<double> pvals(static_cast<std::size_t>(opt.ks_seeds));
                 parallel_for(pvals.size(), threads, [&](std::size_t k) {
                     pvals[k] = pcm_null_pvalue(derive_seed(seed, "ks", static_cast<std::uint64_t>(k)));
                 });
                 return ks_uniform(pvals);
             });
    add_case("hamming_metric", "tmex_score satisfies the triangle inequality", 0.0, 0.0,
             [&](std::uint64_t seed) {
                 Rng rng(seed);
                 int violations = 0;
                 for (int trial = 0; trial < 1000; ++trial) {
                     const int rows = 1 + static_cast<int>(rng.below(4));
                     const int cols = 1 + static_cast<int>(rng.below(4));
                     Eigen::MatrixXi a(rows, cols), b(rows, cols), c(rows, cols);
                     for (int i = 0; i < rows; ++i)
                         for (int j = 0; j < cols; ++j) {
                             a(i, j) = rng.bernoulli(0.5);
                             b(i, j) = rng.bernoulli(0.5);
                             c(i, j) = rng.bernoulli(0.5);
                         }
                     const int ab = tmex_score(a, b), bc = tmex_score(b, c), ac = tmex_score(a, c);
                     if (ac > ab + bc || tmex_score(a, b) != tmex_score(b, a) ||
                         tmex_score(a, a) != 0)
                         ++violations;
                 }
                 return static_cast<double>(violations);
             });
    // Expected score respects the bound when the joint law matches V: the
    // exclusive single-parent design has 2 null cells and 1 alternative cell,
    // so E[score] <= alpha*2 + (1-beta)*1. Power is measured on the same
    // repeats; the check allows 2 standard errors of the mean.
    add_case("expectation_bound", "mean score <= alpha*(nulls) + (1-beta)*(alts) + 2 SE", 1.0, 1.0,
             [&](std::uint64_t seed) {
                 const int repeats = opt.bound_repeats;
                 std::vector<double> scores(static_cast<std::size_t>(repeats));
                 std::vector<int> alt_reject(static_cast<std::size_t>(repeats));
                 parallel_for(scores.size(), threads, [&](std::size_t k) {
                     Rng rng(derive_seed(seed, "rep", static_cast<std::uint64_t>(k)));
                     const int n = 2048;
                     Mat z(n, 3);
                     for (int row = 0; row < n; ++row) {
                         z(row, 0) = rng.normal();
                         z(row, 1) = z(row, 0) + rng.normal();
                         z(row, 2) = z(row, 0) + z(row, 1) + rng.normal();
                     }
                     // Exclusive diffeomorphic measurement of Z1, so the null
                     // cells are genuine statistical nulls.
                     const VariantModel gen =
                         make_model_abc(Variant::A, derive_seed(seed, "model", k), 0.0, 3);
                     const PairedDataset ds =
                         apply_measurements(gen.model, z, derive_seed(seed, "m", k));
                     CiTestConfig cfg;
                     cfg.test = CiTestKind::Pcm;
                     cfg.seed = derive_seed(seed, "t", static_cast<std::uint64_t>(k));
                     const TmexReport rep = tmex_from_data(ds, exclusive_hypothesis(3), cfg, false);
                     scores[k] = rep.score;
                     alt_reject[k] = rep.W_hat(0, 0);
                 });
                 const auto [mean_score, sd_score] = mean_sd(scores);
                 double beta_hat = 0.0;
                 for (int h : alt_reject) beta_hat += h;
                 beta_hat /= repeats;
                 const double bound = 0.05 * 2.0 + (1.0 - beta_hat) * 1.0;
                 const double se = sd_score / std::sqrt(static_cast<double>(repeats));
                 // Pass = 1, fail = 0 encoded as the observed value.
                 return mean_score <= bound + 2.0 * se ? 1.0 : 0.0;
             });
    return ledger;
}

}  // namespace tmex
