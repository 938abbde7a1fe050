#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tmex/io.hpp"

namespace tmex {

// The five-variable linear benchmark: Z1 confounds everything, Z4 -> Z5 is
// the treatment edge (unit weight), Z4/Z5 observed, unit Gaussian noise.
ScmSpec linear_benchmark_scm();
// Same graph with location-scale mechanisms everywhere except the outcome
// node, which stays linear in (Z1, Z4) so the scalar effect of Z4 on Z5 is 1.
ScmSpec nonlinear_benchmark_scm(std::uint64_t seed);

constexpr double kAteTruth = 1.0;

struct ScenarioConfig {
    std::string scenario;  // linear-sim | nonlinear-sim | noisy | weak |
                           // scaling | shd-pitfall | istant-synthetic
    std::optional<int> n_samples;
    std::optional<int> n_repeats;
    double alpha = 0.05;
    std::optional<CiTestConfig> test;
    std::uint64_t seed = 0;
    std::string output_dir;
    bool holm = false;
    int threads = 0;  // 0 = hardware default

    // Scenario-specific knobs (ignored by other scenarios).
    double b_mix = 0.15;        // linear-sim variant-B mixing weight
    double mixed_coef = 0.3;    // nonlinear-sim mixed-model weight on Z2
    double noise_scale = 0.5;   // noisy: measurement noise sd
    int n_latents = 50;         // scaling
    int n_dags = 20;            // scaling: repeats = n_dags * reps_per_dag
    int reps_per_dag = 5;       // scaling
    double edge_prob = 0.1;     // scaling
    double tau = 0.2;           // istant-synthetic: true effect
    double leak = 0.3;          // istant-synthetic: label leak strength

    void validate() const;
};

struct RepeatError {
    int repeat = 0;
    std::string message;
};

struct ScenarioReport {
    std::string scenario;
    Json config;  // fully resolved
    std::vector<std::map<std::string, double>> repeats;
    std::map<std::string, std::pair<double, double>> aggregates;  // mean, sd
    std::vector<RepeatError> errors;
    Json extras;
    std::vector<double> wall_clock_sec;  // per repeat; excluded from determinism
    double total_wall_sec = 0.0;
};

// Runs the configured scenario; writes report.json and repeats.csv into
// output_dir when set. Identical config and seed give identical results
// (wall-clock fields aside) for any thread count.
ScenarioReport run_experiment(const ScenarioConfig& cfg);

ScenarioConfig scenario_config_from_json(const Json& j);

Json scenario_report_to_json(const ScenarioReport& report);
// Recomputes aggregates from the per-repeat records and throws DataError on
// mismatch beyond 1e-10.
ScenarioReport scenario_report_from_json(const Json& j);

std::string render_report_table(const ScenarioReport& report);

// mean/sd (sample sd) helper shared by the runner and the integrity check.
std::pair<double, double> mean_sd(const std::vector<double>& values);

}  // namespace tmex
