#include "tmex/scenarios.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "tmex/causal.hpp"
#include "tmex/discovery.hpp"
#include "tmex/errors.hpp"
#include "tmex/metrics.hpp"
#include "tmex/threads.hpp"

namespace tmex {

ScmSpec linear_benchmark_scm() {
    ScmSpec spec;
    spec.dag.n_nodes = 5;
    // Z2 <- Z1, Z5; Z3 <- Z1, Z2; Z4 <- Z1; Z5 <- Z1, Z4. All weights 1.
    spec.dag.add_edge(0, 1);
    spec.dag.add_edge(4, 1);
    spec.dag.add_edge(0, 2);
    spec.dag.add_edge(1, 2);
    spec.dag.add_edge(0, 3);
    spec.dag.add_edge(0, 4);
    spec.dag.add_edge(3, 4);
    spec.observed = {false, false, false, true, true};
    spec.mechanisms.resize(5);
    for (int v = 0; v < 5; ++v) {
        auto parents = spec.dag.parents_of(v);
        spec.mechanisms[v].kind = MechanismKind::Linear;
        spec.mechanisms[v].linear_weights.assign(parents.size(), 1.0);
        spec.mechanisms[v].noise = {NoiseFamily::Gaussian, 1.0, 0.0};
    }
    spec.validate();
    return spec;
}

ScmSpec nonlinear_benchmark_scm(std::uint64_t seed) {
    ScmSpec spec;
    spec.dag.n_nodes = 5;
    spec.dag.add_edge(0, 1);
    spec.dag.add_edge(4, 1);
    spec.dag.add_edge(0, 2);
    spec.dag.add_edge(1, 2);
    spec.dag.add_edge(0, 3);
    spec.dag.add_edge(0, 4);
    spec.dag.add_edge(3, 4);
    spec.observed = {false, false, false, true, true};
    spec.mechanisms.resize(5);
    for (int v : {1, 2, 3}) {
        Rng rng(derive_seed(seed, "nl", static_cast<std::uint64_t>(v)));
        const int in_degree = static_cast<int>(spec.dag.parents_of(v).size());
        spec.mechanisms[v].kind = MechanismKind::LocationScale;
        spec.mechanisms[v].location = RandomFeatures::draw(in_degree, 16, rng);
        spec.mechanisms[v].scale_raw = RandomFeatures::draw(in_degree, 16, rng);
        spec.mechanisms[v].noise = {NoiseFamily::Gaussian, 1.0, 0.0};
    }
    spec.mechanisms[0].kind = MechanismKind::Linear;
    spec.mechanisms[0].noise = {NoiseFamily::Gaussian, 1.0, 0.0};
    // Outcome stays linear in (Z1, Z4) so the Z4 -> Z5 effect is exactly 1.
    spec.mechanisms[4].kind = MechanismKind::Linear;
    spec.mechanisms[4].linear_weights = {1.0, 1.0};
    spec.mechanisms[4].noise = {NoiseFamily::Gaussian, 1.0, 0.0};
    spec.validate();
    return spec;
}

void ScenarioConfig::validate() const {
    static const std::set<std::string> known{"linear-sim", "nonlinear-sim", "noisy",
                                             "weak",       "scaling",       "shd-pitfall",
                                             "istant-synthetic"};
    if (!known.count(scenario)) throw ConfigError("unknown scenario \"" + scenario + "\"");
    if (n_repeats && *n_repeats < 1) throw ConfigError("n_repeats must be >= 1");
    if (n_samples && *n_samples < 40) throw ConfigError("n_samples must be >= 40");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must be in (0,1)");
}

namespace {

struct Resolved {
    int n = 0;
    int repeats = 0;
    CiTestConfig test;
    int threads = 1;
};

CiTestConfig default_test(const std::string& scenario) {
    CiTestConfig t;
    t.test = CiTestKind::Pcm;
    t.regressor.kind = RegressorKind::Ols;
    if (scenario == "scaling") t.test = CiTestKind::Gcm;
    if (scenario == "nonlinear-sim") t.regressor.kind = RegressorKind::KernelRidge;
    return t;
}

Resolved resolve(const ScenarioConfig& cfg) {
    Resolved r;
    int def_n = 4096, def_repeats = 50;
    if (cfg.scenario == "nonlinear-sim") def_n = 2048;
    if (cfg.scenario == "noisy" || cfg.scenario == "scaling" || cfg.scenario == "istant-synthetic")
        def_n = 1000;
    if (cfg.scenario == "shd-pitfall" || cfg.scenario == "weak") def_n = 2000;
    if (cfg.scenario == "noisy" || cfg.scenario == "weak" || cfg.scenario == "shd-pitfall" ||
        cfg.scenario == "istant-synthetic")
        def_repeats = 100;
    if (cfg.scenario == "scaling") def_repeats = cfg.n_dags * cfg.reps_per_dag;
    r.n = cfg.n_samples.value_or(def_n);
    r.repeats = cfg.n_repeats.value_or(def_repeats);
    r.test = cfg.test.value_or(default_test(cfg.scenario));
    r.test.alpha = cfg.alpha;
    r.threads = cfg.threads > 0 ? cfg.threads : default_thread_count();
    return r;
}

Json resolved_config_json(const ScenarioConfig& cfg, const Resolved& r) {
    Json j{{"scenario", cfg.scenario},
           {"n_samples", r.n},
           {"n_repeats", r.repeats},
           {"alpha", cfg.alpha},
           {"test", citest_config_to_json(r.test)},
           {"seed", cfg.seed},
           {"output_dir", cfg.output_dir},
           {"holm", cfg.holm}};
    if (cfg.scenario == "linear-sim") j["b_mix"] = cfg.b_mix;
    if (cfg.scenario == "nonlinear-sim") j["mixed_coef"] = cfg.mixed_coef;
    if (cfg.scenario == "noisy") j["noise_scale"] = cfg.noise_scale;
    if (cfg.scenario == "scaling") {
        j["n_latents"] = cfg.n_latents;
        j["n_dags"] = cfg.n_dags;
        j["reps_per_dag"] = cfg.reps_per_dag;
        j["edge_prob"] = cfg.edge_prob;
    }
    if (cfg.scenario == "istant-synthetic") {
        j["tau"] = cfg.tau;
        j["leak"] = cfg.leak;
    }
    return j;
}

using Record = std::map<std::string, double>;

// ---------------------------------------------------------------------------
// linear-sim
// ---------------------------------------------------------------------------

struct VariantSetup {
    std::string name;
    VariantModel vm;
};

Record run_linear_repeat(const ScmSpec& scm, const std::vector<VariantSetup>& variants,
                         const MeasurementModel& hypothesis, const std::vector<int>& grid,
                         const Resolved& r, bool holm, std::uint64_t rep_seed) {
    Record rec;
    const Mat z = sample_scm(scm, r.n, derive_seed(rep_seed, "z"));
    RegressorSpec ols;
    for (std::size_t vi = 0; vi < variants.size(); ++vi) {
        const auto& vs = variants[vi];
        PairedDataset ds = apply_measurements(vs.vm.model, z, derive_seed(rep_seed, "m", vi));
        if (!vs.vm.corruption.empty()) ds = corrupt_mix(ds, 0, vs.vm.corruption);

        CiTestConfig cell = r.test;
        cell.seed = derive_seed(rep_seed, "test", vi);
        const TmexReport rep = tmex_from_data(ds, hypothesis, cell, holm, grid);
        rec[vs.name + ".tmex"] = rep.score;
        for (std::size_t g = 0; g < grid.size(); ++g)
            rec[vs.name + ".pval_z" + std::to_string(grid[g] + 1)] =
                rep.p_values(static_cast<int>(g), 0);

        for (int i = 0; i < 3; ++i) {
            rec[vs.name + ".r2_z" + std::to_string(i + 1)] =
                r2_score(z.col(i), ds.zhat, ols, 5, derive_seed(rep_seed, "r2", vi, i));
            rec[vs.name + ".spearman_z" + std::to_string(i + 1)] =
                std::fabs(spearman(z.col(i), ds.zhat.col(0)));
        }

        const AteResult lin = ate_linear_adjust(z.col(3), z.col(4), ds.zhat);
        const AteResult par = ate_partially_linear(z.col(3), z.col(4), ds.zhat, ols, 2,
                                                   derive_seed(rep_seed, "plr", vi));
        rec[vs.name + ".ate_linear_bias"] = ate_bias(lin, kAteTruth);
        rec[vs.name + ".ate_partial_bias"] = ate_bias(par, kAteTruth);
    }
    return rec;
}

// ---------------------------------------------------------------------------
// nonlinear-sim
// ---------------------------------------------------------------------------

Record run_nonlinear_repeat(const ScmSpec& scm, const std::vector<VariantSetup>& models,
                            const MeasurementModel& hypothesis, const std::vector<int>& grid,
                            const Resolved& r, bool holm, std::uint64_t rep_seed) {
    Record rec;
    const Mat z = sample_scm(scm, r.n, derive_seed(rep_seed, "z"));
    RegressorSpec krr;
    krr.kind = RegressorKind::KernelRidge;
    for (std::size_t vi = 0; vi < models.size(); ++vi) {
        const auto& vs = models[vi];
        const PairedDataset ds = apply_measurements(vs.vm.model, z, derive_seed(rep_seed, "m", vi));
        CiTestConfig cell = r.test;
        cell.seed = derive_seed(rep_seed, "test", vi);
        const TmexReport rep = tmex_from_data(ds, hypothesis, cell, holm, grid);
        rec[vs.name + ".tmex"] = rep.score;
        const AteResult par = ate_partially_linear(z.col(3), z.col(4), ds.zhat, krr, 2,
                                                   derive_seed(rep_seed, "plr", vi));
        const AteResult lin = ate_linear_adjust(z.col(3), z.col(4), ds.zhat);
        rec[vs.name + ".ate_bias"] = ate_bias(par, kAteTruth);
        rec[vs.name + ".ate_linear_bias"] = ate_bias(lin, kAteTruth);
    }
    return rec;
}

// ---------------------------------------------------------------------------
// noisy / weak / scaling / shd-pitfall / istant-synthetic helpers
// ---------------------------------------------------------------------------

ScmSpec chain3_scm() {
    ScmSpec spec;
    spec.dag.n_nodes = 3;
    spec.dag.add_edge(0, 1);
    spec.dag.add_edge(0, 2);
    spec.dag.add_edge(1, 2);
    spec.observed = {false, false, false};
    spec.mechanisms.resize(3);
    spec.mechanisms[0].noise = {NoiseFamily::Gaussian, 1.0, 0.0};
    spec.mechanisms[1].linear_weights = {1.0};
    spec.mechanisms[1].noise = {NoiseFamily::Gaussian, 1.0, 0.0};
    spec.mechanisms[2].linear_weights = {1.0, 1.0};
    spec.mechanisms[2].noise = {NoiseFamily::Gaussian, 1.0, 0.0};
    return spec;
}

MeasurementModel identity_blocks(int n_latents, double noise_scale) {
    MeasurementModel m;
    m.n_latents = n_latents;
    for (int i = 0; i < n_latents; ++i) {
        MeasurementBlock blk;
        blk.parents = {i};
        blk.dim = 1;
        blk.fn.kind = MeasurementKind::Identity;
        blk.fn.noise_scale = noise_scale;
        m.blocks.push_back(blk);
    }
    return m;
}

Record run_noisy_repeat(const ScmSpec& scm, double noise_scale, const Resolved& r, bool holm,
                        std::uint64_t rep_seed) {
    Record rec;
    const Mat z = sample_scm(scm, r.n, derive_seed(rep_seed, "z"));
    const MeasurementModel hypothesis = identity_blocks(3, 0.0);
    for (const auto& [name, scale] : std::vector<std::pair<std::string, double>>{
             {"clean", 0.0}, {"noisy", noise_scale}}) {
        const MeasurementModel gen = identity_blocks(3, scale);
        const PairedDataset ds = apply_measurements(gen, z, derive_seed(rep_seed, "m", name));
        CiTestConfig cell = r.test;
        cell.seed = derive_seed(rep_seed, "test", name);
        const TmexReport rep = tmex_from_data(ds, hypothesis, cell, holm);
        rec[name + ".tmex"] = rep.score;
        rec[name + ".degenerate_cells"] = static_cast<double>(rep.degenerate_cells.size());
    }
    return rec;
}

Record run_weak_repeat(const Resolved& r, bool holm, std::uint64_t rep_seed) {
    Record rec;
    Rng rng(derive_seed(rep_seed, "coef"));
    ScmSpec spec = chain3_scm();
    spec.mechanisms[1].linear_weights = {rng.uniform(0.01, 0.1)};
    spec.mechanisms[1].noise.scale = rng.uniform(0.005, 0.02);
    spec.mechanisms[2].linear_weights = {rng.uniform(0.01, 0.1), rng.uniform(0.01, 0.1)};
    spec.mechanisms[2].noise.scale = rng.uniform(0.005, 0.02);
    const Mat z = sample_scm(spec, r.n, derive_seed(rep_seed, "z"));

    MeasurementModel gen;
    gen.n_latents = 3;
    {
        MeasurementBlock blk1;
        blk1.parents = {0, 1};
        blk1.dim = 1;
        blk1.fn.kind = MeasurementKind::LinearMix;
        blk1.fn.linear_mix = (Mat(1, 2) << 1.0, 1.0).finished();
        gen.blocks = {blk1, identity_blocks(3, 0.0).blocks[1], identity_blocks(3, 0.0).blocks[2]};
    }
    const PairedDataset ds = apply_measurements(gen, z, derive_seed(rep_seed, "m"));

    const MeasurementModel hypothesis = identity_blocks(3, 0.0);
    CiTestConfig cell = r.test;
    cell.seed = derive_seed(rep_seed, "test");
    const TmexReport rep = tmex_from_data(ds, hypothesis, cell, holm);
    rec["tmex"] = rep.score;
    rec["tmex_oracle"] = tmex_score(adjacency(hypothesis), oracle_w(gen));

    rec["mcc"] = mcc(ds.z, ds.zhat, CorrMode::Pearson).score;
    RegressorSpec ols;
    for (int i = 0; i < 3; ++i)
        rec["r2_z" + std::to_string(i + 1)] =
            r2_score(z.col(i), ds.zhat, ols, 5, derive_seed(rep_seed, "r2", i));
    return rec;
}

Record run_scaling_repeat(const ScenarioConfig& cfg, const Resolved& r, bool holm,
                          std::uint64_t base_seed, int repeat_index) {
    Record rec;
    const int dag_index = repeat_index / cfg.reps_per_dag;
    const Dag dag = random_dag(cfg.n_latents, cfg.edge_prob,
                               derive_seed(base_seed, "dag", static_cast<std::uint64_t>(dag_index)));
    RandomScmOptions opt;
    opt.kind = MechanismKind::LocationScale;
    const ScmSpec scm =
        random_scm(dag, opt, derive_seed(base_seed, "scm", static_cast<std::uint64_t>(dag_index)));
    const std::uint64_t rep_seed =
        derive_seed(base_seed, "repeat", static_cast<std::uint64_t>(repeat_index));
    const Mat z = sample_scm(scm, r.n, derive_seed(rep_seed, "z"));

    const MeasurementModel model = identity_blocks(cfg.n_latents, 0.0);
    const PairedDataset ds = apply_measurements(model, z, derive_seed(rep_seed, "m"));
    CiTestConfig cell = r.test;
    cell.seed = derive_seed(rep_seed, "test");
    const TmexReport rep = tmex_from_data(ds, model, cell, holm);
    rec["tmex"] = rep.score;
    rec["tmex_oracle"] = 0.0;
    rec["degenerate_cells"] = static_cast<double>(rep.degenerate_cells.size());
    rec["dag_index"] = dag_index;
    return rec;
}

Record run_pitfall_repeat(const Resolved& r, std::uint64_t rep_seed) {
    Record rec;
    const PitfallTrial trial = shd_pitfall_trial(rep_seed, r.n);
    rec["shd"] = trial.shd;
    rec["n_edges_found"] = trial.n_edges_found;
    rec["shd_zero"] = trial.shd == 0 ? 1.0 : 0.0;
    rec["oracle_tmex"] = trial.oracle_tmex;
    return rec;
}

Record run_istant_repeat(const ScenarioConfig& cfg, const Resolved& r, bool holm,
                         std::uint64_t rep_seed) {
    Record rec;
    Rng rng(derive_seed(rep_seed, "data"));
    const int n = r.n;
    Vec t(n), y(n), aux_f(n), aux_l(n);
    for (int k = 0; k < n; ++k) {
        t[k] = rng.bernoulli(0.5) ? 1.0 : 0.0;
        y[k] = cfg.tau * t[k] + rng.normal();
        aux_f[k] = rng.normal();
        aux_l[k] = rng.normal();
    }
    const Vec yhat_faithful = y + 0.5 * aux_f;
    const Vec yhat_leaky = y + cfg.leak * (t.array() - 0.5).matrix() + 0.5 * aux_l;

    // Hypothesis: the label surrogate measures Y (latent 1) exclusively.
    MeasurementModel hypothesis;
    hypothesis.n_latents = 2;
    MeasurementBlock blk;
    blk.parents = {1};
    blk.dim = 1;
    blk.fn.kind = MeasurementKind::Identity;
    hypothesis.blocks = {blk};

    RegressorSpec ols;
    for (const auto& [name, yhat] : std::vector<std::pair<std::string, const Vec*>>{
             {"faithful", &yhat_faithful}, {"leaky", &yhat_leaky}}) {
        PairedDataset ds;
        ds.z.resize(n, 2);
        ds.z.col(0) = t;
        ds.z.col(1) = y;
        ds.zhat = *yhat;
        ds.block_offsets = {0, 1};
        CiTestConfig cell = r.test;
        cell.seed = derive_seed(rep_seed, "test", name);
        const TmexReport rep = tmex_from_data(ds, hypothesis, cell, holm);
        const AteResult aipw =
            ate_aipw(t, *yhat, Mat(n, 0), 0.5, ols, 2, derive_seed(rep_seed, "aipw", name));
        rec[name + ".tmex"] = rep.score;
        rec[name + ".bias"] = ate_bias(aipw, cfg.tau);
    }
    return rec;
}

// ---------------------------------------------------------------------------
// aggregation and output
// ---------------------------------------------------------------------------

void write_repeats_csv(const ScenarioReport& report, const std::string& path) {
    std::set<std::string> keys;
    for (const auto& rec : report.repeats)
        for (const auto& [k, v] : rec) {
            (void)v;
            keys.insert(k);
        }
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << "repeat";
    for (const auto& k : keys) out << "," << k;
    out << "\n";
    for (std::size_t rix = 0; rix < report.repeats.size(); ++rix) {
        out << rix;
        for (const auto& k : keys) {
            const auto it = report.repeats[rix].find(k);
            out << ",";
            if (it != report.repeats[rix].end()) out << format_double(it->second);
        }
        out << "\n";
    }
}

std::map<std::string, std::pair<double, double>> aggregate(
    const std::vector<Record>& repeats) {
    std::map<std::string, std::vector<double>> samples;
    for (const auto& rec : repeats)
        for (const auto& [k, v] : rec) samples[k].push_back(v);
    std::map<std::string, std::pair<double, double>> agg;
    for (const auto& [k, vals] : samples) agg[k] = mean_sd(vals);
    return agg;
}

double key_mean(const ScenarioReport& rep, const std::string& key) {
    const auto it = rep.aggregates.find(key);
    return it == rep.aggregates.end() ? std::nan("") : it->second.first;
}

std::vector<double> collect(const std::vector<Record>& repeats, const std::string& key) {
    std::vector<double> out;
    for (const auto& rec : repeats) {
        const auto it = rec.find(key);
        if (it != rec.end()) out.push_back(it->second);
    }
    return out;
}

Json linear_extras(const ScenarioReport& rep, double alpha) {
    Json extras;
    for (const std::string name : {"A", "B", "C"}) {
        for (int i = 1; i <= 3; ++i) {
            const auto pvals = collect(rep.repeats, name + ".pval_z" + std::to_string(i));
            if (pvals.empty()) continue;
            int rejections = 0;
            for (double p : pvals)
                if (p < alpha) ++rejections;
            extras[name + ".power_z" + std::to_string(i)] =
                static_cast<double>(rejections) / static_cast<double>(pvals.size());
            if (pvals.size() >= 10)
                extras[name + ".ks_p_z" + std::to_string(i)] = ks_uniform(pvals);
        }
    }
    // Expected-score bound for the exclusive hypothesis (2 null cells, 1
    // alternative) using the measured power on the alternative cell.
    if (extras.contains("A.power_z1")) {
        const double beta_hat = extras["A.power_z1"].get<double>();
        extras["A.bound_beta_hat"] = alpha * 2.0 + (1.0 - beta_hat);
    }
    return extras;
}

Json istant_extras(const ScenarioReport& rep) {
    std::vector<double> bias_pos, bias_zero;
    for (const auto& rec : rep.repeats) {
        for (const std::string name : {"faithful", "leaky"}) {
            const auto ts = rec.find(name + ".tmex");
            const auto bs = rec.find(name + ".bias");
            if (ts == rec.end() || bs == rec.end()) continue;
            (ts->second >= 1.0 ? bias_pos : bias_zero).push_back(bs->second);
        }
    }
    Json extras;
    extras["n_tmex_positive"] = bias_pos.size();
    extras["n_tmex_zero"] = bias_zero.size();
    if (!bias_pos.empty() && !bias_zero.empty())
        extras["mann_whitney_p"] = mann_whitney_u(bias_pos, bias_zero, Alternative::Greater);
    return extras;
}

Json pitfall_extras(const ScenarioReport& rep) {
    std::map<int, int> histogram;
    for (const auto& rec : rep.repeats) {
        const auto it = rec.find("shd");
        if (it != rec.end()) ++histogram[static_cast<int>(it->second)];
    }
    Json hist;
    for (const auto& [shd_value, count] : histogram) hist[std::to_string(shd_value)] = count;
    Json extras;
    extras["shd_histogram"] = std::move(hist);
    extras["frac_shd_zero"] = key_mean(rep, "shd_zero");
    return extras;
}

}  // namespace

std::pair<double, double> mean_sd(const std::vector<double>& values) {
    if (values.empty()) return {std::nan(""), std::nan("")};
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    if (values.size() == 1) return {mean, 0.0};
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

ScenarioReport run_experiment(const ScenarioConfig& cfg) {
    cfg.validate();
    const Resolved r = resolve(cfg);

    ScenarioReport report;
    report.scenario = cfg.scenario;
    report.config = resolved_config_json(cfg, r);
    report.repeats.assign(static_cast<std::size_t>(r.repeats), {});
    report.wall_clock_sec.assign(static_cast<std::size_t>(r.repeats), 0.0);
    std::vector<std::string> repeat_errors(static_cast<std::size_t>(r.repeats));

    // Shared, seed-fixed structures (the "trained model" side of each design).
    std::vector<VariantSetup> variants;
    MeasurementModel hypothesis;
    std::vector<int> grid;
    ScmSpec scm;
    if (cfg.scenario == "linear-sim") {
        scm = linear_benchmark_scm();
        variants = {{"A", make_model_abc(Variant::A, derive_seed(cfg.seed, "model", 0), cfg.b_mix)},
                    {"B", make_model_abc(Variant::B, derive_seed(cfg.seed, "model", 1), cfg.b_mix)},
                    {"C", make_model_abc(Variant::C, derive_seed(cfg.seed, "model", 2), cfg.b_mix)}};
        hypothesis = exclusive_hypothesis(5);
        grid = {0, 1, 2};
    } else if (cfg.scenario == "nonlinear-sim") {
        scm = nonlinear_benchmark_scm(derive_seed(cfg.seed, "scm"));
        VariantModel exclusive = make_model_abc(Variant::A, derive_seed(cfg.seed, "model", 0));
        VariantModel mixed;
        mixed.model.n_latents = 5;
        {
            Rng rng(derive_seed(cfg.seed, "model", 1));
            MeasurementBlock blk;
            blk.parents = {0, 1};
            blk.dim = 1;
            blk.fn.kind = MeasurementKind::MonotoneDiffeo;
            DiffeoOutput d;
            d.a = rng.uniform(1.5, 2.5);
            d.b = rng.uniform(0.3, 0.7);
            d.c = rng.uniform(0.5, 1.5);
            d.combo = {1.0, cfg.mixed_coef};
            blk.fn.outputs = {d};
            mixed.model.blocks = {blk};
            mixed.effective_parents = {{0, 1}};
        }
        variants = {{"exclusive", std::move(exclusive)}, {"mixed", std::move(mixed)}};
        hypothesis = exclusive_hypothesis(5);
        grid = {0, 1, 2};
    } else if (cfg.scenario == "noisy") {
        scm = chain3_scm();
    }

    const auto t0 = std::chrono::steady_clock::now();
    parallel_for(static_cast<std::size_t>(r.repeats), r.threads, [&](std::size_t idx) {
        const auto rep_t0 = std::chrono::steady_clock::now();
        const std::uint64_t rep_seed =
            derive_seed(cfg.seed, "repeat", static_cast<std::uint64_t>(idx));
        try {
            if (cfg.scenario == "linear-sim") {
                report.repeats[idx] =
                    run_linear_repeat(scm, variants, hypothesis, grid, r, cfg.holm, rep_seed);
            } else if (cfg.scenario == "nonlinear-sim") {
                report.repeats[idx] =
                    run_nonlinear_repeat(scm, variants, hypothesis, grid, r, cfg.holm, rep_seed);
            } else if (cfg.scenario == "noisy") {
                report.repeats[idx] = run_noisy_repeat(scm, cfg.noise_scale, r, cfg.holm, rep_seed);
            } else if (cfg.scenario == "weak") {
                report.repeats[idx] = run_weak_repeat(r, cfg.holm, rep_seed);
            } else if (cfg.scenario == "scaling") {
                report.repeats[idx] =
                    run_scaling_repeat(cfg, r, cfg.holm, cfg.seed, static_cast<int>(idx));
            } else if (cfg.scenario == "shd-pitfall") {
                report.repeats[idx] = run_pitfall_repeat(r, rep_seed);
            } else if (cfg.scenario == "istant-synthetic") {
                report.repeats[idx] = run_istant_repeat(cfg, r, cfg.holm, rep_seed);
            }
        } catch (const std::exception& e) {
            repeat_errors[idx] = e.what();
        }
        report.wall_clock_sec[idx] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - rep_t0).count();
    });
    report.total_wall_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    for (std::size_t idx = 0; idx < repeat_errors.size(); ++idx)
        if (!repeat_errors[idx].empty())
            report.errors.push_back({static_cast<int>(idx), repeat_errors[idx]});
    report.aggregates = aggregate(report.repeats);

    if (cfg.scenario == "linear-sim") report.extras = linear_extras(report, cfg.alpha);
    if (cfg.scenario == "istant-synthetic") report.extras = istant_extras(report);
    if (cfg.scenario == "shd-pitfall") report.extras = pitfall_extras(report);

    if (!cfg.output_dir.empty()) {
        std::filesystem::create_directories(cfg.output_dir);
        write_json_file(scenario_report_to_json(report),
                        cfg.output_dir + "/report.json");
        write_repeats_csv(report, cfg.output_dir + "/repeats.csv");
    }
    return report;
}

ScenarioConfig scenario_config_from_json(const Json& j) {
    ScenarioConfig cfg;
    if (!j.contains("scenario")) throw ConfigError("config: missing key \"scenario\"");
    cfg.scenario = j.at("scenario").get<std::string>();
    if (j.contains("n_samples")) cfg.n_samples = j.at("n_samples").get<int>();
    if (j.contains("n_repeats")) cfg.n_repeats = j.at("n_repeats").get<int>();
    cfg.alpha = j.value("alpha", 0.05);
    if (j.contains("test")) cfg.test = citest_config_from_json(j.at("test"));
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.output_dir = j.value("output_dir", std::string{});
    cfg.holm = j.value("holm", false);
    cfg.threads = j.value("threads", 0);
    cfg.b_mix = j.value("b_mix", cfg.b_mix);
    cfg.mixed_coef = j.value("mixed_coef", cfg.mixed_coef);
    cfg.noise_scale = j.value("noise_scale", cfg.noise_scale);
    cfg.n_latents = j.value("n_latents", cfg.n_latents);
    cfg.n_dags = j.value("n_dags", cfg.n_dags);
    cfg.reps_per_dag = j.value("reps_per_dag", cfg.reps_per_dag);
    cfg.edge_prob = j.value("edge_prob", cfg.edge_prob);
    cfg.tau = j.value("tau", cfg.tau);
    cfg.leak = j.value("leak", cfg.leak);
    cfg.validate();
    return cfg;
}

Json scenario_report_to_json(const ScenarioReport& report) {
    Json repeats = Json::array();
    for (const auto& rec : report.repeats) {
        Json jr = Json::object();
        for (const auto& [k, v] : rec) jr[k] = v;
        repeats.push_back(std::move(jr));
    }
    Json aggregates = Json::object();
    for (const auto& [k, ms] : report.aggregates)
        aggregates[k] = Json{{"mean", ms.first}, {"sd", ms.second}};
    Json errors = Json::array();
    for (const auto& e : report.errors)
        errors.push_back(Json{{"repeat", e.repeat}, {"error", e.message}});
    return Json{{"scenario", report.scenario}, {"config", report.config},
                {"repeats", std::move(repeats)}, {"aggregates", std::move(aggregates)},
                {"errors", std::move(errors)},   {"extras", report.extras},
                {"wall_clock_sec", report.wall_clock_sec},
                {"total_wall_sec", report.total_wall_sec}};
}

ScenarioReport scenario_report_from_json(const Json& j) {
    ScenarioReport report;
    report.scenario = j.at("scenario").get<std::string>();
    report.config = j.value("config", Json::object());
    for (const auto& jr : j.at("repeats")) {
        Record rec;
        for (auto it = jr.begin(); it != jr.end(); ++it) rec[it.key()] = it.value().get<double>();
        report.repeats.push_back(std::move(rec));
    }
    for (auto it = j.at("aggregates").begin(); it != j.at("aggregates").end(); ++it)
        report.aggregates[it.key()] = {it.value().at("mean").get<double>(),
                                       it.value().at("sd").get<double>()};
    if (j.contains("errors"))
        for (const auto& je : j.at("errors"))
            report.errors.push_back({je.at("repeat").get<int>(), je.at("error").get<std::string>()});
    report.extras = j.value("extras", Json::object());
    if (j.contains("wall_clock_sec"))
        report.wall_clock_sec = j.at("wall_clock_sec").get<std::vector<double>>();
    report.total_wall_sec = j.value("total_wall_sec", 0.0);

    // Integrity: aggregates must match the per-repeat records.
    const auto recomputed = aggregate(report.repeats);
    if (recomputed.size() != report.aggregates.size())
        throw DataError("report integrity: aggregate key set does not match records");
    for (const auto& [k, ms] : recomputed) {
        const auto it = report.aggregates.find(k);
        if (it == report.aggregates.end())
            throw DataError("report integrity: missing aggregate for \"" + k + "\"");
        if (std::fabs(it->second.first - ms.first) > 1e-10 ||
            std::fabs(it->second.second - ms.second) > 1e-10)
            throw DataError("report integrity: aggregate mismatch for \"" + k + "\"");
    }
    return report;
}

std::string render_report_table(const ScenarioReport& report) {
    std::ostringstream out;
    out << "scenario: " << report.scenario << "\n";
    if (report.repeats.empty()) {
        out << "no repeats\n";
        return out.str();
    }
    // Pivot keys "prefix.suffix" into one row per prefix.
    std::set<std::string> prefixes, suffixes;
    std::set<std::string> plain;
    for (const auto& [k, v] : report.aggregates) {
        (void)v;
        const auto dot = k.find('.');
        if (dot == std::string::npos) {
            plain.insert(k);
        } else {
            prefixes.insert(k.substr(0, dot));
            suffixes.insert(k.substr(dot + 1));
        }
    }
    auto cell = [&](const std::string& key) -> std::string {
        const auto it = report.aggregates.find(key);
        if (it == report.aggregates.end()) return "";
        std::ostringstream c;
        c.setf(std::ios::fixed);
        c.precision(4);
        c << it->second.first << " +- " << it->second.second;
        return c.str();
    };
    const int w = 22;
    if (!prefixes.empty()) {
        out << std::string(8, ' ');
        for (const auto& s : suffixes) {
            std::string h = s;
            if (static_cast<int>(h.size()) > w - 2) h = h.substr(0, w - 2);
            out << h << std::string(std::max(1, w - static_cast<int>(h.size())), ' ');
        }
        out << "\n";
        for (const auto& p : prefixes) {
            out << p << std::string(std::max(1, 8 - static_cast<int>(p.size())), ' ');
            for (const auto& s : suffixes) {
                const std::string c = cell(p + "." + s);
                out << c << std::string(std::max(1, w - static_cast<int>(c.size())), ' ');
            }
            out << "\n";
        }
    }
    for (const auto& k : plain) out << k << ": " << cell(k) << "\n";
    if (!report.extras.empty()) out << "extras: " << report.extras.dump() << "\n";
    if (!report.errors.empty()) out << "errors: " << report.errors.size() << " repeat(s) failed\n";
    out << "repeats: " << report.repeats.size() << ", total wall: " << report.total_wall_sec
        << " s\n";
    return out.str();
}

}  // namespace tmex
