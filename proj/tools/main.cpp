#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "tmex/calibration.hpp"
#include "tmex/causal.hpp"
#include "tmex/errors.hpp"
#include "tmex/io.hpp"
#include "tmex/metrics.hpp"
#include "tmex/scenarios.hpp"

namespace {

using namespace tmex;

int column_index(const PairedDataset& ds, const std::string& name,
                 std::vector<std::string>* all_names = nullptr) {
    std::vector<std::string> names;
    for (int i = 0; i < ds.n_latents(); ++i) names.push_back("z" + std::to_string(i + 1));
    for (int j = 0; j < ds.n_blocks(); ++j)
        for (int k = 0; k < ds.block_dim(j); ++k)
            names.push_back("zhat_" + std::to_string(j + 1) + "_" + std::to_string(k + 1));
    if (all_names) *all_names = names;
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return static_cast<int>(i);
    throw DataError("unknown column \"" + name + "\"");
}

Vec column_values(const PairedDataset& ds, int idx) {
    const int nz = ds.n_latents();
    return idx < nz ? Vec(ds.z.col(idx)) : Vec(ds.zhat.col(idx - nz));
}

int cmd_simulate(const std::string& scm_path, const std::string& model_path, int n,
                 std::uint64_t seed, const std::string& out) {
    const ScmSpec scm = scm_from_json(load_json_file(scm_path));
    const MeasurementModel model = measurement_model_from_json(load_json_file(model_path));
    const Mat z = sample_scm(scm, n, seed);
    const PairedDataset ds = apply_measurements(model, z, derive_seed(seed, "meas"));
    write_dataset_csv(ds, out);
    std::cout << "wrote " << out << ": " << ds.n_rows() << " rows, " << ds.n_latents()
              << " causal columns, " << ds.zhat.cols() << " measurement columns in "
              << ds.n_blocks() << " block(s)\n";
    return 0;
}

int cmd_tmex(const std::string& data_path, const std::string& model_path,
             const std::string& test_path, bool holm, const std::string& out,
             const std::string& pvals_out) {
    const PairedDataset ds = read_dataset_csv(data_path);
    const MeasurementModel model = measurement_model_from_json(load_json_file(model_path));
    CiTestConfig cfg;
    if (!test_path.empty()) cfg = citest_config_from_json(load_json_file(test_path));
    const TmexReport report = tmex_from_data(ds, model, cfg, holm);
    const Json j = tmex_report_to_json(report);
    if (out.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        write_json_file(j, out);
        std::cout << "wrote " << out << " (score " << report.score << ")\n";
    }
    if (!pvals_out.empty()) write_pvalue_csv(report, pvals_out);
    return 0;
}

int cmd_metrics(const std::string& data_path, const std::vector<std::string>& which,
                const std::string& graph1, const std::string& graph2, std::uint64_t seed) {
    Json out;
    for (const auto& metric : which) {
        if (metric == "r2") {
            const PairedDataset ds = read_dataset_csv(data_path);
            RegressorSpec ols;
            Json per = Json::object();
            for (int i = 0; i < ds.n_latents(); ++i)
                per["z" + std::to_string(i + 1)] =
                    r2_score(ds.z.col(i), ds.zhat, ols, 5, derive_seed(seed, "r2", i));
            out["r2"] = per;
        } else if (metric == "mcc") {
            const PairedDataset ds = read_dataset_csv(data_path);
            const MccResult m = mcc(ds.z, ds.zhat, CorrMode::Spearman);
            out["mcc"] = Json{{"score", m.score}, {"permutation", m.permutation}};
        } else if (metric == "shd") {
            if (graph1.empty() || graph2.empty())
                throw ConfigError("metrics: shd needs --graph and --graph2");
            const Dag g1 = dag_from_json(load_json_file(graph1));
            const Dag g2 = dag_from_json(load_json_file(graph2));
            out["shd"] = shd(g1, g2);
        } else {
            throw ConfigError("metrics: unknown metric \"" + metric + "\"");
        }
    }
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_ate(const std::string& data_path, const std::string& method, const std::string& t_col,
            const std::string& y_col, const std::vector<std::string>& w_cols,
            const std::string& i_col, double propensity, const std::string& regressor_kind,
            int folds, std::uint64_t seed) {
    const PairedDataset ds = read_dataset_csv(data_path);
    const Vec t = column_values(ds, column_index(ds, t_col));
    const Vec y = column_values(ds, column_index(ds, y_col));
    Mat w(ds.n_rows(), static_cast<int>(w_cols.size()));
    for (std::size_t c = 0; c < w_cols.size(); ++c)
        w.col(static_cast<int>(c)) = column_values(ds, column_index(ds, w_cols[c]));

    RegressorSpec reg;
    if (regressor_kind == "kernel_ridge") reg.kind = RegressorKind::KernelRidge;

    AteResult res;
    if (method == "linear") {
        res = ate_linear_adjust(t, y, w);
    } else if (method == "partial") {
        res = ate_partially_linear(t, y, w, reg, folds, seed);
    } else if (method == "aipw") {
        res = ate_aipw(t, y, w, propensity, reg, folds, seed);
    } else if (method == "iv") {
        if (i_col.empty()) throw ConfigError("ate: --instrument is required for method iv");
        res = ate_iv(t, y, column_values(ds, column_index(ds, i_col)));
    } else {
        throw ConfigError("ate: unknown method \"" + method + "\"");
    }
    std::cout << ate_result_to_json(res).dump(2) << "\n";
    return 0;
}

int cmd_experiment(const std::string& config_path, std::uint64_t seed_override, bool has_seed,
                   const std::string& out_override, int threads, double alpha, bool has_alpha,
                   bool holm) {
    ScenarioConfig cfg = scenario_config_from_json(load_json_file(config_path));
    if (has_seed) cfg.seed = seed_override;
    if (!out_override.empty()) cfg.output_dir = out_override;
    if (threads > 0) cfg.threads = threads;
    if (has_alpha) cfg.alpha = alpha;
    if (holm) cfg.holm = true;
    const ScenarioReport report = run_experiment(cfg);
    if (cfg.output_dir.empty())
        std::cout << scenario_report_to_json(report).dump(2) << "\n";
    else
        std::cout << render_report_table(report);
    if (!report.errors.empty()) {
        std::cerr << report.errors.size() << " repeat(s) failed; see report\n";
    }
    return 0;
}

int cmd_report(const std::string& report_path) {
    const ScenarioReport report = scenario_report_from_json(load_json_file(report_path));
    std::cout << render_report_table(report);
    return 0;
}

int cmd_calibrate(const std::vector<std::string>& suite, double budget, const std::string& out) {
    CalibrationOptions opt;
    if (budget > 0.0) {
        opt.budget_seconds = budget;
        opt.ci_mode = false;
    }
    const CalibrationLedger ledger = run_calibration(suite, opt);
    const Json j = ledger.to_json();
    if (out.empty())
        std::cout << j.dump(2) << "\n";
    else
        write_json_file(j, out);
    return ledger.all_passed() ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"measurement-model evaluation toolkit for causal representations"};
    app.require_subcommand(1);

    std::string scm_path, model_path, data_path, test_path, out, pvals_out;
    std::string graph1, graph2, config_path, report_path;
    std::string method = "linear", t_col, y_col, i_col, regressor_kind = "ols";
    std::vector<std::string> w_cols, which{"r2", "mcc"}, suite;
    int n = 4096, folds = 2, threads = 0;
    std::uint64_t seed = 0;
    double propensity = 0.5, alpha = 0.05, budget = 0.0;
    bool holm = false;

    auto* simulate = app.add_subcommand("simulate", "sample an SCM and apply measurements");
    simulate->add_option("--scm", scm_path, "SCM spec JSON")->required();
    simulate->add_option("--model", model_path, "measurement model JSON")->required();
    simulate->add_option("--n", n, "number of rows");
    simulate->add_option("--seed", seed, "random seed");
    simulate->add_option("--out", out, "output CSV")->required();

    auto* tmex_cmd = app.add_subcommand("tmex", "exclusivity score from a paired dataset");
    tmex_cmd->add_option("--data", data_path, "paired dataset CSV")->required();
    tmex_cmd->add_option("--model", model_path, "hypothesized measurement model JSON")->required();
    tmex_cmd->add_option("--test", test_path, "CI test config JSON");
    tmex_cmd->add_flag("--holm", holm, "Holm adjustment before thresholding");
    tmex_cmd->add_option("--out", out, "report JSON path (stdout if omitted)");
    tmex_cmd->add_option("--pvals-out", pvals_out, "p-value matrix CSV path");

    auto* metrics_cmd = app.add_subcommand("metrics", "baseline metrics on a paired dataset");
    metrics_cmd->add_option("--data", data_path, "paired dataset CSV");
    metrics_cmd->add_option("--which", which, "subset of {r2, mcc, shd}");
    metrics_cmd->add_option("--graph", graph1, "first DAG JSON (shd)");
    metrics_cmd->add_option("--graph2", graph2, "second DAG JSON (shd)");
    metrics_cmd->add_option("--seed", seed, "random seed");

    auto* ate_cmd = app.add_subcommand("ate", "treatment-effect estimate from a dataset");
    ate_cmd->add_option("--data", data_path, "paired dataset CSV")->required();
    ate_cmd->add_option("--method", method, "linear | partial | aipw | iv");
    ate_cmd->add_option("--treatment", t_col, "treatment column")->required();
    ate_cmd->add_option("--outcome", y_col, "outcome column")->required();
    ate_cmd->add_option("--adjust", w_cols, "adjustment columns");
    ate_cmd->add_option("--instrument", i_col, "instrument column (iv)");
    ate_cmd->add_option("--propensity", propensity, "known propensity (aipw)");
    ate_cmd->add_option("--regressor", regressor_kind, "ols | kernel_ridge");
    ate_cmd->add_option("--folds", folds, "cross-fitting folds");
    ate_cmd->add_option("--seed", seed, "random seed");

    auto* experiment = app.add_subcommand("experiment", "run a canned scenario");
    experiment->add_option("--config", config_path, "scenario config JSON")->required();
    auto* seed_opt = experiment->add_option("--seed", seed, "override config seed");
    experiment->add_option("--out", out, "override output directory");
    experiment->add_option("--threads", threads, "worker threads");
    auto* alpha_opt = experiment->add_option("--alpha", alpha, "override significance level");
    experiment->add_flag("--holm", holm, "enable Holm adjustment");

    auto* report_cmd = app.add_subcommand("report", "print a report as a table");
    report_cmd->add_option("--report", report_path, "scenario report JSON")->required();

    auto* calibrate = app.add_subcommand("calibrate", "Monte-Carlo calibration ledger");
    calibrate->add_option("--suite", suite, "subset of checks (default all)");
    calibrate->add_option("--budget", budget, "max seconds (disables fixed-iteration mode)");
    calibrate->add_option("--out", out, "ledger JSON path (stdout if omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(scm_path, model_path, n, seed, out);
        if (tmex_cmd->parsed()) return cmd_tmex(data_path, model_path, test_path, holm, out, pvals_out);
        if (metrics_cmd->parsed()) return cmd_metrics(data_path, which, graph1, graph2, seed);
        if (ate_cmd->parsed())
            return cmd_ate(data_path, method, t_col, y_col, w_cols, i_col, propensity,
                           regressor_kind, folds, seed);
        if (experiment->parsed())
            return cmd_experiment(config_path, seed, seed_opt->count() > 0, out, threads, alpha,
                                  alpha_opt->count() > 0, holm);
        if (report_cmd->parsed()) return cmd_report(report_path);
        if (calibrate->parsed()) return cmd_calibrate(suite, budget, out);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.category()) {
            case ErrorCategory::Config: return 2;
            case ErrorCategory::Data: return 3;
            case ErrorCategory::Numeric: return 4;
        }
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
