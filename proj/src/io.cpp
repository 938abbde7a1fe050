#include "tmex/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "tmex/errors.hpp"

namespace tmex {

namespace {

const Json& require(const Json& j, const char* key) {
    if (!j.contains(key)) throw DataError(std::string("missing key \"") + key + "\"");
    return j.at(key);
}

template <typename T>
T require_as(const Json& j, const char* key) {
    try {
        return require(j, key).get<T>();
    } catch (const Json::exception&) {
        throw DataError(std::string("key \"") + key + "\" has the wrong type");
    }
}

Json matrix_to_json(const Mat& m) {
    Json rows = Json::array();
    for (int i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Mat matrix_from_json(const Json& j, const char* key) {
    if (!j.is_array() || j.empty())
        throw DataError(std::string("key \"") + key + "\" must be a non-empty array of rows");
    const int rows = static_cast<int>(j.size());
    const int cols = static_cast<int>(j.at(0).size());
    Mat m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        const auto& row = j.at(r);
        if (static_cast<int>(row.size()) != cols)
            throw DataError(std::string("key \"") + key + "\" has ragged rows");
        for (int c = 0; c < cols; ++c) m(r, c) = row.at(c).get<double>();
    }
    return m;
}

Json int_matrix_to_json(const Eigen::MatrixXi& m) {
    Json rows = Json::array();
    for (int i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Json vec_to_json(const Vec& v) {
    Json a = Json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

Vec vec_from_json(const Json& j, const char* key) {
    if (!j.is_array()) throw DataError(std::string("key \"") + key + "\" must be an array");
    Vec v(static_cast<int>(j.size()));
    for (int i = 0; i < v.size(); ++i) v[i] = j.at(i).get<double>();
    return v;
}

NoiseFamily noise_family_from_string(const std::string& s) {
    if (s == "gaussian") return NoiseFamily::Gaussian;
    if (s == "uniform") return NoiseFamily::Uniform;
    if (s == "laplace") return NoiseFamily::Laplace;
    throw DataError("key \"family\" has unknown value \"" + s + "\"");
}

const char* noise_family_to_string(NoiseFamily f) {
    switch (f) {
        case NoiseFamily::Gaussian: return "gaussian";
        case NoiseFamily::Uniform: return "uniform";
        case NoiseFamily::Laplace: return "laplace";
    }
    return "gaussian";
}

Json noise_to_json(const NoiseSpec& n) {
    return Json{{"family", noise_family_to_string(n.family)}, {"scale", n.scale}, {"shift", n.shift}};
}

NoiseSpec noise_from_json(const Json& j) {
    NoiseSpec n;
    n.family = noise_family_from_string(require_as<std::string>(j, "family"));
    n.scale = require_as<double>(j, "scale");
    n.shift = j.value("shift", 0.0);
    return n;
}

Json features_to_json(const RandomFeatures& rf) {
    return Json{{"w", matrix_to_json(rf.weights)},
                {"b", vec_to_json(rf.biases)},
                {"w_out", vec_to_json(rf.out_weights)}};
}

RandomFeatures features_from_json(const Json& j) {
    RandomFeatures rf;
    rf.weights = require(j, "w").empty() ? Mat(0, 0) : matrix_from_json(require(j, "w"), "w");
    rf.biases = vec_from_json(require(j, "b"), "b");
    rf.out_weights = vec_from_json(require(j, "w_out"), "w_out");
    return rf;
}

Json fn_to_json(const MeasurementFn& fn) {
    Json j;
    switch (fn.kind) {
        case MeasurementKind::Identity:
            j["kind"] = "identity";
            break;
        case MeasurementKind::LinearMix:
            j["kind"] = "linear_mix";
            j["matrix"] = matrix_to_json(fn.linear_mix);
            break;
        case MeasurementKind::MonotoneDiffeo: {
            j["kind"] = "monotone_diffeo";
            Json outs = Json::array();
            for (const auto& o : fn.outputs) {
                Json jo{{"a", o.a}, {"b", o.b}, {"c", o.c}};
                if (!o.combo.empty()) jo["combo"] = o.combo;
                outs.push_back(std::move(jo));
            }
            j["outputs"] = std::move(outs);
            break;
        }
        case MeasurementKind::Composed: {
            j["kind"] = "composed";
            Json stages = Json::array();
            for (const auto& s : fn.stages) stages.push_back(fn_to_json(s));
            j["fns"] = std::move(stages);
            break;
        }
    }
    if (fn.noise_scale != 0.0) j["noise_scale"] = fn.noise_scale;
    return j;
}

MeasurementFn fn_from_json(const Json& j) {
    MeasurementFn fn;
    const std::string kind = require_as<std::string>(j, "kind");
    if (kind == "identity") {
        fn.kind = MeasurementKind::Identity;
    } else if (kind == "linear_mix") {
        fn.kind = MeasurementKind::LinearMix;
        fn.linear_mix = matrix_from_json(require(j, "matrix"), "matrix");
    } else if (kind == "monotone_diffeo") {
        fn.kind = MeasurementKind::MonotoneDiffeo;
        for (const auto& jo : require(j, "outputs")) {
            DiffeoOutput o;
            o.a = require_as<double>(jo, "a");
            o.b = require_as<double>(jo, "b");
            o.c = require_as<double>(jo, "c");
            if (jo.contains("combo")) o.combo = jo.at("combo").get<std::vector<double>>();
            fn.outputs.push_back(std::move(o));
        }
    } else if (kind == "composed") {
        fn.kind = MeasurementKind::Composed;
        for (const auto& js : require(j, "fns")) fn.stages.push_back(fn_from_json(js));
    } else {
        throw DataError("key \"kind\" has unknown value \"" + kind + "\"");
    }
    fn.noise_scale = j.value("noise_scale", 0.0);
    return fn;
}

}  // namespace

Json dag_to_json(const Dag& dag) {
    Json edges = Json::array();
    for (const auto& [p, c] : dag.edges) edges.push_back(Json::array({p, c}));
    return Json{{"n_nodes", dag.n_nodes}, {"edges", std::move(edges)}};
}

Dag dag_from_json(const Json& j) {
    Dag dag;
    dag.n_nodes = require_as<int>(j, "n_nodes");
    for (const auto& e : require(j, "edges")) {
        if (!e.is_array() || e.size() != 2) throw DataError("key \"edges\" must hold [p, c] pairs");
        dag.add_edge(e.at(0).get<int>(), e.at(1).get<int>());
    }
    dag.validate();
    return dag;
}

Json scm_to_json(const ScmSpec& spec) {
    Json j = dag_to_json(spec.dag);
    Json mechanisms = Json::array();
    for (const auto& m : spec.mechanisms) {
        Json jm;
        if (m.kind == MechanismKind::Linear) {
            jm["kind"] = "linear";
            jm["weights"] = m.linear_weights;
        } else {
            jm["kind"] = "location_scale";
            jm["location"] = features_to_json(m.location);
            jm["scale"] = features_to_json(m.scale_raw);
        }
        jm["noise"] = noise_to_json(m.noise);
        mechanisms.push_back(std::move(jm));
    }
    j["mechanisms"] = std::move(mechanisms);
    j["observed"] = spec.observed;
    return j;
}

ScmSpec scm_from_json(const Json& j) {
    ScmSpec spec;
    spec.dag = dag_from_json(j);
    for (const auto& jm : require(j, "mechanisms")) {
        Mechanism m;
        const std::string kind = require_as<std::string>(jm, "kind");
        if (kind == "linear") {
            m.kind = MechanismKind::Linear;
            m.linear_weights = require(jm, "weights").get<std::vector<double>>();
        } else if (kind == "location_scale") {
            m.kind = MechanismKind::LocationScale;
            m.location = features_from_json(require(jm, "location"));
            m.scale_raw = features_from_json(require(jm, "scale"));
        } else {
            throw DataError("key \"kind\" has unknown value \"" + kind + "\"");
        }
        m.noise = noise_from_json(require(jm, "noise"));
        spec.mechanisms.push_back(std::move(m));
    }
    spec.observed = require(j, "observed").get<std::vector<bool>>();
    spec.validate();
    return spec;
}

Json measurement_model_to_json(const MeasurementModel& model) {
    Json blocks = Json::array();
    for (const auto& b : model.blocks) {
        blocks.push_back(Json{{"parents", std::vector<int>(b.parents.begin(), b.parents.end())},
                              {"dim", b.dim},
                              {"fn", fn_to_json(b.fn)}});
    }
    return Json{{"n_latents", model.n_latents}, {"blocks", std::move(blocks)}};
}

MeasurementModel measurement_model_from_json(const Json& j) {
    MeasurementModel model;
    model.n_latents = require_as<int>(j, "n_latents");
    for (const auto& jb : require(j, "blocks")) {
        MeasurementBlock b;
        for (int p : require(jb, "parents").get<std::vector<int>>()) b.parents.insert(p);
        b.dim = require_as<int>(jb, "dim");
        b.fn = fn_from_json(require(jb, "fn"));
        model.blocks.push_back(std::move(b));
    }
    model.validate();
    return model;
}

Json regressor_to_json(const RegressorSpec& spec) {
    if (spec.kind == RegressorKind::Ols)
        return Json{{"kind", "ols"}, {"lambda", spec.ols_lambda}, {"intercept", spec.intercept}};
    Json j{{"kind", "kernel_ridge"}, {"lambda", spec.kr_lambda}};
    if (spec.kr_median_bandwidth)
        j["bandwidth"] = "median";
    else
        j["bandwidth"] = spec.kr_bandwidth;
    return j;
}

RegressorSpec regressor_from_json(const Json& j) {
    RegressorSpec spec;
    const std::string kind = require_as<std::string>(j, "kind");
    if (kind == "ols") {
        spec.kind = RegressorKind::Ols;
        spec.ols_lambda = j.value("lambda", 1e-8);
        spec.intercept = j.value("intercept", true);
    } else if (kind == "kernel_ridge") {
        spec.kind = RegressorKind::KernelRidge;
        spec.kr_lambda = j.value("lambda", 1e-3);
        if (j.contains("bandwidth") && j.at("bandwidth").is_number()) {
            spec.kr_median_bandwidth = false;
            spec.kr_bandwidth = j.at("bandwidth").get<double>();
        } else {
            spec.kr_median_bandwidth = true;
        }
    } else {
        throw DataError("key \"kind\" has unknown value \"" + kind + "\"");
    }
    spec.validate();
    return spec;
}

Json citest_config_to_json(const CiTestConfig& cfg) {
    return Json{{"test", cfg.test == CiTestKind::Gcm ? "gcm" : "pcm"},
                {"regressor", regressor_to_json(cfg.regressor)},
                {"alpha", cfg.alpha},
                {"seed", cfg.seed},
                {"pcm_split_fraction", cfg.pcm_split_fraction},
                {"cv_folds", cfg.cv_folds}};
}

CiTestConfig citest_config_from_json(const Json& j) {
    CiTestConfig cfg;
    const std::string test = require_as<std::string>(j, "test");
    if (test == "gcm")
        cfg.test = CiTestKind::Gcm;
    else if (test == "pcm")
        cfg.test = CiTestKind::Pcm;
    else
        throw DataError("key \"test\" has unknown value \"" + test + "\"");
    if (j.contains("regressor")) cfg.regressor = regressor_from_json(j.at("regressor"));
    cfg.alpha = j.value("alpha", 0.05);
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.pcm_split_fraction = j.value("pcm_split_fraction", 0.5);
    cfg.cv_folds = j.value("cv_folds", 2);
    cfg.validate();
    return cfg;
}

Json tmex_report_to_json(const TmexReport& report) {
    Json degenerate = Json::array();
    for (const auto& [i, j] : report.degenerate_cells) degenerate.push_back(Json::array({i, j}));
    return Json{{"latents", report.latents},
                {"V", int_matrix_to_json(report.V)},
                {"W_hat", int_matrix_to_json(report.W_hat)},
                {"p_values", matrix_to_json(report.p_values)},
                {"score", report.score},
                {"alpha", report.alpha},
                {"holm", report.holm},
                {"bound", report.bound},
                {"beta_for_bound", report.beta_for_bound},
                {"config_fingerprint", report.config_fingerprint},
                {"degenerate_cells", std::move(degenerate)}};
}

Json ate_result_to_json(const AteResult& result) {
    return Json{{"estimate", result.estimate},
                {"std_error", result.std_error},
                {"method", result.method},
                {"n", result.n}};
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_dataset_csv(const PairedDataset& ds, const std::string& path) {
    ds.validate();
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    const int N = ds.n_latents();
    for (int i = 0; i < N; ++i) out << (i ? "," : "") << "z" << (i + 1);
    for (int j = 0; j < ds.n_blocks(); ++j)
        for (int k = 0; k < ds.block_dim(j); ++k) out << ",zhat_" << (j + 1) << "_" << (k + 1);
    out << "\n";
    for (int r = 0; r < ds.n_rows(); ++r) {
        for (int i = 0; i < N; ++i) out << (i ? "," : "") << format_double(ds.z(r, i));
        for (int c = 0; c < ds.zhat.cols(); ++c) out << "," << format_double(ds.zhat(r, c));
        out << "\n";
    }
}

PairedDataset read_dataset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty file");

    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header.push_back(cell);
    }
    int n_z = 0;
    while (n_z < static_cast<int>(header.size()) && header[n_z] == "z" + std::to_string(n_z + 1))
        ++n_z;
    if (n_z == 0) throw DataError(path + ": header must start with z1,z2,...");

    std::vector<int> block_sizes;
    int current_block = 0;
    for (int c = n_z; c < static_cast<int>(header.size()); ++c) {
        int j = 0, k = 0;
        if (std::sscanf(header[c].c_str(), "zhat_%d_%d", &j, &k) != 2)
            throw DataError(path + ": bad zhat column \"" + header[c] + "\"");
        if (j == current_block + 1) {
            block_sizes.push_back(0);
            ++current_block;
        }
        if (j != current_block || k != block_sizes.back() + 1)
            throw DataError(path + ": zhat columns out of order at \"" + header[c] + "\"");
        ++block_sizes.back();
    }
    if (block_sizes.empty()) throw DataError(path + ": no zhat columns");
    std::vector<int> offsets{0};
    for (int s : block_sizes) offsets.push_back(offsets.back() + s);

    std::vector<std::vector<double>> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (...) {
                throw DataError(path + ":" + std::to_string(line_no) + ": bad number \"" + cell + "\"");
            }
        }
        if (row.size() != header.size())
            throw DataError(path + ":" + std::to_string(line_no) + ": wrong column count");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DataError(path + ": no data rows");

    PairedDataset ds;
    const int n = static_cast<int>(rows.size());
    ds.z.resize(n, n_z);
    ds.zhat.resize(n, static_cast<int>(header.size()) - n_z);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n_z; ++c) ds.z(r, c) = rows[r][c];
        for (int c = n_z; c < static_cast<int>(header.size()); ++c)
            ds.zhat(r, c - n_z) = rows[r][c];
    }
    ds.block_offsets = offsets;
    ds.validate();
    return ds;
}

void write_pvalue_csv(const TmexReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << "latent";
    for (int j = 0; j < report.p_values.cols(); ++j) out << ",A" << (j + 1);
    out << "\n";
    for (int r = 0; r < report.p_values.rows(); ++r) {
        out << "z" << (report.latents[r] + 1);
        for (int j = 0; j < report.p_values.cols(); ++j)
            out << "," << format_double(report.p_values(r, j));
        out << "\n";
    }
}

Json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open: " + path);
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw DataError(path + ": " + e.what());
    }
}

void write_json_file(const Json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << j.dump(2) << "\n";
}

void write_text_file(const std::string& text, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << text;
}

}  // namespace tmex
