#include "tmex/scm.hpp"

#include <algorithm>
#include <string>

#include "tmex/errors.hpp"

namespace tmex {

std::vector<int> Dag::parents_of(int node) const {
    std::vector<int> result;
    for (const auto& [p, c] : edges)
        if (c == node) result.push_back(p);
    std::sort(result.begin(), result.end());
    return result;
}

void Dag::validate() const {
    if (n_nodes <= 0) throw DataError("Dag: n_nodes must be positive");
    for (const auto& [p, c] : edges) {
        if (p < 0 || p >= n_nodes || c < 0 || c >= n_nodes)
            throw DataError("Dag: edge index out of range: (" + std::to_string(p) + "," +
                            std::to_string(c) + ")");
        if (p == c) throw DataError("Dag: self-loop at node " + std::to_string(p));
    }
    topological_order(*this);  // throws CycleError if cyclic
}

std::vector<int> topological_order(const Dag& dag) {
    const int n = dag.n_nodes;
    std::vector<int> in_degree(n, 0);
    for (const auto& [p, c] : dag.edges) {
        (void)p;
        ++in_degree[c];
    }
    std::vector<bool> placed(n, false);
    std::vector<int> order;
    order.reserve(n);
    // Kahn's algorithm; scanning ascending gives the lowest-index tie-break.
    for (int step = 0; step < n; ++step) {
        int chosen = -1;
        for (int v = 0; v < n; ++v) {
            if (!placed[v] && in_degree[v] == 0) {
                chosen = v;
                break;
            }
        }
        if (chosen < 0) throw CycleError("topological_order: graph contains a cycle");
        placed[chosen] = true;
        order.push_back(chosen);
        for (const auto& [p, c] : dag.edges)
            if (p == chosen) --in_degree[c];
    }
    return order;
}

double NoiseSpec::sample(Rng& rng) const {
    switch (family) {
        case NoiseFamily::Gaussian:
            return shift + scale * rng.normal();
        case NoiseFamily::Uniform: {
            const double half = scale * std::sqrt(3.0);
            return shift + rng.uniform(-half, half);
        }
        case NoiseFamily::Laplace:
            return shift + scale * rng.laplace_unit();
    }
    return shift;
}

void NoiseSpec::validate() const {
    if (!(scale > 0.0)) throw DataError("NoiseSpec: scale must be positive");
    if (!std::isfinite(scale) || !std::isfinite(shift))
        throw DataError("NoiseSpec: non-finite parameter");
}

double RandomFeatures::value(const Eigen::Ref<const Vec>& inputs) const {
    if (weights.rows() == 0) return 0.0;
    Vec act = biases;
    if (weights.cols() > 0) act.noalias() += weights * inputs;
    return out_weights.dot(act.array().tanh().matrix());
}

RandomFeatures RandomFeatures::draw(int n_inputs, int n_features, Rng& rng) {
    RandomFeatures rf;
    rf.weights.resize(n_features, n_inputs);
    rf.biases.resize(n_features);
    rf.out_weights.resize(n_features);
    for (int k = 0; k < n_features; ++k) {
        for (int j = 0; j < n_inputs; ++j) rf.weights(k, j) = rng.normal();
        rf.biases(k) = rng.normal();
        rf.out_weights(k) = rng.normal() / std::sqrt(static_cast<double>(n_features));
    }
    return rf;
}

double Mechanism::conditional_scale(const Eigen::Ref<const Vec>& parent_values) const {
    if (kind == MechanismKind::Linear) return noise.scale;
    return softplus(scale_raw.value(parent_values)) + kScaleFloor;
}

double Mechanism::evaluate(const Eigen::Ref<const Vec>& parent_values, double noise_draw) const {
    if (kind == MechanismKind::Linear) {
        if (static_cast<int>(linear_weights.size()) != parent_values.size())
            throw ArityError("Mechanism: weight count does not match parent count");
        double v = noise_draw;
        for (int j = 0; j < parent_values.size(); ++j) v += linear_weights[j] * parent_values[j];
        return v;
    }
    // Location-scale: the configured noise supplies the standardized draw.
    return location.value(parent_values) +
           (softplus(scale_raw.value(parent_values)) + kScaleFloor) * noise_draw;
}

void ScmSpec::validate() const {
    dag.validate();
    if (static_cast<int>(mechanisms.size()) != dag.n_nodes)
        throw DataError("ScmSpec: mechanisms length must equal n_nodes");
    if (static_cast<int>(observed.size()) != dag.n_nodes)
        throw DataError("ScmSpec: observed length must equal n_nodes");
    for (int v = 0; v < dag.n_nodes; ++v) {
        const auto parents = dag.parents_of(v);
        const Mechanism& m = mechanisms[v];
        m.noise.validate();
        if (m.kind == MechanismKind::Linear) {
            if (m.linear_weights.size() != parents.size())
                throw DataError("ScmSpec: node " + std::to_string(v) +
                                " weight count != in-degree");
        } else {
            if (m.location.weights.cols() != static_cast<int>(parents.size()) ||
                m.scale_raw.weights.cols() != static_cast<int>(parents.size()))
                throw DataError("ScmSpec: node " + std::to_string(v) +
                                " feature arity != in-degree");
        }
    }
}

Mat sample_scm(const ScmSpec& spec, int n, std::uint64_t seed,
               const std::optional<Mat>& noise_override) {
    spec.validate();
    if (n < 1) throw DataError("sample_scm: n must be >= 1");
    const int N = spec.dag.n_nodes;
    if (noise_override && (noise_override->rows() != n || noise_override->cols() != N))
        throw ShapeError("sample_scm: noise override must be n x n_nodes");

    // Per-node noise, drawn up front from per-node streams.
    Mat noise(n, N);
    if (noise_override) {
        noise = *noise_override;
    } else {
        for (int v = 0; v < N; ++v) {
            Rng rng(derive_seed(seed, "node", static_cast<std::uint64_t>(v)));
            if (spec.mechanisms[v].kind == MechanismKind::Linear) {
                for (int k = 0; k < n; ++k) noise(k, v) = spec.mechanisms[v].noise.sample(rng);
            } else {
                // Standardized draw; the mechanism applies its own scale.
                NoiseSpec unit = spec.mechanisms[v].noise;
                unit.scale = 1.0;
                unit.shift = 0.0;
                for (int k = 0; k < n; ++k) noise(k, v) = unit.sample(rng);
            }
        }
    }

    const std::vector<int> order = topological_order(spec.dag);
    std::vector<std::vector<int>> parents(N);
    for (int v = 0; v < N; ++v) parents[v] = spec.dag.parents_of(v);

    Mat z(n, N);
    Vec pa_buf;
    for (int v : order) {
        const auto& pa = parents[v];
        pa_buf.resize(static_cast<int>(pa.size()));
        for (int k = 0; k < n; ++k) {
            for (std::size_t j = 0; j < pa.size(); ++j) pa_buf[static_cast<int>(j)] = z(k, pa[j]);
            z(k, v) = spec.mechanisms[v].evaluate(pa_buf, noise(k, v));
        }
    }
    return z;
}

Dag random_dag(int n_nodes, double edge_prob, std::uint64_t seed) {
    if (edge_prob < 0.0 || edge_prob > 1.0)
        throw ConfigError("random_dag: edge_prob must be in [0,1]");
    Dag dag;
    dag.n_nodes = n_nodes;
    Rng rng(derive_seed(seed, "dag"));
    for (int p = 0; p < n_nodes; ++p)
        for (int c = p + 1; c < n_nodes; ++c)
            if (rng.uniform01() < edge_prob) dag.add_edge(p, c);
    return dag;
}

ScmSpec random_scm(const Dag& dag, const RandomScmOptions& opt, std::uint64_t seed) {
    dag.validate();
    if (opt.coef_lo > opt.coef_hi || opt.coef_lo < 0.0)
        throw ConfigError("random_scm: invalid coefficient range");
    if (opt.noise_lo > opt.noise_hi || opt.noise_lo <= 0.0)
        throw ConfigError("random_scm: invalid noise range");

    ScmSpec spec;
    spec.dag = dag;
    spec.observed.assign(dag.n_nodes, false);
    spec.mechanisms.resize(dag.n_nodes);
    for (int v = 0; v < dag.n_nodes; ++v) {
        Rng rng(derive_seed(seed, "mech", static_cast<std::uint64_t>(v)));
        const int in_degree = static_cast<int>(dag.parents_of(v).size());
        Mechanism& m = spec.mechanisms[v];
        m.noise.family = opt.noise_family;
        m.noise.scale = rng.uniform(opt.noise_lo, opt.noise_hi);
        if (opt.kind == MechanismKind::Linear) {
            m.kind = MechanismKind::Linear;
            m.linear_weights.resize(in_degree);
            for (int j = 0; j < in_degree; ++j) {
                double w = rng.uniform(opt.coef_lo, opt.coef_hi);
                if (opt.random_sign && rng.bernoulli(0.5)) w = -w;
                m.linear_weights[j] = w;
            }
        } else {
            m.kind = MechanismKind::LocationScale;
            m.location = RandomFeatures::draw(in_degree, opt.n_features, rng);
            m.scale_raw = RandomFeatures::draw(in_degree, opt.n_features, rng);
        }
    }
    return spec;
}

}  // namespace tmex
