#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "tmex/rng.hpp"

namespace tmex {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Directed acyclic graph over latent causal variables. Edges are
// (parent, child) index pairs.
struct Dag {
    int n_nodes = 0;
    std::set<std::pair<int, int>> edges;

    void add_edge(int parent, int child) { edges.insert({parent, child}); }
    bool has_edge(int parent, int child) const { return edges.count({parent, child}) > 0; }
    std::vector<int> parents_of(int node) const;
    // Throws DataError on out-of-range indices or self-loops.
    void validate() const;
};

// Every parent precedes its children; ties broken by ascending node index.
// Throws CycleError when no order exists.
std::vector<int> topological_order(const Dag& dag);

enum class NoiseFamily { Gaussian, Uniform, Laplace };

// `scale` is the standard deviation for every family (uniform noise is drawn
// on [shift - scale*sqrt(3), shift + scale*sqrt(3)]).
struct NoiseSpec {
    NoiseFamily family = NoiseFamily::Gaussian;
    double scale = 1.0;
    double shift = 0.0;

    double sample(Rng& rng) const;
    void validate() const;
};

// Random tanh-feature expansion: value(p) = sum_k w_out[k] * tanh(w[k].p + b[k]).
struct RandomFeatures {
    Mat weights;      // n_features x n_inputs
    Vec biases;       // n_features
    Vec out_weights;  // n_features

    double value(const Eigen::Ref<const Vec>& inputs) const;
    static RandomFeatures draw(int n_inputs, int n_features, Rng& rng);
};

enum class MechanismKind { Linear, LocationScale };

inline double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }

struct Mechanism {
    MechanismKind kind = MechanismKind::Linear;
    // Linear: one weight per parent, in ascending-parent order.
    std::vector<double> linear_weights;
    // Location-scale: Z = location(pa) + (softplus(scale_raw(pa)) + 0.1) * eps.
    RandomFeatures location;
    RandomFeatures scale_raw;
    NoiseSpec noise;

    static constexpr double kScaleFloor = 0.1;

    double conditional_scale(const Eigen::Ref<const Vec>& parent_values) const;
    double evaluate(const Eigen::Ref<const Vec>& parent_values, double noise_draw) const;
};

struct ScmSpec {
    Dag dag;
    std::vector<Mechanism> mechanisms;  // one per node, in node-index order
    std::vector<bool> observed;        // directly-measured causal variables

    void validate() const;
};

// n x N sample matrix; rows i.i.d. Each node consumes its own RNG stream
// derived from (seed, node_index), so adding a node never perturbs the draws
// of existing nodes. `noise_override`, when given, replaces all noise draws
// (n x N) for deterministic tests.
Mat sample_scm(const ScmSpec& spec, int n, std::uint64_t seed,
               const std::optional<Mat>& noise_override = std::nullopt);

// Edges only from lower to higher index, each kept with prob edge_prob.
Dag random_dag(int n_nodes, double edge_prob, std::uint64_t seed);

struct RandomScmOptions {
    MechanismKind kind = MechanismKind::Linear;
    double coef_lo = 1.0, coef_hi = 1.0;    // linear edge weights ~ U[lo, hi]
    double noise_lo = 1.0, noise_hi = 1.0;  // noise scales ~ U[lo, hi]
    bool random_sign = false;
    NoiseFamily noise_family = NoiseFamily::Gaussian;
    int n_features = 16;  // tanh features per location/scale function
};

ScmSpec random_scm(const Dag& dag, const RandomScmOptions& opt, std::uint64_t seed);

}  // namespace tmex
