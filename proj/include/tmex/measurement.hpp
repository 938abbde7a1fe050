#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "tmex/scm.hpp"

namespace tmex {

enum class MeasurementKind { Identity, LinearMix, MonotoneDiffeo, Composed };

// One output coordinate of a monotone diffeomorphism:
// t -> a*t + b*tanh(c*t) applied to combo . parents. Strict monotonicity
// requires a > |b*c|.
struct DiffeoOutput {
    double a = 1.0;
    double b = 0.0;
    double c = 1.0;
    std::vector<double> combo;  // one weight per parent; empty = all ones

    double apply_scalar(double t) const { return a * t + b * std::tanh(c * t); }
};

struct MeasurementFn {
    MeasurementKind kind = MeasurementKind::Identity;
    Mat linear_mix;                     // out_dim x in_dim
    std::vector<DiffeoOutput> outputs;  // monotone_diffeo, one per output
    std::vector<MeasurementFn> stages;  // composed, applied in order
    double noise_scale = 0.0;           // additive N(0, noise_scale^2) per output

    int output_dim(int input_dim) const;
    // Row-wise application, noiseless. Throws ArityError on arity mismatch.
    Mat apply(const Mat& inputs) const;
    void validate(int input_dim, int expected_output_dim) const;
};

struct MeasurementBlock {
    std::set<int> parents;  // latent indices, nonempty
    int dim = 1;
    MeasurementFn fn;
};

struct MeasurementModel {
    int n_latents = 0;
    std::vector<MeasurementBlock> blocks;

    int total_dim() const;
    void validate() const;
};

struct PairedDataset {
    Mat z;                          // n x N
    Mat zhat;                       // n x sum(D_j)
    std::vector<int> block_offsets; // M+1 cumulative column offsets

    int n_rows() const { return static_cast<int>(z.rows()); }
    int n_latents() const { return static_cast<int>(z.cols()); }
    int n_blocks() const { return static_cast<int>(block_offsets.size()) - 1; }
    int block_dim(int j) const { return block_offsets[j + 1] - block_offsets[j]; }
    Eigen::Ref<const Mat> block(int j) const {
        return zhat.middleCols(block_offsets[j], block_dim(j));
    }
    void validate() const;
};

// V[i][j] = 1 iff latent i is a parent of block j. Rows = latents (N),
// columns = blocks (M).
Eigen::MatrixXi adjacency(const MeasurementModel& model);

// Computes every block from its parents; additive Gaussian noise (if
// noise_scale > 0) comes from a stream derived from (seed, block). With all
// noise scales zero the result is a pure function of z.
PairedDataset apply_measurements(const MeasurementModel& model, const Mat& z, std::uint64_t seed);

// zhat_block += sum_i coefs[i] * z_i for a one-dimensional block.
PairedDataset corrupt_mix(const PairedDataset& ds, int block_index,
                          const std::map<int, double>& coefs);

enum class Variant { A, B, C };

// Synthetic single-block encoder stand-ins over a 5-variable system:
//   A: monotone diffeomorphism of Z1 alone (exclusive measurement),
//   B: the same diffeomorphism family applied to Z1 + mix*(Z2 + Z3),
//   C: variant A followed by the corruption {Z2: +0.2, Z3: -0.1}.
// The diffeomorphism parameters are drawn once from `seed`.
struct VariantModel {
    MeasurementModel model;               // generative structure
    std::map<int, double> corruption;     // post-hoc mix (variant C only)
    std::vector<std::set<int>> effective_parents;  // per block, after corruption
};

VariantModel make_model_abc(Variant variant, std::uint64_t seed, double b_mix = 0.15,
                            int n_latents = 5);

// Exclusive-measurement hypothesis shared by all variants: one block reading Z1.
MeasurementModel exclusive_hypothesis(int n_latents = 5);

}  // namespace tmex
