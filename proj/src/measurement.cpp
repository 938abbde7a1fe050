#include "tmex/measurement.hpp"

#include <Eigen/SVD>

#include <string>

#include "tmex/errors.hpp"

namespace tmex {

int MeasurementFn::output_dim(int input_dim) const {
    switch (kind) {
        case MeasurementKind::Identity:
            return input_dim;
        case MeasurementKind::LinearMix:
            return static_cast<int>(linear_mix.rows());
        case MeasurementKind::MonotoneDiffeo:
            return static_cast<int>(outputs.size());
        case MeasurementKind::Composed: {
            int d = input_dim;
            for (const auto& s : stages) d = s.output_dim(d);
            return d;
        }
    }
    return 0;
}

Mat MeasurementFn::apply(const Mat& inputs) const {
    const int n = static_cast<int>(inputs.rows());
    const int d_in = static_cast<int>(inputs.cols());
    switch (kind) {
        case MeasurementKind::Identity:
            return inputs;
        case MeasurementKind::LinearMix:
            if (linear_mix.cols() != d_in)
                throw ArityError("linear_mix: matrix has " + std::to_string(linear_mix.cols()) +
                                 " columns, input has " + std::to_string(d_in));
            return inputs * linear_mix.transpose();
        case MeasurementKind::MonotoneDiffeo: {
            Mat out(n, static_cast<int>(outputs.size()));
            for (std::size_t o = 0; o < outputs.size(); ++o) {
                const DiffeoOutput& fn = outputs[o];
                Vec combo;
                if (fn.combo.empty()) {
                    combo = Vec::Ones(d_in);
                } else {
                    if (static_cast<int>(fn.combo.size()) != d_in)
                        throw ArityError("monotone_diffeo: combo length != input dim");
                    combo = Eigen::Map<const Vec>(fn.combo.data(), d_in);
                }
                const Vec t = inputs * combo;
                for (int k = 0; k < n; ++k) out(k, static_cast<int>(o)) = fn.apply_scalar(t[k]);
            }
            return out;
        }
        case MeasurementKind::Composed: {
            Mat cur = inputs;
            for (const auto& s : stages) cur = s.apply(cur);
            return cur;
        }
    }
    throw ArityError("MeasurementFn: unknown kind");
}

void MeasurementFn::validate(int input_dim, int expected_output_dim) const {
    if (noise_scale < 0.0) throw DataError("MeasurementFn: noise_scale must be >= 0");
    switch (kind) {
        case MeasurementKind::Identity:
            if (expected_output_dim != input_dim)
                throw DataError("identity fn: output dim must equal parent count");
            break;
        case MeasurementKind::LinearMix: {
            if (linear_mix.cols() != input_dim)
                throw DataError("linear_mix: column count must equal parent count");
            if (static_cast<int>(linear_mix.rows()) != expected_output_dim)
                throw DataError("linear_mix: row count must equal block dim");
            if (linear_mix.rows() <= linear_mix.cols()) {
                Eigen::JacobiSVD<Mat> svd(linear_mix);
                const auto& sv = svd.singularValues();
                if (sv.size() == 0 || sv(sv.size() - 1) < 1e-12 * std::max(1.0, sv(0)))
                    throw DataError("linear_mix: matrix is not full row rank");
            }
            break;
        }
        case MeasurementKind::MonotoneDiffeo:
            if (static_cast<int>(outputs.size()) != expected_output_dim)
                throw DataError("monotone_diffeo: output count must equal block dim");
            for (const auto& o : outputs) {
                if (!(o.a > std::fabs(o.b * o.c)))
                    throw DataError("monotone_diffeo: requires a > |b*c|");
                if (!o.combo.empty() && static_cast<int>(o.combo.size()) != input_dim)
                    throw DataError("monotone_diffeo: combo length must equal parent count");
            }
            break;
        case MeasurementKind::Composed: {
            if (stages.empty()) throw DataError("composed fn: needs at least one stage");
            int d = input_dim;
            for (std::size_t s = 0; s + 1 < stages.size(); ++s) {
                stages[s].validate(d, stages[s].output_dim(d));
                d = stages[s].output_dim(d);
            }
            stages.back().validate(d, expected_output_dim);
            break;
        }
    }
}

int MeasurementModel::total_dim() const {
    int d = 0;
    for (const auto& b : blocks) d += b.dim;
    return d;
}

void MeasurementModel::validate() const {
    if (n_latents <= 0) throw DataError("MeasurementModel: n_latents must be positive");
    if (blocks.empty()) throw DataError("MeasurementModel: needs at least one block");
    for (std::size_t j = 0; j < blocks.size(); ++j) {
        const auto& b = blocks[j];
        if (b.parents.empty())
            throw DataError("MeasurementModel: block " + std::to_string(j) + " has no parents");
        for (int p : b.parents)
            if (p < 0 || p >= n_latents)
                throw DataError("MeasurementModel: block " + std::to_string(j) +
                                " parent index out of range");
        if (b.dim <= 0)
            throw DataError("MeasurementModel: block " + std::to_string(j) + " dim must be >= 1");
        b.fn.validate(static_cast<int>(b.parents.size()), b.dim);
    }
}

void PairedDataset::validate() const {
    if (z.rows() != zhat.rows()) throw ShapeError("PairedDataset: row counts differ");
    if (block_offsets.size() < 2 || block_offsets.front() != 0)
        throw ShapeError("PairedDataset: bad block offsets");
    for (std::size_t j = 0; j + 1 < block_offsets.size(); ++j)
        if (block_offsets[j + 1] <= block_offsets[j])
            throw ShapeError("PairedDataset: offsets must be strictly increasing");
    if (block_offsets.back() != static_cast<int>(zhat.cols()))
        throw ShapeError("PairedDataset: offsets do not cover zhat columns");
}

Eigen::MatrixXi adjacency(const MeasurementModel& model) {
    model.validate();
    Eigen::MatrixXi v = Eigen::MatrixXi::Zero(model.n_latents, static_cast<int>(model.blocks.size()));
    for (std::size_t j = 0; j < model.blocks.size(); ++j)
        for (int p : model.blocks[j].parents) v(p, static_cast<int>(j)) = 1;
    return v;
}

PairedDataset apply_measurements(const MeasurementModel& model, const Mat& z, std::uint64_t seed) {
    model.validate();
    if (static_cast<int>(z.cols()) != model.n_latents)
        throw ArityError("apply_measurements: z has " + std::to_string(z.cols()) +
                         " columns, model expects " + std::to_string(model.n_latents));
    const int n = static_cast<int>(z.rows());

    PairedDataset ds;
    ds.z = z;
    ds.block_offsets.push_back(0);
    ds.zhat.resize(n, model.total_dim());

    for (std::size_t j = 0; j < model.blocks.size(); ++j) {
        const auto& blk = model.blocks[j];
        Mat inputs(n, static_cast<int>(blk.parents.size()));
        int col = 0;
        for (int p : blk.parents) inputs.col(col++) = z.col(p);
        Mat out = blk.fn.apply(inputs);
        if (static_cast<int>(out.cols()) != blk.dim)
            throw ArityError("apply_measurements: block " + std::to_string(j) +
                             " produced wrong output dim");
        if (blk.fn.noise_scale > 0.0) {
            Rng rng(derive_seed(seed, "meas", static_cast<std::uint64_t>(j)));
            for (int c = 0; c < out.cols(); ++c)
                for (int k = 0; k < n; ++k) out(k, c) += blk.fn.noise_scale * rng.normal();
        }
        ds.zhat.middleCols(ds.block_offsets.back(), blk.dim) = out;
        ds.block_offsets.push_back(ds.block_offsets.back() + blk.dim);
    }
    ds.validate();
    return ds;
}

PairedDataset corrupt_mix(const PairedDataset& ds, int block_index,
                          const std::map<int, double>& coefs) {
    ds.validate();
    if (block_index < 0 || block_index >= ds.n_blocks())
        throw ShapeError("corrupt_mix: block index out of range");
    if (ds.block_dim(block_index) != 1)
        throw DimError("corrupt_mix: block must be one-dimensional");
    PairedDataset out = ds;
    const int col = out.block_offsets[block_index];
    for (const auto& [latent, coef] : coefs) {
        if (latent < 0 || latent >= ds.n_latents())
            throw ShapeError("corrupt_mix: latent index out of range");
        out.zhat.col(col) += coef * ds.z.col(latent);
    }
    return out;
}

namespace {

DiffeoOutput draw_diffeo(Rng& rng, std::vector<double> combo) {
    DiffeoOutput d;
    d.a = rng.uniform(1.5, 2.5);
    d.b = rng.uniform(0.3, 0.7);
    d.c = rng.uniform(0.5, 1.5);
    d.combo = std::move(combo);
    return d;
}

}  // namespace

VariantModel make_model_abc(Variant variant, std::uint64_t seed, double b_mix, int n_latents) {
    Rng rng(derive_seed(seed, "variant"));
    VariantModel vm;
    vm.model.n_latents = n_latents;

    MeasurementBlock blk;
    blk.dim = 1;
    blk.fn.kind = MeasurementKind::MonotoneDiffeo;
    switch (variant) {
        case Variant::A: {
            blk.parents = {0};
            blk.fn.outputs = {draw_diffeo(rng, {1.0})};
            vm.effective_parents = {{0}};
            break;
        }
        case Variant::B: {
            if (b_mix == 0.0) {
                blk.parents = {0};
                blk.fn.outputs = {draw_diffeo(rng, {1.0})};
                vm.effective_parents = {{0}};
            } else {
                blk.parents = {0, 1, 2};
                blk.fn.outputs = {draw_diffeo(rng, {1.0, b_mix, b_mix})};
                vm.effective_parents = {{0, 1, 2}};
            }
            break;
        }
        case Variant::C: {
            blk.parents = {0};
            blk.fn.outputs = {draw_diffeo(rng, {1.0})};
            vm.corruption = {{1, 0.2}, {2, -0.1}};
            vm.effective_parents = {{0, 1, 2}};
            break;
        }
    }
    vm.model.blocks = {blk};
    vm.model.validate();
    return vm;
}

MeasurementModel exclusive_hypothesis(int n_latents) {
    MeasurementModel m;
    m.n_latents = n_latents;
    MeasurementBlock blk;
    blk.parents = {0};
    blk.dim = 1;
    blk.fn.kind = MeasurementKind::Identity;
    m.blocks = {blk};
    m.validate();
    return m;
}

}  // namespace tmex
