#include "loadcast/deep.hpp"

#include <cmath>

#include "loadcast/errors.hpp"
#include "loadcast/rng.hpp"

namespace loadcast {

using namespace nn;

Batch Batch::from_dataset(const Dataset& dataset, const std::vector<std::size_t>& indices) {
    Batch batch;
    batch.count = indices.size();
    const std::size_t b = indices.size();

    Matrix stacked(b * kHoursPerDay, kFeatureCount);
    std::vector<Matrix> steps(kHoursPerDay, Matrix(b, kFeatureCount));
    batch.targets = Matrix(b, kHoursPerDay);

    for (std::size_t w = 0; w < b; ++w) {
        auto rows = dataset.normalized(indices[w]);
        const FeatureWindow& window = dataset.windows[indices[w]];
        for (std::size_t t = 0; t < kHoursPerDay; ++t) {
            for (std::size_t c = 0; c < kFeatureCount; ++c) {
                stacked(w * kHoursPerDay + t, c) = rows[t][c];
                steps[t](w, c) = rows[t][c];
            }
            batch.targets(w, t) = window.y[t];
        }
    }
    batch.stacked = constant(std::move(stacked));
    batch.steps.reserve(kHoursPerDay);
    for (auto& m : steps) batch.steps.push_back(constant(std::move(m)));
    return batch;
}

std::array<double, kHoursPerDay> DeepModel::predict(const Dataset& dataset,
                                                    std::size_t window_index) const {
    Batch batch = Batch::from_dataset(dataset, {window_index});
    Tensor out = forward(batch);
    std::array<double, kHoursPerDay> y{};
    for (std::size_t t = 0; t < kHoursPerDay; ++t) y[t] = out.value()(0, t);
    return y;
}

namespace {

// Registers parameters with seeded init; the per-parameter stream index makes
// initialization independent of build order elsewhere.
class ParamBuilder {
public:
    ParamBuilder(ParamSet& set, std::uint64_t seed) : set_(set), seed_(seed) {}

    Tensor weight(const std::string& name, std::size_t rows, std::size_t cols,
                  std::size_t fan_in) {
        Matrix m(rows, cols);
        Rng rng = Rng::derived(seed_, index_++);
        double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (double& v : m.data) v = rng.uniform(-bound, bound);
        Tensor t = parameter(std::move(m));
        set_.params.push_back({name, t});
        return t;
    }

    Tensor bias(const std::string& name, std::size_t cols, std::size_t fan_in) {
        return weight(name, 1, cols, fan_in);
    }

    Tensor norm_scale(const std::string& name, std::size_t cols) {
        ++index_;
        Tensor t = parameter(Matrix::full(1, cols, 1.0));
        set_.params.push_back({name, t});
        return t;
    }

    Tensor norm_shift(const std::string& name, std::size_t cols) {
        ++index_;
        Tensor t = parameter(Matrix::zeros(1, cols));
        set_.params.push_back({name, t});
        return t;
    }

private:
    ParamSet& set_;
    std::uint64_t seed_;
    std::uint64_t index_ = 0;
};

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
    return add_rowvec(matmul(x, w), b);
}

Tensor affine_norm(const Tensor& x, const Tensor& scale_row, const Tensor& shift_row) {
    return add_rowvec(mul_rowvec(layernorm_rows(x), scale_row), shift_row);
}

// Group norm over per-head sub-vectors of each row.
Tensor head_group_norm(const Tensor& x, std::size_t heads, const Tensor& scale_row,
                       const Tensor& shift_row) {
    std::size_t head_dim = x.cols() / heads;
    std::vector<Tensor> parts;
    parts.reserve(heads);
    for (std::size_t h = 0; h < heads; ++h) {
        parts.push_back(layernorm_rows(slice_cols(x, h * head_dim, (h + 1) * head_dim)));
    }
    return add_rowvec(mul_rowvec(concat_cols(parts), scale_row), shift_row);
}

// ---------------------------------------------------------------------------
// LSTM stack
// ---------------------------------------------------------------------------

struct LstmCellParams {
    Tensor wx;  // in x 4H
    Tensor wh;  // H x 4H
    Tensor b;   // 1 x 4H
    std::size_t hidden = 0;
};

LstmCellParams make_cell(ParamBuilder& pb, const std::string& name, std::size_t in,
                         std::size_t hidden) {
    LstmCellParams cell;
    cell.hidden = hidden;
    cell.wx = pb.weight(name + ".wx", in, 4 * hidden, in);
    cell.wh = pb.weight(name + ".wh", hidden, 4 * hidden, hidden);
    cell.b = pb.bias(name + ".b", 4 * hidden, hidden);
    return cell;
}

// Runs one direction over the step sequence; reverse = true scans t = 23..0
// and reports outputs re-ordered back to forward time.
std::vector<Tensor> run_lstm(const LstmCellParams& cell, const std::vector<Tensor>& steps,
                             std::size_t batch, bool reverse) {
    const std::size_t h_dim = cell.hidden;
    Tensor h = constant(Matrix::zeros(batch, h_dim));
    Tensor c = constant(Matrix::zeros(batch, h_dim));
    std::vector<Tensor> outputs(steps.size());
    for (std::size_t s = 0; s < steps.size(); ++s) {
        std::size_t t = reverse ? steps.size() - 1 - s : s;
        Tensor gates = add(matmul(steps[t], cell.wx), linear(h, cell.wh, cell.b));
        Tensor i = sigmoid(slice_cols(gates, 0, h_dim));
        Tensor f = sigmoid(slice_cols(gates, h_dim, 2 * h_dim));
        Tensor g = tanh_op(slice_cols(gates, 2 * h_dim, 3 * h_dim));
        Tensor o = sigmoid(slice_cols(gates, 3 * h_dim, 4 * h_dim));
        c = add(mul(f, c), mul(i, g));
        h = mul(o, tanh_op(c));
        outputs[t] = h;
    }
    return outputs;
}

class LstmModel : public DeepModel {
public:
    LstmModel(const ModelPreset& preset, std::uint64_t seed) : DeepModel(preset) {
        const LstmArch& a = preset.lstm;
        ParamBuilder pb(params_, seed);
        std::size_t dir = a.bidirectional ? 2 : 1;
        layer1_fwd_ = make_cell(pb, "lstm1.fwd", kFeatureCount, a.layer1_units);
        if (a.bidirectional) layer1_bwd_ = make_cell(pb, "lstm1.bwd", kFeatureCount, a.layer1_units);
        std::size_t layer1_out = dir * a.layer1_units;
        layer2_fwd_ = make_cell(pb, "lstm2.fwd", layer1_out, a.layer2_units);
        if (a.bidirectional) layer2_bwd_ = make_cell(pb, "lstm2.bwd", layer1_out, a.layer2_units);
        std::size_t layer2_out = dir * a.layer2_units;
        w1_ = pb.weight("head.w1", layer2_out, a.dense1, layer2_out);
        b1_ = pb.bias("head.b1", a.dense1, layer2_out);
        w2_ = pb.weight("head.w2", a.dense1, a.dense2, a.dense1);
        b2_ = pb.bias("head.b2", a.dense2, a.dense1);
        w3_ = pb.weight("head.w3", a.dense2, 1, a.dense2);
        b3_ = pb.bias("head.b3", 1, a.dense2);
    }

    Tensor forward(const Batch& batch) const override {
        const LstmArch& a = preset_.lstm;
        std::vector<Tensor> seq = run_layer(layer1_fwd_, layer1_bwd_, a.bidirectional,
                                            batch.steps, batch.count);
        seq = run_layer(layer2_fwd_, layer2_bwd_, a.bidirectional, seq, batch.count);
        std::vector<Tensor> per_hour;
        per_hour.reserve(seq.size());
        for (const Tensor& h : seq) {
            // linear regression head, applied per timestep
            per_hour.push_back(linear(linear(linear(h, w1_, b1_), w2_, b2_), w3_, b3_));
        }
        return concat_cols(per_hour);
    }

private:
    static std::vector<Tensor> run_layer(const LstmCellParams& fwd, const LstmCellParams& bwd,
                                         bool bidirectional, const std::vector<Tensor>& steps,
                                         std::size_t batch) {
        std::vector<Tensor> out_fwd = run_lstm(fwd, steps, batch, false);
        if (!bidirectional) return out_fwd;
        std::vector<Tensor> out_bwd = run_lstm(bwd, steps, batch, true);
        std::vector<Tensor> merged(steps.size());
        for (std::size_t t = 0; t < steps.size(); ++t) {
            merged[t] = concat_cols({out_fwd[t], out_bwd[t]});
        }
        return merged;
    }

    LstmCellParams layer1_fwd_, layer1_bwd_, layer2_fwd_, layer2_bwd_;
    Tensor w1_, b1_, w2_, b2_, w3_, b3_;
};

// ---------------------------------------------------------------------------
// Encoder-only transformer
// ---------------------------------------------------------------------------

Matrix sinusoidal_encoding(std::size_t positions, std::size_t d_model) {
    Matrix pe(positions, d_model);
    for (std::size_t t = 0; t < positions; ++t) {
        for (std::size_t i = 0; i < d_model; i += 2) {
            double rate = std::pow(10000.0, static_cast<double>(i) / static_cast<double>(d_model));
            pe(t, i) = std::sin(static_cast<double>(t) / rate);
            if (i + 1 < d_model) pe(t, i + 1) = std::cos(static_cast<double>(t) / rate);
        }
    }
    return pe;
}

struct EncoderLayerParams {
    Tensor wq, bq, wk, bk, wv, bv, wo, bo;
    Tensor ln1_scale, ln1_shift, ln2_scale, ln2_shift;
    Tensor w1, b1, w2, b2;
};

class TransformerModel : public DeepModel {
public:
    TransformerModel(const ModelPreset& preset, std::uint64_t seed) : DeepModel(preset) {
        const TransformerArch& a = preset.transformer;
        ParamBuilder pb(params_, seed);
        proj_w_ = pb.weight("proj.w", kFeatureCount, a.d_model, kFeatureCount);
        proj_b_ = pb.bias("proj.b", a.d_model, kFeatureCount);
        for (std::size_t l = 0; l < a.layers; ++l) {
            std::string p = "enc" + std::to_string(l);
            EncoderLayerParams layer;
            layer.wq = pb.weight(p + ".wq", a.d_model, a.d_model, a.d_model);
            layer.bq = pb.bias(p + ".bq", a.d_model, a.d_model);
            layer.wk = pb.weight(p + ".wk", a.d_model, a.d_model, a.d_model);
            layer.bk = pb.bias(p + ".bk", a.d_model, a.d_model);
            layer.wv = pb.weight(p + ".wv", a.d_model, a.d_model, a.d_model);
            layer.bv = pb.bias(p + ".bv", a.d_model, a.d_model);
            layer.wo = pb.weight(p + ".wo", a.d_model, a.d_model, a.d_model);
            layer.bo = pb.bias(p + ".bo", a.d_model, a.d_model);
            layer.ln1_scale = pb.norm_scale(p + ".ln1.scale", a.d_model);
            layer.ln1_shift = pb.norm_shift(p + ".ln1.shift", a.d_model);
            layer.w1 = pb.weight(p + ".ff.w1", a.d_model, a.feedforward_dim, a.d_model);
            layer.b1 = pb.bias(p + ".ff.b1", a.feedforward_dim, a.d_model);
            layer.w2 = pb.weight(p + ".ff.w2", a.feedforward_dim, a.d_model, a.feedforward_dim);
            layer.b2 = pb.bias(p + ".ff.b2", a.d_model, a.feedforward_dim);
            layer.ln2_scale = pb.norm_scale(p + ".ln2.scale", a.d_model);
            layer.ln2_shift = pb.norm_shift(p + ".ln2.shift", a.d_model);
            layers_.push_back(std::move(layer));
        }
        head_w_ = pb.weight("head.w", a.d_model, 1, a.d_model);
        head_b_ = pb.bias("head.b", 1, a.d_model);
        encoding_ = sinusoidal_encoding(kHoursPerDay, a.d_model);
    }

    Tensor forward(const Batch& batch) const override {
        const TransformerArch& a = preset_.transformer;
        Tensor x = linear(batch.stacked, proj_w_, proj_b_);

        Matrix pe_tiled(batch.count * kHoursPerDay, a.d_model);
        for (std::size_t w = 0; w < batch.count; ++w) {
            for (std::size_t t = 0; t < kHoursPerDay; ++t) {
                for (std::size_t c = 0; c < a.d_model; ++c) {
                    pe_tiled(w * kHoursPerDay + t, c) = encoding_(t, c);
                }
            }
        }
        x = add(x, constant(std::move(pe_tiled)));

        for (const EncoderLayerParams& layer : layers_) {
            Tensor attn = self_attention(x, layer, batch.count, a.heads);
            x = affine_residual(x, attn, layer.ln1_scale, layer.ln1_shift);
            Tensor ff = linear(relu(linear(x, layer.w1, layer.b1)), layer.w2, layer.b2);
            x = affine_residual(x, ff, layer.ln2_scale, layer.ln2_shift);
        }
        Tensor y = linear(x, head_w_, head_b_);  // (B*24 x 1)
        return reshape(y, batch.count, kHoursPerDay);
    }

private:
    static Tensor affine_residual(const Tensor& x, const Tensor& delta, const Tensor& scale_row,
                                  const Tensor& shift_row) {
        return affine_norm(add(x, delta), scale_row, shift_row);
    }

    static Tensor self_attention(const Tensor& x, const EncoderLayerParams& layer,
                                 std::size_t windows, std::size_t heads) {
        std::size_t d_model = layer.wq.cols();
        std::size_t head_dim = d_model / heads;
        double scaling = 1.0 / std::sqrt(static_cast<double>(head_dim));
        Tensor q = linear(x, layer.wq, layer.bq);
        Tensor k = linear(x, layer.wk, layer.bk);
        Tensor v = linear(x, layer.wv, layer.bv);

        std::vector<Tensor> window_outputs;
        window_outputs.reserve(windows);
        for (std::size_t w = 0; w < windows; ++w) {
            std::size_t r0 = w * kHoursPerDay, r1 = (w + 1) * kHoursPerDay;
            Tensor qw = slice_rows(q, r0, r1);
            Tensor kw = slice_rows(k, r0, r1);
            Tensor vw = slice_rows(v, r0, r1);
            std::vector<Tensor> head_outputs;
            head_outputs.reserve(heads);
            for (std::size_t h = 0; h < heads; ++h) {
                std::size_t c0 = h * head_dim, c1 = (h + 1) * head_dim;
                Tensor scores = scale(
                    matmul(slice_cols(qw, c0, c1), transpose(slice_cols(kw, c0, c1))), scaling);
                head_outputs.push_back(matmul(softmax_rows(scores), slice_cols(vw, c0, c1)));
            }
            window_outputs.push_back(concat_cols(head_outputs));
        }
        return linear(concat_rows(window_outputs), layer.wo, layer.bo);
    }

    Tensor proj_w_, proj_b_, head_w_, head_b_;
    std::vector<EncoderLayerParams> layers_;
    Matrix encoding_;
};

// ---------------------------------------------------------------------------
// xLSTM: residual blocks of exponential-gating cells. Block `slstm_at` uses
// the scalar-memory cell (block-diagonal recurrence, stabilizer state), the
// remaining blocks the matrix-memory cell (per-head key/value outer-product
// memory queried per step). Cell equations are documented in docs/models.md.
// ---------------------------------------------------------------------------

struct SlstmParams {
    Tensor wz, wi, wf, wo;              // d x d input weights
    std::vector<Tensor> rz, ri, rf, ro; // per-head head_dim x head_dim recurrence
    Tensor b;                           // 1 x 4d
    Tensor norm_scale, norm_shift;      // input norm
    Tensor group_scale, group_shift;    // post-cell group norm
    Tensor mlp_w1, mlp_b1, mlp_w2, mlp_b2;
};

struct MlstmParams {
    Tensor wq, bq, wk, bk, wv, bv;  // d x d projections
    Tensor wi, bi, wf, bf;          // d x heads per-head gates
    Tensor wo, bo;                  // d x d output gate
    Tensor norm_scale, norm_shift;
    Tensor group_scale, group_shift;
    Tensor mlp_w1, mlp_b1, mlp_w2, mlp_b2;
};

struct XlstmBlock {
    bool scalar_memory = false;
    SlstmParams s;
    MlstmParams m;
};

class XlstmModel : public DeepModel {
public:
    XlstmModel(const ModelPreset& preset, std::uint64_t seed) : DeepModel(preset) {
        const XlstmArch& a = preset.xlstm;
        if (a.d_model % a.heads != 0) {
            throw UsageError("xlstm d_model must be divisible by heads");
        }
        ParamBuilder pb(params_, seed);
        proj_w_ = pb.weight("proj.w", kFeatureCount, a.d_model, kFeatureCount);
        proj_b_ = pb.bias("proj.b", a.d_model, kFeatureCount);
        std::size_t head_dim = a.d_model / a.heads;
        for (std::size_t blk = 0; blk < a.blocks; ++blk) {
            std::string p = "block" + std::to_string(blk);
            XlstmBlock block;
            block.scalar_memory = (blk == a.slstm_at);
            if (block.scalar_memory) {
                SlstmParams& s = block.s;
                s.norm_scale = pb.norm_scale(p + ".norm.scale", a.d_model);
                s.norm_shift = pb.norm_shift(p + ".norm.shift", a.d_model);
                s.wz = pb.weight(p + ".wz", a.d_model, a.d_model, a.d_model);
                s.wi = pb.weight(p + ".wi", a.d_model, a.d_model, a.d_model);
                s.wf = pb.weight(p + ".wf", a.d_model, a.d_model, a.d_model);
                s.wo = pb.weight(p + ".wo", a.d_model, a.d_model, a.d_model);
                for (std::size_t h = 0; h < a.heads; ++h) {
                    std::string hp = p + ".head" + std::to_string(h);
                    s.rz.push_back(pb.weight(hp + ".rz", head_dim, head_dim, head_dim));
                    s.ri.push_back(pb.weight(hp + ".ri", head_dim, head_dim, head_dim));
                    s.rf.push_back(pb.weight(hp + ".rf", head_dim, head_dim, head_dim));
                    s.ro.push_back(pb.weight(hp + ".ro", head_dim, head_dim, head_dim));
                }
                s.b = pb.bias(p + ".b", 4 * a.d_model, a.d_model);
                s.group_scale = pb.norm_scale(p + ".group.scale", a.d_model);
                s.group_shift = pb.norm_shift(p + ".group.shift", a.d_model);
                s.mlp_w1 = pb.weight(p + ".mlp.w1", a.d_model, 2 * a.d_model, a.d_model);
                s.mlp_b1 = pb.bias(p + ".mlp.b1", 2 * a.d_model, a.d_model);
                s.mlp_w2 = pb.weight(p + ".mlp.w2", 2 * a.d_model, a.d_model, 2 * a.d_model);
                s.mlp_b2 = pb.bias(p + ".mlp.b2", a.d_model, 2 * a.d_model);
            } else {
                MlstmParams& m = block.m;
                m.norm_scale = pb.norm_scale(p + ".norm.scale", a.d_model);
                m.norm_shift = pb.norm_shift(p + ".norm.shift", a.d_model);
                m.wq = pb.weight(p + ".wq", a.d_model, a.d_model, a.d_model);
                m.bq = pb.bias(p + ".bq", a.d_model, a.d_model);
                m.wk = pb.weight(p + ".wk", a.d_model, a.d_model, a.d_model);
                m.bk = pb.bias(p + ".bk", a.d_model, a.d_model);
                m.wv = pb.weight(p + ".wv", a.d_model, a.d_model, a.d_model);
                m.bv = pb.bias(p + ".bv", a.d_model, a.d_model);
                m.wi = pb.weight(p + ".wi", a.d_model, a.heads, a.d_model);
                m.bi = pb.bias(p + ".bi", a.heads, a.d_model);
                m.wf = pb.weight(p + ".wf", a.d_model, a.heads, a.d_model);
                m.bf = pb.bias(p + ".bf", a.heads, a.d_model);
                m.wo = pb.weight(p + ".wo", a.d_model, a.d_model, a.d_model);
                m.bo = pb.bias(p + ".bo", a.d_model, a.d_model);
                m.group_scale = pb.norm_scale(p + ".group.scale", a.d_model);
                m.group_shift = pb.norm_shift(p + ".group.shift", a.d_model);
                m.mlp_w1 = pb.weight(p + ".mlp.w1", a.d_model, 2 * a.d_model, a.d_model);
                m.mlp_b1 = pb.bias(p + ".mlp.b1", 2 * a.d_model, a.d_model);
                m.mlp_w2 = pb.weight(p + ".mlp.w2", 2 * a.d_model, a.d_model, 2 * a.d_model);
                m.mlp_b2 = pb.bias(p + ".mlp.b2", a.d_model, 2 * a.d_model);
            }
            blocks_.push_back(std::move(block));
        }
        final_scale_ = pb.norm_scale("final.scale", a.d_model);
        final_shift_ = pb.norm_shift("final.shift", a.d_model);
        head_w_ = pb.weight("head.w", a.d_model, 1, a.d_model);
        head_b_ = pb.bias("head.b", 1, a.d_model);
        encoding_ = sinusoidal_encoding(kHoursPerDay, a.d_model);
    }

    Tensor forward(const Batch& batch) const override {
        const XlstmArch& a = preset_.xlstm;
        std::vector<Tensor> xs(kHoursPerDay);
        for (std::size_t t = 0; t < kHoursPerDay; ++t) {
            Tensor pe_row = constant(Matrix::row(std::vector<double>(
                encoding_.data.begin() + static_cast<std::ptrdiff_t>(t * a.d_model),
                encoding_.data.begin() + static_cast<std::ptrdiff_t>((t + 1) * a.d_model))));
            xs[t] = add_rowvec(linear(batch.steps[t], proj_w_, proj_b_), pe_row);
        }
        for (const XlstmBlock& block : blocks_) {
            xs = block.scalar_memory ? run_slstm_block(block.s, xs, batch.count, a.heads)
                                     : run_mlstm_block(block.m, xs, batch.count, a.heads);
        }
        std::vector<Tensor> per_hour(kHoursPerDay);
        for (std::size_t t = 0; t < kHoursPerDay; ++t) {
            Tensor y = affine_norm(xs[t], final_scale_, final_shift_);
            per_hour[t] = linear(y, head_w_, head_b_);
        }
        return concat_cols(per_hour);
    }

private:
    static Tensor block_diag_recurrence(const Tensor& h, const std::vector<Tensor>& r,
                                        std::size_t heads) {
        std::size_t head_dim = h.cols() / heads;
        std::vector<Tensor> parts;
        parts.reserve(heads);
        for (std::size_t i = 0; i < heads; ++i) {
            parts.push_back(matmul(slice_cols(h, i * head_dim, (i + 1) * head_dim), r[i]));
        }
        return concat_cols(parts);
    }

    template <typename P>
    static std::vector<Tensor> residual_mlp(const P& p, std::vector<Tensor> xs) {
        for (Tensor& x : xs) {
            Tensor hidden = relu(linear(x, p.mlp_w1, p.mlp_b1));
            x = add(x, linear(hidden, p.mlp_w2, p.mlp_b2));
        }
        return xs;
    }

    static std::vector<Tensor> run_slstm_block(const SlstmParams& p, const std::vector<Tensor>& xs,
                                               std::size_t batch, std::size_t heads) {
        const std::size_t d = p.wz.cols();
        Tensor h = constant(Matrix::zeros(batch, d));
        Tensor c = constant(Matrix::zeros(batch, d));
        Tensor n = constant(Matrix::zeros(batch, d));
        Tensor m = constant(Matrix::zeros(batch, d));
        Tensor bz = slice_cols(p.b, 0, d);
        Tensor bi = slice_cols(p.b, d, 2 * d);
        Tensor bf = slice_cols(p.b, 2 * d, 3 * d);
        Tensor bo = slice_cols(p.b, 3 * d, 4 * d);
        std::vector<Tensor> out(xs.size());
        for (std::size_t t = 0; t < xs.size(); ++t) {
            Tensor u = affine_norm(xs[t], p.norm_scale, p.norm_shift);
            Tensor z = tanh_op(add_rowvec(add(matmul(u, p.wz), block_diag_recurrence(h, p.rz, heads)), bz));
            Tensor i_pre = add_rowvec(add(matmul(u, p.wi), block_diag_recurrence(h, p.ri, heads)), bi);
            Tensor f_pre = add_rowvec(add(matmul(u, p.wf), block_diag_recurrence(h, p.rf, heads)), bf);
            Tensor o = sigmoid(add_rowvec(add(matmul(u, p.wo), block_diag_recurrence(h, p.ro, heads)), bo));
            // exponential gating with stabilizer state
            Tensor m_next = maximum(add(f_pre, m), i_pre);
            Tensor i_gate = exp_op(sub(i_pre, m_next));
            Tensor f_gate = exp_op(sub(add(f_pre, m), m_next));
            c = add(mul(f_gate, c), mul(i_gate, z));
            n = add(mul(f_gate, n), i_gate);
            m = m_next;
            h = mul(o, divide(c, n));
            out[t] = add(xs[t], head_group_norm(h, heads, p.group_scale, p.group_shift));
        }
        return residual_mlp(p, std::move(out));
    }

    static std::vector<Tensor> run_mlstm_block(const MlstmParams& p, const std::vector<Tensor>& xs,
                                               std::size_t batch, std::size_t heads) {
        const std::size_t d = p.wq.cols();
        const std::size_t head_dim = d / heads;
        const double key_scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
        std::vector<Tensor> cell(heads), norm(heads), stab(heads);
        for (std::size_t h = 0; h < heads; ++h) {
            cell[h] = constant(Matrix::zeros(batch * head_dim, head_dim));
            norm[h] = constant(Matrix::zeros(batch, head_dim));
            stab[h] = constant(Matrix::zeros(batch, 1));
        }
        std::vector<Tensor> out(xs.size());
        for (std::size_t t = 0; t < xs.size(); ++t) {
            Tensor u = affine_norm(xs[t], p.norm_scale, p.norm_shift);
            Tensor q = linear(u, p.wq, p.bq);
            Tensor k = scale(linear(u, p.wk, p.bk), key_scale);
            Tensor v = linear(u, p.wv, p.bv);
            Tensor i_pre = linear(u, p.wi, p.bi);  // (B x heads)
            Tensor f_pre = linear(u, p.wf, p.bf);
            Tensor o = sigmoid(linear(u, p.wo, p.bo));
            std::vector<Tensor> head_out(heads);
            for (std::size_t h = 0; h < heads; ++h) {
                Tensor qh = slice_cols(q, h * head_dim, (h + 1) * head_dim);
                Tensor kh = slice_cols(k, h * head_dim, (h + 1) * head_dim);
                Tensor vh = slice_cols(v, h * head_dim, (h + 1) * head_dim);
                Tensor ih_pre = slice_cols(i_pre, h, h + 1);
                Tensor fh_pre = slice_cols(f_pre, h, h + 1);
                Tensor m_next = maximum(add(fh_pre, stab[h]), ih_pre);
                Tensor i_gate = exp_op(sub(ih_pre, m_next));
                Tensor f_gate = exp_op(sub(add(fh_pre, stab[h]), m_next));
                stab[h] = m_next;
                cell[h] = add(mul_colvec(cell[h], repeat_rows(f_gate, head_dim)),
                              batch_outer(mul_colvec(vh, i_gate), kh));
                norm[h] = add(mul_colvec(norm[h], f_gate), mul_colvec(kh, i_gate));
                Tensor denom = clamp_min(abs_op(row_sum(mul(norm[h], qh))), 1.0);
                head_out[h] = div_colvec(batch_matvec(cell[h], qh), denom);
            }
            Tensor merged = mul(o, concat_cols(head_out));
            out[t] = add(xs[t], head_group_norm(merged, heads, p.group_scale, p.group_shift));
        }
        return residual_mlp(p, std::move(out));
    }

    Tensor proj_w_, proj_b_, head_w_, head_b_, final_scale_, final_shift_;
    std::vector<XlstmBlock> blocks_;
    Matrix encoding_;
};

}  // namespace

std::unique_ptr<DeepModel> make_deep_model(const ModelPreset& preset, std::uint64_t seed) {
    switch (preset.family) {
        case ModelFamily::lstm: return std::make_unique<LstmModel>(preset, seed);
        case ModelFamily::transformer: return std::make_unique<TransformerModel>(preset, seed);
        case ModelFamily::xlstm: return std::make_unique<XlstmModel>(preset, seed);
        default:
            throw UsageError("make_deep_model: " + family_name(preset.family) +
                             " is not a deep family");
    }
}

}  // namespace loadcast
