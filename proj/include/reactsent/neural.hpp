// From-scratch recurrent classifiers (RNN, GRU, LSTM cells; optional
// bidirectionality; 1-3 stacked layers) with a sigmoid binary head,
// hand-derived reverse-mode gradients through time, and a finite-
// difference gradient checker. Everything is double precision.
//
// Gate packing order inside the fused weight blocks:
//   gru  [update; reset; candidate]
//   lstm [input; forget; candidate; output]
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "reactsent/embedding.hpp"
#include "reactsent/rng.hpp"
#include "reactsent/tensor.hpp"

namespace reactsent {

class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class CellKind { Rnn, Gru, Lstm };
enum class Readout { LastHidden, MeanPool };

inline int gate_count(CellKind kind) {
    switch (kind) {
        case CellKind::Rnn: return 1;
        case CellKind::Gru: return 3;
        case CellKind::Lstm: return 4;
    }
    return 0;
}

inline std::string_view cell_name(CellKind kind) {
    switch (kind) {
        case CellKind::Rnn: return "rnn";
        case CellKind::Gru: return "gru";
        case CellKind::Lstm: return "lstm";
    }
    return "";
}

inline CellKind cell_from_name(std::string_view name) {
    if (name == "rnn") return CellKind::Rnn;
    if (name == "gru") return CellKind::Gru;
    if (name == "lstm") return CellKind::Lstm;
    throw TrainingError("unknown cell kind: '" + std::string(name) + "'");
}

struct ModelSpec {
    CellKind cell = CellKind::Lstm;
    bool bidirectional = false;
    int layers = 1;
    int hidden = 128;
    Readout readout = Readout::LastHidden;
    double dropout = 0.0;  // inter-layer, training-time only
    std::string name;

    int directions() const { return bidirectional ? 2 : 1; }

    void validate() const {
        if (layers < 1 || layers > 3) {
            throw TrainingError("layers must be in {1,2,3}, got " + std::to_string(layers));
        }
        if (hidden < 1) {
            throw TrainingError("hidden size must be >= 1");
        }
        if (dropout < 0.0 || dropout >= 1.0) {
            throw TrainingError("dropout must be in [0, 1)");
        }
    }
};

/// Fused per-direction cell parameters. w_in: (gates*hidden) x in,
/// w_rec: (gates*hidden) x hidden, bias: gates*hidden.
struct CellParams {
    Tensor w_in;
    Tensor w_rec;
    std::vector<double> bias;
};

struct LayerParams {
    CellParams fwd;
    CellParams bwd;  // unused when unidirectional
};

struct HeadParams {
    std::vector<double> w;
    double b = 0.0;
};

struct ModelParams {
    std::vector<LayerParams> layers;
    HeadParams head;
};

struct Model {
    ModelSpec spec;
    size_t input_dim = 0;
    ModelParams params;
};

/// Flat views over every parameter array, in a fixed order shared by the
/// optimizer, clipper, serializer, and finite-difference walker.
inline std::vector<std::span<double>> param_views(ModelParams& p) {
    std::vector<std::span<double>> views;
    for (LayerParams& layer : p.layers) {
        for (CellParams* cell : {&layer.fwd, &layer.bwd}) {
            if (cell->bias.empty()) continue;
            views.push_back(cell->w_in.values);
            views.push_back(cell->w_rec.values);
            views.push_back(cell->bias);
        }
    }
    views.push_back(p.head.w);
    views.push_back({&p.head.b, 1});
    return views;
}

inline size_t layer_input_dim(const ModelSpec& spec, size_t input_dim, int layer) {
    return layer == 0 ? input_dim : size_t(spec.hidden) * size_t(spec.directions());
}

/// Closed-form parameter count: per direction and layer
/// gates*h*(in + h + 1), plus the head's h*dirs + 1.
inline size_t expected_param_count(const ModelSpec& spec, size_t input_dim) {
    const size_t g = size_t(gate_count(spec.cell));
    const size_t h = size_t(spec.hidden);
    size_t total = 0;
    for (int l = 0; l < spec.layers; ++l) {
        const size_t in = layer_input_dim(spec, input_dim, l);
        total += size_t(spec.directions()) * g * h * (in + h + 1);
    }
    return total + h * size_t(spec.directions()) + 1;
}

inline size_t param_count(ModelParams& p) {
    size_t n = 0;
    for (auto view : param_views(p)) n += view.size();
    return n;
}

namespace detail {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline CellParams make_cell(size_t gh, size_t in, size_t h) {
    CellParams c;
    c.w_in = Tensor::zeros({gh, in});
    c.w_rec = Tensor::zeros({gh, h});
    c.bias.assign(gh, 0.0);
    return c;
}

inline void fill_uniform(std::span<double> out, double bound, Rng& rng) {
    for (double& v : out) v = rng.next_double(-bound, bound);
}

// dx += M[r0..r0+nr)^T dy               (block = contiguous row range)
inline void block_matvec_t(const Tensor& m, size_t r0, size_t nr,
                           std::span<const double> dy, std::span<double> dx) {
    for (size_t i = 0; i < nr; ++i) {
        axpy(dy[i], m.row(r0 + i), dx);
    }
}

// dM[r0..r0+nr) += dy x^T
inline void block_outer(Tensor& dm, size_t r0, size_t nr, std::span<const double> dy,
                        std::span<const double> x) {
    for (size_t i = 0; i < nr; ++i) {
        axpy(dy[i], x, dm.row(r0 + i));
    }
}

}  // namespace detail

/// Recurrent state threaded through cell_step; c is used by LSTM only.
struct CellState {
    std::vector<double> h;
    std::vector<double> c;

    static CellState zeros(CellKind kind, size_t hidden) {
        CellState s;
        s.h.assign(hidden, 0.0);
        if (kind == CellKind::Lstm) s.c.assign(hidden, 0.0);
        return s;
    }
};

/// Per-direction activation cache for one sequence; rows are processing
/// steps (the backward direction stores the reversed walk).
struct DirectionTrace {
    Tensor h;
    // lstm
    Tensor gi, gf, gg, go, c, tc;
    // gru
    Tensor gz, gr, hc, rh;

    void resize(CellKind kind, size_t n, size_t hidden) {
        h = Tensor::zeros({n, hidden});
        if (kind == CellKind::Lstm) {
            gi = Tensor::zeros({n, hidden});
            gf = Tensor::zeros({n, hidden});
            gg = Tensor::zeros({n, hidden});
            go = Tensor::zeros({n, hidden});
            c = Tensor::zeros({n, hidden});
            tc = Tensor::zeros({n, hidden});
        } else if (kind == CellKind::Gru) {
            gz = Tensor::zeros({n, hidden});
            gr = Tensor::zeros({n, hidden});
            hc = Tensor::zeros({n, hidden});
            rh = Tensor::zeros({n, hidden});
        }
    }
};

namespace detail {

struct StepSlots {
    std::span<double> h;
    std::span<double> gi, gf, gg, go, c, tc;  // lstm
    std::span<double> gz, gr, hc, rh;         // gru
};

inline StepSlots slots_at(CellKind kind, DirectionTrace& tr, size_t k) {
    StepSlots s;
    s.h = tr.h.row(k);
    if (kind == CellKind::Lstm) {
        s.gi = tr.gi.row(k);
        s.gf = tr.gf.row(k);
        s.gg = tr.gg.row(k);
        s.go = tr.go.row(k);
        s.c = tr.c.row(k);
        s.tc = tr.tc.row(k);
    } else if (kind == CellKind::Gru) {
        s.gz = tr.gz.row(k);
        s.gr = tr.gr.row(k);
        s.hc = tr.hc.row(k);
        s.rh = tr.rh.row(k);
    }
    return s;
}

// One recurrence step; h_prev/c_prev are the previous processing step's
// state (zeros at the sequence start).
inline void step_cell(CellKind kind, const CellParams& p, std::span<const double> x,
                      std::span<const double> h_prev, std::span<const double> c_prev,
                      StepSlots& out) {
    const size_t h = out.h.size();
    switch (kind) {
        case CellKind::Rnn: {
            matvec_bias(p.w_in, x, p.bias, out.h);
            matvec_acc(p.w_rec, h_prev, out.h);
            for (double& v : out.h) v = std::tanh(v);
            return;
        }
        case CellKind::Gru: {
            std::vector<double> pre(2 * h);
            // update and reset gates: rows [0, 2h)
            for (size_t i = 0; i < 2 * h; ++i) {
                pre[i] = p.bias[i] + dot(p.w_in.row(i), x) + dot(p.w_rec.row(i), h_prev);
            }
            for (size_t i = 0; i < h; ++i) {
                out.gz[i] = sigmoid(pre[i]);
                out.gr[i] = sigmoid(pre[h + i]);
                out.rh[i] = out.gr[i] * h_prev[i];
            }
            // candidate: rows [2h, 3h) with the reset-gated recurrent term
            for (size_t i = 0; i < h; ++i) {
                double a = p.bias[2 * h + i] + dot(p.w_in.row(2 * h + i), x) +
                           dot(p.w_rec.row(2 * h + i), out.rh);
                out.hc[i] = std::tanh(a);
                out.h[i] = out.gz[i] * h_prev[i] + (1.0 - out.gz[i]) * out.hc[i];
            }
            return;
        }
        case CellKind::Lstm: {
            std::vector<double> pre(4 * h);
            for (size_t i = 0; i < 4 * h; ++i) {
                pre[i] = p.bias[i] + dot(p.w_in.row(i), x) + dot(p.w_rec.row(i), h_prev);
            }
            for (size_t i = 0; i < h; ++i) {
                out.gi[i] = sigmoid(pre[i]);
                out.gf[i] = sigmoid(pre[h + i]);
                out.gg[i] = std::tanh(pre[2 * h + i]);
                out.go[i] = sigmoid(pre[3 * h + i]);
                out.c[i] = out.gf[i] * c_prev[i] + out.gi[i] * out.gg[i];
                out.tc[i] = std::tanh(out.c[i]);
                out.h[i] = out.go[i] * out.tc[i];
            }
            return;
        }
    }
}

}  // namespace detail

/// Single recurrence step on an explicit state; the building block the
/// full forward pass iterates.
inline void cell_step(CellKind kind, const CellParams& p, std::span<const double> x,
                      CellState& state) {
    const size_t h = state.h.size();
    if (p.w_in.cols() != x.size() || p.w_rec.cols() != h ||
        p.bias.size() != size_t(gate_count(kind)) * h) {
        throw TrainingError("cell_step dimension mismatch");
    }
    DirectionTrace scratch;
    scratch.resize(kind, 1, h);
    auto slots = detail::slots_at(kind, scratch, 0);
    std::vector<double> c_prev = state.c.empty() ? std::vector<double>(h, 0.0) : state.c;
    detail::step_cell(kind, p, x, state.h, c_prev, slots);
    state.h.assign(slots.h.begin(), slots.h.end());
    if (kind == CellKind::Lstm) {
        state.c.assign(slots.c.begin(), slots.c.end());
    }
    return;
}

struct LayerTrace {
    Tensor input;   // n x in, what the layer actually consumed
    DirectionTrace fwd, bwd;
    Tensor output;  // n x (hidden*dirs), position-aligned, pre-dropout
    std::vector<double> drop_scale;  // elementwise 0 or 1/(1-p); empty = no dropout
};

struct ForwardTrace {
    size_t n = 0;  // real (unpadded) length
    std::vector<LayerTrace> layers;
    std::vector<double> readout;
    double logit = 0.0;
    double prob = 0.5;
};

inline Model build_model(const ModelSpec& spec, size_t input_dim, Rng rng) {
    spec.validate();
    Model model;
    model.spec = spec;
    model.input_dim = input_dim;
    const size_t h = size_t(spec.hidden);
    const size_t gh = size_t(gate_count(spec.cell)) * h;
    const double bound = 1.0 / std::sqrt(double(spec.hidden));
    for (int l = 0; l < spec.layers; ++l) {
        const size_t in = layer_input_dim(spec, input_dim, l);
        LayerParams layer;
        layer.fwd = detail::make_cell(gh, in, h);
        if (spec.bidirectional) {
            layer.bwd = detail::make_cell(gh, in, h);
        }
        model.params.layers.push_back(std::move(layer));
    }
    model.params.head.w.assign(h * size_t(spec.directions()), 0.0);
    for (auto view : param_views(model.params)) {
        detail::fill_uniform(view, bound, rng);
    }
    return model;
}

inline ModelParams zeros_like(const Model& model) {
    ModelParams grads;
    const size_t h = size_t(model.spec.hidden);
    const size_t gh = size_t(gate_count(model.spec.cell)) * h;
    for (int l = 0; l < model.spec.layers; ++l) {
        const size_t in = layer_input_dim(model.spec, model.input_dim, l);
        LayerParams layer;
        layer.fwd = detail::make_cell(gh, in, h);
        if (model.spec.bidirectional) layer.bwd = detail::make_cell(gh, in, h);
        grads.layers.push_back(std::move(layer));
    }
    grads.head.w.assign(h * size_t(model.spec.directions()), 0.0);
    grads.head.b = 0.0;
    return grads;
}

/// Forward pass over one embedded sequence. Only the first n (masked-in)
/// positions are touched, so padding can never leak into the readout; an
/// all-PAD sequence reduces to sigmoid(head bias). dropout_rng enables
/// inter-layer inverted dropout (training only).
inline double forward_one(const Model& model, const EmbeddedSequence& seq,
                          ForwardTrace* trace_out = nullptr, Rng* dropout_rng = nullptr) {
    const ModelSpec& spec = model.spec;
    if (seq.values.cols() != model.input_dim) {
        throw TrainingError("embedded sequence dim " + std::to_string(seq.values.cols()) +
                            " does not match model input dim " +
                            std::to_string(model.input_dim));
    }
    const size_t n = seq.length();
    const size_t h = size_t(spec.hidden);
    const size_t dirs = size_t(spec.directions());

    ForwardTrace trace;
    trace.n = n;
    trace.readout.assign(h * dirs, 0.0);

    Tensor input = Tensor::zeros({n, model.input_dim});
    for (size_t t = 0; t < n; ++t) {
        auto src = seq.values.row(t);
        std::copy(src.begin(), src.end(), input.row(t).begin());
    }

    for (int l = 0; l < spec.layers; ++l) {
        LayerTrace lt;
        lt.input = std::move(input);
        lt.output = Tensor::zeros({n, h * dirs});
        const LayerParams& params = model.params.layers[size_t(l)];
        for (size_t dir = 0; dir < dirs; ++dir) {
            const CellParams& cell = dir == 0 ? params.fwd : params.bwd;
            DirectionTrace& dt = dir == 0 ? lt.fwd : lt.bwd;
            dt.resize(spec.cell, n, h);
            std::vector<double> zero_state(h, 0.0);
            for (size_t k = 0; k < n; ++k) {
                const size_t pos = dir == 0 ? k : n - 1 - k;
                auto slots = detail::slots_at(spec.cell, dt, k);
                std::span<const double> h_prev =
                    k == 0 ? std::span<const double>(zero_state)
                           : std::span<const double>(dt.h.row(k - 1));
                std::span<const double> c_prev =
                    (spec.cell != CellKind::Lstm || k == 0)
                        ? std::span<const double>(zero_state)
                        : std::span<const double>(dt.c.row(k - 1));
                detail::step_cell(spec.cell, cell, lt.input.row(pos), h_prev, c_prev, slots);
                auto out_row = lt.output.row(pos);
                std::copy(slots.h.begin(), slots.h.end(), out_row.begin() + dir * h);
            }
        }
        // Next layer consumes this output, with inter-layer dropout when on.
        const bool is_top = l == spec.layers - 1;
        input = lt.output;
        if (!is_top && spec.dropout > 0.0 && dropout_rng) {
            lt.drop_scale.assign(input.count(), 0.0);
            const double keep_scale = 1.0 / (1.0 - spec.dropout);
            for (size_t i = 0; i < input.count(); ++i) {
                if (dropout_rng->next_double() >= spec.dropout) {
                    lt.drop_scale[i] = keep_scale;
                }
                input.values[i] *= lt.drop_scale[i];
            }
        }
        trace.layers.push_back(std::move(lt));
    }

    // Readout from the top layer's (pre-dropout) output.
    const Tensor& top = trace.layers.back().output;
    if (n > 0) {
        if (spec.readout == Readout::LastHidden) {
            auto last = top.row(n - 1);
            std::copy(last.begin(), last.begin() + h, trace.readout.begin());
            if (dirs == 2) {
                auto first = top.row(0);
                std::copy(first.begin() + h, first.end(), trace.readout.begin() + h);
            }
        } else {
            for (size_t t = 0; t < n; ++t) {
                axpy(1.0 / double(n), top.row(t), trace.readout);
            }
        }
    }
    trace.logit = model.params.head.b + dot(model.params.head.w, trace.readout);
    trace.prob = detail::sigmoid(trace.logit);
    const double prob = trace.prob;
    if (trace_out) *trace_out = std::move(trace);
    return prob;
}

namespace detail {

// BPTT through one layer direction. d_out rows are position-aligned
// gradients flowing into this direction's hidden states; d_input
// accumulates gradients wrt the layer's input sequence.
inline void backward_direction(CellKind kind, const CellParams& p, const Tensor& input,
                               const DirectionTrace& tr, const Tensor& d_out, size_t dir_off,
                               CellParams& grads, Tensor& d_input) {
    const size_t n = tr.h.rows();
    if (n == 0) return;
    const size_t h = tr.h.cols();
    const bool backward_dir = dir_off > 0;
    const size_t gh = size_t(gate_count(kind)) * h;

    std::vector<double> carry_h(h, 0.0);
    std::vector<double> carry_c(h, 0.0);
    std::vector<double> dh(h), da(gh), zero_state(h, 0.0);

    for (size_t k = n; k-- > 0;) {
        const size_t pos = backward_dir ? n - 1 - k : k;
        auto d_row = d_out.row(pos);
        for (size_t i = 0; i < h; ++i) {
            dh[i] = d_row[dir_off + i] + carry_h[i];
            carry_h[i] = 0.0;
        }
        std::span<const double> h_prev =
            k == 0 ? std::span<const double>(zero_state)
                   : std::span<const double>(tr.h.row(k - 1));
        std::span<const double> x = input.row(pos);
        auto dx = d_input.row(pos);

        switch (kind) {
            case CellKind::Rnn: {
                auto hk = tr.h.row(k);
                for (size_t i = 0; i < h; ++i) {
                    da[i] = dh[i] * (1.0 - hk[i] * hk[i]);
                }
                outer_acc(grads.w_in, da, x);
                outer_acc(grads.w_rec, da, h_prev);
                axpy(1.0, da, grads.bias);
                matvec_transpose_acc(p.w_in, da, dx);
                matvec_transpose_acc(p.w_rec, da, carry_h);
                break;
            }
            case CellKind::Gru: {
                auto z = tr.gz.row(k), r = tr.gr.row(k), hcand = tr.hc.row(k),
                     rh = tr.rh.row(k);
                std::vector<double> drh(h), dr(h);
                // h = z*h_prev + (1-z)*hc
                for (size_t i = 0; i < h; ++i) {
                    const double dz = dh[i] * (h_prev[i] - hcand[i]);
                    const double dhc = dh[i] * (1.0 - z[i]);
                    carry_h[i] += dh[i] * z[i];
                    da[2 * h + i] = dhc * (1.0 - hcand[i] * hcand[i]);
                    da[i] = dz * z[i] * (1.0 - z[i]);
                }
                // candidate recurrent term ran over rh = r .* h_prev
                std::fill(drh.begin(), drh.end(), 0.0);
                block_matvec_t(p.w_rec, 2 * h, h, {da.data() + 2 * h, h}, drh);
                for (size_t i = 0; i < h; ++i) {
                    dr[i] = drh[i] * h_prev[i];
                    carry_h[i] += drh[i] * r[i];
                    da[h + i] = dr[i] * r[i] * (1.0 - r[i]);
                }
                outer_acc(grads.w_in, da, x);
                block_outer(grads.w_rec, 0, 2 * h, {da.data(), 2 * h}, h_prev);
                block_outer(grads.w_rec, 2 * h, h, {da.data() + 2 * h, h}, rh);
                axpy(1.0, da, grads.bias);
                matvec_transpose_acc(p.w_in, da, dx);
                block_matvec_t(p.w_rec, 0, 2 * h, {da.data(), 2 * h}, carry_h);
                break;
            }
            case CellKind::Lstm: {
                auto gi = tr.gi.row(k), gf = tr.gf.row(k), gg = tr.gg.row(k),
                     go = tr.go.row(k), tc = tr.tc.row(k);
                std::span<const double> c_prev =
                    k == 0 ? std::span<const double>(zero_state)
                           : std::span<const double>(tr.c.row(k - 1));
                for (size_t i = 0; i < h; ++i) {
                    const double do_ = dh[i] * tc[i];
                    const double dc = carry_c[i] + dh[i] * go[i] * (1.0 - tc[i] * tc[i]);
                    const double di = dc * gg[i];
                    const double df = dc * c_prev[i];
                    const double dg = dc * gi[i];
                    carry_c[i] = dc * gf[i];
                    da[i] = di * gi[i] * (1.0 - gi[i]);
                    da[h + i] = df * gf[i] * (1.0 - gf[i]);
                    da[2 * h + i] = dg * (1.0 - gg[i] * gg[i]);
                    da[3 * h + i] = do_ * go[i] * (1.0 - go[i]);
                }
                outer_acc(grads.w_in, da, x);
                outer_acc(grads.w_rec, da, h_prev);
                axpy(1.0, da, grads.bias);
                matvec_transpose_acc(p.w_in, da, dx);
                matvec_transpose_acc(p.w_rec, da, carry_h);
                break;
            }
        }
    }
}

}  // namespace detail

/// Reverse-mode pass for one sequence. d_logit is the loss gradient at the
/// head's pre-sigmoid output (already scaled by any batch/class weight).
/// Parameter gradients accumulate into `grads`; token-vector gradients
/// accumulate into `emb_grads` when given (PAD row excluded).
inline void backward_one(const Model& model, const ForwardTrace& trace,
                         const EmbeddedSequence& seq, double d_logit, ModelParams& grads,
                         Tensor* emb_grads = nullptr) {
    const ModelSpec& spec = model.spec;
    const size_t n = trace.n;
    const size_t h = size_t(spec.hidden);
    const size_t dirs = size_t(spec.directions());

    grads.head.b += d_logit;
    axpy(d_logit, trace.readout, grads.head.w);
    if (n == 0) return;

    // Gradient flowing into the top layer's output rows.
    Tensor d_out = Tensor::zeros({n, h * dirs});
    const std::vector<double>& w = model.params.head.w;
    if (spec.readout == Readout::LastHidden) {
        auto last = d_out.row(n - 1);
        for (size_t i = 0; i < h; ++i) last[i] += d_logit * w[i];
        if (dirs == 2) {
            auto first = d_out.row(0);
            for (size_t i = 0; i < h; ++i) first[h + i] += d_logit * w[h + i];
        }
    } else {
        for (size_t t = 0; t < n; ++t) {
            axpy(d_logit / double(n), w, d_out.row(t));
        }
    }

    for (int l = spec.layers - 1; l >= 0; --l) {
        const LayerTrace& lt = trace.layers[size_t(l)];
        const LayerParams& params = model.params.layers[size_t(l)];
        LayerParams& layer_grads = grads.layers[size_t(l)];
        Tensor d_input = Tensor::zeros({n, lt.input.cols()});
        detail::backward_direction(spec.cell, params.fwd, lt.input, lt.fwd, d_out, 0,
                                   layer_grads.fwd, d_input);
        if (dirs == 2) {
            detail::backward_direction(spec.cell, params.bwd, lt.input, lt.bwd, d_out, h,
                                       layer_grads.bwd, d_input);
        }
        d_out = std::move(d_input);
        if (l > 0) {
            // d_out now addresses the layer-below's dropped output.
            const LayerTrace& below = trace.layers[size_t(l) - 1];
            if (!below.drop_scale.empty()) {
                for (size_t i = 0; i < d_out.count(); ++i) {
                    d_out.values[i] *= below.drop_scale[i];
                }
            }
        }
    }

    if (emb_grads) {
        for (size_t t = 0; t < n; ++t) {
            const int32_t id = seq.token_ids[t];
            if (id == Vocabulary::kPad) continue;
            axpy(1.0, d_out.row(t), emb_grads->row(size_t(id)));
        }
    }
}

/// Mean binary cross-entropy; probabilities are clamped to
/// [1e-12, 1 - 1e-12] so the loss is finite for every input.
inline double bce_loss(double prob, int label) {
    const double p = std::clamp(prob, 1e-12, 1.0 - 1e-12);
    return label ? -std::log(p) : -std::log(1.0 - p);
}

inline double mean_bce(std::span<const double> probs, std::span<const int> labels) {
    if (probs.size() != labels.size() || probs.empty()) {
        throw TrainingError("loss inputs must be non-empty and of equal length");
    }
    double total = 0.0;
    for (size_t i = 0; i < probs.size(); ++i) {
        total += bce_loss(probs[i], labels[i]);
    }
    return total / double(probs.size());
}

/// One training example: token indices (already truncated) and a 0/1 label
/// where 1 = Positive.
struct Example {
    std::vector<int32_t> token_ids;
    int label = 0;
};

inline double batch_mean_loss(const Model& model, const EmbeddingMatrix& emb,
                              std::span<const Example> batch, size_t max_len) {
    double total = 0.0;
    for (const Example& ex : batch) {
        const double p = forward_one(model, embed_ids(ex.token_ids, emb, max_len));
        total += bce_loss(p, ex.label);
    }
    return total / double(batch.size());
}

/// Central finite-difference verification of the analytic gradients on a
/// tiny batch. Each parameter tensor (and the token-vector block when the
/// embedding is trainable) is scored by ||g_a - g_n|| / max(1e-8, ||g_a|| +
/// ||g_n||); the max over tensors is returned. Pooling per tensor keeps the
/// check meaningful in double precision: individual components with
/// gradients near 1e-9 sit below what central differences can resolve, but
/// any real backward-pass defect shifts a whole tensor's error by orders of
/// magnitude.
inline double gradient_check(Model& model, EmbeddingMatrix& emb,
                             std::span<const Example> batch, size_t max_len,
                             double eps = 1e-5) {
    if (batch.empty()) {
        throw TrainingError("gradient_check needs a non-empty batch");
    }
    ModelParams grads = zeros_like(model);
    Tensor emb_grads = Tensor::zeros({emb.rows.rows(), emb.dim});
    for (const Example& ex : batch) {
        EmbeddedSequence seq = embed_ids(ex.token_ids, emb, max_len);
        ForwardTrace trace;
        const double p = forward_one(model, seq, &trace);
        const double d_logit = (p - double(ex.label)) / double(batch.size());
        backward_one(model, trace, seq, d_logit, grads, emb.trainable ? &emb_grads : nullptr);
    }

    double max_rel = 0.0;
    auto check_span = [&](std::span<double> values, std::span<const double> analytic) {
        double diff2 = 0.0, analytic2 = 0.0, numeric2 = 0.0;
        for (size_t i = 0; i < values.size(); ++i) {
            const double saved = values[i];
            values[i] = saved + eps;
            const double up = batch_mean_loss(model, emb, batch, max_len);
            values[i] = saved - eps;
            const double down = batch_mean_loss(model, emb, batch, max_len);
            values[i] = saved;
            const double numeric = (up - down) / (2.0 * eps);
            diff2 += (analytic[i] - numeric) * (analytic[i] - numeric);
            analytic2 += analytic[i] * analytic[i];
            numeric2 += numeric * numeric;
        }
        const double denom = std::max(1e-8, std::sqrt(analytic2) + std::sqrt(numeric2));
        max_rel = std::max(max_rel, std::sqrt(diff2) / denom);
    };

    auto views = param_views(model.params);
    auto grad_views = param_views(grads);
    for (size_t v = 0; v < views.size(); ++v) {
        check_span(views[v], grad_views[v]);
    }
    if (emb.trainable) {
        // Skip the frozen PAD row.
        const size_t dim = emb.dim;
        check_span({emb.rows.values.data() + dim, emb.rows.values.size() - dim},
                   {emb_grads.values.data() + dim, emb_grads.values.size() - dim});
    }
    return max_rel;
}

struct GradCheckOptions {
    int hidden = 4;
    size_t input_dim = 3;
    size_t seq_len = 5;
    size_t batch = 2;
    size_t vocab = 9;
    double eps = 1e-5;
    bool trainable_embeddings = false;
};

/// Builds a random tiny instance of the given architecture and runs
/// gradient_check on it.
inline double gradient_check_random(ModelSpec spec, uint64_t seed,
                                    const GradCheckOptions& opts = {}) {
    spec.hidden = opts.hidden;
    spec.dropout = 0.0;  // dropout is sampled noise; FD needs a fixed function
    Rng rng(seed);
    Model model = build_model(spec, opts.input_dim, rng.fork("init"));
    Vocabulary vocab;
    for (size_t i = 0; i + 2 < opts.vocab; ++i) {
        vocab.add("t" + std::to_string(i));
    }
    EmbeddingMatrix emb = random_embeddings(vocab, opts.input_dim, rng.fork("emb"));
    emb.trainable = opts.trainable_embeddings;
    Rng data_rng = rng.fork("data");
    std::vector<Example> batch(opts.batch);
    for (size_t b = 0; b < opts.batch; ++b) {
        const size_t len = 1 + data_rng.next_below(opts.seq_len);
        for (size_t t = 0; t < len; ++t) {
            batch[b].token_ids.push_back(
                int32_t(2 + data_rng.next_below(vocab.size() - 2)));
        }
        batch[b].label = int(data_rng.next_below(2));
    }
    return gradient_check(model, emb, batch, opts.seq_len, opts.eps);
}

}  // namespace reactsent
