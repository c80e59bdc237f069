// Training loop for the recurrent classifiers: Adam, global-norm gradient
// clipping, optional class-weighted loss and trainable embeddings, and
// early stopping on validation weighted F1. Fully deterministic for a
// fixed seed: shuffling, init, and dropout each draw from their own
// forked stream, and no iteration order depends on pointer or hash order.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "reactsent/embedding.hpp"
#include "reactsent/metrics.hpp"
#include "reactsent/neural.hpp"
#include "reactsent/rng.hpp"

namespace reactsent {

struct TrainConfig {
    int epochs = 30;
    int batch_size = 64;
    double learning_rate = 1e-3;
    double clip_norm = 5.0;  // <= 0 disables clipping
    int patience = 3;        // epochs without a new best validation F1
    size_t max_len = 128;
    bool class_weighted = false;
    bool train_embeddings = false;
    uint64_t seed = 0;

    void validate() const {
        if (epochs < 1) throw TrainingError("epochs must be >= 1");
        if (batch_size < 1) throw TrainingError("batch size must be >= 1");
        if (!(learning_rate > 0.0)) throw TrainingError("learning rate must be > 0");
        if (patience < 1) throw TrainingError("patience must be >= 1");
        if (max_len < 1) throw TrainingError("max sequence length must be >= 1");
    }
};

/// Tracks the best validation score; stops once `patience` consecutive
/// epochs fail to improve on it. With patience 1 and a strictly
/// decreasing score, training stops after the second epoch.
class EarlyStopping {
public:
    explicit EarlyStopping(int patience) : patience_(patience) {}

    /// Feeds one epoch's score; returns true when it beats the best so far.
    bool update(double score) {
        ++count_;
        if (!best_ || score > *best_) {
            best_ = score;
            best_index_ = count_ - 1;
            stale_ = 0;
            return true;
        }
        ++stale_;
        return false;
    }

    bool should_stop() const { return stale_ >= patience_; }
    int best_index() const { return best_index_; }
    double best_score() const { return best_.value_or(0.0); }

private:
    int patience_;
    std::optional<double> best_;
    int best_index_ = -1;
    int stale_ = 0;
    int count_ = 0;
};

struct EpochStats {
    double train_loss = 0.0;
    double val_f1 = 0.0;
};

struct TrainedModel {
    Model model;
    EmbeddingMatrix embedding;  // fine-tuned copy when train_embeddings was on
    std::vector<EpochStats> history;
    int best_epoch = 0;  // 0-based index into history
};

namespace detail {

/// Adam with bias correction, one slot pair per parameter view.
class AdamState {
public:
    AdamState(ModelParams& params, size_t emb_count) {
        for (auto view : param_views(params)) {
            m_.emplace_back(view.size(), 0.0);
            v_.emplace_back(view.size(), 0.0);
        }
        emb_m_.assign(emb_count, 0.0);
        emb_v_.assign(emb_count, 0.0);
    }

    void step(std::vector<std::span<double>> params, std::vector<std::span<double>> grads,
              std::span<double> emb_params, std::span<const double> emb_grads, double lr) {
        ++t_;
        const double corr1 = 1.0 - std::pow(kBeta1, double(t_));
        const double corr2 = 1.0 - std::pow(kBeta2, double(t_));
        const double alpha = lr * std::sqrt(corr2) / corr1;
        for (size_t s = 0; s < params.size(); ++s) {
            apply(params[s], grads[s], m_[s], v_[s], alpha);
        }
        if (!emb_params.empty()) {
            apply(emb_params, emb_grads, emb_m_, emb_v_, alpha);
        }
    }

private:
    static constexpr double kBeta1 = 0.9;
    static constexpr double kBeta2 = 0.999;
    static constexpr double kEps = 1e-8;

    static void apply(std::span<double> p, std::span<const double> g, std::vector<double>& m,
                      std::vector<double>& v, double alpha) {
        for (size_t i = 0; i < p.size(); ++i) {
            m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * g[i];
            v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * g[i] * g[i];
            p[i] -= alpha * m[i] / (std::sqrt(v[i]) + kEps);
        }
    }

    int64_t t_ = 0;
    std::vector<std::vector<double>> m_, v_;
    std::vector<double> emb_m_, emb_v_;
};

inline double squared_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

inline void scale(std::span<double> v, double factor) {
    for (double& x : v) x *= factor;
}

/// Scales all gradients so their joint L2 norm is at most `max_norm`.
inline void clip_global_norm(std::vector<std::span<double>> grads,
                             std::span<double> emb_grads, double max_norm) {
    if (max_norm <= 0.0) return;
    double total = squared_norm(emb_grads);
    for (auto g : grads) total += squared_norm(g);
    const double norm = std::sqrt(total);
    if (norm <= max_norm) return;
    const double factor = max_norm / norm;
    for (auto g : grads) scale(g, factor);
    scale(emb_grads, factor);
}

inline void zero_params(ModelParams& p) {
    for (auto view : param_views(p)) {
        std::fill(view.begin(), view.end(), 0.0);
    }
}

}  // namespace detail

inline std::vector<double> predict_probs(const Model& model, const EmbeddingMatrix& emb,
                                         std::span<const Example> examples, size_t max_len) {
    std::vector<double> probs;
    probs.reserve(examples.size());
    for (const Example& ex : examples) {
        probs.push_back(forward_one(model, embed_ids(ex.token_ids, emb, max_len)));
    }
    return probs;
}

inline SentimentLabel label_from_prob(double prob) {
    return prob >= 0.5 ? SentimentLabel::Positive : SentimentLabel::Negative;
}

inline std::vector<SentimentLabel> predict_labels(const Model& model,
                                                  const EmbeddingMatrix& emb,
                                                  std::span<const Example> examples,
                                                  size_t max_len) {
    std::vector<SentimentLabel> labels;
    labels.reserve(examples.size());
    for (double p : predict_probs(model, emb, examples, max_len)) {
        labels.push_back(label_from_prob(p));
    }
    return labels;
}

inline MetricsReport evaluate_examples(const Model& model, const EmbeddingMatrix& emb,
                                       std::span<const Example> examples, size_t max_len,
                                       Averaging averaging = Averaging::Weighted,
                                       std::string model_name = {}) {
    std::vector<SentimentLabel> gold;
    gold.reserve(examples.size());
    for (const Example& ex : examples) {
        gold.push_back(ex.label ? SentimentLabel::Positive : SentimentLabel::Negative);
    }
    return score_labels(predict_labels(model, emb, examples, max_len), gold, averaging,
                        std::move(model_name));
}

/// Trains `spec` on `train_set`, early-stopping on validation weighted F1, and
/// returns the parameters from the best epoch. Throws TrainingError when a
/// batch loss goes non-finite, naming the epoch and batch.
inline TrainedModel train(const ModelSpec& spec, const EmbeddingMatrix& embeddings,
                          std::span<const Example> train_set,
                          std::span<const Example> val_set, const TrainConfig& config) {
    spec.validate();
    config.validate();
    if (train_set.empty()) throw TrainingError("training set is empty");
    if (val_set.empty()) throw TrainingError("validation set is empty");

    Rng root(config.seed);
    Rng batch_rng = root.fork("batches");
    Rng dropout_rng = root.fork("dropout");

    TrainedModel result;
    result.embedding = embeddings;
    result.embedding.trainable = config.train_embeddings;
    EmbeddingMatrix& emb = result.embedding;
    Model model = build_model(spec, emb.dim, root.fork("init"));

    // Class weights balance the loss by inverse label frequency,
    // normalized so the two weights average to 1.
    double w_pos = 1.0, w_neg = 1.0;
    if (config.class_weighted) {
        size_t pos = 0;
        for (const Example& ex : train_set) pos += size_t(ex.label != 0);
        const size_t neg = train_set.size() - pos;
        if (pos == 0 || neg == 0) {
            throw TrainingError("class-weighted loss needs both labels in the training set");
        }
        w_pos = double(train_set.size()) / (2.0 * double(pos));
        w_neg = double(train_set.size()) / (2.0 * double(neg));
    }

    ModelParams grads = zeros_like(model);
    Tensor emb_grads;
    if (config.train_embeddings) {
        emb_grads = Tensor::zeros({emb.rows.rows(), emb.dim});
    }
    detail::AdamState adam(model.params,
                           config.train_embeddings ? emb.rows.count() : 0);

    std::vector<size_t> order(train_set.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;

    EarlyStopping stopper(config.patience);
    Model best_model = model;
    EmbeddingMatrix best_emb = emb;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        batch_rng.shuffle(order);
        double epoch_loss = 0.0;
        size_t seen = 0;
        const size_t batches =
            (train_set.size() + size_t(config.batch_size) - 1) / size_t(config.batch_size);
        for (size_t b = 0; b < batches; ++b) {
            const size_t begin = b * size_t(config.batch_size);
            const size_t end = std::min(begin + size_t(config.batch_size), train_set.size());
            detail::zero_params(grads);
            if (config.train_embeddings) {
                std::fill(emb_grads.values.begin(), emb_grads.values.end(), 0.0);
            }
            double batch_loss = 0.0;
            for (size_t i = begin; i < end; ++i) {
                const Example& ex = train_set[order[i]];
                EmbeddedSequence seq = embed_ids(ex.token_ids, emb, config.max_len);
                ForwardTrace trace;
                const double p = forward_one(model, seq, &trace,
                                             spec.dropout > 0.0 ? &dropout_rng : nullptr);
                const double weight = ex.label ? w_pos : w_neg;
                batch_loss += weight * bce_loss(p, ex.label);
                const double d_logit =
                    weight * (trace.prob - double(ex.label)) / double(end - begin);
                backward_one(model, trace, seq, d_logit, grads,
                             config.train_embeddings ? &emb_grads : nullptr);
            }
            batch_loss /= double(end - begin);
            if (!std::isfinite(batch_loss)) {
                throw TrainingError("training diverged: non-finite loss at epoch " +
                                    std::to_string(epoch + 1) + ", batch " +
                                    std::to_string(b + 1));
            }
            epoch_loss += batch_loss * double(end - begin);
            seen += end - begin;

            auto grad_views = param_views(grads);
            std::span<double> emb_grad_span =
                config.train_embeddings
                    // PAD stays identically zero: never updated, never clipped.
                    ? std::span<double>(emb_grads.values.data() + emb.dim,
                                        emb_grads.values.size() - emb.dim)
                    : std::span<double>();
            detail::clip_global_norm(grad_views, emb_grad_span, config.clip_norm);
            std::span<double> emb_param_span =
                config.train_embeddings
                    ? std::span<double>(emb.rows.values.data() + emb.dim,
                                        emb.rows.values.size() - emb.dim)
                    : std::span<double>();
            adam.step(param_views(model.params), grad_views, emb_param_span, emb_grad_span,
                      config.learning_rate);
        }

        EpochStats stats;
        stats.train_loss = epoch_loss / double(seen);
        stats.val_f1 =
            evaluate_examples(model, emb, val_set, config.max_len, Averaging::Weighted).f1;
        result.history.push_back(stats);
        if (stopper.update(stats.val_f1)) {
            best_model = model;
            if (config.train_embeddings) best_emb = emb;
        }
        if (stopper.should_stop()) break;
    }

    result.model = std::move(best_model);
    if (config.train_embeddings) {
        result.embedding = std::move(best_emb);
    }
    result.best_epoch = stopper.best_index();
    return result;
}

}  // namespace reactsent
