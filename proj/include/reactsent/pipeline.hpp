// End-to-end glue: cleaned/labeled corpus records, artifact files with
// embedded provenance, deterministic three-way splits, the model registry,
// and model persistence. Every artifact this module writes is a JSONL
// file whose first record is {"_meta": {...}} carrying the seed and the
// config digest that produced it; readers skip such records. All object
// keys are emitted in sorted order and no timestamps are recorded, so
// identical inputs and seed yield byte-identical files.
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "reactsent/annotate.hpp"
#include "reactsent/baselines.hpp"
#include "reactsent/corpus.hpp"
#include "reactsent/embedding.hpp"
#include "reactsent/metrics.hpp"
#include "reactsent/neural.hpp"
#include "reactsent/normalizer.hpp"
#include "reactsent/train.hpp"

namespace reactsent {

class PipelineError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Cleaned and labeled corpora
// ---------------------------------------------------------------------------

/// A post after text cleaning; reaction counts ride along so annotation
/// can run on the cleaned file alone.
struct CleanedPost {
    std::string post_id;
    std::vector<std::string> tokens;
    ReactionCounts reactions;
};

struct CleanedCorpus {
    std::vector<CleanedPost> posts;
};

inline CleanedCorpus preprocess_corpus(const Corpus& corpus, const NormalizerConfig& config) {
    CleanedCorpus cleaned;
    cleaned.posts.reserve(corpus.posts.size());
    for (const RawPost& post : corpus.posts) {
        CleanedPost cp;
        cp.post_id = post.post_id;
        cp.tokens = normalize(post.message, config).tokens;
        cp.reactions = ReactionCounts::from_post(post);
        cleaned.posts.push_back(std::move(cp));
    }
    return cleaned;
}

/// A post with its distant-supervision label. `mix` is the normalized
/// considered-reaction distribution [love, wow, sad, angry]; posts
/// labeled under the `positive` zero policy carry the uniform mix and
/// zero_defaulted = true (and are excluded from baseline fitting).
struct LabeledPost {
    std::string post_id;
    std::vector<std::string> tokens;
    double sen = 0.0;
    SentimentLabel label = SentimentLabel::Positive;
    std::array<double, 4> mix{0.25, 0.25, 0.25, 0.25};
    bool zero_defaulted = false;
};

struct LabeledCorpus {
    std::vector<LabeledPost> posts;
    LabelHistogram histogram;
};

inline LabeledCorpus label_corpus(const CleanedCorpus& cleaned, ZeroPolicy policy) {
    LabeledCorpus labeled;
    for (const CleanedPost& post : cleaned.posts) {
        LabeledPost lp;
        lp.post_id = post.post_id;
        lp.tokens = post.tokens;
        if (post.reactions.considered_total() == 0) {
            if (policy == ZeroPolicy::Drop) continue;
            lp.zero_defaulted = true;  // sen treated as 0 -> Positive
        } else {
            const SentimentScore s = score(post.reactions);
            lp.sen = s.sen;
            lp.label = classify(s);
            lp.mix = s.normalized();
        }
        if (lp.label == SentimentLabel::Positive) {
            ++labeled.histogram.positive;
        } else {
            ++labeled.histogram.negative;
        }
        labeled.posts.push_back(std::move(lp));
    }
    return labeled;
}

/// Training documents for the baselines; zero-defaulted posts carry no
/// observed reaction distribution and are skipped.
inline std::vector<BaselineDoc> to_baseline_docs(const LabeledCorpus& corpus) {
    std::vector<BaselineDoc> docs;
    for (const LabeledPost& post : corpus.posts) {
        if (post.zero_defaulted) continue;
        docs.push_back({post.tokens, post.mix});
    }
    return docs;
}

inline std::vector<Example> to_examples(const LabeledCorpus& corpus, const Vocabulary& vocab,
                                        size_t max_len) {
    std::vector<Example> examples;
    examples.reserve(corpus.posts.size());
    for (const LabeledPost& post : corpus.posts) {
        examples.push_back({to_token_ids(post.tokens, vocab, max_len),
                            post.label == SentimentLabel::Positive ? 1 : 0});
    }
    return examples;
}

// ---------------------------------------------------------------------------
// Artifact provenance
// ---------------------------------------------------------------------------

struct ArtifactMeta {
    std::string kind;
    uint64_t seed = 0;
    std::string config_digest;
};

namespace detail {

inline std::string hex16(uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

inline std::string meta_line(const ArtifactMeta& meta) {
    nlohmann::json j = {{"_meta",
                         {{"kind", meta.kind},
                          {"seed", meta.seed},
                          {"config_digest", meta.config_digest}}}};
    return j.dump();
}

inline bool is_meta_record(const nlohmann::json& record) {
    return record.is_object() && record.contains("_meta");
}

inline std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw PipelineError("cannot open for writing: " + path.string());
    }
    return out;
}

inline std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw PipelineError("cannot open: " + path.string());
    }
    return in;
}

inline nlohmann::json parse_record(const std::string& line, const std::filesystem::path& path,
                                   size_t row) {
    nlohmann::json record = nlohmann::json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.is_object()) {
        throw PipelineError("malformed record at " + path.string() + ":" +
                            std::to_string(row));
    }
    return record;
}

/// Streams the non-meta records of a JSONL artifact to `fn(record, row)`.
template <typename Fn>
void for_each_record(const std::filesystem::path& path, Fn&& fn) {
    std::ifstream in = open_in(path);
    std::string line;
    size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        nlohmann::json record = parse_record(line, path, row);
        if (is_meta_record(record)) continue;
        fn(record, row);
    }
}

inline std::string join_tokens_space(const std::vector<std::string>& tokens) {
    std::string out;
    for (size_t i = 0; i < tokens.size(); ++i) {
        if (i > 0) out += ' ';
        out += tokens[i];
    }
    return out;
}

inline std::vector<std::string> split_tokens_space(const std::string& joined) {
    std::vector<std::string> tokens;
    std::istringstream in(joined);
    std::string token;
    while (in >> token) tokens.push_back(std::move(token));
    return tokens;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Cleaned / labeled corpus files
// ---------------------------------------------------------------------------

inline void write_cleaned(const std::filesystem::path& path, const CleanedCorpus& corpus,
                          const ArtifactMeta& meta) {
    std::ofstream out = detail::open_out(path);
    out << detail::meta_line(meta) << '\n';
    for (const CleanedPost& post : corpus.posts) {
        const ReactionCounts& r = post.reactions;
        nlohmann::json record = {{"post_id", post.post_id},
                                 {"tokens", detail::join_tokens_space(post.tokens)},
                                 {"like", r.like},       {"love", r.love},
                                 {"wow", r.wow},         {"haha", r.haha},
                                 {"sad", r.sad},         {"angry", r.angry},
                                 {"thankful", r.thankful}};
        out << record.dump() << '\n';
    }
}

inline CleanedCorpus read_cleaned(const std::filesystem::path& path) {
    CleanedCorpus corpus;
    detail::for_each_record(path, [&](const nlohmann::json& record, size_t row) {
        try {
            CleanedPost post;
            post.post_id = record.at("post_id").get<std::string>();
            post.tokens = detail::split_tokens_space(record.at("tokens").get<std::string>());
            ReactionCounts& r = post.reactions;
            r.like = record.at("like").get<int64_t>();
            r.love = record.at("love").get<int64_t>();
            r.wow = record.at("wow").get<int64_t>();
            r.haha = record.at("haha").get<int64_t>();
            r.sad = record.at("sad").get<int64_t>();
            r.angry = record.at("angry").get<int64_t>();
            r.thankful = record.at("thankful").get<int64_t>();
            corpus.posts.push_back(std::move(post));
        } catch (const nlohmann::json::exception& e) {
            throw PipelineError("bad cleaned-corpus record at " + path.string() + ":" +
                                std::to_string(row) + ": " + e.what());
        }
    });
    return corpus;
}

inline void write_labeled(const std::filesystem::path& path, const LabeledCorpus& corpus,
                          const ArtifactMeta& meta) {
    std::ofstream out = detail::open_out(path);
    out << detail::meta_line(meta) << '\n';
    for (const LabeledPost& post : corpus.posts) {
        nlohmann::json record = {{"post_id", post.post_id},
                                 {"tokens", detail::join_tokens_space(post.tokens)},
                                 {"sen", post.sen},
                                 {"label", std::string(label_name(post.label))},
                                 {"mix", post.mix},
                                 {"zero_defaulted", post.zero_defaulted}};
        out << record.dump() << '\n';
    }
}

inline LabeledCorpus read_labeled(const std::filesystem::path& path) {
    LabeledCorpus corpus;
    detail::for_each_record(path, [&](const nlohmann::json& record, size_t row) {
        try {
            LabeledPost post;
            post.post_id = record.at("post_id").get<std::string>();
            post.tokens = detail::split_tokens_space(record.at("tokens").get<std::string>());
            post.sen = record.at("sen").get<double>();
            post.label = label_from_name(record.at("label").get<std::string>());
            post.mix = record.at("mix").get<std::array<double, 4>>();
            post.zero_defaulted = record.at("zero_defaulted").get<bool>();
            if (post.label == SentimentLabel::Positive) {
                ++corpus.histogram.positive;
            } else {
                ++corpus.histogram.negative;
            }
            corpus.posts.push_back(std::move(post));
        } catch (const nlohmann::json::exception& e) {
            throw PipelineError("bad labeled-corpus record at " + path.string() + ":" +
                                std::to_string(row) + ": " + e.what());
        }
    });
    return corpus;
}

// ---------------------------------------------------------------------------
// Splitting labeled corpora
// ---------------------------------------------------------------------------

struct LabeledSplit {
    LabeledCorpus train, val, test;
};

/// Identical shuffle-and-slice procedure as the raw-corpus split (same
/// seed and size give the same index partition).
inline LabeledSplit split_labeled(const LabeledCorpus& corpus, const SplitSpec& spec) {
    spec.validate();
    if (corpus.posts.size() < 10) {
        throw CorpusError("corpus too small to split: " +
                          std::to_string(corpus.posts.size()) + " posts (need >= 10)");
    }
    const SplitSizes sizes = split_sizes(corpus.posts.size(), spec);
    std::vector<size_t> order(corpus.posts.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng(spec.seed).fork("split").shuffle(order);

    LabeledSplit split;
    auto add = [](LabeledCorpus& part, const LabeledPost& post) {
        if (post.label == SentimentLabel::Positive) {
            ++part.histogram.positive;
        } else {
            ++part.histogram.negative;
        }
        part.posts.push_back(post);
    };
    for (size_t i = 0; i < order.size(); ++i) {
        const LabeledPost& post = corpus.posts[order[i]];
        if (i < sizes.train) {
            add(split.train, post);
        } else if (i < sizes.train + sizes.val) {
            add(split.val, post);
        } else {
            add(split.test, post);
        }
    }
    return split;
}

inline void write_split_manifest(const std::filesystem::path& path, const LabeledSplit& split,
                                 const SplitSpec& spec, const ArtifactMeta& meta) {
    auto ids = [](const LabeledCorpus& part) {
        std::vector<std::string> out;
        out.reserve(part.posts.size());
        for (const LabeledPost& post : part.posts) out.push_back(post.post_id);
        return out;
    };
    std::ofstream out = detail::open_out(path);
    out << detail::meta_line(meta) << '\n';
    nlohmann::json record = {
        {"seed", spec.seed},
        {"dev_test", {spec.dev_test_ratio.first, spec.dev_test_ratio.second}},
        {"train_val", {spec.train_val_ratio.first, spec.train_val_ratio.second}},
        {"counts",
         {{"train", split.train.posts.size()},
          {"val", split.val.posts.size()},
          {"test", split.test.posts.size()}}},
        {"train", ids(split.train)},
        {"val", ids(split.val)},
        {"test", ids(split.test)}};
    out << record.dump() << '\n';
}

// ---------------------------------------------------------------------------
// Pipeline configuration
// ---------------------------------------------------------------------------

/// Resolved run configuration. The canonical JSON rendering of this
/// struct (sorted keys) is hashed into the config digest embedded in
/// every artifact.
struct PipelineConfig {
    std::string corpus_path;
    CorpusFormat corpus_format = CorpusFormat::DelimitedTable;
    std::string delimiter = ",";
    std::string stopwords_path;   // empty = no stopword stage input
    std::string embeddings_path;  // empty = random embeddings
    std::string out_dir = ".";
    bool filter = true;  // drop posts with no considered reactions / empty text
    bool strip_nonprintable = true;
    bool remove_patterns = true;
    bool remove_numeric_tokens = true;
    bool remove_non_sinhala_tokens = true;
    bool remove_stopwords = true;
    ZeroPolicy zero_policy = ZeroPolicy::Drop;
    SplitSpec split;
    std::vector<std::string> models = {"core", "star", "lstm"};
    int hidden = 128;
    std::string readout = "last-hidden";
    double dropout = 0.0;
    size_t embedding_dim = 300;
    size_t min_count = 1;
    TrainConfig train;
    Averaging averaging = Averaging::Weighted;
    uint64_t seed = 0;
};

inline std::string_view readout_name(Readout r) {
    return r == Readout::LastHidden ? "last-hidden" : "mean-pool";
}

inline Readout readout_from_name(std::string_view name) {
    if (name == "last-hidden") return Readout::LastHidden;
    if (name == "mean-pool") return Readout::MeanPool;
    throw PipelineError("unknown readout: '" + std::string(name) + "'");
}

inline std::string_view corpus_format_name(CorpusFormat f) {
    return f == CorpusFormat::DelimitedTable ? "delimited-table" : "record-per-line";
}

inline CorpusFormat corpus_format_from_name(std::string_view name) {
    if (name == "delimited-table") return CorpusFormat::DelimitedTable;
    if (name == "record-per-line") return CorpusFormat::RecordPerLine;
    throw PipelineError("unknown corpus format: '" + std::string(name) + "'");
}

inline nlohmann::json config_json(const PipelineConfig& c) {
    return {
        {"corpus", c.corpus_path},
        {"format", std::string(corpus_format_name(c.corpus_format))},
        {"delimiter", c.delimiter},
        {"stopwords", c.stopwords_path},
        {"embeddings", c.embeddings_path},
        {"out_dir", c.out_dir},
        {"filter", c.filter},
        {"normalizer",
         {{"strip_nonprintable", c.strip_nonprintable},
          {"remove_patterns", c.remove_patterns},
          {"remove_numeric_tokens", c.remove_numeric_tokens},
          {"remove_non_sinhala_tokens", c.remove_non_sinhala_tokens},
          {"remove_stopwords", c.remove_stopwords}}},
        {"zero_policy", std::string(zero_policy_name(c.zero_policy))},
        {"split",
         {{"dev_test", {c.split.dev_test_ratio.first, c.split.dev_test_ratio.second}},
          {"train_val", {c.split.train_val_ratio.first, c.split.train_val_ratio.second}}}},
        {"models", c.models},
        {"model", {{"hidden", c.hidden}, {"readout", c.readout}, {"dropout", c.dropout}}},
        {"embedding_dim", c.embedding_dim},
        {"min_count", c.min_count},
        {"train",
         {{"epochs", c.train.epochs},
          {"batch_size", c.train.batch_size},
          {"learning_rate", c.train.learning_rate},
          {"clip_norm", c.train.clip_norm},
          {"patience", c.train.patience},
          {"max_len", c.train.max_len},
          {"class_weighted", c.train.class_weighted},
          {"train_embeddings", c.train.train_embeddings}}},
        {"averaging", std::string(averaging_name(c.averaging))},
        {"seed", c.seed}};
}

/// 16-hex-digit digest of the canonical config rendering.
inline std::string config_digest(const PipelineConfig& c) {
    return detail::hex16(fnv1a64(config_json(c).dump()));
}

/// Applies a parsed config file onto defaults. Unknown keys are errors so
/// typos cannot silently fall back to defaults.
inline PipelineConfig parse_config(const nlohmann::json& j) {
    PipelineConfig c;
    if (!j.is_object()) throw PipelineError("config root must be an object");
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "corpus") c.corpus_path = value.get<std::string>();
            else if (key == "format") c.corpus_format = corpus_format_from_name(value.get<std::string>());
            else if (key == "delimiter") c.delimiter = value.get<std::string>();
            else if (key == "stopwords") c.stopwords_path = value.get<std::string>();
            else if (key == "embeddings") c.embeddings_path = value.get<std::string>();
            else if (key == "out_dir") c.out_dir = value.get<std::string>();
            else if (key == "filter") c.filter = value.get<bool>();
            else if (key == "normalizer") {
                for (const auto& [nk, nv] : value.items()) {
                    if (nk == "strip_nonprintable") c.strip_nonprintable = nv.get<bool>();
                    else if (nk == "remove_patterns") c.remove_patterns = nv.get<bool>();
                    else if (nk == "remove_numeric_tokens") c.remove_numeric_tokens = nv.get<bool>();
                    else if (nk == "remove_non_sinhala_tokens") c.remove_non_sinhala_tokens = nv.get<bool>();
                    else if (nk == "remove_stopwords") c.remove_stopwords = nv.get<bool>();
                    else throw PipelineError("unknown config key: normalizer." + nk);
                }
            } else if (key == "zero_policy") {
                c.zero_policy = zero_policy_from_name(value.get<std::string>());
            } else if (key == "split") {
                for (const auto& [sk, sv] : value.items()) {
                    if (sk == "dev_test") {
                        c.split.dev_test_ratio = {sv.at(0).get<uint32_t>(),
                                                  sv.at(1).get<uint32_t>()};
                    } else if (sk == "train_val") {
                        c.split.train_val_ratio = {sv.at(0).get<uint32_t>(),
                                                   sv.at(1).get<uint32_t>()};
                    } else {
                        throw PipelineError("unknown config key: split." + sk);
                    }
                }
            } else if (key == "models") {
                c.models = value.get<std::vector<std::string>>();
            } else if (key == "model") {
                for (const auto& [mk, mv] : value.items()) {
                    if (mk == "hidden") c.hidden = mv.get<int>();
                    else if (mk == "readout") c.readout = mv.get<std::string>();
                    else if (mk == "dropout") c.dropout = mv.get<double>();
                    else throw PipelineError("unknown config key: model." + mk);
                }
            } else if (key == "embedding_dim") {
                c.embedding_dim = value.get<size_t>();
            } else if (key == "min_count") {
                c.min_count = value.get<size_t>();
            } else if (key == "train") {
                for (const auto& [tk, tv] : value.items()) {
                    if (tk == "epochs") c.train.epochs = tv.get<int>();
                    else if (tk == "batch_size") c.train.batch_size = tv.get<int>();
                    else if (tk == "learning_rate") c.train.learning_rate = tv.get<double>();
                    else if (tk == "clip_norm") c.train.clip_norm = tv.get<double>();
                    else if (tk == "patience") c.train.patience = tv.get<int>();
                    else if (tk == "max_len") c.train.max_len = tv.get<size_t>();
                    else if (tk == "class_weighted") c.train.class_weighted = tv.get<bool>();
                    else if (tk == "train_embeddings") c.train.train_embeddings = tv.get<bool>();
                    else throw PipelineError("unknown config key: train." + tk);
                }
            } else if (key == "averaging") {
                c.averaging = averaging_from_name(value.get<std::string>());
            } else if (key == "seed") {
                c.seed = value.get<uint64_t>();
            } else {
                throw PipelineError("unknown config key: " + key);
            }
        } catch (const nlohmann::json::exception& e) {
            throw PipelineError("bad config value for '" + key + "': " + e.what());
        }
    }
    if (c.delimiter.size() != 1) {
        throw PipelineError("delimiter must be a single character");
    }
    // One root seed drives every stage.
    c.split.seed = c.seed;
    c.train.seed = c.seed;
    return c;
}

inline PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in = detail::open_in(path);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) {
        throw PipelineError("config file is not valid JSON: " + path.string());
    }
    return parse_config(j);
}

inline NormalizerConfig make_normalizer_config(const PipelineConfig& c) {
    NormalizerConfig nc;
    nc.strip_nonprintable = c.strip_nonprintable;
    nc.remove_patterns = c.remove_patterns;
    nc.remove_numeric_tokens = c.remove_numeric_tokens;
    nc.remove_non_sinhala_tokens = c.remove_non_sinhala_tokens;
    nc.remove_stopwords = c.remove_stopwords;
    if (!c.stopwords_path.empty()) {
        nc.stopwords = load_stopwords(c.stopwords_path);
    }
    return nc;
}

// ---------------------------------------------------------------------------
// Model registry
// ---------------------------------------------------------------------------

struct ModelEntry {
    std::string key;      // CLI/config identifier
    std::string display;  // comparison-table name
    bool neural = false;
    CellKind cell = CellKind::Rnn;
    bool bidirectional = false;
    int layers = 1;
};

inline const std::vector<ModelEntry>& model_registry() {
    static const std::vector<ModelEntry> entries = {
        {"core", "Core Reaction Set", false, CellKind::Rnn, false, 1},
        {"star", "Star Rating", false, CellKind::Rnn, false, 1},
        {"rnn", "RNN", true, CellKind::Rnn, false, 1},
        {"gru", "GRU", true, CellKind::Gru, false, 1},
        {"lstm", "LSTM", true, CellKind::Lstm, false, 1},
        {"bilstm", "BiLSTM", true, CellKind::Lstm, true, 1},
        {"stacked-lstm-2", "Stacked LSTM 2", true, CellKind::Lstm, false, 2},
        {"stacked-lstm-3", "Stacked LSTM 3", true, CellKind::Lstm, false, 3},
        {"stacked-bilstm-2", "Stacked BiLSTM 2", true, CellKind::Lstm, true, 2},
        {"stacked-bilstm-3", "Stacked BiLSTM 3", true, CellKind::Lstm, true, 3},
    };
    return entries;
}

inline const ModelEntry& resolve_model(std::string_view key) {
    for (const ModelEntry& entry : model_registry()) {
        if (entry.key == key) return entry;
    }
    std::string known;
    for (const ModelEntry& entry : model_registry()) {
        if (!known.empty()) known += ", ";
        known += entry.key;
    }
    throw PipelineError("unknown model '" + std::string(key) + "' (known: " + known + ")");
}

inline ModelSpec spec_for(const ModelEntry& entry, const PipelineConfig& config) {
    ModelSpec spec;
    spec.cell = entry.cell;
    spec.bidirectional = entry.bidirectional;
    spec.layers = entry.layers;
    spec.hidden = config.hidden;
    spec.readout = readout_from_name(config.readout);
    spec.dropout = config.dropout;
    spec.name = entry.display;
    return spec;
}

// ---------------------------------------------------------------------------
// Model persistence
// ---------------------------------------------------------------------------

inline constexpr int kModelFileVersion = 1;

namespace detail {

inline nlohmann::json cell_to_json(const CellParams& cell) {
    return {{"w_in", cell.w_in.values},
            {"w_rec", cell.w_rec.values},
            {"bias", cell.bias}};
}

inline void cell_from_json(const nlohmann::json& j, CellParams& cell) {
    std::vector<double> w_in = j.at("w_in").get<std::vector<double>>();
    std::vector<double> w_rec = j.at("w_rec").get<std::vector<double>>();
    if (w_in.size() != cell.w_in.count() || w_rec.size() != cell.w_rec.count()) {
        throw PipelineError("model file parameter shape mismatch");
    }
    cell.w_in.values = std::move(w_in);
    cell.w_rec.values = std::move(w_rec);
    std::vector<double> bias = j.at("bias").get<std::vector<double>>();
    if (bias.size() != cell.bias.size()) {
        throw PipelineError("model file parameter shape mismatch");
    }
    cell.bias = std::move(bias);
}

}  // namespace detail

/// Everything needed to run a trained recurrent classifier later:
/// registry key, architecture, vocabulary, (possibly fine-tuned)
/// embedding matrix, parameters, and training history.
struct SavedNeuralModel {
    std::string key;
    Model model;
    Vocabulary vocab;
    EmbeddingMatrix embedding;
    std::vector<EpochStats> history;
    int best_epoch = 0;
    size_t max_len = 128;
};

inline void save_neural_model(const std::filesystem::path& path, const SavedNeuralModel& m,
                              const ArtifactMeta& meta) {
    nlohmann::json layers = nlohmann::json::array();
    for (const LayerParams& layer : m.model.params.layers) {
        nlohmann::json lj = {{"fwd", detail::cell_to_json(layer.fwd)}};
        if (m.model.spec.bidirectional) lj["bwd"] = detail::cell_to_json(layer.bwd);
        layers.push_back(std::move(lj));
    }
    nlohmann::json history = nlohmann::json::array();
    for (const EpochStats& e : m.history) {
        history.push_back({{"train_loss", e.train_loss}, {"val_f1", e.val_f1}});
    }
    nlohmann::json record = {
        {"version", kModelFileVersion},
        {"key", m.key},
        {"spec",
         {{"cell", std::string(cell_name(m.model.spec.cell))},
          {"bidirectional", m.model.spec.bidirectional},
          {"layers", m.model.spec.layers},
          {"hidden", m.model.spec.hidden},
          {"readout", std::string(readout_name(m.model.spec.readout))},
          {"dropout", m.model.spec.dropout},
          {"name", m.model.spec.name}}},
        {"max_len", m.max_len},
        {"vocab", m.vocab.tokens()},
        {"vocab_hash", detail::hex16(m.vocab.hash())},
        {"embedding",
         {{"dim", m.embedding.dim},
          {"trainable", m.embedding.trainable},
          {"values", m.embedding.rows.values}}},
        {"params", {{"layers", std::move(layers)},
                    {"head", {{"w", m.model.params.head.w}, {"b", m.model.params.head.b}}}}},
        {"history", std::move(history)},
        {"best_epoch", m.best_epoch}};
    std::ofstream out = detail::open_out(path);
    out << detail::meta_line(meta) << '\n';
    out << record.dump() << '\n';
}

inline SavedNeuralModel load_neural_model(const std::filesystem::path& path) {
    std::optional<nlohmann::json> record;
    detail::for_each_record(path, [&](const nlohmann::json& r, size_t) {
        if (record) throw PipelineError("model file has more than one record: " + path.string());
        record = r;
    });
    if (!record) throw PipelineError("model file has no record: " + path.string());
    try {
        const nlohmann::json& j = *record;
        const int version = j.at("version").get<int>();
        if (version != kModelFileVersion) {
            throw PipelineError("unsupported model file version " + std::to_string(version) +
                                " (expected " + std::to_string(kModelFileVersion) + ")");
        }
        SavedNeuralModel m;
        m.key = j.at("key").get<std::string>();
        const nlohmann::json& spec = j.at("spec");
        m.model.spec.cell = cell_from_name(spec.at("cell").get<std::string>());
        m.model.spec.bidirectional = spec.at("bidirectional").get<bool>();
        m.model.spec.layers = spec.at("layers").get<int>();
        m.model.spec.hidden = spec.at("hidden").get<int>();
        m.model.spec.readout = readout_from_name(spec.at("readout").get<std::string>());
        m.model.spec.dropout = spec.at("dropout").get<double>();
        m.model.spec.name = spec.at("name").get<std::string>();
        m.model.spec.validate();
        m.max_len = j.at("max_len").get<size_t>();

        // The stored token list includes the two reserved entries; a fresh
        // Vocabulary already holds them at indices 0 and 1.
        const auto stored = j.at("vocab").get<std::vector<std::string>>();
        if (stored.size() < 2 || stored[0] != m.vocab.token(Vocabulary::kPad) ||
            stored[1] != m.vocab.token(Vocabulary::kOov)) {
            throw PipelineError("model file vocabulary is missing reserved entries: " +
                                path.string());
        }
        for (size_t i = 2; i < stored.size(); ++i) {
            m.vocab.add(stored[i]);
        }
        if (detail::hex16(m.vocab.hash()) != j.at("vocab_hash").get<std::string>()) {
            throw PipelineError("model file vocabulary hash mismatch: " + path.string());
        }

        const nlohmann::json& emb = j.at("embedding");
        m.embedding.dim = emb.at("dim").get<size_t>();
        m.embedding.trainable = emb.at("trainable").get<bool>();
        std::vector<double> values = emb.at("values").get<std::vector<double>>();
        if (values.size() != m.vocab.size() * m.embedding.dim) {
            throw PipelineError("model file embedding shape mismatch: " + path.string());
        }
        m.embedding.rows = Tensor::zeros({m.vocab.size(), m.embedding.dim});
        m.embedding.rows.values = std::move(values);

        m.model.input_dim = m.embedding.dim;
        Rng dummy(0);
        Model shaped = build_model(m.model.spec, m.model.input_dim, dummy);
        m.model.params = std::move(shaped.params);
        const nlohmann::json& params = j.at("params");
        const nlohmann::json& layers = params.at("layers");
        if (layers.size() != m.model.params.layers.size()) {
            throw PipelineError("model file layer count mismatch: " + path.string());
        }
        for (size_t l = 0; l < layers.size(); ++l) {
            detail::cell_from_json(layers[l].at("fwd"), m.model.params.layers[l].fwd);
            if (m.model.spec.bidirectional) {
                detail::cell_from_json(layers[l].at("bwd"), m.model.params.layers[l].bwd);
            }
        }
        std::vector<double> head_w = params.at("head").at("w").get<std::vector<double>>();
        if (head_w.size() != m.model.params.head.w.size()) {
            throw PipelineError("model file head shape mismatch: " + path.string());
        }
        m.model.params.head.w = std::move(head_w);
        m.model.params.head.b = params.at("head").at("b").get<double>();

        for (const nlohmann::json& e : j.at("history")) {
            m.history.push_back({e.at("train_loss").get<double>(),
                                 e.at("val_f1").get<double>()});
        }
        m.best_epoch = j.at("best_epoch").get<int>();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw PipelineError("bad model file " + path.string() + ": " + e.what());
    }
}

// Baseline model files reuse the models' own record-per-line dumps,
// prefixed with the provenance record.

inline void save_baseline(const std::filesystem::path& path, const TokenReactionTable& model,
                          const ArtifactMeta& meta) {
    std::ofstream out = detail::open_out(path);
    out << detail::meta_line(meta) << '\n';
    model.save(out);
}

inline void save_baseline(const std::filesystem::path& path, const StarModel& model,
                          const ArtifactMeta& meta) {
    std::ofstream out = detail::open_out(path);
    out << detail::meta_line(meta) << '\n';
    model.save(out);
}

namespace detail {

/// Strips leading provenance records so the baselines' own loaders see
/// their header first.
inline std::istringstream baseline_payload(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    std::string line, payload;
    bool body = false;
    size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!body) {
            if (line.empty()) continue;
            nlohmann::json record = parse_record(line, path, row);
            if (is_meta_record(record)) continue;
            body = true;
        }
        payload += line;
        payload += '\n';
    }
    return std::istringstream(std::move(payload));
}

}  // namespace detail

inline TokenReactionTable load_core_model(const std::filesystem::path& path) {
    std::istringstream payload = detail::baseline_payload(path);
    return TokenReactionTable::load(payload);
}

inline StarModel load_star_model(const std::filesystem::path& path) {
    std::istringstream payload = detail::baseline_payload(path);
    return StarModel::load(payload);
}

/// Kind tag from an artifact's provenance record ("cleaned-corpus",
/// "neural-model", ...); empty when the file carries none.
inline std::string read_artifact_kind(const std::filesystem::path& path) {
    std::ifstream in = detail::open_in(path);
    std::string line;
    size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        nlohmann::json record = detail::parse_record(line, path, row);
        if (!detail::is_meta_record(record)) return "";
        return record.at("_meta").value("kind", std::string());
    }
    return "";
}

inline void write_history(const std::filesystem::path& path,
                          const std::vector<EpochStats>& history, int best_epoch,
                          const ArtifactMeta& meta) {
    std::ofstream out = detail::open_out(path);
    out << detail::meta_line(meta) << '\n';
    for (size_t e = 0; e < history.size(); ++e) {
        nlohmann::json record = {{"epoch", e + 1},
                                 {"train_loss", history[e].train_loss},
                                 {"val_f1", history[e].val_f1}};
        out << record.dump() << '\n';
    }
    nlohmann::json best = {{"best_epoch", best_epoch + 1}};
    out << best.dump() << '\n';
}

// ---------------------------------------------------------------------------
// Metrics records
// ---------------------------------------------------------------------------

inline void write_metrics(const std::filesystem::path& path,
                          const std::vector<MetricsReport>& ranked,
                          const ArtifactMeta& meta) {
    std::ofstream out = detail::open_out(path);
    out << detail::meta_line(meta) << '\n';
    for (const MetricsReport& r : ranked) {
        auto class_json = [](const ClassMetrics& c) {
            return nlohmann::json{{"support", c.support},
                                  {"precision", c.precision},
                                  {"recall", c.recall},
                                  {"f1", c.f1}};
        };
        nlohmann::json record = {{"model", r.model},
                                 {"averaging", std::string(averaging_name(r.averaging))},
                                 {"total", r.total},
                                 {"accuracy", r.accuracy},
                                 {"recall", r.recall},
                                 {"precision", r.precision},
                                 {"f1", r.f1},
                                 {"positive", class_json(r.positive)},
                                 {"negative", class_json(r.negative)}};
        out << record.dump() << '\n';
    }
}

}  // namespace reactsent
