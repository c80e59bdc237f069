// Command-line front end wiring the pipeline end to end:
//   stats | preprocess | annotate | split | train | evaluate | gradcheck
// Configuration comes from an optional JSON file plus flag overrides
// (flags win); one root seed drives every random stage, and every output
// file embeds that seed and the digest of the resolved configuration.
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "reactsent/pipeline.hpp"

namespace fs = std::filesystem;
using namespace reactsent;

namespace {

ArtifactMeta meta_for(const PipelineConfig& cfg, std::string kind) {
    return {std::move(kind), cfg.seed, config_digest(cfg)};
}

void print_stats(const Corpus& corpus) {
    const CorpusStats stats = compute_reaction_stats(corpus);
    int64_t grand = 0;
    for (size_t i = 0; i < kReactionNames.size(); ++i) grand += stats.totals[i];
    std::cout << "posts: " << corpus.size() << "\n";
    std::cout << "reactions: " << grand << "\n\n";
    std::cout << "Reaction  Total       Original %  Filtered %\n";
    for (size_t i = 0; i < kReactionNames.size(); ++i) {
        std::string name(kReactionNames[i]);
        name[0] = char(std::toupper(static_cast<unsigned char>(name[0])));
        std::printf("%-8s  %10lld  %10s  ", name.c_str(),
                    static_cast<long long>(stats.totals[i]),
                    format_pct(stats.original_pct[i]).c_str());
        const auto considered =
            std::find(kConsideredReactions.begin(), kConsideredReactions.end(),
                      kReactionNames[i]);
        if (considered != kConsideredReactions.end() && stats.filtered_pct) {
            const size_t idx = size_t(considered - kConsideredReactions.begin());
            std::printf("%10s\n", format_pct((*stats.filtered_pct)[idx]).c_str());
        } else {
            std::printf("%10s\n", "-");
        }
    }
}

int cmd_stats(const PipelineConfig& cfg) {
    LoadReport report;
    const Corpus corpus =
        load_corpus(cfg.corpus_path, cfg.corpus_format, &report, cfg.delimiter[0]);
    for (const std::string& warning : report.warnings) {
        std::cerr << "warning: " << warning << "\n";
    }
    print_stats(corpus);
    return 0;
}

int cmd_preprocess(const PipelineConfig& cfg, const std::string& out_path) {
    LoadReport report;
    Corpus corpus =
        load_corpus(cfg.corpus_path, cfg.corpus_format, &report, cfg.delimiter[0]);
    for (const std::string& warning : report.warnings) {
        std::cerr << "warning: " << warning << "\n";
    }
    if (cfg.filter) {
        FilterReport filter_report;
        corpus = filter_annotatable(corpus, &filter_report);
        std::cout << "filtered out " << filter_report.total_removed() << " posts ("
                  << filter_report.removed_no_considered_reactions
                  << " without considered reactions, " << filter_report.removed_empty_message
                  << " with empty text)\n";
    }
    const CleanedCorpus cleaned = preprocess_corpus(corpus, make_normalizer_config(cfg));
    write_cleaned(out_path, cleaned, meta_for(cfg, "cleaned-corpus"));
    std::cout << "wrote " << cleaned.posts.size() << " cleaned posts to " << out_path << "\n";
    return 0;
}

int cmd_annotate(const PipelineConfig& cfg, const std::string& cleaned_path,
                 const std::string& out_path) {
    const CleanedCorpus cleaned = read_cleaned(cleaned_path);
    const LabeledCorpus labeled = label_corpus(cleaned, cfg.zero_policy);
    write_labeled(out_path, labeled, meta_for(cfg, "labeled-corpus"));
    const LabelHistogram& h = labeled.histogram;
    std::cout << "labeled " << h.total() << " posts (dropped "
              << cleaned.posts.size() - h.total() << ")\n";
    std::cout << "Positive: " << h.positive << " ("
              << format_pct(100.0 * double(h.positive) / double(h.total())) << "%)\n";
    std::cout << "Negative: " << h.negative << " ("
              << format_pct(100.0 * double(h.negative) / double(h.total())) << "%)\n";
    return 0;
}

int cmd_split(const PipelineConfig& cfg, const std::string& labeled_path,
              const std::string& out_dir) {
    const LabeledCorpus labeled = read_labeled(labeled_path);
    const LabeledSplit split = split_labeled(labeled, cfg.split);
    fs::create_directories(out_dir);
    const ArtifactMeta meta = meta_for(cfg, "labeled-corpus");
    write_labeled(fs::path(out_dir) / "train.jsonl", split.train, meta);
    write_labeled(fs::path(out_dir) / "val.jsonl", split.val, meta);
    write_labeled(fs::path(out_dir) / "test.jsonl", split.test, meta);
    write_split_manifest(fs::path(out_dir) / "split-manifest.jsonl", split, cfg.split,
                         meta_for(cfg, "split-manifest"));
    std::cout << "train: " << split.train.posts.size() << "\n"
              << "val: " << split.val.posts.size() << "\n"
              << "test: " << split.test.posts.size() << "\n";
    return 0;
}

int cmd_train(const PipelineConfig& cfg, const std::string& train_path,
              const std::string& val_path, const std::string& out_dir) {
    const LabeledCorpus train_set = read_labeled(train_path);
    const LabeledCorpus val_set = read_labeled(val_path);
    fs::create_directories(out_dir);

    // Shared representation for the recurrent models, built from the
    // training split only.
    bool any_neural = false;
    for (const std::string& key : cfg.models) {
        if (resolve_model(key).neural) any_neural = true;
    }
    Vocabulary vocab;
    EmbeddingMatrix embeddings;
    std::vector<Example> train_examples, val_examples;
    if (any_neural) {
        std::vector<CleanedText> texts;
        texts.reserve(train_set.posts.size());
        for (const LabeledPost& post : train_set.posts) texts.push_back({post.tokens});
        vocab = Vocabulary::build(texts, cfg.min_count);
        Rng emb_rng = Rng(cfg.seed).fork("embeddings");
        if (cfg.embeddings_path.empty()) {
            embeddings = random_embeddings(vocab, cfg.embedding_dim, emb_rng);
        } else {
            embeddings = load_pretrained(cfg.embeddings_path, vocab, emb_rng);
        }
        train_examples = to_examples(train_set, vocab, cfg.train.max_len);
        val_examples = to_examples(val_set, vocab, cfg.train.max_len);
        std::cout << "vocabulary: " << vocab.size() << " entries, embedding dim "
                  << embeddings.dim << "\n";
    }

    for (const std::string& key : cfg.models) {
        const ModelEntry& entry = resolve_model(key);
        if (!entry.neural) {
            const std::vector<BaselineDoc> docs = to_baseline_docs(train_set);
            const fs::path path = fs::path(out_dir) / (entry.key + ".model.jsonl");
            if (entry.key == "core") {
                TokenReactionTable model;
                model.fit(docs);
                save_baseline(path, model, meta_for(cfg, "core-model"));
                std::cout << entry.display << ": " << model.size() << " tokens -> " << path.string()
                          << "\n";
            } else {
                StarModel model;
                model.fit(docs);
                save_baseline(path, model, meta_for(cfg, "star-model"));
                std::cout << entry.display << ": " << model.size() << " tokens -> " << path.string()
                          << "\n";
            }
            continue;
        }
        const ModelSpec spec = spec_for(entry, cfg);
        const TrainedModel trained = train(spec, embeddings, train_examples, val_examples, cfg.train);
        SavedNeuralModel saved{entry.key,          trained.model,   vocab,
                               trained.embedding,  trained.history, trained.best_epoch,
                               cfg.train.max_len};
        const fs::path model_path = fs::path(out_dir) / (entry.key + ".model.jsonl");
        save_neural_model(model_path, saved, meta_for(cfg, "neural-model"));
        write_history(fs::path(out_dir) / (entry.key + ".history.jsonl"), trained.history,
                      trained.best_epoch, meta_for(cfg, "training-history"));

        std::cout << entry.display << ": best val F1 "
                  << format_pct(trained.history[size_t(trained.best_epoch)].val_f1)
                  << " at epoch " << trained.best_epoch + 1 << " (" << trained.history.size()
                  << " epochs run) -> " << model_path.string() << "\n";
    }
    return 0;
}

int cmd_evaluate(const PipelineConfig& cfg, const std::string& test_path,
                 const std::vector<std::string>& model_paths, const std::string& out_path) {
    const LabeledCorpus test_set = read_labeled(test_path);
    std::vector<SentimentLabel> gold;
    gold.reserve(test_set.posts.size());
    for (const LabeledPost& post : test_set.posts) gold.push_back(post.label);

    std::vector<MetricsReport> reports;
    for (const std::string& path : model_paths) {
        const std::string kind = read_artifact_kind(path);
        std::vector<SentimentLabel> predicted;
        predicted.reserve(test_set.posts.size());
        std::string display;
        if (kind == "core-model") {
            const TokenReactionTable model = load_core_model(path);
            display = resolve_model("core").display;
            for (const LabeledPost& post : test_set.posts) {
                predicted.push_back(model.predict(post.tokens));
            }
        } else if (kind == "star-model") {
            const StarModel model = load_star_model(path);
            display = resolve_model("star").display;
            for (const LabeledPost& post : test_set.posts) {
                predicted.push_back(model.predict(post.tokens));
            }
        } else if (kind == "neural-model") {
            const SavedNeuralModel saved = load_neural_model(path);
            display = saved.model.spec.name;
            for (const LabeledPost& post : test_set.posts) {
                const EmbeddedSequence seq = embed_sequence(post.tokens, saved.vocab,
                                                            saved.embedding, saved.max_len);
                predicted.push_back(label_from_prob(forward_one(saved.model, seq)));
            }
        } else {
            throw PipelineError("not a model file (kind '" + kind + "'): " + path);
        }
        reports.push_back(score_labels(predicted, gold, cfg.averaging, display));
    }

    const std::vector<MetricsReport> ranked = rank_reports(reports);
    if (!out_path.empty()) {
        write_metrics(out_path, ranked, meta_for(cfg, "metrics"));
    }
    std::cout << render_comparison(ranked);
    return 0;
}

int cmd_gradcheck(const PipelineConfig& cfg, const std::string& key, int seeds, int hidden,
                  size_t seq_len) {
    const ModelEntry& entry = resolve_model(key);
    if (!entry.neural) {
        throw PipelineError("gradcheck needs a recurrent model, got '" + key + "'");
    }
    ModelSpec spec = spec_for(entry, cfg);
    GradCheckOptions opts;
    opts.hidden = hidden;
    opts.seq_len = seq_len;
    double worst = 0.0;
    for (int i = 0; i < seeds; ++i) {
        worst = std::max(worst, gradient_check_random(spec, cfg.seed + uint64_t(i), opts));
    }
    std::printf("max relative error: %.3e\n", worst);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distant-supervision sentiment toolkit for reaction-annotated posts"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    app.add_option("--config", config_path, "JSON configuration file");
    uint64_t seed = 0;
    auto* seed_opt = app.add_option("--seed", seed, "Root seed for every random stage");
    std::string format;
    auto* format_opt =
        app.add_option("--format", format, "Corpus file format")
            ->check(CLI::IsMember({"delimited-table", "record-per-line"}));
    std::string zero_policy;
    auto* zero_opt =
        app.add_option("--zero-policy", zero_policy, "Posts with no considered reactions")
            ->check(CLI::IsMember({"drop", "positive"}));
    std::string averaging;
    auto* avg_opt = app.add_option("--averaging", averaging, "Metric averaging mode")
                        ->check(CLI::IsMember({"weighted", "macro"}));

    auto* stats = app.add_subcommand("stats", "Print reaction totals and percentage tables");
    std::string stats_corpus;
    auto* stats_corpus_opt = stats->add_option("--corpus", stats_corpus, "Corpus file");

    auto* preprocess = app.add_subcommand("preprocess", "Clean message text into tokens");
    std::string pre_corpus, pre_stopwords, pre_out;
    auto* pre_corpus_opt = preprocess->add_option("--corpus", pre_corpus, "Corpus file");
    auto* pre_stop_opt =
        preprocess->add_option("--stopwords", pre_stopwords, "Stopword list (one per line)");
    preprocess->add_option("--out", pre_out, "Cleaned corpus output file")->required();
    bool pre_filter = true;
    CLI::Option* pre_filter_opt =
        preprocess->add_flag("--filter,!--no-filter", pre_filter,
                             "Drop posts with no considered reactions or empty text first");

    auto* annotate = app.add_subcommand("annotate", "Label cleaned posts from their reactions");
    std::string ann_in, ann_out;
    annotate->add_option("--cleaned", ann_in, "Cleaned corpus file")->required();
    annotate->add_option("--out", ann_out, "Labeled corpus output file")->required();

    auto* split = app.add_subcommand("split", "Partition a labeled corpus into train/val/test");
    std::string split_in, split_out_dir;
    split->add_option("--labeled", split_in, "Labeled corpus file")->required();
    split->add_option("--out-dir", split_out_dir, "Directory for split files")->required();

    auto* train_cmd = app.add_subcommand("train", "Train the configured models");
    std::string train_in, val_in, train_out_dir, train_models, train_embeddings;
    train_cmd->add_option("--train", train_in, "Training split file")->required();
    train_cmd->add_option("--val", val_in, "Validation split file")->required();
    train_cmd->add_option("--out-dir", train_out_dir, "Directory for model files")->required();
    auto* train_models_opt = train_cmd->add_option(
        "--models", train_models, "Comma-separated model keys (overrides config)");
    auto* train_emb_opt =
        train_cmd->add_option("--embeddings", train_embeddings, "Pretrained word-vector file");

    auto* evaluate = app.add_subcommand("evaluate", "Score trained models on a test split");
    std::string eval_test, eval_out;
    std::vector<std::string> eval_models;
    evaluate->add_option("--test", eval_test, "Test split file")->required();
    evaluate->add_option("--model", eval_models, "Model file (repeatable)")->required();
    evaluate->add_option("--out", eval_out, "Metrics record output file");

    auto* gradcheck = app.add_subcommand("gradcheck", "Verify gradients by finite differences");
    std::string grad_model = "lstm";
    gradcheck->add_option("model", grad_model, "Recurrent model key")->required();
    int grad_seeds = 3, grad_hidden = 4;
    size_t grad_len = 5;
    gradcheck->add_option("--seeds", grad_seeds, "Random instances to check")
        ->check(CLI::PositiveNumber);
    gradcheck->add_option("--hidden", grad_hidden, "Hidden size (tiny)")
        ->check(CLI::Range(1, 8));
    gradcheck->add_option("--len", grad_len, "Max sequence length")
        ->check(CLI::Range(1, 5));

    CLI11_PARSE(app, argc, argv);

    try {
        PipelineConfig cfg;
        if (!config_path.empty()) {
            cfg = load_config(config_path);
        }
        // Flags win over the config file.
        if (*seed_opt) {
            cfg.seed = seed;
            cfg.split.seed = seed;
            cfg.train.seed = seed;
        }
        if (*format_opt) cfg.corpus_format = corpus_format_from_name(format);
        if (*zero_opt) cfg.zero_policy = zero_policy_from_name(zero_policy);
        if (*avg_opt) cfg.averaging = averaging_from_name(averaging);

        if (*stats) {
            if (*stats_corpus_opt) cfg.corpus_path = stats_corpus;
            if (cfg.corpus_path.empty()) throw PipelineError("no corpus file given");
            return cmd_stats(cfg);
        }
        if (*preprocess) {
            if (*pre_corpus_opt) cfg.corpus_path = pre_corpus;
            if (*pre_stop_opt) cfg.stopwords_path = pre_stopwords;
            if (pre_filter_opt->count() > 0) cfg.filter = pre_filter;
            if (cfg.corpus_path.empty()) throw PipelineError("no corpus file given");
            return cmd_preprocess(cfg, pre_out);
        }
        if (*annotate) return cmd_annotate(cfg, ann_in, ann_out);
        if (*split) return cmd_split(cfg, split_in, split_out_dir);
        if (*train_cmd) {
            if (*train_models_opt) {
                cfg.models.clear();
                std::string item;
                std::istringstream list(train_models);
                while (std::getline(list, item, ',')) {
                    if (!item.empty()) cfg.models.push_back(item);
                }
            }
            if (*train_emb_opt) cfg.embeddings_path = train_embeddings;
            return cmd_train(cfg, train_in, val_in, train_out_dir);
        }
        if (*evaluate) return cmd_evaluate(cfg, eval_test, eval_models, eval_out);
        if (*gradcheck) return cmd_gradcheck(cfg, grad_model, grad_seeds, grad_hidden, grad_len);
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
