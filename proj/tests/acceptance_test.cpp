// Release gate: each test checks one shipping criterion end to end and
// prints a [PASS]/[FAIL] line with its number, so the suite's output reads
// as a checklist. Tolerances are pinned here and nowhere else.
#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <gtest/gtest.h>

#include <reactsent/pipeline.hpp>

#include "support/metrics_oracle.hpp"
#include "support/normalizer_fixtures.hpp"
#include "support/sample_corpus.hpp"
#include "support/synthetic_corpus.hpp"
#include "support/temp_dir.hpp"

using namespace reactsent;
using testsupport::TempDir;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

ReactionCounts random_counts(Rng& rng, uint64_t bound) {
    ReactionCounts c;
    do {
        c.love = int64_t(rng.next_below(bound + 1));
        c.wow = int64_t(rng.next_below(bound + 1));
        c.sad = int64_t(rng.next_below(bound + 1));
        c.angry = int64_t(rng.next_below(bound + 1));
        c.like = int64_t(rng.next_below(bound + 1));
        c.haha = int64_t(rng.next_below(bound + 1));
        c.thankful = int64_t(rng.next_below(bound + 1));
    } while (c.considered_total() == 0);
    return c;
}

/// The decade-scale reaction ledger the toolkit is checked against.
Corpus headline_corpus() {
    const std::array<std::pair<std::string_view, int64_t>, 7> totals = {{
        {"like", 38889706},
        {"love", 2336796},
        {"wow", 321178},
        {"haha", 1486413},
        {"sad", 609597},
        {"angry", 349296},
        {"thankful", 7},
    }};
    Corpus corpus;
    int i = 0;
    for (const auto& [name, count] : totals) {
        RawPost p;
        p.post_id = "p" + std::to_string(++i);
        p.message = "m";
        if (name == "like") p.like = count;
        else if (name == "love") p.love = count;
        else if (name == "wow") p.wow = count;
        else if (name == "haha") p.haha = count;
        else if (name == "sad") p.sad = count;
        else if (name == "angry") p.angry = count;
        else p.thankful = count;
        corpus.posts.push_back(std::move(p));
    }
    return corpus;
}

}  // namespace

/// Prints the checklist line even when an ASSERT aborts the test body.
class Acceptance : public ::testing::Test {
protected:
    void describe(int number, const char* summary) {
        number_ = number;
        summary_ = summary;
    }

    void TearDown() override {
        std::printf("[%s] criterion %d: %s\n", HasFailure() ? "FAIL" : "PASS", number_,
                    summary_);
        std::fflush(stdout);
    }

private:
    int number_ = 0;
    const char* summary_ = "";
};

TEST_F(Acceptance, AnnotationMatchesABruteForceOracle) {
    describe(1, "annotation agrees exactly with a brute-force oracle on 10,000 random counts");
    const auto start = std::chrono::steady_clock::now();
    Rng rng(101);
    for (int i = 0; i < 10000; ++i) {
        const ReactionCounts c = random_counts(rng, 1000000);
        const SentimentScore s = score(c);

        // Independent reading of the annotation rule: normalize the four
        // considered counts, sum pairs, subtract. Excluded reactions never
        // appear, so agreement also re-proves the exclusion.
        const double t = double(c.love + c.wow + c.sad + c.angry);
        const double n_love = double(c.love) / t;
        const double n_wow = double(c.wow) / t;
        const double n_sad = double(c.sad) / t;
        const double n_angry = double(c.angry) / t;
        const double pos = n_love + n_wow;
        const double neg = n_sad + n_angry;
        const double sen = pos - neg;

        ASSERT_EQ(s.t, int64_t(t));
        ASSERT_EQ(s.n_love, n_love);
        ASSERT_EQ(s.n_wow, n_wow);
        ASSERT_EQ(s.n_sad, n_sad);
        ASSERT_EQ(s.n_angry, n_angry);
        ASSERT_EQ(s.pos, pos);
        ASSERT_EQ(s.neg, neg);
        ASSERT_EQ(s.sen, sen);
        ASSERT_EQ(classify(s),
                  sen >= 0.0 ? SentimentLabel::Positive : SentimentLabel::Negative);
    }
    EXPECT_LT(seconds_since(start), 5.0);
}

TEST_F(Acceptance, ReactionLedgerArithmeticIsReproduced) {
    describe(2, "reaction ledger yields the published percentage tables");
    const CorpusStats stats = compute_reaction_stats(headline_corpus());
    EXPECT_EQ(stats.grand_total(), 43992993u);

    const auto like_pos = std::find(kReactionNames.begin(), kReactionNames.end(), "like");
    ASSERT_NE(like_pos, kReactionNames.end());
    EXPECT_NEAR(stats.original_pct[size_t(like_pos - kReactionNames.begin())], 88.40, 0.01);

    ASSERT_TRUE(stats.filtered_pct.has_value());
    const std::array<double, 4> expected = {64.61, 8.88, 16.85, 9.66};  // love wow sad angry
    double filtered_sum = 0.0;
    for (size_t i = 0; i < expected.size(); ++i) {
        EXPECT_NEAR((*stats.filtered_pct)[i], expected[i], 0.02)
            << kConsideredReactions[i];
        filtered_sum += (*stats.filtered_pct)[i];
    }
    EXPECT_NEAR(filtered_sum, 100.0, 0.01);
}

TEST_F(Acceptance, ScoreInvariantsHoldOnRandomCounts) {
    describe(3, "score invariants: unit mass, bounded sen, scale-invariant labels");
    Rng rng(303);
    for (int i = 0; i < 10000; ++i) {
        const ReactionCounts c = random_counts(rng, 1000000);
        const SentimentScore s = score(c);
        EXPECT_NEAR(s.pos + s.neg, 1.0, 1e-12);
        EXPECT_GE(s.sen, -1.0);
        EXPECT_LE(s.sen, 1.0);

        for (int64_t k : {int64_t(2), int64_t(10), int64_t(1000)}) {
            ReactionCounts scaled = c;
            scaled.love *= k;
            scaled.wow *= k;
            scaled.sad *= k;
            scaled.angry *= k;
            scaled.like *= k;
            scaled.haha *= k;
            scaled.thankful *= k;
            EXPECT_EQ(classify(score(scaled)), classify(s));
        }
    }
}

TEST_F(Acceptance, NormalizerMatchesPinnedFixturesAndIsIdempotent) {
    describe(4, "text cleaning is byte-exact on pinned fixtures and idempotent on noise");
    static_assert(testsupport::kNormalizerFixtures.size() >= 30);
    const NormalizerConfig config = testsupport::fixture_config();
    for (const testsupport::NormalizerFixture& fixture : testsupport::kNormalizerFixtures) {
        EXPECT_EQ(normalize(fixture.input, config).joined(), fixture.expected)
            << "input: " << fixture.input;
    }

    Rng rng(404);
    for (int i = 0; i < 1000; ++i) {
        const std::string noisy = testsupport::random_noise_string(rng);
        const CleanedText once = normalize(noisy, config);
        const CleanedText twice = normalize(once.joined(), config);
        ASSERT_EQ(twice.tokens, once.tokens) << "input: " << noisy;
    }
}

TEST_F(Acceptance, GradientsMatchFiniteDifferencesEverywhere) {
    describe(5, "analytic gradients match finite differences across all architectures");
    const auto start = std::chrono::steady_clock::now();
    GradCheckOptions opts;
    opts.hidden = 4;
    opts.seq_len = 5;

    double worst = 0.0;
    for (CellKind cell : {CellKind::Rnn, CellKind::Gru, CellKind::Lstm}) {
        for (bool bidirectional : {false, true}) {
            for (int layers : {1, 2, 3}) {
                ModelSpec spec;
                spec.cell = cell;
                spec.bidirectional = bidirectional;
                spec.layers = layers;
                spec.hidden = opts.hidden;
                for (uint64_t seed = 0; seed < 10; ++seed) {
                    const double err = gradient_check_random(spec, 500 + seed, opts);
                    EXPECT_LT(err, 1e-4)
                        << cell_name(cell) << (bidirectional ? " bi" : " uni")
                        << " layers=" << layers << " seed=" << seed;
                    worst = std::max(worst, err);
                }
            }
        }
    }
    std::printf("  worst relative gradient error: %.3e\n", worst);
    EXPECT_LT(seconds_since(start), 120.0);
}

TEST_F(Acceptance, RecurrentModelsLearnAPlantedLexicon) {
    describe(6, "recurrent models recover a planted lexicon from noisy supervision");
    const testsupport::SyntheticCorpus sc = testsupport::make_synthetic_corpus(2026);
    ASSERT_GT(sc.flipped, 0u);

    std::vector<CleanedText> texts;
    texts.reserve(sc.split.train.posts.size());
    for (const LabeledPost& post : sc.split.train.posts) texts.push_back({post.tokens});
    const Vocabulary vocab = Vocabulary::build(texts, 1);
    const EmbeddingMatrix embeddings =
        random_embeddings(vocab, 16, Rng(2026).fork("embeddings"));

    TrainConfig tc;
    tc.epochs = 30;
    tc.batch_size = 32;
    tc.learning_rate = 3e-3;
    tc.patience = 5;
    tc.max_len = 24;
    tc.train_embeddings = true;
    tc.seed = 7;
    const std::vector<Example> train_ex = to_examples(sc.split.train, vocab, tc.max_len);
    const std::vector<Example> val_ex = to_examples(sc.split.val, vocab, tc.max_len);
    const std::vector<Example> test_ex = to_examples(sc.split.test, vocab, tc.max_len);

    ModelSpec deep_spec;
    deep_spec.cell = CellKind::Lstm;
    deep_spec.bidirectional = true;
    deep_spec.layers = 3;
    deep_spec.hidden = 16;
    deep_spec.name = "Stacked BiLSTM 3";

    const auto start = std::chrono::steady_clock::now();
    const TrainedModel deep = train(deep_spec, embeddings, train_ex, val_ex, tc);
    const double deep_seconds = seconds_since(start);
    const MetricsReport deep_report =
        evaluate_examples(deep.model, deep.embedding, test_ex, tc.max_len,
                          Averaging::Weighted, deep_spec.name);

    ModelSpec rnn_spec;
    rnn_spec.cell = CellKind::Rnn;
    rnn_spec.hidden = 16;
    rnn_spec.name = "RNN";
    const TrainedModel rnn = train(rnn_spec, embeddings, train_ex, val_ex, tc);
    const MetricsReport rnn_report =
        evaluate_examples(rnn.model, rnn.embedding, test_ex, tc.max_len,
                          Averaging::Weighted, rnn_spec.name);

    std::printf("  %s: test F1 %s (%.0fs)  |  %s: test F1 %s\n", deep_spec.name.c_str(),
                format_pct(deep_report.f1).c_str(), deep_seconds, rnn_spec.name.c_str(),
                format_pct(rnn_report.f1).c_str());
    EXPECT_GE(deep_report.f1, 90.0);
    EXPECT_GE(rnn_report.f1, 80.0);
    EXPECT_GE(deep_report.f1, rnn_report.f1);
    EXPECT_LT(deep_seconds, 300.0);
}

TEST_F(Acceptance, MetricsMatchOracleAndWorkedExample) {
    describe(7, "metrics match the worked example and a per-example oracle");
    const MetricsReport worked =
        metrics(ConfusionMatrix{50, 10, 20, 20}, Averaging::Weighted, "worked");
    EXPECT_NEAR(worked.accuracy, 70.00, 0.01);
    EXPECT_NEAR(worked.recall, 70.00, 0.01);
    EXPECT_NEAR(worked.precision, 73.33, 0.01);
    EXPECT_NEAR(worked.f1, 70.99, 0.01);

    Rng rng(707);
    for (int i = 0; i < 1000; ++i) {
        ConfusionMatrix cm;
        do {
            cm.tp = rng.next_below(400);
            cm.fp = rng.next_below(400);
            cm.fn = rng.next_below(400);
            cm.tn = rng.next_below(400);
        } while (cm.total() == 0);
        const MetricsReport report = metrics(cm, Averaging::Weighted);
        EXPECT_EQ(report.recall, report.accuracy);  // exact, not approximate
    }

    for (int i = 0; i < 300; ++i) {
        const size_t n = 1 + rng.next_below(200);
        std::vector<int> predicted(n), gold(n);
        std::vector<SentimentLabel> predicted_labels(n), gold_labels(n);
        for (size_t j = 0; j < n; ++j) {
            predicted[j] = int(rng.next_below(2));
            gold[j] = int(rng.next_below(2));
            predicted_labels[j] =
                predicted[j] ? SentimentLabel::Positive : SentimentLabel::Negative;
            gold_labels[j] = gold[j] ? SentimentLabel::Positive : SentimentLabel::Negative;
        }
        const testsupport::OracleScores oracle = testsupport::oracle_weighted(predicted, gold);
        const MetricsReport report = score_labels(predicted_labels, gold_labels);
        EXPECT_NEAR(report.accuracy, oracle.accuracy, 1e-9);
        EXPECT_NEAR(report.recall, oracle.recall, 1e-9);
        EXPECT_NEAR(report.precision, oracle.precision, 1e-9);
        EXPECT_NEAR(report.f1, oracle.f1, 1e-9);
    }
}

TEST_F(Acceptance, PipelineRerunsAreByteIdentical) {
    describe(8, "one seed makes the full command-line pipeline byte-reproducible");
    const char* binary = std::getenv("REACTSENT_CLI");
    ASSERT_NE(binary, nullptr) << "REACTSENT_CLI must point at the command-line binary";

    TempDir dir;
    const auto csv = dir.file("posts.csv");
    testsupport::write_sample_csv(csv, 120, 5);
    const auto config = dir.write("config.json", R"({
        "seed": 17,
        "model": {"hidden": 8},
        "embedding_dim": 8,
        "train": {"epochs": 2, "batch_size": 16, "max_len": 16, "learning_rate": 0.01}
    })");

    const auto splits = dir.path() / "splits";
    const auto models = dir.path() / "models";
    const std::vector<std::string> commands = {
        "preprocess --corpus " + csv.string() + " --out " + (dir.path() / "cleaned.jsonl").string(),
        "annotate --cleaned " + (dir.path() / "cleaned.jsonl").string() + " --out " +
            (dir.path() / "labeled.jsonl").string(),
        "split --labeled " + (dir.path() / "labeled.jsonl").string() + " --out-dir " +
            splits.string(),
        "train --train " + (splits / "train.jsonl").string() + " --val " +
            (splits / "val.jsonl").string() + " --out-dir " + models.string() +
            " --models core,star,rnn",
        "evaluate --test " + (splits / "test.jsonl").string() + " --model " +
            (models / "core.model.jsonl").string() + " --model " +
            (models / "star.model.jsonl").string() + " --model " +
            (models / "rnn.model.jsonl").string() + " --out " +
            (dir.path() / "metrics.jsonl").string(),
    };
    const std::vector<std::filesystem::path> artifacts = {
        dir.path() / "cleaned.jsonl",
        dir.path() / "labeled.jsonl",
        splits / "train.jsonl",
        splits / "val.jsonl",
        splits / "test.jsonl",
        splits / "split-manifest.jsonl",
        models / "core.model.jsonl",
        models / "star.model.jsonl",
        models / "rnn.model.jsonl",
        models / "rnn.history.jsonl",
        dir.path() / "metrics.jsonl",
    };

    auto run_all = [&] {
        for (size_t i = 0; i < commands.size(); ++i) {
            const std::string full = "\"" + std::string(binary) + "\" --config " +
                                     config.string() + " " + commands[i] + " > " +
                                     (dir.path() / "cli.out").string() + " 2> " +
                                     (dir.path() / "cli.err").string();
            const int status = std::system(full.c_str());
            ASSERT_TRUE(WIFEXITED(status) && WEXITSTATUS(status) == 0)
                << "command " << i << " failed: "
                << testsupport::slurp(dir.path() / "cli.err");
        }
    };

    run_all();
    if (HasFatalFailure()) return;
    std::map<std::string, std::string> first_run;
    for (const auto& path : artifacts) {
        first_run[path.string()] = testsupport::slurp(path);
        EXPECT_FALSE(first_run[path.string()].empty()) << path;
    }

    run_all();
    if (HasFatalFailure()) return;
    for (const auto& path : artifacts) {
        EXPECT_EQ(testsupport::slurp(path), first_run[path.string()])
            << path << " changed between identically seeded runs";
    }
}

TEST_F(Acceptance, BaselinesBeatMajorityAndHonorTheStarBoundary) {
    describe(9, "reaction-table baseline beats majority vote; 3 stars reads positive");
    const testsupport::SyntheticCorpus sc = testsupport::make_synthetic_corpus(2026);

    TokenReactionTable table;
    table.fit(to_baseline_docs(sc.split.train));
    std::vector<SentimentLabel> predicted, gold;
    for (const LabeledPost& post : sc.split.test.posts) {
        predicted.push_back(table.predict(post.tokens));
        gold.push_back(post.label);
    }
    const MetricsReport table_report =
        score_labels(predicted, gold, Averaging::Weighted, "Core Reaction Set");

    const SentimentLabel majority_label =
        sc.split.train.histogram.positive >= sc.split.train.histogram.negative
            ? SentimentLabel::Positive
            : SentimentLabel::Negative;
    const std::vector<SentimentLabel> all_majority(gold.size(), majority_label);
    const MetricsReport majority_report =
        score_labels(all_majority, gold, Averaging::Weighted, "majority vote");

    std::printf("  Core Reaction Set F1 %s vs majority vote F1 %s\n",
                format_pct(table_report.f1).c_str(), format_pct(majority_report.f1).c_str());
    EXPECT_GE(table_report.f1, majority_report.f1 + 10.0);

    // A perfectly balanced reaction mix sits exactly at 3 stars, the
    // positive edge of the star scale.
    EXPECT_EQ(star_of(0.0), 3.0);
    const std::vector<BaselineDoc> boundary_doc = {{{"සමබර"}, {0.5, 0.0, 0.5, 0.0}}};
    const std::vector<std::string> balanced = {"සමබර"};
    StarModel star;
    star.fit(boundary_doc);
    EXPECT_EQ(star.predict_star(balanced), 3.0);
    EXPECT_EQ(star.predict(balanced), SentimentLabel::Positive);
}
