#include <reactsent/embedding.hpp>

#include <string>
#include <vector>

#include <gtest/gtest.h>

#include <reactsent/normalizer.hpp>
#include <reactsent/rng.hpp>

#include "support/temp_dir.hpp"

using namespace reactsent;
using testsupport::TempDir;

namespace {

std::vector<CleanedText> texts(std::initializer_list<std::vector<std::string>> docs) {
    std::vector<CleanedText> out;
    for (const auto& tokens : docs) out.push_back(CleanedText{tokens});
    return out;
}

}  // namespace

TEST(Vocabulary, ReservesPadAndOovSlots) {
    const Vocabulary vocab;
    EXPECT_EQ(vocab.size(), 2u);
    EXPECT_EQ(vocab.token(Vocabulary::kPad), "<pad>");
    EXPECT_EQ(vocab.token(Vocabulary::kOov), "<oov>");
    EXPECT_EQ(vocab.lookup("anything"), Vocabulary::kOov);
    EXPECT_FALSE(vocab.contains("anything"));
}

TEST(Vocabulary, OrdersByFrequencyThenLexicographically) {
    const Vocabulary vocab = Vocabulary::build(texts({{"b", "b", "a"}, {"a", "c", "b"}}));
    // b: 3, a: 2, c: 1
    ASSERT_EQ(vocab.size(), 5u);
    EXPECT_EQ(vocab.lookup("b"), 2);
    EXPECT_EQ(vocab.lookup("a"), 3);
    EXPECT_EQ(vocab.lookup("c"), 4);

    // Equal counts fall back to lexicographic order.
    const Vocabulary ties = Vocabulary::build(texts({{"z", "m", "a"}}));
    EXPECT_EQ(ties.lookup("a"), 2);
    EXPECT_EQ(ties.lookup("m"), 3);
    EXPECT_EQ(ties.lookup("z"), 4);
}

TEST(Vocabulary, MinCountPrunesRareTokens) {
    const Vocabulary vocab = Vocabulary::build(texts({{"a", "a", "b"}}), 2);
    EXPECT_EQ(vocab.size(), 3u);
    EXPECT_TRUE(vocab.contains("a"));
    EXPECT_FALSE(vocab.contains("b"));
    EXPECT_EQ(vocab.lookup("b"), Vocabulary::kOov);
}

TEST(Vocabulary, AddIsIdempotentAndTokensListsEverything) {
    Vocabulary vocab;
    const int32_t first = vocab.add("x");
    EXPECT_EQ(first, 2);
    EXPECT_EQ(vocab.add("x"), first);
    EXPECT_EQ(vocab.size(), 3u);
    const std::vector<std::string> expected = {"<pad>", "<oov>", "x"};
    EXPECT_EQ(vocab.tokens(), expected);
}

TEST(Vocabulary, HashIsOrderSensitive) {
    Vocabulary ab;
    ab.add("a");
    ab.add("b");
    Vocabulary ba;
    ba.add("b");
    ba.add("a");
    Vocabulary ab2;
    ab2.add("a");
    ab2.add("b");
    EXPECT_EQ(ab.hash(), ab2.hash());
    EXPECT_NE(ab.hash(), ba.hash());
    EXPECT_NE(ab.hash(), Vocabulary{}.hash());
}

TEST(RandomEmbeddings, ZeroPadRowAndBoundedValues) {
    Vocabulary vocab;
    vocab.add("a");
    vocab.add("b");
    const EmbeddingMatrix m = random_embeddings(vocab, 8, Rng(3));
    ASSERT_EQ(m.rows.rows(), 4u);
    ASSERT_EQ(m.rows.cols(), 8u);
    for (double v : m.vector_of(Vocabulary::kPad)) EXPECT_EQ(v, 0.0);
    bool any_nonzero = false;
    for (int32_t r = Vocabulary::kOov; r < 4; ++r) {
        for (double v : m.vector_of(r)) {
            EXPECT_GE(v, -0.1);
            EXPECT_LT(v, 0.1);
            any_nonzero = any_nonzero || v != 0.0;
        }
    }
    EXPECT_TRUE(any_nonzero);

    const EmbeddingMatrix again = random_embeddings(vocab, 8, Rng(3));
    EXPECT_EQ(m.rows.values, again.rows.values);
}

TEST(LoadPretrained, ReadsHeaderedFileAndAveragesIntoOov) {
    TempDir dir;
    const auto path = dir.write("vec.txt",
                                "3 2\n"
                                "a 1.0 2.0\n"
                                "b 3.0 4.0\n"
                                "unused 5.0 6.0\n");
    Vocabulary vocab;
    vocab.add("a");
    vocab.add("b");
    vocab.add("missing");
    const EmbeddingMatrix m = load_pretrained(path.string(), vocab, Rng(1));
    EXPECT_EQ(m.dim, 2u);

    const auto a = m.vector_of(vocab.lookup("a"));
    EXPECT_EQ(a[0], 1.0);
    EXPECT_EQ(a[1], 2.0);
    const auto b = m.vector_of(vocab.lookup("b"));
    EXPECT_EQ(b[0], 3.0);
    EXPECT_EQ(b[1], 4.0);

    // OOV = mean over every row in the file, including tokens outside the
    // vocabulary.
    const auto oov = m.vector_of(Vocabulary::kOov);
    EXPECT_NEAR(oov[0], 3.0, 1e-12);
    EXPECT_NEAR(oov[1], 4.0, 1e-12);

    // Absent tokens get small random vectors.
    bool nonzero = false;
    for (double v : m.vector_of(vocab.lookup("missing"))) {
        EXPECT_GE(v, -0.1);
        EXPECT_LT(v, 0.1);
        nonzero = nonzero || v != 0.0;
    }
    EXPECT_TRUE(nonzero);

    for (double v : m.vector_of(Vocabulary::kPad)) EXPECT_EQ(v, 0.0);
}

TEST(LoadPretrained, InfersDimensionFromHeaderlessFile) {
    TempDir dir;
    const auto path = dir.write("vec.txt", "a 1 2 3\nb 4 5 6\n");
    Vocabulary vocab;
    vocab.add("a");
    const EmbeddingMatrix m = load_pretrained(path.string(), vocab, Rng(1));
    EXPECT_EQ(m.dim, 3u);
    EXPECT_EQ(m.vector_of(vocab.lookup("a"))[2], 3.0);
}

TEST(LoadPretrained, ReportsDimensionProblems) {
    TempDir dir;
    Vocabulary vocab;
    vocab.add("a");

    const auto mismatch = dir.write("h.txt", "1 4\na 1 2 3 4\n");
    try {
        load_pretrained(mismatch.string(), vocab, Rng(1), 8);
        FAIL() << "expected EmbeddingError";
    } catch (const EmbeddingError& e) {
        EXPECT_NE(std::string(e.what()).find("dimension mismatch"), std::string::npos);
    }

    const auto ragged = dir.write("r.txt", "a 1 2 3\nb 4 5\n");
    try {
        load_pretrained(ragged.string(), vocab, Rng(1));
        FAIL() << "expected EmbeddingError";
    } catch (const EmbeddingError& e) {
        const std::string what = e.what();
        EXPECT_NE(what.find("line 2"), std::string::npos);
        EXPECT_NE(what.find("2 values, expected 3"), std::string::npos);
    }
}

TEST(LoadPretrained, RejectsUnusableFiles) {
    TempDir dir;
    Vocabulary vocab;
    vocab.add("a");
    EXPECT_THROW(load_pretrained("/nonexistent/vec.txt", vocab, Rng(1)), EmbeddingError);
    EXPECT_THROW(load_pretrained(dir.write("empty.txt", "").string(), vocab, Rng(1)),
                 EmbeddingError);
    EXPECT_THROW(load_pretrained(dir.write("blank.txt", "\n\n").string(), vocab, Rng(1)),
                 EmbeddingError);
}

TEST(TokenIds, LooksUpAndTruncatesOnTheRight) {
    Vocabulary vocab;
    vocab.add("a");
    vocab.add("b");
    const std::vector<int32_t> ids = to_token_ids({"a", "zzz", "b", "a", "b"}, vocab, 3);
    const std::vector<int32_t> expected = {2, Vocabulary::kOov, 3};
    EXPECT_EQ(ids, expected);
}

TEST(EmbedSequence, PadsMasksAndCopiesVectors) {
    Vocabulary vocab;
    vocab.add("a");
    vocab.add("b");
    const EmbeddingMatrix m = random_embeddings(vocab, 4, Rng(9));
    const EmbeddedSequence seq = embed_sequence({"a", "b"}, vocab, m, 5);

    EXPECT_EQ(seq.values.rows(), 5u);
    EXPECT_EQ(seq.values.cols(), 4u);
    EXPECT_EQ(seq.length(), 2u);
    const std::vector<uint8_t> mask = {1, 1, 0, 0, 0};
    EXPECT_EQ(seq.mask, mask);
    const std::vector<int32_t> ids = {2, 3, Vocabulary::kPad, Vocabulary::kPad,
                                      Vocabulary::kPad};
    EXPECT_EQ(seq.token_ids, ids);

    const auto a_row = m.vector_of(2);
    for (size_t i = 0; i < 4; ++i) EXPECT_EQ(seq.values.at(0, i), a_row[i]);
    for (size_t t = 2; t < 5; ++t) {
        for (size_t i = 0; i < 4; ++i) EXPECT_EQ(seq.values.at(t, i), 0.0);
    }
}

TEST(EmbedSequence, RequiresPositiveMaxLen) {
    Vocabulary vocab;
    const EmbeddingMatrix m = random_embeddings(vocab, 2, Rng(1));
    EXPECT_THROW(embed_sequence({"a"}, vocab, m, 0), EmbeddingError);
}
