#include <reactsent/corpus.hpp>

#include <algorithm>
#include <set>
#include <string>

#include <gtest/gtest.h>

#include "support/temp_dir.hpp"

using namespace reactsent;
using testsupport::TempDir;

namespace {

constexpr const char* kHeader =
    "post_id,page_id,created_time,message,like,love,wow,haha,sad,angry,thankful\n";

Corpus load_csv(const TempDir& dir, const std::string& body, LoadReport* report = nullptr) {
    const auto path = dir.write("corpus.csv", body);
    return load_corpus(path.string(), CorpusFormat::DelimitedTable, report);
}

}  // namespace

TEST(DelimitedLoad, ParsesFieldsInRecordOrder) {
    TempDir dir;
    const Corpus corpus = load_csv(dir, std::string(kHeader) +
                                            "p1,pg1,2019-01-01,හොඳ දවසක්,10,2,1,0,3,4,0\n"
                                            "p2,pg2,2019-02-01,තවත් පණිවිඩයක්,0,0,0,0,0,0,0\n");
    ASSERT_EQ(corpus.size(), 2u);
    EXPECT_EQ(corpus.posts[0].post_id, "p1");
    EXPECT_EQ(corpus.posts[0].page_id, "pg1");
    EXPECT_EQ(corpus.posts[0].created_time, "2019-01-01");
    EXPECT_EQ(corpus.posts[0].message, "හොඳ දවසක්");
    EXPECT_EQ(corpus.posts[0].like, 10);
    EXPECT_EQ(corpus.posts[0].love, 2);
    EXPECT_EQ(corpus.posts[0].wow, 1);
    EXPECT_EQ(corpus.posts[0].haha, 0);
    EXPECT_EQ(corpus.posts[0].sad, 3);
    EXPECT_EQ(corpus.posts[0].angry, 4);
    EXPECT_EQ(corpus.posts[0].thankful, 0);
    EXPECT_EQ(corpus.posts[0].considered_total(), 10);
    EXPECT_EQ(corpus.posts[1].post_id, "p2");
    EXPECT_EQ(corpus.posts[1].considered_total(), 0);
}

TEST(DelimitedLoad, HandlesQuotedFieldsWithDelimiterQuoteAndNewline) {
    TempDir dir;
    const Corpus corpus = load_csv(
        dir, std::string(kHeader) + "p1,pg,t,\"අද, හෙට\",0,1,0,0,0,0,0\n" +
                 "p2,pg,t,\"He said \"\"හරි\"\"\",0,1,0,0,0,0,0\n" +
                 "p3,pg,t,\"පළමු පේළිය\nදෙවන පේළිය\",0,1,0,0,0,0,0\n");
    ASSERT_EQ(corpus.size(), 3u);
    EXPECT_EQ(corpus.posts[0].message, "අද, හෙට");
    EXPECT_EQ(corpus.posts[1].message, "He said \"හරි\"");
    EXPECT_EQ(corpus.posts[2].message, "පළමු පේළිය\nදෙවන පේළිය");
}

TEST(DelimitedLoad, AcceptsCrlfAndReorderedColumnsAndBlankLines) {
    TempDir dir;
    const auto path = dir.write(
        "corpus.csv",
        "message,post_id,page_id,created_time,like,love,wow,haha,sad,angry,thankful\r\n"
        "හොඳ,p1,pg,t,0,1,0,0,0,0,0\r\n"
        "\r\n"
        "නරක,p2,pg,t,0,0,0,0,1,0,0\r\n");
    const Corpus corpus = load_corpus(path.string(), CorpusFormat::DelimitedTable);
    ASSERT_EQ(corpus.size(), 2u);
    EXPECT_EQ(corpus.posts[0].post_id, "p1");
    EXPECT_EQ(corpus.posts[0].message, "හොඳ");
    EXPECT_EQ(corpus.posts[1].message, "නරක");
}

TEST(DelimitedLoad, SupportsTabDelimiter) {
    TempDir dir;
    const auto path = dir.write(
        "corpus.tsv",
        "post_id\tpage_id\tcreated_time\tmessage\tlike\tlove\twow\thaha\tsad\tangry\tthankful\n"
        "p1\tpg\tt\tකොමා, සහිත පණිවිඩය\t0\t1\t0\t0\t0\t0\t0\n");
    const Corpus corpus = load_corpus(path.string(), CorpusFormat::DelimitedTable, nullptr, '\t');
    ASSERT_EQ(corpus.size(), 1u);
    EXPECT_EQ(corpus.posts[0].message, "කොමා, සහිත පණිවිඩය");
}

TEST(DelimitedLoad, MissingHeaderFieldIsAnError) {
    TempDir dir;
    const auto path = dir.write(
        "corpus.csv", "post_id,page_id,created_time,like,love,wow,haha,sad,angry,thankful\n");
    try {
        load_corpus(path.string(), CorpusFormat::DelimitedTable);
        FAIL() << "expected CorpusError";
    } catch (const CorpusError& e) {
        EXPECT_NE(std::string(e.what()).find("missing field 'message'"), std::string::npos);
    }
}

TEST(DelimitedLoad, UnparseableCountNamesFieldAndRow) {
    TempDir dir;
    try {
        load_csv(dir, std::string(kHeader) + "p1,pg,t,m,0,1,0,0,0,0,0\n" +
                          "p2,pg,t,m,0,abc,0,0,0,0,0\n");
        FAIL() << "expected CorpusError";
    } catch (const CorpusError& e) {
        const std::string what = e.what();
        EXPECT_NE(what.find("love"), std::string::npos);
        EXPECT_NE(what.find("row 3"), std::string::npos);
        EXPECT_NE(what.find("abc"), std::string::npos);
    }
}

TEST(DelimitedLoad, NegativeCountNamesRow) {
    TempDir dir;
    try {
        load_csv(dir, std::string(kHeader) + "p1,pg,t,m,0,-1,0,0,0,0,0\n");
        FAIL() << "expected CorpusError";
    } catch (const CorpusError& e) {
        EXPECT_NE(std::string(e.what()).find("negative reaction count at row 2"),
                  std::string::npos);
    }
}

TEST(DelimitedLoad, RejectsDuplicateAndEmptyIds) {
    TempDir dir;
    EXPECT_THROW(load_csv(dir, std::string(kHeader) + "p1,pg,t,m,0,1,0,0,0,0,0\n" +
                                   "p1,pg,t,m,0,1,0,0,0,0,0\n"),
                 CorpusError);
    EXPECT_THROW(load_csv(dir, std::string(kHeader) + ",pg,t,m,0,1,0,0,0,0,0\n"), CorpusError);
}

TEST(DelimitedLoad, WarnsOnUnknownColumnAndEmptyFile) {
    TempDir dir;
    LoadReport report;
    load_csv(dir, std::string(kHeader).substr(0, std::string(kHeader).size() - 1) +
                      ",shares\np1,pg,t,m,0,1,0,0,0,0,0,12\n",
             &report);
    ASSERT_EQ(report.warnings.size(), 1u);
    EXPECT_NE(report.warnings[0].find("shares"), std::string::npos);

    LoadReport empty_report;
    const Corpus corpus = load_csv(dir, "", &empty_report);
    EXPECT_TRUE(corpus.empty());
    ASSERT_EQ(empty_report.warnings.size(), 1u);
    EXPECT_NE(empty_report.warnings[0].find("empty file"), std::string::npos);
}

TEST(RecordLoad, ParsesRecordsAndSkipsMetaAndBlankLines) {
    TempDir dir;
    const auto path = dir.write(
        "corpus.jsonl",
        "{\"_meta\":{\"kind\":\"raw-corpus\",\"seed\":0}}\n"
        "\n"
        "{\"post_id\":\"p1\",\"page_id\":\"pg\",\"created_time\":\"t\",\"message\":\"හොඳ\","
        "\"like\":3,\"love\":2,\"wow\":0,\"haha\":1,\"sad\":0,\"angry\":0,\"thankful\":0}\n");
    const Corpus corpus = load_corpus(path.string(), CorpusFormat::RecordPerLine);
    ASSERT_EQ(corpus.size(), 1u);
    EXPECT_EQ(corpus.posts[0].post_id, "p1");
    EXPECT_EQ(corpus.posts[0].love, 2);
}

TEST(RecordLoad, ReportsRowOfBadRecords) {
    TempDir dir;
    const std::string good =
        "{\"post_id\":\"p1\",\"page_id\":\"pg\",\"created_time\":\"t\",\"message\":\"m\","
        "\"like\":0,\"love\":1,\"wow\":0,\"haha\":0,\"sad\":0,\"angry\":0,\"thankful\":0}\n";

    auto expect_row2 = [&](const std::string& bad_line) {
        const auto path = dir.write("bad.jsonl", good + bad_line);
        try {
            load_corpus(path.string(), CorpusFormat::RecordPerLine);
            FAIL() << "expected CorpusError for: " << bad_line;
        } catch (const CorpusError& e) {
            EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos) << e.what();
        }
    };

    expect_row2("{not json}\n");
    expect_row2("[1,2,3]\n");
    expect_row2(
        "{\"post_id\":\"p2\",\"page_id\":\"pg\",\"created_time\":\"t\",\"message\":\"m\","
        "\"like\":0,\"love\":-1,\"wow\":0,\"haha\":0,\"sad\":0,\"angry\":0,\"thankful\":0}\n");
    expect_row2(
        "{\"post_id\":\"p2\",\"page_id\":\"pg\",\"created_time\":\"t\",\"message\":\"m\","
        "\"like\":0,\"love\":\"x\",\"wow\":0,\"haha\":0,\"sad\":0,\"angry\":0,\"thankful\":0}\n");
    expect_row2(
        "{\"post_id\":\"p2\",\"page_id\":\"pg\",\"created_time\":\"t\","
        "\"like\":0,\"love\":1,\"wow\":0,\"haha\":0,\"sad\":0,\"angry\":0,\"thankful\":0}\n");
}

TEST(Load, MissingFileIsAnError) {
    EXPECT_THROW(load_corpus("/nonexistent/corpus.csv", CorpusFormat::DelimitedTable),
                 CorpusError);
}

TEST(ReactionStats, ReproducesHeadlinePercentages) {
    Corpus corpus;
    RawPost p;
    p.post_id = "totals";
    p.like = 38889706;
    p.love = 2336796;
    p.wow = 321178;
    p.haha = 1486413;
    p.sad = 609597;
    p.angry = 349296;
    p.thankful = 7;
    corpus.posts.push_back(p);

    const CorpusStats stats = compute_reaction_stats(corpus);
    EXPECT_EQ(stats.grand_total(), 43992993u);
    EXPECT_NEAR(stats.original_pct[0], 88.40, 0.01);  // like

    ASSERT_TRUE(stats.filtered_pct.has_value());
    const auto& f = *stats.filtered_pct;
    EXPECT_NEAR(f[0], 64.61, 0.02);  // love
    EXPECT_NEAR(f[1], 8.88, 0.02);   // wow
    EXPECT_NEAR(f[2], 16.85, 0.02);  // sad
    EXPECT_NEAR(f[3], 9.66, 0.02);   // angry
    EXPECT_NEAR(f[0] + f[1] + f[2] + f[3], 100.0, 0.01);

    double original_sum = 0.0;
    for (double pct : stats.original_pct) original_sum += pct;
    EXPECT_NEAR(original_sum, 100.0, 1e-9);
}

TEST(ReactionStats, RejectsEmptyAndReactionlessCorpora) {
    EXPECT_THROW(compute_reaction_stats(Corpus{}), CorpusError);

    Corpus corpus;
    RawPost p;
    p.post_id = "p1";
    corpus.posts.push_back(p);
    EXPECT_THROW(compute_reaction_stats(corpus), CorpusError);
}

TEST(ReactionStats, FilteredViewAbsentWithoutConsideredReactions) {
    Corpus corpus;
    RawPost p;
    p.post_id = "p1";
    p.like = 5;
    p.haha = 2;
    corpus.posts.push_back(p);
    const CorpusStats stats = compute_reaction_stats(corpus);
    EXPECT_FALSE(stats.filtered_pct.has_value());
}

TEST(Filter, CountsRemovalReasons) {
    Corpus corpus;
    auto add = [&](const std::string& id, int64_t love, std::string message) {
        RawPost p;
        p.post_id = id;
        p.love = love;
        p.message = std::move(message);
        corpus.posts.push_back(p);
    };
    add("keep", 1, "text");
    add("no-reactions", 0, "text");
    add("no-text", 1, "");
    add("neither", 0, "");  // counted under no_considered_reactions only

    FilterReport report;
    const Corpus kept = filter_annotatable(corpus, &report);
    ASSERT_EQ(kept.size(), 1u);
    EXPECT_EQ(kept.posts[0].post_id, "keep");
    EXPECT_EQ(report.removed_no_considered_reactions, 2u);
    EXPECT_EQ(report.removed_empty_message, 1u);
    EXPECT_EQ(report.total_removed(), 3u);
}

TEST(SplitSizes, MatchesDocumentedProtocol) {
    const SplitSpec spec;  // 8:2 then 9:1
    const SplitSizes big = split_sizes(150000, spec);
    EXPECT_EQ(big.train, 108000u);
    EXPECT_EQ(big.val, 12000u);
    EXPECT_EQ(big.test, 30000u);

    const SplitSizes small = split_sizes(100, spec);
    EXPECT_EQ(small.train, 72u);
    EXPECT_EQ(small.val, 8u);
    EXPECT_EQ(small.test, 20u);
}

TEST(SplitSizes, FloorsWithRemainderToTrain) {
    const SplitSpec spec;
    for (size_t n : {10u, 11u, 37u, 99u, 101u, 12345u}) {
        const SplitSizes s = split_sizes(n, spec);
        EXPECT_EQ(s.train + s.val + s.test, n);
        EXPECT_EQ(s.test, n * 2 / 10);
        const size_t dev = n - s.test;
        EXPECT_EQ(s.val, dev * 1 / 10);
    }
}

TEST(SplitSpec, RejectsZeroWeights) {
    SplitSpec spec;
    spec.dev_test_ratio = {0, 2};
    EXPECT_THROW(spec.validate(), CorpusError);
    spec = SplitSpec{};
    spec.train_val_ratio = {9, 0};
    EXPECT_THROW(spec.validate(), CorpusError);
}

TEST(HoldoutSplit, PartitionsWithoutLossOrOverlap) {
    Corpus corpus;
    for (int i = 0; i < 100; ++i) {
        RawPost p;
        p.post_id = "p" + std::to_string(i);
        p.love = 1;
        corpus.posts.push_back(p);
    }
    SplitSpec spec;
    spec.seed = 21;
    const HoldoutSplit split = split_holdout(corpus, spec);
    EXPECT_EQ(split.train.size(), 72u);
    EXPECT_EQ(split.val.size(), 8u);
    EXPECT_EQ(split.test.size(), 20u);

    std::set<std::string> ids;
    for (const Corpus* part : {&split.train, &split.val, &split.test}) {
        for (const RawPost& p : part->posts) {
            EXPECT_TRUE(ids.insert(p.post_id).second) << "duplicate " << p.post_id;
        }
    }
    EXPECT_EQ(ids.size(), 100u);
}

TEST(HoldoutSplit, SeedControlsAssignment) {
    Corpus corpus;
    for (int i = 0; i < 50; ++i) {
        RawPost p;
        p.post_id = "p" + std::to_string(i);
        p.love = 1;
        corpus.posts.push_back(p);
    }
    SplitSpec a, b, c;
    a.seed = b.seed = 5;
    c.seed = 6;
    const HoldoutSplit s1 = split_holdout(corpus, a);
    const HoldoutSplit s2 = split_holdout(corpus, b);
    const HoldoutSplit s3 = split_holdout(corpus, c);

    auto ids = [](const Corpus& part) {
        std::vector<std::string> out;
        for (const RawPost& p : part.posts) out.push_back(p.post_id);
        return out;
    };
    EXPECT_EQ(ids(s1.train), ids(s2.train));
    EXPECT_EQ(ids(s1.test), ids(s2.test));
    EXPECT_NE(ids(s1.test), ids(s3.test));
}

TEST(HoldoutSplit, RefusesTinyCorpora) {
    Corpus corpus;
    for (int i = 0; i < 9; ++i) {
        RawPost p;
        p.post_id = "p" + std::to_string(i);
        corpus.posts.push_back(p);
    }
    EXPECT_THROW(split_holdout(corpus, SplitSpec{}), CorpusError);
}
