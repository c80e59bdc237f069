// Generated classification corpus with a planted sentiment lexicon.
//
// Each post draws a polarity, writes 2-4 signal tokens from that
// polarity's 200-token lexicon plus neutral fillers, and gets a reaction
// mix concentrated on the matching reactions, so its distant-supervision
// label equals its text polarity. After the standard three-way split, 10%
// of the train and validation posts get label and mix flipped (label
// noise); the test split keeps clean labels, so scores measure how well a
// model recovers the planted lexicon despite corrupted supervision.
#pragma once

#include <string>
#include <vector>

#include <reactsent/pipeline.hpp>
#include <reactsent/rng.hpp>

namespace testsupport {

struct SyntheticCorpus {
    reactsent::LabeledSplit split;  // train/val carry the noise, test is clean
    size_t flipped = 0;             // posts whose supervision was corrupted
};

namespace detail {

inline void flip_labels(reactsent::LabeledCorpus& part, double rate, reactsent::Rng& rng,
                        size_t& flipped) {
    using reactsent::SentimentLabel;
    std::vector<size_t> order(part.posts.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    const size_t n = size_t(rate * double(part.posts.size()));
    for (size_t i = 0; i < n; ++i) {
        reactsent::LabeledPost& post = part.posts[order[i]];
        std::swap(post.mix[0], post.mix[2]);  // love <-> sad
        std::swap(post.mix[1], post.mix[3]);  // wow <-> angry
        post.sen = -post.sen;
        if (post.label == SentimentLabel::Positive) {
            post.label = SentimentLabel::Negative;
            --part.histogram.positive;
            ++part.histogram.negative;
        } else {
            post.label = SentimentLabel::Positive;
            --part.histogram.negative;
            ++part.histogram.positive;
        }
        ++flipped;
    }
}

}  // namespace detail

inline SyntheticCorpus make_synthetic_corpus(uint64_t seed, size_t posts = 2000,
                                             double noise_rate = 0.10) {
    using namespace reactsent;
    Rng rng = Rng(seed).fork("synthetic");

    LabeledCorpus corpus;
    for (size_t i = 0; i < posts; ++i) {
        LabeledPost post;
        post.post_id = "s" + std::to_string(i);
        const bool positive = rng.next_below(2) == 0;

        const size_t len = 10 + rng.next_below(7);     // 10..16 tokens
        const size_t signals = 2 + rng.next_below(3);  // 2..4 signal tokens
        for (size_t t = 0; t < len; ++t) {
            post.tokens.push_back("fill" + std::to_string(rng.next_below(300)));
        }
        // Signal tokens sit in the front three quarters: a last-state reader
        // has to carry their evidence across the filler tail, while a
        // bidirectional stack also reads them from the other end.
        std::vector<size_t> slots(len * 3 / 4);
        for (size_t s = 0; s < slots.size(); ++s) slots[s] = s;
        rng.shuffle(slots);
        for (size_t s = 0; s < signals; ++s) {
            post.tokens[slots[s]] =
                (positive ? "pos" : "neg") + std::to_string(rng.next_below(200));
        }

        // Reaction mix dominated by the matching polarity: the leading pair
        // holds 70-95% of the mass, split randomly inside each pair.
        const double lead = rng.next_double(0.70, 0.95);
        const double a = rng.next_double();
        const double b = rng.next_double();
        const double hi0 = lead * a, hi1 = lead * (1.0 - a);
        const double lo0 = (1.0 - lead) * b, lo1 = (1.0 - lead) * (1.0 - b);
        post.mix = positive ? std::array<double, 4>{hi0, hi1, lo0, lo1}
                            : std::array<double, 4>{lo0, lo1, hi0, hi1};
        post.sen = mix_sentiment(post.mix);
        post.label = post.sen >= 0.0 ? SentimentLabel::Positive : SentimentLabel::Negative;
        if (post.label == SentimentLabel::Positive) {
            ++corpus.histogram.positive;
        } else {
            ++corpus.histogram.negative;
        }
        corpus.posts.push_back(std::move(post));
    }

    SplitSpec spec;
    spec.seed = seed;
    SyntheticCorpus result;
    result.split = split_labeled(corpus, spec);

    Rng noise_rng = Rng(seed).fork("noise");
    detail::flip_labels(result.split.train, noise_rate, noise_rng, result.flipped);
    detail::flip_labels(result.split.val, noise_rate, noise_rng, result.flipped);
    return result;
}

}  // namespace testsupport
