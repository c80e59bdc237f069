// Distant-supervision annotation: reaction counts -> normalized scores ->
// net sentiment -> binary label. Love and Wow count as positive, Sad and
// Angry as negative; Like, Haha, and Thankful never enter the formulas.
#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "reactsent/corpus.hpp"

namespace reactsent {

class AnnotateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The four considered reaction counts, plus the excluded three retained
/// for statistics only.
struct ReactionCounts {
    int64_t love = 0;
    int64_t wow = 0;
    int64_t sad = 0;
    int64_t angry = 0;
    int64_t like = 0;
    int64_t haha = 0;
    int64_t thankful = 0;

    static ReactionCounts from_post(const RawPost& p) {
        return {p.love, p.wow, p.sad, p.angry, p.like, p.haha, p.thankful};
    }

    int64_t considered_total() const { return love + wow + sad + angry; }
};

/// t, the four normalized values, pos, neg, and sen in [-1, 1].
struct SentimentScore {
    int64_t t = 0;
    double n_love = 0.0;
    double n_wow = 0.0;
    double n_sad = 0.0;
    double n_angry = 0.0;
    double pos = 0.0;
    double neg = 0.0;
    double sen = 0.0;

    std::array<double, 4> normalized() const { return {n_love, n_wow, n_sad, n_angry}; }
};

enum class SentimentLabel { Positive, Negative };

inline std::string_view label_name(SentimentLabel label) {
    return label == SentimentLabel::Positive ? "Positive" : "Negative";
}

inline SentimentLabel label_from_name(std::string_view name) {
    if (name == "Positive") return SentimentLabel::Positive;
    if (name == "Negative") return SentimentLabel::Negative;
    throw AnnotateError("unknown sentiment label: '" + std::string(name) + "'");
}

/// Normalizes the considered counts by their total and derives pos, neg,
/// and the net sentiment. Requires at least one considered reaction.
inline SentimentScore score(const ReactionCounts& counts) {
    const int64_t t = counts.considered_total();
    if (t <= 0) {
        throw AnnotateError("no considered reactions (love+wow+sad+angry = 0)");
    }
    SentimentScore s;
    s.t = t;
    const double dt = static_cast<double>(t);
    s.n_love = double(counts.love) / dt;
    s.n_wow = double(counts.wow) / dt;
    s.n_sad = double(counts.sad) / dt;
    s.n_angry = double(counts.angry) / dt;
    s.pos = s.n_love + s.n_wow;
    s.neg = s.n_sad + s.n_angry;
    s.sen = s.pos - s.neg;
    return s;
}

/// The boundary sen = 0 maps to Positive.
inline SentimentLabel classify(const SentimentScore& s) {
    return s.sen >= 0.0 ? SentimentLabel::Positive : SentimentLabel::Negative;
}

/// What to do with posts that have no considered reactions: drop them, or
/// treat sen as 0 (hence Positive).
enum class ZeroPolicy { Drop, Positive };

inline std::string_view zero_policy_name(ZeroPolicy p) {
    return p == ZeroPolicy::Drop ? "drop" : "positive";
}

inline ZeroPolicy zero_policy_from_name(std::string_view name) {
    if (name == "drop") return ZeroPolicy::Drop;
    if (name == "positive") return ZeroPolicy::Positive;
    throw AnnotateError("unknown zero policy: '" + std::string(name) + "'");
}

struct LabelHistogram {
    size_t positive = 0;
    size_t negative = 0;

    size_t total() const { return positive + negative; }
};

struct AnnotatedPost {
    RawPost post;
    SentimentScore score;  // all-zero when zero_defaulted
    SentimentLabel label = SentimentLabel::Positive;
    bool zero_defaulted = false;
};

struct AnnotatedCorpus {
    std::vector<AnnotatedPost> posts;
    LabelHistogram histogram;
};

inline AnnotatedCorpus annotate_corpus(const Corpus& corpus, ZeroPolicy policy) {
    AnnotatedCorpus out;
    out.posts.reserve(corpus.size());
    for (const RawPost& p : corpus.posts) {
        const ReactionCounts counts = ReactionCounts::from_post(p);
        AnnotatedPost ap;
        ap.post = p;
        if (counts.considered_total() > 0) {
            ap.score = score(counts);
            ap.label = classify(ap.score);
        } else if (policy == ZeroPolicy::Drop) {
            continue;
        } else {
            ap.label = SentimentLabel::Positive;
            ap.zero_defaulted = true;
        }
        if (ap.label == SentimentLabel::Positive) {
            ++out.histogram.positive;
        } else {
            ++out.histogram.negative;
        }
        out.posts.push_back(std::move(ap));
    }
    return out;
}

}  // namespace reactsent
