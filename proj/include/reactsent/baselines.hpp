// Token-lookup baselines over reaction distributions. Both models learn a
// per-token statistic from training documents (each document contributes
// each of its distinct tokens once) and predict by averaging the statistic
// over a new document's token occurrences, falling back to the training
// prior when no token is known.
//
//   TokenReactionTable  mean unit-sum [love, wow, sad, angry] mix per
//                       token; labels by the sign of the mix sentiment
//   StarModel           maps sentiment to a 1-5 star value
//                       (3 + 2 * sen), averages stars per token, and
//                       labels Positive at >= 3 stars
#pragma once

#include <array>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "reactsent/annotate.hpp"

namespace reactsent {

class BaselineError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One training document: its tokens and the unit-sum reaction mix
/// [love, wow, sad, angry] computed from its reactions.
struct BaselineDoc {
    std::vector<std::string> tokens;
    std::array<double, 4> mix{};
};

/// Sentiment of a reaction mix: (love + wow) - (sad + angry), in [-1, 1]
/// when the mix is unit-sum.
inline double mix_sentiment(const std::array<double, 4>& mix) {
    return (mix[0] + mix[1]) - (mix[2] + mix[3]);
}

/// Star value of a sentiment score, linearly mapping [-1, 1] onto [1, 5].
inline double star_of(double sen) { return 3.0 + 2.0 * sen; }

namespace detail {

inline void check_unit_mix(const std::array<double, 4>& mix, const std::string& what) {
    double sum = 0.0;
    for (double v : mix) {
        if (v < 0.0) throw BaselineError(what + " has a negative component");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw BaselineError(what + " must sum to 1, got " + std::to_string(sum));
    }
}

inline std::set<std::string> distinct_tokens(const std::vector<std::string>& tokens) {
    return {tokens.begin(), tokens.end()};
}

inline nlohmann::json parse_model_record(const std::string& line, size_t row) {
    nlohmann::json value = nlohmann::json::parse(line, nullptr, false);
    if (value.is_discarded() || !value.is_object()) {
        throw BaselineError("malformed model record at line " + std::to_string(row));
    }
    return value;
}

inline nlohmann::json read_model_header(std::istream& in, const char* kind) {
    std::string line;
    if (!std::getline(in, line)) {
        throw BaselineError("model file is empty");
    }
    nlohmann::json header = parse_model_record(line, 1);
    if (header.value("kind", std::string()) != kind) {
        throw BaselineError("model file is not a " + std::string(kind) + " dump");
    }
    return header;
}

}  // namespace detail

/// Per-token mean reaction mix. Prediction is the mean over a document's
/// in-table token occurrences, or the global training mean when none are
/// known; the predicted mix is always unit-sum.
class TokenReactionTable {
public:
    struct Entry {
        std::array<double, 4> mean{};
        size_t support = 0;  // training documents containing the token
    };

    void fit(std::span<const BaselineDoc> docs) {
        if (docs.empty()) throw BaselineError("cannot fit on an empty document set");
        table_.clear();
        global_mean_ = {};
        docs_ = docs.size();
        std::map<std::string, std::array<double, 4>> sums;
        std::map<std::string, size_t> counts;
        for (const BaselineDoc& doc : docs) {
            detail::check_unit_mix(doc.mix, "training reaction mix");
            for (size_t i = 0; i < 4; ++i) global_mean_[i] += doc.mix[i];
            for (const std::string& token : detail::distinct_tokens(doc.tokens)) {
                auto& sum = sums[token];
                for (size_t i = 0; i < 4; ++i) sum[i] += doc.mix[i];
                ++counts[token];
            }
        }
        for (size_t i = 0; i < 4; ++i) global_mean_[i] /= double(docs.size());
        for (const auto& [token, sum] : sums) {
            Entry entry;
            entry.support = counts[token];
            for (size_t i = 0; i < 4; ++i) entry.mean[i] = sum[i] / double(entry.support);
            table_.emplace(token, entry);
        }
        fitted_ = true;
    }

    std::array<double, 4> predict_mix(std::span<const std::string> tokens) const {
        require_fitted();
        std::array<double, 4> acc{};
        size_t known = 0;
        for (const std::string& token : tokens) {
            auto it = table_.find(token);
            if (it == table_.end()) continue;
            for (size_t i = 0; i < 4; ++i) acc[i] += it->second.mean[i];
            ++known;
        }
        if (known == 0) return global_mean_;
        for (double& v : acc) v /= double(known);
        return acc;
    }

    SentimentLabel predict(std::span<const std::string> tokens) const {
        return mix_sentiment(predict_mix(tokens)) >= 0.0 ? SentimentLabel::Positive
                                                         : SentimentLabel::Negative;
    }

    size_t size() const { return table_.size(); }
    size_t fitted_docs() const { return docs_; }
    const std::array<double, 4>& global_mean() const { return global_mean_; }
    const std::map<std::string, Entry>& entries() const { return table_; }

    /// One JSON object per line: a header record, then the tokens in
    /// lexicographic order.
    void save(std::ostream& out) const {
        require_fitted();
        nlohmann::json header = {{"kind", kKind},
                                 {"docs", docs_},
                                 {"global_mean", global_mean_}};
        out << header.dump() << '\n';
        for (const auto& [token, entry] : table_) {
            nlohmann::json rec = {
                {"token", token}, {"mean", entry.mean}, {"support", entry.support}};
            out << rec.dump() << '\n';
        }
    }

    static TokenReactionTable load(std::istream& in) {
        TokenReactionTable model;
        nlohmann::json header = detail::read_model_header(in, kKind);
        model.docs_ = header.at("docs").get<size_t>();
        model.global_mean_ = header.at("global_mean").get<std::array<double, 4>>();
        std::string line;
        size_t row = 1;
        while (std::getline(in, line)) {
            ++row;
            if (line.empty()) continue;
            nlohmann::json rec = detail::parse_model_record(line, row);
            Entry entry;
            entry.mean = rec.at("mean").get<std::array<double, 4>>();
            entry.support = rec.at("support").get<size_t>();
            model.table_.emplace(rec.at("token").get<std::string>(), entry);
        }
        model.fitted_ = true;
        return model;
    }

private:
    static constexpr const char* kKind = "token-reaction-table";

    void require_fitted() const {
        if (!fitted_) throw BaselineError("model has not been fitted");
    }

    std::map<std::string, Entry> table_;
    std::array<double, 4> global_mean_{};
    size_t docs_ = 0;
    bool fitted_ = false;
};

/// Per-token mean star rating. Prediction averages the stars of known
/// token occurrences, or uses the training prior when none are known.
class StarModel {
public:
    struct Entry {
        double star = 0.0;
        size_t support = 0;
    };

    void fit(std::span<const BaselineDoc> docs) {
        if (docs.empty()) throw BaselineError("cannot fit on an empty document set");
        table_.clear();
        prior_ = 0.0;
        docs_ = docs.size();
        std::map<std::string, double> sums;
        std::map<std::string, size_t> counts;
        for (const BaselineDoc& doc : docs) {
            detail::check_unit_mix(doc.mix, "training reaction mix");
            const double star = star_of(mix_sentiment(doc.mix));
            prior_ += star;
            for (const std::string& token : detail::distinct_tokens(doc.tokens)) {
                sums[token] += star;
                ++counts[token];
            }
        }
        prior_ /= double(docs.size());
        for (const auto& [token, sum] : sums) {
            table_.emplace(token, Entry{sum / double(counts[token]), counts[token]});
        }
        fitted_ = true;
    }

    double predict_star(std::span<const std::string> tokens) const {
        require_fitted();
        double acc = 0.0;
        size_t known = 0;
        for (const std::string& token : tokens) {
            auto it = table_.find(token);
            if (it == table_.end()) continue;
            acc += it->second.star;
            ++known;
        }
        return known == 0 ? prior_ : acc / double(known);
    }

    SentimentLabel predict(std::span<const std::string> tokens) const {
        return predict_star(tokens) >= 3.0 ? SentimentLabel::Positive
                                           : SentimentLabel::Negative;
    }

    size_t size() const { return table_.size(); }
    double prior_star() const { return prior_; }
    const std::map<std::string, Entry>& entries() const { return table_; }

    void save(std::ostream& out) const {
        require_fitted();
        nlohmann::json header = {{"kind", kKind}, {"docs", docs_}, {"prior", prior_}};
        out << header.dump() << '\n';
        for (const auto& [token, entry] : table_) {
            nlohmann::json rec = {
                {"token", token}, {"star", entry.star}, {"support", entry.support}};
            out << rec.dump() << '\n';
        }
    }

    static StarModel load(std::istream& in) {
        StarModel model;
        nlohmann::json header = detail::read_model_header(in, kKind);
        model.docs_ = header.at("docs").get<size_t>();
        model.prior_ = header.at("prior").get<double>();
        std::string line;
        size_t row = 1;
        while (std::getline(in, line)) {
            ++row;
            if (line.empty()) continue;
            nlohmann::json rec = detail::parse_model_record(line, row);
            model.table_.emplace(
                rec.at("token").get<std::string>(),
                Entry{rec.at("star").get<double>(), rec.at("support").get<size_t>()});
        }
        model.fitted_ = true;
        return model;
    }

private:
    static constexpr const char* kKind = "star-model";

    void require_fitted() const {
        if (!fitted_) throw BaselineError("model has not been fitted");
    }

    std::map<std::string, Entry> table_;
    double prior_ = 0.0;
    size_t docs_ = 0;
    bool fitted_ = false;
};

}  // namespace reactsent
