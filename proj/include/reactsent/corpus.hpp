// Reaction-annotated post corpora: loading, validation, reaction
// statistics, annotatability filtering, and seeded holdout splitting.
#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "reactsent/rng.hpp"

namespace reactsent {

class CorpusError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One social-media post: message text plus the seven reaction counts.
struct RawPost {
    std::string post_id;
    std::string page_id;
    std::string created_time;
    std::string message;
    int64_t like = 0;
    int64_t love = 0;
    int64_t wow = 0;
    int64_t haha = 0;
    int64_t sad = 0;
    int64_t angry = 0;
    int64_t thankful = 0;

    /// love + wow + sad + angry; the only reactions the label formulas use.
    int64_t considered_total() const { return love + wow + sad + angry; }
};

struct Corpus {
    std::vector<RawPost> posts;
    std::string provenance;

    size_t size() const { return posts.size(); }
    bool empty() const { return posts.empty(); }
};

enum class CorpusFormat { DelimitedTable, RecordPerLine };

/// Non-fatal observations made while loading (empty file, ignored columns).
struct LoadReport {
    std::vector<std::string> warnings;
};

inline constexpr std::array<std::string_view, 11> kPostFields = {
    "post_id", "page_id",  "created_time", "message", "like", "love",
    "wow",     "haha",     "sad",          "angry",   "thankful"};

inline constexpr std::array<std::string_view, 7> kReactionNames = {
    "like", "love", "wow", "haha", "sad", "angry", "thankful"};

inline constexpr std::array<std::string_view, 4> kConsideredReactions = {
    "love", "wow", "sad", "angry"};

namespace detail {

inline int64_t& reaction_field(RawPost& p, std::string_view name) {
    if (name == "like") return p.like;
    if (name == "love") return p.love;
    if (name == "wow") return p.wow;
    if (name == "haha") return p.haha;
    if (name == "sad") return p.sad;
    if (name == "angry") return p.angry;
    return p.thankful;
}

inline int64_t reaction_value(const RawPost& p, std::string_view name) {
    return reaction_field(const_cast<RawPost&>(p), name);
}

inline bool is_reaction_name(std::string_view name) {
    for (auto r : kReactionNames) {
        if (r == name) return true;
    }
    return false;
}

// Reads one delimited record. Fields may be quoted; quoted fields may
// contain the delimiter, doubled quotes, and newlines. Returns false at EOF.
inline bool read_delimited_record(std::istream& in, char delim,
                                  std::vector<std::string>& fields, size_t& line_no) {
    fields.clear();
    int c = in.get();
    if (c == EOF) return false;
    std::string field;
    bool quoted = false;
    while (true) {
        if (c == EOF) {
            fields.push_back(std::move(field));
            return true;
        }
        if (quoted) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get();
                    field.push_back('"');
                } else {
                    quoted = false;
                }
            } else {
                if (c == '\n') ++line_no;
                field.push_back(char(c));
            }
        } else if (c == '"' && field.empty()) {
            quoted = true;
        } else if (c == delim) {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c == '\n') {
            ++line_no;
            if (!field.empty() && field.back() == '\r') field.pop_back();
            fields.push_back(std::move(field));
            return true;
        } else {
            field.push_back(char(c));
        }
        c = in.get();
    }
}

inline int64_t parse_count(const std::string& text, std::string_view field, size_t row) {
    size_t pos = 0;
    int64_t value = 0;
    try {
        value = std::stoll(text, &pos);
    } catch (const std::exception&) {
        throw CorpusError("unparseable " + std::string(field) + " at row " +
                          std::to_string(row) + ": '" + text + "'");
    }
    if (pos != text.size()) {
        throw CorpusError("unparseable " + std::string(field) + " at row " +
                          std::to_string(row) + ": '" + text + "'");
    }
    if (value < 0) {
        throw CorpusError("negative reaction count at row " + std::to_string(row));
    }
    return value;
}

inline void check_unique_id(std::unordered_set<std::string>& seen, const RawPost& p,
                            size_t row) {
    if (p.post_id.empty()) {
        throw CorpusError("empty post_id at row " + std::to_string(row));
    }
    if (!seen.insert(p.post_id).second) {
        throw CorpusError("duplicate post_id '" + p.post_id + "' at row " +
                          std::to_string(row));
    }
}

inline Corpus load_delimited(std::istream& in, const std::string& provenance,
                             char delim, LoadReport* report) {
    Corpus corpus;
    corpus.provenance = provenance;
    std::vector<std::string> fields;
    size_t line_no = 1;
    if (!read_delimited_record(in, delim, fields, line_no)) {
        if (report) report->warnings.push_back("empty file: " + provenance);
        return corpus;
    }
    // Header row maps column positions to the RawPost schema.
    std::vector<int> column_of(kPostFields.size(), -1);
    for (size_t col = 0; col < fields.size(); ++col) {
        bool known = false;
        for (size_t f = 0; f < kPostFields.size(); ++f) {
            if (fields[col] == kPostFields[f]) {
                column_of[f] = static_cast<int>(col);
                known = true;
                break;
            }
        }
        if (!known && report) {
            report->warnings.push_back("ignoring unknown column '" + fields[col] + "'");
        }
    }
    for (size_t f = 0; f < kPostFields.size(); ++f) {
        if (column_of[f] < 0) {
            throw CorpusError("missing field '" + std::string(kPostFields[f]) +
                              "' in header");
        }
    }
    std::unordered_set<std::string> seen_ids;
    size_t row = 1;  // header is row 1
    size_t record_start = line_no;
    while (read_delimited_record(in, delim, fields, line_no)) {
        ++row;
        if (fields.size() == 1 && fields[0].empty()) {
            record_start = line_no;
            continue;  // blank line
        }
        RawPost post;
        for (size_t f = 0; f < kPostFields.size(); ++f) {
            size_t col = static_cast<size_t>(column_of[f]);
            if (col >= fields.size()) {
                throw CorpusError("missing field '" + std::string(kPostFields[f]) +
                                  "' at row " + std::to_string(row));
            }
            const std::string& value = fields[col];
            std::string_view name = kPostFields[f];
            if (name == "post_id") {
                post.post_id = value;
            } else if (name == "page_id") {
                post.page_id = value;
            } else if (name == "created_time") {
                post.created_time = value;
            } else if (name == "message") {
                post.message = value;
            } else {
                reaction_field(post, name) = parse_count(value, name, row);
            }
        }
        check_unique_id(seen_ids, post, row);
        corpus.posts.push_back(std::move(post));
        record_start = line_no;
    }
    (void)record_start;
    if (corpus.posts.empty() && report) {
        report->warnings.push_back("no records in " + provenance);
    }
    return corpus;
}

inline Corpus load_jsonl(std::istream& in, const std::string& provenance,
                         LoadReport* report) {
    Corpus corpus;
    corpus.provenance = provenance;
    std::unordered_set<std::string> seen_ids;
    std::string line;
    size_t row = 0;
    bool any_line = false;
    bool warned_extra = false;
    while (std::getline(in, line)) {
        ++row;
        any_line = true;
        if (line.empty()) continue;
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw CorpusError("unparseable record at row " + std::to_string(row) + ": " +
                              e.what());
        }
        if (!rec.is_object()) {
            throw CorpusError("unparseable record at row " + std::to_string(row) +
                              ": not an object");
        }
        if (rec.contains("_meta")) continue;
        RawPost post;
        for (std::string_view name : kPostFields) {
            auto it = rec.find(name);
            if (it == rec.end()) {
                throw CorpusError("missing field '" + std::string(name) + "' at row " +
                                  std::to_string(row));
            }
            if (is_reaction_name(name)) {
                if (!it->is_number_integer() ||
                    (it->is_number_unsigned() ? false : it->get<int64_t>() < 0)) {
                    if (it->is_number_integer() && it->get<int64_t>() < 0) {
                        throw CorpusError("negative reaction count at row " +
                                          std::to_string(row));
                    }
                    throw CorpusError("unparseable " + std::string(name) + " at row " +
                                      std::to_string(row));
                }
                reaction_field(post, name) = it->get<int64_t>();
            } else if (!it->is_string()) {
                throw CorpusError("unparseable " + std::string(name) + " at row " +
                                  std::to_string(row));
            } else if (name == "post_id") {
                post.post_id = it->get<std::string>();
            } else if (name == "page_id") {
                post.page_id = it->get<std::string>();
            } else if (name == "created_time") {
                post.created_time = it->get<std::string>();
            } else {
                post.message = it->get<std::string>();
            }
        }
        if (!warned_extra && report) {
            for (auto& [key, _] : rec.items()) {
                bool known = false;
                for (auto f : kPostFields) {
                    if (key == f) known = true;
                }
                if (!known) {
                    report->warnings.push_back("ignoring unknown field '" + key + "'");
                    warned_extra = true;
                    break;
                }
            }
        }
        check_unique_id(seen_ids, post, row);
        corpus.posts.push_back(std::move(post));
    }
    if (!any_line && report) {
        report->warnings.push_back("empty file: " + provenance);
    }
    return corpus;
}

}  // namespace detail

/// Loads a corpus file, preserving record order. Malformed rows raise
/// CorpusError naming the offending row.
inline Corpus load_corpus(const std::string& path, CorpusFormat format,
                          LoadReport* report = nullptr, char delimiter = ',') {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw CorpusError("cannot open corpus file: " + path);
    }
    if (format == CorpusFormat::DelimitedTable) {
        return detail::load_delimited(in, path, delimiter, report);
    }
    return detail::load_jsonl(in, path, report);
}

/// Per-reaction totals and percentage views. `original` covers all seven
/// reactions; `filtered` covers only {love, wow, sad, angry} and is absent
/// when the corpus has none of them.
struct CorpusStats {
    std::array<uint64_t, 7> totals{};  // order of kReactionNames
    std::array<double, 7> original_pct{};
    std::optional<std::array<double, 4>> filtered_pct;  // order of kConsideredReactions

    uint64_t grand_total() const {
        uint64_t t = 0;
        for (auto v : totals) t += v;
        return t;
    }
};

inline CorpusStats compute_reaction_stats(const Corpus& corpus) {
    if (corpus.empty()) {
        throw CorpusError("cannot compute reaction stats of an empty corpus");
    }
    CorpusStats stats;
    for (const RawPost& p : corpus.posts) {
        for (size_t i = 0; i < kReactionNames.size(); ++i) {
            stats.totals[i] +=
                static_cast<uint64_t>(detail::reaction_value(p, kReactionNames[i]));
        }
    }
    const uint64_t grand = stats.grand_total();
    if (grand == 0) {
        throw CorpusError("corpus has no reactions");
    }
    for (size_t i = 0; i < stats.totals.size(); ++i) {
        stats.original_pct[i] = 100.0 * double(stats.totals[i]) / double(grand);
    }
    uint64_t considered = 0;
    for (auto name : kConsideredReactions) {
        for (size_t i = 0; i < kReactionNames.size(); ++i) {
            if (kReactionNames[i] == name) considered += stats.totals[i];
        }
    }
    if (considered > 0) {
        std::array<double, 4> pct{};
        for (size_t j = 0; j < kConsideredReactions.size(); ++j) {
            uint64_t count = 0;
            for (size_t i = 0; i < kReactionNames.size(); ++i) {
                if (kReactionNames[i] == kConsideredReactions[j]) count = stats.totals[i];
            }
            pct[j] = 100.0 * double(count) / double(considered);
        }
        stats.filtered_pct = pct;
    }
    return stats;
}

/// Why filter_annotatable dropped posts. A post failing both checks is
/// counted once, under no_considered_reactions.
struct FilterReport {
    size_t removed_no_considered_reactions = 0;
    size_t removed_empty_message = 0;

    size_t total_removed() const {
        return removed_no_considered_reactions + removed_empty_message;
    }
};

/// Keeps posts that carry at least one considered reaction and a non-empty
/// message; everything else lacks either a label signal or text to learn from.
inline Corpus filter_annotatable(const Corpus& corpus, FilterReport* report = nullptr) {
    Corpus out;
    out.provenance = corpus.provenance;
    out.posts.reserve(corpus.size());
    for (const RawPost& p : corpus.posts) {
        if (p.considered_total() < 1) {
            if (report) ++report->removed_no_considered_reactions;
        } else if (p.message.empty()) {
            if (report) ++report->removed_empty_message;
        } else {
            out.posts.push_back(p);
        }
    }
    return out;
}

/// Holdout protocol: dev/test then train/val, both seeded and floor-rounded
/// with the remainder going to train.
struct SplitSpec {
    std::pair<uint32_t, uint32_t> dev_test_ratio{8, 2};
    std::pair<uint32_t, uint32_t> train_val_ratio{9, 1};
    uint64_t seed = 0;

    void validate() const {
        if (dev_test_ratio.first == 0 || dev_test_ratio.second == 0 ||
            train_val_ratio.first == 0 || train_val_ratio.second == 0) {
            throw CorpusError("split ratio weights must be strictly positive");
        }
    }
};

struct SplitSizes {
    size_t train = 0;
    size_t val = 0;
    size_t test = 0;
};

inline SplitSizes split_sizes(size_t n, const SplitSpec& spec) {
    spec.validate();
    SplitSizes s;
    const auto [dev_w, test_w] = spec.dev_test_ratio;
    const auto [train_w, val_w] = spec.train_val_ratio;
    s.test = n * test_w / (dev_w + test_w);
    const size_t dev = n - s.test;
    s.val = dev * val_w / (train_w + val_w);
    s.train = dev - s.val;
    return s;
}

struct HoldoutSplit {
    Corpus train;
    Corpus val;
    Corpus test;
};

/// Seeded Fisher-Yates over post indices, then an exact partition into
/// train/val/test. Identical seed, identical partition.
inline HoldoutSplit split_holdout(const Corpus& corpus, const SplitSpec& spec) {
    spec.validate();
    if (corpus.size() < 10) {
        throw CorpusError("corpus too small to split: " + std::to_string(corpus.size()) +
                          " posts (need at least 10)");
    }
    std::vector<size_t> order(corpus.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(spec.seed);
    rng.fork("split").shuffle(order);

    const SplitSizes sizes = split_sizes(corpus.size(), spec);
    HoldoutSplit split;
    split.train.provenance = corpus.provenance;
    split.val.provenance = corpus.provenance;
    split.test.provenance = corpus.provenance;
    for (size_t i = 0; i < order.size(); ++i) {
        const RawPost& p = corpus.posts[order[i]];
        if (i < sizes.train) {
            split.train.posts.push_back(p);
        } else if (i < sizes.train + sizes.val) {
            split.val.posts.push_back(p);
        } else {
            split.test.posts.push_back(p);
        }
    }
    return split;
}

}  // namespace reactsent
