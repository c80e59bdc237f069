// Vocabulary construction and dense token vectors: pretrained word-vector
// loading (fastText-style text format) or seeded random initialization.
#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "reactsent/normalizer.hpp"
#include "reactsent/rng.hpp"
#include "reactsent/tensor.hpp"

namespace reactsent {

class EmbeddingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Vocabulary {
public:
    static constexpr int32_t kPad = 0;
    static constexpr int32_t kOov = 1;

    Vocabulary() : index_to_token_{"<pad>", "<oov>"} {}

    /// Tokens with corpus frequency >= min_count, ordered by descending
    /// frequency then lexicographically; deterministic across runs.
    static Vocabulary build(const std::vector<CleanedText>& corpus, size_t min_count = 1) {
        std::map<std::string, size_t> freq;  // ordered: lexicographic tie-break for free
        for (const CleanedText& text : corpus) {
            for (const std::string& token : text.tokens) {
                ++freq[token];
            }
        }
        std::vector<std::pair<std::string_view, size_t>> entries;
        entries.reserve(freq.size());
        for (const auto& [token, count] : freq) {
            if (count >= min_count) entries.emplace_back(token, count);
        }
        std::stable_sort(entries.begin(), entries.end(),
                         [](const auto& a, const auto& b) { return a.second > b.second; });
        Vocabulary vocab;
        for (const auto& [token, _] : entries) {
            vocab.add(std::string(token));
        }
        return vocab;
    }

    int32_t add(std::string token) {
        auto [it, inserted] =
            token_to_index_.emplace(std::move(token), int32_t(index_to_token_.size()));
        if (inserted) index_to_token_.push_back(it->first);
        return it->second;
    }

    /// Index of a token, OOV for unknown ones.
    int32_t lookup(std::string_view token) const {
        auto it = token_to_index_.find(std::string(token));
        return it == token_to_index_.end() ? kOov : it->second;
    }

    bool contains(std::string_view token) const {
        return token_to_index_.count(std::string(token)) > 0;
    }

    size_t size() const { return index_to_token_.size(); }

    const std::string& token(int32_t index) const { return index_to_token_[size_t(index)]; }

    const std::vector<std::string>& tokens() const { return index_to_token_; }

    /// Order-sensitive digest of the token list; recorded in model files so
    /// a model is never applied over a different vocabulary.
    uint64_t hash() const {
        uint64_t h = 0xCBF29CE484222325ULL;
        for (const std::string& t : index_to_token_) {
            h = fnv1a64(t, h);
            h = fnv1a64(std::string_view("\x1f", 1), h);
        }
        return h;
    }

private:
    std::unordered_map<std::string, int32_t> token_to_index_;
    std::vector<std::string> index_to_token_;
};

/// |vocabulary| x dim row matrix. Row kPad is all-zero and never updated.
struct EmbeddingMatrix {
    size_t dim = 300;
    Tensor rows;
    bool trainable = false;

    std::span<const double> vector_of(int32_t index) const { return rows.row(size_t(index)); }
};

/// All token rows (and OOV) uniform in [-0.1, 0.1], PAD zero.
inline EmbeddingMatrix random_embeddings(const Vocabulary& vocab, size_t dim, Rng rng) {
    EmbeddingMatrix m;
    m.dim = dim;
    m.rows = Tensor::zeros({vocab.size(), dim});
    for (size_t r = Vocabulary::kOov; r < vocab.size(); ++r) {
        for (double& v : m.rows.row(r)) {
            v = rng.next_double(-0.1, 0.1);
        }
    }
    return m;
}

/// Loads a textual word-vector file: optional "count dim" header, then one
/// "token v1 ... v_dim" line per vector. Vocabulary tokens found in the
/// file get its vector; missing ones are seeded uniform in [-0.1, 0.1];
/// the OOV row becomes the mean of all loaded rows.
inline EmbeddingMatrix load_pretrained(const std::string& path, const Vocabulary& vocab,
                                       Rng rng, size_t expected_dim = 0) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw EmbeddingError("cannot open word-vector file: " + path);
    }
    std::string line;
    size_t line_no = 0;
    size_t dim = expected_dim;
    bool first_data_line_pending = true;
    std::string pending_line;

    if (std::getline(in, line)) {
        ++line_no;
        std::istringstream header(line);
        long long count = 0, header_dim = 0;
        std::string extra;
        if (header >> count >> header_dim && !(header >> extra) && count > 0 &&
            header_dim > 0) {
            if (expected_dim != 0 && size_t(header_dim) != expected_dim) {
                throw EmbeddingError("dimension mismatch: header declares " +
                                     std::to_string(header_dim) + ", requested " +
                                     std::to_string(expected_dim));
            }
            dim = size_t(header_dim);
            first_data_line_pending = false;
        } else {
            pending_line = line;  // header-less file; first line is data
        }
    } else {
        throw EmbeddingError("empty word-vector file: " + path);
    }

    std::vector<std::vector<double>> loaded(vocab.size());
    std::vector<double> sum;
    size_t loaded_count = 0;

    auto consume = [&](const std::string& data_line, size_t row_no) {
        if (data_line.empty()) return;
        std::istringstream fields(data_line);
        std::string token;
        if (!(fields >> token)) return;
        std::vector<double> vec;
        double v;
        while (fields >> v) vec.push_back(v);
        if (dim == 0) {
            dim = vec.size();  // inferred from the first row
        }
        if (vec.size() != dim || dim == 0) {
            throw EmbeddingError("malformed vector line " + std::to_string(row_no) + ": " +
                                 std::to_string(vec.size()) + " values, expected " +
                                 std::to_string(dim));
        }
        if (sum.empty()) sum.assign(dim, 0.0);
        for (size_t i = 0; i < dim; ++i) sum[i] += vec[i];
        ++loaded_count;
        if (vocab.contains(token)) {
            loaded[size_t(vocab.lookup(token))] = std::move(vec);
        }
    };

    if (first_data_line_pending) {
        consume(pending_line, line_no);
    }
    while (std::getline(in, line)) {
        ++line_no;
        consume(line, line_no);
    }
    if (dim == 0) {
        throw EmbeddingError("word-vector file has no vectors: " + path);
    }

    EmbeddingMatrix m;
    m.dim = dim;
    m.rows = Tensor::zeros({vocab.size(), dim});
    for (size_t r = 2; r < vocab.size(); ++r) {
        auto out = m.rows.row(r);
        if (!loaded[r].empty()) {
            std::copy(loaded[r].begin(), loaded[r].end(), out.begin());
        } else {
            for (double& v : out) v = rng.next_double(-0.1, 0.1);
        }
    }
    auto oov = m.rows.row(Vocabulary::kOov);
    if (loaded_count > 0) {
        for (size_t i = 0; i < dim; ++i) oov[i] = sum[i] / double(loaded_count);
    } else {
        for (double& v : oov) v = rng.next_double(-0.1, 0.1);
    }
    return m;
}

/// Fixed-shape dense view of one token sequence: right-truncated at
/// max_len, right-padded with PAD, mask marking real positions.
struct EmbeddedSequence {
    Tensor values;              // max_len x dim
    std::vector<uint8_t> mask;  // 1 = real token
    std::vector<int32_t> token_ids;

    size_t length() const {
        size_t n = 0;
        for (uint8_t m : mask) n += m;
        return n;
    }
};

inline std::vector<int32_t> to_token_ids(const std::vector<std::string>& tokens,
                                         const Vocabulary& vocab, size_t max_len) {
    std::vector<int32_t> ids;
    ids.reserve(std::min(tokens.size(), max_len));
    for (const std::string& t : tokens) {
        if (ids.size() == max_len) break;
        ids.push_back(vocab.lookup(t));
    }
    return ids;
}

inline EmbeddedSequence embed_ids(std::span<const int32_t> ids, const EmbeddingMatrix& m,
                                  size_t max_len) {
    EmbeddedSequence seq;
    seq.values = Tensor::zeros({max_len, m.dim});
    seq.mask.assign(max_len, 0);
    seq.token_ids.assign(max_len, Vocabulary::kPad);
    const size_t n = std::min(ids.size(), max_len);
    for (size_t t = 0; t < n; ++t) {
        seq.token_ids[t] = ids[t];
        seq.mask[t] = 1;
        auto row = m.vector_of(ids[t]);
        std::copy(row.begin(), row.end(), seq.values.row(t).begin());
    }
    return seq;
}

inline EmbeddedSequence embed_sequence(const std::vector<std::string>& tokens,
                                       const Vocabulary& vocab, const EmbeddingMatrix& m,
                                       size_t max_len) {
    if (max_len < 1) {
        throw EmbeddingError("max_len must be at least 1");
    }
    return embed_ids(to_token_ids(tokens, vocab, max_len), m, max_len);
}

}  // namespace reactsent
