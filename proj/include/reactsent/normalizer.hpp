// Cleaning pipeline that turns a raw post message into a Sinhala token
// sequence: nonprintable stripping, pattern removal (emails, URLs, tags),
// numeric and mixed-script token removal, whitespace collapse, stopwords.
#pragma once

#include <cctype>
#include <fstream>
#include <regex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "reactsent/unicode.hpp"

namespace reactsent {

class NormalizeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct NormalizerConfig {
    std::unordered_set<std::string> stopwords;
    bool strip_nonprintable = true;
    bool remove_patterns = true;
    bool remove_numeric_tokens = true;
    bool remove_non_sinhala_tokens = true;
    bool remove_stopwords = true;
    uint32_t sinhala_lo = kSinhalaBlockLo;
    uint32_t sinhala_hi = kSinhalaBlockHi;

    bool in_alphabet(uint32_t cp) const {
        return (cp >= sinhala_lo && cp <= sinhala_hi) || cp == kZeroWidthJoiner;
    }
};

/// Token sequence after the full pipeline. Every character of every token
/// is in the Sinhala block or is ZWJ; no token contains whitespace.
struct CleanedText {
    std::vector<std::string> tokens;

    std::string joined() const {
        std::string out;
        for (size_t i = 0; i < tokens.size(); ++i) {
            if (i) out.push_back(' ');
            out += tokens[i];
        }
        return out;
    }
};

/// One token per line, '#'-prefixed comment lines ignored.
inline std::unordered_set<std::string> load_stopwords(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw NormalizeError("cannot open stopword file: " + path);
    }
    std::unordered_set<std::string> words;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n' ||
                                 line.back() == ' ' || line.back() == '\t')) {
            line.pop_back();
        }
        size_t start = line.find_first_not_of(" \t");
        if (start == std::string::npos) continue;
        line.erase(0, start);
        if (line[0] == '#') continue;
        if (line.find_first_of(" \t") != std::string::npos) {
            throw NormalizeError("stopword entry with whitespace at line " +
                                 std::to_string(line_no));
        }
        words.insert(line);
    }
    return words;
}

namespace detail {

inline bool is_ascii_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

/// Splits on runs of ASCII whitespace (multibyte characters are opaque
/// non-space bytes at this level).
inline std::vector<std::string> split_ws(std::string_view text) {
    std::vector<std::string> tokens;
    size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_ascii_space(text[i])) ++i;
        size_t start = i;
        while (i < text.size() && !is_ascii_space(text[i])) ++i;
        if (i > start) tokens.emplace_back(text.substr(start, i - start));
    }
    return tokens;
}

inline std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (size_t i = 0; i < tokens.size(); ++i) {
        if (i) out.push_back(' ');
        out += tokens[i];
    }
    return out;
}

inline bool ascii_prefix_ci(std::string_view token, std::string_view prefix) {
    if (token.size() < prefix.size()) return false;
    for (size_t i = 0; i < prefix.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(token[i])) != prefix[i]) return false;
    }
    return true;
}

inline bool is_url_token(std::string_view token) {
    if (ascii_prefix_ci(token, "www.")) return true;
    // scheme "://" prefix: ALPHA *( ALPHA / DIGIT / "+" / "-" / "." )
    if (token.empty() || !std::isalpha(static_cast<unsigned char>(token[0]))) return false;
    size_t i = 1;
    while (i < token.size()) {
        char c = token[i];
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' ||
            c == '.') {
            ++i;
        } else {
            break;
        }
    }
    return token.substr(i).starts_with("://");
}

inline const std::regex& email_regex() {
    static const std::regex re(
        R"([A-Za-z0-9._%+\-]+@[A-Za-z0-9\-]+(\.[A-Za-z0-9\-]+)*\.[A-Za-z]{2,})",
        std::regex::optimize);
    return re;
}

}  // namespace detail

/// Replaces characters of general categories Cc, Cn, Co, Cs, Cf with a
/// single space each; ZWJ alone is deleted outright so conjunct-bearing
/// Sinhala words are not split apart.
inline std::string strip_nonprintable(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    size_t pos = 0;
    while (pos < text.size()) {
        const size_t start = pos;
        const uint32_t cp = decode_utf8(text, pos);
        if (cp == kZeroWidthJoiner) {
            continue;
        }
        if (is_category_cc(cp) || is_category_cn(cp) || is_category_co(cp) ||
            is_category_cs(cp) || is_category_cf(cp)) {
            out.push_back(' ');
        } else {
            out.append(text.substr(start, pos - start));
        }
    }
    return out;
}

/// Deletes email addresses, then whole tokens that are URLs (scheme:// or
/// www. prefix), user-tags (@...), or hashtags (#...). Deleted spans leave
/// the surrounding whitespace untouched; the collapse stage tidies up.
inline std::string remove_patterns(std::string_view text) {
    std::string no_email = std::regex_replace(std::string(text), detail::email_regex(), "");
    std::string out;
    out.reserve(no_email.size());
    size_t i = 0;
    while (i < no_email.size()) {
        if (detail::is_ascii_space(no_email[i])) {
            out.push_back(no_email[i]);
            ++i;
            continue;
        }
        size_t start = i;
        while (i < no_email.size() && !detail::is_ascii_space(no_email[i])) ++i;
        std::string_view token(no_email.data() + start, i - start);
        if (detail::is_url_token(token) || token[0] == '@' || token[0] == '#') {
            continue;
        }
        out.append(token);
    }
    return out;
}

/// Drops every whitespace-delimited token containing a decimal digit
/// (category Nd); survivors are rejoined with single spaces.
inline std::string remove_numeric_tokens(std::string_view text) {
    std::vector<std::string> kept;
    for (std::string& token : detail::split_ws(text)) {
        bool has_digit = false;
        size_t pos = 0;
        while (pos < token.size()) {
            if (is_decimal_digit(decode_utf8(token, pos))) {
                has_digit = true;
                break;
            }
        }
        if (!has_digit) kept.push_back(std::move(token));
    }
    return detail::join_tokens(kept);
}

/// Drops every token containing a character outside the Sinhala block
/// (ZWJ admitted); survivors are rejoined with single spaces.
inline std::string remove_non_sinhala_tokens(std::string_view text,
                                             const NormalizerConfig& config = {}) {
    std::vector<std::string> kept;
    for (std::string& token : detail::split_ws(text)) {
        bool foreign = false;
        size_t pos = 0;
        while (pos < token.size()) {
            if (!config.in_alphabet(decode_utf8(token, pos))) {
                foreign = true;
                break;
            }
        }
        if (!foreign) kept.push_back(std::move(token));
    }
    return detail::join_tokens(kept);
}

/// Runs of whitespace become one space; leading/trailing whitespace goes.
inline std::string collapse_whitespace(std::string_view text) {
    return detail::join_tokens(detail::split_ws(text));
}

inline std::vector<std::string> remove_stopwords(std::vector<std::string> tokens,
                                                 const NormalizerConfig& config) {
    if (config.stopwords.empty()) return tokens;
    std::vector<std::string> kept;
    kept.reserve(tokens.size());
    for (std::string& token : tokens) {
        if (!config.stopwords.count(token)) kept.push_back(std::move(token));
    }
    return kept;
}

/// Full pipeline. An empty result is a legal value; the caller decides the
/// post's fate.
inline CleanedText normalize(std::string_view message, const NormalizerConfig& config) {
    std::string text(message);
    if (config.strip_nonprintable) text = strip_nonprintable(text);
    if (config.remove_patterns) text = remove_patterns(text);
    if (config.remove_numeric_tokens) text = remove_numeric_tokens(text);
    if (config.remove_non_sinhala_tokens) text = remove_non_sinhala_tokens(text, config);
    CleanedText cleaned;
    cleaned.tokens = detail::split_ws(collapse_whitespace(text));
    if (config.remove_stopwords) {
        cleaned.tokens = remove_stopwords(std::move(cleaned.tokens), config);
    }
    return cleaned;
}

}  // namespace reactsent
