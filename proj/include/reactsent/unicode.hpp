// UTF-8 codec and Unicode general-category queries over the generated
// range tables (see unicode_data.hpp for the pinned Unicode version).
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "reactsent/unicode_data.hpp"

namespace reactsent {

inline constexpr uint32_t kZeroWidthJoiner = 0x200D;
inline constexpr uint32_t kReplacementChar = 0xFFFD;
inline constexpr uint32_t kSinhalaBlockLo = 0x0D80;
inline constexpr uint32_t kSinhalaBlockHi = 0x0DFF;

namespace detail {

inline bool in_ranges(std::span<const CodepointRange> ranges, uint32_t cp) {
    size_t lo = 0;
    size_t hi = ranges.size();
    while (lo < hi) {
        size_t mid = (lo + hi) / 2;
        if (cp < ranges[mid].lo) {
            hi = mid;
        } else if (cp > ranges[mid].hi) {
            lo = mid + 1;
        } else {
            return true;
        }
    }
    return false;
}

}  // namespace detail

inline bool is_category_cc(uint32_t cp) { return detail::in_ranges(kCcRanges, cp); }
inline bool is_category_cf(uint32_t cp) { return detail::in_ranges(kCfRanges, cp); }
inline bool is_category_cs(uint32_t cp) { return detail::in_ranges(kCsRanges, cp); }
inline bool is_category_co(uint32_t cp) { return detail::in_ranges(kCoRanges, cp); }
inline bool is_category_cn(uint32_t cp) { return detail::in_ranges(kCnRanges, cp); }
inline bool is_decimal_digit(uint32_t cp) { return detail::in_ranges(kNdRanges, cp); }

inline bool is_sinhala(uint32_t cp) {
    return cp >= kSinhalaBlockLo && cp <= kSinhalaBlockHi;
}

/// Decodes one UTF-8 sequence starting at `pos`, advancing `pos` past it.
/// Malformed sequences consume a single byte and decode to U+FFFD.
inline uint32_t decode_utf8(std::string_view s, size_t& pos) {
    const auto byte = [&](size_t i) { return static_cast<uint8_t>(s[i]); };
    const uint8_t b0 = byte(pos);
    if (b0 < 0x80) {
        pos += 1;
        return b0;
    }
    const auto cont = [&](size_t i) {
        return i < s.size() && (byte(i) & 0xC0) == 0x80;
    };
    if ((b0 & 0xE0) == 0xC0 && cont(pos + 1)) {
        uint32_t cp = (uint32_t(b0 & 0x1F) << 6) | (byte(pos + 1) & 0x3F);
        pos += 2;
        return cp < 0x80 ? kReplacementChar : cp;
    }
    if ((b0 & 0xF0) == 0xE0 && cont(pos + 1) && cont(pos + 2)) {
        uint32_t cp = (uint32_t(b0 & 0x0F) << 12) | (uint32_t(byte(pos + 1) & 0x3F) << 6) |
                      (byte(pos + 2) & 0x3F);
        pos += 3;
        return (cp < 0x800 || (cp >= 0xD800 && cp <= 0xDFFF)) ? kReplacementChar : cp;
    }
    if ((b0 & 0xF8) == 0xF0 && cont(pos + 1) && cont(pos + 2) && cont(pos + 3)) {
        uint32_t cp = (uint32_t(b0 & 0x07) << 18) | (uint32_t(byte(pos + 1) & 0x3F) << 12) |
                      (uint32_t(byte(pos + 2) & 0x3F) << 6) | (byte(pos + 3) & 0x3F);
        pos += 4;
        return (cp < 0x10000 || cp > 0x10FFFF) ? kReplacementChar : cp;
    }
    pos += 1;
    return kReplacementChar;
}

inline void append_utf8(std::string& out, uint32_t cp) {
    if (cp < 0x80) {
        out.push_back(char(cp));
    } else if (cp < 0x800) {
        out.push_back(char(0xC0 | (cp >> 6)));
        out.push_back(char(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(char(0xE0 | (cp >> 12)));
        out.push_back(char(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(char(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(char(0xF0 | (cp >> 18)));
        out.push_back(char(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(char(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(char(0x80 | (cp & 0x3F)));
    }
}

inline std::vector<uint32_t> to_codepoints(std::string_view s) {
    std::vector<uint32_t> cps;
    cps.reserve(s.size());
    size_t pos = 0;
    while (pos < s.size()) {
        cps.push_back(decode_utf8(s, pos));
    }
    return cps;
}

inline std::string from_codepoints(std::span<const uint32_t> cps) {
    std::string out;
    out.reserve(cps.size() * 3);
    for (uint32_t cp : cps) {
        append_utf8(out, cp);
    }
    return out;
}

}  // namespace reactsent
