#!/usr/bin/env python3
"""Regenerates include/reactsent/unicode_data.hpp from Python's unicodedata.

The header pins the Unicode version the tables were derived from; rerun this
script with a newer CPython to bump it.
"""
import sys
import unicodedata

MAX_CP = 0x110000

CATEGORIES = ["Cc", "Cf", "Cs", "Co", "Cn", "Nd"]


def ranges_for(cat: str):
    out = []
    start = None
    for cp in range(MAX_CP):
        is_member = unicodedata.category(chr(cp)) == cat
        if is_member and start is None:
            start = cp
        elif not is_member and start is not None:
            out.append((start, cp - 1))
            start = None
    if start is not None:
        out.append((start, MAX_CP - 1))
    return out


def emit(name: str, ranges):
    lines = [f"inline constexpr CodepointRange {name}[] = {{"]
    row = []
    for lo, hi in ranges:
        row.append(f"{{0x{lo:05X}, 0x{hi:05X}}}")
        if len(row) == 4:
            lines.append("    " + ", ".join(row) + ",")
            row = []
    if row:
        lines.append("    " + ", ".join(row) + ",")
    lines.append("};")
    return "\n".join(lines)


def main():
    version = unicodedata.unidata_version
    blocks = []
    for cat in CATEGORIES:
        rs = ranges_for(cat)
        blocks.append(f"// General category {cat}: {len(rs)} ranges")
        blocks.append(emit(f"k{cat}Ranges", rs))
        blocks.append("")
    body = "\n".join(blocks)
    header = f"""// Generated by scripts/gen_unicode_data.py -- do not edit by hand.
// Unicode general category ranges, Unicode {version}.
#pragma once

#include <cstdint>
#include <string_view>

namespace reactsent {{

inline constexpr std::string_view kUnicodeVersion = "{version}";

struct CodepointRange {{
    uint32_t lo;
    uint32_t hi;
}};

{body}
}}  // namespace reactsent
"""
    sys.stdout.write(header)


if __name__ == "__main__":
    main()
