#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace protoicl {

enum class LexKind {
    Identifier,
    Keyword,
    Integer,
    Float,
    String,
    Op,
    Newline,
    Indent,
    Dedent,
    EndOfFile,
    Bad,
};

struct LexToken {
    LexKind kind = LexKind::Bad;
    std::string text;
    std::size_t byte_start = 0;
    std::size_t byte_end = 0;
};

/// Byte-span tokenizer with INDENT/DEDENT tracking, implicit line joining
/// inside brackets and triple-quoted strings. Throws on undecodable UTF-8;
/// stray characters come back as Bad tokens, not aborts.
std::vector<LexToken> lex_python(const std::string& source);

} // namespace protoicl
