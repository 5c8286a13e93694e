#include "protoicl/python_lexer.hpp"

#include <array>
#include <cctype>
#include <set>
#include <stdexcept>

namespace protoicl {

namespace {

const std::set<std::string> kKeywords = {
    "False", "None",  "True",    "and",   "as",     "assert", "async",  "await",
    "break", "class", "continue", "def",  "del",    "elif",   "else",   "except",
    "finally", "for", "from",    "global", "if",    "import", "in",     "is",
    "lambda", "nonlocal", "not", "or",    "pass",   "raise",  "return", "try",
    "while", "with",  "yield",
};

// longest-match-first operator table
const std::array<const char*, 47> kOps = {
    "**=", "//=", ">>=", "<<=", "...", "->",  ":=",  "**",  "//",  "<<", ">>", "<=",
    ">=",  "==",  "!=",  "+=",  "-=",  "*=",  "/=",  "%=",  "&=",  "|=", "^=", "@=",
    "+",   "-",   "*",   "/",   "%",   "@",   "<",   ">",   "&",   "|",  "^",  "~",
    "=",   "(",   ")",   "[",   "]",   "{",   "}",   ",",   ":",   ".",  ";",
};

void check_utf8(const std::string& s) {
    std::size_t i = 0;
    while (i < s.size()) {
        const unsigned char c = static_cast<unsigned char>(s[i]);
        std::size_t extra;
        if (c < 0x80) extra = 0;
        else if ((c & 0xE0) == 0xC0) extra = 1;
        else if ((c & 0xF0) == 0xE0) extra = 2;
        else if ((c & 0xF8) == 0xF0) extra = 3;
        else throw std::invalid_argument("source is not valid UTF-8 at byte " + std::to_string(i));
        if (i + extra >= s.size() && extra > 0)
            throw std::invalid_argument("source is not valid UTF-8 at byte " + std::to_string(i));
        for (std::size_t k = 1; k <= extra; ++k)
            if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80)
                throw std::invalid_argument("source is not valid UTF-8 at byte " +
                                            std::to_string(i));
        i += extra + 1;
    }
}

bool is_ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool is_ident_cont(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }

bool is_string_prefix(const std::string& s) {
    if (s.size() > 2) return false;
    for (char c : s) {
        const char l = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (l != 'r' && l != 'b' && l != 'f' && l != 'u') return false;
    }
    return true;
}

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) {}

    std::vector<LexToken> run() {
        indents_.push_back(0);
        while (pos_ < src_.size()) {
            if (at_line_start_ && depth_ == 0) {
                if (handle_indentation()) continue;  // blank/comment line consumed
            }
            lex_one();
        }
        if (!at_line_start_ && depth_ == 0) emit(LexKind::Newline, pos_, pos_);
        while (indents_.size() > 1) {
            indents_.pop_back();
            emit(LexKind::Dedent, pos_, pos_);
        }
        emit(LexKind::EndOfFile, pos_, pos_);
        return std::move(out_);
    }

private:
    void emit(LexKind kind, std::size_t start, std::size_t end) {
        out_.push_back({kind, src_.substr(start, end - start), start, end});
    }

    char peek(std::size_t off = 0) const {
        return pos_ + off < src_.size() ? src_[pos_ + off] : '\0';
    }

    // returns true if the whole line was blank or comment-only
    bool handle_indentation() {
        std::size_t p = pos_;
        int col = 0;
        while (p < src_.size() && (src_[p] == ' ' || src_[p] == '\t')) {
            col = src_[p] == '\t' ? (col / 8 + 1) * 8 : col + 1;
            ++p;
        }
        if (p >= src_.size() || src_[p] == '\n' || src_[p] == '#' || src_[p] == '\r') {
            // skip the whole line
            while (p < src_.size() && src_[p] != '\n') ++p;
            if (p < src_.size()) ++p;
            pos_ = p;
            return true;
        }
        if (col > indents_.back()) {
            indents_.push_back(col);
            emit(LexKind::Indent, pos_, p);
        } else {
            while (col < indents_.back()) {
                indents_.pop_back();
                emit(LexKind::Dedent, pos_, pos_);
            }
        }
        pos_ = p;
        at_line_start_ = false;
        return false;
    }

    void lex_one() {
        const char c = peek();
        if (c == '\n') {
            if (depth_ == 0) {
                emit(LexKind::Newline, pos_, pos_ + 1);
                at_line_start_ = true;
            }
            ++pos_;
            return;
        }
        if (c == '\r' || c == ' ' || c == '\t') {
            ++pos_;
            return;
        }
        if (c == '#') {
            while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
            return;
        }
        if (c == '\\' && peek(1) == '\n') {
            pos_ += 2;
            return;
        }
        if (is_ident_start(static_cast<unsigned char>(c))) {
            lex_word();
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
            lex_number();
            return;
        }
        if (c == '\'' || c == '"') {
            lex_string(pos_);
            return;
        }
        for (const char* op : kOps) {
            const std::size_t len = std::string(op).size();
            if (src_.compare(pos_, len, op) == 0) {
                if (*op == '(' || *op == '[' || *op == '{') ++depth_;
                if ((*op == ')' || *op == ']' || *op == '}') && depth_ > 0) --depth_;
                emit(LexKind::Op, pos_, pos_ + len);
                pos_ += len;
                return;
            }
        }
        emit(LexKind::Bad, pos_, pos_ + 1);
        ++pos_;
    }

    void lex_word() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && is_ident_cont(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        const std::string word = src_.substr(start, pos_ - start);
        if ((peek() == '\'' || peek() == '"') && is_string_prefix(word)) {
            lex_string(start);
            return;
        }
        emit(kKeywords.count(word) ? LexKind::Keyword : LexKind::Identifier, start, pos_);
    }

    void lex_number() {
        const std::size_t start = pos_;
        bool is_float = false;
        if (peek() == '0' && (peek(1) == 'x' || peek(1) == 'X' || peek(1) == 'o' ||
                              peek(1) == 'O' || peek(1) == 'b' || peek(1) == 'B')) {
            pos_ += 2;
            while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_') ++pos_;
        } else {
            while (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '_') ++pos_;
            if (peek() == '.') {
                is_float = true;
                ++pos_;
                while (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '_') ++pos_;
            }
            if (peek() == 'e' || peek() == 'E') {
                std::size_t save = pos_;
                ++pos_;
                if (peek() == '+' || peek() == '-') ++pos_;
                if (std::isdigit(static_cast<unsigned char>(peek()))) {
                    is_float = true;
                    while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
                } else {
                    pos_ = save;
                }
            }
            if (peek() == 'j' || peek() == 'J') ++pos_;  // imaginary, lumped with the literal
        }
        emit(is_float ? LexKind::Float : LexKind::Integer, start, pos_);
    }

    // start covers any prefix letters already consumed
    void lex_string(std::size_t start) {
        pos_ = start;
        while (pos_ < src_.size() && src_[pos_] != '\'' && src_[pos_] != '"') ++pos_;
        const char quote = peek();
        bool triple = peek(1) == quote && peek(2) == quote;
        pos_ += triple ? 3 : 1;
        while (pos_ < src_.size()) {
            if (src_[pos_] == '\\' && pos_ + 1 < src_.size()) {
                pos_ += 2;
                continue;
            }
            if (triple) {
                if (src_[pos_] == quote && peek(1) == quote && peek(2) == quote) {
                    pos_ += 3;
                    break;
                }
            } else if (src_[pos_] == quote) {
                ++pos_;
                break;
            } else if (src_[pos_] == '\n') {
                break;  // unterminated single-line string
            }
            ++pos_;
        }
        emit(LexKind::String, start, pos_);
    }

    const std::string& src_;
    std::vector<LexToken> out_;
    std::size_t pos_ = 0;
    std::vector<int> indents_;
    int depth_ = 0;
    bool at_line_start_ = true;
};

} // namespace

std::vector<LexToken> lex_python(const std::string& source) {
    check_utf8(source);
    return Lexer(source).run();
}

} // namespace protoicl
