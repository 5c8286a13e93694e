#include <stdexcept>

#include "protoicl/python_lexer.hpp"
#include "protoicl/syntax.hpp"

namespace protoicl {

namespace {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

AstNode terminal_node(const LexToken& tok) {
    AstNode n;
    n.byte_start = tok.byte_start;
    n.byte_end = tok.byte_end;
    n.is_terminal = true;
    switch (tok.kind) {
        case LexKind::Identifier: n.type = "identifier"; break;
        case LexKind::Integer: n.type = "integer"; break;
        case LexKind::Float: n.type = "float"; break;
        case LexKind::String: n.type = "string"; break;
        case LexKind::Keyword:
            if (tok.text == "True") n.type = "true";
            else if (tok.text == "False") n.type = "false";
            else if (tok.text == "None") n.type = "none";
            else n.type = tok.text;
            break;
        default: n.type = tok.text; break;
    }
    return n;
}

void finish(AstNode& n) {
    if (n.children.empty()) return;
    n.byte_start = n.children.front().byte_start;
    n.byte_end = n.children.back().byte_end;
}

class Parser {
public:
    explicit Parser(std::vector<LexToken> tokens, std::size_t source_len)
        : toks_(std::move(tokens)), source_len_(source_len) {}

    AstNode parse_module() {
        AstNode mod;
        mod.type = "module";
        mod.byte_start = 0;
        mod.byte_end = source_len_;
        while (!at(LexKind::EndOfFile)) {
            if (at(LexKind::Newline) || at(LexKind::Indent) || at(LexKind::Dedent)) {
                ++pos_;
                continue;
            }
            parse_statement_line(mod.children);
        }
        return mod;
    }

private:
    // --- token access ---------------------------------------------------
    const LexToken& cur() const { return toks_[pos_]; }
    const LexToken& ahead(std::size_t k) const {
        return toks_[std::min(pos_ + k, toks_.size() - 1)];
    }
    bool at(LexKind k) const { return cur().kind == k; }
    bool at_word(const char* s) const {
        return (cur().kind == LexKind::Keyword || cur().kind == LexKind::Op) && cur().text == s;
    }
    AstNode take() { return terminal_node(toks_[pos_++]); }
    AstNode expect_word(const char* s) {
        if (!at_word(s)) throw ParseError(std::string("expected '") + s + "'");
        return take();
    }
    AstNode expect_identifier() {
        if (!at(LexKind::Identifier)) throw ParseError("expected identifier");
        return take();
    }

    // --- statements -----------------------------------------------------
    void parse_statement_line(std::vector<AstNode>& out) {
        const std::size_t start_pos = pos_;
        try {
            if (at(LexKind::Keyword)) {
                const std::string& kw = cur().text;
                if (kw == "if") { out.push_back(parse_if()); return; }
                if (kw == "for") { out.push_back(parse_for()); return; }
                if (kw == "while") { out.push_back(parse_while()); return; }
                if (kw == "try") { out.push_back(parse_try()); return; }
                if (kw == "def") { out.push_back(parse_def()); return; }
                if (kw == "class") { out.push_back(parse_class()); return; }
                if (kw == "with") { out.push_back(parse_with()); return; }
                if (kw == "async") { out.push_back(parse_async()); return; }
            }
            if (at_word("@")) { out.push_back(parse_decorated()); return; }

            out.push_back(parse_simple_statement());
            while (at_word(";")) {
                out.push_back(take());
                if (at(LexKind::Newline) || at(LexKind::EndOfFile)) break;
                out.push_back(parse_simple_statement());
            }
            if (at(LexKind::Newline)) ++pos_;
        } catch (const ParseError&) {
            out.push_back(recover(start_pos));
        }
    }

    AstNode recover(std::size_t start_pos) {
        pos_ = std::max(pos_, start_pos);
        AstNode err;
        err.type = "ERROR";
        err.is_error = true;
        err.byte_start = toks_[start_pos].byte_start;
        std::size_t scanned = start_pos;
        while (!at(LexKind::Newline) && !at(LexKind::EndOfFile) && !at(LexKind::Dedent)) {
            err.children.push_back(take());
            scanned = pos_;
        }
        if (pos_ == start_pos && !at(LexKind::EndOfFile)) err.children.push_back(take());
        if (at(LexKind::Newline)) ++pos_;
        err.byte_end = err.children.empty() ? err.byte_start : err.children.back().byte_end;
        (void)scanned;
        return err;
    }

    AstNode parse_simple_statement() {
        if (at(LexKind::Keyword)) {
            const std::string& kw = cur().text;
            if (kw == "return") return parse_return();
            if (kw == "pass") return wrap_keyword("pass_statement");
            if (kw == "break") return wrap_keyword("break_statement");
            if (kw == "continue") return wrap_keyword("continue_statement");
            if (kw == "raise") return parse_raise();
            if (kw == "global") return parse_name_list_statement("global_statement");
            if (kw == "nonlocal") return parse_name_list_statement("nonlocal_statement");
            if (kw == "del") return parse_del();
            if (kw == "assert") return parse_assert();
            if (kw == "import" || kw == "from") return parse_import();
        }
        return parse_expression_statement();
    }

    AstNode wrap_keyword(const char* type) {
        AstNode n;
        n.type = type;
        n.children.push_back(take());
        finish(n);
        return n;
    }

    bool at_statement_end() const {
        return at(LexKind::Newline) || at(LexKind::EndOfFile) || at_word(";");
    }

    AstNode parse_return() {
        AstNode n;
        n.type = "return_statement";
        n.children.push_back(take());
        if (!at_statement_end()) n.children.push_back(parse_expression_list());
        finish(n);
        return n;
    }

    AstNode parse_raise() {
        AstNode n;
        n.type = "raise_statement";
        n.children.push_back(take());
        if (!at_statement_end()) {
            n.children.push_back(parse_expression());
            if (at_word("from")) {
                n.children.push_back(take());
                n.children.push_back(parse_expression());
            }
        }
        finish(n);
        return n;
    }

    AstNode parse_name_list_statement(const char* type) {
        AstNode n;
        n.type = type;
        n.children.push_back(take());
        n.children.push_back(expect_identifier());
        while (at_word(",")) {
            n.children.push_back(take());
            n.children.push_back(expect_identifier());
        }
        finish(n);
        return n;
    }

    AstNode parse_del() {
        AstNode n;
        n.type = "delete_statement";
        n.children.push_back(take());
        n.children.push_back(parse_expression_list());
        finish(n);
        return n;
    }

    AstNode parse_assert() {
        AstNode n;
        n.type = "assert_statement";
        n.children.push_back(take());
        n.children.push_back(parse_expression());
        if (at_word(",")) {
            n.children.push_back(take());
            n.children.push_back(parse_expression());
        }
        finish(n);
        return n;
    }

    AstNode parse_dotted_name() {
        AstNode n;
        n.type = "dotted_name";
        n.children.push_back(expect_identifier());
        while (at_word(".")) {
            n.children.push_back(take());
            n.children.push_back(expect_identifier());
        }
        finish(n);
        return n;
    }

    AstNode parse_import() {
        AstNode n;
        n.type = "import_statement";
        if (at_word("from")) {
            n.children.push_back(take());
            while (at_word(".")) n.children.push_back(take());
            if (at(LexKind::Identifier)) n.children.push_back(parse_dotted_name());
            n.children.push_back(expect_word("import"));
            if (at_word("*")) {
                n.children.push_back(take());
            } else {
                const bool paren = at_word("(");
                if (paren) n.children.push_back(take());
                n.children.push_back(parse_import_name());
                while (at_word(",")) {
                    n.children.push_back(take());
                    if (paren && at_word(")")) break;
                    n.children.push_back(parse_import_name());
                }
                if (paren) n.children.push_back(expect_word(")"));
            }
        } else {
            n.children.push_back(expect_word("import"));
            n.children.push_back(parse_import_name());
            while (at_word(",")) {
                n.children.push_back(take());
                n.children.push_back(parse_import_name());
            }
        }
        finish(n);
        return n;
    }

    AstNode parse_import_name() {
        AstNode name = parse_dotted_name();
        if (!at_word("as")) return name;
        AstNode n;
        n.type = "aliased_import";
        n.children.push_back(std::move(name));
        n.children.push_back(take());
        n.children.push_back(expect_identifier());
        finish(n);
        return n;
    }

    bool at_augmented_op() const {
        if (cur().kind != LexKind::Op) return false;
        static const char* ops[] = {"+=", "-=", "*=", "/=", "//=", "%=", "**=",
                                    ">>=", "<<=", "&=", "|=", "^=", "@="};
        for (const char* op : ops)
            if (cur().text == op) return true;
        return false;
    }

    AstNode parse_expression_statement() {
        AstNode stmt;
        stmt.type = "expression_statement";
        AstNode first = parse_expression_list();
        if (at_word("=")) {
            AstNode assign;
            assign.type = "assignment";
            assign.children.push_back(std::move(first));
            while (at_word("=")) {
                assign.children.push_back(take());
                assign.children.push_back(parse_expression_list());
            }
            finish(assign);
            stmt.children.push_back(std::move(assign));
        } else if (at_augmented_op()) {
            AstNode aug;
            aug.type = "augmented_assignment";
            aug.children.push_back(std::move(first));
            aug.children.push_back(take());
            aug.children.push_back(parse_expression_list());
            finish(aug);
            stmt.children.push_back(std::move(aug));
        } else {
            stmt.children.push_back(std::move(first));
        }
        finish(stmt);
        return stmt;
    }

    // --- compound statements --------------------------------------------
    AstNode parse_suite() {
        AstNode block;
        block.type = "block";
        if (at(LexKind::Newline)) {
            ++pos_;
            if (!at(LexKind::Indent)) throw ParseError("expected indented block");
            ++pos_;
            while (!at(LexKind::Dedent) && !at(LexKind::EndOfFile)) {
                if (at(LexKind::Newline)) {
                    ++pos_;
                    continue;
                }
                parse_statement_line(block.children);
            }
            if (at(LexKind::Dedent)) ++pos_;
        } else {
            block.children.push_back(parse_simple_statement());
            while (at_word(";")) {
                block.children.push_back(take());
                if (at(LexKind::Newline) || at(LexKind::EndOfFile)) break;
                block.children.push_back(parse_simple_statement());
            }
            if (at(LexKind::Newline)) ++pos_;
        }
        finish(block);
        return block;
    }

    AstNode parse_else_clause() {
        AstNode n;
        n.type = "else_clause";
        n.children.push_back(expect_word("else"));
        n.children.push_back(expect_word(":"));
        n.children.push_back(parse_suite());
        finish(n);
        return n;
    }

    AstNode parse_if() {
        AstNode n;
        n.type = "if_statement";
        n.children.push_back(take());
        n.children.push_back(parse_expression());
        n.children.push_back(expect_word(":"));
        n.children.push_back(parse_suite());
        while (at_word("elif")) {
            AstNode clause;
            clause.type = "elif_clause";
            clause.children.push_back(take());
            clause.children.push_back(parse_expression());
            clause.children.push_back(expect_word(":"));
            clause.children.push_back(parse_suite());
            finish(clause);
            n.children.push_back(std::move(clause));
        }
        if (at_word("else")) n.children.push_back(parse_else_clause());
        finish(n);
        return n;
    }

    AstNode parse_for() {
        AstNode n;
        n.type = "for_statement";
        n.children.push_back(take());
        n.children.push_back(parse_target_list());
        n.children.push_back(expect_word("in"));
        n.children.push_back(parse_expression_list());
        n.children.push_back(expect_word(":"));
        n.children.push_back(parse_suite());
        if (at_word("else")) n.children.push_back(parse_else_clause());
        finish(n);
        return n;
    }

    AstNode parse_while() {
        AstNode n;
        n.type = "while_statement";
        n.children.push_back(take());
        n.children.push_back(parse_expression());
        n.children.push_back(expect_word(":"));
        n.children.push_back(parse_suite());
        if (at_word("else")) n.children.push_back(parse_else_clause());
        finish(n);
        return n;
    }

    AstNode parse_try() {
        AstNode n;
        n.type = "try_statement";
        n.children.push_back(take());
        n.children.push_back(expect_word(":"));
        n.children.push_back(parse_suite());
        while (at_word("except")) {
            AstNode clause;
            clause.type = "except_clause";
            clause.children.push_back(take());
            if (at_word("*")) clause.children.push_back(take());
            if (!at_word(":")) {
                clause.children.push_back(parse_expression());
                if (at_word("as")) {
                    clause.children.push_back(take());
                    clause.children.push_back(expect_identifier());
                }
            }
            clause.children.push_back(expect_word(":"));
            clause.children.push_back(parse_suite());
            finish(clause);
            n.children.push_back(std::move(clause));
        }
        if (at_word("else")) n.children.push_back(parse_else_clause());
        if (at_word("finally")) {
            AstNode clause;
            clause.type = "finally_clause";
            clause.children.push_back(take());
            clause.children.push_back(expect_word(":"));
            clause.children.push_back(parse_suite());
            finish(clause);
            n.children.push_back(std::move(clause));
        }
        finish(n);
        return n;
    }

    AstNode parse_parameters() {
        AstNode n;
        n.type = "parameters";
        n.children.push_back(expect_word("("));
        while (!at_word(")") && !at(LexKind::EndOfFile)) {
            n.children.push_back(parse_parameter());
            if (at_word(",")) n.children.push_back(take());
            else break;
        }
        n.children.push_back(expect_word(")"));
        finish(n);
        return n;
    }

    AstNode parse_parameter(bool allow_annotation = true) {
        if (at_word("*") || at_word("**")) {
            AstNode n;
            n.type = at_word("*") ? "list_splat_pattern" : "dictionary_splat_pattern";
            n.children.push_back(take());
            if (at(LexKind::Identifier)) n.children.push_back(take());
            finish(n);
            return n;
        }
        if (at_word("/")) return take();
        AstNode name = expect_identifier();
        AstNode result = std::move(name);
        if (allow_annotation && at_word(":")) {
            AstNode typed;
            typed.type = "typed_parameter";
            typed.children.push_back(std::move(result));
            typed.children.push_back(take());
            typed.children.push_back(parse_expression());
            finish(typed);
            result = std::move(typed);
        }
        if (at_word("=")) {
            AstNode def;
            def.type = "default_parameter";
            def.children.push_back(std::move(result));
            def.children.push_back(take());
            def.children.push_back(parse_expression());
            finish(def);
            result = std::move(def);
        }
        return result;
    }

    AstNode parse_def() {
        AstNode n;
        n.type = "function_definition";
        n.children.push_back(take());
        n.children.push_back(expect_identifier());
        n.children.push_back(parse_parameters());
        if (at_word("->")) {
            n.children.push_back(take());
            n.children.push_back(parse_expression());
        }
        n.children.push_back(expect_word(":"));
        n.children.push_back(parse_suite());
        finish(n);
        return n;
    }

    AstNode parse_class() {
        AstNode n;
        n.type = "class_definition";
        n.children.push_back(take());
        n.children.push_back(expect_identifier());
        if (at_word("(")) n.children.push_back(parse_argument_list());
        n.children.push_back(expect_word(":"));
        n.children.push_back(parse_suite());
        finish(n);
        return n;
    }

    AstNode parse_with() {
        AstNode n;
        n.type = "with_statement";
        n.children.push_back(take());
        auto item = [&] {
            AstNode it;
            it.type = "with_item";
            it.children.push_back(parse_expression());
            if (at_word("as")) {
                it.children.push_back(take());
                it.children.push_back(parse_primary());
            }
            finish(it);
            return it;
        };
        n.children.push_back(item());
        while (at_word(",")) {
            n.children.push_back(take());
            n.children.push_back(item());
        }
        n.children.push_back(expect_word(":"));
        n.children.push_back(parse_suite());
        finish(n);
        return n;
    }

    AstNode parse_async() {
        AstNode async_kw = take();
        AstNode inner;
        if (at_word("def")) inner = parse_def();
        else if (at_word("for")) inner = parse_for();
        else if (at_word("with")) inner = parse_with();
        else throw ParseError("expected def/for/with after async");
        inner.children.insert(inner.children.begin(), std::move(async_kw));
        finish(inner);
        return inner;
    }

    AstNode parse_decorated() {
        AstNode n;
        n.type = "decorated_definition";
        while (at_word("@")) {
            AstNode dec;
            dec.type = "decorator";
            dec.children.push_back(take());
            dec.children.push_back(parse_expression());
            finish(dec);
            n.children.push_back(std::move(dec));
            if (at(LexKind::Newline)) ++pos_;
        }
        if (at_word("def")) n.children.push_back(parse_def());
        else if (at_word("class")) n.children.push_back(parse_class());
        else if (at_word("async")) n.children.push_back(parse_async());
        else throw ParseError("expected def or class after decorator");
        finish(n);
        return n;
    }

    // --- expressions ----------------------------------------------------
    AstNode parse_expression_list() {
        AstNode first = parse_expression();
        if (!at_word(",")) return first;
        AstNode n;
        n.type = "expression_list";
        n.children.push_back(std::move(first));
        while (at_word(",")) {
            n.children.push_back(take());
            if (at_statement_end() || at_word("=") || at_word(")") || at_word("]") ||
                at_word("}") || at_word(":"))
                break;
            n.children.push_back(parse_expression());
        }
        finish(n);
        return n;
    }

    AstNode parse_target_list() {
        no_in_ = true;
        AstNode t = parse_expression_list();
        no_in_ = false;
        return t;
    }

    AstNode parse_expression() {
        if (at_word("lambda")) return parse_lambda();
        if (at_word("yield")) return parse_yield();
        AstNode t = parse_or();
        if (!at_word("if")) return t;
        AstNode n;
        n.type = "conditional_expression";
        n.children.push_back(std::move(t));
        n.children.push_back(take());
        n.children.push_back(parse_or());
        n.children.push_back(expect_word("else"));
        n.children.push_back(parse_expression());
        finish(n);
        return n;
    }

    AstNode parse_lambda() {
        AstNode n;
        n.type = "lambda";
        n.children.push_back(take());
        while (!at_word(":") && !at(LexKind::Newline) && !at(LexKind::EndOfFile)) {
            n.children.push_back(parse_parameter(/*allow_annotation=*/false));
            if (at_word(",")) n.children.push_back(take());
            else break;
        }
        n.children.push_back(expect_word(":"));
        n.children.push_back(parse_expression());
        finish(n);
        return n;
    }

    AstNode parse_yield() {
        AstNode n;
        n.type = "yield";
        n.children.push_back(take());
        if (at_word("from")) {
            n.children.push_back(take());
            n.children.push_back(parse_expression());
        } else if (!at_statement_end() && !at_word(")") && !at_word("]") && !at_word("}") &&
                   !at_word(",")) {
            n.children.push_back(parse_expression_list());
        }
        finish(n);
        return n;
    }

    AstNode parse_or() {
        AstNode left = parse_and();
        while (at_word("or")) {
            AstNode n;
            n.type = "boolean_operator";
            n.children.push_back(std::move(left));
            n.children.push_back(take());
            n.children.push_back(parse_and());
            finish(n);
            left = std::move(n);
        }
        return left;
    }

    AstNode parse_and() {
        AstNode left = parse_not();
        while (at_word("and")) {
            AstNode n;
            n.type = "boolean_operator";
            n.children.push_back(std::move(left));
            n.children.push_back(take());
            n.children.push_back(parse_not());
            finish(n);
            left = std::move(n);
        }
        return left;
    }

    AstNode parse_not() {
        if (!at_word("not")) return parse_comparison();
        AstNode n;
        n.type = "not_operator";
        n.children.push_back(take());
        n.children.push_back(parse_not());
        finish(n);
        return n;
    }

    bool at_comparison_op() const {
        if (cur().kind == LexKind::Op) {
            const std::string& t = cur().text;
            return t == "<" || t == ">" || t == "<=" || t == ">=" || t == "==" || t == "!=";
        }
        if (cur().kind == LexKind::Keyword) {
            if (cur().text == "is") return true;
            if (cur().text == "in") return !no_in_;
            if (cur().text == "not") return ahead(1).text == "in" && !no_in_;
        }
        return false;
    }

    AstNode parse_comparison() {
        AstNode left = parse_bit_or();
        if (!at_comparison_op()) return left;
        AstNode n;
        n.type = "comparison_operator";
        n.children.push_back(std::move(left));
        while (at_comparison_op()) {
            n.children.push_back(take());  // is / in / not / < / ...
            if ((n.children.back().type == "is" && at_word("not")) ||
                (n.children.back().type == "not" && at_word("in")))
                n.children.push_back(take());
            n.children.push_back(parse_bit_or());
        }
        finish(n);
        return n;
    }

    AstNode parse_binary_level(AstNode (Parser::*next)(), std::initializer_list<const char*> ops) {
        AstNode left = (this->*next)();
        for (;;) {
            bool matched = false;
            for (const char* op : ops) {
                if (at_word(op)) {
                    AstNode n;
                    n.type = "binary_operator";
                    n.children.push_back(std::move(left));
                    n.children.push_back(take());
                    n.children.push_back((this->*next)());
                    finish(n);
                    left = std::move(n);
                    matched = true;
                    break;
                }
            }
            if (!matched) return left;
        }
    }

    AstNode parse_bit_or() { return parse_binary_level(&Parser::parse_bit_xor, {"|"}); }
    AstNode parse_bit_xor() { return parse_binary_level(&Parser::parse_bit_and, {"^"}); }
    AstNode parse_bit_and() { return parse_binary_level(&Parser::parse_shift, {"&"}); }
    AstNode parse_shift() { return parse_binary_level(&Parser::parse_additive, {"<<", ">>"}); }
    AstNode parse_additive() {
        return parse_binary_level(&Parser::parse_multiplicative, {"+", "-"});
    }
    AstNode parse_multiplicative() {
        return parse_binary_level(&Parser::parse_unary, {"*", "/", "//", "%", "@"});
    }

    AstNode parse_unary() {
        if (at_word("-") || at_word("+") || at_word("~")) {
            AstNode n;
            n.type = "unary_operator";
            n.children.push_back(take());
            n.children.push_back(parse_unary());
            finish(n);
            return n;
        }
        if (at_word("await")) {
            AstNode n;
            n.type = "await";
            n.children.push_back(take());
            n.children.push_back(parse_unary());
            finish(n);
            return n;
        }
        return parse_power();
    }

    AstNode parse_power() {
        AstNode base = parse_postfix();
        if (!at_word("**")) return base;
        AstNode n;
        n.type = "binary_operator";
        n.children.push_back(std::move(base));
        n.children.push_back(take());
        n.children.push_back(parse_unary());  // right associative
        finish(n);
        return n;
    }

    AstNode parse_postfix() {
        AstNode value = parse_primary();
        for (;;) {
            if (at_word("(")) {
                AstNode n;
                n.type = "call";
                n.children.push_back(std::move(value));
                n.children.push_back(parse_argument_list());
                finish(n);
                value = std::move(n);
            } else if (at_word("[")) {
                AstNode n;
                n.type = "subscript";
                n.children.push_back(std::move(value));
                n.children.push_back(take());
                n.children.push_back(parse_subscript_item());
                while (at_word(",")) {
                    n.children.push_back(take());
                    n.children.push_back(parse_subscript_item());
                }
                n.children.push_back(expect_word("]"));
                finish(n);
                value = std::move(n);
            } else if (at_word(".")) {
                AstNode n;
                n.type = "attribute";
                n.children.push_back(std::move(value));
                n.children.push_back(take());
                n.children.push_back(expect_identifier());
                finish(n);
                value = std::move(n);
            } else {
                return value;
            }
        }
    }

    AstNode parse_subscript_item() {
        AstNode slice;
        slice.type = "slice";
        bool has_colon = false;
        if (!at_word(":")) slice.children.push_back(parse_expression());
        while (at_word(":")) {
            has_colon = true;
            slice.children.push_back(take());
            if (!at_word(":") && !at_word("]") && !at_word(",")) {
                slice.children.push_back(parse_expression());
            }
        }
        if (!has_colon) return std::move(slice.children.front());
        finish(slice);
        return slice;
    }

    AstNode parse_argument_list() {
        AstNode n;
        n.type = "argument_list";
        n.children.push_back(expect_word("("));
        while (!at_word(")") && !at(LexKind::EndOfFile)) {
            n.children.push_back(parse_argument());
            if (at_word(",")) n.children.push_back(take());
            else break;
        }
        n.children.push_back(expect_word(")"));
        finish(n);
        return n;
    }

    AstNode parse_argument() {
        if (at_word("*") || at_word("**")) {
            AstNode n;
            n.type = at_word("*") ? "list_splat" : "dictionary_splat";
            n.children.push_back(take());
            n.children.push_back(parse_expression());
            finish(n);
            return n;
        }
        if (at(LexKind::Identifier) && ahead(1).kind == LexKind::Op && ahead(1).text == "=") {
            AstNode n;
            n.type = "keyword_argument";
            n.children.push_back(take());
            n.children.push_back(take());
            n.children.push_back(parse_expression());
            finish(n);
            return n;
        }
        AstNode expr = parse_expression();
        if (at_word("for")) return parse_comprehension_body("generator_expression", std::move(expr));
        return expr;
    }

    void parse_comprehension_clauses(AstNode& n) {
        while (at_word("for") || at_word("if") || at_word("async")) {
            if (at_word("if")) {
                AstNode clause;
                clause.type = "if_clause";
                clause.children.push_back(take());
                clause.children.push_back(parse_or());
                finish(clause);
                n.children.push_back(std::move(clause));
            } else {
                AstNode clause;
                clause.type = "for_in_clause";
                if (at_word("async")) clause.children.push_back(take());
                clause.children.push_back(expect_word("for"));
                clause.children.push_back(parse_target_list());
                clause.children.push_back(expect_word("in"));
                clause.children.push_back(parse_or());
                finish(clause);
                n.children.push_back(std::move(clause));
            }
        }
    }

    // body already parsed; clauses and closing bracket handled by the caller
    AstNode parse_comprehension_body(const char* type, AstNode body) {
        AstNode n;
        n.type = type;
        n.children.push_back(std::move(body));
        parse_comprehension_clauses(n);
        finish(n);
        return n;
    }

    AstNode parse_primary() {
        if (at(LexKind::Identifier) || at(LexKind::Integer) || at(LexKind::Float) ||
            at(LexKind::String))
            return take();
        if (at_word("True") || at_word("False") || at_word("None") || at_word("..."))
            return take();
        if (at_word("lambda")) return parse_lambda();
        if (at_word("(")) return parse_paren();
        if (at_word("[")) return parse_list();
        if (at_word("{")) return parse_braces();
        throw ParseError("unexpected token '" + cur().text + "'");
    }

    AstNode parse_paren() {
        AstNode open = take();
        if (at_word(")")) {
            AstNode n;
            n.type = "tuple";
            n.children.push_back(std::move(open));
            n.children.push_back(take());
            finish(n);
            return n;
        }
        AstNode first = parse_expression();
        if (at_word("for")) {
            AstNode n = parse_comprehension_body("generator_expression", std::move(first));
            n.children.insert(n.children.begin(), std::move(open));
            n.children.push_back(expect_word(")"));
            finish(n);
            return n;
        }
        if (at_word(",")) {
            AstNode n;
            n.type = "tuple";
            n.children.push_back(std::move(open));
            n.children.push_back(std::move(first));
            while (at_word(",")) {
                n.children.push_back(take());
                if (at_word(")")) break;
                n.children.push_back(parse_expression());
            }
            n.children.push_back(expect_word(")"));
            finish(n);
            return n;
        }
        AstNode n;
        n.type = "parenthesized_expression";
        n.children.push_back(std::move(open));
        n.children.push_back(std::move(first));
        n.children.push_back(expect_word(")"));
        finish(n);
        return n;
    }

    AstNode parse_list() {
        AstNode open = take();
        if (at_word("]")) {
            AstNode n;
            n.type = "list";
            n.children.push_back(std::move(open));
            n.children.push_back(take());
            finish(n);
            return n;
        }
        AstNode first = parse_expression();
        if (at_word("for")) {
            AstNode n = parse_comprehension_body("list_comprehension", std::move(first));
            n.children.insert(n.children.begin(), std::move(open));
            n.children.push_back(expect_word("]"));
            finish(n);
            return n;
        }
        AstNode n;
        n.type = "list";
        n.children.push_back(std::move(open));
        n.children.push_back(std::move(first));
        while (at_word(",")) {
            n.children.push_back(take());
            if (at_word("]")) break;
            n.children.push_back(parse_expression());
        }
        n.children.push_back(expect_word("]"));
        finish(n);
        return n;
    }

    AstNode parse_braces() {
        AstNode open = take();
        if (at_word("}")) {
            AstNode n;
            n.type = "dictionary";
            n.children.push_back(std::move(open));
            n.children.push_back(take());
            finish(n);
            return n;
        }
        AstNode first = parse_expression();
        if (at_word(":")) {
            AstNode pair;
            pair.type = "pair";
            pair.children.push_back(std::move(first));
            pair.children.push_back(take());
            pair.children.push_back(parse_expression());
            finish(pair);
            if (at_word("for")) {
                AstNode n = parse_comprehension_body("dictionary_comprehension", std::move(pair));
                n.children.insert(n.children.begin(), std::move(open));
                n.children.push_back(expect_word("}"));
                finish(n);
                return n;
            }
            AstNode n;
            n.type = "dictionary";
            n.children.push_back(std::move(open));
            n.children.push_back(std::move(pair));
            while (at_word(",")) {
                n.children.push_back(take());
                if (at_word("}")) break;
                AstNode p;
                p.type = "pair";
                p.children.push_back(parse_expression());
                p.children.push_back(expect_word(":"));
                p.children.push_back(parse_expression());
                finish(p);
                n.children.push_back(std::move(p));
            }
            n.children.push_back(expect_word("}"));
            finish(n);
            return n;
        }
        if (at_word("for")) {
            AstNode n = parse_comprehension_body("set_comprehension", std::move(first));
            n.children.insert(n.children.begin(), std::move(open));
            n.children.push_back(expect_word("}"));
            finish(n);
            return n;
        }
        AstNode n;
        n.type = "set";
        n.children.push_back(std::move(open));
        n.children.push_back(std::move(first));
        while (at_word(",")) {
            n.children.push_back(take());
            if (at_word("}")) break;
            n.children.push_back(parse_expression());
        }
        n.children.push_back(expect_word("}"));
        finish(n);
        return n;
    }

    std::vector<LexToken> toks_;
    std::size_t source_len_;
    std::size_t pos_ = 0;
    bool no_in_ = false;
};

} // namespace

SyntaxTree parse_source(const std::string& source) {
    SyntaxTree tree;
    tree.source = source;
    Parser parser(lex_python(source), source.size());
    tree.root = parser.parse_module();
    return tree;
}

} // namespace protoicl
