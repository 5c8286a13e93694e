#include "doctest.h"

#include <algorithm>

#include "protoicl/python_lexer.hpp"
#include "protoicl/syntax.hpp"

using namespace protoicl;

namespace {

TokenRecord span_token(const std::string& text, std::size_t start, std::size_t end) {
    TokenRecord t;
    t.snippet_id = "snip";
    t.token = text;
    t.byte_start = start;
    t.byte_end = end;
    return t;
}

const AstNode* find_node(const AstNode& n, const std::string& type) {
    if (n.type == type) return &n;
    for (const auto& c : n.children)
        if (const AstNode* hit = find_node(c, type)) return hit;
    return nullptr;
}

bool has_kind(const std::vector<LexToken>& toks, LexKind kind) {
    return std::any_of(toks.begin(), toks.end(),
                       [&](const LexToken& t) { return t.kind == kind; });
}

} // namespace

TEST_CASE("lexer basics") {
    SUBCASE("simple assignment with byte spans") {
        auto toks = lex_python("x = 12\n");
        REQUIRE(toks.size() >= 4);
        CHECK(toks[0].kind == LexKind::Identifier);
        CHECK(toks[0].text == "x");
        CHECK(toks[0].byte_start == 0);
        CHECK(toks[0].byte_end == 1);
        CHECK(toks[1].kind == LexKind::Op);
        CHECK(toks[2].kind == LexKind::Integer);
        CHECK(toks[2].text == "12");
        CHECK(toks.back().kind == LexKind::EndOfFile);
    }
    SUBCASE("indent and dedent tracking") {
        auto toks = lex_python("if x:\n    y = 1\n");
        CHECK(has_kind(toks, LexKind::Indent));
        CHECK(has_kind(toks, LexKind::Dedent));
    }
    SUBCASE("brackets suppress logical newlines") {
        auto toks = lex_python("a = [1,\n     2]\n");
        std::size_t newlines = 0;
        for (const auto& t : toks)
            if (t.kind == LexKind::Newline) ++newlines;
        CHECK(newlines == 1);
        CHECK(!has_kind(toks, LexKind::Indent));
    }
    SUBCASE("triple-quoted string is one token") {
        auto toks = lex_python("s = \"\"\"two\nlines\"\"\"\n");
        std::size_t strings = 0;
        for (const auto& t : toks)
            if (t.kind == LexKind::String) ++strings;
        CHECK(strings == 1);
    }
    SUBCASE("invalid UTF-8 throws") {
        CHECK_THROWS_AS(lex_python(std::string("x = \xff\xfe\n")), std::invalid_argument);
    }
}

TEST_CASE("parse_source builds a concrete tree") {
    SUBCASE("if statement contains the keyword terminal") {
        SyntaxTree tree = parse_source("if x:\n    pass\n");
        CHECK(tree.root.type == "module");
        CHECK(!tree.has_errors());
        const AstNode* stmt = find_node(tree.root, "if_statement");
        REQUIRE(stmt != nullptr);
        const AstNode* kw = find_node(*stmt, "if");
        REQUIRE(kw != nullptr);
        CHECK(kw->is_terminal);
        CHECK(kw->byte_start == 0);
        CHECK(kw->byte_end == 2);
        CHECK(find_node(*stmt, "block") != nullptr);
    }
    SUBCASE("empty source is an empty module") {
        SyntaxTree tree = parse_source("");
        CHECK(tree.root.type == "module");
        CHECK(tree.root.children.empty());
        CHECK(!tree.has_errors());
    }
    SUBCASE("malformed source yields an error node, not an abort") {
        SyntaxTree tree = parse_source("def f(:\n");
        CHECK(tree.has_errors());
        CHECK(find_node(tree.root, "ERROR") != nullptr);
    }
    SUBCASE("node spans nest properly") {
        SyntaxTree tree = parse_source("for i in range(3):\n    total += i\n");
        const AstNode* loop = find_node(tree.root, "for_statement");
        REQUIRE(loop != nullptr);
        for (const auto& child : loop->children) {
            CHECK(child.byte_start >= loop->byte_start);
            CHECK(child.byte_end <= loop->byte_end);
        }
        CHECK(find_node(tree.root, "call") != nullptr);
        CHECK(find_node(tree.root, "augmented_assignment") != nullptr);
    }
    SUBCASE("from imports surface as import_statement") {
        SyntaxTree tree = parse_source("from os import path\n");
        CHECK(find_node(tree.root, "import_statement") != nullptr);
    }
}

TEST_CASE("align_tokens") {
    SyntaxTree tree = parse_source("float(x)\n");
    // subword pieces 'flo' + 'at' both land on the identifier terminal
    std::vector<TokenRecord> tokens = {span_token("flo", 0, 3), span_token("at", 3, 5),
                                       span_token("(", 5, 6), span_token("x", 6, 7)};
    Alignment al = align_tokens(tokens, tree);
    REQUIRE(al.token_to_terminal.size() == 4);
    CHECK(al.token_to_terminal[0] == al.token_to_terminal[1]);
    CHECK(al.token_to_terminal[0] >= 0);
    CHECK(al.dropped.empty());

    SUBCASE("whitespace-only tokens are dropped") {
        SyntaxTree spaced = parse_source("a = b\n");
        std::vector<TokenRecord> toks = {span_token("a", 0, 1), span_token(" ", 1, 2),
                                         span_token("=", 2, 3)};
        Alignment a2 = align_tokens(toks, spaced);
        CHECK(a2.token_to_terminal[1] == -1);
        REQUIRE(a2.dropped.size() == 1);
        CHECK(a2.dropped[0] == 1);
    }
    SUBCASE("every non-whitespace token is aligned or dropped, never both") {
        for (std::size_t t = 0; t < tokens.size(); ++t) {
            const bool aligned = al.token_to_terminal[t] >= 0;
            const bool dropped =
                std::find(al.dropped.begin(), al.dropped.end(), t) != al.dropped.end();
            CHECK(aligned != dropped);
        }
    }
    SUBCASE("invalid spans throw") {
        CHECK_THROWS(align_tokens({span_token("x", 3, 3)}, tree));
        CHECK_THROWS(align_tokens({span_token("x", 0, 999)}, tree));
    }
}

TEST_CASE("aggregate_node_scores") {
    SyntaxTree tree = parse_source("float(x)\n");
    std::vector<TokenRecord> tokens = {span_token("flo", 0, 3), span_token("at", 3, 5)};
    Alignment al = align_tokens(tokens, tree);

    SUBCASE("terminal aggregates its aligned tokens") {
        ScoredTree avg = aggregate_node_scores(tree, al, {0.3, 0.7}, AggMode::Avg);
        const AstNode* ident = find_node(tree.root, "identifier");
        REQUIRE(ident != nullptr);
        CHECK(avg.values.at(ident) == doctest::Approx(0.5));

        ScoredTree mx = aggregate_node_scores(tree, al, {0.3, 0.7}, AggMode::Max);
        CHECK(mx.values.at(ident) == doctest::Approx(0.7));

        ScoredTree med = aggregate_node_scores(tree, al, {0.3, 0.7}, AggMode::Median);
        CHECK(med.values.at(ident) == doctest::Approx(0.5));
    }
    SUBCASE("non-terminals aggregate valued descendants; unaligned nodes stay valueless") {
        ScoredTree avg = aggregate_node_scores(tree, al, {0.3, 0.7}, AggMode::Avg);
        const AstNode* call = find_node(tree.root, "call");
        REQUIRE(call != nullptr);
        CHECK(avg.values.at(call) == doctest::Approx(0.5));
        CHECK(avg.values.at(&tree.root) == doctest::Approx(0.5));
        // the argument identifier has no aligned token
        const AstNode* arg = find_node(tree.root, "argument_list");
        if (arg != nullptr) {
            CHECK(avg.values.find(arg) == avg.values.end());
        }
    }
    SUBCASE("raising a token score never lowers its ancestors") {
        ScoredTree lo = aggregate_node_scores(tree, al, {0.3, 0.2}, AggMode::Avg);
        ScoredTree hi = aggregate_node_scores(tree, al, {0.3, 0.9}, AggMode::Avg);
        for (const auto& [node, value] : lo.values) {
            CHECK(hi.values.at(node) >= value);
        }
    }
    SUBCASE("score count mismatch throws") {
        CHECK_THROWS(aggregate_node_scores(tree, al, {0.3}, AggMode::Avg));
    }
}

TEST_CASE("category table") {
    CategoryTable table = default_category_table();
    CHECK(table.at("if_statement") == "Decisions");
    CHECK(table.at("if") == "Decisions");
    CHECK(table.at("for_statement") == "Iterations");
    CHECK(table.at("try_statement") == "Exceptions");
    CHECK(table.at("list_comprehension") == "Data Structures");
    CHECK(table.at("lambda") == "Functional Programming");
    CHECK(table.at("binary_operator") == "Operators");
    CHECK(table.at("function_definition") == "Scope");
    CHECK(table.at("float") == "Data Types");
    // eight distinct categories
    std::vector<std::string> cats;
    for (const auto& [ty, cat] : table)
        if (std::find(cats.begin(), cats.end(), cat) == cats.end()) cats.push_back(cat);
    CHECK(cats.size() == 8);
}

TEST_CASE("category_rollup on an if statement") {
    SyntaxTree tree = parse_source("if x:\n    pass\n");
    std::vector<TokenRecord> tokens = {span_token("if", 0, 2), span_token("x", 3, 4),
                                       span_token(":", 4, 5), span_token("pass", 9, 13)};
    Alignment al = align_tokens(tokens, tree);
    ScoredTree scored = aggregate_node_scores(tree, al, {0.4, 0.2, 0.6, 0.8}, AggMode::Avg);
    CategoryReport report = category_rollup(scored, default_category_table());

    // Decisions collects both the if_statement node and the bare keyword
    REQUIRE(report.categories.count("Decisions") == 1);
    CHECK(report.categories.at("Decisions").count == 2);
    CHECK(report.categories.at("Decisions").mean == doctest::Approx(0.45));
    // module and block are Scope
    REQUIRE(report.categories.count("Scope") == 1);
    CHECK(report.categories.at("Scope").count >= 2);
    // no iteration nodes in this snippet: category omitted entirely
    CHECK(report.categories.count("Iterations") == 0);
    // uncategorised valued nodes are counted, not silently lost
    CHECK(report.other_nodes >= 1);
}

TEST_CASE("category_rollup token-level mode uses raw token scores") {
    SyntaxTree tree = parse_source("if x:\n    pass\n");
    std::vector<TokenRecord> tokens = {span_token("if", 0, 2), span_token("x", 3, 4)};
    Alignment al = align_tokens(tokens, tree);
    ScoredTree scored = aggregate_node_scores(tree, al, {0.4, 0.2}, AggMode::Avg);
    CategoryReport report = category_rollup(scored, default_category_table(), true);
    REQUIRE(report.categories.count("Decisions") == 1);
    // if_statement contributes its two aligned tokens, the keyword contributes one
    CHECK(report.categories.at("Decisions").count == 3);
    CHECK(report.categories.at("Decisions").mean ==
          doctest::Approx((0.4 + 0.2 + 0.4) / 3.0));
}

TEST_CASE("emit_local_report shape") {
    SyntaxTree tree = parse_source("x = 1\n");
    std::vector<TokenRecord> tokens = {span_token("x", 0, 1), span_token("=", 2, 3),
                                       span_token("1", 4, 5)};
    Alignment al = align_tokens(tokens, tree);
    ScoredTree scored = aggregate_node_scores(tree, al, {0.1, 0.5, 0.9}, AggMode::Avg);
    nlohmann::json j = emit_local_report(scored, tokens, al);

    REQUIRE(j.contains("tree"));
    REQUIRE(j.contains("tokens"));
    CHECK(j["tree"]["type"] == "module");
    CHECK(j["tree"].contains("value"));
    REQUIRE(j["tokens"].size() == 3);
    CHECK(j["tokens"][0]["token"] == "x");
    CHECK(j["tokens"][0]["score"] == doctest::Approx(0.1));
    CHECK(j["tokens"][0].contains("terminal"));
    CHECK(j["tokens"][2]["terminal"] == "integer");
}
