#include "protoicl/syntax.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <stdexcept>

namespace protoicl {

using nlohmann::json;

namespace {

void collect_terminals(const AstNode& n, std::vector<const AstNode*>& out) {
    if (n.children.empty()) {
        if (n.is_terminal) out.push_back(&n);
        return;
    }
    for (const auto& c : n.children) collect_terminals(c, out);
}

bool any_error(const AstNode& n) {
    if (n.is_error) return true;
    for (const auto& c : n.children)
        if (any_error(c)) return true;
    return false;
}

double aggregate(std::vector<double> values, AggMode mode) {
    switch (mode) {
        case AggMode::Avg: {
            double sum = 0.0;
            for (double v : values) sum += v;
            return sum / static_cast<double>(values.size());
        }
        case AggMode::Median: {
            std::sort(values.begin(), values.end());
            const std::size_t n = values.size();
            return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
        }
        case AggMode::Max:
            return *std::max_element(values.begin(), values.end());
    }
    throw std::invalid_argument("unknown aggregation mode");
}

} // namespace

bool SyntaxTree::has_errors() const { return any_error(root); }

std::vector<const AstNode*> SyntaxTree::terminals() const {
    std::vector<const AstNode*> out;
    collect_terminals(root, out);
    return out;
}

AggMode agg_mode_from_string(const std::string& name) {
    if (name == "avg") return AggMode::Avg;
    if (name == "median") return AggMode::Median;
    if (name == "max") return AggMode::Max;
    throw std::invalid_argument("unknown aggregation mode '" + name + "'");
}

Alignment align_tokens(const std::vector<TokenRecord>& tokens, const SyntaxTree& tree) {
    const auto terminals = tree.terminals();
    Alignment out;
    out.token_to_terminal.assign(tokens.size(), -1);

    for (std::size_t t = 0; t < tokens.size(); ++t) {
        const auto& tok = tokens[t];
        if (tok.byte_start >= tok.byte_end || tok.byte_end > tree.source.size())
            throw std::invalid_argument("token '" + tok.token + "' has an invalid span");

        const std::string text = tree.source.substr(tok.byte_start, tok.byte_end - tok.byte_start);
        const bool all_ws = std::all_of(text.begin(), text.end(), [](unsigned char c) {
            return std::isspace(c) != 0;
        });
        if (all_ws) {
            out.dropped.push_back(t);
            continue;
        }

        std::ptrdiff_t best = -1;
        std::size_t best_overlap = 0;
        for (std::size_t k = 0; k < terminals.size(); ++k) {
            const auto* node = terminals[k];
            const std::size_t lo = std::max(tok.byte_start, node->byte_start);
            const std::size_t hi = std::min(tok.byte_end, node->byte_end);
            const std::size_t overlap = hi > lo ? hi - lo : 0;
            if (overlap > best_overlap) {  // ties keep the earliest terminal
                best_overlap = overlap;
                best = static_cast<std::ptrdiff_t>(k);
            }
        }
        if (best < 0) out.dropped.push_back(t);
        else out.token_to_terminal[t] = best;
    }
    return out;
}

ScoredTree aggregate_node_scores(const SyntaxTree& tree, const Alignment& alignment,
                                 const std::vector<double>& scores, AggMode mode) {
    if (scores.size() != alignment.token_to_terminal.size())
        throw std::invalid_argument("aggregate_node_scores: score count mismatch");

    ScoredTree scored;
    scored.tree = &tree;
    scored.mode = mode;
    scored.token_scores = scores;

    const auto terminals = tree.terminals();
    std::map<const AstNode*, std::vector<double>> terminal_scores;
    for (std::size_t t = 0; t < alignment.token_to_terminal.size(); ++t) {
        const std::ptrdiff_t k = alignment.token_to_terminal[t];
        if (k < 0) continue;
        const AstNode* node = terminals[static_cast<std::size_t>(k)];
        terminal_scores[node].push_back(scores[t]);
        scored.node_tokens[node].push_back(t);
    }
    for (const auto& [node, vals] : terminal_scores)
        scored.values[node] = aggregate(vals, mode);

    // non-terminals aggregate over their valued descendant terminals
    std::function<void(const AstNode&, std::vector<double>&)> walk =
        [&](const AstNode& n, std::vector<double>& sink) {
            if (n.children.empty()) {
                auto it = scored.values.find(&n);
                if (it != scored.values.end()) sink.push_back(it->second);
                return;
            }
            std::vector<double> mine;
            for (const auto& c : n.children) walk(c, mine);
            if (!mine.empty()) scored.values[&n] = aggregate(mine, mode);
            sink.insert(sink.end(), mine.begin(), mine.end());
        };
    std::vector<double> top;
    walk(tree.root, top);
    return scored;
}

CategoryTable default_category_table() {
    CategoryTable t;
    auto add = [&](const std::string& cat, std::initializer_list<const char*> types) {
        for (const char* ty : types) t[ty] = cat;
    };
    add("Decisions", {"if_statement", "elif_clause", "else_clause", "conditional_expression",
                      "if", "elif", "else", "match_statement"});
    add("Iterations", {"for_statement", "while_statement", "for", "while", "break", "continue"});
    add("Exceptions", {"try_statement", "except_clause", "finally_clause", "raise_statement",
                       "try", "except", "raise", "finally"});
    add("Data Structures", {"list", "dictionary", "set", "tuple", "list_comprehension",
                            "dictionary_comprehension", "set_comprehension", "subscript"});
    add("Functional Programming", {"lambda", "call", "decorator", "generator_expression"});
    add("Operators", {"binary_operator", "boolean_operator", "comparison_operator",
                      "unary_operator", "augmented_assignment", "assignment"});
    add("Scope", {"module", "function_definition", "class_definition", "block",
                  "return_statement", "global_statement", "import_statement"});
    add("Data Types", {"integer", "float", "string", "true", "false", "none", "type"});
    return t;
}

CategoryTable load_category_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open category table " + path);
    json j = json::parse(in);
    CategoryTable t;
    // accept either {node_type: category} or {category: [node_types]}
    for (const auto& [key, value] : j.items()) {
        if (value.is_string()) t[key] = value.get<std::string>();
        else
            for (const auto& ty : value) t[ty.get<std::string>()] = key;
    }
    return t;
}

CategoryReport category_rollup(const ScoredTree& scored, const CategoryTable& table,
                               bool token_level) {
    CategoryReport report;
    std::map<std::string, std::vector<double>> buckets;

    std::function<void(const AstNode&)> walk = [&](const AstNode& n) {
        auto vit = scored.values.find(&n);
        if (vit != scored.values.end()) {
            auto cit = table.find(n.type);
            if (cit == table.end()) {
                report.other_nodes += 1;
            } else if (!token_level) {
                buckets[cit->second].push_back(vit->second);
            } else {
                // token-level: every aligned token under this node contributes
                std::function<void(const AstNode&)> gather = [&](const AstNode& d) {
                    auto tit = scored.node_tokens.find(&d);
                    if (tit != scored.node_tokens.end())
                        for (std::size_t t : tit->second)
                            buckets[cit->second].push_back(scored.token_scores[t]);
                    for (const auto& c : d.children) gather(c);
                };
                gather(n);
            }
        }
        for (const auto& c : n.children) walk(c);
    };
    walk(scored.tree->root);

    for (const auto& [cat, vals] : buckets) {
        CategoryStats stats;
        stats.count = vals.size();
        double sum = 0.0;
        for (double v : vals) sum += v;
        stats.mean = sum / static_cast<double>(vals.size());
        report.categories[cat] = stats;
    }
    return report;
}

namespace {

json node_to_json(const AstNode& n, const ScoredTree& scored) {
    json j;
    j["type"] = n.type;
    j["start"] = n.byte_start;
    j["end"] = n.byte_end;
    if (n.is_error) j["error"] = true;
    auto it = scored.values.find(&n);
    if (it != scored.values.end()) j["value"] = it->second;
    if (!n.children.empty()) {
        json kids = json::array();
        for (const auto& c : n.children) kids.push_back(node_to_json(c, scored));
        j["children"] = std::move(kids);
    }
    return j;
}

} // namespace

json emit_local_report(const ScoredTree& scored, const std::vector<TokenRecord>& tokens,
                       const Alignment& alignment) {
    const auto terminals = scored.tree->terminals();
    json j;
    j["tree"] = node_to_json(scored.tree->root, scored);
    json table = json::array();
    for (std::size_t t = 0; t < tokens.size(); ++t) {
        json row;
        row["token"] = tokens[t].token;
        row["start"] = tokens[t].byte_start;
        row["end"] = tokens[t].byte_end;
        row["score"] = scored.token_scores[t];
        const std::ptrdiff_t k = alignment.token_to_terminal[t];
        if (k >= 0) {
            row["terminal"] = terminals[static_cast<std::size_t>(k)]->type;
            row["terminal_start"] = terminals[static_cast<std::size_t>(k)]->byte_start;
        } else {
            row["dropped"] = true;
        }
        table.push_back(std::move(row));
    }
    j["tokens"] = std::move(table);
    return j;
}

} // namespace protoicl
