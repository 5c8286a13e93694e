#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "protoicl/attribution.hpp"

namespace protoicl {

struct AstNode {
    std::string type;            // grammar symbol, e.g. "if_statement" or "if"
    std::size_t byte_start = 0;
    std::size_t byte_end = 0;
    bool is_terminal = false;
    bool is_error = false;
    std::vector<AstNode> children;
};

struct SyntaxTree {
    AstNode root;
    std::string source;

    bool has_errors() const;
    std::vector<const AstNode*> terminals() const;  // leaves in source order
};

/// Concrete syntax tree with byte spans; parse errors become error nodes.
SyntaxTree parse_source(const std::string& source);

struct Alignment {
    // per token: index into tree.terminals(), or -1 for dropped tokens
    std::vector<std::ptrdiff_t> token_to_terminal;
    std::vector<std::size_t> dropped;  // token indices with no overlap or only whitespace
};

/// Many-to-one byte-overlap alignment of tokens to terminal nodes.
Alignment align_tokens(const std::vector<TokenRecord>& tokens, const SyntaxTree& tree);

enum class AggMode { Avg, Median, Max };
AggMode agg_mode_from_string(const std::string& name);

struct ScoredTree {
    const SyntaxTree* tree = nullptr;
    AggMode mode = AggMode::Avg;
    std::map<const AstNode*, double> values;                  // valueless nodes absent
    std::map<const AstNode*, std::vector<std::size_t>> node_tokens;  // terminal -> token indices
    std::vector<double> token_scores;
};

/// Terminal value = aggregate over its aligned tokens; non-terminal value =
/// aggregate over descendant terminals that have values.
ScoredTree aggregate_node_scores(const SyntaxTree& tree, const Alignment& alignment,
                                 const std::vector<double>& scores, AggMode mode);

using CategoryTable = std::map<std::string, std::string>;

/// The eight-category node-type table; overridable from JSON.
CategoryTable default_category_table();
CategoryTable load_category_table(const std::string& path);

struct CategoryStats {
    double mean = 0.0;
    std::size_t count = 0;  // contributing nodes (or tokens in token-level mode)
};

struct CategoryReport {
    std::map<std::string, CategoryStats> categories;
    std::size_t other_nodes = 0;  // valued nodes with no category mapping
};

CategoryReport category_rollup(const ScoredTree& scored, const CategoryTable& table,
                               bool token_level = false);

nlohmann::json emit_local_report(const ScoredTree& scored,
                                 const std::vector<TokenRecord>& tokens,
                                 const Alignment& alignment);

} // namespace protoicl
