#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "protoicl/types.hpp"

namespace protoicl {

struct TokenRecord {
    std::string snippet_id;
    std::string token;
    std::size_t byte_start = 0;
    std::size_t byte_end = 0;
    Vector vector;
};

struct AttributionResult {
    std::string snippet_id;
    std::vector<double> raw_scores;
    std::vector<double> norm_scores;
};

enum class CentroidMode { Mean, Sum };

Vector prototype_centroid(const std::vector<Vector>& prototype_vectors,
                          CentroidMode mode = CentroidMode::Mean);

/// Gradient-times-input score per token: the gradient of z_a . z_w w.r.t.
/// z_w is z_a, contracted with the token embedding this is just the dot
/// product.
std::vector<double> token_attribution(const Vector& z_a, const std::vector<TokenRecord>& tokens);

/// Per-snippet min-max; a degenerate range maps everything to 0.5.
std::vector<double> normalize_scores(const std::vector<double>& raw);

} // namespace protoicl
