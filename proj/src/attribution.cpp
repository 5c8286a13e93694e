#include "protoicl/attribution.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace protoicl {

Vector prototype_centroid(const std::vector<Vector>& prototype_vectors, CentroidMode mode) {
    if (prototype_vectors.empty())
        throw std::invalid_argument("prototype_centroid: empty prototype list");
    const Index d = prototype_vectors.front().size();
    Vector sum = Vector::Zero(d);
    for (const auto& v : prototype_vectors) {
        if (v.size() != d) throw std::invalid_argument("prototype_centroid: mixed dimensions");
        sum += v;
    }
    if (mode == CentroidMode::Mean) sum /= static_cast<double>(prototype_vectors.size());
    return sum;
}

std::vector<double> token_attribution(const Vector& z_a, const std::vector<TokenRecord>& tokens) {
    std::vector<double> raw;
    raw.reserve(tokens.size());
    for (const auto& t : tokens) {
        if (t.vector.size() != z_a.size())
            throw std::invalid_argument("token_attribution: dimension mismatch for token '" +
                                        t.token + "'");
        raw.push_back(z_a.dot(t.vector));
    }
    return raw;
}

std::vector<double> normalize_scores(const std::vector<double>& raw) {
    if (raw.empty()) throw std::invalid_argument("normalize_scores: empty input");
    for (double x : raw)
        if (!std::isfinite(x)) throw std::invalid_argument("normalize_scores: non-finite score");
    const auto [lo_it, hi_it] = std::minmax_element(raw.begin(), raw.end());
    const double lo = *lo_it, hi = *hi_it;
    std::vector<double> out(raw.size());
    if (hi == lo) {
        std::fill(out.begin(), out.end(), 0.5);
        return out;
    }
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = (raw[i] - lo) / (hi - lo);
    return out;
}

} // namespace protoicl
