#include "protoicl/sampling.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>

namespace protoicl {

namespace {

PrototypeEntry entry_for(const EmbeddingDataset& ds, Index idx) {
    const auto& s = ds.samples[static_cast<std::size_t>(idx)];
    return {s.label, s.id, idx};
}

// per-class argmin of dist(idx), ties to lower index
PrototypeSet per_class_argmin(const EmbeddingDataset& ds, const std::string& strategy,
                              const std::function<double(Index)>& dist) {
    PrototypeSet out;
    out.strategy = strategy;
    for (const auto& cls : ds.classes) {
        Index best = -1;
        double best_dist = std::numeric_limits<double>::infinity();
        for (Index i = 0; i < ds.size(); ++i) {
            if (ds.samples[static_cast<std::size_t>(i)].label != cls) continue;
            const double d = dist(i);
            if (best < 0 || d < best_dist) {
                best = i;
                best_dist = d;
            }
        }
        if (best < 0) throw std::runtime_error("class '" + cls + "' has no samples");
        out.entries.push_back(entry_for(ds, best));
    }
    return out;
}

} // namespace

PrototypeSet select_prototypes(const EmbeddingDataset& dataset, const ProjectionNetwork& net,
                               const ProxyBank& bank) {
    if (!dataset.encoded) throw std::invalid_argument("select_prototypes: dataset not encoded");
    std::vector<Vector> projected(static_cast<std::size_t>(dataset.size()));
    for (Index i = 0; i < dataset.size(); ++i)
        projected[static_cast<std::size_t>(i)] =
            net.forward(dataset.samples[static_cast<std::size_t>(i)].vector);
    const auto codes = label_map(dataset);
    return per_class_argmin(dataset, "prototypes", [&](Index i) {
        const int c = dataset.samples[static_cast<std::size_t>(i)].encoded_label;
        return (projected[static_cast<std::size_t>(i)] - bank.theta_m.row(c).transpose()).norm();
    });
}

PrototypeSet similarity_sampler(const EmbeddingDataset& dataset, const Vector& query_vec) {
    if (query_vec.size() != dataset.dim)
        throw std::invalid_argument("similarity_sampler: query dimension mismatch");
    return per_class_argmin(dataset, "similarity", [&](Index i) {
        return (dataset.samples[static_cast<std::size_t>(i)].vector - query_vec).norm();
    });
}

PrototypeSet diversity_sampler(const EmbeddingDataset& dataset) {
    std::map<std::string, Vector> means;
    std::map<std::string, Index> counts;
    for (const auto& s : dataset.samples) {
        auto [it, fresh] = means.try_emplace(s.label, Vector::Zero(dataset.dim));
        it->second += s.vector;
        counts[s.label] += 1;
    }
    for (auto& [label, sum] : means) sum /= static_cast<double>(counts[label]);
    return per_class_argmin(dataset, "diversity", [&](Index i) {
        const auto& s = dataset.samples[static_cast<std::size_t>(i)];
        return (s.vector - means.at(s.label)).norm();
    });
}

PrototypeSet fixed_fewshot(const std::vector<Index>& indices, const EmbeddingDataset& dataset) {
    PrototypeSet out;
    out.strategy = indices.empty() ? "base" : "mbpp";
    for (Index i : indices) {
        if (i < 0 || i >= dataset.size())
            throw std::out_of_range("fixed_fewshot: index " + std::to_string(i) + " out of range");
        out.entries.push_back(entry_for(dataset, i));
    }
    return out;
}

PrototypeSet restrict_to_classes(const PrototypeSet& set, const std::vector<std::string>& keep) {
    PrototypeSet out;
    out.strategy = set.strategy;
    for (const auto& e : set.entries)
        if (std::find(keep.begin(), keep.end(), e.label) != keep.end()) out.entries.push_back(e);
    return out;
}

} // namespace protoicl
