#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "protoicl/types.hpp"

namespace protoicl {

/// One corpus record: id, class label and the latent vector produced by
/// whatever encoder the user ran upstream.
struct EmbeddedSample {
    std::string id;
    std::string label;         // raw label as read
    int encoded_label = -1;    // 0..C-1 after label_encode, -1 before
    Vector vector;
};

struct EmbeddingDataset {
    std::vector<EmbeddedSample> samples;
    Index dim = 0;
    std::vector<std::string> classes;  // first-appearance order
    bool encoded = false;

    Index size() const { return static_cast<Index>(samples.size()); }
    Index num_classes() const { return static_cast<Index>(classes.size()); }
};

enum class DatasetFormat { Jsonl, Binary };

/// Shuffled batch order for one epoch.
struct BatchPlan {
    std::uint64_t seed = 0;
    Index batch_size = 128;
    std::vector<Index> order;  // permutation of 0..N-1

    Index num_batches() const;
    // indices of batch b within the epoch order; last batch may be short
    std::vector<Index> batch(Index b) const;
};

EmbeddingDataset load_dataset(const std::string& path, DatasetFormat format);
void save_dataset(const EmbeddingDataset& ds, const std::string& path, DatasetFormat format);

/// Maps raw labels to 0..C-1 in first-appearance order.
EmbeddingDataset label_encode(const EmbeddingDataset& ds);
std::map<std::string, int> label_map(const EmbeddingDataset& ds);

std::string format_magicoder_prompt(const std::string& query, const std::string& solution);

BatchPlan make_batches(const EmbeddingDataset& ds, Index batch_size, std::uint64_t seed,
                       std::uint64_t epoch = 0);

} // namespace protoicl
