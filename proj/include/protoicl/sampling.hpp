#pragma once

#include <string>
#include <vector>

#include "protoicl/corpus.hpp"
#include "protoicl/network.hpp"
#include "protoicl/train.hpp"

namespace protoicl {

struct PrototypeEntry {
    std::string label;
    std::string id;
    Index sample_index = -1;
};

struct PrototypeSet {
    std::string strategy;
    std::vector<PrototypeEntry> entries;
};

/// One prototype per class: the sample whose projected embedding is nearest
/// to that class's momentum proxy. Ties go to the lower sample index.
PrototypeSet select_prototypes(const EmbeddingDataset& dataset, const ProjectionNetwork& net,
                               const ProxyBank& bank);

/// Per class, the raw-space sample nearest to the query.
PrototypeSet similarity_sampler(const EmbeddingDataset& dataset, const Vector& query_vec);

/// Per class, the sample nearest to its class mean in raw space.
PrototypeSet diversity_sampler(const EmbeddingDataset& dataset);

/// The designated samples in order; [2,3,4] is the standard few-shot baseline.
PrototypeSet fixed_fewshot(const std::vector<Index>& indices, const EmbeddingDataset& dataset);

PrototypeSet restrict_to_classes(const PrototypeSet& set, const std::vector<std::string>& keep);

} // namespace protoicl
