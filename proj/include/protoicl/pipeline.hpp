#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "protoicl/attribution.hpp"
#include "protoicl/corpus.hpp"
#include "protoicl/eval.hpp"
#include "protoicl/sampling.hpp"
#include "protoicl/syntax.hpp"
#include "protoicl/train.hpp"

namespace protoicl {

inline constexpr const char* kToolVersion = "0.1.0";

nlohmann::json config_to_json(const TrainConfig& cfg);
TrainConfig config_from_json(const nlohmann::json& j);

/// FNV-1a over the canonical JSON dump of the config.
std::string config_hash(const TrainConfig& cfg);

struct Checkpoint {
    TrainConfig config;
    ProjectionNetwork network;
    ProxyBank bank;
    std::map<std::string, int> labels;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

void save_train_report(const TrainReport& report, const TrainConfig& cfg,
                       const std::string& path);

void save_prototypes(const PrototypeSet& set, const TrainConfig& cfg, const std::string& path);
PrototypeSet load_prototypes(const std::string& path);

std::vector<TokenRecord> load_tokens_jsonl(const std::string& path);
void save_scores_jsonl(const std::vector<TokenRecord>& tokens,
                       const std::vector<AttributionResult>& results, const std::string& path);

struct ScoredToken {
    TokenRecord record;  // vector left empty
    double raw = 0.0;
    double norm = 0.0;
};
std::vector<ScoredToken> load_scores_jsonl(const std::string& path);

std::vector<PassAtKInput> load_passk_jsonl(const std::string& path);

} // namespace protoicl
