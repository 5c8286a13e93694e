#include "protoicl/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace protoicl {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& j) {
    const Index rows = static_cast<Index>(j.size());
    const Index cols = rows > 0 ? static_cast<Index>(j[0].size()) : 0;
    Matrix m(rows, cols);
    for (Index r = 0; r < rows; ++r)
        for (Index c = 0; c < cols; ++c)
            m(r, c) = j[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>();
    return m;
}

json vector_to_json(const Vector& v) {
    json out = json::array();
    for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

Vector vector_from_json(const json& j) {
    Vector v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Index>(i)] = j[i].get<double>();
    return v;
}

} // namespace

json config_to_json(const TrainConfig& cfg) {
    json j;
    j["epochs"] = cfg.epochs;
    j["lr_network"] = cfg.lr_network;
    j["lr_proxy"] = cfg.lr_proxy;
    j["lr_decay"] = cfg.lr_decay;
    j["batch_size"] = cfg.batch_size;
    j["pa_alpha"] = cfg.pa_alpha;
    j["pa_epsilon"] = cfg.pa_epsilon;
    j["manifold_delta"] = cfg.manifold_delta;
    j["gamma"] = cfg.gamma;
    j["proto_dim"] = cfg.proto_dim;
    j["seed"] = cfg.seed;
    j["sign_mode"] = cfg.sign_mode == SignMode::Corrected ? "corrected" : "paper_exact";
    j["pair_reduction"] = cfg.pair_reduction == PairReduction::Mean ? "mean" : "sum";
    j["manifold_space"] = cfg.manifold_space == ManifoldSpace::Input ? "input" : "projected";
    j["momentum_cadence"] =
        cfg.momentum_cadence == MomentumCadence::PerBatch ? "per_batch" : "per_epoch";
    j["similarity"] = {
        {"n_alpha", cfg.similarity.n_alpha},
        {"n_beta", cfg.similarity.n_beta},
        {"admission_threshold", cfg.similarity.admission_threshold},
        {"m", cfg.similarity.m},
        {"k_max", cfg.similarity.k_max},
        {"n_anchors", cfg.similarity.n_anchors},
    };
    return j;
}

TrainConfig config_from_json(const json& j) {
    TrainConfig cfg;
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.lr_network = j.value("lr_network", cfg.lr_network);
    cfg.lr_proxy = j.value("lr_proxy", cfg.lr_proxy);
    cfg.lr_decay = j.value("lr_decay", cfg.lr_decay);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.pa_alpha = j.value("pa_alpha", cfg.pa_alpha);
    cfg.pa_epsilon = j.value("pa_epsilon", cfg.pa_epsilon);
    cfg.manifold_delta = j.value("manifold_delta", cfg.manifold_delta);
    cfg.gamma = j.value("gamma", cfg.gamma);
    cfg.proto_dim = j.value("proto_dim", cfg.proto_dim);
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("sign_mode"))
        cfg.sign_mode =
            j["sign_mode"] == "paper_exact" ? SignMode::PaperExact : SignMode::Corrected;
    if (j.contains("pair_reduction"))
        cfg.pair_reduction = j["pair_reduction"] == "sum" ? PairReduction::Sum : PairReduction::Mean;
    if (j.contains("manifold_space"))
        cfg.manifold_space =
            j["manifold_space"] == "projected" ? ManifoldSpace::Projected : ManifoldSpace::Input;
    if (j.contains("momentum_cadence"))
        cfg.momentum_cadence = j["momentum_cadence"] == "per_epoch" ? MomentumCadence::PerEpoch
                                                                    : MomentumCadence::PerBatch;
    if (j.contains("similarity")) {
        const json& s = j["similarity"];
        cfg.similarity.n_alpha = s.value("n_alpha", cfg.similarity.n_alpha);
        cfg.similarity.n_beta = s.value("n_beta", cfg.similarity.n_beta);
        cfg.similarity.admission_threshold =
            s.value("admission_threshold", cfg.similarity.admission_threshold);
        cfg.similarity.m = s.value("m", cfg.similarity.m);
        cfg.similarity.k_max = s.value("k_max", cfg.similarity.k_max);
        cfg.similarity.n_anchors = s.value("n_anchors", cfg.similarity.n_anchors);
    }
    return cfg;
}

std::string config_hash(const TrainConfig& cfg) {
    const std::string dump = config_to_json(cfg).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    json j;
    j["tool_version"] = kToolVersion;
    j["config"] = config_to_json(ckpt.config);
    j["config_hash"] = config_hash(ckpt.config);
    j["seed"] = ckpt.config.seed;
    j["weight"] = matrix_to_json(ckpt.network.weight());
    j["bias"] = vector_to_json(ckpt.network.bias());
    j["theta_q"] = matrix_to_json(ckpt.bank.theta_q);
    j["theta_m"] = matrix_to_json(ckpt.bank.theta_m);
    j["gamma"] = ckpt.bank.gamma;
    j["labels"] = ckpt.labels;
    std::ofstream out(path);
    if (!out) fail("cannot write " + path);
    out << j.dump(2) << "\n";
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open checkpoint " + path);
    json j = json::parse(in);
    Checkpoint ckpt;
    ckpt.config = config_from_json(j.at("config"));
    const Matrix w = matrix_from_json(j.at("weight"));
    ckpt.network = ProjectionNetwork(w.rows(), w.cols(), 0);
    ckpt.network.weight() = w;
    ckpt.network.bias() = vector_from_json(j.at("bias"));
    ckpt.bank.theta_q = matrix_from_json(j.at("theta_q"));
    ckpt.bank.theta_m = matrix_from_json(j.at("theta_m"));
    ckpt.bank.gamma = j.at("gamma").get<double>();
    ckpt.labels = j.at("labels").get<std::map<std::string, int>>();
    return ckpt;
}

void save_train_report(const TrainReport& report, const TrainConfig& cfg,
                       const std::string& path) {
    std::ofstream out(path);
    if (!out) fail("cannot write " + path);
    for (const auto& e : report.epochs) {
        json j;
        j["epoch"] = e.epoch;
        j["total_loss"] = e.total_loss;
        j["pa_loss"] = e.pa_loss;
        j["manifold_loss"] = e.manifold_loss;
        j["mean_intra_proxy_distance"] = e.mean_intra_proxy_distance;
        j["lr_network"] = e.lr_network;
        j["lr_proxy"] = e.lr_proxy;
        j["config_hash"] = config_hash(cfg);
        j["seed"] = cfg.seed;
        j["tool_version"] = kToolVersion;
        out << j.dump() << "\n";
    }
}

void save_prototypes(const PrototypeSet& set, const TrainConfig& cfg, const std::string& path) {
    json j;
    j["strategy"] = set.strategy;
    j["config_hash"] = config_hash(cfg);
    j["seed"] = cfg.seed;
    j["tool_version"] = kToolVersion;
    json entries = json::array();
    for (const auto& e : set.entries) {
        json row;
        row["label"] = e.label;
        row["id"] = e.id;
        row["index"] = e.sample_index;
        entries.push_back(std::move(row));
    }
    j["entries"] = std::move(entries);
    std::ofstream out(path);
    if (!out) fail("cannot write " + path);
    out << j.dump(2) << "\n";
}

PrototypeSet load_prototypes(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open prototypes " + path);
    json j = json::parse(in);
    PrototypeSet set;
    set.strategy = j.at("strategy").get<std::string>();
    for (const auto& row : j.at("entries")) {
        PrototypeEntry e;
        e.label = row.at("label").get<std::string>();
        e.id = row.at("id").get<std::string>();
        e.sample_index = row.value("index", Index(-1));
        set.entries.push_back(std::move(e));
    }
    return set;
}

std::vector<TokenRecord> load_tokens_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open tokens " + path);
    std::vector<TokenRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            fail("tokens parse error at line " + std::to_string(lineno) + ": " + e.what());
        }
        TokenRecord t;
        t.snippet_id = j.at("snippet_id").get<std::string>();
        t.token = j.at("token").get<std::string>();
        t.byte_start = j.at("byte_start").get<std::size_t>();
        t.byte_end = j.at("byte_end").get<std::size_t>();
        if (j.contains("vector")) t.vector = vector_from_json(j["vector"]);
        out.push_back(std::move(t));
    }
    if (out.empty()) fail("empty token file " + path);
    return out;
}

void save_scores_jsonl(const std::vector<TokenRecord>& tokens,
                       const std::vector<AttributionResult>& results, const std::string& path) {
    std::map<std::string, const AttributionResult*> by_id;
    for (const auto& r : results) by_id[r.snippet_id] = &r;
    std::map<std::string, std::size_t> cursor;
    std::ofstream out(path);
    if (!out) fail("cannot write " + path);
    for (const auto& t : tokens) {
        const auto* res = by_id.at(t.snippet_id);
        const std::size_t i = cursor[t.snippet_id]++;
        json j;
        j["snippet_id"] = t.snippet_id;
        j["token"] = t.token;
        j["byte_start"] = t.byte_start;
        j["byte_end"] = t.byte_end;
        j["raw"] = res->raw_scores.at(i);
        j["norm"] = res->norm_scores.at(i);
        out << j.dump() << "\n";
    }
}

std::vector<ScoredToken> load_scores_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open scores " + path);
    std::vector<ScoredToken> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        ScoredToken s;
        s.record.snippet_id = j.at("snippet_id").get<std::string>();
        s.record.token = j.at("token").get<std::string>();
        s.record.byte_start = j.at("byte_start").get<std::size_t>();
        s.record.byte_end = j.at("byte_end").get<std::size_t>();
        s.raw = j.at("raw").get<double>();
        s.norm = j.at("norm").get<double>();
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<PassAtKInput> load_passk_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open " + path);
    std::vector<PassAtKInput> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        PassAtKInput row;
        row.problem_id = j.at("problem_id").get<std::string>();
        row.n = j.at("n").get<int>();
        row.c = j.at("c").get<int>();
        out.push_back(std::move(row));
    }
    if (out.empty()) fail("empty pass@k input " + path);
    return out;
}

} // namespace protoicl
