#include "doctest.h"

#include <cstdio>
#include <fstream>

#include "protoicl/pipeline.hpp"

using namespace protoicl;

TEST_CASE("config round-trips through JSON exactly") {
    TrainConfig cfg;
    cfg.epochs = 17;
    cfg.lr_network = 2.5e-4;
    cfg.batch_size = 33;
    cfg.similarity.n_alpha = 3.0;
    cfg.similarity.m = 5;
    cfg.sign_mode = SignMode::PaperExact;
    cfg.pair_reduction = PairReduction::Sum;
    cfg.manifold_space = ManifoldSpace::Projected;
    cfg.momentum_cadence = MomentumCadence::PerEpoch;
    cfg.seed = 991;

    TrainConfig back = config_from_json(config_to_json(cfg));
    CHECK(config_to_json(back) == config_to_json(cfg));
    CHECK(back.epochs == 17);
    CHECK(back.lr_network == 2.5e-4);
    CHECK(back.similarity.m == 5);
    CHECK(back.sign_mode == SignMode::PaperExact);
    CHECK(back.momentum_cadence == MomentumCadence::PerEpoch);
}

TEST_CASE("config_hash is stable and discriminating") {
    TrainConfig a;
    TrainConfig b;
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a).size() == 16);
    b.epochs = 4;
    CHECK(config_hash(a) != config_hash(b));
    TrainConfig c;
    c.seed = 1;
    CHECK(config_hash(a) != config_hash(c));
}

TEST_CASE("checkpoint round-trips bit for bit") {
    Checkpoint ckpt;
    ckpt.config.epochs = 3;
    ckpt.config.proto_dim = 4;
    ckpt.network = ProjectionNetwork(5, 4, 7);
    ckpt.bank = ProxyBank::init(2, 4, 8, 0.97);
    ckpt.bank.theta_m(0, 0) += 0.1234567890123456789;
    ckpt.labels = {{"alpha", 0}, {"beta", 1}};

    const std::string path = "ckpt_test.json";
    save_checkpoint(ckpt, path);
    Checkpoint back = load_checkpoint(path);
    CHECK(back.config.epochs == 3);
    CHECK((back.network.weight() - ckpt.network.weight()).norm() == 0.0);
    CHECK((back.network.bias() - ckpt.network.bias()).norm() == 0.0);
    CHECK((back.bank.theta_q - ckpt.bank.theta_q).norm() == 0.0);
    CHECK((back.bank.theta_m - ckpt.bank.theta_m).norm() == 0.0);
    CHECK(back.bank.gamma == 0.97);
    CHECK(back.labels == ckpt.labels);

    // saving the loaded checkpoint reproduces the file byte for byte
    const std::string path2 = "ckpt_test2.json";
    save_checkpoint(back, path2);
    std::ifstream f1(path), f2(path2);
    std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(s1 == s2);
    CHECK(!s1.empty());
    std::remove(path.c_str());
    std::remove(path2.c_str());

    CHECK_THROWS(load_checkpoint("no_such_checkpoint.json"));
}

TEST_CASE("checkpoint embeds config hash and tool version") {
    Checkpoint ckpt;
    ckpt.network = ProjectionNetwork(2, 2, 1);
    ckpt.bank = ProxyBank::init(1, 2, 2, 0.99);
    const std::string path = "ckpt_stamp.json";
    save_checkpoint(ckpt, path);
    std::ifstream in(path);
    nlohmann::json j = nlohmann::json::parse(in);
    CHECK(j["config_hash"] == config_hash(ckpt.config));
    CHECK(j["tool_version"] == kToolVersion);
    CHECK(j.contains("seed"));
    std::remove(path.c_str());
}

TEST_CASE("prototype set round-trips") {
    PrototypeSet set;
    set.strategy = "prototypes";
    set.entries = {{"a", "s0", 0}, {"b", "s3", 3}};
    TrainConfig cfg;
    const std::string path = "protos_test.json";
    save_prototypes(set, cfg, path);
    PrototypeSet back = load_prototypes(path);
    CHECK(back.strategy == "prototypes");
    REQUIRE(back.entries.size() == 2);
    CHECK(back.entries[0].label == "a");
    CHECK(back.entries[1].id == "s3");
    CHECK(back.entries[1].sample_index == 3);
    std::remove(path.c_str());
}

TEST_CASE("tokens and scores round-trip through jsonl") {
    const std::string tok_path = "tokens_test.jsonl";
    {
        std::ofstream out(tok_path);
        out << R"({"snippet_id":"s1","token":"def","byte_start":0,"byte_end":3,"vector":[1.0,2.0]})"
            << "\n"
            << R"({"snippet_id":"s1","token":"f","byte_start":4,"byte_end":5,"vector":[0.5,-1.0]})"
            << "\n";
    }
    std::vector<TokenRecord> tokens = load_tokens_jsonl(tok_path);
    REQUIRE(tokens.size() == 2);
    CHECK(tokens[0].token == "def");
    CHECK(tokens[0].byte_end == 3);
    CHECK(tokens[1].vector(1) == -1.0);

    AttributionResult res;
    res.snippet_id = "s1";
    res.raw_scores = {2.0, 0.25};
    res.norm_scores = {1.0, 0.0};
    const std::string score_path = "scores_test.jsonl";
    save_scores_jsonl(tokens, {res}, score_path);
    std::vector<ScoredToken> scored = load_scores_jsonl(score_path);
    REQUIRE(scored.size() == 2);
    CHECK(scored[0].record.token == "def");
    CHECK(scored[0].raw == 2.0);
    CHECK(scored[1].norm == 0.0);
    CHECK(scored[1].record.byte_start == 4);
    std::remove(tok_path.c_str());
    std::remove(score_path.c_str());
}

TEST_CASE("pass@k rows load from jsonl") {
    const std::string path = "passk_test.jsonl";
    {
        std::ofstream out(path);
        out << R"({"problem_id":"p1","n":5,"c":2})" << "\n"
            << R"({"problem_id":"p2","n":10,"c":0})" << "\n";
    }
    std::vector<PassAtKInput> rows = load_passk_jsonl(path);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].problem_id == "p1");
    CHECK(rows[0].n == 5);
    CHECK(rows[1].c == 0);
    std::remove(path.c_str());

    CHECK_THROWS(load_passk_jsonl("missing_passk.jsonl"));
}

TEST_CASE("train report serializes one record per epoch") {
    TrainReport report;
    for (int e = 0; e < 3; ++e) {
        EpochRecord r;
        r.epoch = e;
        r.total_loss = 1.0 / (e + 1);
        report.epochs.push_back(r);
    }
    TrainConfig cfg;
    const std::string path = "report_test.jsonl";
    save_train_report(report, cfg, path);
    std::ifstream in(path);
    std::string line;
    int lines = 0;
    while (std::getline(in, line)) {
        nlohmann::json j = nlohmann::json::parse(line);
        CHECK(j["epoch"] == lines);
        CHECK(j.contains("total_loss"));
        CHECK(j["config_hash"] == config_hash(cfg));
        ++lines;
    }
    CHECK(lines == 3);
    std::remove(path.c_str());
}
