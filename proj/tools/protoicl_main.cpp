// Pipeline driver: ingest -> train -> sample -> attribute -> ast-report,
// plus a pass@k aggregator. Exit codes: 0 ok, 1 internal error, 2 input error.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "protoicl/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace protoicl;

namespace {

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    return json::parse(in);
}

void write_json_file(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    out << j.dump(2) << "\n";
}

DatasetFormat parse_format(const std::string& name) {
    if (name == "jsonl") return DatasetFormat::Jsonl;
    if (name == "binary") return DatasetFormat::Binary;
    throw InputError("unknown dataset format '" + name + "'");
}

void stamp(json& j, const TrainConfig& cfg) {
    j["config_hash"] = config_hash(cfg);
    j["seed"] = cfg.seed;
    j["tool_version"] = kToolVersion;
}

EmbeddingDataset load_encoded(const std::string& path, const std::string& format) {
    return label_encode(load_dataset(path, parse_format(format)));
}

// --- subcommands --------------------------------------------------------

int cmd_ingest(const std::string& input, const std::string& format, const std::string& out_dir,
               const TrainConfig& cfg) {
    EmbeddingDataset ds = load_encoded(input, format);
    json stats;
    stats["num_samples"] = ds.size();
    stats["dim"] = ds.dim;
    stats["num_classes"] = ds.num_classes();
    json per_class = json::object();
    for (const auto& s : ds.samples) per_class[s.label] = per_class.value(s.label, 0) + 1;
    stats["per_class_counts"] = per_class;
    stamp(stats, cfg);
    fs::create_directories(out_dir);
    write_json_file(stats, out_dir + "/stats.json");
    json lm;
    for (const auto& [label, code] : label_map(ds)) lm[label] = code;
    write_json_file(lm, out_dir + "/label_map.json");
    std::cout << stats.dump(2) << "\n";
    return 0;
}

int cmd_train(const std::string& input, const std::string& format, const std::string& out_dir,
              const TrainConfig& cfg) {
    EmbeddingDataset ds = load_encoded(input, format);
    TrainResult res = train(ds, cfg);
    fs::create_directories(out_dir);
    Checkpoint ckpt{cfg, res.network, res.bank, label_map(ds)};
    save_checkpoint(ckpt, out_dir + "/checkpoint.json");
    save_train_report(res.report, cfg, out_dir + "/train_report.jsonl");
    std::cout << "trained " << cfg.epochs << " epochs, checkpoint at " << out_dir
              << "/checkpoint.json\n";
    return 0;
}

int cmd_sample(const std::string& input, const std::string& format, const std::string& out_dir,
               const std::string& checkpoint_path, const std::string& strategy,
               const std::string& query_file, std::vector<Index> indices,
               const std::vector<std::string>& restrict_labels, TrainConfig cfg) {
    EmbeddingDataset ds = load_encoded(input, format);
    PrototypeSet set;
    if (strategy == "prototypes") {
        if (checkpoint_path.empty()) throw InputError("strategy=prototypes needs --checkpoint");
        Checkpoint ckpt = load_checkpoint(checkpoint_path);
        cfg = ckpt.config;
        set = select_prototypes(ds, ckpt.network, ckpt.bank);
    } else if (strategy == "similarity") {
        if (query_file.empty()) throw InputError("strategy=similarity needs --query-vector");
        json q = load_json_file(query_file);
        Vector query(static_cast<Index>(q.size()));
        for (std::size_t i = 0; i < q.size(); ++i) query[static_cast<Index>(i)] = q[i].get<double>();
        set = similarity_sampler(ds, query);
    } else if (strategy == "diversity") {
        set = diversity_sampler(ds);
    } else if (strategy == "mbpp") {
        if (indices.empty()) indices = {2, 3, 4};
        set = fixed_fewshot(indices, ds);
    } else if (strategy == "base") {
        set = fixed_fewshot({}, ds);
    } else {
        throw InputError("unknown strategy '" + strategy + "'");
    }
    if (!restrict_labels.empty()) set = restrict_to_classes(set, restrict_labels);
    fs::create_directories(out_dir);
    save_prototypes(set, cfg, out_dir + "/prototypes.json");
    std::cout << set.entries.size() << " prototypes (" << set.strategy << ") -> " << out_dir
              << "/prototypes.json\n";
    return 0;
}

int cmd_attribute(const std::string& input, const std::string& format,
                  const std::string& out_dir, const std::string& prototypes_path,
                  const std::string& tokens_path, const std::string& centroid_mode,
                  const TrainConfig& cfg) {
    EmbeddingDataset ds = load_encoded(input, format);
    PrototypeSet set = load_prototypes(prototypes_path);
    if (set.entries.empty()) throw InputError("prototype set is empty");
    std::vector<Vector> proto_vecs;
    for (const auto& e : set.entries) {
        bool found = false;
        for (const auto& s : ds.samples) {
            if (s.id == e.id) {
                proto_vecs.push_back(s.vector);
                found = true;
                break;
            }
        }
        if (!found) throw InputError("prototype id '" + e.id + "' not in dataset");
    }
    const CentroidMode mode = centroid_mode == "sum" ? CentroidMode::Sum : CentroidMode::Mean;
    const Vector z_a = prototype_centroid(proto_vecs, mode);

    std::vector<TokenRecord> tokens = load_tokens_jsonl(tokens_path);
    for (const auto& t : tokens)
        if (t.vector.size() == 0)
            throw InputError("token '" + t.token + "' in snippet " + t.snippet_id +
                             " has no vector");

    // per-snippet scoring, snippet order = first appearance
    std::vector<std::string> snippet_order;
    std::map<std::string, std::vector<TokenRecord>> by_snippet;
    for (const auto& t : tokens) {
        if (!by_snippet.count(t.snippet_id)) snippet_order.push_back(t.snippet_id);
        by_snippet[t.snippet_id].push_back(t);
    }
    std::vector<AttributionResult> results;
    for (const auto& id : snippet_order) {
        AttributionResult r;
        r.snippet_id = id;
        r.raw_scores = token_attribution(z_a, by_snippet[id]);
        r.norm_scores = normalize_scores(r.raw_scores);
        results.push_back(std::move(r));
    }
    fs::create_directories(out_dir);
    save_scores_jsonl(tokens, results, out_dir + "/scores.jsonl");
    std::cout << tokens.size() << " token scores -> " << out_dir << "/scores.jsonl\n";
    return 0;
}

int cmd_ast_report(const std::string& sources_dir, const std::string& scores_path,
                   const std::string& out_dir, const std::string& table_path,
                   const std::string& agg_name, bool token_level, const TrainConfig& cfg) {
    const std::vector<ScoredToken> scored_tokens = load_scores_jsonl(scores_path);
    const CategoryTable table =
        table_path.empty() ? default_category_table() : load_category_table(table_path);
    const AggMode mode = agg_mode_from_string(agg_name);

    std::vector<std::string> snippet_order;
    std::map<std::string, std::vector<ScoredToken>> by_snippet;
    for (const auto& t : scored_tokens) {
        if (!by_snippet.count(t.record.snippet_id)) snippet_order.push_back(t.record.snippet_id);
        by_snippet[t.record.snippet_id].push_back(t);
    }

    fs::create_directories(out_dir);
    std::map<std::string, std::vector<double>> corpus_means;  // category -> per-snippet means
    json global;
    json snippets = json::array();

    for (const auto& id : snippet_order) {
        const std::string src_path = sources_dir + "/" + id + ".py";
        std::ifstream src_in(src_path);
        if (!src_in) throw InputError("missing source file " + src_path);
        std::string source((std::istreambuf_iterator<char>(src_in)),
                           std::istreambuf_iterator<char>());
        SyntaxTree tree = parse_source(source);

        std::vector<TokenRecord> tokens;
        std::vector<double> scores;
        for (const auto& t : by_snippet[id]) {
            tokens.push_back(t.record);
            scores.push_back(t.norm);
        }
        Alignment alignment = align_tokens(tokens, tree);
        ScoredTree scored = aggregate_node_scores(tree, alignment, scores, mode);
        CategoryReport report = category_rollup(scored, table, token_level);

        json local = emit_local_report(scored, tokens, alignment);
        local["snippet_id"] = id;
        local["parse_errors"] = tree.has_errors();
        json cats = json::object();
        for (const auto& [cat, stats] : report.categories) {
            cats[cat] = {{"mean", stats.mean}, {"count", stats.count}};
            corpus_means[cat].push_back(stats.mean);
        }
        local["categories"] = cats;
        local["other_nodes"] = report.other_nodes;
        stamp(local, cfg);
        write_json_file(local, out_dir + "/" + id + ".report.json");

        json row;
        row["snippet_id"] = id;
        row["categories"] = cats;
        row["parse_errors"] = tree.has_errors();
        snippets.push_back(std::move(row));
    }

    json global_cats = json::object();
    for (const auto& [cat, means] : corpus_means) {
        double sum = 0.0;
        for (double m : means) sum += m;
        global_cats[cat] = {{"mean", sum / static_cast<double>(means.size())},
                            {"snippets", means.size()}};
    }
    global["categories"] = global_cats;
    global["snippets"] = std::move(snippets);
    stamp(global, cfg);
    write_json_file(global, out_dir + "/global_report.json");
    std::cout << snippet_order.size() << " snippets -> " << out_dir << "/global_report.json\n";
    return 0;
}

int cmd_passk(const std::string& input, int k, const std::string& out_dir,
              const TrainConfig& cfg) {
    const std::vector<PassAtKInput> rows = load_passk_jsonl(input);
    json j;
    j["k"] = k;
    json per = json::array();
    for (const auto& r : rows) {
        json row;
        row["problem_id"] = r.problem_id;
        row["n"] = r.n;
        row["c"] = r.c;
        row["pass_at_k"] = pass_at_k(r.n, r.c, k);
        per.push_back(std::move(row));
    }
    j["per_problem"] = std::move(per);
    j["aggregate"] = aggregate_pass_at_k(rows, k);
    stamp(j, cfg);
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_json_file(j, out_dir + "/passk.json");
    }
    std::cout << j.dump(2) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Prototype demonstration selection and syntax-grounded attribution reports"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out";
    std::uint64_t seed = 0;
    bool seed_set = false;
    app.add_option("--config", config_path, "JSON config file; flags override it");
    app.add_option("--out-dir", out_dir, "output directory");
    app.add_option_function<std::uint64_t>(
        "--seed", [&](std::uint64_t s) { seed = s; seed_set = true; }, "RNG seed");

    std::string input, format = "jsonl";
    std::string checkpoint_path, strategy = "prototypes", query_file;
    std::string prototypes_path, tokens_path, centroid = "mean";
    std::string sources_dir, scores_path, table_path, agg = "avg";
    std::vector<Index> indices;
    std::vector<std::string> restrict_labels;
    bool token_level = false;
    int k = 1;

    TrainConfig flag_cfg;

    auto add_data_opts = [&](CLI::App* sub) {
        sub->add_option("--input", input, "embeddings file")->required();
        sub->add_option("--format", format, "jsonl|binary");
    };

    CLI::App* ingest = app.add_subcommand("ingest", "validate and label-encode a corpus");
    add_data_opts(ingest);

    CLI::App* train_cmd = app.add_subcommand("train", "train the projection network and proxies");
    add_data_opts(train_cmd);
    train_cmd->add_option("--epochs", flag_cfg.epochs);
    train_cmd->add_option("--lr-network", flag_cfg.lr_network);
    train_cmd->add_option("--lr-proxy", flag_cfg.lr_proxy);
    train_cmd->add_option("--lr-decay", flag_cfg.lr_decay);
    train_cmd->add_option("--batch-size", flag_cfg.batch_size);
    train_cmd->add_option("--pa-alpha", flag_cfg.pa_alpha);
    train_cmd->add_option("--pa-epsilon", flag_cfg.pa_epsilon);
    train_cmd->add_option("--delta", flag_cfg.manifold_delta);
    train_cmd->add_option("--gamma", flag_cfg.gamma);
    train_cmd->add_option("--proto-dim", flag_cfg.proto_dim);
    train_cmd->add_option("--n-alpha", flag_cfg.similarity.n_alpha);
    train_cmd->add_option("--n-beta", flag_cfg.similarity.n_beta);
    train_cmd->add_option("--admission-threshold", flag_cfg.similarity.admission_threshold);
    train_cmd->add_option("--manifold-dim", flag_cfg.similarity.m);
    train_cmd->add_option("--k-max", flag_cfg.similarity.k_max);
    train_cmd->add_option("--n-anchors", flag_cfg.similarity.n_anchors);
    std::string sign_mode = "corrected", pair_reduction = "mean", manifold_space = "input",
                cadence = "per_batch";
    train_cmd->add_option("--sign-mode", sign_mode, "corrected|paper_exact");
    train_cmd->add_option("--pair-reduction", pair_reduction, "mean|sum");
    train_cmd->add_option("--manifold-space", manifold_space, "input|projected");
    train_cmd->add_option("--momentum-cadence", cadence, "per_batch|per_epoch");

    CLI::App* sample = app.add_subcommand("sample", "produce a demonstration set");
    add_data_opts(sample);
    sample->add_option("--checkpoint", checkpoint_path);
    sample->add_option("--strategy", strategy, "prototypes|similarity|diversity|mbpp|base");
    sample->add_option("--query-vector", query_file, "JSON array for similarity strategy");
    sample->add_option("--indices", indices, "sample indices for the mbpp strategy");
    sample->add_option("--restrict", restrict_labels, "keep only these class labels");

    CLI::App* attribute = app.add_subcommand("attribute", "score tokens against prototypes");
    add_data_opts(attribute);
    attribute->add_option("--prototypes", prototypes_path)->required();
    attribute->add_option("--tokens", tokens_path)->required();
    attribute->add_option("--centroid", centroid, "mean|sum");

    CLI::App* ast = app.add_subcommand("ast-report", "parse sources and roll up confidences");
    ast->add_option("--sources", sources_dir, "directory with <snippet_id>.py files")->required();
    ast->add_option("--scores", scores_path, "scores.jsonl from attribute")->required();
    ast->add_option("--category-table", table_path, "JSON category table override");
    ast->add_option("--agg", agg, "avg|median|max");
    ast->add_flag("--token-level", token_level, "average over tokens instead of nodes");

    CLI::App* passk = app.add_subcommand("passk", "aggregate pass@k from correctness counts");
    passk->add_option("--input", input, "passk.jsonl")->required();
    passk->add_option("--k", k)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        TrainConfig cfg;
        if (!config_path.empty()) cfg = config_from_json(load_json_file(config_path));
        // explicit flags win over the config file
        if (train_cmd->parsed()) {
            auto override_if = [&](const char* name, auto member) {
                if (train_cmd->count(name)) cfg.*member = flag_cfg.*member;
            };
            override_if("--epochs", &TrainConfig::epochs);
            override_if("--lr-network", &TrainConfig::lr_network);
            override_if("--lr-proxy", &TrainConfig::lr_proxy);
            override_if("--lr-decay", &TrainConfig::lr_decay);
            override_if("--batch-size", &TrainConfig::batch_size);
            override_if("--pa-alpha", &TrainConfig::pa_alpha);
            override_if("--pa-epsilon", &TrainConfig::pa_epsilon);
            override_if("--delta", &TrainConfig::manifold_delta);
            override_if("--gamma", &TrainConfig::gamma);
            override_if("--proto-dim", &TrainConfig::proto_dim);
            if (train_cmd->count("--n-alpha")) cfg.similarity.n_alpha = flag_cfg.similarity.n_alpha;
            if (train_cmd->count("--n-beta")) cfg.similarity.n_beta = flag_cfg.similarity.n_beta;
            if (train_cmd->count("--admission-threshold"))
                cfg.similarity.admission_threshold = flag_cfg.similarity.admission_threshold;
            if (train_cmd->count("--manifold-dim")) cfg.similarity.m = flag_cfg.similarity.m;
            if (train_cmd->count("--k-max")) cfg.similarity.k_max = flag_cfg.similarity.k_max;
            if (train_cmd->count("--n-anchors"))
                cfg.similarity.n_anchors = flag_cfg.similarity.n_anchors;
            if (train_cmd->count("--sign-mode"))
                cfg.sign_mode =
                    sign_mode == "paper_exact" ? SignMode::PaperExact : SignMode::Corrected;
            if (train_cmd->count("--pair-reduction"))
                cfg.pair_reduction =
                    pair_reduction == "sum" ? PairReduction::Sum : PairReduction::Mean;
            if (train_cmd->count("--manifold-space"))
                cfg.manifold_space = manifold_space == "projected" ? ManifoldSpace::Projected
                                                                   : ManifoldSpace::Input;
            if (train_cmd->count("--momentum-cadence"))
                cfg.momentum_cadence = cadence == "per_epoch" ? MomentumCadence::PerEpoch
                                                              : MomentumCadence::PerBatch;
        }
        if (seed_set) cfg.seed = seed;

        if (ingest->parsed()) return cmd_ingest(input, format, out_dir, cfg);
        if (train_cmd->parsed()) return cmd_train(input, format, out_dir, cfg);
        if (sample->parsed())
            return cmd_sample(input, format, out_dir, checkpoint_path, strategy, query_file,
                              indices, restrict_labels, cfg);
        if (attribute->parsed())
            return cmd_attribute(input, format, out_dir, prototypes_path, tokens_path, centroid,
                                 cfg);
        if (ast->parsed())
            return cmd_ast_report(sources_dir, scores_path, out_dir, table_path, agg, token_level,
                                  cfg);
        if (passk->parsed()) return cmd_passk(input, k, out_dir, cfg);
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
