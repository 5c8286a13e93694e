#include "protoicl/corpus.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include "json.hpp"

#include "protoicl/rng.hpp"

namespace protoicl {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

void check_vector(const Vector& v, std::size_t record) {
    for (Index i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i]))
            fail("non-finite value in vector at record " + std::to_string(record));
    }
}

void validate(EmbeddingDataset& ds) {
    std::set<std::string> ids;
    for (std::size_t r = 0; r < ds.samples.size(); ++r) {
        const auto& s = ds.samples[r];
        if (s.vector.size() != ds.dim)
            fail("dimension mismatch at record " + std::to_string(r + 1) + ": expected " +
                 std::to_string(ds.dim) + ", got " + std::to_string(s.vector.size()));
        check_vector(s.vector, r + 1);
        if (!ids.insert(s.id).second)
            fail("duplicate id '" + s.id + "' at record " + std::to_string(r + 1));
    }
    std::set<std::string> seen;
    for (const auto& s : ds.samples)
        if (seen.insert(s.label).second) ds.classes.push_back(s.label);
}

EmbeddingDataset load_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open " + path);
    EmbeddingDataset ds;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            fail("parse error at line " + std::to_string(lineno) + ": " + e.what());
        }
        EmbeddedSample s;
        try {
            s.id = j.at("id").get<std::string>();
            s.label = j.at("label").get<std::string>();
            const auto& vec = j.at("vector");
            s.vector.resize(static_cast<Index>(vec.size()));
            for (std::size_t i = 0; i < vec.size(); ++i)
                s.vector[static_cast<Index>(i)] = vec[i].get<double>();
        } catch (const json::exception& e) {
            fail("bad record at line " + std::to_string(lineno) + ": " + e.what());
        }
        if (ds.samples.empty()) ds.dim = s.vector.size();
        if (s.vector.size() != ds.dim)
            fail("dimension mismatch at line " + std::to_string(lineno) + ": expected " +
                 std::to_string(ds.dim) + ", got " + std::to_string(s.vector.size()));
        ds.samples.push_back(std::move(s));
    }
    if (ds.samples.empty()) fail("empty dataset: " + path);
    validate(ds);
    return ds;
}

// PEMB binary: magic "PEMB", u32 count, u32 dim, then count*dim f32 rows.
// Labels and ids live in a jsonl sidecar "<path>.labels".
EmbeddingDataset load_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::string(magic, 4) != "PEMB") fail("bad magic in " + path);
    std::uint32_t count = 0, dim = 0;
    in.read(reinterpret_cast<char*>(&count), 4);
    in.read(reinterpret_cast<char*>(&dim), 4);
    if (!in || count == 0 || dim == 0) fail("empty or corrupt header in " + path);

    EmbeddingDataset ds;
    ds.dim = static_cast<Index>(dim);
    std::vector<float> row(dim);
    for (std::uint32_t r = 0; r < count; ++r) {
        in.read(reinterpret_cast<char*>(row.data()), std::streamsize(dim) * 4);
        if (!in) fail("truncated row " + std::to_string(r + 1) + " in " + path);
        EmbeddedSample s;
        s.vector.resize(ds.dim);
        for (std::uint32_t i = 0; i < dim; ++i) s.vector[static_cast<Index>(i)] = row[i];
        ds.samples.push_back(std::move(s));
    }

    std::ifstream side(path + ".labels");
    if (!side) fail("missing label sidecar " + path + ".labels");
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(side, line)) {
        if (line.empty()) continue;
        if (lineno >= ds.samples.size()) fail("label sidecar longer than vector table");
        json j = json::parse(line);
        ds.samples[lineno].id = j.at("id").get<std::string>();
        ds.samples[lineno].label = j.at("label").get<std::string>();
        ++lineno;
    }
    if (lineno != ds.samples.size()) fail("label sidecar shorter than vector table");
    validate(ds);
    return ds;
}

} // namespace

EmbeddingDataset load_dataset(const std::string& path, DatasetFormat format) {
    return format == DatasetFormat::Jsonl ? load_jsonl(path) : load_binary(path);
}

void save_dataset(const EmbeddingDataset& ds, const std::string& path, DatasetFormat format) {
    if (format == DatasetFormat::Jsonl) {
        std::ofstream out(path);
        if (!out) fail("cannot write " + path);
        for (const auto& s : ds.samples) {
            json j;
            j["id"] = s.id;
            j["label"] = s.label;
            auto& vec = j["vector"] = json::array();
            for (Index i = 0; i < s.vector.size(); ++i) vec.push_back(s.vector[i]);
            out << j.dump() << "\n";
        }
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("cannot write " + path);
    out.write("PEMB", 4);
    const std::uint32_t count = static_cast<std::uint32_t>(ds.samples.size());
    const std::uint32_t dim = static_cast<std::uint32_t>(ds.dim);
    out.write(reinterpret_cast<const char*>(&count), 4);
    out.write(reinterpret_cast<const char*>(&dim), 4);
    std::vector<float> row(dim);
    for (const auto& s : ds.samples) {
        for (std::uint32_t i = 0; i < dim; ++i) row[i] = static_cast<float>(s.vector[static_cast<Index>(i)]);
        out.write(reinterpret_cast<const char*>(row.data()), std::streamsize(dim) * 4);
    }
    std::ofstream side(path + ".labels");
    for (const auto& s : ds.samples) {
        json j;
        j["id"] = s.id;
        j["label"] = s.label;
        side << j.dump() << "\n";
    }
}

EmbeddingDataset label_encode(const EmbeddingDataset& ds) {
    EmbeddingDataset out = ds;
    std::map<std::string, int> codes;
    for (std::size_t c = 0; c < ds.classes.size(); ++c)
        codes[ds.classes[c]] = static_cast<int>(c);
    for (auto& s : out.samples) s.encoded_label = codes.at(s.label);
    out.encoded = true;
    return out;
}

std::map<std::string, int> label_map(const EmbeddingDataset& ds) {
    std::map<std::string, int> codes;
    for (std::size_t c = 0; c < ds.classes.size(); ++c)
        codes[ds.classes[c]] = static_cast<int>(c);
    return codes;
}

std::string format_magicoder_prompt(const std::string& query, const std::string& solution) {
    if (query.empty()) fail("format_magicoder_prompt: empty query");
    if (solution.empty()) fail("format_magicoder_prompt: empty solution");
    return "This is the query being assigned:  " + query +
           "  The following is the code solution to the query  " + solution;
}

Index BatchPlan::num_batches() const {
    if (order.empty()) return 0;
    return (static_cast<Index>(order.size()) + batch_size - 1) / batch_size;
}

std::vector<Index> BatchPlan::batch(Index b) const {
    const Index n = static_cast<Index>(order.size());
    const Index begin = b * batch_size;
    const Index end = std::min(begin + batch_size, n);
    if (begin < 0 || begin >= n) fail("batch index out of range");
    return {order.begin() + begin, order.begin() + end};
}

BatchPlan make_batches(const EmbeddingDataset& ds, Index batch_size, std::uint64_t seed,
                       std::uint64_t epoch) {
    const Index n = ds.size();
    if (batch_size < 1 || batch_size > n)
        fail("batch_size " + std::to_string(batch_size) + " out of range for N=" + std::to_string(n));
    BatchPlan plan;
    plan.seed = seed;
    plan.batch_size = batch_size;
    plan.order.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) plan.order[static_cast<std::size_t>(i)] = i;
    Rng rng(Rng::mix(seed, epoch));
    rng.shuffle(plan.order);
    return plan;
}

} // namespace protoicl
