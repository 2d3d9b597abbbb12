#include "pipesynth/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "pipesynth/error.hpp"

namespace pipesynth {

bool AbstractPipeline::has_fe(std::string_view name) const {
    return std::find(fe_sequence.begin(), fe_sequence.end(), name) != fe_sequence.end();
}

std::map<std::string, std::size_t> MetaCorpus::fe_counts() const {
    std::map<std::string, std::size_t> counts;
    for (const auto& r : records)
        for (const auto& fe : r.fe_sequence) ++counts[fe];
    return counts;
}

std::map<std::string, std::size_t> MetaCorpus::model_counts(std::optional<TaskKind> task) const {
    std::map<std::string, std::size_t> counts;
    for (const auto& r : records)
        if (!task || r.task == *task) ++counts[r.model];
    return counts;
}

std::set<std::string> MetaCorpus::excluded_fe() const {
    std::set<std::string> out;
    auto counts = fe_counts();
    for (const auto& f : taxonomy->fe_components())
        if (counts[f.name] < kMinComponentOccurrences) out.insert(f.name);
    return out;
}

std::set<std::string> MetaCorpus::excluded_models() const {
    std::set<std::string> out;
    auto counts = model_counts();
    for (const auto& m : taxonomy->models())
        if (counts[m.name] < kMinComponentOccurrences) out.insert(m.name);
    return out;
}

void validate_record(AbstractPipeline& record, const Taxonomy& taxonomy) {
    std::set<std::string> seen;
    for (auto& fe : record.fe_sequence) {
        auto label = taxonomy.canonicalize(fe);
        if (label.kind != ComponentKind::FE)
            throw Error(ErrorCode::UnknownLabel, "'" + fe + "' is not a feature-engineering component");
        fe = label.name;
        if (!seen.insert(fe).second) throw Error(ErrorCode::SchemaError, "duplicate FE component '" + fe + "'");
    }
    auto model = taxonomy.canonicalize(record.model);
    if (model.kind != ComponentKind::Model)
        throw Error(ErrorCode::UnknownLabel, "'" + record.model + "' is not a model component");
    record.model = model.name;
    if (!taxonomy.model(model.name)->applicable(record.task))
        throw Error(ErrorCode::ApplicabilityMismatch,
                    "model '" + model.name + "' does not apply to " + std::string(to_string(record.task)));
}

AbstractPipeline record_from_json(const nlohmann::json& j, const Taxonomy& taxonomy) {
    if (!j.is_object()) throw Error(ErrorCode::SchemaError, "record is not an object");
    AbstractPipeline r;
    try {
        r.dataset_id = j.at("dataset_id").get<std::string>();
        auto task = parse_task(j.at("task").get<std::string>());
        if (!task) throw Error(ErrorCode::SchemaError, "task must be \"C\" or \"R\"");
        r.task = *task;
        r.meta_features = MetaFeatureVector::from_json(j.at("meta_features"));
        r.fe_sequence = j.at("fe_sequence").get<std::vector<std::string>>();
        r.model = j.at("model").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SchemaError, e.what());
    }
    validate_record(r, taxonomy);
    return r;
}

nlohmann::ordered_json record_to_json(const AbstractPipeline& record) {
    nlohmann::ordered_json j;
    j["dataset_id"] = record.dataset_id;
    j["task"] = task_code(record.task);
    j["meta_features"] = record.meta_features.to_json();
    j["fe_sequence"] = record.fe_sequence;
    j["model"] = record.model;
    return j;
}

MetaCorpus parse_corpus(std::istream& in, const Taxonomy& taxonomy) {
    MetaCorpus corpus;
    corpus.taxonomy = &taxonomy;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        try {
            corpus.records.push_back(record_from_json(nlohmann::json::parse(line), taxonomy));
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(ErrorCode::SchemaError, "line " + std::to_string(line_no) + ": " + e.what());
        } catch (const Error& e) {
            throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (corpus.records.empty()) spdlog::warn("corpus is empty");
    for (const auto& fe : corpus.excluded_fe())
        spdlog::debug("FE component {} below {} occurrences; excluded from meta-targets", fe, kMinComponentOccurrences);
    return corpus;
}

MetaCorpus parse_corpus(const std::filesystem::path& path, const Taxonomy& taxonomy) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open corpus " + path.string());
    return parse_corpus(in, taxonomy);
}

void write_corpus(std::ostream& out, const MetaCorpus& corpus) {
    for (const auto& r : corpus.records) out << record_to_json(r).dump() << '\n';
}

void write_corpus(const std::filesystem::path& path, const MetaCorpus& corpus) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write corpus " + path.string());
    write_corpus(out, corpus);
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

std::string corpus_hash(const MetaCorpus& corpus) {
    std::ostringstream out;
    write_corpus(out, corpus);
    return hex64(fnv1a(out.str()));
}

}  // namespace pipesynth
