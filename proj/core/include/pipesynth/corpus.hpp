#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "pipesynth/meta_features.hpp"
#include "pipesynth/taxonomy.hpp"

namespace pipesynth {

/// One training record: a dataset's meta-features and the ordered labels of
/// the pipeline written for it.
struct AbstractPipeline {
    std::string dataset_id;
    TaskKind task = TaskKind::Classification;
    MetaFeatureVector meta_features;
    std::vector<std::string> fe_sequence;
    std::string model;

    bool has_fe(std::string_view name) const;
    bool operator==(const AbstractPipeline&) const = default;
};

/// Components seen fewer times than this are not meta-targets.
inline constexpr std::size_t kMinComponentOccurrences = 5;

struct MetaCorpus {
    std::vector<AbstractPipeline> records;
    const Taxonomy* taxonomy = &Taxonomy::builtin();

    /// Occurrence counts per FE / model label.
    std::map<std::string, std::size_t> fe_counts() const;
    std::map<std::string, std::size_t> model_counts(std::optional<TaskKind> task = std::nullopt) const;
    /// Labels appearing fewer than kMinComponentOccurrences times.
    std::set<std::string> excluded_fe() const;
    std::set<std::string> excluded_models() const;
};

/// Checks labels against the taxonomy and canonicalizes aliases in place.
/// Throws UnknownLabel, ApplicabilityMismatch or SchemaError (duplicate FE).
void validate_record(AbstractPipeline& record, const Taxonomy& taxonomy);

AbstractPipeline record_from_json(const nlohmann::json& j, const Taxonomy& taxonomy);
nlohmann::ordered_json record_to_json(const AbstractPipeline& record);

/// JSON-Lines, one record per line. Errors carry the 1-based line number.
MetaCorpus parse_corpus(std::istream& in, const Taxonomy& taxonomy = Taxonomy::builtin());
MetaCorpus parse_corpus(const std::filesystem::path& path, const Taxonomy& taxonomy = Taxonomy::builtin());

void write_corpus(std::ostream& out, const MetaCorpus& corpus);
void write_corpus(const std::filesystem::path& path, const MetaCorpus& corpus);

/// FNV-1a over the serialized corpus, hex encoded.
std::string corpus_hash(const MetaCorpus& corpus);

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 14695981039346656037ull);
std::string hex64(std::uint64_t value);

}  // namespace pipesynth
