#pragma once

#include <compare>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "pipesynth/tabular.hpp"

namespace pipesynth {

enum class ComponentKind { FE, Model };

struct ComponentLabel {
    ComponentKind kind = ComponentKind::FE;
    std::string name;

    /// "FE:Imputer" / "MODEL:CatBoost".
    std::string qualified() const;
    auto operator<=>(const ComponentLabel&) const = default;
};

ComponentLabel fe_label(std::string name);
ComponentLabel model_label(std::string name);

enum class Stage { PreDetach, PostDetach, Model };
std::string_view to_string(Stage stage);

/// Columns an FE component falls back to when its decision path selects none.
struct ColumnFallback {
    enum class Mode { WithMissing, Kinds, AllFeatures };
    Mode mode = Mode::AllFeatures;
    std::vector<ColumnKind> kinds;

    bool accepts(const Column& col) const;
};

struct FeComponentInfo {
    std::string name;
    Stage stage = Stage::PreDetach;
    int priority = 0;
    ColumnFallback fallback;
};

struct ModelInfo {
    std::string name;
    bool classification = false;
    bool regression = false;

    bool applicable(TaskKind task) const { return task == TaskKind::Classification ? classification : regression; }
};

/// Canonical component vocabulary: FE labels with emission stage and priority,
/// model labels with task applicability, and the raw-API alias map.
class Taxonomy {
  public:
    static Taxonomy from_json(const nlohmann::json& j);
    /// The in-repo asset compiled into the library.
    static const Taxonomy& builtin();

    const std::string& version() const { return version_; }
    const std::vector<FeComponentInfo>& fe_components() const { return fe_; }
    const std::vector<ModelInfo>& models() const { return models_; }
    const std::map<std::string, ComponentLabel, std::less<>>& aliases() const { return aliases_; }

    const FeComponentInfo* fe(std::string_view name) const;
    const ModelInfo* model(std::string_view name) const;
    bool contains(const ComponentLabel& label) const;

    /// Maps a raw API name, canonical name, or qualified label to its
    /// canonical label. Throws UnknownLabel.
    ComponentLabel canonicalize(std::string_view api_name) const;

    nlohmann::ordered_json to_json() const;

  private:
    std::string version_;
    std::vector<FeComponentInfo> fe_;
    std::vector<ModelInfo> models_;
    std::map<std::string, ComponentLabel, std::less<>> aliases_;
};

/// Ordered hyperparameter sets per model; a model without an entry gets one
/// empty set.
class HyperparamCatalog {
  public:
    static HyperparamCatalog from_json(const nlohmann::json& j);
    static const HyperparamCatalog& builtin();

    const std::string& version() const { return version_; }
    std::vector<nlohmann::ordered_json> sets(std::string_view model) const;
    void set(const std::string& model, std::vector<nlohmann::ordered_json> sets);

  private:
    std::string version_;
    std::map<std::string, std::vector<nlohmann::ordered_json>, std::less<>> sets_;
};

}  // namespace pipesynth
