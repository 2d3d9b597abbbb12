#include "pipesynth/taxonomy.hpp"

#include <algorithm>

#include "pipesynth/assets.hpp"
#include "pipesynth/error.hpp"

namespace pipesynth {

namespace {

std::optional<ColumnKind> parse_kind(std::string_view s) {
    for (auto k : {ColumnKind::Numeric, ColumnKind::NumberCategory, ColumnKind::StringCategory, ColumnKind::Text,
                   ColumnKind::Date})
        if (to_string(k) == s) return k;
    return std::nullopt;
}

Stage parse_stage(const std::string& s) {
    if (s == "PreDetach") return Stage::PreDetach;
    if (s == "PostDetach") return Stage::PostDetach;
    if (s == "Model") return Stage::Model;
    throw Error(ErrorCode::SchemaError, "unknown stage '" + s + "'");
}

ComponentLabel parse_qualified(std::string_view s) {
    if (s.starts_with("FE:")) return fe_label(std::string(s.substr(3)));
    if (s.starts_with("MODEL:")) return model_label(std::string(s.substr(6)));
    throw Error(ErrorCode::SchemaError, "alias target '" + std::string(s) + "' lacks FE:/MODEL: prefix");
}

}  // namespace

std::string ComponentLabel::qualified() const { return (kind == ComponentKind::FE ? "FE:" : "MODEL:") + name; }

ComponentLabel fe_label(std::string name) { return {ComponentKind::FE, std::move(name)}; }
ComponentLabel model_label(std::string name) { return {ComponentKind::Model, std::move(name)}; }

std::string_view to_string(Stage stage) {
    switch (stage) {
        case Stage::PreDetach: return "PreDetach";
        case Stage::PostDetach: return "PostDetach";
        case Stage::Model: return "Model";
    }
    return "Unknown";
}

bool ColumnFallback::accepts(const Column& col) const {
    switch (mode) {
        case Mode::WithMissing: return col.missing_count() > 0;
        case Mode::Kinds: return std::find(kinds.begin(), kinds.end(), col.kind) != kinds.end();
        case Mode::AllFeatures: return true;
    }
    return false;
}

Taxonomy Taxonomy::from_json(const nlohmann::json& j) {
    Taxonomy t;
    try {
        t.version_ = j.at("version").get<std::string>();
        for (const auto& e : j.at("fe")) {
            FeComponentInfo info;
            info.name = e.at("name").get<std::string>();
            info.stage = parse_stage(e.at("stage").get<std::string>());
            info.priority = e.at("priority").get<int>();
            const auto& fb = e.at("fallback");
            if (fb.is_string() && fb == "missing") {
                info.fallback.mode = ColumnFallback::Mode::WithMissing;
            } else if (fb.is_string() && fb == "all") {
                info.fallback.mode = ColumnFallback::Mode::AllFeatures;
            } else if (fb.is_array()) {
                info.fallback.mode = ColumnFallback::Mode::Kinds;
                for (const auto& k : fb) {
                    auto kind = parse_kind(k.get<std::string>());
                    if (!kind) throw Error(ErrorCode::SchemaError, "unknown column kind " + k.dump());
                    info.fallback.kinds.push_back(*kind);
                }
            } else {
                throw Error(ErrorCode::SchemaError, "bad fallback for " + info.name);
            }
            t.fe_.push_back(std::move(info));
        }
        for (const auto& e : j.at("models"))
            t.models_.push_back({e.at("name").get<std::string>(), e.at("C").get<bool>(), e.at("R").get<bool>()});
        for (const auto& f : t.fe_) t.aliases_[f.name] = fe_label(f.name);
        for (const auto& m : t.models_) t.aliases_[m.name] = model_label(m.name);
        for (auto it = j.at("aliases").begin(); it != j.at("aliases").end(); ++it) {
            ComponentLabel target = parse_qualified(it.value().get<std::string>());
            if (!t.contains(target))
                throw Error(ErrorCode::SchemaError, "alias '" + it.key() + "' maps to unknown " + target.qualified());
            t.aliases_[it.key()] = target;
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SchemaError, std::string("taxonomy: ") + e.what());
    }
    return t;
}

const Taxonomy& Taxonomy::builtin() {
    static const Taxonomy t = from_json(nlohmann::json::parse(*assets::find("taxonomy.json")));
    return t;
}

const FeComponentInfo* Taxonomy::fe(std::string_view name) const {
    auto it = std::find_if(fe_.begin(), fe_.end(), [&](const auto& f) { return f.name == name; });
    return it == fe_.end() ? nullptr : &*it;
}

const ModelInfo* Taxonomy::model(std::string_view name) const {
    auto it = std::find_if(models_.begin(), models_.end(), [&](const auto& m) { return m.name == name; });
    return it == models_.end() ? nullptr : &*it;
}

bool Taxonomy::contains(const ComponentLabel& label) const {
    return label.kind == ComponentKind::FE ? fe(label.name) != nullptr : model(label.name) != nullptr;
}

ComponentLabel Taxonomy::canonicalize(std::string_view api_name) const {
    std::string_view key = api_name;
    std::optional<ComponentKind> expected;
    if (key.starts_with("FE:")) {
        key.remove_prefix(3);
        expected = ComponentKind::FE;
    } else if (key.starts_with("MODEL:")) {
        key.remove_prefix(6);
        expected = ComponentKind::Model;
    }
    auto it = aliases_.find(key);
    if (it == aliases_.end() || (expected && it->second.kind != *expected))
        throw Error(ErrorCode::UnknownLabel, "'" + std::string(api_name) + "'");
    return it->second;
}

nlohmann::ordered_json Taxonomy::to_json() const {
    nlohmann::ordered_json j;
    j["version"] = version_;
    j["fe"] = nlohmann::ordered_json::array();
    for (const auto& f : fe_) {
        nlohmann::ordered_json e;
        e["name"] = f.name;
        e["stage"] = to_string(f.stage);
        e["priority"] = f.priority;
        switch (f.fallback.mode) {
            case ColumnFallback::Mode::WithMissing: e["fallback"] = "missing"; break;
            case ColumnFallback::Mode::AllFeatures: e["fallback"] = "all"; break;
            case ColumnFallback::Mode::Kinds: {
                e["fallback"] = nlohmann::ordered_json::array();
                for (auto k : f.fallback.kinds) e["fallback"].push_back(to_string(k));
                break;
            }
        }
        j["fe"].push_back(e);
    }
    j["models"] = nlohmann::ordered_json::array();
    for (const auto& m : models_) j["models"].push_back({{"name", m.name}, {"C", m.classification}, {"R", m.regression}});
    j["aliases"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : aliases_)
        if (k != v.name) j["aliases"][k] = v.qualified();
    return j;
}

HyperparamCatalog HyperparamCatalog::from_json(const nlohmann::json& j) {
    HyperparamCatalog c;
    try {
        c.version_ = j.at("version").get<std::string>();
        for (auto it = j.at("models").begin(); it != j.at("models").end(); ++it) {
            std::vector<nlohmann::ordered_json> sets;
            for (const auto& s : it.value()) {
                if (!s.is_object()) throw Error(ErrorCode::SchemaError, "hyperparameter set for " + it.key());
                sets.push_back(nlohmann::ordered_json::parse(s.dump()));
            }
            c.set(it.key(), std::move(sets));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SchemaError, std::string("hyperparameter catalog: ") + e.what());
    }
    return c;
}

const HyperparamCatalog& HyperparamCatalog::builtin() {
    static const HyperparamCatalog c =
        from_json(nlohmann::ordered_json::parse(*assets::find("hyperparams.json")));
    return c;
}

std::vector<nlohmann::ordered_json> HyperparamCatalog::sets(std::string_view model) const {
    auto it = sets_.find(model);
    if (it == sets_.end() || it->second.empty()) return {nlohmann::ordered_json::object()};
    return it->second;
}

void HyperparamCatalog::set(const std::string& model, std::vector<nlohmann::ordered_json> sets) {
    sets_[model] = std::move(sets);
}

}  // namespace pipesynth
