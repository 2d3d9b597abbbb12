#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "pipesynth/tabular.hpp"
#include "pipesynth/taxonomy.hpp"

namespace pipesynth {

enum class TemplateVariant { Default, NumericColumns, StringColumns };
std::string_view to_string(TemplateVariant v);

/// A code snippet with `{UPPER_CASE}` holes.
struct SnippetTemplate {
    std::string name;
    TemplateVariant variant = TemplateVariant::Default;
    Stage stage = Stage::PreDetach;
    std::vector<std::string> holes;
    std::string body;
};

struct ModelBinding {
    std::string import_line;
    std::string class_name;
};

/// Holes appearing in a snippet body, in order of first appearance.
std::vector<std::string> scan_holes(std::string_view body);

/// Fills every hole in one pass. Throws MissingTemplate when a value is absent.
std::string render(const SnippetTemplate& t, const std::map<std::string, std::string>& values);

/// Versioned snippet library described by a JSON manifest.
class TemplatePack {
  public:
    using FileReader = std::function<std::optional<std::string>(const std::string& file)>;

    /// Validates that declared holes match the bodies exactly.
    static TemplatePack from_manifest(const nlohmann::json& manifest, const FileReader& read);
    static TemplatePack from_directory(const std::filesystem::path& dir);
    /// Pack v1 compiled into the library.
    static const TemplatePack& builtin();

    const std::string& version() const { return version_; }
    const std::string& language() const { return language_; }

    /// "load", "detach", "model" or "evaluation". Throws MissingTemplate.
    const SnippetTemplate& section(std::string_view name) const;
    const SnippetTemplate* component(std::string_view fe, TemplateVariant variant) const;
    std::vector<TemplateVariant> variants(std::string_view fe) const;
    std::optional<ModelBinding> model(std::string_view model, TaskKind task) const;
    /// Throws MissingTemplate for unknown metric names.
    const std::string& metric(std::string_view name) const;

  private:
    std::string version_;
    std::string language_;
    std::map<std::string, SnippetTemplate, std::less<>> sections_;
    std::vector<SnippetTemplate> components_;
    std::map<std::string, std::map<TaskKind, ModelBinding>, std::less<>> models_;
    std::map<std::string, std::string, std::less<>> metrics_;
};

/// Python source literals.
std::string python_string(std::string_view s);
std::string python_list(const std::vector<std::string>& items);
std::string python_literal(const nlohmann::ordered_json& value);
/// `key=value, ...` from a JSON object, keys in object order.
std::string python_kwargs(const nlohmann::ordered_json& object);

}  // namespace pipesynth
