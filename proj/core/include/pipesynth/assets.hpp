#pragma once

#include <optional>
#include <string_view>
#include <vector>

/// Versioned JSON and template assets compiled into the library.
namespace pipesynth::assets {

/// Paths are relative to the asset root, e.g. "taxonomy.json" or
/// "templates/v1/manifest.json".
std::optional<std::string_view> find(std::string_view path);
std::vector<std::string_view> list();

}  // namespace pipesynth::assets
