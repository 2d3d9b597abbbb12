#include "pipesynth/templates.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "pipesynth/assets.hpp"
#include "pipesynth/error.hpp"

namespace pipesynth {

namespace {

bool hole_char(char c, bool first) {
    return (c >= 'A' && c <= 'Z') || c == '_' || (!first && c >= '0' && c <= '9');
}

/// Length of a hole token starting at `pos` (including braces), or 0.
std::size_t hole_length(std::string_view body, std::size_t pos) {
    if (body[pos] != '{') return 0;
    std::size_t i = pos + 1;
    while (i < body.size() && hole_char(body[i], i == pos + 1)) ++i;
    if (i == pos + 1 || i >= body.size() || body[i] != '}') return 0;
    return i - pos + 1;
}

TemplateVariant parse_variant(const std::string& s) {
    if (s == "Default") return TemplateVariant::Default;
    if (s == "NumericColumns") return TemplateVariant::NumericColumns;
    if (s == "StringColumns") return TemplateVariant::StringColumns;
    throw Error(ErrorCode::SchemaError, "unknown template variant '" + s + "'");
}

Stage parse_stage(const std::string& s) {
    if (s == "PreDetach") return Stage::PreDetach;
    if (s == "PostDetach") return Stage::PostDetach;
    if (s == "Model") return Stage::Model;
    throw Error(ErrorCode::SchemaError, "unknown template stage '" + s + "'");
}

SnippetTemplate load_snippet(const nlohmann::json& e, std::string name, const TemplatePack::FileReader& read) {
    SnippetTemplate t;
    t.name = std::move(name);
    const auto file = e.at("file").get<std::string>();
    auto body = read(file);
    if (!body) throw Error(ErrorCode::MissingTemplate, "template file '" + file + "' not found");
    t.body = std::move(*body);
    if (!t.body.empty() && t.body.back() != '\n') t.body.push_back('\n');
    t.holes = e.at("holes").get<std::vector<std::string>>();
    auto found = scan_holes(t.body);
    auto declared = t.holes;
    std::sort(found.begin(), found.end());
    std::sort(declared.begin(), declared.end());
    if (found != declared)
        throw Error(ErrorCode::SchemaError, "template '" + file + "' holes do not match its manifest entry");
    return t;
}

}  // namespace

std::string_view to_string(TemplateVariant v) {
    switch (v) {
        case TemplateVariant::Default: return "Default";
        case TemplateVariant::NumericColumns: return "NumericColumns";
        case TemplateVariant::StringColumns: return "StringColumns";
    }
    return "Default";
}

std::vector<std::string> scan_holes(std::string_view body) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < body.size(); ++i) {
        if (auto n = hole_length(body, i)) {
            std::string h(body.substr(i + 1, n - 2));
            if (std::find(out.begin(), out.end(), h) == out.end()) out.push_back(std::move(h));
            i += n - 1;
        }
    }
    return out;
}

std::string render(const SnippetTemplate& t, const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(t.body.size());
    for (std::size_t i = 0; i < t.body.size(); ++i) {
        if (auto n = hole_length(t.body, i)) {
            const std::string h = t.body.substr(i + 1, n - 2);
            auto it = values.find(h);
            if (it == values.end())
                throw Error(ErrorCode::MissingTemplate, "no value for hole {" + h + "} in " + t.name);
            out += it->second;
            i += n - 1;
        } else {
            out.push_back(t.body[i]);
        }
    }
    return out;
}

TemplatePack TemplatePack::from_manifest(const nlohmann::json& m, const FileReader& read) {
    TemplatePack p;
    try {
        p.version_ = m.at("version").get<std::string>();
        p.language_ = m.at("language").get<std::string>();
        for (auto it = m.at("sections").begin(); it != m.at("sections").end(); ++it) {
            auto t = load_snippet(it.value(), it.key(), read);
            if (it.key() == "model" || it.key() == "evaluation") t.stage = Stage::Model;
            p.sections_.emplace(it.key(), std::move(t));
        }
        for (const auto& e : m.at("components")) {
            auto label = e.at("label").get<std::string>();
            if (!label.starts_with("FE:")) throw Error(ErrorCode::SchemaError, "component label '" + label + "'");
            auto t = load_snippet(e, label.substr(3), read);
            t.variant = parse_variant(e.at("variant").get<std::string>());
            t.stage = parse_stage(e.at("stage").get<std::string>());
            p.components_.push_back(std::move(t));
        }
        for (auto it = m.at("models").begin(); it != m.at("models").end(); ++it) {
            for (auto jt = it.value().begin(); jt != it.value().end(); ++jt) {
                auto task = parse_task(jt.key());
                if (!task) throw Error(ErrorCode::SchemaError, "model task key '" + jt.key() + "'");
                p.models_[it.key()][*task] = {jt.value().at("import").get<std::string>(),
                                              jt.value().at("class").get<std::string>()};
            }
        }
        for (auto it = m.at("metrics").begin(); it != m.at("metrics").end(); ++it)
            p.metrics_.emplace(it.key(), it.value().get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SchemaError, std::string("template manifest: ") + e.what());
    }
    for (const char* s : {"load", "detach", "model", "evaluation"}) p.section(s);
    return p;
}

TemplatePack TemplatePack::from_directory(const std::filesystem::path& dir) {
    auto read = [&](const std::string& file) -> std::optional<std::string> {
        std::ifstream in(dir / file, std::ios::binary);
        if (!in) return std::nullopt;
        std::ostringstream s;
        s << in.rdbuf();
        return s.str();
    };
    auto manifest = read("manifest.json");
    if (!manifest) throw Error(ErrorCode::MissingTemplate, "no manifest.json in " + dir.string());
    return from_manifest(nlohmann::json::parse(*manifest), read);
}

const TemplatePack& TemplatePack::builtin() {
    static const TemplatePack pack = [] {
        const std::string root = "templates/v1/";
        auto read = [&](const std::string& file) -> std::optional<std::string> {
            auto content = assets::find(root + file);
            if (!content) return std::nullopt;
            return std::string(*content);
        };
        return from_manifest(nlohmann::json::parse(*read("manifest.json")), read);
    }();
    return pack;
}

const SnippetTemplate& TemplatePack::section(std::string_view name) const {
    auto it = sections_.find(name);
    if (it == sections_.end()) throw Error(ErrorCode::MissingTemplate, "section '" + std::string(name) + "'");
    return it->second;
}

const SnippetTemplate* TemplatePack::component(std::string_view fe, TemplateVariant variant) const {
    for (const auto& t : components_)
        if (t.name == fe && t.variant == variant) return &t;
    return nullptr;
}

std::vector<TemplateVariant> TemplatePack::variants(std::string_view fe) const {
    std::vector<TemplateVariant> out;
    for (const auto& t : components_)
        if (t.name == fe) out.push_back(t.variant);
    return out;
}

std::optional<ModelBinding> TemplatePack::model(std::string_view model, TaskKind task) const {
    auto it = models_.find(model);
    if (it == models_.end()) return std::nullopt;
    auto jt = it->second.find(task);
    if (jt == it->second.end()) return std::nullopt;
    return jt->second;
}

const std::string& TemplatePack::metric(std::string_view name) const {
    auto it = metrics_.find(name);
    if (it == metrics_.end()) throw Error(ErrorCode::MissingTemplate, "metric '" + std::string(name) + "'");
    return it->second;
}

std::string python_string(std::string_view s) {
    std::string out = "'";
    for (unsigned char c : s) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '\'': out += "\\'"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (c < 0x20 || c == 0x7f) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\x%02x", c);
                    out += buf;
                } else {
                    out.push_back(static_cast<char>(c));
                }
        }
    }
    out += "'";
    return out;
}

std::string python_list(const std::vector<std::string>& items) {
    std::string out = "[";
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += python_string(items[i]);
    }
    return out + "]";
}

std::string python_literal(const nlohmann::ordered_json& v) {
    switch (v.type()) {
        case nlohmann::ordered_json::value_t::null: return "None";
        case nlohmann::ordered_json::value_t::boolean: return v.get<bool>() ? "True" : "False";
        case nlohmann::ordered_json::value_t::number_integer:
        case nlohmann::ordered_json::value_t::number_unsigned: return v.dump();
        case nlohmann::ordered_json::value_t::number_float: return format_number(v.get<double>());
        case nlohmann::ordered_json::value_t::string: return python_string(v.get<std::string>());
        case nlohmann::ordered_json::value_t::array: {
            std::string out = "[";
            bool first = true;
            for (const auto& e : v) {
                if (!first) out += ", ";
                out += python_literal(e);
                first = false;
            }
            return out + "]";
        }
        case nlohmann::ordered_json::value_t::object: {
            std::string out = "{";
            bool first = true;
            for (auto it = v.begin(); it != v.end(); ++it) {
                if (!first) out += ", ";
                out += python_string(it.key()) + ": " + python_literal(it.value());
                first = false;
            }
            return out + "}";
        }
        default: throw Error(ErrorCode::InvalidArgument, "value has no Python literal form");
    }
}

std::string python_kwargs(const nlohmann::ordered_json& object) {
    if (!object.is_object()) throw Error(ErrorCode::InvalidArgument, "hyperparameters must be an object");
    std::string out;
    for (auto it = object.begin(); it != object.end(); ++it) {
        if (!out.empty()) out += ", ";
        out += it.key() + "=" + python_literal(it.value());
    }
    return out;
}

}  // namespace pipesynth
