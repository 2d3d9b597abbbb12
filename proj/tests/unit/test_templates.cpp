#include <doctest.h>

#include "pipesynth/error.hpp"
#include "pipesynth/templates.hpp"
#include "test_support.hpp"

using namespace pipesynth;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error thrown");
    return ErrorCode::InvalidArgument;
}

nlohmann::json tiny_manifest(const std::vector<std::string>& imputer_holes) {
    return {{"version", "t"},
            {"language", "python"},
            {"sections",
             {{"load", {{"file", "load"}, {"holes", nlohmann::json::array()}}},
              {"detach", {{"file", "detach"}, {"holes", {"TARGET"}}}},
              {"model", {{"file", "model"}, {"holes", nlohmann::json::array()}}},
              {"evaluation", {{"file", "eval"}, {"holes", nlohmann::json::array()}}}}},
            {"components",
             {{{"label", "FE:Imputer"}, {"variant", "Default"}, {"stage", "PreDetach"}, {"file", "imp"},
               {"holes", imputer_holes}}}},
            {"models", {{"RandomForest", {{"C", {{"import", "import x"}, {"class", "X"}}}}}}},
            {"metrics", {{"macro_f1", "f1()"}}}};
}

std::optional<std::string> tiny_reader(const std::string& file) {
    if (file == "detach") return std::string("t = {TARGET}\n");
    if (file == "imp") return std::string("cols = {COLUMNS}");
    if (file == "load" || file == "model" || file == "eval") return std::string("pass\n");
    return std::nullopt;
}

}  // namespace

TEST_CASE("holes are scanned in order of first appearance") {
    CHECK(scan_holes("a {B} {C_1} {B} {lower} {} {9X} {X") == std::vector<std::string>{"B", "C_1"});
    CHECK(scan_holes("d = {'k': 1}").empty());
}

TEST_CASE("render fills every hole and rejects missing values") {
    SnippetTemplate t{"t", TemplateVariant::Default, Stage::PreDetach, {"A", "B"}, "x = {A} + {B} + {A}\n{'a': 1}\n"};
    CHECK(render(t, {{"A", "1"}, {"B", "{A}"}}) == "x = 1 + {A} + 1\n{'a': 1}\n");
    CHECK(code_of([&] { render(t, {{"A", "1"}}); }) == ErrorCode::MissingTemplate);
}

TEST_CASE("python literals") {
    CHECK(python_string("it's\n\\") == "'it\\'s\\n\\\\'");
    CHECK(python_string(std::string("\x01", 1)) == "'\\x01'");
    CHECK(python_list({"a", "b c"}) == "['a', 'b c']");
    CHECK(python_list({}) == "[]");
    nlohmann::ordered_json hp = {{"n_estimators", 300}, {"bootstrap", false}, {"alpha", 0.5},
                                 {"criterion", "gini"}, {"max_depth", nullptr}, {"layers", {64, 32}}};
    CHECK(python_kwargs(hp) ==
          "n_estimators=300, bootstrap=False, alpha=0.5, criterion='gini', max_depth=None, layers=[64, 32]");
    CHECK(python_literal(nlohmann::json{{"k", true}}) == "{'k': True}");
    CHECK(python_kwargs(nlohmann::json::object()).empty());
    CHECK(code_of([] { python_kwargs(nlohmann::json::array()); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("builtin pack covers the taxonomy") {
    const auto& pack = TemplatePack::builtin();
    CHECK(pack.version() == "1");
    CHECK(pack.language() == "python");
    for (const auto& fe : Taxonomy::builtin().fe_components()) {
        auto v = pack.variants(fe.name);
        CHECK_MESSAGE(!v.empty(), fe.name);
        for (auto variant : v) CHECK(pack.component(fe.name, variant)->stage == fe.stage);
    }
    for (const auto& m : Taxonomy::builtin().models()) {
        for (auto task : {TaskKind::Classification, TaskKind::Regression})
            if (m.applicable(task)) CHECK_MESSAGE(pack.model(m.name, task).has_value(), m.name);
    }
    CHECK(pack.variants("Imputer") ==
          std::vector<TemplateVariant>{TemplateVariant::NumericColumns, TemplateVariant::StringColumns});
    CHECK(pack.metric("macro_f1").find("f1_score") != std::string::npos);
    CHECK(pack.metric("r2").find("r2_score") != std::string::npos);
    CHECK(code_of([&] { pack.metric("nope"); }) == ErrorCode::MissingTemplate);
    CHECK_FALSE(pack.model("NoSuchModel", TaskKind::Classification).has_value());
}

TEST_CASE("manifests must declare exactly the holes their bodies use") {
    auto ok = TemplatePack::from_manifest(tiny_manifest({"COLUMNS"}), tiny_reader);
    CHECK(ok.component("Imputer", TemplateVariant::Default)->body == "cols = {COLUMNS}\n");
    CHECK(code_of([] { TemplatePack::from_manifest(tiny_manifest({}), tiny_reader); }) == ErrorCode::SchemaError);
    CHECK(code_of([] { TemplatePack::from_manifest(tiny_manifest({"COLUMNS", "EXTRA"}), tiny_reader); }) ==
          ErrorCode::SchemaError);
    auto missing_file = tiny_manifest({"COLUMNS"});
    missing_file["components"][0]["file"] = "absent";
    CHECK(code_of([&] { TemplatePack::from_manifest(missing_file, tiny_reader); }) == ErrorCode::MissingTemplate);
    auto no_section = tiny_manifest({"COLUMNS"});
    no_section["sections"].erase("detach");
    CHECK(code_of([&] { TemplatePack::from_manifest(no_section, tiny_reader); }) == ErrorCode::MissingTemplate);
}

TEST_CASE("packs load from a directory") {
    testing::TempDir dir;
    testing::write_file(dir / "manifest.json", tiny_manifest({"COLUMNS"}).dump());
    for (const char* f : {"load", "detach", "imp", "model", "eval"}) testing::write_file(dir / f, *tiny_reader(f));
    auto pack = TemplatePack::from_directory(dir.path());
    CHECK(pack.version() == "t");
    CHECK(pack.model("RandomForest", TaskKind::Classification)->class_name == "X");
    CHECK(code_of([] { TemplatePack::from_directory("/nonexistent-dir"); }) == ErrorCode::MissingTemplate);
}
