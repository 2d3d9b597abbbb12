#include "pipesynth/instantiation.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include <spdlog/spdlog.h>

#include "pipesynth/error.hpp"

namespace pipesynth {

namespace {

struct NodeKey {
    int stage;
    int priority;
    std::string name;

    auto operator<=>(const NodeKey&) const = default;
};

NodeKey node_key(const std::string& node, const Taxonomy& taxonomy) {
    if (node == kModelNode) return {static_cast<int>(Stage::Model), 0, node};
    const auto* info = taxonomy.fe(node);
    if (!info) throw Error(ErrorCode::UnknownComponent, "'" + node + "' is not in the taxonomy");
    return {static_cast<int>(info->stage), info->priority, node};
}

std::string section_comment(std::size_t n, const std::string& label, TemplateVariant v) {
    std::string s = "# FE TRANSFORM " + std::to_string(n) + ": " + label;
    if (v == TemplateVariant::NumericColumns) s += " (numeric columns)";
    if (v == TemplateVariant::StringColumns) s += " (string columns)";
    return s;
}

}  // namespace

nlohmann::ordered_json OrderedSkeleton::to_json() const {
    nlohmann::ordered_json j;
    j["model_rank"] = model_rank;
    j["model"] = "MODEL:" + model;
    j["hyperparam_index"] = hyperparam_index;
    j["hyperparams"] = hyperparams;
    j["fe"] = nlohmann::ordered_json::array();
    for (const auto& f : fe_ordered) j["fe"].push_back({{"label", "FE:" + f.label}, {"prob", f.prob}, {"columns", f.columns}});
    return j;
}

OrderDag construct_dag(const std::vector<std::string>& components, const OrderDag& g) {
    const std::string model(kModelNode);
    OrderDag out;
    out.add_node(model);
    for (const auto& c : components) {
        if (!g.has_node(c)) throw Error(ErrorCode::UnknownComponent, "'" + c + "' is not in the order DAG");
        if (c == model) throw Error(ErrorCode::UnknownComponent, "MODEL cannot be a transform");
        out.add_node(c);
    }
    for (const auto& a : out.nodes())
        for (const auto& b : out.nodes())
            if (a != b && a != model && (b == model || g.reachable(a, b))) out.add_edge(a, b, g.support(a, b));
    if (!out.is_acyclic()) throw Error(ErrorCode::CycleDetected, "order DAG restricted to the skeleton has a cycle");
    out.transitive_reduce();
    return out;
}

OrderDag discard_redundant(const OrderDag& g, const std::vector<SkeletonFe>& fe,
                           const std::map<std::string, std::size_t>& corpus_frequency) {
    auto levels = g.levels();
    // level -> sorted column set -> member FE entries
    std::map<std::size_t, std::map<std::vector<std::string>, std::vector<const SkeletonFe*>>> groups;
    for (const auto& f : fe) {
        if (!g.has_node(f.label)) continue;
        auto cols = f.columns;
        std::sort(cols.begin(), cols.end());
        groups[levels.at(f.label)][cols].push_back(&f);
    }
    auto frequency = [&](const std::string& label) {
        auto it = corpus_frequency.find(label);
        return it == corpus_frequency.end() ? std::size_t{0} : it->second;
    };
    OrderDag out = g;
    for (const auto& [level, by_columns] : groups) {
        for (const auto& [cols, members] : by_columns) {
            if (members.size() < 2) continue;
            auto best = *std::min_element(members.begin(), members.end(), [&](const SkeletonFe* a, const SkeletonFe* b) {
                if (a->prob != b->prob) return a->prob > b->prob;
                if (frequency(a->label) != frequency(b->label)) return frequency(a->label) > frequency(b->label);
                return a->label < b->label;
            });
            for (const auto* m : members) {
                if (m == best) continue;
                spdlog::info("discarding FE:{} (p={:.2f}); FE:{} targets the same columns", m->label, m->prob,
                             best->label);
                out.remove_node_bridged(m->label);
            }
        }
    }
    out.transitive_reduce();
    return out;
}

std::vector<std::string> total_order(const OrderDag& g, const Taxonomy& taxonomy) {
    std::map<std::string, std::size_t> indegree;
    for (const auto& n : g.nodes()) indegree[n] = 0;
    for (const auto& e : g.edges()) ++indegree[e.to];
    std::set<NodeKey> ready;
    for (const auto& [n, d] : indegree)
        if (d == 0) ready.insert(node_key(n, taxonomy));
    std::vector<std::string> order;
    while (!ready.empty()) {
        auto key = *ready.begin();
        ready.erase(ready.begin());
        order.push_back(key.name);
        for (const auto& s : g.successors(key.name))
            if (--indegree[s] == 0) ready.insert(node_key(s, taxonomy));
    }
    if (order.size() != g.nodes().size()) throw Error(ErrorCode::CycleDetected, "order DAG is not acyclic");
    for (std::size_t i = 1; i < order.size(); ++i)
        if (node_key(order[i], taxonomy).stage < node_key(order[i - 1], taxonomy).stage)
            throw Error(ErrorCode::StageConflict,
                        "'" + order[i - 1] + "' must precede '" + order[i] + "' but belongs to a later stage");
    return order;
}

OrderedSkeleton order_skeleton(const Skeleton& s, const OrderDag& g, const Taxonomy& taxonomy,
                               const std::map<std::string, std::size_t>& corpus_frequency) {
    std::vector<std::string> labels;
    for (const auto& f : s.fe) labels.push_back(f.label);
    auto dag = discard_redundant(construct_dag(labels, g), s.fe, corpus_frequency);
    OrderedSkeleton os;
    os.model = s.model;
    os.model_rank = s.model_rank;
    for (const auto& node : total_order(dag, taxonomy)) {
        if (node == kModelNode) continue;
        auto it = std::find_if(s.fe.begin(), s.fe.end(), [&](const SkeletonFe& f) { return f.label == node; });
        os.fe_ordered.push_back(*it);
    }
    return os;
}

nlohmann::ordered_json CandidatePipeline::manifest() const {
    nlohmann::ordered_json j;
    j["script_id"] = script_id;
    j["script"] = script_id + ".py";
    j["model_rank"] = model_rank;
    j["hyperparam_index"] = hyperparam_index;
    j["template_version"] = template_version;
    j["source_hash"] = hex64(fnv1a(source));
    j["sections"] = sections;
    j["skeleton"] = skeleton.to_json();
    return j;
}

std::string default_metric(TaskKind task) { return task == TaskKind::Classification ? "macro_f1" : "r2"; }

std::string make_script_id(std::size_t model_rank, const std::string& model, std::size_t hyperparam_index) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%02zu-%s-hp%zu", model_rank, model.c_str(), hyperparam_index);
    return buf;
}

CandidatePipeline instantiate_pipeline(const OrderedSkeleton& os, const Dataset& schema, const TemplatePack& pack,
                                       const EmitOptions& options) {
    CandidatePipeline c;
    c.skeleton = os;
    c.model_rank = os.model_rank;
    c.hyperparam_index = os.hyperparam_index;
    c.template_version = pack.version();
    c.script_id = make_script_id(os.model_rank, os.model, os.hyperparam_index);

    std::string& src = c.source;
    auto emit = [&](const std::string& comment, const SnippetTemplate& t, const std::map<std::string, std::string>& v) {
        if (!src.empty()) src += "\n";
        src += comment + "\n" + render(t, v);
        c.sections.push_back(comment);
    };

    const std::string delimiter(1, options.delimiter);
    emit("# LOAD DATA", pack.section("load"),
         {{"TRAIN_FILE", python_string(options.train_file)},
          {"TEST_FILE", python_string(options.test_file)},
          {"DELIMITER", python_string(delimiter)}});

    bool detached = false;
    auto detach = [&] {
        emit("# DETACH TARGET", pack.section("detach"), {{"TARGET", python_list(schema.target_names)}});
        detached = true;
    };

    std::size_t n = 0;
    for (const auto& fe : os.fe_ordered) {
        for (const auto& col : fe.columns) {
            const auto* column = schema.find(col);
            if (!column || schema.is_target(col))
                throw Error(ErrorCode::InvalidArgument, "FE:" + fe.label + " targets unknown feature '" + col + "'");
        }
        const auto variants = pack.variants(fe.label);
        if (variants.empty()) throw Error(ErrorCode::MissingTemplate, "no template for FE:" + fe.label);

        std::vector<std::pair<TemplateVariant, std::vector<std::string>>> parts;
        const bool typed = std::any_of(variants.begin(), variants.end(),
                                       [](TemplateVariant v) { return v != TemplateVariant::Default; });
        if (typed) {
            std::vector<std::string> numeric, text;
            for (const auto& col : fe.columns) (schema.find(col)->number_valued() ? numeric : text).push_back(col);
            if (!numeric.empty()) parts.emplace_back(TemplateVariant::NumericColumns, numeric);
            if (!text.empty()) parts.emplace_back(TemplateVariant::StringColumns, text);
        } else {
            parts.emplace_back(TemplateVariant::Default, fe.columns);
        }

        for (auto& [variant, cols] : parts) {
            const SnippetTemplate* t = pack.component(fe.label, variant);
            if (!t) t = pack.component(fe.label, TemplateVariant::Default);
            if (!t)
                throw Error(ErrorCode::MissingTemplate,
                            "no " + std::string(to_string(variant)) + " template for FE:" + fe.label);
            const bool has_columns = std::find(t->holes.begin(), t->holes.end(), "COLUMNS") != t->holes.end();
            if (has_columns && cols.empty())
                throw Error(ErrorCode::EmptyColumnHole, "FE:" + fe.label + " has no columns to fill");
            if (t->stage == Stage::PostDetach && !detached) detach();
            if (t->stage == Stage::PreDetach && detached)
                throw Error(ErrorCode::StageConflict, "FE:" + fe.label + " runs before detach but is ordered after it");
            emit(section_comment(++n, fe.label, t->variant), *t, {{"COLUMNS", python_list(cols)}});
        }
    }
    if (!detached) detach();

    const auto binding = pack.model(os.model, schema.task);
    if (!binding)
        throw Error(ErrorCode::MissingTemplate,
                    "no " + std::string(to_string(schema.task)) + " template for MODEL:" + os.model);
    emit("# MODEL", pack.section("model"),
         {{"MODEL_IMPORT", binding->import_line},
          {"MODEL_CLASS", binding->class_name},
          {"HYPERPARAMS", python_kwargs(os.hyperparams)}});
    emit("# EVALUATION", pack.section("evaluation"),
         {{"METRIC", pack.metric(options.metric.value_or(default_metric(schema.task)))}});
    return c;
}

std::vector<CandidatePipeline> build_candidates(const std::vector<Skeleton>& skeletons, const OrderDag& g,
                                                const TemplatePack& pack, const HyperparamCatalog& catalog,
                                                const Dataset& schema, const Taxonomy& taxonomy,
                                                const std::map<std::string, std::size_t>& corpus_frequency,
                                                const EmitOptions& options) {
    if (skeletons.empty()) throw Error(ErrorCode::NoSkeletons, "seeding produced no skeletons");
    std::vector<const Skeleton*> sorted;
    for (const auto& s : skeletons) sorted.push_back(&s);
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const Skeleton* a, const Skeleton* b) { return a->model_rank < b->model_rank; });
    std::vector<CandidatePipeline> out;
    for (const auto* s : sorted) {
        auto os = order_skeleton(*s, g, taxonomy, corpus_frequency);
        const auto sets = catalog.sets(s->model);
        for (std::size_t i = 0; i < sets.size(); ++i) {
            os.hyperparams = sets[i];
            os.hyperparam_index = i;
            out.push_back(instantiate_pipeline(os, schema, pack, options));
        }
    }
    return out;
}

}  // namespace pipesynth
