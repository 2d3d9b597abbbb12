#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pipesynth/order_dag.hpp"
#include "pipesynth/skeleton.hpp"
#include "pipesynth/tabular.hpp"
#include "pipesynth/taxonomy.hpp"
#include "pipesynth/templates.hpp"

namespace pipesynth {

struct OrderedSkeleton {
    std::vector<SkeletonFe> fe_ordered;
    std::string model;
    std::size_t model_rank = 1;
    nlohmann::ordered_json hyperparams = nlohmann::ordered_json::object();
    std::size_t hyperparam_index = 0;

    nlohmann::ordered_json to_json() const;
};

/// Sub-DAG over `components` plus MODEL, keeping an edge a->b whenever b is
/// reachable from a in `g`, then transitively reduced. Throws UnknownComponent.
OrderDag construct_dag(const std::vector<std::string>& components, const OrderDag& g);

/// Within each DAG level, FE nodes targeting identical column sets keep only
/// the most probable one (ties: higher corpus frequency, then name). Edges of
/// removed nodes are bridged.
OrderDag discard_redundant(const OrderDag& g, const std::vector<SkeletonFe>& fe,
                           const std::map<std::string, std::size_t>& corpus_frequency = {});

/// Kahn sort; among ready nodes the earlier stage wins, then taxonomy
/// priority, then name. Throws CycleDetected or StageConflict.
std::vector<std::string> total_order(const OrderDag& g, const Taxonomy& taxonomy = Taxonomy::builtin());

/// Steps two to four: order, de-duplicate and linearize a skeleton's FE set.
OrderedSkeleton order_skeleton(const Skeleton& s, const OrderDag& g, const Taxonomy& taxonomy = Taxonomy::builtin(),
                               const std::map<std::string, std::size_t>& corpus_frequency = {});

struct EmitOptions {
    std::string train_file = "training.csv";
    std::string test_file = "test.csv";
    char delimiter = ',';
    /// Metric name in the template pack; defaults to macro_f1 / r2 by task.
    std::optional<std::string> metric;
};

struct CandidatePipeline {
    std::string script_id;
    std::string source;
    OrderedSkeleton skeleton;
    std::size_t model_rank = 1;
    std::size_t hyperparam_index = 0;
    std::string template_version;
    /// Section comment lines in emission order.
    std::vector<std::string> sections;

    nlohmann::ordered_json manifest() const;
};

std::string default_metric(TaskKind task);
std::string make_script_id(std::size_t model_rank, const std::string& model, std::size_t hyperparam_index);

/// Renders the script: load, pre-detach transforms, detach, post-detach
/// transforms, model, evaluation. Throws MissingTemplate or EmptyColumnHole.
CandidatePipeline instantiate_pipeline(const OrderedSkeleton& os, const Dataset& schema, const TemplatePack& pack,
                                       const EmitOptions& options = {});

/// Every skeleton crossed with its model's hyperparameter sets, ordered by
/// (model rank, set index). Throws NoSkeletons on empty input.
std::vector<CandidatePipeline> build_candidates(const std::vector<Skeleton>& skeletons, const OrderDag& g,
                                                const TemplatePack& pack, const HyperparamCatalog& catalog,
                                                const Dataset& schema, const Taxonomy& taxonomy = Taxonomy::builtin(),
                                                const std::map<std::string, std::size_t>& corpus_frequency = {},
                                                const EmitOptions& options = {});

}  // namespace pipesynth
