#include "pipesynth/skeleton.hpp"

#include <algorithm>

#include <spdlog/spdlog.h>

#include "pipesynth/error.hpp"

namespace pipesynth {

std::vector<FePrediction> fe_probabilities(const SkeletonPredictorBundle& bundle, const MetaFeatureVector& mf) {
    std::vector<FePrediction> out;
    for (const auto& [label, tree] : bundle.fe_trees) out.push_back({label, tree.predict_proba(mf)});
    return out;
}

std::vector<FePrediction> predict_fe(const SkeletonPredictorBundle& bundle, const MetaFeatureVector& mf, double cutoff) {
    std::vector<FePrediction> out;
    for (auto& p : fe_probabilities(bundle, mf))
        if (p.prob >= cutoff) out.push_back(std::move(p));
    std::stable_sort(out.begin(), out.end(), [](const FePrediction& a, const FePrediction& b) {
        if (a.prob != b.prob) return a.prob > b.prob;
        return a.label < b.label;
    });
    return out;
}

bool column_satisfies(const Column& col, const ColumnProfile& profile, const Condition& c) {
    if (is_global(c.feature)) return false;
    auto value = column_feature_value(col, profile, c.feature);
    if (!value) return false;
    if (scale(c.feature) == FeatureScale::Real) return c.holds(*value);
    if (c.op == CompareOp::GE) return c.threshold > 0.0 && *value >= 1.0;
    return c.threshold > 0.0 && c.threshold <= 1.0 && *value < 1.0;
}

std::vector<std::string> fallback_columns(const Dataset& d, const ColumnFallback& fallback) {
    std::vector<std::string> out;
    for (const auto* col : d.features())
        if (fallback.accepts(*col)) out.push_back(col->name);
    return out;
}

std::vector<std::string> infer_relevant_columns(const std::vector<Condition>& path, const Dataset& d,
                                                const ColumnFallback& fallback, const MetaFeatureThresholds& thresholds) {
    std::vector<std::string> out;
    for (const auto* col : d.features()) {
        const auto profile = profile_column(*col, thresholds);
        if (std::any_of(path.begin(), path.end(), [&](const Condition& c) { return column_satisfies(*col, profile, c); }))
            out.push_back(col->name);
    }
    if (out.empty()) return fallback_columns(d, fallback);
    return out;
}

std::vector<RankedModel> rank_models(const SkeletonPredictorBundle& bundle, const MetaFeatureVector& mf, TaskKind task) {
    return bundle.ranker(task).rank(mf);
}

nlohmann::ordered_json Skeleton::to_json() const {
    nlohmann::ordered_json j;
    j["model_rank"] = model_rank;
    j["model"] = "MODEL:" + model;
    j["model_score"] = model_score;
    j["fe"] = nlohmann::ordered_json::array();
    for (const auto& f : fe) {
        nlohmann::ordered_json e;
        e["label"] = "FE:" + f.label;
        e["prob"] = f.prob;
        e["columns"] = f.columns;
        e["path"] = nlohmann::ordered_json::array();
        for (const auto& c : f.path)
            e["path"].push_back({{"feature", name(c.feature)}, {"op", to_string(c.op)}, {"threshold", c.threshold}});
        j["fe"].push_back(e);
    }
    return j;
}

std::vector<Skeleton> generate_skeletons(const std::vector<SkeletonFe>& fe, const std::vector<RankedModel>& ranked,
                                         std::size_t k) {
    if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
    if (k > ranked.size()) {
        spdlog::warn("requested {} skeletons but only {} models are ranked", k, ranked.size());
        k = ranked.size();
    }
    std::vector<Skeleton> out;
    for (std::size_t i = 0; i < k; ++i) out.push_back({fe, ranked[i].model, i + 1, ranked[i].score});
    return out;
}

SeedingResult seed_pipelines(const SkeletonPredictorBundle& bundle, const Dataset& d, std::size_t k,
                             const Taxonomy& taxonomy, const MetaFeatureThresholds& thresholds) {
    SeedingResult out;
    out.meta_features = compute_meta_features(d, thresholds);
    out.fe_probabilities = fe_probabilities(bundle, out.meta_features);

    std::vector<SkeletonFe> fe;
    for (const auto& p : predict_fe(bundle, out.meta_features, bundle.config.fe_cutoff)) {
        const auto* info = taxonomy.fe(p.label);
        if (!info) throw Error(ErrorCode::UnknownComponent, "bundle tree for unknown FE '" + p.label + "'");
        if (p.label == "DataBalancer" && d.task == TaskKind::Regression) {
            spdlog::warn("dropping FE:DataBalancer (p={:.2f}): not applicable to regression", p.prob);
            continue;
        }
        const auto& tree = bundle.fe_trees.at(p.label);
        SkeletonFe s{p.label, p.prob, {}, {}};
        if (tree.is_constant()) {
            s.columns = fallback_columns(d, info->fallback);
        } else {
            s.path = tree.decision_path(out.meta_features);
            s.columns = infer_relevant_columns(s.path, d, info->fallback, thresholds);
        }
        if (s.columns.empty()) {
            spdlog::warn("dropping FE:{} (p={:.2f}): no column qualifies", p.label, p.prob);
            continue;
        }
        fe.push_back(std::move(s));
    }

    const auto& ranker = bundle.ranker(d.task);
    for (auto& r : ranker.rank(out.meta_features)) {
        const auto* m = taxonomy.model(r.model);
        if (m && m->applicable(d.task)) out.ranking.push_back(std::move(r));
    }
    out.skeletons = generate_skeletons(fe, out.ranking, k);
    return out;
}

}  // namespace pipesynth
