#include "pipesynth/decision_tree.hpp"

#include <algorithm>
#include <cstring>
#include <numeric>
#include <set>

#include <spdlog/spdlog.h>

#include "pipesynth/error.hpp"
#include "pipesynth/stats.hpp"

namespace pipesynth {

std::string_view to_string(CompareOp op) { return op == CompareOp::GE ? "GE" : "LT"; }

DecisionTree DecisionTree::constant(double prob) {
    DecisionTree t;
    t.nodes_.push_back(Node{true, prob});
    return t;
}

double DecisionTree::predict_proba(const MetaFeatureVector& mf) const {
    int i = 0;
    while (!nodes_[i].leaf) i = mf[nodes_[i].feature] < nodes_[i].threshold ? nodes_[i].left : nodes_[i].right;
    return nodes_[i].prob;
}

std::vector<Condition> DecisionTree::decision_path(const MetaFeatureVector& mf) const {
    if (is_constant()) throw Error(ErrorCode::EmptyPath, "constant predictor has no decision path");
    std::vector<Condition> path;
    int i = 0;
    while (!nodes_[i].leaf) {
        const Node& n = nodes_[i];
        const bool lt = mf[n.feature] < n.threshold;
        path.push_back({n.feature, lt ? CompareOp::LT : CompareOp::GE, n.threshold});
        i = lt ? n.left : n.right;
    }
    return path;
}

std::size_t DecisionTree::depth() const {
    std::vector<std::size_t> d(nodes_.size(), 0);
    std::size_t best = 0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        best = std::max(best, d[i]);
        if (!nodes_[i].leaf) {
            d[static_cast<std::size_t>(nodes_[i].left)] = d[i] + 1;
            d[static_cast<std::size_t>(nodes_[i].right)] = d[i] + 1;
        }
    }
    return best;
}

namespace {

nlohmann::ordered_json node_to_json(const std::vector<DecisionTree::Node>& nodes, int i) {
    const auto& n = nodes[static_cast<std::size_t>(i)];
    nlohmann::ordered_json j;
    j["prob"] = n.prob;
    if (!n.leaf) {
        j["feature"] = name(n.feature);
        j["threshold"] = n.threshold;
        j["lt"] = node_to_json(nodes, n.left);
        j["ge"] = node_to_json(nodes, n.right);
    }
    return j;
}

MetaFeature feature_from_json(const nlohmann::json& j) {
    auto f = parse_meta_feature(j.get<std::string>());
    if (!f) throw Error(ErrorCode::SchemaError, "unknown meta-feature " + j.dump());
    return *f;
}

int node_from_json(std::vector<DecisionTree::Node>& nodes, const nlohmann::json& j) {
    const int i = static_cast<int>(nodes.size());
    nodes.push_back({});
    nodes.back().prob = j.at("prob").get<double>();
    if (j.contains("feature")) {
        nodes.back().leaf = false;
        nodes.back().feature = feature_from_json(j.at("feature"));
        nodes.back().threshold = j.at("threshold").get<double>();
        const int left = node_from_json(nodes, j.at("lt"));
        nodes[static_cast<std::size_t>(i)].left = left;
        const int right = node_from_json(nodes, j.at("ge"));
        nodes[static_cast<std::size_t>(i)].right = right;
    }
    return i;
}

double gini(double w0, double w1) {
    const double w = w0 + w1;
    if (w <= 0) return 0.0;
    return 1.0 - (w0 * w0 + w1 * w1) / (w * w);
}

/// Lexicographic order on (features, label); used to make training
/// independent of record order.
std::vector<std::size_t> canonical_order(const TreeSample& s) {
    std::vector<std::size_t> idx(s.y.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (s.x[a] != s.x[b]) return s.x[a] < s.x[b];
        return s.y[a] < s.y[b];
    });
    return idx;
}

}  // namespace

nlohmann::ordered_json DecisionTree::to_json() const {
    nlohmann::ordered_json j;
    j["max_depth"] = max_depth_;
    j["features"] = nlohmann::ordered_json::array();
    for (auto f : features_) j["features"].push_back(name(f));
    j["root"] = node_to_json(nodes_, 0);
    return j;
}

DecisionTree DecisionTree::from_json(const nlohmann::json& j) {
    DecisionTree t;
    try {
        t.max_depth_ = j.at("max_depth").get<std::size_t>();
        for (const auto& f : j.at("features")) t.features_.push_back(feature_from_json(f));
        node_from_json(t.nodes_, j.at("root"));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SchemaError, std::string("decision tree: ") + e.what());
    }
    return t;
}

class CartBuilder {
  public:
    CartBuilder(const TreeSample& s, const std::vector<MetaFeature>& features, std::size_t max_depth, double min_decrease)
        : s_(s), features_(features), max_depth_(max_depth), min_decrease_(min_decrease) {
        std::size_t n1 = 0;
        for (int y : s.y) n1 += y != 0;
        const std::size_t n = s.y.size();
        const std::size_t n0 = n - n1;
        w_[0] = n0 ? static_cast<double>(n) / (2.0 * static_cast<double>(n0)) : 0.0;
        w_[1] = n1 ? static_cast<double>(n) / (2.0 * static_cast<double>(n1)) : 0.0;
        total_ = static_cast<double>(n0) * w_[0] + static_cast<double>(n1) * w_[1];
        std::sort(features_.begin(), features_.end());
    }

    DecisionTree build() {
        DecisionTree t;
        t.features_ = features_;
        t.max_depth_ = max_depth_;
        if (s_.y.empty()) {
            t.nodes_.push_back({true, 0.0});
            return t;
        }
        grow(t.nodes_, canonical_order(s_), 0);
        return t;
    }

  private:
    struct Split {
        MetaFeature feature;
        double threshold;
        double decrease;
    };

    int grow(std::vector<DecisionTree::Node>& nodes, const std::vector<std::size_t>& rows, std::size_t depth) {
        double w0 = 0, w1 = 0;
        for (auto r : rows) (s_.y[r] ? w1 : w0) += w_[s_.y[r] ? 1 : 0];
        const int id = static_cast<int>(nodes.size());
        nodes.push_back({true, w0 + w1 > 0 ? w1 / (w0 + w1) : 0.0});
        if (depth >= max_depth_ || w0 == 0 || w1 == 0) return id;

        auto split = best_split(rows, w0, w1);
        if (!split) return id;
        std::vector<std::size_t> left, right;
        for (auto r : rows) (s_.x[r][index(split->feature)] < split->threshold ? left : right).push_back(r);
        nodes[static_cast<std::size_t>(id)].leaf = false;
        nodes[static_cast<std::size_t>(id)].feature = split->feature;
        nodes[static_cast<std::size_t>(id)].threshold = split->threshold;
        const int l = grow(nodes, left, depth + 1);
        nodes[static_cast<std::size_t>(id)].left = l;
        const int r = grow(nodes, right, depth + 1);
        nodes[static_cast<std::size_t>(id)].right = r;
        return id;
    }

    std::optional<Split> best_split(const std::vector<std::size_t>& rows, double w0, double w1) const {
        const double parent = (w0 + w1) * gini(w0, w1);
        std::optional<Split> best;
        for (MetaFeature f : features_) {
            const std::size_t fi = index(f);
            std::vector<std::size_t> order(rows);
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t a, std::size_t b) { return s_.x[a][fi] < s_.x[b][fi]; });
            double l0 = 0, l1 = 0;
            for (std::size_t i = 0; i + 1 < order.size(); ++i) {
                const std::size_t r = order[i];
                (s_.y[r] ? l1 : l0) += w_[s_.y[r] ? 1 : 0];
                const double lo = s_.x[r][fi], hi = s_.x[order[i + 1]][fi];
                if (lo == hi) continue;
                double thr = lo + (hi - lo) / 2.0;
                if (!(thr > lo)) thr = hi;
                const double r0 = w0 - l0, r1 = w1 - l1;
                const double decrease = (parent - (l0 + l1) * gini(l0, l1) - (r0 + r1) * gini(r0, r1)) / total_;
                if (decrease < min_decrease_ || decrease <= 1e-12) continue;
                if (!best || decrease > best->decrease + 1e-12) best = Split{f, thr, decrease};
            }
        }
        return best;
    }

    const TreeSample& s_;
    std::vector<MetaFeature> features_;
    std::size_t max_depth_;
    double min_decrease_;
    double w_[2] = {0, 0};
    double total_ = 0;
};

DecisionTree fit_cart(const TreeSample& sample, const std::vector<MetaFeature>& features, std::size_t max_depth,
                      double min_impurity_decrease) {
    return CartBuilder(sample, features, max_depth, min_impurity_decrease).build();
}

double binary_macro_f1(const std::vector<int>& truth, const std::vector<int>& predicted) {
    if (truth.size() != predicted.size()) throw Error(ErrorCode::InvalidArgument, "macro F1: length mismatch");
    std::set<int> labels;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        labels.insert(truth[i] != 0);
        labels.insert(predicted[i] != 0);
    }
    if (labels.empty()) return 0.0;
    double sum = 0.0;
    for (int c : labels) {
        std::size_t tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < truth.size(); ++i) {
            const bool t = (truth[i] != 0) == (c != 0);
            const bool p = (predicted[i] != 0) == (c != 0);
            tp += t && p;
            fp += !t && p;
            fn += t && !p;
        }
        const std::size_t denom = 2 * tp + fp + fn;
        sum += denom ? 2.0 * static_cast<double>(tp) / static_cast<double>(denom) : 0.0;
    }
    return sum / static_cast<double>(labels.size());
}

double cross_validated_f1(const TreeSample& sample, const std::vector<MetaFeature>& features, std::size_t max_depth,
                          const TreeTrainingConfig& cfg) {
    const std::size_t n = sample.y.size();
    const std::size_t k = std::max<std::size_t>(2, std::min(cfg.folds, n));
    // Rank records by a seeded content hash, then deal them into folds.
    auto order = canonical_order(sample);
    std::vector<std::uint64_t> key(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::string bytes(sizeof(double) * kMetaFeatureCount + sizeof(int), '\0');
        std::memcpy(bytes.data(), sample.x[i].data(), sizeof(double) * kMetaFeatureCount);
        std::memcpy(bytes.data() + sizeof(double) * kMetaFeatureCount, &sample.y[i], sizeof(int));
        key[i] = fnv1a(bytes, 14695981039346656037ull ^ (cfg.seed * 0x9e3779b97f4a7c15ull));
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });
    std::vector<std::size_t> fold(n);
    for (std::size_t pos = 0; pos < n; ++pos) fold[order[pos]] = pos % k;

    std::vector<int> truth, predicted;
    for (std::size_t f = 0; f < k; ++f) {
        TreeSample train;
        for (std::size_t i = 0; i < n; ++i)
            if (fold[i] != f) {
                train.x.push_back(sample.x[i]);
                train.y.push_back(sample.y[i]);
            }
        auto tree = fit_cart(train, features, max_depth, cfg.min_impurity_decrease);
        for (std::size_t i = 0; i < n; ++i) {
            if (fold[i] != f) continue;
            MetaFeatureVector mf;
            for (auto m : all_meta_features()) mf[m] = sample.x[i][index(m)];
            truth.push_back(sample.y[i]);
            predicted.push_back(tree.predict_proba(mf) >= 0.5 ? 1 : 0);
        }
    }
    return binary_macro_f1(truth, predicted);
}

TreeSample fe_sample(const MetaCorpus& corpus, const std::string& fe) {
    TreeSample s;
    s.x.reserve(corpus.records.size());
    for (const auto& r : corpus.records) {
        std::array<double, kMetaFeatureCount> row{};
        std::copy(r.meta_features.values().begin(), r.meta_features.values().end(), row.begin());
        s.x.push_back(row);
        s.y.push_back(r.has_fe(fe) ? 1 : 0);
    }
    return s;
}

std::vector<MetaFeature> select_features(const MetaCorpus& corpus, const std::string& fe, double threshold,
                                         std::size_t fallback) {
    auto s = fe_sample(corpus, fe);
    const auto positives = static_cast<std::size_t>(std::count(s.y.begin(), s.y.end(), 1));
    if (positives == 0 || positives == s.y.size())
        throw Error(ErrorCode::OneClassOnly, "'" + fe + "' is " + (positives == 0 ? "never" : "always") + " present");

    std::vector<std::pair<double, MetaFeature>> scored;
    std::vector<MetaFeature> selected;
    std::vector<double> column(s.y.size());
    for (auto f : all_meta_features()) {
        for (std::size_t i = 0; i < s.y.size(); ++i) column[i] = s.x[i][index(f)];
        auto r = stats::point_biserial(column, s.y);
        if (r.degenerate) continue;
        scored.emplace_back(std::abs(r.value), f);
        if (std::abs(r.value) >= threshold) selected.push_back(f);
    }
    if (selected.empty()) {
        std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
        for (std::size_t i = 0; i < std::min(fallback, scored.size()); ++i) selected.push_back(scored[i].second);
        std::sort(selected.begin(), selected.end());
    }
    return selected;
}

nlohmann::ordered_json FeTreeReport::to_json() const {
    nlohmann::ordered_json j;
    j["label"] = label;
    j["positives"] = positives;
    j["negatives"] = negatives;
    j["constant"] = constant;
    if (constant) j["constant_reason"] = constant_reason;
    j["selected_features"] = nlohmann::ordered_json::array();
    for (auto f : selected) j["selected_features"].push_back(name(f));
    j["cv_macro_f1_by_depth"] = nlohmann::ordered_json::object();
    for (const auto& [d, f1] : cv_f1_by_depth) j["cv_macro_f1_by_depth"][std::to_string(d)] = f1;
    j["chosen_depth"] = chosen_depth;
    j["cv_macro_f1"] = cv_f1;
    return j;
}

FeTreeResult train_fe_tree(const MetaCorpus& corpus, const std::string& fe, const TreeTrainingConfig& cfg) {
    FeTreeResult out;
    auto& rep = out.report;
    rep.label = fe;
    auto sample = fe_sample(corpus, fe);
    rep.positives = static_cast<std::size_t>(std::count(sample.y.begin(), sample.y.end(), 1));
    rep.negatives = sample.y.size() - rep.positives;
    const double prior = sample.y.empty() ? 0.0 : static_cast<double>(rep.positives) / static_cast<double>(sample.y.size());

    auto make_constant = [&](std::string reason) {
        spdlog::warn("FE tree {}: {}; using a constant predictor at prior {:.3f}", fe, reason, prior);
        rep.constant = true;
        rep.constant_reason = std::move(reason);
        out.tree = DecisionTree::constant(prior);
        return out;
    };

    if (rep.positives < kMinComponentOccurrences)
        return make_constant("fewer than " + std::to_string(kMinComponentOccurrences) + " occurrences");
    try {
        rep.selected = select_features(corpus, fe, cfg.pb_threshold, cfg.fallback_features);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::OneClassOnly) throw;
        return make_constant("single class");
    }
    if (rep.selected.empty()) return make_constant("no informative meta-feature");

    auto grid = cfg.depth_grid;
    std::sort(grid.begin(), grid.end());
    bool first = true;
    for (std::size_t depth : grid) {
        const double f1 = cross_validated_f1(sample, rep.selected, depth, cfg);
        rep.cv_f1_by_depth[depth] = f1;
        if (first || f1 > rep.cv_f1) {
            rep.cv_f1 = f1;
            rep.chosen_depth = depth;
            first = false;
        }
    }
    out.tree = fit_cart(sample, rep.selected, rep.chosen_depth, cfg.min_impurity_decrease);
    if (out.tree.is_constant()) {
        rep.constant = true;
        rep.constant_reason = "no split reached the impurity floor";
    }
    return out;
}

}  // namespace pipesynth
