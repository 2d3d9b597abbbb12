#include "pipesynth/model_ranker.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <spdlog/spdlog.h>

#include "pipesynth/error.hpp"

namespace pipesynth {

namespace {

using Row = std::array<double, kMetaFeatureCount>;

double sigmoid(double m) {
    if (m >= 0) return 1.0 / (1.0 + std::exp(-m));
    const double e = std::exp(m);
    return e / (1.0 + e);
}

std::array<double, 2> balanced_weights(const std::vector<int>& y) {
    const auto n = static_cast<double>(y.size());
    const auto n1 = static_cast<double>(std::count(y.begin(), y.end(), 1));
    const double n0 = n - n1;
    return {n0 > 0 ? n / (2.0 * n0) : 0.0, n1 > 0 ? n / (2.0 * n1) : 0.0};
}

/// Full-batch gradient descent on a weighted loss whose per-sample derivative
/// with respect to the margin is given by `dloss`.
template <class DLoss>
LinearScorer descend(const std::vector<Row>& z, const std::vector<int>& y, const RankerConfig& cfg, DLoss dloss) {
    LinearScorer s;
    if (z.empty()) return s;
    const auto w = balanced_weights(y);
    const auto n = static_cast<double>(z.size());
    for (std::size_t it = 0; it < cfg.iterations; ++it) {
        Row grad{};
        double grad_b = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i) {
            const double g = w[static_cast<std::size_t>(y[i])] * dloss(s.margin(z[i]), y[i]) / n;
            if (g == 0.0) continue;
            for (std::size_t k = 0; k < kMetaFeatureCount; ++k) grad[k] += g * z[i][k];
            grad_b += g;
        }
        for (std::size_t k = 0; k < kMetaFeatureCount; ++k) s.w[k] -= cfg.step * (grad[k] + cfg.lambda * s.w[k]);
        s.b -= cfg.step * grad_b;
    }
    return s;
}

nlohmann::ordered_json scorer_json(const LinearScorer& s) {
    return {{"w", s.w}, {"b", s.b}};
}

LinearScorer scorer_from_json(const nlohmann::json& j) {
    LinearScorer s;
    auto w = j.at("w").get<std::vector<double>>();
    if (w.size() != kMetaFeatureCount) throw Error(ErrorCode::SchemaError, "scorer weight length");
    std::copy(w.begin(), w.end(), s.w.begin());
    s.b = j.at("b").get<double>();
    return s;
}

}  // namespace

FeatureScaler FeatureScaler::fit(const std::vector<MetaFeatureVector>& rows) {
    FeatureScaler sc;
    sc.scale.fill(1.0);
    for (std::size_t i = 0; i < sc.mean.size(); ++i) sc.mean[i] = 0.0;
    if (rows.empty()) return sc;
    FeatureScaler identity;
    identity.scale.fill(1.0);
    std::vector<Row> t;
    t.reserve(rows.size());
    for (const auto& r : rows) t.push_back(identity.transform(r));
    const auto n = static_cast<double>(rows.size());
    for (std::size_t k = 0; k < kMetaFeatureCount; ++k) {
        double s = 0.0;
        for (const auto& r : t) s += r[k];
        const double mu = s / n;
        double v = 0.0;
        for (const auto& r : t) v += (r[k] - mu) * (r[k] - mu);
        const double sd = std::sqrt(v / n);
        sc.mean[k] = mu;
        sc.scale[k] = sd > 1e-12 ? sd : 1.0;
    }
    return sc;
}

Row FeatureScaler::transform(const MetaFeatureVector& mf) const {
    Row z{};
    for (auto f : all_meta_features()) {
        const std::size_t k = index(f);
        double v = mf[f];
        if (pipesynth::scale(f) == FeatureScale::Count) v = std::log1p(std::max(v, 0.0));
        z[k] = (v - mean[k]) / this->scale[k];
    }
    return z;
}

double LinearScorer::margin(const Row& z) const {
    double m = b;
    for (std::size_t k = 0; k < kMetaFeatureCount; ++k) m += w[k] * z[k];
    return m;
}

LinearScorer fit_logistic(const std::vector<Row>& z, const std::vector<int>& y, const RankerConfig& cfg) {
    return descend(z, y, cfg, [](double m, int label) { return sigmoid(m) - label; });
}

LinearScorer fit_linear_svm(const std::vector<Row>& z, const std::vector<int>& y, const RankerConfig& cfg) {
    return descend(z, y, cfg, [](double m, int label) {
        const double s = label ? 1.0 : -1.0;
        return s * m < 1.0 ? -s : 0.0;
    });
}

std::pair<double, double> fit_platt(const std::vector<double>& f, const std::vector<int>& y, std::size_t iterations) {
    const auto prior1 = static_cast<double>(std::count(y.begin(), y.end(), 1));
    const double prior0 = static_cast<double>(y.size()) - prior1;
    const double hi = (prior1 + 1.0) / (prior1 + 2.0);
    const double lo = 1.0 / (prior0 + 2.0);
    std::vector<double> t(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) t[i] = y[i] ? hi : lo;

    auto objective = [&](double a, double b) {
        double v = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            const double x = f[i] * a + b;
            v += x >= 0 ? t[i] * x + std::log1p(std::exp(-x)) : (t[i] - 1.0) * x + std::log1p(std::exp(x));
        }
        return v;
    };

    double a = 0.0, b = std::log((prior0 + 1.0) / (prior1 + 1.0));
    double fval = objective(a, b);
    for (std::size_t it = 0; it < iterations; ++it) {
        double h11 = 1e-12, h22 = 1e-12, h21 = 0, g1 = 0, g2 = 0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            const double x = f[i] * a + b;
            double p, q;
            if (x >= 0) {
                p = std::exp(-x) / (1.0 + std::exp(-x));
                q = 1.0 / (1.0 + std::exp(-x));
            } else {
                p = 1.0 / (1.0 + std::exp(x));
                q = std::exp(x) / (1.0 + std::exp(x));
            }
            const double d2 = p * q;
            h11 += f[i] * f[i] * d2;
            h22 += d2;
            h21 += f[i] * d2;
            const double d1 = t[i] - p;
            g1 += f[i] * d1;
            g2 += d1;
        }
        if (std::abs(g1) < 1e-5 && std::abs(g2) < 1e-5) break;
        const double det = h11 * h22 - h21 * h21;
        const double da = -(h22 * g1 - h21 * g2) / det;
        const double db = -(-h21 * g1 + h11 * g2) / det;
        const double gd = g1 * da + g2 * db;
        double step = 1.0;
        while (step >= 1e-10) {
            const double na = a + step * da, nb = b + step * db;
            const double nf = objective(na, nb);
            if (nf < fval + 1e-4 * step * gd) {
                a = na;
                b = nb;
                fval = nf;
                break;
            }
            step /= 2.0;
        }
        if (step < 1e-10) break;
    }
    return {a, b};
}

void sort_ranking(std::vector<RankedModel>& ranking) {
    std::sort(ranking.begin(), ranking.end(), [](const RankedModel& x, const RankedModel& y) {
        if (x.score != y.score) return x.score > y.score;
        return x.model < y.model;
    });
}

std::vector<RankedModel> combine_scores(const std::vector<LearnerScores>& scores, const std::function<double(double)>& g) {
    std::vector<RankedModel> out;
    out.reserve(scores.size());
    for (const auto& s : scores) {
        const double lr = g ? g(s.logistic) : s.logistic;
        const double svm = g ? g(s.svm) : s.svm;
        out.push_back({s.model, (lr + svm) / 2.0});
    }
    sort_ranking(out);
    return out;
}

std::vector<LearnerScores> ModelRanker::learner_scores(const MetaFeatureVector& mf) const {
    std::vector<LearnerScores> out;
    if (fallback_) {
        for (const auto& [m, share] : shares_) out.push_back({m, share, share});
        return out;
    }
    const auto z = scaler_.transform(mf);
    for (const auto& s : scorers_) {
        const double lr = sigmoid(s.logistic.margin(z));
        const double svm = sigmoid(-(s.platt_a * s.svm.margin(z) + s.platt_b));
        out.push_back({s.model, lr, svm});
    }
    return out;
}

std::vector<RankedModel> ModelRanker::rank(const MetaFeatureVector& mf) const { return combine_scores(learner_scores(mf)); }

ModelRanker ModelRanker::frequency_fallback(TaskKind task, const std::vector<std::pair<std::string, double>>& shares) {
    ModelRanker r;
    r.task_ = task;
    r.fallback_ = true;
    r.shares_ = shares;
    r.scaler_.scale.fill(1.0);
    return r;
}

nlohmann::ordered_json ModelRanker::to_json() const {
    nlohmann::ordered_json j;
    j["task"] = task_code(task_);
    j["frequency_fallback"] = fallback_;
    j["scaler"] = {{"mean", scaler_.mean}, {"scale", scaler_.scale}};
    j["models"] = nlohmann::ordered_json::array();
    for (const auto& s : scorers_) {
        nlohmann::ordered_json m;
        m["model"] = s.model;
        m["logistic"] = scorer_json(s.logistic);
        m["svm"] = scorer_json(s.svm);
        m["platt"] = {s.platt_a, s.platt_b};
        j["models"].push_back(m);
    }
    j["shares"] = nlohmann::ordered_json::array();
    for (const auto& [m, share] : shares_) j["shares"].push_back({{"model", m}, {"share", share}});
    return j;
}

ModelRanker ModelRanker::from_json(const nlohmann::json& j) {
    ModelRanker r;
    try {
        auto task = parse_task(j.at("task").get<std::string>());
        if (!task) throw Error(ErrorCode::SchemaError, "ranker task");
        r.task_ = *task;
        r.fallback_ = j.at("frequency_fallback").get<bool>();
        auto mean = j.at("scaler").at("mean").get<std::vector<double>>();
        auto scale = j.at("scaler").at("scale").get<std::vector<double>>();
        if (mean.size() != kMetaFeatureCount || scale.size() != kMetaFeatureCount)
            throw Error(ErrorCode::SchemaError, "scaler length");
        std::copy(mean.begin(), mean.end(), r.scaler_.mean.begin());
        std::copy(scale.begin(), scale.end(), r.scaler_.scale.begin());
        for (const auto& m : j.at("models")) {
            ModelScorer s;
            s.model = m.at("model").get<std::string>();
            s.logistic = scorer_from_json(m.at("logistic"));
            s.svm = scorer_from_json(m.at("svm"));
            s.platt_a = m.at("platt").at(0).get<double>();
            s.platt_b = m.at("platt").at(1).get<double>();
            r.scorers_.push_back(std::move(s));
        }
        for (const auto& s : j.at("shares"))
            r.shares_.emplace_back(s.at("model").get<std::string>(), s.at("share").get<double>());
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SchemaError, std::string("model ranker: ") + e.what());
    }
    return r;
}

ModelRanker train_model_ranker(const MetaCorpus& corpus, TaskKind task, const RankerConfig& cfg) {
    std::vector<const AbstractPipeline*> records;
    for (const auto& r : corpus.records)
        if (r.task == task) records.push_back(&r);
    // Canonical record order keeps floating-point accumulation independent of file order.
    std::sort(records.begin(), records.end(), [](const AbstractPipeline* a, const AbstractPipeline* b) {
        const auto va = a->meta_features.values(), vb = b->meta_features.values();
        if (!std::equal(va.begin(), va.end(), vb.begin()))
            return std::lexicographical_compare(va.begin(), va.end(), vb.begin(), vb.end());
        return a->model < b->model;
    });

    std::map<std::string, std::size_t> counts;
    for (const auto* r : records) ++counts[r->model];
    std::vector<std::string> retained;
    for (const auto& [m, c] : counts)
        if (c >= kMinComponentOccurrences) retained.push_back(m);
    if (retained.size() < 2)
        throw Error(ErrorCode::InsufficientModels, std::to_string(retained.size()) + " model label(s) with at least " +
                                                       std::to_string(kMinComponentOccurrences) + " " +
                                                       std::string(to_string(task)) + " records");

    ModelRanker ranker;
    ranker.task_ = task;
    std::vector<MetaFeatureVector> rows;
    for (const auto* r : records) rows.push_back(r->meta_features);
    ranker.scaler_ = FeatureScaler::fit(rows);
    std::vector<Row> z;
    for (const auto& r : rows) z.push_back(ranker.scaler_.transform(r));

    for (const auto& m : retained) {
        std::vector<int> y;
        for (const auto* r : records) y.push_back(r->model == m ? 1 : 0);
        ModelScorer s;
        s.model = m;
        s.logistic = fit_logistic(z, y, cfg);
        s.svm = fit_linear_svm(z, y, cfg);
        std::vector<double> margins;
        for (const auto& row : z) margins.push_back(s.svm.margin(row));
        std::tie(s.platt_a, s.platt_b) = fit_platt(margins, y, cfg.platt_iterations);
        ranker.scorers_.push_back(std::move(s));
    }
    return ranker;
}

}  // namespace pipesynth
