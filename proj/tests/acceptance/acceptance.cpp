// Acceptance suite: one PASS/FAIL line per headline criterion; exits non-zero
// when any criterion fails.
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <regex>
#include <set>

#include <spdlog/spdlog.h>

#include "pipesynth/bundle.hpp"
#include "pipesynth/process.hpp"
#include "pipesynth/instantiation.hpp"
#include "pipesynth/skeleton.hpp"
#include "pipesynth/stats.hpp"
#include "pipesynth/synthetic_corpus.hpp"
#include "stat_oracles.hpp"
#include "synthesis.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace pipesynth;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

// ---------------------------------------------------------------------------

Outcome statistics_oracles() {
    const auto start = Clock::now();
    std::mt19937_64 rng(1000);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::lognormal_distribution<double> lognormal(0.0, 0.8);
    std::uniform_real_distribution<double> uniform(-5.0, 5.0);
    double worst = 0.0, worst_pb = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 4 + rng() % 300;
        std::vector<double> x(n), y(n), yd(n);
        std::vector<int> b(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = trial % 3 == 0 ? normal(rng) : trial % 3 == 1 ? lognormal(rng) : uniform(rng);
            y[i] = 0.3 * x[i] + normal(rng);
            b[i] = i < 2 ? static_cast<int>(i) : static_cast<int>(rng() % 2);
            yd[i] = b[i];
        }
        worst = std::max(worst, std::abs(stats::skewness(x).value - testing::ref_skew(x)));
        worst = std::max(worst, std::abs(stats::kurtosis(x).value - testing::ref_kurt(x)));
        worst = std::max(worst, std::abs(stats::pearson(x, y).value - testing::ref_pearson(x, y)));
        worst = std::max(worst, std::abs(stats::point_biserial(x, b).value - testing::ref_point_biserial(x, b)));
        worst_pb = std::max(worst_pb, std::abs(stats::point_biserial(x, b).value - stats::pearson(x, yd).value));
    }
    const double t = seconds_since(start);
    return {worst <= 1e-10 && worst_pb <= 1e-12 && t < 5.0,
            "max |d| " + fmt("%.2e", worst) + ", r_pb vs pearson " + fmt("%.2e", worst_pb) + ", " + fmt("%.2f s", t)};
}

Outcome meta_feature_contract() {
    const std::vector<std::size_t> expected{3, 1, 10, 4, 6, 3, 3, 2, 3, 3};
    std::vector<std::size_t> sizes;
    for (const auto& g : meta_feature_groups()) sizes.push_back(g.size);
    const auto j = compute_meta_features(testing::mixed_classification()).to_json();
    std::set<std::string> names;
    for (auto f : all_meta_features()) names.insert(std::string(name(f)));

    std::mt19937_64 rng(77);
    int invariant = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto d = testing::random_dataset(rng);
        invariant += compute_meta_features(d) == compute_meta_features(testing::permuted(d, rng));
    }
    const bool pass = j.size() == 38 && names.size() == 38 && sizes == expected && invariant == 100;
    return {pass, std::to_string(j.size()) + " keys, groups " + (sizes == expected ? "3/1/10/4/6/3/3/2/3/3" : "wrong") +
                      ", permutation-invariant on " + std::to_string(invariant) + "/100 datasets"};
}

struct Trained {
    MetaCorpus corpus;
    TrainingResult result;
    double seconds = 0.0;
};

const Trained& planted_bundle() {
    static const Trained t = [] {
        Trained out;
        out.corpus = generate_synthetic_corpus(2024, 500);
        const auto start = Clock::now();
        out.result = train_bundle(out.corpus);
        out.seconds = seconds_since(start);
        return out;
    }();
    return t;
}

Outcome planted_rule_recovery() {
    const auto start = Clock::now();
    const auto& t = planted_bundle();
    const auto& b = t.result.bundle;
    const FeTreeReport* imputer = nullptr;
    for (const auto& r : t.result.report.fe)
        if (r.label == "Imputer") imputer = &r;
    if (!imputer) return {false, "no Imputer tree"};
    const auto& tree = b.fe_trees.at("Imputer");
    const bool root_ok = !tree.is_constant() && tree.nodes()[0].feature == MetaFeature::HasMissing;

    const auto probes = sample_held_out(99, 100);
    int hits = 0;
    for (const auto& p : probes) hits += b.ranker(p.task).rank(p.meta_features).front().model == p.planted_model;
    const double acc = hits / 100.0;
    const double secs = t.seconds + seconds_since(start);
    return {imputer->cv_f1 >= 0.95 && root_ok && acc >= 0.9 && secs < 60.0,
            "Imputer CV macro-F1 " + fmt("%.3f", imputer->cv_f1) + ", root " +
                std::string(tree.is_constant() ? "constant" : name(tree.nodes()[0].feature)) + ", ranker top-1 " +
                fmt("%.2f", acc) + ", " + fmt("%.1f s", secs)};
}

std::vector<std::string> columns_for(const SkeletonPredictorBundle& b, const std::string& label, const Dataset& d,
                                     const MetaFeatureVector& mf) {
    const auto& tree = b.fe_trees.at(label);
    const auto& fallback = Taxonomy::builtin().fe(label)->fallback;
    if (tree.is_constant()) return fallback_columns(d, fallback);
    return infer_relevant_columns(tree.decision_path(mf), d, fallback);
}

Outcome relevant_columns() {
    const auto& b = planted_bundle().result.bundle;
    const auto d = testing::mixed_classification();
    const auto mf = compute_meta_features(d);
    const auto imp = columns_for(b, "Imputer", d, mf);
    const auto ord = columns_for(b, "OrdinalEncoder", d, mf);
    auto show = [](const std::vector<std::string>& v) {
        std::string s = "{";
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
        return s + "}";
    };
    return {imp == std::vector<std::string>{"A", "B"} && ord == std::vector<std::string>{"C"},
            "Imputer " + show(imp) + ", OrdinalEncoder " + show(ord)};
}

Outcome golden_ordered_skeleton() {
    Skeleton s;
    s.model = "CatBoost";
    s.fe = {{"Imputer", 0.81, {"A", "B"}, {}},
            {"OrdinalEncoder", 0.73, {"C"}, {}},
            {"OneHotEncoder", 0.70, {"C"}, {}},
            {"LinearScaler", 0.69, {"A", "B", "D"}, {}},
            {"DataBalancer", 0.58, {"A", "B", "C", "D"}, {}}};
    const auto os = order_skeleton(s, OrderDag::builtin_default());
    std::vector<std::string> got;
    for (const auto& f : os.fe_ordered) got.push_back(f.label);
    got.push_back(os.model);
    const std::vector<std::string> expected{"Imputer", "OrdinalEncoder", "LinearScaler", "DataBalancer", "CatBoost"};
    std::string shown;
    for (const auto& g : got) shown += (shown.empty() ? "" : ", ") + g;
    return {got == expected, "[" + shown + "]"};
}

Outcome ordering_property() {
    std::mt19937_64 rng(500);
    const auto& tax = Taxonomy::builtin();
    const auto& fe = tax.fe_components();
    const std::vector<std::string> pool{"A", "B", "C"};
    const std::string model(kModelNode);
    int edge_violations = 0, level_violations = 0, max_removed = 0, errors = 0;
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<std::string> perm;
        for (const auto& f : fe) perm.push_back(f.name);
        std::shuffle(perm.begin(), perm.end(), rng);
        std::stable_sort(perm.begin(), perm.end(),
                         [&](const std::string& a, const std::string& b) { return tax.fe(a)->stage < tax.fe(b)->stage; });
        OrderDag g;
        for (const auto& n : perm) g.add_edge(n, model);
        for (std::size_t i = 0; i < perm.size(); ++i)
            for (std::size_t j = i + 1; j < perm.size(); ++j)
                if (rng() % 3 == 0) g.add_edge(perm[i], perm[j]);

        std::vector<SkeletonFe> predicted;
        for (const auto& f : fe) {
            if (rng() % 2) continue;
            std::vector<std::string> cols;
            for (const auto& c : pool)
                if (rng() % 2) cols.push_back(c);
            if (cols.empty()) cols.push_back(pool[rng() % 3]);
            predicted.push_back({f.name, static_cast<double>(rng() % 10) / 10.0, cols, {}});
        }
        std::vector<std::string> labels;
        for (const auto& p : predicted) labels.push_back(p.label);
        try {
            const auto constructed = construct_dag(labels, g);
            const auto reduced = discard_redundant(constructed, predicted);
            const auto order = total_order(reduced);
            auto pos = [&](const std::string& n) { return std::find(order.begin(), order.end(), n) - order.begin(); };
            for (const auto& e : reduced.edges()) edge_violations += pos(e.from) >= pos(e.to);

            // brute force over the surviving nodes: same level => different columns
            const auto levels = constructed.levels();
            std::vector<const SkeletonFe*> kept;
            for (const auto& p : predicted)
                if (reduced.has_node(p.label)) kept.push_back(&p);
            for (std::size_t i = 0; i < kept.size(); ++i)
                for (std::size_t j = i + 1; j < kept.size(); ++j) {
                    auto ci = kept[i]->columns, cj = kept[j]->columns;
                    std::sort(ci.begin(), ci.end());
                    std::sort(cj.begin(), cj.end());
                    level_violations += levels.at(kept[i]->label) == levels.at(kept[j]->label) && ci == cj;
                }
            // the unique most probable member of each group survives
            for (const auto& p : predicted) {
                bool unique_max = true;
                for (const auto& q : predicted) {
                    if (&q == &p || levels.at(q.label) != levels.at(p.label)) continue;
                    auto a = p.columns, c = q.columns;
                    std::sort(a.begin(), a.end());
                    std::sort(c.begin(), c.end());
                    if (a == c && q.prob >= p.prob) unique_max = false;
                }
                if (unique_max && !reduced.has_node(p.label)) ++level_violations;
            }
            max_removed = std::max<int>(max_removed, static_cast<int>(predicted.size() - kept.size()));
        } catch (const std::exception& e) {
            ++errors;
        }
    }
    return {edge_violations == 0 && level_violations == 0 && errors == 0,
            "500 DAGs: " + std::to_string(edge_violations) + " edge violations, " + std::to_string(level_violations) +
                " redundancy violations, " + std::to_string(errors) + " errors (max " + std::to_string(max_removed) +
                " FE removed in one skeleton)"};
}

// ---------------------------------------------------------------------------
// Determinism and static contract share one synthesis workspace.

struct Workspace {
    testing::TempDir dir;
    fs::path bundle = dir / "bundle.json";
    fs::path train = dir / "train.csv";
    fs::path test = dir / "test.csv";

    Workspace() {
        save_bundle(planted_bundle().result.bundle, bundle);
        auto d = testing::mixed_classification(7, 200);
        auto [tr, te] = split_rows(d, 0.8, 3);
        write_csv(tr, train);
        write_csv(te, test);
    }

    app::SynthesisSummary run(const std::string& name, const std::optional<fs::path>& scores) const {
        app::SynthesizeOptions o;
        o.bundle = bundle;
        o.train = train;
        o.test = test;
        o.targets = {"label"};
        o.seed = 11;
        o.out = dir / name;
        o.exec.command_template = std::string(PIPESYNTH_STUB_EXEC) + " {script} --workdir {workdir}";
        if (scores) o.exec.command_template += " --scores " + shell_quote(scores->string());
        o.exec.max_parallel = 2;
        return app::synthesize(o);
    }
};

const Workspace& workspace() {
    static const Workspace w;
    return w;
}

std::map<std::string, std::string> directory_bytes(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file()) out[e.path().filename().string()] = testing::read_file(e.path());
    return out;
}

/// Winner by brute force: the maximum score, then lowest rank, hp index, id.
std::string expected_winner(const nlohmann::json& results, const nlohmann::json& manifest) {
    std::optional<double> best;
    for (const auto& r : results["results"])
        if (r["status"] == "Ok" && (!best || r["score"].get<double>() > *best)) best = r["score"].get<double>();
    std::vector<std::tuple<std::size_t, std::size_t, std::string>> tied;
    for (const auto& r : results["results"]) {
        if (r["status"] != "Ok" || r["score"].get<double>() != *best) continue;
        for (const auto& m : manifest)
            if (m["script_id"] == r["script_id"])
                tied.emplace_back(m["model_rank"].get<std::size_t>(), m["hyperparam_index"].get<std::size_t>(),
                                  m["script_id"].get<std::string>());
    }
    return std::get<2>(*std::min_element(tied.begin(), tied.end()));
}

Outcome determinism() {
    const auto& w = workspace();
    // hash-derived stub scores
    const auto a = w.run("det-a", std::nullopt);
    const auto b = w.run("det-b", std::nullopt);
    const auto files_a = directory_bytes(w.dir / "det-a" / "candidates");
    const bool scripts_equal = files_a == directory_bytes(w.dir / "det-b" / "candidates");
    const bool skeletons_equal = testing::read_file(w.dir / "det-a" / "skeletons.json") ==
                                 testing::read_file(w.dir / "det-b" / "skeletons.json");
    auto strip = [](nlohmann::json j) {
        for (auto& r : j["results"]) r.erase("duration");
        return j;
    };
    const auto res_a = nlohmann::json::parse(testing::read_file(w.dir / "det-a" / "results.json"));
    const auto res_b = nlohmann::json::parse(testing::read_file(w.dir / "det-b" / "results.json"));
    const bool selection_equal = strip(res_a) == strip(res_b) && a.selection.best == b.selection.best;
    const auto manifest = nlohmann::json::parse(files_a.at("manifest.json"));
    bool max_ok = a.selection.best == expected_winner(res_a, manifest);

    // scripted scores: everything ties, so rank 1 / hp 0 must win
    testing::write_file(w.dir / "ties.json", R"({"*": 0.5})");
    const auto tie = w.run("det-tie", w.dir / "ties.json");
    const auto tie_res = nlohmann::json::parse(testing::read_file(w.dir / "det-tie" / "results.json"));
    const bool tie_ok = tie.selection.best == manifest[0]["script_id"] && tie.selection.best == expected_winner(tie_res, manifest);

    // scripted scores: the first candidate crashes and the rest tie
    nlohmann::json scripted = {{"*", 0.7}, {manifest[0]["script_id"].get<std::string>(), "crash"}};
    testing::write_file(w.dir / "crash.json", scripted.dump());
    const auto cr = w.run("det-crash", w.dir / "crash.json");
    const auto cr_res = nlohmann::json::parse(testing::read_file(w.dir / "det-crash" / "results.json"));
    const bool crash_ok = manifest.size() > 1 && cr.selection.best == manifest[1]["script_id"] &&
                          cr.selection.best == expected_winner(cr_res, manifest);

    return {scripts_equal && skeletons_equal && selection_equal && max_ok && tie_ok && crash_ok,
            std::to_string(files_a.size() - 1) + " scripts byte-identical: " + (scripts_equal ? "yes" : "no") +
                ", selection identical: " + (selection_equal ? "yes" : "no") + ", winner " + a.selection.best +
                (max_ok ? " is the max" : " is NOT the max") + ", tie-break " + (tie_ok ? "ok" : "wrong") +
                ", crash skip " + (crash_ok ? "ok" : "wrong")};
}

/// Empty string when `c` honours the contract, else the first violation.
std::string contract_violation(const CandidatePipeline& c, const Dataset& schema, const OrderDag& dag) {
    std::size_t result_lines = 0;
    std::istringstream lines(c.source);
    const std::regex list_line(R"(^_[A-Z_]+ = \[(.*)\]$)");
    const std::regex quoted(R"('([^'\\]*)')");
    std::set<std::string> names;
    for (const auto& col : schema.columns) names.insert(col.name);
    for (std::string line; std::getline(lines, line);) {
        result_lines += line.find("RESULT:") != std::string::npos;
        std::smatch m;
        if (!std::regex_match(line, m, list_line)) continue;
        const std::string body = m[1];
        for (std::sregex_iterator it(body.begin(), body.end(), quoted), end; it != end; ++it)
            if (!names.count((*it)[1])) return "unknown column '" + (*it)[1].str() + "'";
    }
    if (result_lines != 1) return std::to_string(result_lines) + " RESULT: lines";

    // section order: load, pre-detach FE, detach, post-detach FE, model, evaluation
    const auto& sec = c.sections;
    if (sec.size() < 4 || sec.front() != "# LOAD DATA" || sec[sec.size() - 2] != "# MODEL" || sec.back() != "# EVALUATION")
        return "bad section frame";
    std::size_t pos = 0;
    for (const auto& s : sec) {
        pos = c.source.find(s + "\n", pos);
        if (pos == std::string::npos) return "section '" + s + "' out of order";
    }
    std::vector<std::string> fe_labels;
    bool detached = false;
    for (std::size_t i = 1; i + 2 < sec.size(); ++i) {
        if (sec[i] == "# DETACH TARGET") {
            if (detached) return "two detach sections";
            detached = true;
            continue;
        }
        auto label = sec[i].substr(sec[i].find(": ") + 2);
        label = label.substr(0, label.find(' '));
        const auto* info = Taxonomy::builtin().fe(label);
        if (!info) return "unknown section " + sec[i];
        if ((info->stage == Stage::PostDetach) != detached) return label + " on the wrong side of detach";
        if (fe_labels.empty() || fe_labels.back() != label) fe_labels.push_back(label);
    }
    if (!detached) return "no detach section";
    std::vector<std::string> expected;
    for (const auto& f : c.skeleton.fe_ordered) expected.push_back(f.label);
    if (fe_labels != expected) return "sections differ from the ordered skeleton";
    for (std::size_t i = 0; i < fe_labels.size(); ++i)
        for (std::size_t j = i + 1; j < fe_labels.size(); ++j)
            if (dag.reachable(fe_labels[j], fe_labels[i])) return fe_labels[j] + " must precede " + fe_labels[i];
    return {};
}

Outcome static_contract() {
    const auto& w = workspace();
    const auto& bundle = planted_bundle().result.bundle;
    const auto& dag = bundle.mined_dag.nodes().empty() ? OrderDag::builtin_default() : bundle.mined_dag;
    std::size_t checked = 0;
    std::string violation;

    // candidates from the determinism runs
    const auto schema = load_csv(w.train, {"label"});
    const auto seeding = seed_pipelines(bundle, schema, 3);
    auto cands = build_candidates(seeding.skeletons, dag, TemplatePack::builtin(), HyperparamCatalog::builtin(), schema,
                                  Taxonomy::builtin(), bundle.fe_frequency);
    for (const auto& c : cands) {
        if (testing::read_file(w.dir / "det-a" / "candidates" / (c.script_id + ".py")) != c.source)
            violation = c.script_id + " differs from the emitted file";
        if (auto v = contract_violation(c, schema, dag); !v.empty() && violation.empty()) violation = c.script_id + ": " + v;
        ++checked;
    }

    // candidates for random datasets
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 60 && violation.empty(); ++trial) {
        const auto d = testing::random_dataset(rng);
        try {
            const auto s = seed_pipelines(bundle, d, 3);
            for (const auto& c : build_candidates(s.skeletons, dag, TemplatePack::builtin(), HyperparamCatalog::builtin(),
                                                  d, Taxonomy::builtin(), bundle.fe_frequency)) {
                if (auto v = contract_violation(c, d, dag); !v.empty()) {
                    violation = "random dataset " + std::to_string(trial) + ", " + c.script_id + ": " + v;
                    break;
                }
                ++checked;
            }
        } catch (const std::exception& e) {
            violation = "random dataset " + std::to_string(trial) + ": " + e.what();
        }
    }
    return {violation.empty(), std::to_string(checked) + " candidates checked" + (violation.empty() ? "" : "; " + violation)};
}

}  // namespace

int main() {
    spdlog::set_level(spdlog::level::err);
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"statistics oracles", statistics_oracles},
        {"meta-feature contract", meta_feature_contract},
        {"planted-rule recovery", planted_rule_recovery},
        {"relevant-column inference", relevant_columns},
        {"golden ordered skeleton", golden_ordered_skeleton},
        {"ordering property", ordering_property},
        {"determinism", determinism},
        {"emitted-script static contract", static_contract},
    };
    int failures = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::printf("%s  %-32s %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
