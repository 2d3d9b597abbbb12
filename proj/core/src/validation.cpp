#include "pipesynth/validation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

#include <spdlog/spdlog.h>

#include "pipesynth/error.hpp"
#include "pipesynth/process.hpp"

namespace pipesynth {

namespace fs = std::filesystem;

namespace {

void replace_all(std::string& s, std::string_view from, const std::string& to) {
    for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
        s.replace(pos, from.size(), to);
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + p.string());
    out << content;
}

std::string class_key(const Cell& c) {
    if (const auto* d = std::get_if<double>(&c)) return format_number(*d);
    if (const auto* s = std::get_if<std::string>(&c)) return *s;
    return {};
}

EvalResult execute(const std::string& script_id, const std::string& source, const fs::path& workdir,
                   const ExecutorConfig& exec, double timeout, const fs::path& log_base) {
    fs::create_directories(workdir);
    const auto script = workdir / (script_id + ".py");
    write_file(script, source);
    const auto out_log = workdir / "stdout.log";
    const auto err_log = workdir / "stderr.log";

    EvalResult r;
    r.script_id = script_id;
    r.log_path = out_log.lexically_relative(log_base).generic_string();
    if (timeout <= 0.0) {
        write_file(out_log, "");
        write_file(err_log, "time budget exhausted before start\n");
        r.status = EvalStatus::Timeout;
        return r;
    }
    const auto p = run_shell(exec.command_for(fs::absolute(script), fs::absolute(workdir)), workdir, timeout, out_log,
                             err_log);
    r.duration = p.duration;
    const auto score = parse_result_marker(read_file(out_log));
    r.status = classify_run(p.timed_out, p.exit_code, p.signaled, score);
    if (r.status == EvalStatus::Ok) r.score = score;
    return r;
}

}  // namespace

void ExecutorConfig::validate() const {
    if (command_template.find("{script}") == std::string::npos)
        throw Error(ErrorCode::InvalidExecutor, "command template lacks {script}");
    if (command_template.find("{workdir}") == std::string::npos)
        throw Error(ErrorCode::InvalidExecutor, "command template lacks {workdir}");
    if (!(timeout > 0.0)) throw Error(ErrorCode::InvalidExecutor, "timeout must be positive");
    if (!(total_budget > 0.0)) throw Error(ErrorCode::InvalidExecutor, "total budget must be positive");
    if (max_parallel == 0) throw Error(ErrorCode::InvalidExecutor, "max_parallel must be at least 1");
}

std::string ExecutorConfig::command_for(const fs::path& script, const fs::path& workdir) const {
    auto cmd = command_template;
    replace_all(cmd, "{script}", shell_quote(script.string()));
    replace_all(cmd, "{workdir}", shell_quote(workdir.string()));
    return cmd;
}

std::string_view to_string(EvalStatus s) {
    switch (s) {
        case EvalStatus::Ok: return "Ok";
        case EvalStatus::Crash: return "Crash";
        case EvalStatus::Timeout: return "Timeout";
        case EvalStatus::ParseFailure: return "ParseFailure";
    }
    return "ParseFailure";
}

std::optional<EvalStatus> parse_eval_status(std::string_view s) {
    for (auto st : {EvalStatus::Ok, EvalStatus::Crash, EvalStatus::Timeout, EvalStatus::ParseFailure})
        if (to_string(st) == s) return st;
    return std::nullopt;
}

nlohmann::ordered_json EvalResult::to_json() const {
    nlohmann::ordered_json j;
    j["script_id"] = script_id;
    j["status"] = to_string(status);
    j["score"] = score ? nlohmann::ordered_json(*score) : nlohmann::ordered_json(nullptr);
    j["duration"] = duration;
    j["log_path"] = log_path;
    return j;
}

EvalResult EvalResult::from_json(const nlohmann::json& j) {
    EvalResult r;
    try {
        r.script_id = j.at("script_id").get<std::string>();
        auto st = parse_eval_status(j.at("status").get<std::string>());
        if (!st) throw Error(ErrorCode::SchemaError, "unknown status in result for " + r.script_id);
        r.status = *st;
        if (j.contains("score") && !j["score"].is_null()) r.score = j["score"].get<double>();
        r.duration = j.value("duration", 0.0);
        r.log_path = j.value("log_path", std::string());
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SchemaError, std::string("result: ") + e.what());
    }
    if (r.score.has_value() != (r.status == EvalStatus::Ok))
        throw Error(ErrorCode::SchemaError, "result for " + r.script_id + ": score must be present iff status is Ok");
    return r;
}

std::optional<double> parse_result_marker(std::string_view text) {
    std::string_view last;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        auto line = trim(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
        if (!line.empty()) last = line;
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    constexpr std::string_view marker = "RESULT:";
    if (!last.starts_with(marker)) return std::nullopt;
    const std::string number(trim(last.substr(marker.size())));
    if (number.empty()) return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(number.c_str(), &end);
    if (end != number.c_str() + number.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

EvalStatus classify_run(bool timed_out, int exit_code, bool signaled, const std::optional<double>& score) {
    if (timed_out) return EvalStatus::Timeout;
    if (signaled || exit_code != 0) return EvalStatus::Crash;
    if (!score) return EvalStatus::ParseFailure;
    return EvalStatus::Ok;
}

EvalResult eval_result_from_harness_report(const nlohmann::json& report, const std::string& script_id,
                                           const std::string& log_path) {
    nlohmann::json j;
    try {
        j = {{"script_id", script_id},
             {"status", report.at("status")},
             {"score", report.contains("score") ? report["score"] : nlohmann::json(nullptr)},
             {"duration", report.at("duration")},
             {"log_path", log_path}};
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SchemaError, std::string("harness report: ") + e.what());
    }
    return EvalResult::from_json(j);
}

RowSplit internal_split_indices(const Dataset& train, std::uint64_t seed) {
    if (train.n_rows < 8)
        throw Error(ErrorCode::DegenerateSplit,
                    "need at least 8 training rows for an internal split, got " + std::to_string(train.n_rows));
    RowSplit s;
    bool stratify = false;
    std::map<std::string, std::vector<std::size_t>> classes;
    if (train.task == TaskKind::Classification) {
        const auto& target = train.primary_target();
        for (std::size_t i = 0; i < train.n_rows; ++i) classes[class_key(target.cells[i])].push_back(i);
        stratify = classes.size() > 1 && std::all_of(classes.begin(), classes.end(),
                                                     [](const auto& kv) { return kv.second.size() >= 4; });
    }
    if (stratify) {
        std::mt19937_64 rng(seed);
        // Largest-remainder allocation keeps the validation total at round(n/4).
        const auto total = static_cast<std::size_t>(std::llround(0.25 * static_cast<double>(train.n_rows)));
        std::vector<std::vector<std::size_t>*> groups;
        std::vector<std::size_t> quota;
        std::vector<double> remainder;
        std::size_t assigned = 0;
        for (auto& [label, rows] : classes) {
            std::shuffle(rows.begin(), rows.end(), rng);
            const double exact = 0.25 * static_cast<double>(rows.size());
            groups.push_back(&rows);
            quota.push_back(static_cast<std::size_t>(std::floor(exact)));
            remainder.push_back(exact - std::floor(exact));
            assigned += quota.back();
        }
        std::vector<std::size_t> by_remainder(groups.size());
        std::iota(by_remainder.begin(), by_remainder.end(), std::size_t{0});
        std::stable_sort(by_remainder.begin(), by_remainder.end(),
                         [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
        for (std::size_t i = 0; assigned < total && i < by_remainder.size(); ++i, ++assigned) ++quota[by_remainder[i]];
        for (std::size_t g = 0; g < groups.size(); ++g) {
            const auto& rows = *groups[g];
            const auto valid = static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(quota[g], 1, rows.size() - 1));
            s.second.insert(s.second.end(), rows.begin(), rows.begin() + valid);
            s.first.insert(s.first.end(), rows.begin() + valid, rows.end());
        }
    } else {
        s = split_indices(train.n_rows, 0.75, seed);
    }
    std::sort(s.first.begin(), s.first.end());
    std::sort(s.second.begin(), s.second.end());
    return s;
}

std::pair<Dataset, Dataset> internal_split(const Dataset& train, std::uint64_t seed) {
    auto s = internal_split_indices(train, seed);
    return {train.subset(s.first), train.subset(s.second)};
}

std::vector<EvalResult> run_candidates(const std::vector<CandidatePipeline>& cands, const Dataset& inner_train,
                                       const Dataset& inner_valid, const fs::path& root, const ExecutorConfig& exec) {
    exec.validate();
    fs::create_directories(root);
    const auto data_dir = root / "_data";
    fs::create_directories(data_dir);
    write_csv(inner_train, data_dir / "training.csv");
    write_csv(inner_valid, data_dir / "test.csv");

    const auto start = std::chrono::steady_clock::now();
    std::vector<EvalResult> results(cands.size());
    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;
    auto worker = [&] {
        for (auto i = next++; i < cands.size(); i = next++) {
            const auto& c = cands[i];
            const auto workdir = root / c.script_id;
            const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            EvalResult r;
            try {
                fs::create_directories(workdir);
                for (const char* f : {"training.csv", "test.csv"})
                    fs::copy_file(data_dir / f, workdir / f, fs::copy_options::overwrite_existing);
                r = execute(c.script_id, c.source, workdir, exec, std::min(exec.timeout, exec.total_budget - elapsed),
                            root.parent_path());
            } catch (const std::exception& e) {
                r.script_id = c.script_id;
                r.status = EvalStatus::Crash;
                std::lock_guard lock(log_mutex);
                spdlog::error("{}: {}", c.script_id, e.what());
            }
            std::lock_guard lock(log_mutex);
            if (r.score)
                spdlog::info("{}: {} score={}", r.script_id, to_string(r.status), format_number(*r.score));
            else
                spdlog::warn("{}: {} (see {})", r.script_id, to_string(r.status), r.log_path);
            results[i] = std::move(r);
        }
    };
    const auto n_threads = std::min(exec.max_parallel, std::max<std::size_t>(cands.size(), 1));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return results;
}

nlohmann::ordered_json SelectionOutcome::to_json() const {
    nlohmann::ordered_json j;
    j["best"] = best;
    j["validation_score"] = validation_score;
    j["final_test_score"] = final_test_score ? nlohmann::ordered_json(*final_test_score) : nlohmann::ordered_json();
    if (final_log_path) j["final_log_path"] = *final_log_path;
    j["results"] = nlohmann::ordered_json::array();
    for (const auto& r : all_results) j["results"].push_back(r.to_json());
    return j;
}

SelectionOutcome select_best(const std::vector<EvalResult>& results, const std::vector<CandidatePipeline>& cands) {
    if (results.empty()) throw Error(ErrorCode::InvalidArgument, "no results to select from");
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < cands.size(); ++i) index.emplace(cands[i].script_id, i);

    std::vector<std::pair<std::size_t, const EvalResult*>> ordered;
    for (const auto& r : results) {
        auto it = index.find(r.script_id);
        if (it == index.end()) throw Error(ErrorCode::InvalidArgument, "result for unknown candidate " + r.script_id);
        ordered.emplace_back(it->second, &r);
    }
    std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return a.second->script_id < b.second->script_id;
    });

    SelectionOutcome out;
    const EvalResult* best = nullptr;
    std::size_t best_i = 0;
    auto better = [&](std::size_t i, const EvalResult& r) {
        if (*r.score != *best->score) return *r.score > *best->score;
        const auto& a = cands[i];
        const auto& b = cands[best_i];
        if (a.model_rank != b.model_rank) return a.model_rank < b.model_rank;
        if (a.hyperparam_index != b.hyperparam_index) return a.hyperparam_index < b.hyperparam_index;
        return a.script_id < b.script_id;
    };
    for (const auto& [i, r] : ordered) {
        out.all_results.push_back(*r);
        if (r->status != EvalStatus::Ok || !r->score) continue;
        if (!best || better(i, *r)) {
            best = r;
            best_i = i;
        }
    }
    if (!best) {
        std::string detail;
        for (const auto& r : out.all_results)
            detail += "\n  " + r.script_id + ": " + std::string(to_string(r.status)) + " (" + r.log_path + ")";
        throw Error(ErrorCode::AllCandidatesFailed, std::to_string(results.size()) + " candidates failed:" + detail);
    }
    out.best = best->script_id;
    out.best_index = best_i;
    out.validation_score = *best->score;
    return out;
}

EvalResult finalize(const CandidatePipeline& best, const Dataset& train, const Dataset& test, const fs::path& dir,
                    const ExecutorConfig& exec) {
    exec.validate();
    fs::create_directories(dir);
    write_csv(train, dir / "training.csv");
    write_csv(test, dir / "test.csv");
    auto r = execute(best.script_id, best.source, dir, exec, exec.timeout, dir.parent_path());
    if (r.status != EvalStatus::Ok)
        throw Error(ErrorCode::FinalizeFailed,
                    best.script_id + " ended with " + std::string(to_string(r.status)) + "; see " + r.log_path);
    return r;
}

}  // namespace pipesynth
