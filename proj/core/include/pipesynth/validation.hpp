#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "pipesynth/instantiation.hpp"
#include "pipesynth/tabular.hpp"

namespace pipesynth {

struct ExecutorConfig {
    /// Shell command; `{script}` and `{workdir}` are replaced by quoted paths.
    std::string command_template = "cd {workdir} && python3 {script}";
    double timeout = 600.0;
    std::size_t max_parallel = 1;
    /// Wall-clock budget shared by all candidates of one run.
    double total_budget = 3600.0;

    /// Throws InvalidExecutor.
    void validate() const;
    std::string command_for(const std::filesystem::path& script, const std::filesystem::path& workdir) const;
};

enum class EvalStatus { Ok, Crash, Timeout, ParseFailure };
std::string_view to_string(EvalStatus s);
std::optional<EvalStatus> parse_eval_status(std::string_view s);

struct EvalResult {
    std::string script_id;
    EvalStatus status = EvalStatus::ParseFailure;
    std::optional<double> score;
    double duration = 0.0;
    std::string log_path;

    nlohmann::ordered_json to_json() const;
    /// Throws SchemaError, including when score presence disagrees with status.
    static EvalResult from_json(const nlohmann::json& j);
};

/// Score from the last non-empty stdout line when it reads `RESULT:<float>`.
std::optional<double> parse_result_marker(std::string_view stdout_text);

/// Classifies one execution. Timeout beats Crash beats ParseFailure.
EvalStatus classify_run(bool timed_out, int exit_code, bool signaled, const std::optional<double>& score);

/// Converts a report written by the reference executor
/// (`{"script","status","score","duration","stderr_tail"}`).
EvalResult eval_result_from_harness_report(const nlohmann::json& report, const std::string& script_id,
                                           const std::string& log_path);

/// 75:25 split; label-stratified for classification when every class has at
/// least 4 rows. Throws DegenerateSplit below 8 rows.
RowSplit internal_split_indices(const Dataset& train, std::uint64_t seed);
std::pair<Dataset, Dataset> internal_split(const Dataset& train, std::uint64_t seed);

/// Writes each script with `training.csv`/`test.csv` into `root/<script_id>/`
/// and runs it through the executor. Never throws for per-candidate failures.
std::vector<EvalResult> run_candidates(const std::vector<CandidatePipeline>& cands, const Dataset& inner_train,
                                       const Dataset& inner_valid, const std::filesystem::path& root,
                                       const ExecutorConfig& exec);

struct SelectionOutcome {
    std::string best;
    std::size_t best_index = 0;
    double validation_score = 0.0;
    std::vector<EvalResult> all_results;
    std::optional<double> final_test_score;
    std::optional<std::string> final_log_path;

    nlohmann::ordered_json to_json() const;
};

/// Max score among Ok results; ties go to lower model rank, then lower
/// hyperparameter index, then script id. Throws AllCandidatesFailed.
SelectionOutcome select_best(const std::vector<EvalResult>& results, const std::vector<CandidatePipeline>& cands);

/// Runs the winner once on the full training data against the held-out test
/// set in `dir`. Throws FinalizeFailed when the run is not Ok.
EvalResult finalize(const CandidatePipeline& best, const Dataset& train, const Dataset& test,
                    const std::filesystem::path& dir, const ExecutorConfig& exec);

}  // namespace pipesynth
