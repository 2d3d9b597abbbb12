#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pipesynth/bundle.hpp"
#include "pipesynth/error.hpp"
#include "pipesynth/validation.hpp"

namespace pipesynth::app {

namespace fs = std::filesystem;

enum ExitCode : int { kSuccess = 0, kSynthesisFailed = 1, kUsageError = 2, kDataError = 3 };

int exit_code_for(ErrorCode code);

struct TrainOptions {
    fs::path corpus;
    fs::path out;
    std::uint64_t seed = 0;
    double pb_threshold = 0.1;
    double dag_min_support = 0.8;
    double fe_cutoff = 0.5;
};

/// Trains a bundle and writes it to `out` plus `<out stem>.report.json`.
TrainingResult train(const TrainOptions& opt);

struct SynthesizeOptions {
    std::optional<fs::path> bundle;
    std::optional<fs::path> corpus;
    fs::path train;
    std::optional<fs::path> test;
    std::vector<std::string> targets;
    std::optional<TaskKind> task;
    std::size_t k = 3;
    std::optional<double> fe_cutoff;
    double pb_threshold = 0.1;
    double dag_min_support = 0.8;
    /// "mined" (bundle DAG, default asset when empty) or "default".
    std::string dag = "mined";
    std::uint64_t seed = 0;
    ExecutorConfig exec;
    fs::path out = "pipesynth-out";
    std::optional<std::string> metric;
    char delimiter = ',';
};

struct SynthesisSummary {
    std::size_t candidates = 0;
    SelectionOutcome selection;
    std::string best_script;

    nlohmann::ordered_json to_json() const;
};

/// Seeding, instantiation and validation into `opt.out`:
///   meta_features.json, skeletons.json, candidates/, runs/, results.json,
///   best_pipeline.py, final/ (with a test set) and summary.json.
SynthesisSummary synthesize(const SynthesizeOptions& opt);

}  // namespace pipesynth::app
