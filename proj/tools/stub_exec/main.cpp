// Stand-in executor: prints a scripted or hash-derived score instead of
// running the script.
//
//   pipesynth-stub-exec SCRIPT --workdir DIR [--scores FILE]
//
// FILE maps script ids (file stems) to a number, "crash", "timeout",
// "garbage" or "silent". Unlisted scripts score fnv1a(source) mod 10^4 / 10^4.
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pipesynth/corpus.hpp"
#include "pipesynth/tabular.hpp"

int main(int argc, char** argv) {
    CLI::App cli{"Scripted executor for pipeline candidates"};
    std::string script, workdir, scores_path;
    cli.add_option("script", script)->required();
    cli.add_option("--workdir", workdir);
    cli.add_option("--scores", scores_path);
    CLI11_PARSE(cli, argc, argv);

    std::ifstream in(script, std::ios::binary);
    if (!in) {
        std::cerr << "cannot read " << script << '\n';
        return 2;
    }
    std::ostringstream source;
    source << in.rdbuf();
    const auto id = std::filesystem::path(script).stem().string();

    nlohmann::json entry;
    if (!scores_path.empty()) {
        std::ifstream s(scores_path);
        if (!s) {
            std::cerr << "cannot read " << scores_path << '\n';
            return 2;
        }
        const auto scores = nlohmann::json::parse(s);
        if (scores.contains(id)) entry = scores[id];
        else if (scores.contains("*")) entry = scores["*"];
    }

    std::cout << "stub run of " << id << '\n';
    if (entry.is_string()) {
        const auto mode = entry.get<std::string>();
        if (mode == "crash") {
            std::cerr << "Traceback (most recent call last):\nRuntimeError: scripted crash\n";
            return 1;
        }
        if (mode == "timeout") {
            std::cout.flush();
            std::this_thread::sleep_for(std::chrono::hours(1));
            return 0;
        }
        if (mode == "garbage") {
            std::cout << "RESULT:not-a-number\n";
            return 0;
        }
        if (mode == "silent") return 0;
        std::cerr << "unknown scripted mode '" << mode << "'\n";
        return 2;
    }
    double score = entry.is_number() ? entry.get<double>()
                                     : static_cast<double>(pipesynth::fnv1a(source.str()) % 10000) / 10000.0;
    std::cout << score << '\n' << "RESULT:" << pipesynth::format_number(score) << '\n';
    return 0;
}
