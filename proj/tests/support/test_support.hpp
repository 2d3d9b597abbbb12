#pragma once

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pipesynth/tabular.hpp"

namespace testing {

namespace fs = std::filesystem;

/// Directory removed on scope exit.
class TempDir {
  public:
    TempDir() {
        std::string tmpl = (fs::temp_directory_path() / "pipesynth-test-XXXXXX").string();
        if (!::mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
        path_ = tmpl;
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

  private:
    fs::path path_;
};

inline std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

inline pipesynth::Dataset frame(const std::vector<std::string>& header,
                                const std::vector<std::vector<std::string>>& rows,
                                const std::vector<std::string>& targets,
                                std::optional<pipesynth::TaskKind> task = std::nullopt) {
    return pipesynth::make_dataset(header, rows, targets, task);
}

/// 120 rows: A and B numeric with gaps, C string-categorical, D clean numeric,
/// binary string target with a 75/25 split.
inline pipesynth::Dataset mixed_classification(std::uint64_t seed = 1, std::size_t n = 120) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<std::vector<std::string>> rows;
    const char* colors[] = {"red", "green", "blue"};
    for (std::size_t i = 0; i < n; ++i) {
        const double a = normal(rng), b = 10.0 + 3.0 * normal(rng), d = normal(rng);
        const std::string c = colors[rng() % 3];
        const bool positive = a + (c == "red" ? 1.0 : 0.0) > 1.0;
        rows.push_back({i % 7 == 3 ? "" : pipesynth::format_number(a), i % 11 == 5 ? "NA" : pipesynth::format_number(b), c,
                        pipesynth::format_number(d), positive ? "yes" : "no"});
    }
    return frame({"A", "B", "C", "D", "label"}, rows, {"label"}, pipesynth::TaskKind::Classification);
}

/// Random mixed-kind dataset: numeric (normal, exponential, uniform, Poisson
/// counts), integer codes, string categories, free text and dates, each
/// column optionally with gaps; the last column is the target.
inline pipesynth::Dataset random_dataset(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> pick(0, 6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::exponential_distribution<double> expo(1.0);
    std::poisson_distribution<int> poisson(3.0);
    const std::size_t n = 20 + rng() % 150;
    const std::size_t n_cols = 1 + rng() % 7;
    static const char* words[] = {"alpha", "beta", "gamma", "delta", "omega", "sigma", "kappa", "theta"};

    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows(n);
    for (std::size_t c = 0; c < n_cols; ++c) {
        const int kind = pick(rng);
        const double gap = u(rng) < 0.4 ? 0.15 : 0.0;
        header.push_back("col" + std::to_string(c));
        for (std::size_t r = 0; r < n; ++r) {
            std::string cell;
            switch (kind) {
                case 0: cell = pipesynth::format_number(normal(rng) * 5 + 2); break;
                case 1: cell = pipesynth::format_number(expo(rng) * 100); break;
                case 2: cell = pipesynth::format_number(u(rng)); break;
                case 3: cell = std::to_string(poisson(rng)); break;
                case 4: cell = words[rng() % 4]; break;
                case 5:
                    cell = std::string(words[rng() % 8]) + " " + words[rng() % 8] + " " + words[rng() % 8] + " " +
                           words[rng() % 8] + " " + std::to_string(rng() % 1000);
                    break;
                default: {
                    char buf[16];
                    std::snprintf(buf, sizeof buf, "20%02d-%02d-%02d", static_cast<int>(rng() % 30),
                                  static_cast<int>(1 + rng() % 12), static_cast<int>(1 + rng() % 28));
                    cell = buf;
                }
            }
            if (r > 0 && u(rng) < gap) cell = "";
            rows[r].push_back(cell);
        }
    }
    const bool classification = u(rng) < 0.6;
    header.push_back("target");
    for (std::size_t r = 0; r < n; ++r)
        rows[r].push_back(classification ? (u(rng) < 0.3 ? "pos" : "neg") : pipesynth::format_number(normal(rng) * 10));
    if (classification) {
        rows[0].back() = "pos";
        rows[1].back() = "neg";
    }
    return pipesynth::make_dataset(header, rows, {"target"},
                                   classification ? pipesynth::TaskKind::Classification : pipesynth::TaskKind::Regression);
}

/// Same dataset with its rows shuffled.
inline pipesynth::Dataset permuted(const pipesynth::Dataset& d, std::mt19937_64& rng) {
    std::vector<std::size_t> order(d.n_rows);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    return d.subset(order);
}

}  // namespace testing
