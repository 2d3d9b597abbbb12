#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace pipesynth {

enum class ColumnKind { Numeric, NumberCategory, StringCategory, Text, Date };
enum class TaskKind { Classification, Regression };

std::string_view to_string(ColumnKind kind);
std::string_view to_string(TaskKind task);
/// "C"/"R" as used in corpus files; also accepts the long names.
std::optional<TaskKind> parse_task(std::string_view text);
std::string_view task_code(TaskKind task);

/// A cell is Missing (monostate), a Number, or Text.
using Cell = std::variant<std::monostate, double, std::string>;

inline bool is_missing(const Cell& c) { return std::holds_alternative<std::monostate>(c); }

/// Numeric and NumberCategory columns hold only Missing|Number cells.
inline bool is_number_valued(ColumnKind kind) {
    return kind == ColumnKind::Numeric || kind == ColumnKind::NumberCategory;
}

struct Column {
    std::string name;
    ColumnKind kind = ColumnKind::StringCategory;
    std::vector<Cell> cells;

    bool number_valued() const { return is_number_valued(kind); }
    std::size_t missing_count() const;
    /// Non-missing numeric values in row order.
    std::vector<double> numbers() const;
};

struct Dataset {
    std::vector<Column> columns;
    std::size_t n_rows = 0;
    std::vector<std::string> target_names;
    TaskKind task = TaskKind::Classification;

    const Column* find(std::string_view name) const;
    bool is_target(std::string_view name) const;
    /// Non-target columns in file order.
    std::vector<const Column*> features() const;
    const Column& primary_target() const;
    Dataset subset(std::span<const std::size_t> rows) const;
};

/// Kind-inference cut-offs; the defaults classify low-cardinality codes as
/// categories and long free-form strings as text.
struct KindThresholds {
    std::size_t category_max_distinct = 20;
    double category_max_distinct_ratio = 0.05;
    double text_min_mean_tokens = 3.0;
    double text_min_distinct_ratio = 0.5;
    double date_min_match_ratio = 0.9;
};

struct CsvOptions {
    char delimiter = ',';
    /// Compared case-insensitively after trimming.
    std::vector<std::string> missing_markers{"", "NA", "NaN", "null"};
    KindThresholds kinds;
};

bool is_missing_marker(std::string_view raw, const CsvOptions& options = {});
std::optional<double> parse_number(std::string_view raw);
bool looks_like_date(std::string_view raw);

ColumnKind infer_column_kind(std::span<const std::string> raw, const CsvOptions& options = {});

/// Builds a typed dataset from a header and raw string records.
Dataset make_dataset(const std::vector<std::string>& header,
                     const std::vector<std::vector<std::string>>& records,
                     const std::vector<std::string>& target_names,
                     std::optional<TaskKind> task_hint = std::nullopt,
                     const CsvOptions& options = {});

Dataset load_csv(const std::filesystem::path& path,
                 const std::vector<std::string>& target_names,
                 std::optional<TaskKind> task_hint = std::nullopt,
                 const CsvOptions& options = {});

/// Shortest decimal text that parses back to the same double.
std::string format_number(double value);

void write_csv(const Dataset& d, const std::filesystem::path& path, char delimiter = ',');

struct RowSplit {
    std::vector<std::size_t> first;
    std::vector<std::size_t> second;
};

/// Seeded shuffle; `first` holds round(ratio * n) indices.
RowSplit split_indices(std::size_t n, double ratio, std::uint64_t seed);
std::pair<Dataset, Dataset> split_rows(const Dataset& d, double ratio, std::uint64_t seed);

}  // namespace pipesynth
