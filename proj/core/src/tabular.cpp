#include "pipesynth/tabular.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "pipesynth/csv.hpp"
#include "pipesynth/error.hpp"

namespace pipesynth {

std::string_view to_string(ColumnKind kind) {
    switch (kind) {
        case ColumnKind::Numeric: return "numeric";
        case ColumnKind::NumberCategory: return "number_category";
        case ColumnKind::StringCategory: return "string_category";
        case ColumnKind::Text: return "text";
        case ColumnKind::Date: return "date";
    }
    return "unknown";
}

std::string_view to_string(TaskKind task) {
    return task == TaskKind::Classification ? "classification" : "regression";
}

std::string_view task_code(TaskKind task) { return task == TaskKind::Classification ? "C" : "R"; }

std::optional<TaskKind> parse_task(std::string_view text) {
    if (text == "C" || text == "c" || text == "classification") return TaskKind::Classification;
    if (text == "R" || text == "r" || text == "regression") return TaskKind::Regression;
    return std::nullopt;
}

std::size_t Column::missing_count() const {
    return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](const Cell& c) { return is_missing(c); }));
}

std::vector<double> Column::numbers() const {
    std::vector<double> out;
    out.reserve(cells.size());
    for (const auto& c : cells)
        if (const double* v = std::get_if<double>(&c)) out.push_back(*v);
    return out;
}

const Column* Dataset::find(std::string_view name) const {
    for (const auto& c : columns)
        if (c.name == name) return &c;
    return nullptr;
}

bool Dataset::is_target(std::string_view name) const {
    return std::find(target_names.begin(), target_names.end(), name) != target_names.end();
}

std::vector<const Column*> Dataset::features() const {
    std::vector<const Column*> out;
    for (const auto& c : columns)
        if (!is_target(c.name)) out.push_back(&c);
    return out;
}

const Column& Dataset::primary_target() const {
    const Column* c = target_names.empty() ? nullptr : find(target_names.front());
    if (!c) throw Error(ErrorCode::MissingTarget, "dataset has no target column");
    return *c;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
    Dataset out;
    out.n_rows = rows.size();
    out.target_names = target_names;
    out.task = task;
    out.columns.reserve(columns.size());
    for (const auto& col : columns) {
        Column c{col.name, col.kind, {}};
        c.cells.reserve(rows.size());
        for (std::size_t r : rows) c.cells.push_back(col.cells.at(r));
        out.columns.push_back(std::move(c));
    }
    return out;
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
           });
}

// Reads exactly `n` digits at `pos`.
bool digits(std::string_view s, std::size_t pos, std::size_t n, int& value) {
    if (pos + n > s.size()) return false;
    value = 0;
    for (std::size_t i = pos; i < pos + n; ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
        value = value * 10 + (s[i] - '0');
    }
    return true;
}

bool valid_ymd(int y, int m, int d) {
    if (m < 1 || m > 12 || d < 1 || d > 31) return false;
    return y >= 1 && std::chrono::year_month_day{std::chrono::year{y}, std::chrono::month{unsigned(m)}, std::chrono::day{unsigned(d)}}.ok();
}

// HH:MM[:SS[.frac]][Z|+HH:MM|-HH:MM]
bool time_suffix(std::string_view s) {
    int h = 0, m = 0, sec = 0;
    if (!digits(s, 0, 2, h) || s.size() < 5 || s[2] != ':' || !digits(s, 3, 2, m)) return false;
    if (h > 23 || m > 59) return false;
    std::size_t pos = 5;
    if (pos < s.size() && s[pos] == ':') {
        if (!digits(s, pos + 1, 2, sec) || sec > 60) return false;
        pos += 3;
        if (pos < s.size() && s[pos] == '.') {
            ++pos;
            std::size_t start = pos;
            while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
            if (pos == start) return false;
        }
    }
    if (pos == s.size()) return true;
    if (s[pos] == 'Z') return pos + 1 == s.size();
    if (s[pos] == '+' || s[pos] == '-') {
        int oh = 0, om = 0;
        return s.size() == pos + 6 && digits(s, pos + 1, 2, oh) && s[pos + 3] == ':' && digits(s, pos + 4, 2, om);
    }
    return false;
}

}  // namespace

bool looks_like_date(std::string_view raw) {
    std::string_view s = trim(raw);
    int y = 0, m = 0, d = 0;
    // ISO 8601: YYYY-MM-DD[(T| )time]
    if (s.size() >= 10 && digits(s, 0, 4, y) && s[4] == '-' && digits(s, 5, 2, m) && s[7] == '-' &&
        digits(s, 8, 2, d)) {
        if (!valid_ymd(y, m, d)) return false;
        if (s.size() == 10) return true;
        return (s[10] == 'T' || s[10] == ' ') && time_suffix(s.substr(11));
    }
    // MM/DD/YYYY
    if (s.size() == 10 && digits(s, 0, 2, m) && s[2] == '/' && digits(s, 3, 2, d) && s[5] == '/' &&
        digits(s, 6, 4, y))
        return valid_ymd(y, m, d);
    // DD-MM-YYYY
    if (s.size() == 10 && digits(s, 0, 2, d) && s[2] == '-' && digits(s, 3, 2, m) && s[5] == '-' &&
        digits(s, 6, 4, y))
        return valid_ymd(y, m, d);
    return false;
}

bool is_missing_marker(std::string_view raw, const CsvOptions& options) {
    std::string_view s = trim(raw);
    return std::any_of(options.missing_markers.begin(), options.missing_markers.end(),
                       [&](const std::string& marker) { return iequals(s, marker); });
}

std::optional<double> parse_number(std::string_view raw) {
    std::string_view s = trim(raw);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return std::nullopt;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(value)) return std::nullopt;
    return value;
}

ColumnKind infer_column_kind(std::span<const std::string> raw, const CsvOptions& options) {
    const auto& t = options.kinds;
    std::vector<std::string_view> present;
    present.reserve(raw.size());
    for (const auto& cell : raw)
        if (!is_missing_marker(cell, options)) present.push_back(trim(cell));
    if (present.empty()) {
        spdlog::warn("column with only missing cells; treating as string category");
        return ColumnKind::StringCategory;
    }
    const double n = static_cast<double>(present.size());

    std::size_t dates = static_cast<std::size_t>(std::count_if(present.begin(), present.end(), looks_like_date));
    if (static_cast<double>(dates) >= t.date_min_match_ratio * n) return ColumnKind::Date;

    std::unordered_set<double> numeric_distinct;
    bool all_numeric = true;
    for (auto s : present) {
        auto v = parse_number(s);
        if (!v) {
            all_numeric = false;
            break;
        }
        numeric_distinct.insert(*v == 0.0 ? 0.0 : *v);  // fold -0 into 0
    }
    if (all_numeric) {
        const std::size_t distinct = numeric_distinct.size();
        if (distinct <= t.category_max_distinct || static_cast<double>(distinct) / n <= t.category_max_distinct_ratio)
            return ColumnKind::NumberCategory;
        return ColumnKind::Numeric;
    }

    std::unordered_set<std::string_view> distinct(present.begin(), present.end());
    double tokens = 0.0;
    for (auto s : present) {
        bool in_token = false;
        for (char c : s) {
            bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
            if (!space && !in_token) tokens += 1.0;
            in_token = !space;
        }
    }
    if (tokens / n > t.text_min_mean_tokens || static_cast<double>(distinct.size()) / n > t.text_min_distinct_ratio)
        return ColumnKind::Text;
    return ColumnKind::StringCategory;
}

Dataset make_dataset(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& records,
                     const std::vector<std::string>& target_names, std::optional<TaskKind> task_hint,
                     const CsvOptions& options) {
    if (header.empty() || records.empty()) throw Error(ErrorCode::EmptyFile, "no header or no data rows");
    {
        std::unordered_set<std::string> seen;
        for (const auto& name : header)
            if (!seen.insert(name).second) throw Error(ErrorCode::DuplicateColumn, "column '" + name + "' appears twice");
    }
    if (target_names.empty()) throw Error(ErrorCode::MissingTarget, "no target column given");
    for (const auto& t : target_names)
        if (std::find(header.begin(), header.end(), t) == header.end())
            throw Error(ErrorCode::MissingTarget, "target column '" + t + "' not in header");
    for (std::size_t r = 0; r < records.size(); ++r)
        if (records[r].size() != header.size())
            throw Error(ErrorCode::RaggedRows, "data row " + std::to_string(r + 1) + " has " +
                                                   std::to_string(records[r].size()) + " fields, header has " +
                                                   std::to_string(header.size()));

    Dataset d;
    d.n_rows = records.size();
    d.target_names = target_names;
    std::vector<std::string> raw(records.size());
    for (std::size_t c = 0; c < header.size(); ++c) {
        for (std::size_t r = 0; r < records.size(); ++r) raw[r] = records[r][c];
        Column col{header[c], infer_column_kind(raw, options), {}};
        col.cells.reserve(raw.size());
        for (const auto& cell : raw) {
            if (is_missing_marker(cell, options))
                col.cells.emplace_back(std::monostate{});
            else if (col.number_valued())
                col.cells.emplace_back(*parse_number(cell));
            else
                col.cells.emplace_back(cell);
        }
        d.columns.push_back(std::move(col));
    }

    if (task_hint) {
        if (*task_hint == TaskKind::Regression)
            for (const auto& t : target_names)
                if (!d.find(t)->number_valued())
                    throw Error(ErrorCode::InvalidTask, "regression target '" + t + "' is not numeric");
        d.task = *task_hint;
    } else {
        bool all_numeric = std::all_of(target_names.begin(), target_names.end(),
                                       [&](const std::string& t) { return d.find(t)->kind == ColumnKind::Numeric; });
        d.task = all_numeric ? TaskKind::Regression : TaskKind::Classification;
    }
    return d;
}

Dataset load_csv(const std::filesystem::path& path, const std::vector<std::string>& target_names,
                 std::optional<TaskKind> task_hint, const CsvOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
    auto parsed = csv::read(in, options.delimiter);
    if (parsed.empty()) throw Error(ErrorCode::EmptyFile, "'" + path.string() + "' is empty");
    std::vector<std::string> header = std::move(parsed.front().fields);
    std::vector<std::vector<std::string>> records;
    records.reserve(parsed.size() - 1);
    for (std::size_t i = 1; i < parsed.size(); ++i) {
        if (parsed[i].fields.size() != header.size())
            throw Error(ErrorCode::RaggedRows, path.string() + ":" + std::to_string(parsed[i].line) + ": " +
                                                   std::to_string(parsed[i].fields.size()) + " fields, header has " +
                                                   std::to_string(header.size()));
        records.push_back(std::move(parsed[i].fields));
    }
    if (records.empty()) throw Error(ErrorCode::EmptyFile, "'" + path.string() + "' has a header but no rows");
    return make_dataset(header, records, target_names, task_hint, options);
}

std::string format_number(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

void write_csv(const Dataset& d, const std::filesystem::path& path, char delimiter) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
    std::vector<std::string> fields;
    for (const auto& c : d.columns) fields.push_back(c.name);
    csv::write_record(out, fields, delimiter);
    for (std::size_t r = 0; r < d.n_rows; ++r) {
        fields.clear();
        for (const auto& c : d.columns) {
            const Cell& cell = c.cells[r];
            if (const double* v = std::get_if<double>(&cell))
                fields.push_back(format_number(*v));
            else if (const std::string* s = std::get_if<std::string>(&cell))
                fields.push_back(*s);
            else
                fields.emplace_back();
        }
        csv::write_record(out, fields, delimiter);
    }
}

RowSplit split_indices(std::size_t n, double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw Error(ErrorCode::InvalidArgument, "split ratio must lie in (0, 1)");
    if (n < 2) throw Error(ErrorCode::DegenerateSplit, "need at least 2 rows to split");
    const auto first_size = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
    if (first_size == 0 || first_size == n)
        throw Error(ErrorCode::DegenerateSplit,
                    "ratio " + format_number(ratio) + " on " + std::to_string(n) + " rows leaves one side empty");
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    RowSplit s;
    s.first.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(first_size));
    s.second.assign(idx.begin() + static_cast<std::ptrdiff_t>(first_size), idx.end());
    return s;
}

std::pair<Dataset, Dataset> split_rows(const Dataset& d, double ratio, std::uint64_t seed) {
    auto s = split_indices(d.n_rows, ratio, seed);
    return {d.subset(s.first), d.subset(s.second)};
}

}  // namespace pipesynth
