#include "pipesynth/csv.hpp"

#include <iterator>

namespace pipesynth::csv {

std::vector<Record> read(std::istream& in, char delimiter) {
    std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    std::size_t pos = 0;
    if (text.size() >= 3 && text.compare(0, 3, "\xEF\xBB\xBF") == 0) pos = 3;

    std::vector<Record> records;
    Record current;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;  // distinguishes an empty line from a record with one empty field
    std::size_t line = 1;
    current.line = line;

    auto end_field = [&] {
        current.fields.push_back(std::move(field));
        field.clear();
    };
    auto end_record = [&] {
        if (field_started || !current.fields.empty()) {
            end_field();
            records.push_back(std::move(current));
        }
        current = Record{};
        field.clear();
        field_started = false;
    };

    for (; pos < text.size(); ++pos) {
        char c = text[pos];
        if (in_quotes) {
            if (c == '"') {
                if (pos + 1 < text.size() && text[pos + 1] == '"') {
                    field.push_back('"');
                    ++pos;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
            continue;
        }
        if (c == '"') {
            in_quotes = true;
            field_started = true;
        } else if (c == delimiter) {
            field_started = true;
            end_field();
        } else if (c == '\r' || c == '\n') {
            if (c == '\r' && pos + 1 < text.size() && text[pos + 1] == '\n') ++pos;
            end_record();
            ++line;
            current.line = line;
        } else {
            field_started = true;
            field.push_back(c);
        }
    }
    end_record();
    return records;
}

void write_field(std::ostream& out, std::string_view field, char delimiter) {
    bool needs_quotes = field.find_first_of(std::string{delimiter, '"', '\r', '\n'}) != std::string_view::npos;
    if (!field.empty() && (field.front() == ' ' || field.back() == ' ')) needs_quotes = true;
    if (!needs_quotes) {
        out << field;
        return;
    }
    out << '"';
    for (char c : field) {
        if (c == '"') out << '"';
        out << c;
    }
    out << '"';
}

void write_record(std::ostream& out, const std::vector<std::string>& fields, char delimiter) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << delimiter;
        write_field(out, fields[i], delimiter);
    }
    out << '\n';
}

}  // namespace pipesynth::csv
