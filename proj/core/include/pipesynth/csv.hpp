#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace pipesynth::csv {

/// One parsed record plus the 1-based line on which it started.
struct Record {
    std::vector<std::string> fields;
    std::size_t line = 0;
};

/// RFC 4180 reader: quoted fields, doubled quotes, embedded newlines, CRLF.
/// A leading UTF-8 BOM is skipped. Blank lines outside quotes are ignored.
std::vector<Record> read(std::istream& in, char delimiter = ',');

void write_field(std::ostream& out, std::string_view field, char delimiter = ',');
void write_record(std::ostream& out, const std::vector<std::string>& fields, char delimiter = ',');

}  // namespace pipesynth::csv
