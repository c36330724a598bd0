#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace hids {

/// RFC-4180-style record reader: quoted fields, doubled quotes, CRLF line
/// ends, quoted fields spanning lines. Reads one record per call.
class CsvReader {
public:
    explicit CsvReader(std::istream& in) : in_(in) {}

    /// Fills `fields` with the next record. Returns false at end of input.
    /// `line` receives the 1-based line number the record started on.
    bool next(std::vector<std::string>& fields, size_t& line);

private:
    std::istream& in_;
    size_t line_ = 0;
};

/// Quotes a field when it contains a delimiter, quote, or line break.
std::string csv_escape(const std::string& field);

void write_csv_row(std::ostream& out, std::span<const std::string> fields);

}  // namespace hids
