#include "hids/csv.hpp"

#include <istream>
#include <ostream>

#include "hids/common.hpp"

namespace hids {

bool CsvReader::next(std::vector<std::string>& fields, size_t& line) {
    fields.clear();
    std::string row;
    if (!std::getline(in_, row)) return false;
    ++line_;
    line = line_;
    if (!row.empty() && row.back() == '\r') row.pop_back();

    std::string field;
    bool quoted = false;
    size_t i = 0;
    for (;;) {
        if (i == row.size()) {
            if (!quoted) break;
            // quoted field continues past the line break
            if (!std::getline(in_, row)) {
                throw InputError("unterminated quoted field starting at line " +
                                 std::to_string(line));
            }
            ++line_;
            if (!row.empty() && row.back() == '\r') row.pop_back();
            field.push_back('\n');
            i = 0;
            continue;
        }
        const char c = row[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < row.size() && row[i + 1] == '"') {
                    field.push_back('"');
                    i += 2;
                } else {
                    quoted = false;
                    ++i;
                }
            } else {
                field.push_back(c);
                ++i;
            }
        } else if (c == '"' && field.empty()) {
            quoted = true;
            ++i;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
            ++i;
        } else {
            field.push_back(c);
            ++i;
        }
    }
    fields.push_back(std::move(field));
    return true;
}

std::string csv_escape(const std::string& field) {
    bool needs_quotes = false;
    for (char c : field) {
        if (c == ',' || c == '"' || c == '\n' || c == '\r') {
            needs_quotes = true;
            break;
        }
    }
    if (!needs_quotes) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void write_csv_row(std::ostream& out, std::span<const std::string> fields) {
    for (size_t i = 0; i < fields.size(); ++i) {
        if (i) out.put(',');
        out << csv_escape(fields[i]);
    }
    out.put('\n');
}

}  // namespace hids
