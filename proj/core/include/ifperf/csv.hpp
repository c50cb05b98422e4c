#pragma once

#include <string>
#include <utility>
#include <vector>

namespace ifperf {

// Plot-ready dataset: ordered `# key = value` metadata lines, one header
// row, then data rows. Cells are stored as written, so parsing an emitted
// document and re-emitting reproduces it byte for byte.
struct CsvDocument {
    std::vector<std::pair<std::string, std::string>> meta;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    // appends, or replaces the first entry with that key
    void set_meta(const std::string& key, std::string value);
    // nullptr when absent
    const std::string* find_meta(const std::string& key) const;
    // column index, or throws ConfigError naming the column
    size_t column_index(const std::string& name) const;
};

// Shortest decimal form that parses back to exactly the same double.
std::string format_double(double v);

std::string csv_emit(const CsvDocument& doc);
CsvDocument csv_parse(const std::string& text,
                      const std::string& source_name = "<csv>");

void csv_write_file(const CsvDocument& doc, const std::string& path);
CsvDocument csv_read_file(const std::string& path);

} // namespace ifperf
