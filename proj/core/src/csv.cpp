#include <ifperf/csv.hpp>

#include <ifperf/errors.hpp>

#include <charconv>
#include <fstream>
#include <sstream>

namespace ifperf {

namespace {

void check_cell(const std::string& cell, const char* what) {
    if (cell.find_first_of(",\n\r") != std::string::npos)
        throw std::invalid_argument(std::string(what) +
                                    " must not contain commas or newlines: '" +
                                    cell + "'");
}

std::vector<std::string> split_commas(const std::string& line) {
    std::vector<std::string> out;
    size_t start = 0;
    while (true) {
        const size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

} // namespace

void CsvDocument::set_meta(const std::string& key, std::string value) {
    for (auto& kv : meta) {
        if (kv.first == key) {
            kv.second = std::move(value);
            return;
        }
    }
    meta.emplace_back(key, std::move(value));
}

const std::string* CsvDocument::find_meta(const std::string& key) const {
    for (const auto& kv : meta)
        if (kv.first == key) return &kv.second;
    return nullptr;
}

size_t CsvDocument::column_index(const std::string& name) const {
    for (size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return i;
    throw ConfigError("dataset has no column named '" + name + "'");
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string csv_emit(const CsvDocument& doc) {
    std::ostringstream out;
    for (const auto& kv : doc.meta) {
        if (kv.first.empty() ||
            kv.first.find_first_of(" ,\n\r=") != std::string::npos)
            throw std::invalid_argument("bad metadata key: '" + kv.first + "'");
        if (kv.second.find_first_of("\n\r") != std::string::npos)
            throw std::invalid_argument("metadata value must be one line");
        out << "# " << kv.first << " = " << kv.second << '\n';
    }
    if (doc.columns.empty())
        throw std::invalid_argument("dataset needs at least one column");
    for (size_t i = 0; i < doc.columns.size(); ++i) {
        check_cell(doc.columns[i], "column name");
        out << (i ? "," : "") << doc.columns[i];
    }
    out << '\n';
    for (const auto& row : doc.rows) {
        if (row.size() != doc.columns.size())
            throw std::invalid_argument("row width differs from header");
        for (size_t i = 0; i < row.size(); ++i) {
            check_cell(row[i], "cell");
            out << (i ? "," : "") << row[i];
        }
        out << '\n';
    }
    return out.str();
}

CsvDocument csv_parse(const std::string& text, const std::string& source_name) {
    CsvDocument doc;
    bool header_seen = false;
    size_t start = 0;
    int line_no = 0;
    while (start <= text.size()) {
        size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        std::string line = text.substr(start, end - start);
        start = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (header_seen)
                throw ConfigError(source_name + ":" + std::to_string(line_no) +
                                  ": metadata after the header row");
            const size_t sep = line.find(" = ");
            if (line.size() < 2 || line[1] != ' ' || sep == std::string::npos ||
                sep < 2)
                throw ConfigError(source_name + ":" + std::to_string(line_no) +
                                  ": expected '# key = value'");
            doc.meta.emplace_back(line.substr(2, sep - 2),
                                  line.substr(sep + 3));
            continue;
        }
        if (!header_seen) {
            doc.columns = split_commas(line);
            header_seen = true;
            continue;
        }
        std::vector<std::string> row = split_commas(line);
        if (row.size() != doc.columns.size())
            throw ConfigError(source_name + ":" + std::to_string(line_no) +
                              ": row has " + std::to_string(row.size()) +
                              " cells, header has " +
                              std::to_string(doc.columns.size()));
        doc.rows.push_back(std::move(row));
    }
    if (!header_seen)
        throw ConfigError(source_name + ": no header row found");
    return doc;
}

void csv_write_file(const CsvDocument& doc, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    const std::string text = csv_emit(doc);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw ConfigError("failed writing '" + path + "'");
}

CsvDocument csv_read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return csv_parse(buf.str(), path);
}

} // namespace ifperf
