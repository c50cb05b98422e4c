#include "ifperf/config_io.hpp"

#include "ifperf/errors.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <fstream>
#include <sstream>

namespace ifperf {
namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double_token(const std::string& tok, bool& ok) {
    double v = 0.0;
    const char* begin = tok.data();
    const char* end = begin + tok.size();
    const auto res = std::from_chars(begin, end, v);
    ok = res.ec == std::errc() && res.ptr == end && !tok.empty();
    return v;
}

} // namespace

void ConfigMap::set(const std::string& key, std::string value, int line) {
    entries_[key] = Entry{std::move(value), line};
}

bool ConfigMap::has(const std::string& key) const {
    return entries_.count(key) != 0;
}

const ConfigMap::Entry& ConfigMap::require(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) {
        throw ConfigError(source + ": missing required key '" + key + "'");
    }
    return it->second;
}

void ConfigMap::fail(const std::string& key, const Entry& e,
                     const std::string& reason) const {
    std::ostringstream msg;
    msg << source;
    if (e.line > 0) msg << ":" << e.line;
    msg << ": key '" << key << "': " << reason << " (got '" << e.value << "')";
    throw ConfigError(msg.str());
}

std::string ConfigMap::get_string(const std::string& key) const {
    return require(key).value;
}

std::string ConfigMap::get_string(const std::string& key,
                                  const std::string& fallback) const {
    return has(key) ? entries_.at(key).value : fallback;
}

double ConfigMap::get_double(const std::string& key) const {
    const Entry& e = require(key);
    bool ok = false;
    const double v = parse_double_token(e.value, ok);
    if (!ok) fail(key, e, "cannot parse as a number");
    return v;
}

double ConfigMap::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

long long ConfigMap::get_int(const std::string& key) const {
    const Entry& e = require(key);
    long long v = 0;
    const char* begin = e.value.data();
    const char* end = begin + e.value.size();
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc() || res.ptr != end || e.value.empty()) {
        fail(key, e, "cannot parse as an integer");
    }
    return v;
}

long long ConfigMap::get_int(const std::string& key, long long fallback) const {
    return has(key) ? get_int(key) : fallback;
}

std::vector<double> ConfigMap::get_double_list(const std::string& key) const {
    const Entry& e = require(key);
    std::vector<double> out;
    std::string tok;
    std::istringstream in(e.value);
    while (std::getline(in, tok, ',')) {
        tok = trim(tok);
        bool ok = false;
        const double v = parse_double_token(tok, ok);
        if (!ok) fail(key, e, "cannot parse comma-separated numbers");
        out.push_back(v);
    }
    if (out.empty()) fail(key, e, "expected at least one number");
    return out;
}

std::vector<double> ConfigMap::get_double_list(
    const std::string& key, const std::vector<double>& fallback) const {
    return has(key) ? get_double_list(key) : fallback;
}

std::vector<std::string> ConfigMap::unknown_keys(
    const std::vector<std::string>& known) const {
    std::vector<std::string> out;
    for (const auto& [key, entry] : entries_) {
        (void)entry;
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            out.push_back(key);
        }
    }
    return out;
}

ConfigMap parse_config_text(const std::string& text, const std::string& source_name) {
    ConfigMap cfg;
    cfg.source = source_name;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            std::ostringstream msg;
            msg << source_name << ":" << lineno << ": expected 'key = value', got '"
                << line << "'";
            throw ConfigError(msg.str());
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            std::ostringstream msg;
            msg << source_name << ":" << lineno << ": empty key";
            throw ConfigError(msg.str());
        }
        if (cfg.has(key)) {
            std::ostringstream msg;
            msg << source_name << ":" << lineno << ": duplicate key '" << key << "'";
            throw ConfigError(msg.str());
        }
        cfg.set(key, value, lineno);
    }
    return cfg;
}

ConfigMap load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

} // namespace ifperf
