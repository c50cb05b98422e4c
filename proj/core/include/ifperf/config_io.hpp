#pragma once

#include <map>
#include <string>
#include <vector>

namespace ifperf {

// Flat `key = value` configuration with '#' comments.  Lookups throw
// ConfigError naming the key (and the source line it came from) so a
// typo in an experiment file fails loudly instead of silently running
// defaults.
class ConfigMap {
public:
    struct Entry {
        std::string value;
        int line = 0;
    };

    void set(const std::string& key, std::string value, int line = 0);
    bool has(const std::string& key) const;

    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key) const;
    long long get_int(const std::string& key, long long fallback) const;
    std::vector<double> get_double_list(const std::string& key) const;
    std::vector<double> get_double_list(const std::string& key,
                                        const std::vector<double>& fallback) const;

    const std::map<std::string, Entry>& entries() const { return entries_; }

    // keys present here but absent from `known`, for strict validation
    std::vector<std::string> unknown_keys(const std::vector<std::string>& known) const;

    std::string source = "<config>";

private:
    const Entry& require(const std::string& key) const;
    [[noreturn]] void fail(const std::string& key, const Entry& e,
                           const std::string& reason) const;

    std::map<std::string, Entry> entries_;
};

ConfigMap parse_config_text(const std::string& text,
                            const std::string& source_name = "<config>");
ConfigMap load_config_file(const std::string& path);

} // namespace ifperf
