#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace homlab {

// INI-style run configuration:
//
//   # comment
//   [section]
//   key = value
//
// Keys are addressed as "section.key". Every getter marks its key as used;
// check_unused() rejects keys no command asked for, so typos surface as
// config errors instead of silently falling back to defaults.
class Config {
public:
    static Config parse(std::istream& in, const std::string& origin = "<config>");
    static Config load(const std::string& path);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::string require_string(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    double require_double(const std::string& key) const;
    int get_int(const std::string& key, int fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    // Comma-separated numbers.
    std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;

    void check_unused() const;
    // Entries in file order, for echoing into reports.
    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

private:
    const std::string* find(const std::string& key) const;
    double to_double(const std::string& key, const std::string& text) const;

    std::string origin_;
    std::vector<std::pair<std::string, std::string>> entries_;
    std::map<std::string, std::size_t> index_;
    mutable std::vector<bool> used_;
};

}  // namespace homlab
