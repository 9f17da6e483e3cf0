#include "homlab/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>

#include "homlab/error.hpp"

namespace homlab {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool valid_name(const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
    });
}

}  // namespace

Config Config::parse(std::istream& in, const std::string& origin) {
    Config c;
    c.origin_ = origin;
    std::string line, section;
    for (int lineno = 1; std::getline(in, line); ++lineno) {
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = origin + ":" + std::to_string(lineno) + ": ";
        if (line.front() == '[') {
            if (line.back() != ']') raise(ErrorKind::ConfigError, where + "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (!valid_name(section)) raise(ErrorKind::ConfigError, where + "invalid section name '" + section + "'");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) raise(ErrorKind::ConfigError, where + "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        if (!valid_name(key)) raise(ErrorKind::ConfigError, where + "invalid key '" + key + "'");
        const std::string path = section.empty() ? key : section + "." + key;
        if (c.index_.count(path)) raise(ErrorKind::ConfigError, where + "duplicate key " + path);
        c.index_[path] = c.entries_.size();
        c.entries_.emplace_back(path, value);
    }
    c.used_.assign(c.entries_.size(), false);
    return c;
}

Config Config::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorKind::ConfigError, "cannot open config file " + path);
    return parse(in, path);
}

const std::string* Config::find(const std::string& key) const {
    const auto it = index_.find(key);
    if (it == index_.end()) return nullptr;
    used_[it->second] = true;
    return &entries_[it->second].second;
}

bool Config::has(const std::string& key) const { return index_.count(key) != 0; }

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    const std::string* v = find(key);
    return v ? *v : fallback;
}

std::string Config::require_string(const std::string& key) const {
    const std::string* v = find(key);
    if (!v) raise(ErrorKind::ConfigError, key + ": required key is missing");
    return *v;
}

double Config::to_double(const std::string& key, const std::string& text) const {
    double x = 0.0;
    const char* end = text.data() + text.size();
    const auto res = std::from_chars(text.data() + (text.rfind('+', 0) == 0 ? 1 : 0), end, x);
    if (res.ec != std::errc() || res.ptr != end || !std::isfinite(x))
        raise(ErrorKind::ConfigError, key + ": expected a finite number, got '" + text + "'");
    return x;
}

double Config::get_double(const std::string& key, double fallback) const {
    const std::string* v = find(key);
    return v ? to_double(key, *v) : fallback;
}

double Config::require_double(const std::string& key) const { return to_double(key, require_string(key)); }

int Config::get_int(const std::string& key, int fallback) const {
    const std::string* v = find(key);
    if (!v) return fallback;
    int x = 0;
    const auto res = std::from_chars(v->data(), v->data() + v->size(), x);
    if (res.ec != std::errc() || res.ptr != v->data() + v->size())
        raise(ErrorKind::ConfigError, key + ": expected an integer, got '" + *v + "'");
    return x;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    const std::string* v = find(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "yes" || *v == "1") return true;
    if (*v == "false" || *v == "no" || *v == "0") return false;
    raise(ErrorKind::ConfigError, key + ": expected true or false, got '" + *v + "'");
}

std::vector<double> Config::get_doubles(const std::string& key, const std::vector<double>& fallback) const {
    const std::string* v = find(key);
    if (!v) return fallback;
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= v->size()) {
        const auto comma = v->find(',', start);
        const std::string item = trim(v->substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        out.push_back(to_double(key, item));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

void Config::check_unused() const {
    std::string unknown;
    for (std::size_t k = 0; k < entries_.size(); ++k)
        if (!used_[k]) unknown += (unknown.empty() ? "" : ", ") + entries_[k].first;
    if (!unknown.empty()) raise(ErrorKind::ConfigError, origin_ + ": unknown keys for this command: " + unknown);
}

}  // namespace homlab
