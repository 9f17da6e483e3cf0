#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace homlab {

struct Check {
    std::string name;
    std::string paper_anchor;  // descriptive name of the result checked, or "plumbing"
    bool passed = false;
    nlohmann::json metrics = nlohmann::json::object();
};

struct Report {
    std::string command;
    std::vector<std::pair<std::string, std::string>> config;
    std::vector<Check> checks;

    Check& add(std::string name, std::string anchor, bool passed, nlohmann::json metrics = nlohmann::json::object());
    bool passed() const;
    nlohmann::json to_json() const;
};

}  // namespace homlab
