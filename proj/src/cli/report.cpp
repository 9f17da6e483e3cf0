#include "homlab/report.hpp"

#include <algorithm>

namespace homlab {

Check& Report::add(std::string name, std::string anchor, bool passed, nlohmann::json metrics) {
    checks.push_back({std::move(name), std::move(anchor), passed, std::move(metrics)});
    return checks.back();
}

bool Report::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

nlohmann::json Report::to_json() const {
    nlohmann::json cfg = nlohmann::json::array();
    for (const auto& [k, v] : config) cfg.push_back({k, v});
    nlohmann::json cs = nlohmann::json::array();
    for (const auto& c : checks)
        cs.push_back({{"name", c.name}, {"paper_anchor", c.paper_anchor}, {"status", c.passed ? "pass" : "fail"},
                      {"metrics", c.metrics}});
    return {{"command", command}, {"config", cfg}, {"checks", cs}, {"status", passed() ? "pass" : "fail"}};
}

}  // namespace homlab
