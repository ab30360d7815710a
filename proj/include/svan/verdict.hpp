#pragma once

#include <string>

#include <json.hpp>

namespace svan {

/// Boolean analysis result with machine-readable diagnostics. `evidence`
/// carries a witness trace, a counterexample, or a relation witness,
/// depending on the check that produced it.
struct Verdict {
    bool holds = false;
    std::string check;  // "final-reachable", "trace", "strong", "compat:df", ...
    nlohmann::json evidence = nlohmann::json::object();
};

inline nlohmann::json to_json(const Verdict& v) {
    nlohmann::json j;
    j["holds"] = v.holds;
    j["check"] = v.check;
    j["evidence"] = v.evidence;
    return j;
}

} // namespace svan
