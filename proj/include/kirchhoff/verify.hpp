#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "kirchhoff/scenario.hpp"

namespace kirchhoff {

struct CheckResult {
    std::string name;
    bool passed = false;
    double value = 0.0;      ///< worst observed error (or violation count)
    double tolerance = 0.0;
    std::string detail;
};

struct VerifyOptions {
    std::map<std::string, double> tolerances;  ///< overrides by check name
    bool inject_gradient_fault = false;        ///< gradient read one node off
    int samples = 200;
};

struct VerifyReport {
    std::uint64_t seed = 0;
    std::vector<CheckResult> checks;
    bool passed() const;
};

/// Names and default tolerances of every check.
std::map<std::string, double> default_tolerances();

/// Runs the property suite on the scenario's first sweep point.
VerifyReport verify_suite(const Scenario& s, const VerifyOptions& opts = {});

std::string to_json(const VerifyReport& r);

}  // namespace kirchhoff
