#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

namespace ricci {

struct CheckResult {
    std::string name;
    double max_residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

/// Aggregated outcome of running the checks of one scenario over its sample.
/// overall_pass holds iff every check passed and no point failed to evaluate.
struct Report {
    std::string scenario;
    std::uint64_t seed = 0;
    double lambda = 0.0;
    std::string classification;
    std::size_t points_evaluated = 0;
    std::size_t points_rejected = 0;
    std::size_t evaluation_errors = 0;
    std::size_t tally_zero = 0, tally_null = 0, tally_timelike = 0, tally_spacelike = 0;
    std::vector<CheckResult> checks;
    bool overall_pass = false;
};

/// Stable-key-order JSON. Fixed scenario and seed give byte-identical output:
/// evaluation is sequential and every aggregate is an order-independent
/// reduction.
inline std::string render_json(const Report& r) {
    nlohmann::ordered_json j;
    j["scenario"] = r.scenario;
    j["seed"] = r.seed;
    j["lambda"] = r.lambda;
    j["classification"] = r.classification;
    j["points_evaluated"] = r.points_evaluated;
    j["points_rejected"] = r.points_rejected;
    j["evaluation_errors"] = r.evaluation_errors;
    nlohmann::ordered_json tally;
    tally["zero"] = r.tally_zero;
    tally["null"] = r.tally_null;
    tally["timelike"] = r.tally_timelike;
    tally["spacelike"] = r.tally_spacelike;
    j["causal_character"] = tally;
    nlohmann::ordered_json checks = nlohmann::ordered_json::array();
    for (const auto& c : r.checks) {
        nlohmann::ordered_json e;
        e["name"] = c.name;
        e["max_residual"] = c.max_residual;
        e["tolerance"] = c.tolerance;
        e["pass"] = c.pass;
        checks.push_back(e);
    }
    j["checks"] = checks;
    j["overall_pass"] = r.overall_pass;
    return j.dump(2) + "\n";
}

inline std::string render_text(const Report& r) {
    std::string out;
    char buf[256];
    auto line = [&](const char* fmt, auto... args) {
        std::snprintf(buf, sizeof(buf), fmt, args...);
        out += buf;
        out += '\n';
    };
    line("scenario:  %s", r.scenario.c_str());
    line("seed:      %llu", static_cast<unsigned long long>(r.seed));
    line("lambda:    %g (%s)", r.lambda, r.classification.c_str());
    line("points:    %zu evaluated, %zu rejected, %zu errors", r.points_evaluated,
         r.points_rejected, r.evaluation_errors);
    line("field:     %zu zero, %zu null, %zu timelike, %zu spacelike", r.tally_zero,
         r.tally_null, r.tally_timelike, r.tally_spacelike);
    out += '\n';
    line("%-20s %14s %10s  %s", "check", "max residual", "tolerance", "result");
    for (const auto& c : r.checks)
        line("%-20s %14.6e %10.1e  %s", c.name.c_str(), c.max_residual, c.tolerance,
             c.pass ? "PASS" : "FAIL");
    out += '\n';
    line("overall:   %s", r.overall_pass ? "PASS" : "FAIL");
    return out;
}

} // namespace ricci
