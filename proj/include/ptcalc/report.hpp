#pragma once

#include "ptcalc/geometry.hpp"

#include <nlohmann/json.hpp>

#include <string>

namespace ptcalc {

/// CLI-level knobs; `samples <= 0` and `seed < 0` defer to the geometry file.
struct RunFlags {
    int samples = 0;
    long long seed = -1;
    double tol = 1e-7;
    double witness = 1e-3;
    int depth = 1;
    int order = 4;
    int transport_steps = 192;
    bool timings = false;
};

struct RunResult {
    nlohmann::ordered_json report;
    int exit_code = 0;
};

// Exit codes: 0 ok, 2 schema/parse, 3 evaluation/domain, 4 indeterminate rank,
// 5 theorem-consistency alarm, 6 algebraic degeneracy. 2 and 3 are produced by
// the CLI wrapper from the exceptions these runners let escape.
RunResult run_analyze(const ChartGeometry& geom, const RunFlags& flags);
RunResult run_metrizability(const ChartGeometry& geom, const RunFlags& flags);
RunResult run_check_normal(const ChartGeometry& geom, const RunFlags& flags);
RunResult run_correspond(const ChartGeometry& geom, const RunFlags& flags);

std::string summary_text(const nlohmann::ordered_json& report);

} // namespace ptcalc
