#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "robbins/analytic.hpp"
#include "robbins/optimize.hpp"
#include "robbins/simulate.hpp"

namespace robbins::report {

using Json = nlohmann::ordered_json;

struct RunReport {
    std::string command;
    analytic::RuleParams params;
    std::optional<analytic::RiskBreakdown> analytic;
    std::optional<simulate::MCEstimate> mc;
    std::optional<std::string> mc_estimator;
    std::optional<optimize::OptResult> opt;
    double wall_time_s = 0.0;
};

const char* tool_version();

Json to_json(const analytic::RuleParams& p);
Json to_json(const analytic::RiskBreakdown& r);
Json to_json(const simulate::MCEstimate& m);
Json to_json(const optimize::OptResult& o);

/// Absent parts are omitted rather than written as null.
Json to_json(const RunReport& r);

/// Parses "lo:hi:count", "v1,v2,..." or a single value.
std::vector<double> parse_range(const std::string& text);

struct SweepRow {
    analytic::RuleParams params;
    analytic::RiskBreakdown risk;
};

/// Grid points in lexicographic (alpha, b, c) order.
std::vector<analytic::RuleParams> sweep_grid(const std::vector<double>& alphas,
                                             const std::vector<double>& bs,
                                             const std::vector<double>& cs);

std::vector<SweepRow> run_sweep(const std::vector<analytic::RuleParams>& grid,
                                const analytic::RiskConfig& cfg, unsigned threads);

/// Header alpha,b,c,expected_rank,quad_error; 10 significant digits, LF.
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

}  // namespace robbins::report
