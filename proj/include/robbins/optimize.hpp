#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "robbins/analytic.hpp"

namespace robbins::optimize {

using analytic::RuleParams;

struct OptConfig {
    RuleParams start{0.4, 2.0, 2.0};
    double simplex_scale = 0.1;
    double f_tol = 1e-6;
    double x_tol = 1e-5;
    int max_evals = 2000;  // total objective budget, grid included
    bool grid_refine = true;
    /// Hold alpha fixed. alpha = 0 also freezes b, which the rule then ignores.
    std::optional<double> fix_alpha;
    analytic::RiskConfig risk{};
    unsigned threads = 0;  // grid pre-scan workers, 0 = hardware concurrency

    void validate() const;
};

struct TracePoint {
    RuleParams params;
    double value = 0.0;
};

struct OptResult {
    RuleParams best;
    double value = 0.0;
    int evals = 0;
    bool converged = false;
    std::vector<TracePoint> trace;  // best vertex after each accepted step
};

/// Box-constrained Nelder-Mead over plain coordinates.
struct SimplexResult {
    std::vector<double> best;
    double value = 0.0;
    int evals = 0;
    bool converged = false;
    std::vector<std::pair<std::vector<double>, double>> trace;
};

struct SimplexOptions {
    std::vector<double> lower;
    std::vector<double> upper;
    double scale = 0.1;
    double f_tol = 1e-6;
    double x_tol = 1e-5;
    int max_evals = 2000;
};

SimplexResult nelder_mead_box(const std::function<double(std::span<const double>)>& f,
                              std::vector<double> start, const SimplexOptions& opt);

using Objective = std::function<double(const RuleParams&)>;

/// Nelder-Mead over (alpha, b, c) with alpha in [0, 0.99], b in (0, 50] and
/// c in [1.001, 50] enforced by clamping.
OptResult nelder_mead(const Objective& objective, const OptConfig& cfg);

/// Minimize expected_rank, optionally seeded from a coarse grid scan.
OptResult optimize_rule(const OptConfig& cfg);

}  // namespace robbins::optimize
