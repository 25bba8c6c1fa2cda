#pragma once

#include "robbins/quadrature.hpp"

namespace robbins::analytic {

/// Rank-threshold rule: before `alpha` stop below min(b / (1 - t), Y), after
/// `alpha` stop below c / (1 - t).
struct RuleParams {
    double alpha = 0.0;
    double b = 1.0;
    double c = 2.0;

    /// Throws std::invalid_argument naming the violated bound.
    void validate() const;
};

struct RiskBreakdown {
    double pre_alpha = 0.0;   // E[R 1(tau <= alpha)]
    double post_alpha = 0.0;  // E[R 1(tau > alpha)]
    double total = 0.0;
    double quad_error = 0.0;  // sum of outer quadrature error estimates
    bool converged = true;
};

struct RiskConfig {
    quadrature::QuadConfig inner{1e-10, 1e-10, 2000};
    quadrature::QuadConfig outer{1e-9, 1e-9, 2000};
    /// y-integrand weights e^{-S1(y)} below this are treated as zero.
    double weight_cutoff = 1e-16;
};

/// k / (1 - t); throws std::domain_error for t >= 1.
double f_threshold(double t, double k);

/// Generalized inverse of k / (1 - t), clamped below at floor_t.
double f_inverse(double x, double k, double floor_t);

/// F1(t, y) = int_0^t min(b / (1 - s), y) ds. y may be +infinity.
double big_f1(double t, double y, const RuleParams& p);

/// F2(t) = int_alpha^t c / (1 - s) ds = c ln((1 - alpha) / (1 - t)).
double big_f2(double t, const RuleParams& p);

/// Area between level y and the graph of f1 on [0, alpha] (zero for y <= b).
double s1(double y, const RuleParams& p);

/// Area between level x and the graph of f2 to the right of alpha.
double s2(double x, const RuleParams& p);

/// int_{f2(alpha)}^{x} S2(z) dz, zero for x <= f2(alpha).
double s2_integral(double x, const RuleParams& p);

/// Density of Y, e^{-S1(y)} min(f1^{-1}(y), alpha). Requires alpha > 0.
double y_density(double y, const RuleParams& p);

/// Inner x-integral of the pre-alpha risk at time t given Y = y.
double pre_inner(double t, double y, const RuleParams& p);

/// The three inner x-integrals of the post-alpha risk at time t given Y = y.
struct PostInner {
    double stop_value = 0.0;    // int_0^{f2(t) ^ y} (1 + x(1 - t)) dx
    double past_region = 0.0;   // int_{f2(alpha)}^{f2(t)} S2(x) dx
    double above_level = 0.0;   // int_{f2(t) ^ y}^{f2(t)} (2 + x(1 - t) + (x - y) alpha) dx
    double sum() const { return stop_value + past_region + above_level; }
};
PostInner post_inner(double t, double y, const RuleParams& p);

/// E[R 1(tau <= alpha) | Y = y]; the t-integral is numeric.
quadrature::QuadResult cond_risk_pre(double y, const RuleParams& p,
                                     const quadrature::QuadConfig& cfg = {});

/// E[R 1(tau > alpha) | Y = y], integrated in v = F2(t) / c. y = +infinity
/// gives the risk of the plain threshold phase.
quadrature::QuadResult cond_risk_post(double y, const RuleParams& p,
                                      const quadrature::QuadConfig& cfg = {});

/// Expected absolute rank E[R(tau, X)] of the rule.
RiskBreakdown expected_rank(const RuleParams& p, const RiskConfig& cfg = {});

/// Expected rank of the pure threshold rule, 1 + c/2 + 1/(c^2 - 1).
double threshold_formula(double c);

/// P(tau > t), marginalized over Y.
quadrature::QuadResult survival(double t, const RuleParams& p, const RiskConfig& cfg = {});

}  // namespace robbins::analytic
