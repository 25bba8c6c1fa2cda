#include "robbins/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace robbins::analytic {

using quadrature::QuadConfig;
using quadrature::QuadResult;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Post-alpha t-integrand after t = 1 - (1 - alpha) e^{-v}, including the
// Jacobian and e^{-F2(t)} = e^{-c v}. With X = f2(t) the products of powers of
// X with the weight are folded into single exponentials so large v underflows
// to 0 instead of producing inf * 0.
double post_integrand_v(double v, double y, const RuleParams& p) {
    const double a = p.alpha;
    const double c = p.c;
    const double x0 = c / (1.0 - a);
    const double e0 = (1.0 - a) * std::exp(-(c + 1.0) * v);  // weight
    const double e1 = c * std::exp(-c * v);                 // X * weight
    const double e2 = c * x0 * std::exp((1.0 - c) * v);     // X^2 * weight

    const double past = 0.5 * (1.0 - a) * (e2 - x0 * x0 * e0) - c * v * e1;
    if (!(y < x0 * std::exp(v))) {
        return e1 * (1.0 + 0.5 * c) + past;
    }
    const double stop_and_above = 2.0 * e1 - y * e0 + 0.5 * c * e1 +
                                  0.5 * a * (e2 - 2.0 * y * e1 + y * y * e0);
    return stop_and_above + past;
}

QuadResult post_phase_integral(double y, const RuleParams& p, const QuadConfig& cfg) {
    const double x0 = p.c / (1.0 - p.alpha);
    auto below = [&](double v) { return post_integrand_v(v, kInf, p); };
    auto above = [&](double v) { return post_integrand_v(v, y, p); };
    if (!(y > x0)) {
        return quadrature::integrate_semi_infinite(above, 0.0, cfg);
    }
    if (std::isinf(y)) {
        return quadrature::integrate_semi_infinite(below, 0.0, cfg);
    }
    const double v_y = std::log(y / x0);
    QuadResult out = quadrature::integrate(below, 0.0, v_y, cfg);
    out += quadrature::integrate_semi_infinite(above, v_y, cfg);
    return out;
}

std::string describe(const char* what, double got) {
    std::ostringstream os;
    os << what << " (got " << got << ")";
    return os.str();
}

}  // namespace

void RuleParams::validate() const {
    if (!(alpha >= 0.0 && alpha < 1.0)) {
        throw std::invalid_argument(describe("alpha must satisfy 0 <= alpha < 1", alpha));
    }
    if (!(b > 0.0) || !std::isfinite(b)) {
        throw std::invalid_argument(describe("b must satisfy b > 0", b));
    }
    if (!(c > 1.0) || !std::isfinite(c)) {
        throw std::invalid_argument(describe("c must satisfy c > 1", c));
    }
}

double f_threshold(double t, double k) {
    if (!(t < 1.0)) throw std::domain_error("f_threshold: requires t < 1");
    return k / (1.0 - t);
}

double f_inverse(double x, double k, double floor_t) {
    if (x <= 0.0) return floor_t;
    return std::max(floor_t, 1.0 - k / x);
}

double big_f1(double t, double y, const RuleParams& p) {
    if (t <= 0.0) return 0.0;
    if (y <= p.b) return y * t;
    const double t_y = std::isinf(y) ? t : std::min(t, 1.0 - p.b / y);
    const double flat = t > t_y ? y * (t - t_y) : 0.0;
    return -p.b * std::log1p(-t_y) + flat;
}

double big_f2(double t, const RuleParams& p) {
    if (t < p.alpha) throw std::domain_error("big_f2: requires t >= alpha");
    if (!(t < 1.0)) throw std::domain_error("big_f2: requires t < 1");
    return p.c * std::log((1.0 - p.alpha) / (1.0 - t));
}

double s1(double y, const RuleParams& p) {
    if (y <= p.b) return 0.0;
    return p.alpha * y - big_f1(p.alpha, y, p);
}

double s2(double x, const RuleParams& p) {
    const double one_minus_a = 1.0 - p.alpha;
    if (x * one_minus_a <= p.c) return 0.0;
    return one_minus_a * x - p.c - p.c * std::log(x * one_minus_a / p.c);
}

double s2_integral(double x, const RuleParams& p) {
    const double one_minus_a = 1.0 - p.alpha;
    const double x0 = p.c / one_minus_a;
    if (x <= x0) return 0.0;
    return 0.5 * one_minus_a * (x * x - x0 * x0) - p.c * x * std::log(x / x0);
}

double y_density(double y, const RuleParams& p) {
    if (!(p.alpha > 0.0)) throw std::domain_error("y_density: requires alpha > 0");
    if (y <= p.b) return 0.0;
    return std::exp(-s1(y, p)) * std::min(f_inverse(y, p.b, 0.0), p.alpha);
}

double pre_inner(double t, double y, const RuleParams& p) {
    const double u = std::min(f_threshold(t, p.b), y);
    return u + 0.5 * u * u * (1.0 - t);
}

PostInner post_inner(double t, double y, const RuleParams& p) {
    const double top = f_threshold(t, p.c);
    const double u = std::min(top, y);
    PostInner out;
    out.stop_value = u + 0.5 * u * u * (1.0 - t);
    out.past_region = s2_integral(top, p);
    if (u < top) {
        out.above_level = 2.0 * (top - u) + 0.5 * (1.0 - t) * (top * top - u * u) +
                          0.5 * p.alpha * ((top - y) * (top - y) - (u - y) * (u - y));
    }
    return out;
}

QuadResult cond_risk_pre(double y, const RuleParams& p, const QuadConfig& cfg) {
    if (p.alpha <= 0.0) return {};
    auto integrand = [&](double t) { return std::exp(-big_f1(t, y, p)) * pre_inner(t, y, p); };
    const double t_y = std::isinf(y) ? 1.0 : 1.0 - p.b / y;
    if (t_y > 0.0 && t_y < p.alpha) {
        QuadResult out = quadrature::integrate(integrand, 0.0, t_y, cfg);
        out += quadrature::integrate(integrand, t_y, p.alpha, cfg);
        return out;
    }
    return quadrature::integrate(integrand, 0.0, p.alpha, cfg);
}

QuadResult cond_risk_post(double y, const RuleParams& p, const QuadConfig& cfg) {
    QuadResult out = post_phase_integral(y, p, cfg);
    const double survive = p.alpha > 0.0 ? std::exp(-big_f1(p.alpha, y, p)) : 1.0;
    out.value *= survive;
    out.error_estimate *= survive;
    return out;
}

double threshold_formula(double c) {
    if (!(c > 1.0)) throw std::domain_error("threshold_formula: requires c > 1");
    return 1.0 + 0.5 * c + 1.0 / (c * c - 1.0);
}

namespace {

// Breakpoints of the y-integrand: b plus the kinks at f1(alpha), f2(alpha).
std::vector<double> y_breakpoints(const RuleParams& p) {
    std::vector<double> pts{p.b};
    for (double k : {p.b / (1.0 - p.alpha), p.c / (1.0 - p.alpha)}) {
        if (k > p.b) pts.push_back(k);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

template <class F>
QuadResult integrate_over_y(const F& f, const RuleParams& p, const QuadConfig& cfg) {
    const auto pts = y_breakpoints(p);
    QuadResult out;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        out += quadrature::integrate(f, pts[i], pts[i + 1], cfg);
    }
    out += quadrature::integrate_semi_infinite(f, pts.back(), cfg);
    return out;
}

}  // namespace

RiskBreakdown expected_rank(const RuleParams& p, const RiskConfig& cfg) {
    p.validate();
    RiskBreakdown out;
    if (p.alpha == 0.0) {
        const QuadResult post = cond_risk_post(kInf, p, cfg.inner);
        out.post_alpha = post.value;
        out.total = post.value;
        out.quad_error = post.error_estimate;
        out.converged = post.converged;
        return out;
    }

    bool inner_ok = true;
    auto weight = [&](double y) {
        const double w = std::exp(-s1(y, p));
        return w < cfg.weight_cutoff ? 0.0 : w * std::min(f_inverse(y, p.b, 0.0), p.alpha);
    };
    auto pre = [&](double y) {
        const double w = weight(y);
        if (w == 0.0) return 0.0;
        const QuadResult r = cond_risk_pre(y, p, cfg.inner);
        inner_ok = inner_ok && r.converged;
        return r.value * w;
    };
    auto post = [&](double y) {
        const double w = weight(y);
        if (w == 0.0) return 0.0;
        const QuadResult r = cond_risk_post(y, p, cfg.inner);
        inner_ok = inner_ok && r.converged;
        return r.value * w;
    };

    const QuadResult pre_r = integrate_over_y(pre, p, cfg.outer);
    const QuadResult post_r = integrate_over_y(post, p, cfg.outer);
    out.pre_alpha = pre_r.value;
    out.post_alpha = post_r.value;
    out.total = out.pre_alpha + out.post_alpha;
    out.quad_error = pre_r.error_estimate + post_r.error_estimate;
    out.converged = pre_r.converged && post_r.converged && inner_ok;
    return out;
}

QuadResult survival(double t, const RuleParams& p, const RiskConfig& cfg) {
    p.validate();
    if (!(t >= 0.0 && t < 1.0)) throw std::domain_error("survival: requires 0 <= t < 1");
    const double f2_part = t > p.alpha ? big_f2(t, p) : 0.0;
    if (p.alpha == 0.0) return {std::exp(-f2_part), 0.0, 0, true};
    const double t_pre = std::min(t, p.alpha);
    auto f = [&](double y) { return std::exp(-big_f1(t_pre, y, p) - f2_part) * y_density(y, p); };
    return integrate_over_y(f, p, cfg.outer);
}

}  // namespace robbins::analytic
