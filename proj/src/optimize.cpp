#include "robbins/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace robbins::optimize {

namespace {

constexpr double kAlphaMax = 0.99;
constexpr double kBMin = 1e-6;
constexpr double kCMin = 1.001;
constexpr double kUpper = 50.0;

class BudgetExhausted {};

struct Vertex {
    std::vector<double> x;
    double f;
};

}  // namespace

void OptConfig::validate() const {
    start.validate();
    if (!(simplex_scale > 0.0)) throw std::invalid_argument("simplex_scale must be > 0");
    if (!(f_tol > 0.0)) throw std::invalid_argument("f_tol must be > 0");
    if (!(x_tol > 0.0)) throw std::invalid_argument("x_tol must be > 0");
    if (max_evals < 1) throw std::invalid_argument("max_evals must be >= 1");
    if (fix_alpha && !(*fix_alpha >= 0.0 && *fix_alpha <= kAlphaMax)) {
        throw std::invalid_argument("fix_alpha must lie in [0, 0.99]");
    }
}

SimplexResult nelder_mead_box(const std::function<double(std::span<const double>)>& f,
                              std::vector<double> start, const SimplexOptions& opt) {
    const std::size_t n = start.size();
    if (n == 0) throw std::invalid_argument("nelder_mead_box: empty start point");
    auto lower = opt.lower.empty() ? std::vector<double>(n, -std::numeric_limits<double>::infinity())
                                   : opt.lower;
    auto upper = opt.upper.empty() ? std::vector<double>(n, std::numeric_limits<double>::infinity())
                                   : opt.upper;
    auto clamp = [&](std::vector<double>& x) {
        for (std::size_t i = 0; i < n; ++i) x[i] = std::clamp(x[i], lower[i], upper[i]);
    };

    SimplexResult out;
    auto eval = [&](std::vector<double> x) {
        if (out.evals >= opt.max_evals) throw BudgetExhausted{};
        clamp(x);
        ++out.evals;
        const double v = f(x);
        Vertex vx{std::move(x), std::isnan(v) ? std::numeric_limits<double>::infinity() : v};
        if (out.best.empty() || vx.f < out.value) {
            out.best = vx.x;
            out.value = vx.f;
        }
        return vx;
    };
    auto order = [](std::vector<Vertex>& s) {
        std::stable_sort(s.begin(), s.end(), [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
    };
    auto record = [&](const Vertex& best) { out.trace.emplace_back(best.x, best.f); };

    try {
        clamp(start);
        std::vector<Vertex> simplex{eval(start)};
        record(simplex.front());
        for (std::size_t i = 0; i < n; ++i) {
            auto x = start;
            x[i] += opt.scale;
            if (x[i] > upper[i]) x[i] = start[i] - opt.scale;
            simplex.push_back(eval(x));
        }
        order(simplex);
        record(simplex.front());

        while (true) {
            double diameter = 0.0;
            for (std::size_t k = 1; k <= n; ++k) {
                for (std::size_t i = 0; i < n; ++i) {
                    diameter = std::max(diameter, std::abs(simplex[k].x[i] - simplex[0].x[i]));
                }
            }
            if (diameter < opt.x_tol && simplex[n].f - simplex[0].f < opt.f_tol) {
                out.converged = true;
                break;
            }

            std::vector<double> centroid(n, 0.0);
            for (std::size_t k = 0; k < n; ++k) {
                for (std::size_t i = 0; i < n; ++i) centroid[i] += simplex[k].x[i] / static_cast<double>(n);
            }
            auto along = [&](double coef) {
                std::vector<double> x(n);
                for (std::size_t i = 0; i < n; ++i) x[i] = centroid[i] + coef * (simplex[n].x[i] - centroid[i]);
                return x;
            };

            Vertex reflected = eval(along(-1.0));
            if (reflected.f < simplex[0].f) {
                Vertex expanded = eval(along(-2.0));
                simplex[n] = expanded.f < reflected.f ? std::move(expanded) : std::move(reflected);
            } else if (reflected.f < simplex[n - 1].f) {
                simplex[n] = std::move(reflected);
            } else {
                const bool outside = reflected.f < simplex[n].f;
                Vertex contracted = eval(along(outside ? -0.5 : 0.5));
                if (contracted.f < std::min(reflected.f, simplex[n].f)) {
                    simplex[n] = std::move(contracted);
                } else {
                    for (std::size_t k = 1; k <= n; ++k) {
                        std::vector<double> x(n);
                        for (std::size_t i = 0; i < n; ++i) {
                            x[i] = simplex[0].x[i] + 0.5 * (simplex[k].x[i] - simplex[0].x[i]);
                        }
                        simplex[k] = eval(std::move(x));
                    }
                }
            }
            order(simplex);
            record(simplex.front());
        }
    } catch (const BudgetExhausted&) {
        out.converged = false;
    }
    return out;
}

namespace {

// Free coordinates of (alpha, b, c) under the configuration.
struct Layout {
    RuleParams fixed;
    bool alpha_free = true;
    bool b_free = true;

    std::vector<double> pack(const RuleParams& p) const {
        std::vector<double> x;
        if (alpha_free) x.push_back(p.alpha);
        if (b_free) x.push_back(p.b);
        x.push_back(p.c);
        return x;
    }
    RuleParams unpack(std::span<const double> x) const {
        RuleParams p = fixed;
        std::size_t i = 0;
        if (alpha_free) p.alpha = x[i++];
        if (b_free) p.b = x[i++];
        p.c = x[i];
        return p;
    }
    SimplexOptions options(const OptConfig& cfg, int budget) const {
        SimplexOptions o;
        if (alpha_free) {
            o.lower.push_back(0.0);
            o.upper.push_back(kAlphaMax);
        }
        if (b_free) {
            o.lower.push_back(kBMin);
            o.upper.push_back(kUpper);
        }
        o.lower.push_back(kCMin);
        o.upper.push_back(kUpper);
        o.scale = cfg.simplex_scale;
        o.f_tol = cfg.f_tol;
        o.x_tol = cfg.x_tol;
        o.max_evals = budget;
        return o;
    }
};

Layout layout_for(const OptConfig& cfg) {
    Layout l;
    l.fixed = cfg.start;
    if (cfg.fix_alpha) {
        l.alpha_free = false;
        l.fixed.alpha = *cfg.fix_alpha;
        l.b_free = *cfg.fix_alpha > 0.0;
    }
    return l;
}

OptResult to_opt_result(const SimplexResult& r, const Layout& l) {
    OptResult out;
    out.best = l.unpack(r.best);
    out.value = r.value;
    out.evals = r.evals;
    out.converged = r.converged;
    for (const auto& [x, v] : r.trace) out.trace.push_back({l.unpack(x), v});
    return out;
}

std::vector<double> grid(double lo, double hi, double step) {
    std::vector<double> g;
    const int n = static_cast<int>(std::lround((hi - lo) / step));
    for (int i = 0; i <= n; ++i) g.push_back(lo + step * i);
    return g;
}

}  // namespace

OptResult nelder_mead(const Objective& objective, const OptConfig& cfg) {
    cfg.validate();
    const Layout l = layout_for(cfg);
    auto f = [&](std::span<const double> x) { return objective(l.unpack(x)); };
    return to_opt_result(nelder_mead_box(f, l.pack(l.fixed), l.options(cfg, cfg.max_evals)), l);
}

OptResult optimize_rule(const OptConfig& cfg) {
    cfg.validate();
    const Layout l = layout_for(cfg);
    auto objective = [&](const RuleParams& p) { return analytic::expected_rank(p, cfg.risk).total; };

    std::vector<RuleParams> points;
    if (cfg.grid_refine) {
        const auto alphas = l.alpha_free ? grid(0.0, 0.6, 0.1) : std::vector<double>{l.fixed.alpha};
        const auto bs = l.b_free ? grid(1.4, 2.4, 0.2) : std::vector<double>{l.fixed.b};
        for (double a : alphas) {
            for (double b : bs) {
                for (double c : grid(1.6, 2.4, 0.2)) points.push_back({a, b, c});
            }
        }
    }
    const int dims = static_cast<int>(l.pack(l.fixed).size());
    // The scan only runs if the simplex still gets its initial vertices afterwards.
    const bool scan = !points.empty() &&
                      static_cast<int>(points.size()) + dims + 2 <= cfg.max_evals;

    OptResult start_only;
    start_only.best = l.fixed;
    start_only.value = objective(l.fixed);
    start_only.evals = 1;
    start_only.trace.push_back({l.fixed, start_only.value});
    if (cfg.max_evals == 1) return start_only;

    RuleParams from = l.fixed;
    int used = 1;
    if (scan) {
        std::vector<double> values(points.size());
        const unsigned threads = cfg.threads != 0 ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < threads; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < points.size(); i += threads) values[i] = objective(points[i]);
            });
        }
        for (auto& t : pool) t.join();
        used += static_cast<int>(points.size());
        const auto best = std::min_element(values.begin(), values.end()) - values.begin();
        if (values[best] < start_only.value) from = points[best];
    }

    OptConfig nm_cfg = cfg;
    nm_cfg.start = from;
    nm_cfg.max_evals = cfg.max_evals - used;
    OptResult out = nelder_mead(objective, nm_cfg);
    out.evals += used;
    if (start_only.value < out.value) {
        out.best = start_only.best;
        out.value = start_only.value;
    }
    return out;
}

}  // namespace robbins::optimize
