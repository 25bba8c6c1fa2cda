#include "robbins/report.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <thread>

#ifndef ROBBINS_VERSION
#define ROBBINS_VERSION "0.0.0"
#endif

namespace robbins::report {

const char* tool_version() { return ROBBINS_VERSION; }

Json to_json(const analytic::RuleParams& p) {
    return Json{{"alpha", p.alpha}, {"b", p.b}, {"c", p.c}};
}

Json to_json(const analytic::RiskBreakdown& r) {
    return Json{{"pre_alpha", r.pre_alpha},
                {"post_alpha", r.post_alpha},
                {"total", r.total},
                {"quad_error", r.quad_error},
                {"converged", r.converged}};
}

Json to_json(const simulate::MCEstimate& m) {
    return Json{{"mean", m.mean},
                {"std_error", m.std_error},
                {"n_effective", m.n_effective},
                {"censored_count", m.censored_count},
                {"replicates", m.replicates},
                {"censoring_flagged", m.censoring_flagged}};
}

Json to_json(const optimize::OptResult& o) {
    return Json{{"best", to_json(o.best)},
                {"value", o.value},
                {"evals", o.evals},
                {"converged", o.converged},
                {"trace_length", o.trace.size()}};
}

Json to_json(const RunReport& r) {
    Json j{{"command", r.command}, {"params", to_json(r.params)}};
    if (r.analytic) j["analytic"] = to_json(*r.analytic);
    if (r.mc) {
        j["mc"] = to_json(*r.mc);
        if (r.mc_estimator) j["mc"]["estimator"] = *r.mc_estimator;
    }
    if (r.opt) j["opt"] = to_json(*r.opt);
    j["wall_time_s"] = r.wall_time_s;
    j["tool_version"] = tool_version();
    return j;
}

namespace {

double parse_number(const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("not a number: '" + s + "'");
    }
    if (used != s.size()) throw std::invalid_argument("not a number: '" + s + "'");
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) parts.push_back(cur);
    if (!s.empty() && s.back() == sep) parts.emplace_back();
    return parts;
}

}  // namespace

std::vector<double> parse_range(const std::string& text) {
    if (text.find(':') != std::string::npos) {
        const auto parts = split(text, ':');
        if (parts.size() != 3) throw std::invalid_argument("range must be lo:hi:count, got '" + text + "'");
        const double lo = parse_number(parts[0]);
        const double hi = parse_number(parts[1]);
        const double count = parse_number(parts[2]);
        if (count < 1 || count != static_cast<long>(count)) {
            throw std::invalid_argument("range count must be a positive integer, got '" + parts[2] + "'");
        }
        if (hi < lo) throw std::invalid_argument("range needs lo <= hi, got '" + text + "'");
        const long n = static_cast<long>(count);
        std::vector<double> out;
        for (long i = 0; i < n; ++i) {
            out.push_back(n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
        }
        return out;
    }
    std::vector<double> out;
    for (const auto& part : split(text, ',')) out.push_back(parse_number(part));
    if (out.empty()) throw std::invalid_argument("empty value list");
    return out;
}

std::vector<analytic::RuleParams> sweep_grid(const std::vector<double>& alphas,
                                             const std::vector<double>& bs,
                                             const std::vector<double>& cs) {
    std::vector<analytic::RuleParams> grid;
    for (double a : alphas) {
        for (double b : bs) {
            for (double c : cs) grid.push_back({a, b, c});
        }
    }
    return grid;
}

std::vector<SweepRow> run_sweep(const std::vector<analytic::RuleParams>& grid,
                                const analytic::RiskConfig& cfg, unsigned threads) {
    for (const auto& p : grid) p.validate();
    std::vector<SweepRow> rows(grid.size());
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < grid.size(); i += threads) {
                    rows[i] = {grid[i], analytic::expected_rank(grid[i], cfg)};
                }
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return rows;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << "alpha,b,c,expected_rank,quad_error\n";
    char buf[160];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g,%.10g,%.10g\n", r.params.alpha, r.params.b,
                      r.params.c, r.risk.total, r.risk.quad_error);
        os << buf;
    }
}

}  // namespace robbins::report
