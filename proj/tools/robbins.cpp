// Command-line front end: eval, simulate, optimize, sweep.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <unistd.h>

#include <CLI11.hpp>

#include "robbins/report.hpp"

namespace {

using robbins::analytic::RiskConfig;
using robbins::analytic::RuleParams;
using robbins::report::RunReport;

constexpr int kOk = 0;
constexpr int kRuntimeError = 1;
constexpr int kUsageError = 2;

void diagnose(const std::string& msg) {
    const bool color = std::getenv("NO_COLOR") == nullptr && isatty(STDERR_FILENO);
    if (color) std::cerr << "\033[31merror:\033[0m " << msg << '\n';
    else std::cerr << "error: " << msg << '\n';
}

struct RuleFlags {
    RuleParams p{0.34328, 1.82571, 2.0};

    void add(CLI::App* cmd) {
        cmd->add_option("--alpha", p.alpha, "switch time alpha in [0, 1)")->capture_default_str();
        cmd->add_option("--b", p.b, "rank-phase coefficient, f1(t) = b / (1 - t)")->capture_default_str();
        cmd->add_option("--c", p.c, "threshold-phase coefficient, f2(t) = c / (1 - t)")->capture_default_str();
    }
};

struct QuadFlags {
    RiskConfig cfg;

    void add(CLI::App* cmd) {
        cmd->add_option("--abs-tol", cfg.inner.abs_tol, "inner quadrature absolute tolerance")->capture_default_str();
        cmd->add_option("--rel-tol", cfg.inner.rel_tol, "inner quadrature relative tolerance")->capture_default_str();
        cmd->add_option("--outer-abs-tol", cfg.outer.abs_tol, "outer (y) quadrature absolute tolerance")->capture_default_str();
        cmd->add_option("--outer-rel-tol", cfg.outer.rel_tol, "outer (y) quadrature relative tolerance")->capture_default_str();
        cmd->add_option("--max-subdivisions", cfg.inner.max_subdivisions, "subdivision budget per integral")
            ->capture_default_str()
            ->each([this](const std::string&) { cfg.outer.max_subdivisions = cfg.inner.max_subdivisions; });
    }
    void validate() const {
        cfg.inner.validate();
        cfg.outer.validate();
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void emit(const RunReport& r) { std::cout << robbins::report::to_json(r).dump(2) << '\n'; }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Expected-rank laboratory for the rank-threshold stopping rule"};
    app.require_subcommand(1);
    app.set_version_flag("--version", robbins::report::tool_version());

    RuleFlags eval_rule;
    QuadFlags eval_quad;
    auto* eval = app.add_subcommand("eval", "expected rank by nested quadrature");
    eval_rule.add(eval);
    eval_quad.add(eval);

    RuleFlags sim_rule;
    robbins::simulate::SimConfig sim_cfg;
    std::string estimator = "conditional";
    bool no_tail = false;
    auto* sim = app.add_subcommand("simulate", "Monte Carlo estimate of the expected rank");
    sim_rule.add(sim);
    sim->add_option("--replicates", sim_cfg.replicates, "number of process samples")->capture_default_str();
    sim->add_option("--seed", sim_cfg.seed, "master seed")->capture_default_str();
    sim->add_option("--x-max", sim_cfg.x_max, "height of the sampled strip")->capture_default_str();
    sim->add_option("--estimator", estimator, "conditional | variance-reduced | raw-rank")
        ->capture_default_str()
        ->check(CLI::IsMember({"conditional", "variance-reduced", "raw-rank"}));
    sim->add_option("--conditioning-lag", sim_cfg.conditioning_lag,
                    "conditional estimator: run the rule up to alpha + lag (1 - alpha)")
        ->capture_default_str();
    sim->add_flag("--no-tail-completion", no_tail, "censor runs that do not stop below x_max");
    sim->add_option("--threads", sim_cfg.threads, "worker threads, 0 = all cores")->capture_default_str();

    robbins::optimize::OptConfig opt_cfg;
    bool no_grid = false;
    double fix_alpha = 0.0;
    auto* opt = app.add_subcommand("optimize", "minimize the expected rank over (alpha, b, c)");
    opt->add_option("--alpha0", opt_cfg.start.alpha, "start alpha")->capture_default_str();
    opt->add_option("--b0", opt_cfg.start.b, "start b")->capture_default_str();
    opt->add_option("--c0", opt_cfg.start.c, "start c")->capture_default_str();
    opt->add_option("--simplex-scale", opt_cfg.simplex_scale, "initial simplex edge")->capture_default_str();
    opt->add_option("--f-tol", opt_cfg.f_tol, "value spread tolerance")->capture_default_str();
    opt->add_option("--x-tol", opt_cfg.x_tol, "simplex diameter tolerance")->capture_default_str();
    opt->add_option("--max-evals", opt_cfg.max_evals, "objective evaluation budget")->capture_default_str();
    opt->add_flag("--no-grid", no_grid, "skip the coarse grid pre-scan");
    auto* fix_opt = opt->add_option("--fix-alpha", fix_alpha, "hold alpha fixed (0 also fixes b)");
    opt->add_option("--threads", opt_cfg.threads, "grid scan threads, 0 = all cores")->capture_default_str();
    QuadFlags opt_quad;
    opt_quad.add(opt);

    std::string alpha_range = "0.34328";
    std::string b_range = "1.82571";
    std::string c_range = "2.0";
    std::string output;
    unsigned sweep_threads = 0;
    QuadFlags sweep_quad;
    auto* sweep = app.add_subcommand("sweep", "expected rank over a parameter grid, written as CSV");
    sweep->add_option("--alpha", alpha_range, "lo:hi:count, comma list or value")->capture_default_str();
    sweep->add_option("--b", b_range, "lo:hi:count, comma list or value")->capture_default_str();
    sweep->add_option("--c", c_range, "lo:hi:count, comma list or value")->capture_default_str();
    sweep->add_option("--output,-o", output, "CSV path")->required();
    sweep->add_option("--threads", sweep_threads, "worker threads, 0 = all cores")->capture_default_str();
    sweep_quad.add(sweep);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsageError;
    }

    const auto t0 = std::chrono::steady_clock::now();
    try {
        if (*eval) {
            try {
                eval_rule.p.validate();
                eval_quad.validate();
            } catch (const std::invalid_argument& e) {
                diagnose(e.what());
                return kUsageError;
            }
            RunReport r{"eval", eval_rule.p};
            r.analytic = robbins::analytic::expected_rank(eval_rule.p, eval_quad.cfg);
            r.wall_time_s = seconds_since(t0);
            emit(r);
            if (!r.analytic->converged) {
                diagnose("quadrature did not converge; result is partial");
                return kRuntimeError;
            }
            return kOk;
        }

        if (*sim) {
            sim_cfg.estimator = robbins::simulate::estimator_from_string(estimator);
            sim_cfg.complete_tail = !no_tail;
            try {
                sim_cfg.validate(sim_rule.p);
            } catch (const std::invalid_argument& e) {
                diagnose(e.what());
                return kUsageError;
            }
            RunReport r{"simulate", sim_rule.p};
            r.mc = robbins::simulate::mc_estimate(sim_rule.p, sim_cfg);
            r.mc_estimator = estimator;
            r.wall_time_s = seconds_since(t0);
            emit(r);
            if (r.mc->censoring_flagged) diagnose("censored fraction exceeds 1e-3");
            return kOk;
        }

        if (*opt) {
            opt_cfg.grid_refine = !no_grid;
            if (fix_opt->count() > 0) {
                opt_cfg.fix_alpha = fix_alpha;
                opt_cfg.start.alpha = fix_alpha;
            }
            opt_cfg.risk = opt_quad.cfg;
            try {
                opt_cfg.validate();
                opt_quad.validate();
            } catch (const std::invalid_argument& e) {
                diagnose(e.what());
                return kUsageError;
            }
            const auto result = robbins::optimize::optimize_rule(opt_cfg);
            RunReport r{"optimize", result.best};
            r.opt = result;
            r.wall_time_s = seconds_since(t0);
            emit(r);
            return kOk;
        }

        if (*sweep) {
            std::vector<RuleParams> grid;
            try {
                grid = robbins::report::sweep_grid(robbins::report::parse_range(alpha_range),
                                                   robbins::report::parse_range(b_range),
                                                   robbins::report::parse_range(c_range));
                for (const auto& p : grid) p.validate();
                sweep_quad.validate();
            } catch (const std::invalid_argument& e) {
                diagnose(e.what());
                return kUsageError;
            }
            std::ofstream out(output, std::ios::binary);
            if (!out) {
                diagnose("cannot open '" + output + "' for writing");
                return kRuntimeError;
            }
            const auto rows = robbins::report::run_sweep(grid, sweep_quad.cfg, sweep_threads);
            robbins::report::write_sweep_csv(out, rows);
            out.close();
            if (!out) {
                diagnose("failed writing '" + output + "'");
                return kRuntimeError;
            }
            return kOk;
        }
    } catch (const std::invalid_argument& e) {
        diagnose(e.what());
        return kUsageError;
    } catch (const std::exception& e) {
        diagnose(e.what());
        return kRuntimeError;
    }
    return kUsageError;
}
