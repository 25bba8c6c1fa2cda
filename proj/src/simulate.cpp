#include "robbins/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>

namespace robbins::simulate {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool passes(const Atom& a, const RuleParams& p, double y) {
    if (a.t <= p.alpha) return a.x <= std::min(p.b / (1.0 - a.t), y);
    return a.x <= p.c / (1.0 - a.t);
}

double conditioning_time(const RuleParams& p, double lag) {
    return p.alpha + lag * (1.0 - p.alpha);
}

// Stop in the unsampled band (t > 1 - c/x_max, x_max < x <= f2(t)).
struct HighStop {
    double one_minus_t;
    double x;
    double unseen_past;  // mean count of unsampled atoms south-west of the stop
};

// The first arrival in the band has cumulative area c (w - 1 + e^{-w}) with
// w = ln((1 - t_x) / (1 - t)); invert for a unit exponential draw.
HighStop high_band_stop(double c, double x_max, double exp_draw, double uniform_draw) {
    const double target = exp_draw / c;
    double lo = 0.0;
    double hi = target + 1.0;
    for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid - 1.0 + std::exp(-mid) < target) lo = mid;
        else hi = mid;
    }
    const double w = 0.5 * (lo + hi);
    HighStop s{};
    s.one_minus_t = (c / x_max) * std::exp(-w);
    s.x = x_max + uniform_draw * (x_max * std::exp(w) - x_max);
    // Free region below x: all of [0, 1 - c/x) in (x_max, x) except the band.
    const double w_x = std::log(s.x / x_max);
    const double t_at_x = 1.0 - c / s.x;
    s.unseen_past = t_at_x * (s.x - x_max) - c * (w_x - 1.0 + std::exp(-w_x));
    return s;
}

std::string describe(const char* what, double got) {
    std::ostringstream os;
    os << what << " (got " << got << ")";
    return os.str();
}

unsigned thread_count(unsigned requested) {
    if (requested != 0) return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

// Fills out[i] = body(i) for i in [0, n) over `threads` contiguous chunks.
template <class T, class Body>
void parallel_fill(std::vector<T>& out, unsigned threads, const Body& body) {
    const std::size_t n = out.size();
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    const std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            try {
                const std::size_t end = std::min(n, (w + 1) * chunk);
                for (std::size_t i = w * chunk; i < end; ++i) out[i] = body(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace

const char* to_string(Estimator e) {
    switch (e) {
        case Estimator::conditional: return "conditional";
        case Estimator::variance_reduced: return "variance-reduced";
        case Estimator::raw_rank: return "raw-rank";
    }
    return "unknown";
}

Estimator estimator_from_string(const std::string& name) {
    if (name == "conditional") return Estimator::conditional;
    if (name == "variance-reduced") return Estimator::variance_reduced;
    if (name == "raw-rank") return Estimator::raw_rank;
    throw std::invalid_argument("unknown estimator '" + name + "'");
}

void SimConfig::validate(const RuleParams& p) const {
    p.validate();
    if (replicates < 1) throw std::invalid_argument("replicates must be >= 1");
    if (!(conditioning_lag >= 0.0 && conditioning_lag < 1.0)) {
        throw std::invalid_argument(describe("conditioning_lag must satisfy 0 <= lag < 1", conditioning_lag));
    }
    const double t_check = estimator == Estimator::conditional
                               ? conditioning_time(p, conditioning_lag)
                               : p.alpha;
    const double floor = std::max(p.c, p.b) / (1.0 - t_check);
    if (!(x_max > floor)) {
        throw std::invalid_argument(describe("x_max must exceed the thresholds of the rule", x_max) +
                                    ", need > " + std::to_string(floor));
    }
}

std::uint64_t replicate_seed(std::uint64_t master, std::uint64_t index) {
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return mix(mix(master) ^ index);
}

std::vector<Atom> sample_process(Rng& rng, double x_max, double horizon) {
    if (!(x_max > 0.0)) throw std::invalid_argument("sample_process: x_max must be > 0");
    // Arrival times of a rate-x_max process are the sorted uniforms of a
    // Poisson(x_max * horizon) count.
    std::exponential_distribution<double> gap(x_max);
    std::uniform_real_distribution<double> height(0.0, x_max);
    std::vector<Atom> atoms;
    atoms.reserve(static_cast<std::size_t>(x_max * horizon * 1.3) + 16);
    for (double t = gap(rng); t <= horizon; t += gap(rng)) {
        atoms.push_back({t, height(rng)});
    }
    return atoms;
}

std::vector<Atom> sample_process(std::uint64_t seed, double x_max) {
    Rng rng(seed);
    return sample_process(rng, x_max);
}

double realize_y(std::span<const Atom> atoms, const RuleParams& p) {
    double y = kInf;
    for (const Atom& a : atoms) {
        if (a.t > p.alpha) break;
        if (a.x > p.b / (1.0 - a.t)) y = std::min(y, a.x);
    }
    return y;
}

StopOutcome apply_rule(std::span<const Atom> atoms, const RuleParams& p) {
    StopOutcome out;
    out.y_realized = realize_y(atoms, p);
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        if (passes(atoms[i], p, out.y_realized)) {
            out.stopped = true;
            out.stop_atom = atoms[i];
            out.stop_index = i;
            out.phase = atoms[i].t <= p.alpha ? Phase::pre_alpha : Phase::post_alpha;
            return out;
        }
    }
    return out;
}

double loss_of(std::span<const Atom> atoms, const StopOutcome& outcome, LossMode mode) {
    if (!outcome.stopped) throw std::logic_error("loss_of: outcome is censored");
    const Atom s = outcome.stop_atom;
    double count = 1.0;
    if (mode == LossMode::variance_reduced) {
        for (const Atom& a : atoms) {
            if (a.t >= s.t) break;
            if (a.x < s.x) count += 1.0;
        }
        return count + (1.0 - s.t) * s.x;
    }
    for (const Atom& a : atoms) {
        if (a.x < s.x) count += 1.0;
    }
    return count;
}

double exceed_probability(double x, double s, double c) {
    const double one_minus_s = 1.0 - s;
    if (x <= 0.0) return 1.0;
    if (x * one_minus_s < c) return 1.0 - x * one_minus_s / (c + 1.0);
    return std::pow(c / (x * one_minus_s), c) / (c + 1.0);
}

double conditional_loss(std::span<const Atom> atoms, const RuleParams& p, double x_max,
                        double lag) {
    const double s = conditioning_time(p, lag);
    const double y = realize_y(atoms, p);
    std::size_t seen = 0;
    for (; seen < atoms.size() && atoms[seen].t <= s; ++seen) {
        if (passes(atoms[seen], p, y)) {
            StopOutcome o;
            o.stopped = true;
            o.stop_atom = atoms[seen];
            o.stop_index = seen;
            return loss_of(atoms, o, LossMode::variance_reduced);
        }
    }
    // The rest is a threshold rule on [s, 1]; rescaling time by 1 - s and
    // values by 1 / (1 - s) maps it onto the same rule on [0, 1], so the part
    // of the loss not involving seen atoms is the threshold-rule value.
    const double c = p.c;
    double loss = analytic::threshold_formula(c);
    for (std::size_t i = 0; i < seen; ++i) {
        loss += exceed_probability(atoms[i].x, s, c);
    }
    // unsampled atoms above x_max on [0, s]
    loss += s * std::pow(c / (1.0 - s), c) * std::pow(x_max, 1.0 - c) / ((c + 1.0) * (c - 1.0));
    return loss;
}

ReplicateResult run_replicate(const RuleParams& p, const SimConfig& cfg, std::uint64_t index) {
    Rng rng(replicate_seed(cfg.seed, index));
    const std::vector<Atom> atoms = sample_process(rng, cfg.x_max);
    if (cfg.estimator == Estimator::conditional) {
        return {false, conditional_loss(atoms, p, cfg.x_max, cfg.conditioning_lag)};
    }

    const LossMode mode = cfg.estimator == Estimator::raw_rank ? LossMode::raw_rank
                                                               : LossMode::variance_reduced;
    const StopOutcome outcome = apply_rule(atoms, p);
    std::exponential_distribution<double> unit_exp(1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double exp_draw = unit_exp(rng);
    const double uniform_draw = unit(rng);

    if (!cfg.complete_tail) {
        if (!outcome.stopped) return {true, 0.0};
        return {false, loss_of(atoms, outcome, mode)};
    }

    const HighStop high = high_band_stop(p.c, cfg.x_max, exp_draw, uniform_draw);
    if (outcome.stopped && 1.0 - outcome.stop_atom.t >= high.one_minus_t) {
        return {false, loss_of(atoms, outcome, mode)};
    }
    // Every sampled atom lies below the high stop.
    const double t_high = 1.0 - high.one_minus_t;
    if (mode == LossMode::variance_reduced) {
        double earlier = 0.0;
        for (const Atom& a : atoms) {
            if (a.t >= t_high) break;
            earlier += 1.0;
        }
        return {false, 1.0 + earlier + high.unseen_past + high.one_minus_t * high.x};
    }
    std::poisson_distribution<long long> unseen(high.unseen_past +
                                                high.one_minus_t * (high.x - cfg.x_max));
    return {false, 1.0 + static_cast<double>(atoms.size()) + static_cast<double>(unseen(rng))};
}

namespace {

MCEstimate summarize(const std::vector<ReplicateResult>& results) {
    MCEstimate est;
    est.replicates = static_cast<std::int64_t>(results.size());
    double sum = 0.0;
    for (const auto& r : results) {
        if (r.censored) {
            ++est.censored_count;
        } else {
            ++est.n_effective;
            sum += r.loss;
        }
    }
    if (est.n_effective == 0) throw std::runtime_error("mc_estimate: all replicates censored");
    est.mean = sum / static_cast<double>(est.n_effective);
    double ss = 0.0;
    for (const auto& r : results) {
        if (!r.censored) ss += (r.loss - est.mean) * (r.loss - est.mean);
    }
    est.sample_variance = est.n_effective > 1 ? ss / static_cast<double>(est.n_effective - 1) : 0.0;
    est.std_error = std::sqrt(est.sample_variance / static_cast<double>(est.n_effective));
    est.censoring_flagged =
        static_cast<double>(est.censored_count) > 1e-3 * static_cast<double>(est.replicates);
    return est;
}

}  // namespace

MCEstimate mc_estimate(const RuleParams& p, const SimConfig& cfg) {
    cfg.validate(p);
    std::vector<ReplicateResult> results(static_cast<std::size_t>(cfg.replicates));
    parallel_fill(results, thread_count(cfg.threads),
                  [&](std::size_t i) { return run_replicate(p, cfg, i); });
    return summarize(results);
}

PairedEstimate mc_compare(const RuleParams& first, const RuleParams& second,
                          const SimConfig& cfg) {
    cfg.validate(first);
    cfg.validate(second);
    struct Pair {
        ReplicateResult a;
        ReplicateResult b;
    };
    std::vector<Pair> pairs(static_cast<std::size_t>(cfg.replicates));
    parallel_fill(pairs, thread_count(cfg.threads), [&](std::size_t i) {
        return Pair{run_replicate(first, cfg, i), run_replicate(second, cfg, i)};
    });

    std::vector<ReplicateResult> diffs;
    diffs.reserve(pairs.size());
    for (const auto& pr : pairs) {
        const bool censored = pr.a.censored || pr.b.censored;
        diffs.push_back({censored, censored ? 0.0 : pr.a.loss - pr.b.loss});
    }
    const MCEstimate d = summarize(diffs);
    PairedEstimate out;
    out.mean_diff = d.mean;
    out.std_error = d.std_error;
    out.t_statistic = d.std_error > 0.0 ? d.mean / d.std_error : 0.0;
    out.n_effective = d.n_effective;
    return out;
}

}  // namespace robbins::simulate
