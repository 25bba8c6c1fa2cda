#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "robbins/analytic.hpp"

namespace robbins::simulate {

using analytic::RuleParams;

struct Atom {
    double t = 0.0;
    double x = 0.0;
};

enum class Phase { pre_alpha, post_alpha };

struct StopOutcome {
    bool stopped = false;
    Atom stop_atom{};
    std::size_t stop_index = 0;  // index into the atom list the rule ran on
    Phase phase = Phase::pre_alpha;
    double y_realized = std::numeric_limits<double>::infinity();
};

/// How a replicate is turned into a number whose mean is E[R(tau, X)].
enum class Estimator {
    /// Run the rule up to s = alpha + lag (1 - alpha); if it has not stopped,
    /// use the exact conditional expectation of the loss given the history.
    conditional,
    /// I(tau, X) + (1 - tau) X on the realized sample.
    variance_reduced,
    /// Absolute rank counted over the whole sample.
    raw_rank,
};

const char* to_string(Estimator e);
Estimator estimator_from_string(const std::string& name);

struct SimConfig {
    double x_max = 200.0;
    std::uint64_t seed = 1;
    std::int64_t replicates = 500000;
    Estimator estimator = Estimator::conditional;
    /// Sample stops above x_max exactly instead of censoring (estimators
    /// variance_reduced and raw_rank).
    bool complete_tail = true;
    double conditioning_lag = 0.25;
    unsigned threads = 0;  // 0 = hardware concurrency

    void validate(const RuleParams& p) const;
};

struct MCEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    double sample_variance = 0.0;
    std::int64_t n_effective = 0;
    std::int64_t censored_count = 0;
    std::int64_t replicates = 0;
    bool censoring_flagged = false;  // censored fraction above 1e-3
};

struct PairedEstimate {
    double mean_diff = 0.0;  // E[loss(first) - loss(second)]
    double std_error = 0.0;
    double t_statistic = 0.0;
    std::int64_t n_effective = 0;
};

using Rng = std::mt19937_64;

/// Seed of replicate `index`, a splitmix64 mix of (master, index).
std::uint64_t replicate_seed(std::uint64_t master, std::uint64_t index);

/// Unit-intensity Poisson process on [0, horizon] x [0, x_max], sorted by t.
std::vector<Atom> sample_process(Rng& rng, double x_max, double horizon = 1.0);
std::vector<Atom> sample_process(std::uint64_t seed, double x_max);

/// Lowest atom value above f1 on [0, alpha]; +infinity if there is none.
double realize_y(std::span<const Atom> atoms, const RuleParams& p);

/// First atom in time order that satisfies the rule; censored if none does.
StopOutcome apply_rule(std::span<const Atom> atoms, const RuleParams& p);

enum class LossMode { variance_reduced, raw_rank };

/// Loss of a stopped outcome; throws std::logic_error on a censored one.
double loss_of(std::span<const Atom> atoms, const StopOutcome& outcome,
               LossMode mode = LossMode::variance_reduced);

/// P(X > x) for the stop (tau, X) of the threshold rule c / (1 - t) started
/// fresh at time s.
double exceed_probability(double x, double s, double c);

/// Conditional estimator value for one sample (see Estimator::conditional).
double conditional_loss(std::span<const Atom> atoms, const RuleParams& p, double x_max,
                        double lag);

struct ReplicateResult {
    bool censored = false;
    double loss = 0.0;
};

/// Sample and score replicate `index` of an experiment.
ReplicateResult run_replicate(const RuleParams& p, const SimConfig& cfg, std::uint64_t index);

MCEstimate mc_estimate(const RuleParams& p, const SimConfig& cfg);

/// Paired comparison on common random atoms per replicate.
PairedEstimate mc_compare(const RuleParams& first, const RuleParams& second,
                          const SimConfig& cfg);

}  // namespace robbins::simulate
