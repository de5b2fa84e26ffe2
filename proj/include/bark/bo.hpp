#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>

#include "bark/acquisition.hpp"
#include "bark/sampler.hpp"

namespace bark {

enum class Direction { Minimize, Maximize };

struct BoConfig {
  int n_iterations = 100;
  SamplerConfig sampler;
  AcqConfig acq;
  std::uint64_t seed = 0;
  Direction direction = Direction::Minimize;
  bool prior_only = false;  // skip MCMC, sample kernels from the prior

  static int n_init(int dim) { return std::min(2 * dim, 30); }
};

// One observation row of the session trace. Initialization rows carry
// iteration 0 and NaN acquisition fields.
struct IterationRecord {
  int iteration = 0;
  Point x;
  double y_raw = 0.0;
  double best_so_far = 0.0;
  double acq_value = 0.0;
  double gap = 0.0;
  double fit_seconds = 0.0;
  double opt_seconds = 0.0;
};

// Single-owner ask/tell state. Proposals are pure functions of (seed,
// observations, fit count), and ask() caches its proposal keyed by the
// observation count, so repeated asks without an intervening tell agree.
struct BoSession {
  FeatureSpace space;
  BoConfig config;
  std::vector<Point> X;
  std::vector<double> y_raw;
  std::vector<Point> init_queue;  // consumed by index = observation count
  int n_init_total = 0;
  std::vector<std::pair<Forest, double>> warm_states;  // last state per chain
  bool have_warm = false;
  std::uint64_t fit_count = 0;
  std::vector<IterationRecord> trace;

  // transient (not persisted)
  RunStats last_stats;

  struct Pending {
    std::size_t at_observation_count = 0;
    Point x;
    double acq_value = 0.0;
    double gap = 0.0;
    double fit_seconds = 0.0;
    double opt_seconds = 0.0;
  };
  std::optional<Pending> pending;

  std::size_t observation_count() const { return X.size(); }
  double best_observed() const;  // direction-aware; throws when empty
};

using Objective = std::function<double(const Point&)>;

// Draws min(2D, 30) uniform initial points. With an objective they are
// evaluated immediately (trace rows at iteration 0); without one they queue
// up and ask() hands them out until the queue is exhausted.
BoSession initialize(const FeatureSpace& space, const Objective* objective,
                     const BoConfig& config);

// Standardizes outputs (negated first when minimizing), fits the ensemble
// (warm-started after the first fit), and maximizes the acquisition.
Point ask(BoSession& session);

// Appends an observation and its trace row. Throws on out-of-domain x or
// non-finite y.
void tell(BoSession& session, const Point& x, double y_raw);

struct LoopResult {
  BoSession session;
  bool aborted = false;
  std::string error;  // objective exception message when aborted
};

// initialize + n_iterations rounds of ask/evaluate/tell. An objective
// exception stops the loop and returns the partial session.
LoopResult run_loop(const FeatureSpace& space, const Objective& objective,
                    const BoConfig& config);

}  // namespace bark
