#include "bark/bo.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bark {

namespace {

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

double BoSession::best_observed() const {
  if (y_raw.empty()) throw std::logic_error("no observations yet");
  double best = y_raw.front();
  for (double v : y_raw)
    best = config.direction == Direction::Minimize ? std::min(best, v)
                                                   : std::max(best, v);
  return best;
}

BoSession initialize(const FeatureSpace& space, const Objective* objective,
                     const BoConfig& config) {
  if (config.n_iterations < 0)
    throw std::invalid_argument("n_iterations must be nonnegative");
  if (space.dim() == 0) throw std::invalid_argument("empty search space");

  BoSession s;
  s.space = space;
  s.config = config;
  s.n_init_total = BoConfig::n_init(space.dim());
  Rng rng = make_rng(config.seed, 77);
  s.init_queue = sample_uniform(space, s.n_init_total, rng);

  if (objective) {
    for (int i = 0; i < s.n_init_total; ++i) {
      Point x = ask(s);
      tell(s, x, (*objective)(x));
    }
  }
  return s;
}

Point ask(BoSession& s) {
  const std::size_t n = s.observation_count();
  if (n < static_cast<std::size_t>(s.n_init_total)) return s.init_queue[n];
  if (n == 0) throw std::logic_error("ask needs at least one observation");
  if (s.pending && s.pending->at_observation_count == n) return s.pending->x;

  // Fit. Minimization negates raw outputs before standardization (an odd
  // affine map, so it commutes with standardization exactly) and the UCB
  // maximization machinery runs unchanged.
  auto fit_start = std::chrono::steady_clock::now();
  std::vector<double> y_fit = s.y_raw;
  if (s.config.direction == Direction::Minimize)
    for (double& v : y_fit) v = -v;
  Dataset data = standardize(s.X, std::move(y_fit));
  NoisePrior prior =
      make_noise_prior(s.config.sampler.nu, s.config.sampler.q);
  std::uint64_t fit_seed = derive_seed(s.config.seed, 1000 + s.fit_count);

  PosteriorEnsemble ens;
  if (s.config.prior_only) {
    ens = sample_prior_ensemble(s.space, data, s.config.sampler, prior,
                                fit_seed);
    s.last_stats = RunStats{};
  } else {
    ens = run_chains(s.space, data, s.config.sampler, prior, fit_seed,
                     s.have_warm ? &s.warm_states : nullptr, &s.last_stats);
    const int kept = s.config.sampler.kept_per_chain();
    s.warm_states.clear();
    for (int c = 0; c < s.config.sampler.chains; ++c) {
      const GpState& last = ens.states[(c + 1) * kept - 1];
      s.warm_states.emplace_back(last.forest, last.noise_var);
    }
    s.have_warm = true;
  }
  s.fit_count += 1;
  double fit_seconds = elapsed_seconds(fit_start);

  auto opt_start = std::chrono::steady_clock::now();
  Rng acq_rng = make_rng(fit_seed, 55);
  AcqResult res = maximize_acquisition(ens, s.space, s.config.acq, acq_rng);
  double opt_seconds = elapsed_seconds(opt_start);

  s.pending = BoSession::Pending{n,           res.x_best,  res.value,
                                 res.proven_gap, fit_seconds, opt_seconds};
  return res.x_best;
}

void tell(BoSession& s, const Point& x, double y_raw) {
  validate_point(s.space, x);
  if (!std::isfinite(y_raw))
    throw std::invalid_argument("observation must be finite");

  const std::size_t n_before = s.observation_count();
  s.X.push_back(x);
  s.y_raw.push_back(y_raw);

  IterationRecord rec;
  rec.x = x;
  rec.y_raw = y_raw;
  rec.best_so_far = s.best_observed();
  if (n_before < static_cast<std::size_t>(s.n_init_total)) {
    rec.iteration = 0;
    rec.acq_value = kNaN;
    rec.gap = kNaN;
    rec.fit_seconds = kNaN;
    rec.opt_seconds = kNaN;
  } else {
    rec.iteration =
        static_cast<int>(n_before) - s.n_init_total + 1;
    if (s.pending && s.pending->at_observation_count == n_before &&
        s.pending->x == x) {
      rec.acq_value = s.pending->acq_value;
      rec.gap = s.pending->gap;
      rec.fit_seconds = s.pending->fit_seconds;
      rec.opt_seconds = s.pending->opt_seconds;
    } else {
      rec.acq_value = kNaN;
      rec.gap = kNaN;
      rec.fit_seconds = kNaN;
      rec.opt_seconds = kNaN;
    }
  }
  s.trace.push_back(std::move(rec));
  s.pending.reset();
}

LoopResult run_loop(const FeatureSpace& space, const Objective& objective,
                    const BoConfig& config) {
  if (!objective) throw std::invalid_argument("objective must be callable");
  LoopResult out;
  out.session = initialize(space, nullptr, config);
  const int total = out.session.n_init_total + config.n_iterations;
  for (int step = 0; step < total; ++step) {
    Point x = ask(out.session);
    double y;
    try {
      y = objective(x);
    } catch (const std::exception& e) {
      out.aborted = true;
      out.error = e.what();
      break;
    }
    tell(out.session, x, y);
  }
  return out;
}

}  // namespace bark
