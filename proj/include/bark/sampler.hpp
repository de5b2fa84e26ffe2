#pragma once

#include <optional>
#include <vector>

#include "bark/gp.hpp"
#include "bark/noise.hpp"

namespace bark {

struct SamplerConfig {
  double alpha = 0.95;  // depth prior
  double beta = 2.0;
  double nu = 3.0;  // noise prior
  double q = 0.9;
  int m = 50;  // trees per forest
  int chains = 4;
  int burn_in = 1000;
  int samples_per_chain = 400;
  int thin = 100;
  double noise_walk_sd = 0.5;  // step in the softplus-unconstrained space
  double w_grow = 0.25, w_prune = 0.25, w_change = 0.5;
  int max_depth = kMaxTreeDepth;
  bool data_splits = false;  // ablation: BART-style data-driven rules
  int threads = 1;

  int kept_per_chain() const { return samples_per_chain / thin; }
};

enum class MoveKind { Grow = 0, Prune = 1, Change = 2, Noise = 3 };

struct AcceptCounters {
  long proposed[4] = {0, 0, 0, 0};
  long accepted[4] = {0, 0, 0, 0};
  double rate(MoveKind k) const {
    int i = static_cast<int>(k);
    return proposed[i] == 0 ? 0.0 : static_cast<double>(accepted[i]) / proposed[i];
  }
};

// Per-sweep diagnostics row (one full pass over the trees plus one noise move).
struct SweepRecord {
  int sweep = 0;
  double mll = 0.0;
  double sigma_y_sq = 0.0;
  int total_leaves = 0;
  // per-sweep acceptance fractions; -1 when the move was never proposed
  double accept_grow = -1.0, accept_prune = -1.0, accept_change = -1.0;
  double accept_noise = -1.0;
};

struct ChainState {
  GpState gp;
  Rng rng;
  AcceptCounters counters;
  std::vector<SweepRecord> records;
};

// Combined log(transition ratio x prior ratio) for growing a leaf at `depth`
// in a tree with w0 leaves, producing a tree with w1_star singly-internal
// nodes. The split-rule probability cancels between the two ratios:
//   log(w0/w1*) + log a + 2 log(1 - a/(2+d)^b) - log((1+d)^b - a).
double grow_log_ratio(int depth, int w0, int w1_star, double alpha, double beta);
// Prune is the exact negation of the grow that would undo it: the pruned
// tree has w0_after leaves and the pruned node sits at `depth`.
double prune_log_ratio(int depth, int w0_after, int w1_of_current, double alpha,
                       double beta);
// Change proposals cancel structurally; acceptance is pure likelihood.
double change_log_ratio();

// log f(old -> new) - log f(new -> old) for the softplus-transformed Gaussian
// walk on sigma_y^2 (the Gaussian terms cancel; only the Jacobians survive):
//   -log((e^new - 1)/(e^old - 1)) + (new - old).
// The MH step consumes the reverse orientation, i.e. the negation.
double noise_log_transition_ratio(double old_var, double new_var,
                                  double sigma_eps);
double noise_log_prior_ratio(double old_var, double new_var,
                             const NoisePrior& prior);

double softplus(double u);
double softplus_inverse(double s);

// One sweep: for each tree, pick grow/prune/change (a bare-root tree forces
// grow; the selection-probability asymmetry that creates is corrected in the
// acceptance), propose, and accept by structural ratios + delta mll; then one
// noise walk move. Appends a SweepRecord.
void mh_step(ChainState& chain, const FeatureSpace& space, const Dataset& data,
             const SamplerConfig& config, const NoisePrior& prior,
             const SplitSource& splits);

// Instrumentation for defaults conformance: what a fit actually did.
struct RunStats {
  int chains = 0;
  int burn_in_per_chain = 0;  // sweeps discarded per chain (0 on warm start)
  int kept_per_chain = 0;
  int thin = 0;
  int m = 0;
  bool warm_started = false;
  std::vector<SweepRecord> records;  // all chains, chain-major
  std::vector<int> record_chain;     // chain index per record row
  std::vector<AcceptCounters> counters;
  std::vector<std::vector<double>> mll_traces;  // post burn-in, per chain
};

// Runs `config.chains` independent chains (in parallel when config.threads >
// 1; results are deterministic either way), keeping every thin-th of the
// samples_per_chain post-burn-in sweeps. Warm starts skip burn-in entirely.
PosteriorEnsemble run_chains(const FeatureSpace& space, const Dataset& data,
                             const SamplerConfig& config,
                             const NoisePrior& prior, std::uint64_t seed,
                             const std::vector<std::pair<Forest, double>>*
                                 warm_start = nullptr,
                             RunStats* stats = nullptr);

// Ablation that skips MCMC entirely: chains * kept_per_chain states whose
// forests and noise variances are drawn straight from the prior. The GP
// algebra still conditions each state on the data.
PosteriorEnsemble sample_prior_ensemble(const FeatureSpace& space,
                                        const Dataset& data,
                                        const SamplerConfig& config,
                                        const NoisePrior& prior,
                                        std::uint64_t seed);

// Sample autocorrelation, rho[0] = 1; a constant trace returns all ones.
std::vector<double> autocorrelation(const std::vector<double>& trace,
                                    int max_lag);

}  // namespace bark
