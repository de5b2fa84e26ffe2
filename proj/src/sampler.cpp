#include "bark/sampler.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>

namespace bark {

double grow_log_ratio(int depth, int w0, int w1_star, double alpha, double beta) {
  if (w0 < 1 || w1_star < 1 || depth < 0)
    throw std::invalid_argument("grow_log_ratio: bad counts");
  if (!(alpha > 0.0 && alpha < 1.0) || beta < 0.0)
    throw std::invalid_argument("grow_log_ratio: alpha in (0,1), beta >= 0 required");
  const double d = static_cast<double>(depth);
  return std::log(static_cast<double>(w0) / w1_star) + std::log(alpha) +
         2.0 * std::log(1.0 - alpha * std::pow(2.0 + d, -beta)) -
         std::log(std::pow(1.0 + d, beta) - alpha);
}

double prune_log_ratio(int depth, int w0_after, int w1_of_current, double alpha,
                       double beta) {
  return -grow_log_ratio(depth, w0_after, w1_of_current, alpha, beta);
}

double change_log_ratio() { return 0.0; }

double softplus(double u) { return u > 35.0 ? u : std::log1p(std::exp(u)); }

double softplus_inverse(double s) {
  if (!(s > 0.0)) throw std::invalid_argument("softplus_inverse needs s > 0");
  return s > 35.0 ? s : s + std::log1p(-std::exp(-s));
}

double noise_log_transition_ratio(double old_var, double new_var,
                                  double sigma_eps) {
  if (!(old_var > 0.0 && new_var > 0.0))
    throw std::invalid_argument("noise variances must be positive");
  (void)sigma_eps;  // the Gaussian terms cancel; only the Jacobians survive
  // -log((e^new - 1)/(e^old - 1)) + (new - old), stably:
  return std::log1p(-std::exp(-old_var)) - std::log1p(-std::exp(-new_var));
}

double noise_log_prior_ratio(double old_var, double new_var,
                             const NoisePrior& prior) {
  return prior.log_pdf(new_var) - prior.log_pdf(old_var);
}

namespace {

struct MoveWeights {
  double grow, prune, change;
};

MoveWeights normalized_weights(const SamplerConfig& c) {
  double s = c.w_grow + c.w_prune + c.w_change;
  if (!(c.w_grow > 0.0) || !(c.w_prune > 0.0) || c.w_change < 0.0 || !(s > 0.0))
    throw std::invalid_argument("proposal weights must be positive");
  return {c.w_grow / s, c.w_prune / s, c.w_change / s};
}

bool accept(Rng& rng, double log_acc) {
  if (log_acc >= 0.0) return true;
  return std::log(uniform01(rng)) < log_acc;
}

}  // namespace

void mh_step(ChainState& chain, const FeatureSpace& space, const Dataset& data,
             const SamplerConfig& config, const NoisePrior& prior,
             const SplitSource& splits) {
  GpState& gp = chain.gp;
  const MoveWeights w = normalized_weights(config);
  int proposed[3] = {0, 0, 0}, accepted[3] = {0, 0, 0};

  for (int t = 0; t < gp.forest.size(); ++t) {
    const Tree& tree = gp.forest.trees[t];
    MoveKind move;
    if (tree.is_stump()) {
      move = MoveKind::Grow;  // only feasible move; corrected below
    } else {
      double u = uniform01(chain.rng);
      move = u < w.grow                  ? MoveKind::Grow
             : u < w.grow + w.prune      ? MoveKind::Prune
                                         : MoveKind::Change;
    }
    const int mi = static_cast<int>(move);
    ++chain.counters.proposed[mi];
    ++proposed[mi];

    std::optional<Tree> proposal;
    double structural = 0.0;
    double selection = 0.0;  // log P_sel(reverse | T*) - log P_sel(move | T)

    if (move == MoveKind::Grow) {
      std::vector<int> leaves = leaf_node_indices(tree);
      int pick = leaves[uniform_int(chain.rng, 0, static_cast<long long>(leaves.size()) - 1)];
      int depth = tree.nodes[pick].depth;
      Box box = node_box(space, tree, pick);
      if (depth < config.max_depth && splits.splittable(space, box)) {
        std::optional<SplitRule> rule = splits.sample(space, box, chain.rng);
        if (rule) {
          Tree grown = grow_at(tree, pick, *rule);
          structural = grow_log_ratio(depth, tree.n_leaves,
                                      node_counts(grown).w1, config.alpha,
                                      config.beta);
          selection = std::log(w.prune) - std::log(tree.is_stump() ? 1.0 : w.grow);
          proposal = std::move(grown);
        }
      }
    } else if (move == MoveKind::Prune) {
      std::vector<int> targets = singly_internal_indices(tree);
      int pick = targets[uniform_int(chain.rng, 0, static_cast<long long>(targets.size()) - 1)];
      int depth = tree.nodes[pick].depth;
      Tree pruned = prune_at(tree, pick);
      structural = prune_log_ratio(depth, pruned.n_leaves,
                                   node_counts(tree).w1, config.alpha,
                                   config.beta);
      selection = std::log(pruned.is_stump() ? 1.0 : w.grow) - std::log(w.prune);
      proposal = std::move(pruned);
    } else {
      std::vector<int> targets = singly_internal_indices(tree);
      int pick = targets[uniform_int(chain.rng, 0, static_cast<long long>(targets.size()) - 1)];
      Box box = node_box(space, tree, pick);
      std::optional<SplitRule> rule = splits.sample(space, box, chain.rng);
      if (rule) {
        proposal = change_rule_at(tree, pick, *rule);
        structural = change_log_ratio();
      }
    }

    if (!proposal) continue;  // infeasible proposals count as rejections
    TreeUpdateCandidate cand =
        update_tree_lowrank(gp, data, t, std::move(*proposal));
    if (accept(chain.rng, structural + selection + cand.delta_mll)) {
      apply_tree_update(gp, data, std::move(cand));
      ++chain.counters.accepted[mi];
      ++accepted[mi];
    }
  }

  // noise walk in the unconstrained softplus space
  const int ni = static_cast<int>(MoveKind::Noise);
  ++chain.counters.proposed[ni];
  int noise_accepted = 0;
  double old_var = gp.noise_var;
  double new_var = softplus(softplus_inverse(old_var) +
                            normal(chain.rng, 0.0, config.noise_walk_sd));
  if (new_var > 0.0) {
    NoiseUpdateCandidate cand = update_noise(gp, data, new_var);
    // reverse-minus-forward transition term, hence (new, old) argument order
    double log_acc = cand.delta_mll +
                     noise_log_prior_ratio(old_var, new_var, prior) +
                     noise_log_transition_ratio(new_var, old_var,
                                                config.noise_walk_sd);
    if (accept(chain.rng, log_acc)) {
      apply_noise_update(gp, std::move(cand));
      ++chain.counters.accepted[ni];
      noise_accepted = 1;
    }
  }

  SweepRecord rec;
  rec.sweep = static_cast<int>(chain.records.size());
  rec.mll = gp.mll;
  rec.sigma_y_sq = gp.noise_var;
  rec.total_leaves = 0;
  for (const Tree& t : gp.forest.trees) rec.total_leaves += t.n_leaves;
  if (proposed[0] > 0) rec.accept_grow = static_cast<double>(accepted[0]) / proposed[0];
  if (proposed[1] > 0) rec.accept_prune = static_cast<double>(accepted[1]) / proposed[1];
  if (proposed[2] > 0) rec.accept_change = static_cast<double>(accepted[2]) / proposed[2];
  rec.accept_noise = noise_accepted;
  chain.records.push_back(rec);
}

PosteriorEnsemble run_chains(const FeatureSpace& space, const Dataset& data,
                             const SamplerConfig& config,
                             const NoisePrior& prior, std::uint64_t seed,
                             const std::vector<std::pair<Forest, double>>* warm_start,
                             RunStats* stats) {
  if (config.chains < 1 || config.m < 1 || config.thin < 1)
    throw std::invalid_argument("run_chains: bad config");
  if (config.kept_per_chain() < 1)
    throw std::invalid_argument("run_chains: samples_per_chain < thin keeps nothing");
  if (warm_start && static_cast<int>(warm_start->size()) != config.chains)
    throw std::invalid_argument("run_chains: warm start size != chains");

  const int kept = config.kept_per_chain();
  const int burn = warm_start ? 0 : config.burn_in;
  const double noise_median =
      inverse_gamma_quantile(0.5 * config.nu, 0.5 * config.nu * prior.t, 0.5);

  UniformSplits uniform_src;
  DataSplits data_src(&data.X);
  const SplitSource& splits =
      config.data_splits ? static_cast<const SplitSource&>(data_src)
                         : static_cast<const SplitSource&>(uniform_src);

  std::vector<ChainState> chains(config.chains);
  std::vector<std::vector<GpState>> kept_states(config.chains);

  auto run_one = [&](int c) {
    ChainState& ch = chains[c];
    ch.rng = make_rng(seed, 101, static_cast<std::uint64_t>(c));
    Forest f0;
    double noise0 = noise_median;
    if (warm_start) {
      f0 = (*warm_start)[c].first;
      noise0 = (*warm_start)[c].second;
    } else {
      f0.trees.assign(config.m, Tree::single_leaf());
    }
    ch.gp = make_gp_state(std::move(f0), noise0, data);
    for (int s = 0; s < burn; ++s)
      mh_step(ch, space, data, config, prior, splits);
    for (int s = 0; s < config.samples_per_chain; ++s) {
      mh_step(ch, space, data, config, prior, splits);
      if ((s + 1) % config.thin == 0) kept_states[c].push_back(ch.gp);
    }
  };

  if (config.threads > 1) {
    for (int start = 0; start < config.chains; start += config.threads) {
      std::vector<std::thread> workers;
      int stop = std::min(config.chains, start + config.threads);
      for (int c = start; c < stop; ++c) workers.emplace_back(run_one, c);
      for (std::thread& w : workers) w.join();
    }
  } else {
    for (int c = 0; c < config.chains; ++c) run_one(c);
  }

  PosteriorEnsemble ens;
  ens.states.reserve(static_cast<std::size_t>(config.chains) * kept);
  for (int c = 0; c < config.chains; ++c)
    for (GpState& s : kept_states[c]) ens.states.push_back(std::move(s));

  if (stats) {
    stats->chains = config.chains;
    stats->burn_in_per_chain = burn;
    stats->kept_per_chain = kept;
    stats->thin = config.thin;
    stats->m = config.m;
    stats->warm_started = warm_start != nullptr;
    stats->records.clear();
    stats->record_chain.clear();
    stats->counters.clear();
    stats->mll_traces.assign(config.chains, {});
    for (int c = 0; c < config.chains; ++c) {
      for (const SweepRecord& r : chains[c].records) {
        stats->records.push_back(r);
        stats->record_chain.push_back(c);
        if (r.sweep >= burn) stats->mll_traces[c].push_back(r.mll);
      }
      stats->counters.push_back(chains[c].counters);
    }
  }
  return ens;
}

PosteriorEnsemble sample_prior_ensemble(const FeatureSpace& space,
                                        const Dataset& data,
                                        const SamplerConfig& config,
                                        const NoisePrior& prior,
                                        std::uint64_t seed) {
  if (config.chains < 1 || config.m < 1 || config.kept_per_chain() < 1)
    throw std::invalid_argument("sample_prior_ensemble: bad config");
  UniformSplits uniform_src;
  DataSplits data_src(&data.X);
  const SplitSource& splits =
      config.data_splits ? static_cast<const SplitSource&>(data_src)
                         : static_cast<const SplitSource&>(uniform_src);
  Rng rng = make_rng(seed, 202);
  PosteriorEnsemble ens;
  const int total = config.chains * config.kept_per_chain();
  ens.states.reserve(total);
  for (int s = 0; s < total; ++s) {
    Forest f = sample_forest_prior(space, config.m, config.alpha, config.beta,
                                   rng, splits, config.max_depth);
    double noise = sample_inverse_gamma(prior.shape(), prior.rate(), rng);
    ens.states.push_back(make_gp_state(std::move(f), noise, data));
  }
  return ens;
}

std::vector<double> autocorrelation(const std::vector<double>& trace,
                                    int max_lag) {
  const int n = static_cast<int>(trace.size());
  if (n <= max_lag) throw std::invalid_argument("autocorrelation: trace too short");
  std::vector<double> rho(max_lag + 1, 1.0);
  // exact equality, not variance, guards the constant-trace convention: the
  // accumulated mean of identical values can round, leaving a tiny nonzero
  // variance whose ratio would decay like (n - lag) / n
  bool constant = true;
  for (double v : trace)
    if (v != trace.front()) {
      constant = false;
      break;
    }
  if (constant) return rho;
  double mean = 0.0;
  for (double v : trace) mean += v;
  mean /= n;
  double c0 = 0.0;
  for (double v : trace) c0 += (v - mean) * (v - mean);
  if (c0 == 0.0) return rho;
  for (int lag = 1; lag <= max_lag; ++lag) {
    double c = 0.0;
    for (int t = 0; t + lag < n; ++t) c += (trace[t] - mean) * (trace[t + lag] - mean);
    rho[lag] = c / c0;
  }
  return rho;
}

}  // namespace bark
