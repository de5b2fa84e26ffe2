#include "bark/gp.hpp"

#include <cmath>
#include <stdexcept>

namespace bark {

namespace {

constexpr double kLog2Pi = 1.837877066409345483560659472811;

Eigen::VectorXd y_vector(const Dataset& data) {
  return Eigen::Map<const Eigen::VectorXd>(data.y.data(),
                                           static_cast<Eigen::Index>(data.y.size()));
}

// Cholesky with escalating diagonal jitter (1e-8 .. 1e-4) on breakdown.
Eigen::LLT<Eigen::MatrixXd> robust_llt(const Eigen::MatrixXd& A) {
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() == Eigen::Success) return llt;
  double jitter = 1e-8;
  while (jitter <= 1e-4) {
    Eigen::MatrixXd Aj = A;
    Aj.diagonal().array() += jitter;
    llt.compute(Aj);
    if (llt.info() == Eigen::Success) return llt;
    jitter *= 10.0;
  }
  throw std::runtime_error("kernel matrix factorization failed despite jitter");
}

double llt_logdet(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

// Factorizes K + noise I into the explicit-inverse cache.
void factorize(const Eigen::MatrixXd& K, double noise_var,
               const Eigen::VectorXd& y, Eigen::MatrixXd* Kinv,
               Eigen::VectorXd* alpha, double* logdet, double* mll) {
  const Eigen::Index n = K.rows();
  Eigen::MatrixXd Kn = K;
  Kn.diagonal().array() += noise_var;
  Eigen::LLT<Eigen::MatrixXd> llt = robust_llt(Kn);
  *Kinv = llt.solve(Eigen::MatrixXd::Identity(n, n));
  *alpha = llt.solve(y);
  *logdet = llt_logdet(llt);
  *mll = -0.5 * y.dot(*alpha) - 0.5 * *logdet -
         0.5 * static_cast<double>(n) * kLog2Pi;
}

std::vector<std::vector<int>> assign_leaves(const Forest& forest,
                                            const std::vector<Point>& X) {
  std::vector<std::vector<int>> ix(forest.size());
  for (int t = 0; t < forest.size(); ++t) {
    ix[t].resize(X.size());
    for (std::size_t n = 0; n < X.size(); ++n)
      ix[t][n] = leaf_of(forest.trees[t], X[n]);
  }
  return ix;
}

Eigen::MatrixXd gram_from_assignments(const std::vector<std::vector<int>>& ix,
                                      double sigma0_sq, std::size_t n) {
  const int m = static_cast<int>(ix.size());
  Eigen::MatrixXd K(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    K(i, i) = sigma0_sq;
    for (std::size_t j = i + 1; j < n; ++j) {
      int agree = 0;
      for (int t = 0; t < m; ++t) agree += (ix[t][i] == ix[t][j]);
      K(i, j) = K(j, i) = sigma0_sq * agree / m;
    }
  }
  return K;
}

}  // namespace

double kernel(const Forest& forest, double sigma0_sq, const Point& x,
              const Point& x2) {
  int agree = 0;
  for (const Tree& t : forest.trees) agree += (leaf_of(t, x) == leaf_of(t, x2));
  return sigma0_sq * agree / forest.size();
}

Eigen::MatrixXd gram(const Forest& forest, double sigma0_sq,
                     const std::vector<Point>& X) {
  return gram_from_assignments(assign_leaves(forest, X), sigma0_sq, X.size());
}

GpState make_gp_state(Forest forest, double noise_var, const Dataset& data,
                      double sigma0_sq) {
  if (!(noise_var > 0.0)) throw std::invalid_argument("noise_var must be positive");
  GpState s;
  s.forest = std::move(forest);
  s.noise_var = noise_var;
  s.sigma0_sq = sigma0_sq;
  s.leaf_ix = assign_leaves(s.forest, data.X);
  refresh_gp_state(s, data);
  return s;
}

void refresh_gp_state(GpState& state, const Dataset& data) {
  const std::size_t n = data.size();
  state.accepted_since_refresh = 0;
  if (n == 0) {
    state.K.resize(0, 0);
    state.Kinv.resize(0, 0);
    state.alpha.resize(0);
    state.logdet = 0.0;
    state.mll = 0.0;
    return;
  }
  state.K = gram_from_assignments(state.leaf_ix, state.sigma0_sq, n);
  factorize(state.K, state.noise_var, y_vector(data), &state.Kinv, &state.alpha,
            &state.logdet, &state.mll);
}

double marginal_log_likelihood(const GpState& state) { return state.mll; }

double scratch_mll(const Forest& forest, double noise_var, double sigma0_sq,
                   const std::vector<Point>& X, const std::vector<double>& y) {
  const Eigen::Index n = static_cast<Eigen::Index>(X.size());
  if (n == 0) return 0.0;
  // independent path: pairwise kernel evaluations, fresh Cholesky
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j)
      K(i, j) = K(j, i) = kernel(forest, sigma0_sq, X[i], X[j]);
  K.diagonal().array() += noise_var;
  Eigen::LLT<Eigen::MatrixXd> llt = robust_llt(K);
  Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), n);
  Eigen::VectorXd a = llt.solve(yv);
  return -0.5 * yv.dot(a) - 0.5 * llt_logdet(llt) -
         0.5 * static_cast<double>(n) * kLog2Pi;
}

namespace {

// Shared front half of a tree update: new leaf assignment and the exact
// incremental gram edit K* = K - (s0/m)(old agreements) + (s0/m)(new ones).
TreeUpdateCandidate start_candidate(const GpState& state, const Dataset& data,
                                    int tree_index, Tree new_tree) {
  TreeUpdateCandidate c;
  c.tree_index = tree_index;
  c.new_tree = std::move(new_tree);
  c.new_leaf_ix.resize(data.size());
  for (std::size_t n = 0; n < data.size(); ++n)
    c.new_leaf_ix[n] = leaf_of(c.new_tree, data.X[n]);
  if (data.size() == 0) return c;

  const double s2 = state.sigma0_sq / state.forest.size();
  const std::vector<int>& old_ix = state.leaf_ix[tree_index];
  c.K = state.K;
  const Eigen::Index n = c.K.rows();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double d = 0.0;
      if (old_ix[i] == old_ix[j]) d -= s2;
      if (c.new_leaf_ix[i] == c.new_leaf_ix[j]) d += s2;
      if (d != 0.0) {
        c.K(i, j) += d;
        c.K(j, i) += d;
      }
    }
  return c;
}

void finish_dense(const GpState& state, const Dataset& data,
                  TreeUpdateCandidate& c) {
  factorize(c.K, state.noise_var, y_vector(data), &c.Kinv, &c.alpha, &c.logdet,
            &c.mll);
  c.delta_mll = c.mll - state.mll;
  c.used_fallback = true;
}

// N x L matrix A * Phi * s accumulated column-wise (Phi is one-hot by rows).
Eigen::MatrixXd gather_columns(const Eigen::MatrixXd& A,
                               const std::vector<int>& leaf, int n_leaves,
                               double s) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(A.rows(), n_leaves);
  for (Eigen::Index n = 0; n < A.cols(); ++n)
    out.col(leaf[n]) += s * A.col(n);
  return out;
}

// L x L matrix Phi' * B * s (rows of B pooled by leaf).
Eigen::MatrixXd pool_rows(const Eigen::MatrixXd& B, const std::vector<int>& leaf,
                          int n_leaves, double s) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n_leaves, B.cols());
  for (Eigen::Index n = 0; n < B.rows(); ++n)
    out.row(leaf[n]) += s * B.row(n);
  return out;
}

}  // namespace

TreeUpdateCandidate update_tree_dense(const GpState& state, const Dataset& data,
                                      int tree_index, Tree new_tree) {
  TreeUpdateCandidate c = start_candidate(state, data, tree_index, std::move(new_tree));
  if (data.size() == 0) return c;
  finish_dense(state, data, c);
  return c;
}

TreeUpdateCandidate update_tree_lowrank(const GpState& state,
                                        const Dataset& data, int tree_index,
                                        Tree new_tree) {
  TreeUpdateCandidate c = start_candidate(state, data, tree_index, std::move(new_tree));
  if (data.size() == 0) return c;

  const double s = std::sqrt(state.sigma0_sq / state.forest.size());
  const std::vector<int>& old_ix = state.leaf_ix[tree_index];
  const int l0 = state.forest.trees[tree_index].n_leaves;
  const int l1 = c.new_tree.n_leaves;

  // downdate the old tree's block: (A - UU')^-1 = A^-1 + A^-1 U C1^-1 U' A^-1
  // with C1 = I - U'A^-1 U, and log|A - UU'| = log|A| + log|C1|
  Eigen::MatrixXd AinvU = gather_columns(state.Kinv, old_ix, l0, s);
  Eigen::MatrixXd C1 = -pool_rows(AinvU, old_ix, l0, s);
  C1.diagonal().array() += 1.0;
  Eigen::LLT<Eigen::MatrixXd> llt1(C1);
  if (llt1.info() != Eigen::Success) {
    finish_dense(state, data, c);
    return c;
  }
  Eigen::MatrixXd A1inv =
      state.Kinv + AinvU * llt1.solve(AinvU.transpose());
  double logdet1 = state.logdet + llt_logdet(llt1);

  // update with the new tree's block: (A1 + VV')^-1, C2 = I + V'A1^-1 V
  Eigen::MatrixXd A1invV = gather_columns(A1inv, c.new_leaf_ix, l1, s);
  Eigen::MatrixXd C2 = pool_rows(A1invV, c.new_leaf_ix, l1, s);
  C2.diagonal().array() += 1.0;
  Eigen::LLT<Eigen::MatrixXd> llt2(C2);
  if (llt2.info() != Eigen::Success) {
    finish_dense(state, data, c);
    return c;
  }
  c.Kinv = A1inv - A1invV * llt2.solve(A1invV.transpose());
  c.Kinv = 0.5 * (c.Kinv + c.Kinv.transpose()).eval();
  c.logdet = logdet1 + llt_logdet(llt2);

  Eigen::VectorXd y = y_vector(data);
  c.alpha = c.Kinv * y;
  c.mll = -0.5 * y.dot(c.alpha) - 0.5 * c.logdet -
          0.5 * static_cast<double>(y.size()) * kLog2Pi;
  c.delta_mll = c.mll - state.mll;
  if (!std::isfinite(c.mll)) finish_dense(state, data, c);
  return c;
}

void apply_tree_update(GpState& state, const Dataset& data,
                       TreeUpdateCandidate&& cand) {
  state.forest.trees[cand.tree_index] = std::move(cand.new_tree);
  state.leaf_ix[cand.tree_index] = std::move(cand.new_leaf_ix);
  if (data.size() == 0) return;
  state.K = std::move(cand.K);
  state.Kinv = std::move(cand.Kinv);
  state.alpha = std::move(cand.alpha);
  state.logdet = cand.logdet;
  state.mll = cand.mll;
  if (cand.used_fallback) {
    state.accepted_since_refresh = 0;
    return;
  }
  ++state.accepted_since_refresh;
  // scheduled refresh plus a cheap drift probe on the cached solve
  bool drifted = false;
  if (state.accepted_since_refresh % 10 == 0) {
    Eigen::VectorXd r = state.K * state.alpha +
                        state.noise_var * state.alpha - y_vector(data);
    drifted = r.lpNorm<Eigen::Infinity>() > 1e-6;
  }
  if (state.accepted_since_refresh >= 50 || drifted)
    refresh_gp_state(state, data);
}

NoiseUpdateCandidate update_noise(const GpState& state, const Dataset& data,
                                  double new_noise_var) {
  if (!(new_noise_var > 0.0))
    throw std::invalid_argument("noise_var must be positive");
  NoiseUpdateCandidate c;
  c.noise_var = new_noise_var;
  if (data.size() == 0) return c;
  factorize(state.K, new_noise_var, y_vector(data), &c.Kinv, &c.alpha,
            &c.logdet, &c.mll);
  c.delta_mll = c.mll - state.mll;
  return c;
}

void apply_noise_update(GpState& state, NoiseUpdateCandidate&& cand) {
  state.noise_var = cand.noise_var;
  if (state.K.rows() == 0) return;
  state.Kinv = std::move(cand.Kinv);
  state.alpha = std::move(cand.alpha);
  state.logdet = cand.logdet;
  state.mll = cand.mll;
}

PredictiveGaussian predict(const GpState& state, const Point& x) {
  PredictiveGaussian out;
  const Eigen::Index n = state.alpha.size();
  if (n == 0) {
    out.var = state.sigma0_sq;
    return out;
  }
  const int m = state.forest.size();
  Eigen::VectorXd k = Eigen::VectorXd::Zero(n);
  for (int t = 0; t < m; ++t) {
    int lx = leaf_of(state.forest.trees[t], x);
    const std::vector<int>& ix = state.leaf_ix[t];
    for (Eigen::Index i = 0; i < n; ++i)
      if (ix[i] == lx) k[i] += 1.0;
  }
  k *= state.sigma0_sq / m;
  out.mean = k.dot(state.alpha);
  out.var = state.sigma0_sq - k.dot(state.Kinv * k);
  out.var = std::min(std::max(out.var, 0.0), state.sigma0_sq);
  return out;
}

double predict_mean_by_leaf_sums(const GpState& state, const Point& x) {
  const Eigen::Index n = state.alpha.size();
  if (n == 0) return 0.0;
  const int m = state.forest.size();
  double mean = 0.0;
  for (int t = 0; t < m; ++t) {
    int lx = leaf_of(state.forest.trees[t], x);
    const std::vector<int>& ix = state.leaf_ix[t];
    double c = 0.0;  // alpha-sum over training points sharing the leaf
    for (Eigen::Index i = 0; i < n; ++i)
      if (ix[i] == lx) c += state.alpha[i];
    mean += c;
  }
  return mean * state.sigma0_sq / m;
}

double mixture_nlpd(const PosteriorEnsemble& ensemble, const Dataset& data,
                    const Point& x, double y_true_raw) {
  const int s_count = ensemble.size();
  double y_std_val = (y_true_raw - data.y_mean) / data.y_std;
  std::vector<double> logd(s_count);
  double mx = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < s_count; ++s) {
    const GpState& st = ensemble.states[s];
    PredictiveGaussian p = predict(st, x);
    double v = p.var + st.noise_var;
    double r = y_std_val - p.mean;
    logd[s] = -0.5 * std::log(2.0 * M_PI * v) - 0.5 * r * r / v;
    mx = std::max(mx, logd[s]);
  }
  double acc = 0.0;
  for (double l : logd) acc += std::exp(l - mx);
  double log_mix = mx + std::log(acc / s_count);
  return -log_mix + std::log(data.y_std);
}

double mixture_mse(const PosteriorEnsemble& ensemble, const Dataset& data,
                   const std::vector<Point>& X_test,
                   const std::vector<double>& y_test_raw) {
  if (X_test.size() != y_test_raw.size())
    throw std::invalid_argument("mixture_mse size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < X_test.size(); ++i) {
    double mean_std = 0.0;
    for (const GpState& st : ensemble.states)
      mean_std += predict(st, X_test[i]).mean;
    mean_std /= ensemble.size();
    double pred_raw = unstandardize(data, mean_std);
    double r = pred_raw - y_test_raw[i];
    acc += r * r;
  }
  return acc / static_cast<double>(X_test.size());
}

}  // namespace bark
