#include "bark/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <initializer_list>
#include <istream>
#include <limits>
#include <stdexcept>

namespace bark {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw std::invalid_argument(where + ": " + what);
}

void check_keys(const Json& j, const char* where,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(where, "expected a JSON object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* a : allowed)
      if (item.key() == a) {
        known = true;
        break;
      }
    if (!known) fail(where, "unknown key '" + item.key() + "'");
  }
}

double get_number(const Json& j, const char* where, const char* key) {
  if (!j.contains(key)) fail(where, std::string("missing key '") + key + "'");
  if (!j.at(key).is_number()) fail(where, std::string("'") + key + "' must be a number");
  return j.at(key).get<double>();
}

double get_number_or(const Json& j, const char* where, const char* key,
                     double def) {
  return j.contains(key) ? get_number(j, where, key) : def;
}

long long get_integer(const Json& j, const char* where, const char* key) {
  double v = get_number(j, where, key);
  if (std::floor(v) != v) fail(where, std::string("'") + key + "' must be integral");
  return static_cast<long long>(v);
}

long long get_integer_or(const Json& j, const char* where, const char* key,
                         long long def) {
  return j.contains(key) ? get_integer(j, where, key) : def;
}

bool get_bool_or(const Json& j, const char* where, const char* key, bool def) {
  if (!j.contains(key)) return def;
  if (!j.at(key).is_boolean()) fail(where, std::string("'") + key + "' must be a boolean");
  return j.at(key).get<bool>();
}

std::string get_string(const Json& j, const char* where, const char* key) {
  if (!j.contains(key)) fail(where, std::string("missing key '") + key + "'");
  if (!j.at(key).is_string()) fail(where, std::string("'") + key + "' must be a string");
  return j.at(key).get<std::string>();
}

Json point_to_json(const Point& x) { return Json(x); }

Point point_from_json(const Json& j, const char* where) {
  if (!j.is_array()) fail(where, "point must be an array");
  Point x;
  for (const Json& v : j) {
    if (!v.is_number()) fail(where, "point coordinates must be numbers");
    x.push_back(v.get<double>());
  }
  return x;
}

// null <-> NaN for optional numeric fields
Json finite_or_null(double v) {
  return std::isfinite(v) ? Json(v) : Json(nullptr);
}

double number_or_nan(const Json& j, const char* where, const char* key) {
  if (!j.contains(key) || j.at(key).is_null())
    return std::numeric_limits<double>::quiet_NaN();
  return get_number(j, where, key);
}

Json tree_node_to_json(const Tree& tree, int idx) {
  const TreeNode& n = tree.nodes[idx];
  Json j;
  if (n.is_leaf()) {
    j["leaf_id"] = n.leaf_id;
    return j;
  }
  j["feature"] = n.rule.feature;
  if (n.rule.categorical) {
    std::vector<int> left_set;
    for (int c = 0; c < 64; ++c)
      if ((n.rule.left_cats >> c) & 1ull) left_set.push_back(c);
    j["left_set"] = left_set;
  } else {
    j["threshold"] = n.rule.threshold;
  }
  j["left"] = tree_node_to_json(tree, n.left);
  j["right"] = tree_node_to_json(tree, n.right);
  return j;
}

int tree_node_from_json(const Json& j, std::vector<TreeNode>& nodes) {
  const char* where = "forest";
  int idx = static_cast<int>(nodes.size());
  nodes.emplace_back();
  if (j.contains("leaf_id")) {
    check_keys(j, where, {"leaf_id"});
    return idx;
  }
  check_keys(j, where, {"feature", "threshold", "left_set", "left", "right"});
  SplitRule rule;
  rule.feature = static_cast<int>(get_integer(j, where, "feature"));
  if (rule.feature < 0) fail(where, "feature index must be nonnegative");
  if (j.contains("left_set")) {
    if (j.contains("threshold")) fail(where, "node has both threshold and left_set");
    rule.categorical = true;
    for (const Json& v : j.at("left_set")) {
      long long c = v.get<long long>();
      if (c < 0 || c > 63) fail(where, "category index out of range");
      rule.left_cats |= 1ull << c;
    }
    if (rule.left_cats == 0) fail(where, "left_set must be nonempty");
  } else {
    rule.threshold = get_number(j, where, "threshold");
  }
  if (!j.contains("left") || !j.contains("right"))
    fail(where, "decision node needs left and right children");
  nodes[idx].rule = rule;
  int left = tree_node_from_json(j.at("left"), nodes);
  int right = tree_node_from_json(j.at("right"), nodes);
  nodes[idx].left = left;
  nodes[idx].right = right;
  return idx;
}

const char* direction_name(Direction d) {
  return d == Direction::Minimize ? "minimize" : "maximize";
}

Direction direction_from_name(const std::string& s) {
  if (s == "minimize") return Direction::Minimize;
  if (s == "maximize") return Direction::Maximize;
  fail("config", "unknown direction '" + s + "'");
}

const char* optimizer_name(AcqOptimizer o) {
  switch (o) {
    case AcqOptimizer::BranchAndBound: return "branch_and_bound";
    case AcqOptimizer::Exhaustive: return "exhaustive";
    case AcqOptimizer::RandomSearch: return "random_search";
  }
  return "branch_and_bound";
}

AcqOptimizer optimizer_from_name(const std::string& s) {
  if (s == "branch_and_bound") return AcqOptimizer::BranchAndBound;
  if (s == "exhaustive") return AcqOptimizer::Exhaustive;
  if (s == "random_search") return AcqOptimizer::RandomSearch;
  fail("acq", "unknown optimizer '" + s + "'");
}

const char* status_name(AcqStatus s) {
  switch (s) {
    case AcqStatus::OptimalWithinGap: return "optimal_within_gap";
    case AcqStatus::TimeLimit: return "time_limit";
    case AcqStatus::NodeLimit: return "node_limit";
  }
  return "optimal_within_gap";
}

AcqStatus status_from_name(const std::string& s) {
  if (s == "optimal_within_gap") return AcqStatus::OptimalWithinGap;
  if (s == "time_limit") return AcqStatus::TimeLimit;
  if (s == "node_limit") return AcqStatus::NodeLimit;
  fail("acq_result", "unknown status '" + s + "'");
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_number_field(const std::string& s, const char* where) {
  std::size_t pos = 0;
  double v;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    fail(where, "not a number: '" + s + "'");
  }
  if (pos != s.size()) fail(where, "trailing characters in number: '" + s + "'");
  return v;
}

void append_csv_value(std::string& out, double v) {
  if (std::isfinite(v)) out += format_double(v);
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

SpaceDoc default_space_doc(const FeatureSpace& space) {
  SpaceDoc doc;
  doc.space = space;
  for (int f = 0; f < space.dim(); ++f) {
    doc.names.push_back("x" + std::to_string(f));
    std::vector<std::string> labels;
    if (space.features[f].kind == FeatureKind::Categorical)
      for (int c = 0; c < space.features[f].n_categories; ++c)
        labels.push_back(std::to_string(c));
    doc.labels.push_back(std::move(labels));
  }
  return doc;
}

Json space_to_json(const SpaceDoc& doc) {
  Json features = Json::array();
  for (int f = 0; f < doc.space.dim(); ++f) {
    const FeatureSpec& spec = doc.space.features[f];
    Json jf;
    jf["name"] = doc.names[f];
    switch (spec.kind) {
      case FeatureKind::Continuous:
        jf["kind"] = "continuous";
        jf["lo"] = spec.lo;
        jf["hi"] = spec.hi;
        break;
      case FeatureKind::Integer:
        jf["kind"] = "integer";
        jf["lo"] = spec.lo;
        jf["hi"] = spec.hi;
        break;
      case FeatureKind::Categorical:
        jf["kind"] = "categorical";
        jf["labels"] = doc.labels[f];
        break;
    }
    features.push_back(std::move(jf));
  }
  return Json{{"features", std::move(features)}};
}

SpaceDoc space_from_json(const Json& j) {
  check_keys(j, "space", {"features"});
  if (!j.contains("features") || !j.at("features").is_array())
    fail("space", "missing 'features' array");
  SpaceDoc doc;
  std::vector<FeatureSpec> specs;
  for (const Json& jf : j.at("features")) {
    std::string kind = get_string(jf, "space.feature", "kind");
    std::string name =
        jf.contains("name") ? get_string(jf, "space.feature", "name")
                            : "x" + std::to_string(specs.size());
    std::vector<std::string> labels;
    if (kind == "continuous") {
      check_keys(jf, "space.feature", {"kind", "name", "lo", "hi"});
      specs.push_back(FeatureSpec::continuous(
          get_number(jf, "space.feature", "lo"),
          get_number(jf, "space.feature", "hi")));
    } else if (kind == "integer") {
      check_keys(jf, "space.feature", {"kind", "name", "lo", "hi"});
      specs.push_back(FeatureSpec::integer(
          get_integer(jf, "space.feature", "lo"),
          get_integer(jf, "space.feature", "hi")));
    } else if (kind == "categorical") {
      check_keys(jf, "space.feature", {"kind", "name", "labels"});
      if (!jf.contains("labels") || !jf.at("labels").is_array())
        fail("space.feature", "categorical feature needs a 'labels' array");
      for (const Json& l : jf.at("labels")) {
        if (!l.is_string()) fail("space.feature", "labels must be strings");
        labels.push_back(l.get<std::string>());
      }
      specs.push_back(
          FeatureSpec::categorical(static_cast<int>(labels.size())));
    } else {
      fail("space.feature", "unknown kind '" + kind + "'");
    }
    doc.names.push_back(std::move(name));
    doc.labels.push_back(std::move(labels));
  }
  doc.space = FeatureSpace(std::move(specs));
  return doc;
}

Json forest_to_json(const Forest& forest) {
  Json trees = Json::array();
  for (const Tree& tree : forest.trees)
    trees.push_back(tree_node_to_json(tree, 0));
  return Json{{"trees", std::move(trees)}};
}

Forest forest_from_json(const Json& j) {
  check_keys(j, "forest", {"trees"});
  if (!j.contains("trees") || !j.at("trees").is_array())
    fail("forest", "missing 'trees' array");
  Forest forest;
  for (const Json& jt : j.at("trees")) {
    Tree tree;
    tree_node_from_json(jt, tree.nodes);
    renumber_leaves(tree);
    forest.trees.push_back(std::move(tree));
  }
  return forest;
}

Json ensemble_to_json(const PosteriorEnsemble& ensemble, const Dataset& data) {
  Json states = Json::array();
  for (const GpState& s : ensemble.states)
    states.push_back(Json{{"forest", forest_to_json(s.forest)},
                          {"noise_var", s.noise_var}});
  double sigma0_sq =
      ensemble.states.empty() ? 1.0 : ensemble.states.front().sigma0_sq;
  return Json{{"sigma0_sq", sigma0_sq},
              {"y_mean", data.y_mean},
              {"y_std", data.y_std},
              {"states", std::move(states)}};
}

PosteriorEnsemble ensemble_from_json(const Json& j, const Dataset& data) {
  check_keys(j, "ensemble", {"sigma0_sq", "y_mean", "y_std", "states"});
  if (get_number(j, "ensemble", "y_mean") != data.y_mean ||
      get_number(j, "ensemble", "y_std") != data.y_std)
    fail("ensemble", "standardization constants disagree with the dataset");
  double sigma0_sq = get_number(j, "ensemble", "sigma0_sq");
  PosteriorEnsemble ens;
  for (const Json& js : j.at("states")) {
    check_keys(js, "ensemble.state", {"forest", "noise_var"});
    ens.states.push_back(
        make_gp_state(forest_from_json(js.at("forest")),
                      get_number(js, "ensemble.state", "noise_var"), data,
                      sigma0_sq));
  }
  return ens;
}

Json acq_result_to_json(const AcqResult& r) {
  return Json{{"x", point_to_json(r.x_best)},
              {"value", r.value},
              {"gap", finite_or_null(r.proven_gap)},
              {"nodes", r.nodes_explored},
              {"time", r.wall_time_s},
              {"status", status_name(r.status)}};
}

AcqResult acq_result_from_json(const Json& j) {
  check_keys(j, "acq_result", {"x", "value", "gap", "nodes", "time", "status"});
  AcqResult r;
  r.x_best = point_from_json(j.at("x"), "acq_result");
  r.value = get_number(j, "acq_result", "value");
  r.proven_gap = j.at("gap").is_null()
                     ? std::numeric_limits<double>::infinity()
                     : get_number(j, "acq_result", "gap");
  r.nodes_explored = get_integer(j, "acq_result", "nodes");
  r.wall_time_s = get_number(j, "acq_result", "time");
  r.status = status_from_name(get_string(j, "acq_result", "status"));
  return r;
}

Json sampler_config_to_json(const SamplerConfig& c) {
  return Json{{"alpha", c.alpha},
              {"beta", c.beta},
              {"nu", c.nu},
              {"q", c.q},
              {"m", c.m},
              {"chains", c.chains},
              {"burn_in", c.burn_in},
              {"samples_per_chain", c.samples_per_chain},
              {"thin", c.thin},
              {"noise_walk_sd", c.noise_walk_sd},
              {"w_grow", c.w_grow},
              {"w_prune", c.w_prune},
              {"w_change", c.w_change},
              {"max_depth", c.max_depth},
              {"data_splits", c.data_splits},
              {"threads", c.threads}};
}

SamplerConfig sampler_config_from_json(const Json& j) {
  check_keys(j, "sampler",
             {"alpha", "beta", "nu", "q", "m", "chains", "burn_in",
              "samples_per_chain", "thin", "noise_walk_sd", "w_grow",
              "w_prune", "w_change", "max_depth", "data_splits", "threads"});
  SamplerConfig c;
  c.alpha = get_number_or(j, "sampler", "alpha", c.alpha);
  c.beta = get_number_or(j, "sampler", "beta", c.beta);
  c.nu = get_number_or(j, "sampler", "nu", c.nu);
  c.q = get_number_or(j, "sampler", "q", c.q);
  c.m = static_cast<int>(get_integer_or(j, "sampler", "m", c.m));
  c.chains = static_cast<int>(get_integer_or(j, "sampler", "chains", c.chains));
  c.burn_in =
      static_cast<int>(get_integer_or(j, "sampler", "burn_in", c.burn_in));
  c.samples_per_chain = static_cast<int>(
      get_integer_or(j, "sampler", "samples_per_chain", c.samples_per_chain));
  c.thin = static_cast<int>(get_integer_or(j, "sampler", "thin", c.thin));
  c.noise_walk_sd =
      get_number_or(j, "sampler", "noise_walk_sd", c.noise_walk_sd);
  c.w_grow = get_number_or(j, "sampler", "w_grow", c.w_grow);
  c.w_prune = get_number_or(j, "sampler", "w_prune", c.w_prune);
  c.w_change = get_number_or(j, "sampler", "w_change", c.w_change);
  c.max_depth =
      static_cast<int>(get_integer_or(j, "sampler", "max_depth", c.max_depth));
  c.data_splits = get_bool_or(j, "sampler", "data_splits", c.data_splits);
  c.threads = static_cast<int>(get_integer_or(j, "sampler", "threads", c.threads));
  return c;
}

Json acq_config_to_json(const AcqConfig& c) {
  return Json{{"kappa", c.kappa},
              {"rel_gap", c.rel_gap},
              {"time_limit", c.time_limit_s},
              {"node_limit", c.node_limit},
              {"optimizer", optimizer_name(c.optimizer)}};
}

AcqConfig acq_config_from_json(const Json& j) {
  check_keys(j, "acq", {"kappa", "rel_gap", "time_limit", "node_limit", "optimizer"});
  AcqConfig c;
  c.kappa = get_number_or(j, "acq", "kappa", c.kappa);
  c.rel_gap = get_number_or(j, "acq", "rel_gap", c.rel_gap);
  c.time_limit_s = get_number_or(j, "acq", "time_limit", c.time_limit_s);
  c.node_limit = get_integer_or(j, "acq", "node_limit", c.node_limit);
  if (j.contains("optimizer"))
    c.optimizer = optimizer_from_name(get_string(j, "acq", "optimizer"));
  return c;
}

Json bo_config_to_json(const BoConfig& c) {
  return Json{{"n_iterations", c.n_iterations},
              {"seed", c.seed},
              {"direction", direction_name(c.direction)},
              {"prior_only", c.prior_only},
              {"sampler", sampler_config_to_json(c.sampler)},
              {"acq", acq_config_to_json(c.acq)}};
}

BoConfig bo_config_from_json(const Json& j) {
  check_keys(j, "bo",
             {"n_iterations", "seed", "direction", "prior_only", "sampler", "acq"});
  BoConfig c;
  c.n_iterations = static_cast<int>(
      get_integer_or(j, "bo", "n_iterations", c.n_iterations));
  c.seed = static_cast<std::uint64_t>(get_integer_or(j, "bo", "seed", 0));
  if (j.contains("direction"))
    c.direction = direction_from_name(get_string(j, "bo", "direction"));
  c.prior_only = get_bool_or(j, "bo", "prior_only", c.prior_only);
  if (j.contains("sampler")) c.sampler = sampler_config_from_json(j.at("sampler"));
  if (j.contains("acq")) c.acq = acq_config_from_json(j.at("acq"));
  return c;
}

Json session_to_json(const BoSession& s, const SpaceDoc& doc) {
  Json x_rows = Json::array();
  for (const Point& x : s.X) x_rows.push_back(point_to_json(x));
  Json queue = Json::array();
  for (const Point& x : s.init_queue) queue.push_back(point_to_json(x));
  Json warm = Json::array();
  for (const auto& [forest, noise] : s.warm_states)
    warm.push_back(Json{{"forest", forest_to_json(forest)}, {"noise_var", noise}});
  Json trace = Json::array();
  for (const IterationRecord& r : s.trace)
    trace.push_back(Json{{"iteration", r.iteration},
                         {"x", point_to_json(r.x)},
                         {"y", r.y_raw},
                         {"best_so_far", r.best_so_far},
                         {"acq_value", finite_or_null(r.acq_value)},
                         {"gap", finite_or_null(r.gap)},
                         {"fit_seconds", finite_or_null(r.fit_seconds)},
                         {"opt_seconds", finite_or_null(r.opt_seconds)}});
  Json pending(nullptr);
  if (s.pending)
    pending = Json{{"at_observation_count", s.pending->at_observation_count},
                   {"x", point_to_json(s.pending->x)},
                   {"acq_value", s.pending->acq_value},
                   {"gap", finite_or_null(s.pending->gap)},
                   {"fit_seconds", s.pending->fit_seconds},
                   {"opt_seconds", s.pending->opt_seconds}};
  return Json{{"space", space_to_json(doc)},
              {"config", bo_config_to_json(s.config)},
              {"X", std::move(x_rows)},
              {"y", s.y_raw},
              {"init_queue", std::move(queue)},
              {"n_init_total", s.n_init_total},
              {"fit_count", s.fit_count},
              {"have_warm", s.have_warm},
              {"warm_states", std::move(warm)},
              {"trace", std::move(trace)},
              {"pending", std::move(pending)}};
}

std::pair<BoSession, SpaceDoc> session_from_json(const Json& j) {
  check_keys(j, "session",
             {"space", "config", "X", "y", "init_queue", "n_init_total",
              "fit_count", "have_warm", "warm_states", "trace", "pending"});
  SpaceDoc doc = space_from_json(j.at("space"));
  BoSession s;
  s.space = doc.space;
  s.config = bo_config_from_json(j.at("config"));
  for (const Json& jx : j.at("X"))
    s.X.push_back(point_from_json(jx, "session.X"));
  for (const Json& jy : j.at("y")) s.y_raw.push_back(jy.get<double>());
  for (const Json& jx : j.at("init_queue"))
    s.init_queue.push_back(point_from_json(jx, "session.init_queue"));
  s.n_init_total =
      static_cast<int>(get_integer(j, "session", "n_init_total"));
  s.fit_count = static_cast<std::uint64_t>(get_integer(j, "session", "fit_count"));
  s.have_warm = get_bool_or(j, "session", "have_warm", false);
  for (const Json& jw : j.at("warm_states")) {
    check_keys(jw, "session.warm_state", {"forest", "noise_var"});
    s.warm_states.emplace_back(
        forest_from_json(jw.at("forest")),
        get_number(jw, "session.warm_state", "noise_var"));
  }
  for (const Json& jr : j.at("trace")) {
    check_keys(jr, "session.trace",
               {"iteration", "x", "y", "best_so_far", "acq_value", "gap",
                "fit_seconds", "opt_seconds"});
    IterationRecord r;
    r.iteration = static_cast<int>(get_integer(jr, "session.trace", "iteration"));
    r.x = point_from_json(jr.at("x"), "session.trace");
    r.y_raw = get_number(jr, "session.trace", "y");
    r.best_so_far = get_number(jr, "session.trace", "best_so_far");
    r.acq_value = number_or_nan(jr, "session.trace", "acq_value");
    r.gap = number_or_nan(jr, "session.trace", "gap");
    r.fit_seconds = number_or_nan(jr, "session.trace", "fit_seconds");
    r.opt_seconds = number_or_nan(jr, "session.trace", "opt_seconds");
    s.trace.push_back(std::move(r));
  }
  if (!j.at("pending").is_null()) {
    const Json& jp = j.at("pending");
    check_keys(jp, "session.pending",
               {"at_observation_count", "x", "acq_value", "gap",
                "fit_seconds", "opt_seconds"});
    BoSession::Pending p;
    p.at_observation_count = static_cast<std::size_t>(
        get_integer(jp, "session.pending", "at_observation_count"));
    p.x = point_from_json(jp.at("x"), "session.pending");
    p.acq_value = get_number(jp, "session.pending", "acq_value");
    p.gap = number_or_nan(jp, "session.pending", "gap");
    p.fit_seconds = get_number(jp, "session.pending", "fit_seconds");
    p.opt_seconds = get_number(jp, "session.pending", "opt_seconds");
    s.pending = std::move(p);
  }
  for (const Point& x : s.X) validate_point(s.space, x);
  return {std::move(s), std::move(doc)};
}

ParsedDataset dataset_from_csv(std::istream& in, const SpaceDoc& doc) {
  std::string line;
  if (!std::getline(in, line)) fail("dataset", "empty file");
  std::vector<std::string> header = split_csv_line(line);
  const int dim = doc.space.dim();
  if (static_cast<int>(header.size()) != dim + 1)
    fail("dataset", "expected " + std::to_string(dim) +
                        " feature columns plus one output column, got " +
                        std::to_string(header.size()));
  for (int f = 0; f < dim; ++f)
    if (header[f] != doc.names[f])
      fail("dataset", "column '" + header[f] + "' does not match feature '" +
                          doc.names[f] + "'");

  ParsedDataset out;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    std::vector<std::string> fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != dim + 1)
      fail("dataset", "row " + std::to_string(row) + " has " +
                          std::to_string(fields.size()) + " fields");
    Point x(dim);
    for (int f = 0; f < dim; ++f) {
      if (doc.space.features[f].kind == FeatureKind::Categorical) {
        const auto& labels = doc.labels[f];
        auto it = std::find(labels.begin(), labels.end(), fields[f]);
        if (it == labels.end())
          fail("dataset", "row " + std::to_string(row) + ": unknown label '" +
                              fields[f] + "' for feature '" + doc.names[f] + "'");
        x[f] = static_cast<double>(it - labels.begin());
      } else {
        x[f] = parse_number_field(fields[f], "dataset");
      }
    }
    validate_point(doc.space, x);
    out.X.push_back(std::move(x));
    out.y.push_back(parse_number_field(fields[dim], "dataset"));
  }
  if (out.X.empty()) fail("dataset", "no data rows");
  return out;
}

std::string dataset_to_csv(const SpaceDoc& doc, const std::vector<Point>& X,
                           const std::vector<double>& y,
                           const std::string& output_name) {
  if (X.size() != y.size()) fail("dataset", "X and y length mismatch");
  std::string out;
  for (int f = 0; f < doc.space.dim(); ++f) {
    out += doc.names[f];
    out += ',';
  }
  out += output_name;
  out += '\n';
  for (std::size_t i = 0; i < X.size(); ++i) {
    validate_point(doc.space, X[i]);
    for (int f = 0; f < doc.space.dim(); ++f) {
      if (doc.space.features[f].kind == FeatureKind::Categorical)
        out += doc.labels[f][static_cast<int>(X[i][f])];
      else
        out += format_double(X[i][f]);
      out += ',';
    }
    out += format_double(y[i]);
    out += '\n';
  }
  return out;
}

std::string diagnostics_csv(const RunStats& stats) {
  std::string out =
      "chain,sweep,mll,sigma_y_sq,total_leaves,accept_grow,accept_prune,"
      "accept_change,accept_noise\n";
  for (std::size_t i = 0; i < stats.records.size(); ++i) {
    const SweepRecord& r = stats.records[i];
    out += std::to_string(stats.record_chain[i]);
    out += ',';
    out += std::to_string(r.sweep);
    out += ',';
    out += format_double(r.mll);
    out += ',';
    out += format_double(r.sigma_y_sq);
    out += ',';
    out += std::to_string(r.total_leaves);
    for (double a : {r.accept_grow, r.accept_prune, r.accept_change, r.accept_noise}) {
      out += ',';
      if (a >= 0.0) out += format_double(a);
    }
    out += '\n';
  }
  return out;
}

std::string trace_csv(const std::vector<IterationRecord>& trace) {
  std::string out =
      "iteration,best_so_far,y,acq_value,gap,fit_seconds,opt_seconds\n";
  for (const IterationRecord& r : trace) {
    out += std::to_string(r.iteration);
    out += ',';
    out += format_double(r.best_so_far);
    out += ',';
    out += format_double(r.y_raw);
    out += ',';
    append_csv_value(out, r.acq_value);
    out += ',';
    append_csv_value(out, r.gap);
    out += ',';
    append_csv_value(out, r.fit_seconds);
    out += ',';
    append_csv_value(out, r.opt_seconds);
    out += '\n';
  }
  return out;
}

std::string regret_csv(const std::vector<RegretRow>& rows) {
  std::string out = "benchmark,seed,iteration,regret,best_so_far\n";
  for (const RegretRow& r : rows) {
    out += r.benchmark;
    out += ',';
    out += std::to_string(r.seed);
    out += ',';
    out += std::to_string(r.iteration);
    out += ',';
    append_csv_value(out, r.regret);
    out += ',';
    out += format_double(r.best_so_far);
    out += '\n';
  }
  return out;
}

Json regret_summary_to_json(const RegretSummary& summary) {
  return Json{{"median", summary.median},
              {"q25", summary.q25},
              {"q75", summary.q75}};
}

std::string kernel_curve_csv(const std::vector<KernelCurveRow>& rows) {
  std::string out = "x,k_true,k_laplace\n";
  for (const KernelCurveRow& r : rows) {
    out += format_double(r.x);
    out += ',';
    out += format_double(r.k_chopping);
    out += ',';
    out += format_double(r.k_laplace);
    out += '\n';
  }
  return out;
}

}  // namespace bark
