#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bark/acquisition.hpp"
#include "bark/analysis.hpp"
#include "bark/benchmarks.hpp"
#include "bark/bo.hpp"

namespace bark {

using Json = nlohmann::json;

// A FeatureSpace plus the presentation tables that travel with it in config
// and session files: one name per feature, and for categorical features the
// label strings that dataset CSV columns use.
struct SpaceDoc {
  FeatureSpace space;
  std::vector<std::string> names;
  std::vector<std::vector<std::string>> labels;  // empty for numeric features
};

// x0, x1, ... with stringified indices as category labels.
SpaceDoc default_space_doc(const FeatureSpace& space);

Json space_to_json(const SpaceDoc& doc);
SpaceDoc space_from_json(const Json& j);

// Nested node objects: {"leaf_id": k} or {"feature", "threshold" |
// "left_set", "left", "right"}. Numbers print in shortest round-trip form,
// so thresholds survive a round trip bit-exactly.
Json forest_to_json(const Forest& forest);
Forest forest_from_json(const Json& j);

Json ensemble_to_json(const PosteriorEnsemble& ensemble, const Dataset& data);
// Rebuilds every GP cache against `data`; throws if the stored
// standardization constants disagree with it.
PosteriorEnsemble ensemble_from_json(const Json& j, const Dataset& data);

Json acq_result_to_json(const AcqResult& r);
AcqResult acq_result_from_json(const Json& j);

Json sampler_config_to_json(const SamplerConfig& c);
SamplerConfig sampler_config_from_json(const Json& j);
Json acq_config_to_json(const AcqConfig& c);
AcqConfig acq_config_from_json(const Json& j);
Json bo_config_to_json(const BoConfig& c);
BoConfig bo_config_from_json(const Json& j);

// Whole ask/tell session as one JSON document.
Json session_to_json(const BoSession& s, const SpaceDoc& doc);
std::pair<BoSession, SpaceDoc> session_from_json(const Json& j);

struct ParsedDataset {
  std::vector<Point> X;
  std::vector<double> y;
};

// Header row must name the space's features in order; the final column is
// the output. Categorical cells hold label strings from the label table.
ParsedDataset dataset_from_csv(std::istream& in, const SpaceDoc& doc);
std::string dataset_to_csv(const SpaceDoc& doc, const std::vector<Point>& X,
                           const std::vector<double>& y,
                           const std::string& output_name = "y");

// chain,sweep,mll,sigma_y_sq,total_leaves,accept_grow,accept_prune,
// accept_change,accept_noise; never-proposed move fractions print empty.
std::string diagnostics_csv(const RunStats& stats);

// iteration,best_so_far,y,acq_value,gap,fit_seconds,opt_seconds; non-finite
// fields print empty.
std::string trace_csv(const std::vector<IterationRecord>& trace);

struct RegretRow {
  std::string benchmark;
  std::uint64_t seed = 0;
  int iteration = 0;
  double regret = 0.0;  // NaN when the optimum is unknown
  double best_so_far = 0.0;
};
std::string regret_csv(const std::vector<RegretRow>& rows);
Json regret_summary_to_json(const RegretSummary& summary);

// x,k_true,k_laplace
std::string kernel_curve_csv(const std::vector<KernelCurveRow>& rows);

// Shortest-exact decimal is overkill for CSV; 17 significant digits always
// round-trip.
std::string format_double(double v);

}  // namespace bark
