#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "synapse/connectome.hpp"
#include "synapse/synapse_set.hpp"
#include "synapse/tbar.hpp"
#include "synapse/volume.hpp"

namespace synapse {

/// One operating point. Precision or recall is empty when its denominator
/// is zero.
struct PrPoint {
  double threshold = 0.0;
  std::optional<double> precision;
  std::optional<double> recall;
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;

  friend bool operator==(const PrPoint&, const PrPoint&) = default;
};

/// Points ordered by strictly increasing threshold.
using PrCurve = std::vector<PrPoint>;

/// Builds a point with precision = tp/(tp+fp) and recall = tp/(tp+fn).
PrPoint pr_from_counts(double threshold, std::int64_t tp, std::int64_t fp, std::int64_t fn);

struct MatchSpec {
  double max_distance = 27.0;
  bool require_same_segment = false;
  /// Needed when `require_same_segment` is set; not owned.
  const LabelVolume* segmentation = nullptr;

  void validate() const;
};

struct MatchResult {
  std::vector<std::pair<std::size_t, std::size_t>> matches;  // (pred index, gt index)
  std::vector<std::size_t> unmatched_pred;
  std::vector<std::size_t> unmatched_gt;
};

/// One-to-one greedy matching. Admissible pairs (within `max_distance`, and
/// on the same nonzero segment when required) are taken in ascending
/// distance; ties go to the more confident prediction, then to the smaller
/// (pred position, gt position).
MatchResult match_tbars(std::span<const TbarPrediction> pred, std::span<const Point3> gt, const MatchSpec& spec);

PrCurve tbar_pr_curve(std::span<const TbarPrediction> pred, std::span<const Point3> gt, const MatchSpec& spec,
                      std::span<const double> thresholds);

/// tp = sum_e min(p(e), g(e)); fp = sum p - tp; fn = sum g - tp.
PrPoint weighted_pr(const ConnectomeGraph& pred, const ConnectomeGraph& gt);

/// Edge-support PR; weights are ignored.
PrPoint unweighted_pr(const ConnectomeGraph& pred, const ConnectomeGraph& gt);

/// unweighted_pr after keeping only edges with weight >= t in both graphs.
PrPoint thresholded_pr(const ConnectomeGraph& pred, const ConnectomeGraph& gt, std::int64_t t);

/// recall    = #[p >= t2 and g >= t1] / #[g >= t1]
/// precision = #[p >= t1 and g >= t2] / #[p >= t1]
///
/// Requires t1 > t2 >= 1. In the returned point `tp` is the recall
/// numerator, `fn` counts connections missed and `fp` connections added, so
/// precision is not tp/(tp+fp) here.
PrPoint asymmetric_pr(const ConnectomeGraph& pred, const ConnectomeGraph& gt, std::int64_t t1, std::int64_t t2);

struct WeightedEdge {
  Edge edge;
  std::int64_t gt_weight = 0;
  std::int64_t pred_weight = 0;

  friend bool operator==(const WeightedEdge&, const WeightedEdge&) = default;
};

struct AddedMissed {
  std::vector<WeightedEdge> added;   // p >= t1 and g < t2
  std::vector<WeightedEdge> missed;  // g >= t1 and p < t2
  std::int64_t normalizer = 0;       // #[g >= t1]
};

AddedMissed connections_added_missed(const ConnectomeGraph& pred, const ConnectomeGraph& gt, std::int64_t t1,
                                     std::int64_t t2);

/// Graph-level metric selector.
struct MetricMode {
  enum class Kind { weighted, unweighted, thresholded, asymmetric };
  Kind kind = Kind::weighted;
  std::int64_t t = 1;
  std::int64_t t1 = 10;
  std::int64_t t2 = 5;

  static MetricMode weighted() { return {Kind::weighted}; }
  static MetricMode unweighted() { return {Kind::unweighted}; }
  static MetricMode thresholded(std::int64_t t) { return {Kind::thresholded, t}; }
  static MetricMode asymmetric(std::int64_t t1, std::int64_t t2) { return {Kind::asymmetric, 1, t1, t2}; }

  void validate() const;
};

PrPoint evaluate_graphs(const ConnectomeGraph& pred, const ConnectomeGraph& gt, const MetricMode& mode);

struct GraphEvalParams {
  BodyFilter filter = BodyFilter::admit_all();
  bool undirected = false;
};

/// Sweeps the PSD confidence threshold: for each value, build the predicted
/// graph, apply the body filter (to both graphs) and optional undirected view,
/// then evaluate `mode`.
PrCurve graph_pr_curve(const SynapseSet& synapses, const LabelVolume& labels, const ConnectomeGraph& gt,
                       const MetricMode& mode, std::span<const double> psd_thresholds,
                       const GraphEvalParams& params = {});

struct ScatterRecord {
  Edge edge;
  std::int64_t gt_weight = 0;
  std::int64_t pred_weight = 0;
  bool within_band = false;  // gt/2 <= pred <= 2*gt
};

std::vector<ScatterRecord> count_scatter(const ConnectomeGraph& pred, const ConnectomeGraph& gt);

/// Best min(precision, recall) over a curve; 0 when no point is defined.
double break_even(const PrCurve& curve);

}  // namespace synapse
