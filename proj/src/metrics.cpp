#include "synapse/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace synapse {

namespace {

std::optional<double> ratio(std::int64_t num, std::int64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

void check_asymmetric(std::int64_t t1, std::int64_t t2) {
  if (t2 < 1 || t1 <= t2) {
    throw InvalidArgument("asymmetric thresholds need t1 > t2 >= 1, got t1=" + std::to_string(t1) +
                          " t2=" + std::to_string(t2));
  }
}

void check_sorted(std::span<const double> thresholds) {
  for (std::size_t i = 1; i < thresholds.size(); ++i)
    if (!(thresholds[i] > thresholds[i - 1])) throw InvalidArgument("thresholds must be strictly increasing");
}

}  // namespace

PrPoint pr_from_counts(double threshold, std::int64_t tp, std::int64_t fp, std::int64_t fn) {
  return {threshold, ratio(tp, tp + fp), ratio(tp, tp + fn), tp, fp, fn};
}

void MatchSpec::validate() const {
  if (!std::isfinite(max_distance) || max_distance < 0.0) throw InvalidArgument("max_distance must be >= 0");
  if (require_same_segment && segmentation == nullptr) {
    throw InvalidArgument("segment-constrained matching needs a segmentation");
  }
}

MatchResult match_tbars(std::span<const TbarPrediction> pred, std::span<const Point3> gt, const MatchSpec& spec) {
  spec.validate();
  const LabelVolume* seg = spec.segmentation;
  auto label_at = [&](Point3 p) -> BodyId {
    if (!seg->contains(p)) throw InvalidArgument("point " + to_string(p) + " lies outside the segmentation");
    return (*seg)(p);
  };

  struct Candidate {
    long long d2;
    std::size_t pred;
    std::size_t gt;
  };
  std::vector<Candidate> admissible;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const BodyId pl = spec.require_same_segment ? label_at(pred[i].pos) : 0;
    for (std::size_t j = 0; j < gt.size(); ++j) {
      const long long d2 = squared_norm(pred[i].pos - gt[j]);
      if (!within_radius(d2, spec.max_distance)) continue;
      if (spec.require_same_segment && (pl == 0 || label_at(gt[j]) != pl)) continue;
      admissible.push_back({d2, i, j});
    }
  }
  std::sort(admissible.begin(), admissible.end(), [&](const Candidate& a, const Candidate& b) {
    return std::tuple(a.d2, -pred[a.pred].confidence, pred[a.pred].pos, gt[a.gt], a.pred, a.gt) <
           std::tuple(b.d2, -pred[b.pred].confidence, pred[b.pred].pos, gt[b.gt], b.pred, b.gt);
  });

  MatchResult r;
  std::vector<bool> pred_used(pred.size(), false);
  std::vector<bool> gt_used(gt.size(), false);
  for (const auto& c : admissible) {
    if (pred_used[c.pred] || gt_used[c.gt]) continue;
    pred_used[c.pred] = gt_used[c.gt] = true;
    r.matches.emplace_back(c.pred, c.gt);
  }
  for (std::size_t i = 0; i < pred.size(); ++i)
    if (!pred_used[i]) r.unmatched_pred.push_back(i);
  for (std::size_t j = 0; j < gt.size(); ++j)
    if (!gt_used[j]) r.unmatched_gt.push_back(j);
  return r;
}

PrCurve tbar_pr_curve(std::span<const TbarPrediction> pred, std::span<const Point3> gt, const MatchSpec& spec,
                      std::span<const double> thresholds) {
  check_sorted(thresholds);
  PrCurve curve;
  for (double t : thresholds) {
    const auto kept = filter_by_confidence(pred, t);
    const auto m = match_tbars(kept, gt, spec);
    curve.push_back(pr_from_counts(t, static_cast<std::int64_t>(m.matches.size()),
                                   static_cast<std::int64_t>(m.unmatched_pred.size()),
                                   static_cast<std::int64_t>(m.unmatched_gt.size())));
  }
  return curve;
}

PrPoint weighted_pr(const ConnectomeGraph& pred, const ConnectomeGraph& gt) {
  std::int64_t tp = 0;
  for (const auto& [e, w] : pred.edges()) tp += std::min(w, gt.weight(e));
  return pr_from_counts(0.0, tp, pred.total_weight() - tp, gt.total_weight() - tp);
}

PrPoint unweighted_pr(const ConnectomeGraph& pred, const ConnectomeGraph& gt) {
  std::int64_t tp = 0;
  for (const auto& [e, w] : pred.edges()) tp += gt.weight(e) > 0;
  const auto np = static_cast<std::int64_t>(pred.edge_count());
  const auto ng = static_cast<std::int64_t>(gt.edge_count());
  return pr_from_counts(0.0, tp, np - tp, ng - tp);
}

PrPoint thresholded_pr(const ConnectomeGraph& pred, const ConnectomeGraph& gt, std::int64_t t) {
  return unweighted_pr(threshold_graph(pred, t), threshold_graph(gt, t));
}

PrPoint asymmetric_pr(const ConnectomeGraph& pred, const ConnectomeGraph& gt, std::int64_t t1, std::int64_t t2) {
  check_asymmetric(t1, t2);
  std::int64_t recall_num = 0, recall_den = 0, precision_num = 0, precision_den = 0;
  for (const auto& e : union_edges(pred, gt)) {
    const auto p = pred.weight(e);
    const auto g = gt.weight(e);
    recall_num += (p >= t2 && g >= t1);
    recall_den += (g >= t1);
    precision_num += (p >= t1 && g >= t2);
    precision_den += (p >= t1);
  }
  PrPoint pt;
  pt.precision = ratio(precision_num, precision_den);
  pt.recall = ratio(recall_num, recall_den);
  pt.tp = recall_num;
  pt.fn = recall_den - recall_num;
  pt.fp = precision_den - precision_num;
  return pt;
}

AddedMissed connections_added_missed(const ConnectomeGraph& pred, const ConnectomeGraph& gt, std::int64_t t1,
                                     std::int64_t t2) {
  check_asymmetric(t1, t2);
  AddedMissed r;
  for (const auto& e : union_edges(pred, gt)) {
    const auto p = pred.weight(e);
    const auto g = gt.weight(e);
    if (g >= t1 && p < t2) r.missed.push_back({e, g, p});
    if (p >= t1 && g < t2) r.added.push_back({e, g, p});
    r.normalizer += g >= t1;
  }
  return r;
}

void MetricMode::validate() const {
  if (kind == Kind::thresholded && t < 1) throw InvalidArgument("thresholded mode needs t >= 1");
  if (kind == Kind::asymmetric) check_asymmetric(t1, t2);
}

PrPoint evaluate_graphs(const ConnectomeGraph& pred, const ConnectomeGraph& gt, const MetricMode& mode) {
  mode.validate();
  switch (mode.kind) {
    case MetricMode::Kind::weighted: return weighted_pr(pred, gt);
    case MetricMode::Kind::unweighted: return unweighted_pr(pred, gt);
    case MetricMode::Kind::thresholded: return thresholded_pr(pred, gt, mode.t);
    case MetricMode::Kind::asymmetric: return asymmetric_pr(pred, gt, mode.t1, mode.t2);
  }
  throw InvalidArgument("unknown metric mode");
}

PrCurve graph_pr_curve(const SynapseSet& synapses, const LabelVolume& labels, const ConnectomeGraph& gt,
                       const MetricMode& mode, std::span<const double> psd_thresholds, const GraphEvalParams& params) {
  mode.validate();
  check_sorted(psd_thresholds);
  ConnectomeGraph truth = filter_bodies(gt, params.filter);
  if (params.undirected) truth = undirect_graph(truth);
  PrCurve curve;
  for (double t : psd_thresholds) {
    ConnectomeGraph pred = filter_bodies(build_graph(synapses, labels, t), params.filter);
    if (params.undirected) pred = undirect_graph(pred);
    auto pt = evaluate_graphs(pred, truth, mode);
    pt.threshold = t;
    curve.push_back(pt);
  }
  return curve;
}

std::vector<ScatterRecord> count_scatter(const ConnectomeGraph& pred, const ConnectomeGraph& gt) {
  std::vector<ScatterRecord> out;
  for (const auto& e : union_edges(pred, gt)) {
    const auto g = gt.weight(e);
    const auto p = pred.weight(e);
    out.push_back({e, g, p, 2 * p >= g && p <= 2 * g});
  }
  return out;
}

double break_even(const PrCurve& curve) {
  double best = 0.0;
  for (const auto& pt : curve)
    if (pt.precision && pt.recall) best = std::max(best, std::min(*pt.precision, *pt.recall));
  return best;
}

}  // namespace synapse
