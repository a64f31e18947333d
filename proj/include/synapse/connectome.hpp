#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "synapse/synapse_set.hpp"
#include "synapse/volume.hpp"

namespace synapse {

/// Ordered (pre, post) body pair. In an undirected graph the key is
/// canonical: pre <= post.
struct Edge {
  BodyId pre = 0;
  BodyId post = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Body-level connectivity: edge -> synapse count. Stored weights are >= 1.
class ConnectomeGraph {
 public:
  ConnectomeGraph() = default;
  explicit ConnectomeGraph(bool directed) : directed_(directed) {}

  bool directed() const { return directed_; }

  /// Adds `weight` (>= 1) to an edge; undirected graphs canonicalize the key.
  void add(BodyId pre, BodyId post, std::int64_t weight = 1);
  std::int64_t weight(BodyId pre, BodyId post) const;
  std::int64_t weight(Edge e) const { return weight(e.pre, e.post); }

  const std::map<Edge, std::int64_t>& edges() const { return edges_; }
  std::size_t edge_count() const { return edges_.size(); }
  bool empty() const { return edges_.empty(); }
  std::int64_t total_weight() const;
  std::int64_t max_weight() const;

  friend bool operator==(const ConnectomeGraph&, const ConnectomeGraph&) = default;

 private:
  Edge key(BodyId pre, BodyId post) const;

  bool directed_ = true;
  std::map<Edge, std::int64_t> edges_;
};

/// Sorted union of the edge keys of two graphs.
std::vector<Edge> union_edges(const ConnectomeGraph& a, const ConnectomeGraph& b);

/// Which bodies may take part in evaluation. Default admits everything.
class BodyFilter {
 public:
  static BodyFilter admit_all() { return {}; }
  static BodyFilter only(std::set<BodyId> bodies);
  /// Bodies holding at least one ground-truth T-bar or PSD; everything else
  /// is an orphan fragment. Partner bodies must already be resolved.
  static BodyFilter from_ground_truth(const SynapseSet& gt, const LabelVolume& labels);

  bool admits(BodyId id) const { return !admissible_ || admissible_->contains(id); }

 private:
  std::optional<std::set<BodyId>> admissible_;
};

/// Indices of synapses whose T-bar sits on label 0.
struct BuildReport {
  std::vector<std::size_t> skipped_tbars;
};

/// Accumulates (T-bar body, partner body) pairs for partners with confidence
/// >= `psd_threshold`. Self-pairs and partners on body 0 are skipped.
ConnectomeGraph build_graph(const SynapseSet& synapses, const LabelVolume& labels, double psd_threshold,
                            BuildReport* report = nullptr);

/// Binarizes: edges with weight >= t survive with weight 1.
ConnectomeGraph threshold_graph(const ConnectomeGraph& g, std::int64_t t);

ConnectomeGraph filter_bodies(const ConnectomeGraph& g, const BodyFilter& f);

/// {a, b} weight = w(a, b) + w(b, a), keyed (min, max).
ConnectomeGraph undirect_graph(const ConnectomeGraph& g);

/// Drops partners on the T-bar's own body and merges repeated partner bodies
/// (keeping the highest confidence). Partners are resolved via `labels` when
/// they only carry a position.
SynapseSet collapse_ground_truth(const SynapseSet& gt, const LabelVolume& labels);

}  // namespace synapse
