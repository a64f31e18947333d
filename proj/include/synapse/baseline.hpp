#pragma once

#include <cstdint>
#include <span>

#include "synapse/connectome.hpp"
#include "synapse/metrics.hpp"
#include "synapse/volume.hpp"

namespace synapse {

struct BaselineConfig {
  std::int64_t sample_count = 1000;
  std::uint64_t seed = 1;
  bool directed = true;

  void validate() const;
};

/// Body-proximity connectome: draws `sample_count` boundary voxel pairs
/// uniformly with replacement and orients each with a fair coin. With
/// `directed` unset the result is returned as an undirected graph.
ConnectomeGraph proximity_baseline(const LabelVolume& labels, const BaselineConfig& cfg);

/// One point per sample count (used as the curve's threshold). Sample counts
/// must be positive and strictly increasing; each graph is drawn from `seed`.
/// `undirected` evaluates both graphs on unordered body pairs.
PrCurve baseline_curve(const LabelVolume& labels, const ConnectomeGraph& gt, std::span<const std::int64_t> sample_counts,
                       const MetricMode& mode, bool undirected, std::uint64_t seed = 1);

}  // namespace synapse
