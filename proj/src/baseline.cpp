#include "synapse/baseline.hpp"

#include <random>

namespace synapse {

void BaselineConfig::validate() const {
  if (sample_count < 1) throw InvalidArgument("baseline sample_count must be >= 1");
}

namespace {

ConnectomeGraph sample_graph(const LabelVolume& labels, const std::vector<VoxelPair>& pairs,
                             const BaselineConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<std::size_t> pick(0, pairs.size() - 1);
  std::bernoulli_distribution coin(0.5);
  ConnectomeGraph g(true);
  for (std::int64_t s = 0; s < cfg.sample_count; ++s) {
    const auto& pair = pairs[pick(rng)];
    BodyId a = labels(pair.first);
    BodyId b = labels(pair.second);
    if (coin(rng)) std::swap(a, b);
    g.add(a, b);
  }
  return cfg.directed ? g : undirect_graph(g);
}

}  // namespace

ConnectomeGraph proximity_baseline(const LabelVolume& labels, const BaselineConfig& cfg) {
  cfg.validate();
  const auto pairs = boundary_voxel_pairs(labels);
  if (pairs.empty()) throw InvalidArgument("segmentation has no boundary between two nonzero bodies");
  return sample_graph(labels, pairs, cfg);
}

PrCurve baseline_curve(const LabelVolume& labels, const ConnectomeGraph& gt, std::span<const std::int64_t> sample_counts,
                       const MetricMode& mode, bool undirected, std::uint64_t seed) {
  mode.validate();
  for (std::size_t i = 0; i < sample_counts.size(); ++i) {
    if (sample_counts[i] < 1) throw InvalidArgument("baseline sample counts must be >= 1");
    if (i > 0 && sample_counts[i] <= sample_counts[i - 1]) {
      throw InvalidArgument("baseline sample counts must be strictly increasing");
    }
  }
  const auto pairs = boundary_voxel_pairs(labels);
  if (pairs.empty()) throw InvalidArgument("segmentation has no boundary between two nonzero bodies");
  const ConnectomeGraph truth = undirected ? undirect_graph(gt) : gt;
  PrCurve curve;
  for (auto n : sample_counts) {
    ConnectomeGraph pred = sample_graph(labels, pairs, {n, seed, true});
    if (undirected) pred = undirect_graph(pred);
    auto pt = evaluate_graphs(pred, truth, mode);
    pt.threshold = static_cast<double>(n);
    curve.push_back(pt);
  }
  return curve;
}

}  // namespace synapse
