#pragma once

#include <optional>
#include <vector>

#include "synapse/tbar.hpp"
#include "synapse/volume.hpp"

namespace synapse {

/// One post-synaptic partner of a T-bar. Ground-truth partners may carry only
/// a PSD position, with `body` == 0 until resolved against a segmentation.
struct Partner {
  BodyId body = 0;
  double confidence = 1.0;
  std::optional<Point3> pos;

  friend bool operator==(const Partner&, const Partner&) = default;
};

struct Synapse {
  TbarPrediction tbar;
  std::vector<Partner> partners;

  friend bool operator==(const Synapse&, const Synapse&) = default;
};

/// Polyadic synapses: each T-bar with its (possibly empty) partner list.
struct SynapseSet {
  std::vector<Synapse> synapses;

  std::vector<TbarPrediction> tbars() const;
  std::vector<Point3> tbar_positions() const;

  friend bool operator==(const SynapseSet&, const SynapseSet&) = default;
};

/// Fills in partner bodies from their PSD positions. Each position is first
/// moved to the brightest voxel within `shift_radius` (0 disables shifting),
/// then looked up in `labels`. Partners that already name a body keep it.
SynapseSet resolve_partner_bodies(const SynapseSet& gt, const LabelVolume& labels, const GrayVolume* gray,
                                  double shift_radius);

}  // namespace synapse
