#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "synapse/synapse_set.hpp"
#include "synapse/volume.hpp"

namespace synapse {

/// Parameters of a synthetic EM-like scene: Voronoi bodies with dark
/// membranes, bright T-bar blobs placed near body contacts, and dark PSD
/// patches on the partner side of each contact.
struct SynthSpec {
  int size = 64;  // cube side, voxels
  int bodies = 8;
  int tbars = 12;
  int min_partners = 1;
  int max_partners = 3;
  double noise_sigma = 10.0;
  std::uint64_t seed = 1;

  int body_intensity = 160;
  int body_intensity_jitter = 10;
  int membrane_intensity = 80;
  int blob_intensity = 230;
  int psd_intensity = 20;
  double blob_radius = 1.5;
  double psd_radius = 1.5;

  /// T-bar centres sit this far (Euclidean) from the nearest foreign body.
  double min_contact_distance = 2.5;
  double max_contact_distance = 4.5;
  /// Partner bodies must come within this distance of the T-bar centre.
  double partner_reach = 6.0;
  double min_tbar_spacing = 18.0;
  int margin = 4;

  void validate() const;
};

struct SynthScene {
  GrayVolume gray;
  LabelVolume labels;
  SynapseSet ground_truth;
};

/// Deterministic for a given spec. Throws InvalidArgument when the requested
/// T-bars cannot be placed.
SynthScene generate_scene(const SynthSpec& spec);

struct Displacement {
  std::vector<TbarPrediction> predictions;
  std::vector<std::size_t> displaced;  // indices that were moved
};

/// Moves round(fraction * n) randomly chosen predictions onto the nearest
/// voxel of a different nonzero body within `reach`. Predictions with no
/// such voxel stay put and are not reported as displaced.
Displacement displace_into_neighbors(std::span<const TbarPrediction> preds, const LabelVolume& labels, double fraction,
                                     std::uint64_t seed, double reach = 6.0);

}  // namespace synapse
