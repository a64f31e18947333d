#pragma once

#include <span>
#include <vector>

#include "synapse/mlp.hpp"
#include "synapse/synapse_set.hpp"
#include "synapse/volume.hpp"

namespace synapse {

struct PartnerConfig {
  double candidate_radius = 15.0;
  std::vector<double> dilation_radii{1.0, 2.0};
  int dark_threshold = 50;
  double decision_threshold = 0.5;

  void validate() const;
  /// 5 statistics per dilation radius plus candidate size and centroid distance.
  std::size_t feature_length() const { return 5 * dilation_radii.size() + 2; }
};

using FeatureVector = std::vector<double>;

/// Copy of `labels` with every voxel darker than `dark_threshold` set to 0.
LabelVolume mask_dark_voxels(const LabelVolume& labels, const GrayVolume& gray, int dark_threshold);

/// Body owning a T-bar: its label in the masked volume, or in the unmasked
/// volume when the T-bar sits on a masked voxel. 0 when both are unlabelled.
BodyId tbar_body(Point3 pos, const LabelVolume& masked, const LabelVolume& labels);

/// Nonzero bodies meeting the candidate sphere, minus the T-bar's own body,
/// ascending. Empty when the T-bar has no body of its own.
std::vector<BodyId> candidates_for_tbar(const TbarPrediction& tbar, const LabelVolume& masked,
                                        const LabelVolume& labels, const PartnerConfig& cfg);

/// dilate(a, d) AND dilate(b, d) over the whole volume.
Mask interface_mask(const LabelVolume& labels, BodyId body_a, BodyId body_b, double d);

/// Feature layout, for each dilation radius d in order:
///   [interface voxels, mean, min, max intensity, voxels darker than
///    dark_threshold]
/// then [candidate voxels inside the sphere, distance from the T-bar to the
/// centroid of the interface at the largest radius (-1 if empty)].
///
/// Statistics are pooled over interface voxels inside the candidate sphere
/// around the T-bar; intensity stats are 0 for an empty interface.
FeatureVector extract_features(const GrayVolume& gray, const LabelVolume& masked, const TbarPrediction& tbar,
                               BodyId tbar_body, BodyId candidate, const PartnerConfig& cfg);

/// Candidate feature/label pairs for every ground-truth T-bar. A candidate is
/// positive iff it is one of that T-bar's (resolved) partner bodies.
std::vector<Sample> psd_training_samples(const GrayVolume& gray, const LabelVolume& labels,
                                         const SynapseSet& ground_truth, const PartnerConfig& cfg, int threads = 1);

MlpModel psd_train(const GrayVolume& gray, const LabelVolume& labels, const SynapseSet& ground_truth,
                   const PartnerConfig& cfg, const TrainSpec& spec, int threads = 1);

/// Scores every (T-bar, candidate) pair and keeps partners whose confidence
/// is >= cfg.decision_threshold. Partners are listed in ascending body id.
SynapseSet predict_partners(const GrayVolume& gray, const LabelVolume& labels, std::span<const TbarPrediction> tbars,
                            const MlpModel& model, const PartnerConfig& cfg, int threads = 1);

}  // namespace synapse
