#pragma once

#include <memory>
#include <span>
#include <vector>

#include "synapse/mlp.hpp"
#include "synapse/volume.hpp"

namespace synapse {

struct TbarPrediction {
  Point3 pos;
  double confidence = 0.0;

  friend bool operator==(const TbarPrediction&, const TbarPrediction&) = default;
};

struct DetectorConfig {
  double positive_radius = 7.0;
  double smooth_sigma = 1.0;
  double score_threshold = 0.1;
  double nms_radius = 27.0;
  double shift_radius = 3.0;

  void validate() const;
};

/// Maps a grayscale volume to a per-voxel score in [0, 1]. Implementations
/// must be deterministic and safe to call concurrently.
class VoxelScorer {
 public:
  virtual ~VoxelScorer() = default;

  virtual double score(const GrayVolume& gray, Point3 p) const = 0;

  /// Scores every voxel. The default evaluates `score` over z-slabs in
  /// parallel; output does not depend on `threads`.
  virtual ScalarField score_dense(const GrayVolume& gray, int threads = 1) const;
};

/// Reference scorer: an MLP over the intensities of a (2r+1)^3 patch, with
/// edge replication at the volume faces.
class PatchMlpScorer final : public VoxelScorer {
 public:
  PatchMlpScorer(int patch_radius, MlpModel model);

  double score(const GrayVolume& gray, Point3 p) const override;

  int patch_radius() const { return patch_radius_; }
  const MlpModel& model() const { return model_; }

  friend bool operator==(const PatchMlpScorer& a, const PatchMlpScorer& b) {
    return a.patch_radius_ == b.patch_radius_ && a.model_ == b.model_;
  }

 private:
  int patch_radius_;
  MlpModel model_;
};

/// Flattened intensity patch of side 2r+1 around `center`, x fastest.
std::vector<double> intensity_patch(const GrayVolume& gray, Point3 center, int patch_radius);

/// Marks every voxel within `positive_radius` of an annotation.
Mask make_voxel_labels(std::span<const Point3> annotations, Dims dims, double positive_radius);

/// Trains the patch scorer on all positive voxels plus an equal number of
/// negatives drawn without replacement using `spec.seed`.
PatchMlpScorer reference_scorer_train(const GrayVolume& gray, const Mask& labels, int patch_radius,
                                      const TrainSpec& spec);

/// Greedy non-maxima suppression: repeatedly emit the best unsuppressed voxel
/// scoring at least `threshold` (ties by smallest (z, y, x)) and suppress its
/// `nms_radius` ball. Output is in emission order, i.e. non-increasing
/// confidence.
std::vector<TbarPrediction> nms(const ScalarField& field, double threshold, double nms_radius);

/// Moves every prediction to the brightest voxel within `shift_radius`.
std::vector<TbarPrediction> shift_predictions(std::span<const TbarPrediction> preds, const GrayVolume& gray,
                                              double shift_radius);

/// score -> smooth -> nms -> shift.
std::vector<TbarPrediction> detect_tbars(const GrayVolume& gray, const VoxelScorer& scorer, const DetectorConfig& cfg,
                                         int threads = 1);

/// Keeps predictions with confidence >= `threshold`.
std::vector<TbarPrediction> filter_by_confidence(std::span<const TbarPrediction> preds, double threshold);

}  // namespace synapse
