#include "synapse/tbar.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "synapse/parallel.hpp"

namespace synapse {

void DetectorConfig::validate() const {
  auto check_radius = [](double r, const char* name) {
    if (!std::isfinite(r) || r < 0.0) throw InvalidArgument(std::string(name) + " must be finite and >= 0");
  };
  check_radius(positive_radius, "positive_radius");
  check_radius(nms_radius, "nms_radius");
  check_radius(shift_radius, "shift_radius");
  if (!std::isfinite(smooth_sigma) || smooth_sigma <= 0.0) throw InvalidArgument("smooth_sigma must be > 0");
  if (!(score_threshold >= 0.0 && score_threshold <= 1.0)) throw InvalidArgument("score_threshold must be in [0, 1]");
}

ScalarField VoxelScorer::score_dense(const GrayVolume& gray, int threads) const {
  const Dims d = gray.dims();
  ScalarField out(d);
  parallel_for(static_cast<std::size_t>(d.nz), threads, [&](std::size_t z0, std::size_t z1) {
    for (int z = static_cast<int>(z0); z < static_cast<int>(z1); ++z)
      for (int y = 0; y < d.ny; ++y)
        for (int x = 0; x < d.nx; ++x) out(x, y, z) = score(gray, {x, y, z});
  });
  return out;
}

std::vector<double> intensity_patch(const GrayVolume& gray, Point3 c, int r) {
  const Dims d = gray.dims();
  std::vector<double> patch;
  patch.reserve(static_cast<std::size_t>(2 * r + 1) * (2 * r + 1) * (2 * r + 1));
  for (int dz = -r; dz <= r; ++dz)
    for (int dy = -r; dy <= r; ++dy)
      for (int dx = -r; dx <= r; ++dx) {
        const Point3 q{std::clamp(c.x + dx, 0, d.nx - 1), std::clamp(c.y + dy, 0, d.ny - 1),
                       std::clamp(c.z + dz, 0, d.nz - 1)};
        patch.push_back(gray(q));
      }
  return patch;
}

PatchMlpScorer::PatchMlpScorer(int patch_radius, MlpModel model) : patch_radius_(patch_radius), model_(std::move(model)) {
  if (patch_radius_ < 0) throw InvalidArgument("patch_radius must be >= 0");
  const int side = 2 * patch_radius_ + 1;
  if (model_.input_dim() != side * side * side) {
    throw InvalidArgument("patch scorer model expects " + std::to_string(model_.input_dim()) +
                          " inputs but a radius-" + std::to_string(patch_radius_) + " patch has " +
                          std::to_string(side * side * side));
  }
}

double PatchMlpScorer::score(const GrayVolume& gray, Point3 p) const {
  return mlp_forward(model_, intensity_patch(gray, p, patch_radius_));
}

Mask make_voxel_labels(std::span<const Point3> annotations, Dims dims, double positive_radius) {
  Mask labels(dims);
  const auto ball = ball_mask(positive_radius);
  for (const auto& a : annotations) {
    if (!dims.contains(a)) {
      throw InvalidArgument("annotation " + to_string(a) + " lies outside volume " + to_string(dims));
    }
    for (const auto& off : ball)
      if (dims.contains(a + off)) labels(a + off) = 1;
  }
  return labels;
}

PatchMlpScorer reference_scorer_train(const GrayVolume& gray, const Mask& labels, int patch_radius,
                                      const TrainSpec& spec) {
  if (gray.dims() != labels.dims()) {
    throw InvalidArgument("gray dims " + to_string(gray.dims()) + " differ from label dims " +
                          to_string(labels.dims()));
  }
  if (patch_radius < 0) throw InvalidArgument("patch_radius must be >= 0");
  spec.validate();
  std::vector<std::size_t> positives;
  std::vector<std::size_t> negatives;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] ? positives : negatives).push_back(i);
  if (positives.empty() || negatives.empty()) {
    throw InvalidArgument("scorer training needs both positive and negative voxels");
  }

  std::mt19937_64 rng(spec.seed);
  const std::size_t take = std::min(positives.size(), negatives.size());
  // Partial Fisher-Yates: the first `take` entries become a uniform sample.
  for (std::size_t i = 0; i < take; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, negatives.size() - 1);
    std::swap(negatives[i], negatives[pick(rng)]);
  }
  negatives.resize(take);

  std::vector<Sample> samples;
  samples.reserve(positives.size() + negatives.size());
  for (auto i : positives) samples.push_back({intensity_patch(gray, labels.dims().point(i), patch_radius), 1});
  for (auto i : negatives) samples.push_back({intensity_patch(gray, labels.dims().point(i), patch_radius), 0});

  const int side = 2 * patch_radius + 1;
  std::vector<int> sizes{side * side * side};
  sizes.insert(sizes.end(), spec.hidden_sizes.begin(), spec.hidden_sizes.end());
  sizes.push_back(1);
  auto model = mlp_train(mlp_init(sizes, spec.seed), samples, spec);
  return PatchMlpScorer(patch_radius, std::move(model));
}

std::vector<TbarPrediction> nms(const ScalarField& field, double threshold, double nms_radius) {
  if (!std::isfinite(nms_radius) || nms_radius < 0.0) throw InvalidArgument("nms_radius must be >= 0");
  const Dims d = field.dims();
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < field.size(); ++i)
    if (field[i] >= threshold) order.push_back(i);
  // Linear index order is (z, y, x) order, so it breaks score ties.
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return field[a] != field[b] ? field[a] > field[b] : a < b;
  });

  const auto ball = ball_mask(nms_radius);
  std::vector<std::uint8_t> suppressed(field.size(), 0);
  std::vector<TbarPrediction> out;
  for (auto i : order) {
    if (suppressed[i]) continue;
    const Point3 p = d.point(i);
    out.push_back({p, field[i]});
    for (const auto& off : ball) {
      const Point3 q = p + off;
      if (d.contains(q)) suppressed[d.index(q)] = 1;
    }
  }
  return out;
}

std::vector<TbarPrediction> shift_predictions(std::span<const TbarPrediction> preds, const GrayVolume& gray,
                                              double shift_radius) {
  std::vector<TbarPrediction> out;
  out.reserve(preds.size());
  for (const auto& p : preds) out.push_back({brightest_in_ball(gray, p.pos, shift_radius), p.confidence});
  return out;
}

std::vector<TbarPrediction> detect_tbars(const GrayVolume& gray, const VoxelScorer& scorer, const DetectorConfig& cfg,
                                         int threads) {
  cfg.validate();
  const auto scores = scorer.score_dense(gray, threads);
  const auto smoothed = gaussian_smooth(scores, cfg.smooth_sigma, threads);
  return shift_predictions(nms(smoothed, cfg.score_threshold, cfg.nms_radius), gray, cfg.shift_radius);
}

std::vector<TbarPrediction> filter_by_confidence(std::span<const TbarPrediction> preds, double threshold) {
  std::vector<TbarPrediction> out;
  std::copy_if(preds.begin(), preds.end(), std::back_inserter(out),
               [&](const TbarPrediction& p) { return p.confidence >= threshold; });
  return out;
}

}  // namespace synapse
