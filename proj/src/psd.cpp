#include "synapse/psd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "synapse/parallel.hpp"

namespace synapse {

void PartnerConfig::validate() const {
  if (!std::isfinite(candidate_radius) || candidate_radius <= 0.0) throw InvalidArgument("candidate_radius must be > 0");
  if (dilation_radii.empty()) throw InvalidArgument("dilation_radii must not be empty");
  for (double d : dilation_radii)
    if (!std::isfinite(d) || d <= 0.0) throw InvalidArgument("dilation radii must be > 0");
  if (dark_threshold < 0 || dark_threshold > 256) throw InvalidArgument("dark_threshold must be in [0, 256]");
  if (!(decision_threshold >= 0.0 && decision_threshold <= 1.0)) {
    throw InvalidArgument("decision_threshold must be in [0, 1]");
  }
}

LabelVolume mask_dark_voxels(const LabelVolume& labels, const GrayVolume& gray, int dark_threshold) {
  if (labels.dims() != gray.dims()) {
    throw InvalidArgument("label dims " + to_string(labels.dims()) + " differ from gray dims " + to_string(gray.dims()));
  }
  LabelVolume out = labels;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (gray[i] < dark_threshold) out[i] = 0;
  return out;
}

BodyId tbar_body(Point3 pos, const LabelVolume& masked, const LabelVolume& labels) {
  if (!labels.contains(pos)) {
    throw InvalidArgument("T-bar " + to_string(pos) + " lies outside volume " + to_string(labels.dims()));
  }
  const BodyId own = masked(pos);
  return own != 0 ? own : labels(pos);
}

std::vector<BodyId> candidates_for_tbar(const TbarPrediction& tbar, const LabelVolume& masked,
                                        const LabelVolume& labels, const PartnerConfig& cfg) {
  const BodyId own = tbar_body(tbar.pos, masked, labels);
  if (own == 0) return {};
  auto bodies = bodies_in_sphere(masked, tbar.pos, cfg.candidate_radius);
  std::erase(bodies, own);
  return bodies;
}

Mask interface_mask(const LabelVolume& labels, BodyId body_a, BodyId body_b, double d) {
  if (body_a == body_b) throw InvalidArgument("interface_mask needs two distinct bodies");
  if (body_a == 0 || body_b == 0) throw InvalidArgument("interface_mask: body 0 is the ignore label");
  Mask a = dilate_segment(labels, body_a, d);
  const Mask b = dilate_segment(labels, body_b, d);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = a[i] && b[i];
  return a;
}

namespace {

bool near_body(const LabelVolume& labels, Point3 v, BodyId body, const std::vector<Point3>& ball) {
  for (const auto& off : ball) {
    const Point3 u = v + off;
    if (labels.contains(u) && labels(u) == body) return true;
  }
  return false;
}

}  // namespace

FeatureVector extract_features(const GrayVolume& gray, const LabelVolume& masked, const TbarPrediction& tbar,
                               BodyId own, BodyId candidate, const PartnerConfig& cfg) {
  const Dims d = masked.dims();
  const int reach = static_cast<int>(std::floor(cfg.candidate_radius + 1e-9));
  const Box box = Box::around(tbar.pos, reach, d);

  std::vector<Point3> sphere;
  std::size_t candidate_voxels = 0;
  for (int z = box.lo.z; z < box.hi.z; ++z)
    for (int y = box.lo.y; y < box.hi.y; ++y)
      for (int x = box.lo.x; x < box.hi.x; ++x) {
        const Point3 v{x, y, z};
        if (!within_radius(squared_norm(v - tbar.pos), cfg.candidate_radius)) continue;
        sphere.push_back(v);
        candidate_voxels += masked(v) == candidate;
      }

  FeatureVector f;
  f.reserve(cfg.feature_length());
  double centroid_distance = -1.0;
  for (std::size_t r = 0; r < cfg.dilation_radii.size(); ++r) {
    const auto ball = ball_mask(cfg.dilation_radii[r]);
    std::size_t count = 0;
    std::size_t dark = 0;
    double sum = 0.0;
    int lo = 255;
    int hi = 0;
    double cx = 0.0, cy = 0.0, cz = 0.0;
    for (const auto& v : sphere) {
      if (!near_body(masked, v, own, ball) || !near_body(masked, v, candidate, ball)) continue;
      const int g = gray(v);
      ++count;
      sum += g;
      lo = std::min(lo, g);
      hi = std::max(hi, g);
      dark += g < cfg.dark_threshold;
      cx += v.x;
      cy += v.y;
      cz += v.z;
    }
    if (count == 0) {
      f.insert(f.end(), {0.0, 0.0, 0.0, 0.0, 0.0});
    } else {
      const double n = static_cast<double>(count);
      f.insert(f.end(), {n, sum / n, static_cast<double>(lo), static_cast<double>(hi), static_cast<double>(dark)});
    }
    if (r + 1 == cfg.dilation_radii.size() && count > 0) {
      const double n = static_cast<double>(count);
      const double dx = cx / n - tbar.pos.x, dy = cy / n - tbar.pos.y, dz = cz / n - tbar.pos.z;
      centroid_distance = std::sqrt(dx * dx + dy * dy + dz * dz);
    }
  }
  f.push_back(static_cast<double>(candidate_voxels));
  f.push_back(centroid_distance);
  return f;
}

std::vector<Sample> psd_training_samples(const GrayVolume& gray, const LabelVolume& labels,
                                         const SynapseSet& ground_truth, const PartnerConfig& cfg, int threads) {
  cfg.validate();
  if (ground_truth.synapses.empty()) throw InvalidArgument("PSD training needs at least one ground-truth T-bar");
  const auto masked = mask_dark_voxels(labels, gray, cfg.dark_threshold);
  std::vector<std::vector<Sample>> per_tbar(ground_truth.synapses.size());
  parallel_for(per_tbar.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto& syn = ground_truth.synapses[i];
      const BodyId own = tbar_body(syn.tbar.pos, masked, labels);
      for (BodyId body : candidates_for_tbar(syn.tbar, masked, labels, cfg)) {
        const bool positive = std::any_of(syn.partners.begin(), syn.partners.end(),
                                          [&](const Partner& p) { return p.body == body; });
        per_tbar[i].push_back({extract_features(gray, masked, syn.tbar, own, body, cfg), positive ? 1 : 0});
      }
    }
  });
  std::vector<Sample> samples;
  for (auto& v : per_tbar) std::move(v.begin(), v.end(), std::back_inserter(samples));
  if (std::none_of(samples.begin(), samples.end(), [](const Sample& s) { return s.label == 1; })) {
    throw InvalidArgument("no candidate body matched a ground-truth partner; is the ground truth aligned with the "
                          "segmentation?");
  }
  return samples;
}

MlpModel psd_train(const GrayVolume& gray, const LabelVolume& labels, const SynapseSet& ground_truth,
                   const PartnerConfig& cfg, const TrainSpec& spec, int threads) {
  spec.validate();
  const auto samples = psd_training_samples(gray, labels, ground_truth, cfg, threads);
  std::vector<int> sizes{static_cast<int>(cfg.feature_length())};
  sizes.insert(sizes.end(), spec.hidden_sizes.begin(), spec.hidden_sizes.end());
  sizes.push_back(1);
  return mlp_train(mlp_init(sizes, spec.seed), samples, spec);
}

SynapseSet predict_partners(const GrayVolume& gray, const LabelVolume& labels, std::span<const TbarPrediction> tbars,
                            const MlpModel& model, const PartnerConfig& cfg, int threads) {
  cfg.validate();
  if (model.input_dim() != static_cast<int>(cfg.feature_length())) {
    throw InvalidArgument("PSD model expects " + std::to_string(model.input_dim()) +
                          " features but the partner config produces " + std::to_string(cfg.feature_length()));
  }
  const auto masked = mask_dark_voxels(labels, gray, cfg.dark_threshold);
  SynapseSet out;
  out.synapses.resize(tbars.size());
  parallel_for(tbars.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      auto& syn = out.synapses[i];
      syn.tbar = tbars[i];
      const BodyId own = tbar_body(tbars[i].pos, masked, labels);
      for (BodyId body : candidates_for_tbar(tbars[i], masked, labels, cfg)) {
        const double p = mlp_forward(model, extract_features(gray, masked, tbars[i], own, body, cfg));
        if (p >= cfg.decision_threshold) syn.partners.push_back({body, p, std::nullopt});
      }
    }
  });
  return out;
}

}  // namespace synapse
