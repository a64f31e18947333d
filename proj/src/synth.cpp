#include "synapse/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace synapse {

void SynthSpec::validate() const {
  if (size < 8) throw InvalidArgument("synthetic volume size must be >= 8");
  if (bodies < 2) throw InvalidArgument("synthetic scene needs at least two bodies");
  if (tbars < 0) throw InvalidArgument("T-bar count must be >= 0");
  if (min_partners < 1 || max_partners < min_partners) {
    throw InvalidArgument("partner range must satisfy 1 <= min_partners <= max_partners");
  }
  if (max_partners > bodies - 1) throw InvalidArgument("max_partners exceeds the number of other bodies");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw InvalidArgument("noise_sigma must be >= 0");
  if (2 * margin >= size) throw InvalidArgument("margin leaves no room for T-bars");
  if (!(min_contact_distance > blob_radius)) {
    throw InvalidArgument("min_contact_distance must exceed blob_radius so blobs stay inside their body");
  }
  if (max_contact_distance < min_contact_distance || partner_reach < max_contact_distance) {
    throw InvalidArgument("need min_contact_distance <= max_contact_distance <= partner_reach");
  }
  // Each T-bar claims a ball of half the spacing; refuse packings denser
  // than random sequential placement can reach.
  const double inner = size - 2.0 * margin;
  const double claim = 4.0 / 3.0 * M_PI * std::pow(min_tbar_spacing / 2.0, 3);
  if (tbars * claim > 0.35 * std::pow(inner + min_tbar_spacing, 3)) {
    throw InvalidArgument("cannot fit " + std::to_string(tbars) + " T-bars with spacing " +
                          std::to_string(min_tbar_spacing) + " in a " + std::to_string(size) + "^3 volume");
  }
}

namespace {

struct Contact {
  BodyId body;
  long long d2;
  Point3 nearest;
};

// Nearest voxel of every foreign body within `reach` of p, closest first.
std::vector<Contact> contacts(const LabelVolume& labels, Point3 p, const std::vector<Point3>& ball) {
  const BodyId own = labels(p);
  std::vector<Contact> found;
  for (const auto& off : ball) {
    const Point3 q = p + off;
    if (!labels.contains(q)) continue;
    const BodyId b = labels(q);
    if (b == 0 || b == own) continue;
    const long long d2 = squared_norm(off);
    auto it = std::find_if(found.begin(), found.end(), [&](const Contact& c) { return c.body == b; });
    if (it == found.end()) {
      found.push_back({b, d2, q});
    } else if (d2 < it->d2) {
      *it = {b, d2, q};
    }
  }
  std::sort(found.begin(), found.end(),
            [](const Contact& a, const Contact& b) { return std::tie(a.d2, a.body) < std::tie(b.d2, b.body); });
  return found;
}

}  // namespace

SynthScene generate_scene(const SynthSpec& spec) {
  spec.validate();
  const Dims dims{spec.size, spec.size, spec.size};
  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<int> coord(0, spec.size - 1);

  std::vector<Point3> seeds(spec.bodies);
  for (auto& s : seeds) s = {coord(rng), coord(rng), coord(rng)};

  SynthScene scene{GrayVolume(dims), LabelVolume(dims), {}};
  for (std::size_t i = 0; i < scene.labels.size(); ++i) {
    const Point3 v = dims.point(i);
    std::size_t best = 0;
    for (std::size_t s = 1; s < seeds.size(); ++s)
      if (squared_norm(v - seeds[s]) < squared_norm(v - seeds[best])) best = s;
    scene.labels[i] = static_cast<BodyId>(best + 1);
  }

  // Place T-bars near contacts with the requested number of partner bodies.
  // Admissible sites are enumerated once; most-partnered T-bars go first.
  const auto reach_ball = ball_mask(spec.partner_reach);
  const double lo2 = spec.min_contact_distance * spec.min_contact_distance - 1e-9;
  const double hi2 = spec.max_contact_distance * spec.max_contact_distance + 1e-9;
  struct Site {
    Point3 pos;
    std::vector<Contact> near;
  };
  std::vector<Site> sites;
  for (int z = spec.margin; z < spec.size - spec.margin; ++z)
    for (int y = spec.margin; y < spec.size - spec.margin; ++y)
      for (int x = spec.margin; x < spec.size - spec.margin; ++x) {
        const Point3 p{x, y, z};
        auto near = contacts(scene.labels, p, reach_ball);
        if (near.size() < static_cast<std::size_t>(spec.min_partners)) continue;
        const auto d2 = static_cast<double>(near.front().d2);
        if (d2 < lo2 || d2 > hi2) continue;
        sites.push_back({p, std::move(near)});
      }

  std::uniform_int_distribution<int> partner_count(spec.min_partners, spec.max_partners);
  std::vector<int> wanted(spec.tbars);
  for (auto& k : wanted) k = partner_count(rng);
  std::stable_sort(wanted.begin(), wanted.end(), std::greater<>());
  for (int t = 0; t < spec.tbars; ++t) {
    const int k = wanted[t];
    std::vector<std::size_t> open;
    for (std::size_t i = 0; i < sites.size(); ++i) {
      if (sites[i].near.size() < static_cast<std::size_t>(k)) continue;
      const bool crowded = std::any_of(scene.ground_truth.synapses.begin(), scene.ground_truth.synapses.end(),
                                       [&](const Synapse& s) {
                                         return within_radius(squared_norm(s.tbar.pos - sites[i].pos),
                                                              spec.min_tbar_spacing);
                                       });
      if (!crowded) open.push_back(i);
    }
    if (open.empty()) {
      throw InvalidArgument("could not place " + std::to_string(spec.tbars) + " T-bars (placed " + std::to_string(t) +
                            "); try fewer T-bars, fewer partners or a smaller spacing");
    }
    const auto& site = sites[open[std::uniform_int_distribution<std::size_t>(0, open.size() - 1)(rng)]];
    Synapse syn{{site.pos, 1.0}, {}};
    for (int j = 0; j < k; ++j) syn.partners.push_back({site.near[j].body, 1.0, site.near[j].nearest});
    std::sort(syn.partners.begin(), syn.partners.end(),
              [](const Partner& a, const Partner& b) { return a.body < b.body; });
    scene.ground_truth.synapses.push_back(std::move(syn));
  }

  // Intensities: per-body base level, darker membranes, then PSDs and blobs.
  std::uniform_int_distribution<int> jitter(-spec.body_intensity_jitter, spec.body_intensity_jitter);
  std::vector<int> base(spec.bodies + 1);
  for (auto& b : base) b = spec.body_intensity + jitter(rng);
  std::vector<double> level(scene.gray.size());
  const Point3 faces[] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  for (std::size_t i = 0; i < level.size(); ++i) {
    const Point3 v = dims.point(i);
    const BodyId own = scene.labels[i];
    const bool membrane = std::any_of(std::begin(faces), std::end(faces), [&](Point3 f) {
      return dims.contains(v + f) && scene.labels(v + f) != own;
    });
    level[i] = membrane ? spec.membrane_intensity : base[own];
  }
  const auto psd_ball = ball_mask(spec.psd_radius);
  const auto blob_ball = ball_mask(spec.blob_radius);
  for (const auto& syn : scene.ground_truth.synapses) {
    for (const auto& partner : syn.partners) {
      for (const auto& off : psd_ball) {
        const Point3 q = *partner.pos + off;
        if (dims.contains(q) && scene.labels(q) == partner.body) level[dims.index(q)] = spec.psd_intensity;
      }
    }
    for (const auto& off : blob_ball) {
      const Point3 q = syn.tbar.pos + off;
      if (dims.contains(q)) level[dims.index(q)] = spec.blob_intensity;
    }
  }
  std::normal_distribution<double> noise(0.0, spec.noise_sigma > 0 ? spec.noise_sigma : 1.0);
  for (std::size_t i = 0; i < level.size(); ++i) {
    const double v = level[i] + (spec.noise_sigma > 0 ? noise(rng) : 0.0);
    scene.gray[i] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
  }
  return scene;
}

Displacement displace_into_neighbors(std::span<const TbarPrediction> preds, const LabelVolume& labels, double fraction,
                                     std::uint64_t seed, double reach) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw InvalidArgument("displacement fraction must be in [0, 1]");
  Displacement out{{preds.begin(), preds.end()}, {}};
  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(static_cast<std::size_t>(std::lround(fraction * static_cast<double>(preds.size()))));
  std::sort(order.begin(), order.end());

  const auto ball = ball_mask(reach);
  for (auto i : order) {
    const Point3 p = preds[i].pos;
    const auto near = contacts(labels, p, ball);
    if (near.empty() || labels(p) == 0) continue;
    out.predictions[i].pos = near.front().nearest;
    out.displaced.push_back(i);
  }
  return out;
}

}  // namespace synapse
