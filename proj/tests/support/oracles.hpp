#pragma once

// Brute-force reference implementations and random generators shared by the
// unit and acceptance tests. Everything here is written for clarity, not
// speed, and does not call into the library code it checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "synapse/connectome.hpp"
#include "synapse/metrics.hpp"
#include "synapse/volume.hpp"

namespace oracle {

using namespace synapse;
using Rng = std::mt19937_64;

inline int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
inline double uniform_real(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

inline long long dist2(Point3 a, Point3 b) {
  const long long dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return dx * dx + dy * dy + dz * dz;
}

inline bool inside(long long d2, double r) { return std::sqrt(static_cast<double>(d2)) <= r + 1e-9; }

inline std::vector<Point3> all_points(Dims d) {
  std::vector<Point3> out;
  for (int z = 0; z < d.nz; ++z)
    for (int y = 0; y < d.ny; ++y)
      for (int x = 0; x < d.nx; ++x) out.push_back({x, y, z});
  return out;
}

inline Dims random_dims(Rng& rng, int max_side) {
  return {uniform_int(rng, 1, max_side), uniform_int(rng, 1, max_side), uniform_int(rng, 1, max_side)};
}

/// Labels drawn from [0, max_label], with blobs of repeated labels so that
/// bodies have some extent.
inline LabelVolume random_labels(Rng& rng, Dims d, BodyId max_label) {
  LabelVolume v(d);
  BodyId current = 1;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (uniform_int(rng, 0, 3) == 0) current = static_cast<BodyId>(uniform_int(rng, 0, static_cast<int>(max_label)));
    v[i] = current;
  }
  return v;
}

inline GrayVolume random_gray(Rng& rng, Dims d) {
  GrayVolume g(d);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = static_cast<std::uint8_t>(uniform_int(rng, 0, 255));
  return g;
}

inline Mask dilate(const LabelVolume& labels, BodyId body, double r) {
  Mask m(labels.dims());
  const auto pts = all_points(labels.dims());
  for (const auto& v : pts)
    for (const auto& u : pts)
      if (labels(u) == body && inside(dist2(u, v), r)) {
        m(v) = 1;
        break;
      }
  return m;
}

inline Mask interface(const LabelVolume& labels, BodyId a, BodyId b, double r) {
  const auto ma = dilate(labels, a, r);
  const auto mb = dilate(labels, b, r);
  Mask out(labels.dims());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (ma[i] && mb[i]) ? 1 : 0;
  return out;
}

inline std::set<BodyId> sphere_bodies(const LabelVolume& labels, Point3 c, double r) {
  std::set<BodyId> out;
  for (const auto& v : all_points(labels.dims()))
    if (labels(v) != 0 && inside(dist2(v, c), r)) out.insert(labels(v));
  return out;
}

inline Point3 brightest(const GrayVolume& gray, Point3 c, double r) {
  std::optional<Point3> best;
  for (const auto& v : all_points(gray.dims())) {  // (z, y, x) order
    if (!inside(dist2(v, c), r)) continue;
    if (!best || gray(v) > gray(*best)) best = v;
  }
  return *best;
}

/// Emits the highest remaining voxel (ties: first in scan order) and removes
/// everything within the radius, until nothing at or above threshold is left.
inline std::vector<TbarPrediction> nms(const ScalarField& f, double threshold, double r) {
  const auto pts = all_points(f.dims());
  std::vector<bool> alive(pts.size(), true);
  std::vector<TbarPrediction> out;
  while (true) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (alive[i] && f(pts[i]) >= threshold && (!best || f(pts[i]) > f(pts[*best]))) best = i;
    if (!best) break;
    out.push_back({pts[*best], f(pts[*best])});
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (inside(dist2(pts[i], pts[*best]), r)) alive[i] = false;
  }
  return out;
}

inline std::size_t boundary_pair_count(const LabelVolume& labels) {
  std::size_t n = 0;
  const auto pts = all_points(labels.dims());
  for (const auto& u : pts)
    for (const auto& v : pts) {
      if (!(u < v) || dist2(u, v) != 1) continue;
      if (labels(u) != 0 && labels(v) != 0 && labels(u) != labels(v)) ++n;
    }
  return n;
}

// ---------------------------------------------------------------------------
// Graphs
// ---------------------------------------------------------------------------

using EdgeMap = std::map<std::pair<BodyId, BodyId>, std::int64_t>;

/// Random directed graph over ids 1..nodes with weights drawn from 0..max_weight
/// (weight 0 means the edge is absent).
inline ConnectomeGraph random_graph(Rng& rng, int nodes, int max_weight, double density) {
  ConnectomeGraph g(true);
  for (int a = 1; a <= nodes; ++a)
    for (int b = 1; b <= nodes; ++b) {
      if (a == b || uniform_real(rng, 0, 1) >= density) continue;
      const int w = uniform_int(rng, 0, max_weight);
      if (w > 0) g.add(static_cast<BodyId>(a), static_cast<BodyId>(b), w);
    }
  return g;
}

inline EdgeMap to_map(const ConnectomeGraph& g) {
  EdgeMap m;
  for (const auto& [e, w] : g.edges()) m[{e.pre, e.post}] = w;
  return m;
}

inline std::set<std::pair<BodyId, BodyId>> keys(const EdgeMap& a, const EdgeMap& b) {
  std::set<std::pair<BodyId, BodyId>> k;
  for (const auto& [e, w] : a) k.insert(e);
  for (const auto& [e, w] : b) k.insert(e);
  return k;
}

inline std::int64_t at(const EdgeMap& m, std::pair<BodyId, BodyId> e) {
  const auto it = m.find(e);
  return it == m.end() ? 0 : it->second;
}

struct Ratio {
  std::int64_t num = 0;
  std::int64_t den = 0;
  std::optional<double> value() const {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
  }
};

struct PrOracle {
  Ratio precision;
  Ratio recall;
};

/// Asymmetric recall/precision written straight from the summation formulas.
inline PrOracle asymmetric(const ConnectomeGraph& pred, const ConnectomeGraph& gt, std::int64_t t1, std::int64_t t2) {
  const auto p = to_map(pred), g = to_map(gt);
  PrOracle r;
  for (const auto& e : keys(p, g)) {
    const auto pe = at(p, e), ge = at(g, e);
    r.recall.num += (pe >= t2 && ge >= t1);
    r.recall.den += (ge >= t1);
    r.precision.num += (pe >= t1 && ge >= t2);
    r.precision.den += (pe >= t1);
  }
  return r;
}

/// Symmetric PR on the graphs binarized at weight >= t.
inline PrOracle thresholded(const ConnectomeGraph& pred, const ConnectomeGraph& gt, std::int64_t t) {
  const auto p = to_map(pred), g = to_map(gt);
  PrOracle r;
  for (const auto& e : keys(p, g)) {
    const bool pe = at(p, e) >= t, ge = at(g, e) >= t;
    r.precision.num += pe && ge;
    r.precision.den += pe;
    r.recall.num += pe && ge;
    r.recall.den += ge;
  }
  return r;
}

inline PrOracle weighted(const ConnectomeGraph& pred, const ConnectomeGraph& gt) {
  const auto p = to_map(pred), g = to_map(gt);
  PrOracle r;
  for (const auto& e : keys(p, g)) {
    const auto m = std::min(at(p, e), at(g, e));
    r.precision.num += m;
    r.recall.num += m;
    r.precision.den += at(p, e);
    r.recall.den += at(g, e);
  }
  return r;
}

inline bool same(const std::optional<double>& a, const std::optional<double>& b, double tol = 1e-12) {
  if (a.has_value() != b.has_value()) return false;
  return !a || std::abs(*a - *b) <= tol;
}

inline bool agrees(const PrPoint& p, const PrOracle& o) {
  return same(p.precision, o.precision.value()) && same(p.recall, o.recall.value());
}

}  // namespace oracle
