#include "synapse/volume.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "synapse/parallel.hpp"

namespace synapse {

std::string to_string(Point3 p) {
  return "(" + std::to_string(p.x) + ", " + std::to_string(p.y) + ", " + std::to_string(p.z) + ")";
}

std::string to_string(Dims d) {
  return "[" + std::to_string(d.nx) + ", " + std::to_string(d.ny) + ", " + std::to_string(d.nz) + "]";
}

std::size_t count_set(const Mask& mask) {
  return static_cast<std::size_t>(std::count_if(mask.data().begin(), mask.data().end(), [](auto v) { return v != 0; }));
}

Box Box::around(Point3 center, int radius, Dims dims) {
  return {{std::max(0, center.x - radius), std::max(0, center.y - radius), std::max(0, center.z - radius)},
          {std::min(dims.nx, center.x + radius + 1), std::min(dims.ny, center.y + radius + 1),
           std::min(dims.nz, center.z + radius + 1)}};
}

std::vector<double> gaussian_kernel(double sigma) {
  if (!std::isfinite(sigma) || sigma <= 0.0) {
    throw InvalidArgument("gaussian sigma must be finite and positive, got " + std::to_string(sigma));
  }
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> taps(2 * radius + 1);
  for (int k = -radius; k <= radius; ++k) {
    taps[k + radius] = std::exp(-(k * k) / (2.0 * sigma * sigma));
  }
  const double total = std::accumulate(taps.begin(), taps.end(), 0.0);
  for (auto& t : taps) t /= total;
  return taps;
}

namespace {

// One pass of the separable filter along `axis` (0 = x, 1 = y, 2 = z).
void convolve_axis(const ScalarField& in, ScalarField& out, const std::vector<double>& taps, int axis, int threads) {
  const Dims d = in.dims();
  const int radius = static_cast<int>(taps.size() / 2);
  const int extent = axis == 0 ? d.nx : axis == 1 ? d.ny : d.nz;
  parallel_for(static_cast<std::size_t>(d.nz), threads, [&](std::size_t z0, std::size_t z1) {
    for (int z = static_cast<int>(z0); z < static_cast<int>(z1); ++z) {
      for (int y = 0; y < d.ny; ++y) {
        for (int x = 0; x < d.nx; ++x) {
          const Point3 p{x, y, z};
          const int coord = axis == 0 ? x : axis == 1 ? y : z;
          double acc = 0.0;
          for (int k = -radius; k <= radius; ++k) {
            Point3 q = p;
            const int c = std::clamp(coord + k, 0, extent - 1);
            (axis == 0 ? q.x : axis == 1 ? q.y : q.z) = c;
            acc += taps[k + radius] * in(q);
          }
          out(p) = acc;
        }
      }
    }
  });
}

}  // namespace

ScalarField gaussian_smooth(const ScalarField& field, double sigma, int threads) {
  const auto taps = gaussian_kernel(sigma);
  ScalarField a(field.dims());
  ScalarField b(field.dims());
  convolve_axis(field, a, taps, 0, threads);
  convolve_axis(a, b, taps, 1, threads);
  convolve_axis(b, a, taps, 2, threads);
  return a;
}

std::vector<Point3> ball_mask(double radius) {
  if (!std::isfinite(radius) || radius < 0.0) {
    throw InvalidArgument("ball radius must be finite and non-negative, got " + std::to_string(radius));
  }
  const int r = static_cast<int>(std::floor(radius + 1e-9));
  std::vector<Point3> offsets;
  for (int dz = -r; dz <= r; ++dz)
    for (int dy = -r; dy <= r; ++dy)
      for (int dx = -r; dx <= r; ++dx)
        if (within_radius(squared_norm({dx, dy, dz}), radius)) offsets.push_back({dx, dy, dz});
  return offsets;
}

Mask dilate_segment(const LabelVolume& labels, BodyId body, double radius) {
  if (body == 0) throw InvalidArgument("dilate_segment: body 0 is the ignore label");
  const auto ball = ball_mask(radius);
  const Dims d = labels.dims();
  Mask mask(d);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != body) continue;
    const Point3 u = d.point(i);
    for (const auto& off : ball) {
      const Point3 v = u + off;
      if (d.contains(v)) mask(v) = 1;
    }
  }
  return mask;
}

std::vector<BodyId> bodies_in_sphere(const LabelVolume& labels, Point3 center, double radius) {
  if (!labels.contains(center)) {
    throw InvalidArgument("bodies_in_sphere: center " + to_string(center) + " outside volume " +
                          to_string(labels.dims()));
  }
  std::vector<BodyId> found;
  for (const auto& off : ball_mask(radius)) {
    const Point3 v = center + off;
    if (labels.contains(v) && labels(v) != 0) found.push_back(labels(v));
  }
  std::sort(found.begin(), found.end());
  found.erase(std::unique(found.begin(), found.end()), found.end());
  return found;
}

Point3 brightest_in_ball(const GrayVolume& gray, Point3 center, double radius) {
  if (!gray.contains(center)) {
    throw InvalidArgument("brightest_in_ball: center " + to_string(center) + " outside volume " +
                          to_string(gray.dims()));
  }
  // Offsets come out in (z, y, x) order, so the first strict maximum is the
  // lexicographically smallest one.
  Point3 best = center;
  int best_value = -1;
  for (const auto& off : ball_mask(radius)) {
    const Point3 v = center + off;
    if (!gray.contains(v)) continue;
    if (gray(v) > best_value) {
      best_value = gray(v);
      best = v;
    }
  }
  return best;
}

std::vector<VoxelPair> boundary_voxel_pairs(const LabelVolume& labels) {
  const Dims d = labels.dims();
  std::vector<VoxelPair> pairs;
  const Point3 steps[] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const BodyId a = labels[i];
    if (a == 0) continue;
    const Point3 u = d.point(i);
    for (const auto& s : steps) {
      const Point3 v = u + s;
      if (!d.contains(v)) continue;
      const BodyId b = labels(v);
      if (b != 0 && b != a) pairs.push_back({u, v});
    }
  }
  return pairs;
}

}  // namespace synapse
