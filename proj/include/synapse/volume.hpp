#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "synapse/errors.hpp"

namespace synapse {

using BodyId = std::uint32_t;

/// Integer voxel coordinate.
struct Point3 {
  int x = 0;
  int y = 0;
  int z = 0;

  friend bool operator==(const Point3&, const Point3&) = default;
  /// Lexicographic (z, y, x), which is also linear-index order.
  friend std::strong_ordering operator<=>(const Point3& a, const Point3& b) {
    if (auto c = a.z <=> b.z; c != 0) return c;
    if (auto c = a.y <=> b.y; c != 0) return c;
    return a.x <=> b.x;
  }
};

inline Point3 operator+(Point3 a, Point3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Point3 operator-(Point3 a, Point3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }

inline long long squared_norm(Point3 p) {
  return 1LL * p.x * p.x + 1LL * p.y * p.y + 1LL * p.z * p.z;
}

std::string to_string(Point3 p);

/// True when a squared integer distance lies inside a ball of `radius`.
/// A small slack absorbs rounding in radii such as sqrt(3).
inline bool within_radius(long long squared_distance, double radius) {
  return static_cast<double>(squared_distance) <= radius * radius + 1e-9;
}

/// Grid extent. Voxels are stored x fastest, then y, then z.
struct Dims {
  int nx = 0;
  int ny = 0;
  int nz = 0;

  friend bool operator==(const Dims&, const Dims&) = default;

  std::size_t voxel_count() const {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) * static_cast<std::size_t>(nz);
  }
  bool contains(Point3 p) const {
    return p.x >= 0 && p.y >= 0 && p.z >= 0 && p.x < nx && p.y < ny && p.z < nz;
  }
  std::size_t index(Point3 p) const {
    return static_cast<std::size_t>(p.x) +
           static_cast<std::size_t>(nx) * (static_cast<std::size_t>(p.y) + static_cast<std::size_t>(ny) * p.z);
  }
  Point3 point(std::size_t index) const {
    const auto plane = static_cast<std::size_t>(nx) * ny;
    return {static_cast<int>(index % nx), static_cast<int>((index / nx) % ny), static_cast<int>(index / plane)};
  }
  bool valid() const { return nx > 0 && ny > 0 && nz > 0; }
};

std::string to_string(Dims d);

/// Dense 3-D grid. The tag keeps volumes with the same element type but a
/// different meaning (a grayscale image versus a binary mask) apart.
template <typename T, typename Tag>
class Volume {
 public:
  using value_type = T;

  Volume() = default;
  explicit Volume(Dims dims, T fill = T{}) : dims_(dims), data_(checked_size(dims), fill) {}
  Volume(Dims dims, std::vector<T> data) : dims_(dims), data_(std::move(data)) {
    if (data_.size() != checked_size(dims)) {
      throw InvalidArgument("volume data length " + std::to_string(data_.size()) + " does not match dims " +
                            to_string(dims));
    }
  }

  const Dims& dims() const { return dims_; }
  std::size_t size() const { return data_.size(); }
  bool contains(Point3 p) const { return dims_.contains(p); }

  T& operator()(Point3 p) { return data_[dims_.index(p)]; }
  const T& operator()(Point3 p) const { return data_[dims_.index(p)]; }
  T& operator()(int x, int y, int z) { return (*this)(Point3{x, y, z}); }
  const T& operator()(int x, int y, int z) const { return (*this)(Point3{x, y, z}); }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  const std::vector<T>& values() const { return data_; }

  friend bool operator==(const Volume&, const Volume&) = default;

 private:
  static std::size_t checked_size(Dims dims) {
    if (!dims.valid()) throw InvalidArgument("volume dims must be positive, got " + to_string(dims));
    return dims.voxel_count();
  }

  Dims dims_;
  std::vector<T> data_;
};

struct GrayTag;
struct LabelTag;
struct FieldTag;
struct MaskTag;

/// EM intensity proxy, one byte per voxel.
using GrayVolume = Volume<std::uint8_t, GrayTag>;
/// Segment ids; 0 means ignored/unassigned.
using LabelVolume = Volume<BodyId, LabelTag>;
/// Real-valued per-voxel score.
using ScalarField = Volume<double, FieldTag>;
/// Binary voxel mask (0 or 1).
using Mask = Volume<std::uint8_t, MaskTag>;

std::size_t count_set(const Mask& mask);

/// Axis-aligned box, `lo` inclusive and `hi` exclusive.
struct Box {
  Point3 lo;
  Point3 hi;

  /// Cube of half-width `radius` around `center`, clipped to `dims`.
  static Box around(Point3 center, int radius, Dims dims);
  bool empty() const { return lo.x >= hi.x || lo.y >= hi.y || lo.z >= hi.z; }
};

// ---------------------------------------------------------------------------
// Filtering and morphology
// ---------------------------------------------------------------------------

/// Normalized 1-D Gaussian taps, truncated at ceil(3 sigma) on each side.
std::vector<double> gaussian_kernel(double sigma);

/// Separable Gaussian smoothing with edge replication. `threads` only splits
/// the work; the result is identical for every thread count.
ScalarField gaussian_smooth(const ScalarField& field, double sigma, int threads = 1);

/// All integer offsets with squared norm <= radius^2, ordered by (dz, dy, dx).
std::vector<Point3> ball_mask(double radius);

/// Voxels within `radius` of any voxel labelled `body`.
Mask dilate_segment(const LabelVolume& labels, BodyId body, double radius);

/// Nonzero labels found within `radius` of `center`, ascending.
std::vector<BodyId> bodies_in_sphere(const LabelVolume& labels, Point3 center, double radius);

/// Brightest voxel within `radius` of `center`. Ties go to the smallest
/// (z, y, x) position.
Point3 brightest_in_ball(const GrayVolume& gray, Point3 center, double radius);

struct VoxelPair {
  Point3 first;   // the lower linear index
  Point3 second;
  friend bool operator==(const VoxelPair&, const VoxelPair&) = default;
};

/// Every 6-adjacent voxel pair whose two labels differ and are both nonzero.
/// Each unordered pair appears once, in linear-index order of `first`.
std::vector<VoxelPair> boundary_voxel_pairs(const LabelVolume& labels);

}  // namespace synapse
