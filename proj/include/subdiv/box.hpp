#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace subdiv {

using Point = std::vector<double>;

// Axis-aligned closed box [lo, hi] with lo[k] < hi[k] on every axis.
// All metric quantities use the max-norm.
class Box {
 public:
  Box(Point lo, Point hi);

  std::size_t dim() const { return lo_.size(); }
  const Point& lo() const { return lo_; }
  const Point& hi() const { return hi_; }
  double lo(std::size_t k) const { return lo_[k]; }
  double hi(std::size_t k) const { return hi_[k]; }
  double side(std::size_t k) const { return hi_[k] - lo_[k]; }

  double diameter() const;
  double volume() const;
  Point center() const;
  bool contains(std::span<const double> p) const;
  bool contains(const Box& other) const;

  friend bool operator==(const Box&, const Box&) = default;

 private:
  Point lo_;
  Point hi_;
};

// Largest depth n for which a dyadic key in `dim` dimensions fits a 64-bit
// flat index (n * dim <= 62).
unsigned max_key_depth(std::size_t dim);

// Names a box of the dyadic tree over a root box. The flat index is the
// Morton code sum_m path[m] * 2^(d (n-1-m)); bit k of a selector picks the
// upper half on axis k.
class BoxKey {
 public:
  BoxKey() = default;
  BoxKey(unsigned depth, std::uint64_t flat) : depth_(depth), flat_(flat) {}

  static BoxKey from_path(std::size_t dim, std::span<const unsigned> path);

  unsigned depth() const { return depth_; }
  std::uint64_t flat_index() const { return flat_; }

  std::vector<unsigned> path(std::size_t dim) const;
  BoxKey child(std::size_t dim, unsigned selector) const;
  BoxKey ancestor(std::size_t dim, unsigned depth) const;
  bool is_ancestor_of(std::size_t dim, const BoxKey& other) const;

  // Integer cell coordinate along each axis at this key's depth.
  std::vector<std::uint64_t> cell_coords(std::size_t dim) const;

  friend auto operator<=>(const BoxKey&, const BoxKey&) = default;

 private:
  unsigned depth_ = 0;
  std::uint64_t flat_ = 0;
};

// Lower face of cell `coord` on `axis` at `depth`. Computed as
// root.lo + ldexp(width * coord, -depth) so that nested cells are nested
// in floating point as well.
double cell_lower(const Box& root, std::size_t axis, std::uint64_t coord, unsigned depth);
double cell_upper(const Box& root, std::size_t axis, std::uint64_t coord, unsigned depth);

Box key_box(const Box& root, const BoxKey& key);

// Active boxes of one subdivision depth. Keys are stored as sorted, unique
// flat indices; all share `depth`.
class CoverLevel {
 public:
  CoverLevel(Box root, unsigned depth, std::vector<std::uint64_t> active);

  static CoverLevel root_level(Box root);
  static CoverLevel full(Box root, unsigned depth);

  const Box& root() const { return root_; }
  unsigned depth() const { return depth_; }
  std::size_t dim() const { return root_.dim(); }
  std::size_t size() const { return active_.size(); }
  bool empty() const { return active_.empty(); }
  const std::vector<std::uint64_t>& active() const { return active_; }

  BoxKey key(std::size_t pos) const { return {depth_, active_[pos]}; }
  Box box(std::size_t pos) const { return key_box(root_, key(pos)); }
  // Common diameter bound rho_n = diam(Q) 2^-n.
  double rho() const;

  // Position of a flat index in `active`, or npos.
  std::size_t find(std::uint64_t flat) const;
  bool contains(std::uint64_t flat) const { return find(flat) != npos; }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  Box root_;
  unsigned depth_;
  std::vector<std::uint64_t> active_;
};

struct SampleGrid {
  std::vector<Point> centers;
  double subdiameter = 0.0;
};

// 2^d children in selector order.
std::vector<Box> subdivide_box(const Box& b);

// Centers of the M^d commensurate subboxes (axis 0 varies fastest) and the
// subbox diameter diam(b)/M.
SampleGrid sample_centers(const Box& b, unsigned samples_per_axis);

double point_box_distance(std::span<const double> p, const Box& b);

// Children of every retained key. `retained` must be a subset of the
// level's active keys.
CoverLevel refine_cover(const CoverLevel& level, std::span<const std::uint64_t> retained);

struct SemidistanceBounds {
  double lower = 0.0;
  double upper = 0.0;
};

// Bounds on sup_{x in source} dist(x, target) from a grid of samples per
// box. `distance_to_target` must be 1-Lipschitz in the max-norm.
SemidistanceBounds semidistance_estimate(
    std::span<const Box> source,
    const std::function<double(std::span<const double>)>& distance_to_target,
    unsigned samples_per_axis = 8);

SemidistanceBounds semidistance_estimate(std::span<const Box> source,
                                         std::span<const Box> target,
                                         unsigned samples_per_axis = 8);

// Grid of samples_per_axis^d points spanning a box (corners included when
// samples_per_axis >= 2, the center otherwise).
std::vector<Point> box_grid(const Box& b, unsigned samples_per_axis);

double max_norm(std::span<const double> v);
double max_norm_distance(std::span<const double> a, std::span<const double> b);

}  // namespace subdiv
