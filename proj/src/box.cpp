#include "subdiv/box.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace subdiv {

Box::Box(Point lo, Point hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
  if (lo_.empty() || lo_.size() != hi_.size()) {
    throw std::invalid_argument("box corners must be nonempty and of equal dimension");
  }
  for (std::size_t k = 0; k < lo_.size(); ++k) {
    if (!std::isfinite(lo_[k]) || !std::isfinite(hi_[k]) || !(lo_[k] < hi_[k])) {
      throw std::invalid_argument("degenerate box on axis " + std::to_string(k));
    }
  }
}

double Box::diameter() const {
  double d = 0.0;
  for (std::size_t k = 0; k < dim(); ++k) d = std::max(d, side(k));
  return d;
}

double Box::volume() const {
  double v = 1.0;
  for (std::size_t k = 0; k < dim(); ++k) v *= side(k);
  return v;
}

Point Box::center() const {
  Point c(dim());
  for (std::size_t k = 0; k < dim(); ++k) c[k] = 0.5 * (lo_[k] + hi_[k]);
  return c;
}

bool Box::contains(std::span<const double> p) const {
  for (std::size_t k = 0; k < dim(); ++k) {
    if (p[k] < lo_[k] || p[k] > hi_[k]) return false;
  }
  return true;
}

bool Box::contains(const Box& other) const {
  for (std::size_t k = 0; k < dim(); ++k) {
    if (other.lo_[k] < lo_[k] || other.hi_[k] > hi_[k]) return false;
  }
  return true;
}

unsigned max_key_depth(std::size_t dim) { return static_cast<unsigned>(62 / dim); }

BoxKey BoxKey::from_path(std::size_t dim, std::span<const unsigned> path) {
  if (path.size() > max_key_depth(dim)) throw std::invalid_argument("key path too deep");
  const unsigned fanout = 1u << dim;
  std::uint64_t flat = 0;
  for (unsigned s : path) {
    if (s >= fanout) throw std::invalid_argument("child selector out of range");
    flat = (flat << dim) | s;
  }
  return {static_cast<unsigned>(path.size()), flat};
}

std::vector<unsigned> BoxKey::path(std::size_t dim) const {
  std::vector<unsigned> out(depth_);
  const std::uint64_t mask = (std::uint64_t{1} << dim) - 1;
  for (unsigned m = 0; m < depth_; ++m) {
    out[m] = static_cast<unsigned>((flat_ >> (dim * (depth_ - 1 - m))) & mask);
  }
  return out;
}

BoxKey BoxKey::child(std::size_t dim, unsigned selector) const {
  if (depth_ + 1 > max_key_depth(dim)) throw std::invalid_argument("key depth limit reached");
  return {depth_ + 1, (flat_ << dim) | selector};
}

BoxKey BoxKey::ancestor(std::size_t dim, unsigned depth) const {
  if (depth > depth_) throw std::invalid_argument("ancestor deeper than key");
  return {depth, flat_ >> (dim * (depth_ - depth))};
}

bool BoxKey::is_ancestor_of(std::size_t dim, const BoxKey& other) const {
  return other.depth_ > depth_ && other.ancestor(dim, depth_) == *this;
}

std::vector<std::uint64_t> BoxKey::cell_coords(std::size_t dim) const {
  std::vector<std::uint64_t> c(dim, 0);
  for (unsigned m = 0; m < depth_; ++m) {
    const std::uint64_t sel = (flat_ >> (dim * (depth_ - 1 - m))) & ((std::uint64_t{1} << dim) - 1);
    for (std::size_t k = 0; k < dim; ++k) c[k] = (c[k] << 1) | ((sel >> k) & 1u);
  }
  return c;
}

double cell_lower(const Box& root, std::size_t axis, std::uint64_t coord, unsigned depth) {
  if (coord == 0) return root.lo(axis);
  return root.lo(axis) + std::ldexp(root.side(axis) * static_cast<double>(coord), -static_cast<int>(depth));
}

double cell_upper(const Box& root, std::size_t axis, std::uint64_t coord, unsigned depth) {
  if (coord + 1 == (std::uint64_t{1} << depth)) return root.hi(axis);
  return cell_lower(root, axis, coord + 1, depth);
}

Box key_box(const Box& root, const BoxKey& key) {
  const auto coords = key.cell_coords(root.dim());
  Point lo(root.dim()), hi(root.dim());
  for (std::size_t k = 0; k < root.dim(); ++k) {
    lo[k] = cell_lower(root, k, coords[k], key.depth());
    hi[k] = cell_upper(root, k, coords[k], key.depth());
  }
  return {std::move(lo), std::move(hi)};
}

CoverLevel::CoverLevel(Box root, unsigned depth, std::vector<std::uint64_t> active)
    : root_(std::move(root)), depth_(depth), active_(std::move(active)) {
  if (depth_ > max_key_depth(dim())) {
    throw std::invalid_argument("cover depth " + std::to_string(depth_) + " exceeds key capacity");
  }
  const std::uint64_t limit = std::uint64_t{1} << (dim() * depth_);
  for (std::size_t i = 0; i < active_.size(); ++i) {
    if (active_[i] >= limit) throw std::invalid_argument("flat index out of range for depth");
    if (i > 0 && active_[i - 1] >= active_[i]) {
      throw std::invalid_argument("active keys must be sorted and unique");
    }
  }
}

CoverLevel CoverLevel::root_level(Box root) { return {std::move(root), 0, {0}}; }

CoverLevel CoverLevel::full(Box root, unsigned depth) {
  if (depth > max_key_depth(root.dim())) throw std::invalid_argument("depth exceeds key capacity");
  std::vector<std::uint64_t> all(std::size_t{1} << (root.dim() * depth));
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return {std::move(root), depth, std::move(all)};
}

double CoverLevel::rho() const { return std::ldexp(root_.diameter(), -static_cast<int>(depth_)); }

std::size_t CoverLevel::find(std::uint64_t flat) const {
  auto it = std::lower_bound(active_.begin(), active_.end(), flat);
  if (it == active_.end() || *it != flat) return npos;
  return static_cast<std::size_t>(it - active_.begin());
}

std::vector<Box> subdivide_box(const Box& b) {
  const std::size_t d = b.dim();
  Point mid(d);
  for (std::size_t k = 0; k < d; ++k) mid[k] = 0.5 * (b.lo(k) + b.hi(k));
  std::vector<Box> children;
  children.reserve(std::size_t{1} << d);
  for (unsigned s = 0; s < (1u << d); ++s) {
    Point lo(d), hi(d);
    for (std::size_t k = 0; k < d; ++k) {
      const bool upper = (s >> k) & 1u;
      lo[k] = upper ? mid[k] : b.lo(k);
      hi[k] = upper ? b.hi(k) : mid[k];
    }
    children.emplace_back(std::move(lo), std::move(hi));
  }
  return children;
}

namespace {

// Visits every multi-index of an n^d grid, axis 0 fastest.
template <class F>
void for_each_grid_index(std::size_t dim, unsigned n, F&& f) {
  std::vector<unsigned> idx(dim, 0);
  while (true) {
    f(idx);
    std::size_t k = 0;
    while (k < dim && ++idx[k] == n) idx[k++] = 0;
    if (k == dim) break;
  }
}

}  // namespace

SampleGrid sample_centers(const Box& b, unsigned samples_per_axis) {
  if (samples_per_axis == 0) throw std::invalid_argument("samples per axis must be positive");
  const unsigned m = samples_per_axis;
  SampleGrid grid;
  grid.subdiameter = b.diameter() / m;
  for_each_grid_index(b.dim(), m, [&](const std::vector<unsigned>& idx) {
    Point c(b.dim());
    for (std::size_t k = 0; k < b.dim(); ++k) c[k] = b.lo(k) + (idx[k] + 0.5) * b.side(k) / m;
    grid.centers.push_back(std::move(c));
  });
  return grid;
}

std::vector<Point> box_grid(const Box& b, unsigned samples_per_axis) {
  if (samples_per_axis == 0) throw std::invalid_argument("samples per axis must be positive");
  if (samples_per_axis == 1) return {b.center()};
  const unsigned s = samples_per_axis;
  std::vector<Point> pts;
  for_each_grid_index(b.dim(), s, [&](const std::vector<unsigned>& idx) {
    Point p(b.dim());
    for (std::size_t k = 0; k < b.dim(); ++k) {
      p[k] = idx[k] + 1 == s ? b.hi(k) : b.lo(k) + idx[k] * b.side(k) / (s - 1);
    }
    pts.push_back(std::move(p));
  });
  return pts;
}

double point_box_distance(std::span<const double> p, const Box& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < b.dim(); ++k) {
    d = std::max({d, b.lo(k) - p[k], p[k] - b.hi(k)});
  }
  return d;
}

CoverLevel refine_cover(const CoverLevel& level, std::span<const std::uint64_t> retained) {
  const std::size_t d = level.dim();
  if (level.depth() + 1 > max_key_depth(d)) throw std::invalid_argument("refinement exceeds key capacity");
  std::vector<std::uint64_t> sorted(retained.begin(), retained.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<std::uint64_t> children;
  children.reserve(sorted.size() << d);
  for (std::uint64_t flat : sorted) {
    if (!level.contains(flat)) {
      throw std::invalid_argument("retained key " + std::to_string(flat) + " is not active");
    }
    for (std::uint64_t s = 0; s < (std::uint64_t{1} << d); ++s) children.push_back((flat << d) | s);
  }
  return {level.root(), level.depth() + 1, std::move(children)};
}

SemidistanceBounds semidistance_estimate(
    std::span<const Box> source,
    const std::function<double(std::span<const double>)>& distance_to_target,
    unsigned samples_per_axis) {
  if (source.empty()) throw std::invalid_argument("semidistance of an empty source set");
  if (samples_per_axis == 0) throw std::invalid_argument("samples per axis must be positive");
  SemidistanceBounds out;
  double spacing = 0.0;
  for (const Box& b : source) {
    spacing = std::max(spacing, b.diameter() / std::max(1u, samples_per_axis - 1));
    for (const Point& x : box_grid(b, samples_per_axis)) {
      out.lower = std::max(out.lower, distance_to_target(x));
    }
  }
  out.upper = out.lower + spacing;
  return out;
}

SemidistanceBounds semidistance_estimate(std::span<const Box> source,
                                         std::span<const Box> target,
                                         unsigned samples_per_axis) {
  if (target.empty()) throw std::invalid_argument("semidistance to an empty target set");
  return semidistance_estimate(
      source,
      [&](std::span<const double> x) {
        double best = std::numeric_limits<double>::infinity();
        for (const Box& t : target) best = std::min(best, point_box_distance(x, t));
        return best;
      },
      samples_per_axis);
}

double max_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double max_norm_distance(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

}  // namespace subdiv
