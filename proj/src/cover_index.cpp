#include "subdiv/cover_index.hpp"

#include <algorithm>
#include <cmath>

namespace subdiv {

AliveSet::AliveSet(std::size_t n) : flags_(n, 1), tree_(n + 1, 0) {
  for (std::size_t i = 1; i <= n; ++i) {
    tree_[i] += 1;
    const std::size_t parent = i + (i & (~i + 1));
    if (parent <= n) tree_[parent] += tree_[i];
  }
}

void AliveSet::kill(std::size_t pos) {
  if (!flags_[pos]) return;
  flags_[pos] = 0;
  for (std::size_t i = pos + 1; i < tree_.size(); i += i & (~i + 1)) --tree_[i];
}

std::size_t AliveSet::prefix(std::size_t n) const {
  std::size_t s = 0;
  for (std::size_t i = n; i > 0; i -= i & (~i + 1)) s += tree_[i];
  return s;
}

std::size_t AliveSet::count(std::size_t first, std::size_t last) const {
  return first >= last ? 0 : prefix(last) - prefix(first);
}

CoverIndex::CoverIndex(std::shared_ptr<const CoverLevel> level) : level_(std::move(level)) {}

namespace {

void node_coords(std::uint64_t prefix, unsigned depth, std::size_t dim, std::uint64_t* coords) {
  for (std::size_t k = 0; k < dim; ++k) coords[k] = 0;
  for (unsigned m = 0; m < depth; ++m) {
    const std::uint64_t sel = (prefix >> (dim * (depth - 1 - m))) & ((std::uint64_t{1} << dim) - 1);
    for (std::size_t k = 0; k < dim; ++k) coords[k] = (coords[k] << 1) | ((sel >> k) & 1u);
  }
}

}  // namespace

double CoverIndex::node_distance(const Node& node, std::span<const double> p) const {
  const std::size_t d = level_->dim();
  std::uint64_t coords[64];
  node_coords(node.prefix, node.depth, d, coords);
  double dist = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    const double lo = cell_lower(level_->root(), k, coords[k], node.depth);
    const double hi = cell_upper(level_->root(), k, coords[k], node.depth);
    dist = std::max({dist, lo - p[k], p[k] - hi});
  }
  return dist;
}

double CoverIndex::node_far_distance(const Node& node, std::span<const double> p) const {
  const std::size_t d = level_->dim();
  std::uint64_t coords[64];
  node_coords(node.prefix, node.depth, d, coords);
  double dist = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    const double lo = cell_lower(level_->root(), k, coords[k], node.depth);
    const double hi = cell_upper(level_->root(), k, coords[k], node.depth);
    dist = std::max({dist, std::abs(p[k] - lo), std::abs(hi - p[k])});
  }
  return dist;
}

std::size_t CoverIndex::child_split(const Node& node, std::uint64_t child_prefix) const {
  const std::size_t d = level_->dim();
  const unsigned below = level_->depth() - (node.depth + 1);
  const std::uint64_t bound = child_prefix << (d * below);
  const auto& keys = level_->active();
  auto it = std::lower_bound(keys.begin() + static_cast<std::ptrdiff_t>(node.first),
                             keys.begin() + static_cast<std::ptrdiff_t>(node.last), bound);
  return static_cast<std::size_t>(it - keys.begin());
}

std::vector<std::size_t> CoverIndex::within(std::span<const double> center, double radius) const {
  std::vector<std::size_t> out;
  visit_ball(center, radius, [&](std::size_t pos) {
    out.push_back(pos);
    return true;
  });
  return out;
}

bool CoverIndex::covers(std::span<const double> p) const {
  bool found = false;
  visit_ball(p, 0.0, [&](std::size_t) {
    found = true;
    return false;
  });
  return found;
}

std::size_t CoverIndex::count_union(std::span<const double> centers, double radius) const {
  if (level_->empty()) return 0;
  return count_walk(Node{0, 0, 0, level_->size()}, centers, radius);
}

std::size_t CoverIndex::count_walk(const Node& node, std::span<const double> centers,
                                   double radius) const {
  if (node.first == node.last) return 0;
  const std::size_t d = level_->dim();
  const std::size_t n_balls = centers.size() / d;
  bool meets = false;
  for (std::size_t b = 0; b < n_balls; ++b) {
    auto c = centers.subspan(b * d, d);
    if (node_distance(node, c) <= radius) {
      meets = true;
      if (node_far_distance(node, c) <= radius) return node.last - node.first;
    }
  }
  if (!meets) return 0;
  if (node.depth == level_->depth()) return 1;
  std::size_t total = 0;
  std::size_t first = node.first;
  for (std::uint64_t s = 0; s < (std::uint64_t{1} << d); ++s) {
    const std::uint64_t child_prefix = (node.prefix << d) | s;
    const std::size_t last = child_split(node, child_prefix + 1);
    total += count_walk(Node{node.depth + 1, child_prefix, first, last}, centers, radius);
    first = last;
  }
  return total;
}

}  // namespace subdiv
