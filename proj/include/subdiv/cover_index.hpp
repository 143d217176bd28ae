#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "subdiv/box.hpp"

namespace subdiv {

// Membership flags over the positions of a CoverLevel with O(log n) range
// counts (Fenwick tree).
class AliveSet {
 public:
  explicit AliveSet(std::size_t n);

  std::size_t size() const { return flags_.size(); }
  bool alive(std::size_t pos) const { return flags_[pos] != 0; }
  void kill(std::size_t pos);
  // Number of alive positions in [first, last).
  std::size_t count(std::size_t first, std::size_t last) const;

 private:
  std::size_t prefix(std::size_t n) const;

  std::vector<char> flags_;
  std::vector<std::size_t> tree_;
};

// Ball queries over the active boxes of a level. The dyadic tree is never
// stored: a subtree at depth m with prefix p owns the contiguous flat index
// range [p 2^(d(n-m)), (p+1) 2^(d(n-m))) of the sorted active keys.
class CoverIndex {
 public:
  explicit CoverIndex(std::shared_ptr<const CoverLevel> level);

  const CoverLevel& level() const { return *level_; }
  std::shared_ptr<const CoverLevel> level_ptr() const { return level_; }

  // Visits, in ascending order, the positions of boxes b with
  // point_box_distance(center, b) <= radius. The visitor returns false to
  // stop the walk. Subtrees without alive members are skipped when `alive`
  // is given.
  template <class Visitor>
  void visit_ball(std::span<const double> center, double radius, Visitor&& visit,
                  const AliveSet* alive = nullptr) const;

  std::vector<std::size_t> within(std::span<const double> center, double radius) const;
  // Positions of the boxes that contain p (several on shared faces).
  std::vector<std::size_t> locate(std::span<const double> p) const { return within(p, 0.0); }
  bool covers(std::span<const double> p) const;

  // Number of boxes meeting at least one of the balls (centers laid out
  // contiguously, `dim` doubles each).
  std::size_t count_union(std::span<const double> centers, double radius) const;

 private:
  struct Node {
    unsigned depth;
    std::uint64_t prefix;
    std::size_t first;
    std::size_t last;
  };

  double node_distance(const Node& node, std::span<const double> p) const;
  // Max-norm distance from p to the farthest point of the node box.
  double node_far_distance(const Node& node, std::span<const double> p) const;
  std::size_t child_split(const Node& node, std::uint64_t child_prefix) const;

  template <class Visitor>
  bool walk(const Node& node, std::span<const double> center, double radius, Visitor& visit,
            const AliveSet* alive) const;

  std::size_t count_walk(const Node& node, std::span<const double> centers, double radius) const;

  std::shared_ptr<const CoverLevel> level_;
};

template <class Visitor>
void CoverIndex::visit_ball(std::span<const double> center, double radius, Visitor&& visit,
                            const AliveSet* alive) const {
  if (level_->empty()) return;
  Node root{0, 0, 0, level_->size()};
  walk(root, center, radius, visit, alive);
}

template <class Visitor>
bool CoverIndex::walk(const Node& node, std::span<const double> center, double radius,
                      Visitor& visit, const AliveSet* alive) const {
  if (node.first == node.last) return true;
  if (alive && alive->count(node.first, node.last) == 0) return true;
  if (node_distance(node, center) > radius) return true;
  if (node.depth == level_->depth()) {
    if (alive && !alive->alive(node.first)) return true;
    return visit(node.first);
  }
  const std::size_t d = level_->dim();
  std::size_t first = node.first;
  for (std::uint64_t s = 0; s < (std::uint64_t{1} << d); ++s) {
    const std::uint64_t child_prefix = (node.prefix << d) | s;
    const std::size_t last = child_split(node, child_prefix + 1);
    Node child{node.depth + 1, child_prefix, first, last};
    if (!walk(child, center, radius, visit, alive)) return false;
    first = last;
  }
  return true;
}

}  // namespace subdiv
