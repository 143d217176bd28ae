#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "subdiv/box.hpp"
#include "subdiv/cover_index.hpp"
#include "subdiv/integrator.hpp"
#include "subdiv/systems.hpp"

namespace subdiv {

struct TransitionInfo {
  bool continuous = false;
  unsigned samples_per_axis = 1;
  double subdiameter = 0.0;  // varrho_n = rho_n / M
  double h = 0.0;            // 0 for discrete maps
  unsigned substeps = 0;     // 0 for discrete maps
};

// Multivalued index map phi_n on a cover level. Stored through its
// generators: for every source box the images of its M^d sample centers
// and a common radius. j is a target of i iff some image lies within
// max-norm distance `radius` of box j (closed boxes, so shared faces count).
// Target sets are materialized on demand through the cover index.
class TransitionMap {
 public:
  TransitionMap(std::shared_ptr<const CoverLevel> level, std::vector<double> images,
                std::size_t images_per_box, double radius, TransitionInfo info);

  const CoverLevel& level() const { return index_.level(); }
  std::shared_ptr<const CoverLevel> level_ptr() const { return index_.level_ptr(); }
  const CoverIndex& index() const { return index_; }
  const TransitionInfo& info() const { return info_; }
  double radius() const { return radius_; }
  std::size_t images_per_box() const { return per_box_; }
  std::span<const double> image(std::size_t src, std::size_t l) const;

  bool has_edge(std::size_t src, std::size_t tgt) const;
  // Ascending target positions of src.
  std::vector<std::size_t> targets(std::size_t src) const;
  std::size_t out_degree(std::size_t src) const;
  std::size_t edge_count(unsigned threads = 1) const;

  // Whether p lies within `slack` of the union of src's target boxes.
  bool image_union_near(std::size_t src, std::span<const double> p, double slack = 0.0) const;

  // Some alive target of src, or CoverLevel::npos.
  std::size_t find_alive_target(std::size_t src, const AliveSet& alive) const;

  // Drops one edge. Used for map surgery (mutation testing); the predicate
  // definition is otherwise untouched.
  void remove_edge(std::size_t src, std::size_t tgt);

 private:
  bool removed(std::size_t src, std::size_t tgt) const;

  CoverIndex index_;
  std::vector<double> images_;
  std::size_t per_box_;
  double radius_;
  TransitionInfo info_;
  std::vector<std::pair<std::size_t, std::size_t>> removed_;
};

// j in phi(i) iff min_l dist(f^-1(z_l), D_j) <= L varrho.
TransitionMap build_transition_discrete(std::shared_ptr<const CoverLevel> level,
                                        const DiscreteSystem& sys, unsigned samples_per_axis,
                                        unsigned threads = 1);

// j in phi(i) iff min_l dist(phi_E(-h, z_l), D_j) <= r_n. Requires
// P h <= margin of Q inside the validity region.
TransitionMap build_transition_continuous(std::shared_ptr<const CoverLevel> level,
                                          const ContinuousSystem& sys, unsigned samples_per_axis,
                                          const EulerParams& euler, unsigned threads = 1);

// Throws ConfigError when a backward Euler trajectory of length h started in
// the root box could leave the system's validity region.
void check_margin(const ContinuousSystem& sys, const Box& Q, double h);

struct ContainmentViolation {
  std::uint64_t source = 0;  // flat index
  Point witness;             // sampled point of the source box
  Point image;               // its (reference) preimage
};

struct GapReport {
  std::vector<ContainmentViolation> containment_violations;
  std::size_t containment_samples = 0;
  double overapprox_gap = 0.0;
  double neighbor_gap = 0.0;
  double defect_gap = 0.0;
  // Analytic upper bounds for the gaps above at this level.
  double overapprox_bound = 0.0;
  double neighbor_bound = 0.0;
  double defect_bound = 0.0;
  // Sampling error of the estimates: each measured gap lies within
  // [true - sampling_low, true + sampling_high].
  double sampling_low = 0.0;
  double sampling_high = 0.0;
};

// overapprox_gap for discrete maps, neighbor_gap + defect_gap for flows.
double total_gap(const GapReport& g);

// Every measured gap is at most its analytic bound.
bool gaps_within_bounds(const GapReport& g, double slack = 1e-12);

// False only when the measurements prove that the true total gap grew from
// `previous` to `next`.
bool gap_not_larger(const GapReport& previous, const GapReport& next, double slack = 1e-12);

// Tolerance used to absorb the reference integrator error in continuous
// containment checks.
inline constexpr double kReferenceTolerance = 1e-10;

// Samples points x of every source box, maps them by f^-1 (or by the
// reference backward flow over h) and reports images that land in the
// covered region but outside the union of target boxes.
GapReport check_containment_condition(const TransitionMap& map, const System& sys,
                                      std::size_t samples, std::uint64_t seed,
                                      unsigned threads = 1);

// Sampled estimates of the convergence gaps together with their analytic
// bounds: dist(U_{j in phi(i)} D_j, f^-1(D_i)) for discrete maps; the
// neighbor distance dist(D_j, D_i) and the difference-quotient defect
// |h^-1 (x - z) + g(z)| for continuous maps.
GapReport measure_overapprox_gap(const TransitionMap& map, const System& sys,
                                 unsigned samples_per_axis = 4, unsigned threads = 1);

}  // namespace subdiv
