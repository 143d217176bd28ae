#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "subdiv/attractor.hpp"
#include "subdiv/box.hpp"
#include "subdiv/systems.hpp"

namespace subdiv {

// Grid points whose finite backward history stays in Q. Over-selects
// slightly because the horizon is finite; oracle grade only.
struct ReferenceAttractor {
  std::vector<Point> points;
  double resolution = 0.0;
  double horizon = 0.0;  // iterations K (discrete) or time T (continuous)
};

struct OracleOptions {
  unsigned iterations = 40;     // K
  double time_horizon = 10.0;   // T
  double check_interval = 0.1;  // spacing of the sampled times t <= T
  double tolerance = 1e-10;
  unsigned threads = 1;
};

// Uniform grid over Q with round(side / resolution) cells per axis
// (endpoints included).
std::vector<Point> uniform_grid(const Box& Q, double resolution);

ReferenceAttractor reference_attractor_points(const System& sys, const Box& Q, double resolution,
                                              const OracleOptions& options = {});

// Long forward orbit after a transient, for systems without a closed-form
// relative attractor (the attractor it samples lies inside A_Q when it lies
// inside Q).
ReferenceAttractor forward_orbit_points(const DiscreteSystem& sys, const Point& start,
                                        std::size_t transient, std::size_t count);

// Nodes from which a cycle is reachable, by repeated removal of nodes
// without remaining successors until nothing changes. Targets that are not
// keys of `edges` are ignored.
std::set<std::uint64_t> reach_cycle_set(const std::map<std::uint64_t, std::vector<std::uint64_t>>& edges);

struct SandwichVerdict {
  bool reference_covered = true;
  bool subset_of_global = true;
  std::vector<Point> uncovered_points;      // witnesses for the lower inclusion
  std::vector<std::uint64_t> extra_keys;    // subdivision keys missing from the global result
  bool pass() const { return reference_covered && subset_of_global; }
};

// Checks reference points in U J_n and J_n within the global kept set.
// Throws std::invalid_argument when the two results were computed with
// different levels or parameters.
SandwichVerdict verify_sandwich(const LevelResult& subdivision, const LevelResult& global,
                                const ReferenceAttractor& reference);

// Points not contained in any box of `cover`.
std::vector<Point> uncovered_points(const CoverLevel& cover, const std::vector<Point>& points);

std::string to_csv(const ReferenceAttractor& reference);

}  // namespace subdiv
