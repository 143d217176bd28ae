#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "subdiv/box.hpp"
#include "subdiv/systems.hpp"
#include "subdiv/transition.hpp"

namespace subdiv {

struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PruneResult {
  std::vector<std::uint64_t> kept;     // ascending
  std::vector<std::uint64_t> removed;  // ascending
  std::size_t rounds = 0;              // removal generations
};

// Finite directed graph over sorted node ids with successor lists given as
// positions. Edges leaving the node set are dropped on construction.
struct IndexGraph {
  std::vector<std::uint64_t> nodes;
  std::vector<std::vector<std::size_t>> successors;

  static IndexGraph from_edges(const std::map<std::uint64_t, std::vector<std::uint64_t>>& edges);
  static IndexGraph from_edges(std::span<const std::uint64_t> indices,
                               const std::map<std::uint64_t, std::vector<std::uint64_t>>& edges);
};

IndexGraph to_graph(const TransitionMap& map);

// Greatest subset S with phi(i) & S nonempty for all i in S. Every node
// counts its surviving successors; a node whose count drops to zero joins
// the removal worklist and decrements its predecessors in turn. With a
// shuffle seed the worklist is drained in random order (the result does not
// change).
PruneResult prune(const IndexGraph& graph, std::optional<std::uint64_t> shuffle_seed = {});

// Same fixed point on a geometric transition map without materializing its
// edges: every node holds one surviving successor as witness and searches
// for a new one through the cover index when the witness is removed.
PruneResult prune(const TransitionMap& map, std::optional<std::uint64_t> shuffle_seed = {});

struct SchemeParams {
  unsigned samples_per_axis = 1;  // M
  unsigned euler_substeps = 1;    // N
  double h0 = 0.1;
  double h_decay = 0.5;  // alpha in h_n = h0 2^(-alpha n)
  unsigned threads = 1;
  std::size_t box_budget = std::size_t{1} << 22;
  bool diagnostics = false;
  std::size_t diagnostic_samples = 100;
  unsigned gap_samples_per_axis = 4;
  std::uint64_t seed = 0;
};

double step_size(const SchemeParams& params, unsigned depth);
void validate(const SchemeParams& params, const System& sys, const Box& Q);

struct LevelReport {
  unsigned depth = 0;
  double rho = 0.0;
  double h = 0.0;  // 0 for discrete systems
  double r = 0.0;  // enclosure radius, 0 for discrete systems
  std::size_t boxes_in = 0;
  std::size_t boxes_kept = 0;
  std::size_t edges = 0;
  double map_ms = 0.0;
  double prune_ms = 0.0;
  std::optional<GapReport> gaps;
};

struct LevelResult {
  std::shared_ptr<const CoverLevel> cover;  // boxes the map was built on
  TransitionInfo info;
  PruneResult prune;
  LevelReport report;

  CoverLevel kept_level() const { return {cover->root(), cover->depth(), prune.kept}; }
  std::vector<Box> kept_boxes() const;
};

TransitionMap build_transition(std::shared_ptr<const CoverLevel> level, const System& sys,
                               const SchemeParams& params);

// Builds phi on `level`, prunes it and fills the report (plus diagnostics
// when requested).
LevelResult run_level(std::shared_ptr<const CoverLevel> level, const System& sys,
                      const SchemeParams& params);

// Full cover of Q at `depth`; throws BudgetError when 2^(nd) exceeds the
// box budget.
LevelResult run_global(const System& sys, const Box& Q, unsigned depth, const SchemeParams& params);

// All depth-`depth` descendants of the boxes of `region`, i.e. the global
// scheme on the covered subregion.
LevelResult run_global_on(const System& sys, const CoverLevel& region, unsigned depth,
                          const SchemeParams& params);

enum class RunStatus { completed, interrupted, budget_exceeded, empty_attractor };

const char* to_string(RunStatus status);

struct SubdivisionRun {
  std::vector<LevelResult> levels;
  RunStatus status = RunStatus::completed;
};

struct RunHooks {
  std::function<void(const LevelResult&)> on_level;
  const std::atomic<bool>* interrupt = nullptr;
};

// Kept keys of a finished level to restart from.
struct ResumePoint {
  unsigned depth = 0;
  std::vector<std::uint64_t> kept;
};

// Subdivision loop: prune the map of the current cover, report, refine the
// kept boxes, repeat until max_depth. Levels are passed to on_level as soon
// as they are complete.
SubdivisionRun run_subdivision(const System& sys, const Box& Q, unsigned max_depth,
                               const SchemeParams& params, const RunHooks& hooks = {},
                               const std::optional<ResumePoint>& resume = {});

}  // namespace subdiv
