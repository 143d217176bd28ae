#include "subdiv/attractor.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <random>

namespace subdiv {

IndexGraph IndexGraph::from_edges(const std::map<std::uint64_t, std::vector<std::uint64_t>>& edges) {
  std::vector<std::uint64_t> nodes;
  nodes.reserve(edges.size());
  for (const auto& [node, _] : edges) nodes.push_back(node);
  return from_edges(nodes, edges);
}

IndexGraph IndexGraph::from_edges(std::span<const std::uint64_t> indices,
                                  const std::map<std::uint64_t, std::vector<std::uint64_t>>& edges) {
  IndexGraph g;
  g.nodes.assign(indices.begin(), indices.end());
  std::sort(g.nodes.begin(), g.nodes.end());
  g.nodes.erase(std::unique(g.nodes.begin(), g.nodes.end()), g.nodes.end());
  g.successors.resize(g.nodes.size());
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    auto it = edges.find(g.nodes[i]);
    if (it == edges.end()) continue;
    auto& succ = g.successors[i];
    for (std::uint64_t t : it->second) {
      auto pos = std::lower_bound(g.nodes.begin(), g.nodes.end(), t);
      if (pos != g.nodes.end() && *pos == t) succ.push_back(static_cast<std::size_t>(pos - g.nodes.begin()));
    }
    std::sort(succ.begin(), succ.end());
    succ.erase(std::unique(succ.begin(), succ.end()), succ.end());
  }
  return g;
}

IndexGraph to_graph(const TransitionMap& map) {
  IndexGraph g;
  g.nodes = map.level().active();
  g.successors.resize(g.nodes.size());
  for (std::size_t i = 0; i < g.nodes.size(); ++i) g.successors[i] = map.targets(i);
  return g;
}

namespace {

// FIFO worklist, or uniformly random extraction when seeded.
class Worklist {
 public:
  explicit Worklist(std::optional<std::uint64_t> seed) {
    if (seed) rng_.emplace(*seed);
  }

  void push(std::size_t v) { items_.push_back(v); }
  bool empty() const { return items_.empty(); }

  std::size_t pop() {
    if (rng_) {
      std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
      std::swap(items_[pick(*rng_)], items_.front());
    }
    const std::size_t v = items_.front();
    items_.pop_front();
    return v;
  }

 private:
  std::deque<std::size_t> items_;
  std::optional<std::mt19937_64> rng_;
};

std::vector<std::size_t> visit_order(std::size_t n, std::optional<std::uint64_t> seed) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  if (seed) {
    std::mt19937_64 rng(*seed ^ 0x5bd1e995u);
    std::shuffle(order.begin(), order.end(), rng);
  }
  return order;
}

template <class IsAlive>
PruneResult collect(const std::vector<std::uint64_t>& nodes, IsAlive&& is_alive, std::size_t rounds) {
  PruneResult out;
  out.rounds = rounds;
  for (std::size_t i = 0; i < nodes.size(); ++i) (is_alive(i) ? out.kept : out.removed).push_back(nodes[i]);
  return out;
}

}  // namespace

PruneResult prune(const IndexGraph& graph, std::optional<std::uint64_t> shuffle_seed) {
  const std::size_t n = graph.nodes.size();
  std::vector<std::size_t> live_successors(n);
  std::vector<std::vector<std::size_t>> predecessors(n);
  for (std::size_t i = 0; i < n; ++i) {
    live_successors[i] = graph.successors[i].size();
    for (std::size_t j : graph.successors[i]) predecessors[j].push_back(i);
  }

  std::vector<char> alive(n, 1);
  std::vector<std::size_t> generation(n, 0);
  Worklist worklist(shuffle_seed);
  for (std::size_t i : visit_order(n, shuffle_seed)) {
    if (live_successors[i] == 0) {
      alive[i] = 0;
      generation[i] = 1;
      worklist.push(i);
    }
  }
  std::size_t rounds = 0;
  while (!worklist.empty()) {
    const std::size_t j = worklist.pop();
    rounds = std::max(rounds, generation[j]);
    for (std::size_t p : predecessors[j]) {
      if (alive[p] && --live_successors[p] == 0) {
        alive[p] = 0;
        generation[p] = generation[j] + 1;
        worklist.push(p);
      }
    }
  }
  return collect(graph.nodes, [&](std::size_t i) { return alive[i] != 0; }, rounds);
}

PruneResult prune(const TransitionMap& map, std::optional<std::uint64_t> shuffle_seed) {
  const std::size_t n = map.level().size();
  AliveSet alive(n);
  std::vector<std::vector<std::size_t>> watchers(n);
  std::vector<std::size_t> generation(n, 0);
  Worklist worklist(shuffle_seed);

  auto rehome = [&](std::size_t i, std::size_t cause_generation) {
    const std::size_t w = map.find_alive_target(i, alive);
    if (w == CoverLevel::npos) {
      alive.kill(i);
      generation[i] = cause_generation + 1;
      worklist.push(i);
    } else {
      watchers[w].push_back(i);
    }
  };

  for (std::size_t i : visit_order(n, shuffle_seed)) {
    if (alive.alive(i)) rehome(i, 0);
  }
  std::size_t rounds = 0;
  while (!worklist.empty()) {
    const std::size_t j = worklist.pop();
    rounds = std::max(rounds, generation[j]);
    std::vector<std::size_t> orphans = std::move(watchers[j]);
    watchers[j].clear();
    for (std::size_t i : orphans) {
      if (alive.alive(i)) rehome(i, generation[j]);
    }
  }
  return collect(map.level().active(), [&](std::size_t i) { return alive.alive(i); }, rounds);
}

double step_size(const SchemeParams& params, unsigned depth) {
  return params.h0 * std::exp2(-params.h_decay * depth);
}

void validate(const SchemeParams& params, const System& sys, const Box& Q) {
  if (params.samples_per_axis == 0) throw ConfigError("samples per axis must be at least 1");
  if (Q.dim() != validity_region(sys).dim()) throw ConfigError("Q and system dimensions differ");
  if (const auto* cs = std::get_if<ContinuousSystem>(&sys)) {
    if (params.euler_substeps == 0) throw ConfigError("Euler substeps must be at least 1");
    if (!(params.h0 > 0.0) || !std::isfinite(params.h0)) throw ConfigError("h0 must be positive");
    if (!(params.h_decay > 0.0 && params.h_decay < 1.0)) throw ConfigError("h-decay must lie in (0, 1)");
    check_margin(*cs, Q, params.h0);
  } else if (!validity_region(sys).contains(Q)) {
    throw ConfigError("Q leaves the validity region of " + system_name(sys));
  }
}

std::vector<Box> LevelResult::kept_boxes() const {
  std::vector<Box> out;
  out.reserve(prune.kept.size());
  for (std::uint64_t k : prune.kept) out.push_back(key_box(cover->root(), BoxKey(cover->depth(), k)));
  return out;
}

TransitionMap build_transition(std::shared_ptr<const CoverLevel> level, const System& sys,
                               const SchemeParams& params) {
  if (const auto* ds = std::get_if<DiscreteSystem>(&sys)) {
    return build_transition_discrete(std::move(level), *ds, params.samples_per_axis, params.threads);
  }
  const EulerParams euler(step_size(params, level->depth()), params.euler_substeps);
  return build_transition_continuous(std::move(level), std::get<ContinuousSystem>(sys),
                                     params.samples_per_axis, euler, params.threads);
}

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

}  // namespace

LevelResult run_level(std::shared_ptr<const CoverLevel> level, const System& sys,
                      const SchemeParams& params) {
  LevelResult out;
  out.cover = level;
  auto t0 = std::chrono::steady_clock::now();
  TransitionMap map = build_transition(level, sys, params);
  out.report.edges = map.edge_count(params.threads);
  out.report.map_ms = elapsed_ms(t0);

  t0 = std::chrono::steady_clock::now();
  out.prune = prune(map);
  out.report.prune_ms = elapsed_ms(t0);

  out.info = map.info();
  out.report.depth = level->depth();
  out.report.rho = level->rho();
  out.report.h = map.info().h;
  out.report.r = map.info().continuous ? map.radius() : 0.0;
  out.report.boxes_in = level->size();
  out.report.boxes_kept = out.prune.kept.size();

  if (params.diagnostics) {
    GapReport gaps = measure_overapprox_gap(map, sys, params.gap_samples_per_axis, params.threads);
    GapReport containment =
        check_containment_condition(map, sys, params.diagnostic_samples, params.seed, params.threads);
    gaps.containment_violations = std::move(containment.containment_violations);
    gaps.containment_samples = containment.containment_samples;
    out.report.gaps = std::move(gaps);
  }
  return out;
}

LevelResult run_global(const System& sys, const Box& Q, unsigned depth, const SchemeParams& params) {
  return run_global_on(sys, CoverLevel::root_level(Q), depth, params);
}

LevelResult run_global_on(const System& sys, const CoverLevel& region, unsigned depth,
                          const SchemeParams& params) {
  validate(params, sys, region.root());
  if (depth < region.depth()) throw std::invalid_argument("global depth above the region's depth");
  if (depth > max_key_depth(region.dim())) throw BudgetError("depth exceeds key capacity");
  const std::size_t shift = region.dim() * (depth - region.depth());
  if (shift >= 63 || (region.size() << shift) > params.box_budget || (region.size() << shift) >> shift != region.size()) {
    throw BudgetError("global cover at depth " + std::to_string(depth) + " exceeds the box budget");
  }
  std::vector<std::uint64_t> keys;
  keys.reserve(region.size() << shift);
  for (std::uint64_t k : region.active()) {
    for (std::uint64_t c = 0; c < (std::uint64_t{1} << shift); ++c) keys.push_back((k << shift) | c);
  }
  auto level = std::make_shared<const CoverLevel>(region.root(), depth, std::move(keys));
  return run_level(level, sys, params);
}

const char* to_string(RunStatus status) {
  switch (status) {
    case RunStatus::completed: return "completed";
    case RunStatus::interrupted: return "interrupted";
    case RunStatus::budget_exceeded: return "budget_exceeded";
    case RunStatus::empty_attractor: return "empty_attractor";
  }
  return "unknown";
}

SubdivisionRun run_subdivision(const System& sys, const Box& Q, unsigned max_depth,
                               const SchemeParams& params, const RunHooks& hooks,
                               const std::optional<ResumePoint>& resume) {
  validate(params, sys, Q);
  if (max_depth > max_key_depth(Q.dim())) {
    throw ConfigError("max depth " + std::to_string(max_depth) + " exceeds key capacity " +
                      std::to_string(max_key_depth(Q.dim())));
  }

  SubdivisionRun run;
  std::shared_ptr<const CoverLevel> cover;
  if (resume) {
    if (resume->depth >= max_depth) return run;
    CoverLevel finished(Q, resume->depth, resume->kept);
    if (finished.empty()) {
      run.status = RunStatus::empty_attractor;
      return run;
    }
    cover = std::make_shared<const CoverLevel>(refine_cover(finished, finished.active()));
  } else {
    cover = std::make_shared<const CoverLevel>(CoverLevel::root_level(Q));
  }

  while (true) {
    if (hooks.interrupt && hooks.interrupt->load()) {
      run.status = RunStatus::interrupted;
      return run;
    }
    if (cover->size() > params.box_budget) {
      run.status = RunStatus::budget_exceeded;
      return run;
    }
    run.levels.push_back(run_level(cover, sys, params));
    const LevelResult& level = run.levels.back();
    if (hooks.on_level) hooks.on_level(level);
    if (level.prune.kept.empty()) {
      run.status = RunStatus::empty_attractor;
      return run;
    }
    if (cover->depth() >= max_depth) return run;
    cover = std::make_shared<const CoverLevel>(refine_cover(*cover, level.prune.kept));
  }
}

}  // namespace subdiv
