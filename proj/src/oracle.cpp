#include "subdiv/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

#include "subdiv/cover_index.hpp"
#include "subdiv/integrator.hpp"
#include "subdiv/parallel.hpp"

namespace subdiv {

std::vector<Point> uniform_grid(const Box& Q, double resolution) {
  if (!(resolution > 0.0)) throw std::invalid_argument("oracle resolution must be positive");
  const std::size_t d = Q.dim();
  std::vector<std::size_t> cells(d);
  for (std::size_t k = 0; k < d; ++k) {
    cells[k] = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(Q.side(k) / resolution)));
  }
  std::vector<Point> pts;
  std::vector<std::size_t> idx(d, 0);
  while (true) {
    Point p(d);
    for (std::size_t k = 0; k < d; ++k) {
      p[k] = idx[k] == cells[k] ? Q.hi(k) : Q.lo(k) + static_cast<double>(idx[k]) * Q.side(k) / cells[k];
    }
    pts.push_back(std::move(p));
    std::size_t k = 0;
    while (k < d && ++idx[k] > cells[k]) idx[k++] = 0;
    if (k == d) break;
  }
  return pts;
}

namespace {

bool inside_shrunk(const Box& Q, std::span<const double> p, double shrink) {
  for (std::size_t k = 0; k < Q.dim(); ++k) {
    if (p[k] < Q.lo(k) + shrink || p[k] > Q.hi(k) - shrink) return false;
  }
  return true;
}

bool backward_history_stays(const DiscreteSystem& sys, const Box& Q, Point x, unsigned iterations) {
  Point y(x.size());
  for (unsigned k = 0; k < iterations; ++k) {
    sys.inverse(x, y);
    for (double v : y) {
      if (!std::isfinite(v)) return false;
    }
    if (!Q.contains(y)) return false;
    std::swap(x, y);
  }
  return true;
}

bool backward_history_stays(const ContinuousSystem& sys, const Box& Q, Point x,
                            const OracleOptions& options) {
  const auto intervals = static_cast<std::size_t>(std::ceil(options.time_horizon / options.check_interval));
  double t = 0.0;
  for (std::size_t i = 0; i < intervals; ++i) {
    const double dt = std::min(options.check_interval, options.time_horizon - t);
    if (dt <= 0.0) break;
    try {
      x = reference_backward_flow(sys, x, dt, options.tolerance);
    } catch (const EvaluationError&) {
      return false;
    }
    t += dt;
    if (!inside_shrunk(Q, x, options.tolerance * static_cast<double>(i + 1))) return false;
  }
  return true;
}

}  // namespace

ReferenceAttractor reference_attractor_points(const System& sys, const Box& Q, double resolution,
                                              const OracleOptions& options) {
  const std::vector<Point> grid = uniform_grid(Q, resolution);
  std::vector<char> keep(grid.size(), 0);
  ReferenceAttractor out;
  out.resolution = resolution;
  if (const auto* ds = std::get_if<DiscreteSystem>(&sys)) {
    out.horizon = options.iterations;
    parallel_for(grid.size(), options.threads, [&](std::size_t i) {
      keep[i] = backward_history_stays(*ds, Q, grid[i], options.iterations);
    });
  } else {
    const auto& cs = std::get<ContinuousSystem>(sys);
    out.horizon = options.time_horizon;
    parallel_for(grid.size(), options.threads, [&](std::size_t i) {
      keep[i] = backward_history_stays(cs, Q, grid[i], options);
    });
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (keep[i]) out.points.push_back(grid[i]);
  }
  return out;
}

ReferenceAttractor forward_orbit_points(const DiscreteSystem& sys, const Point& start,
                                        std::size_t transient, std::size_t count) {
  ReferenceAttractor out;
  out.horizon = static_cast<double>(transient);
  Point x = start;
  for (std::size_t i = 0; i < transient; ++i) x = eval_forward(sys, x);
  out.points.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    x = eval_forward(sys, x);
    out.points.push_back(x);
  }
  return out;
}

std::set<std::uint64_t> reach_cycle_set(const std::map<std::uint64_t, std::vector<std::uint64_t>>& edges) {
  std::set<std::uint64_t> alive;
  for (const auto& [node, _] : edges) alive.insert(node);
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto it = alive.begin(); it != alive.end();) {
      const auto& succ = edges.at(*it);
      const bool has_successor =
          std::any_of(succ.begin(), succ.end(), [&](std::uint64_t t) { return alive.count(t) != 0; });
      if (!has_successor) {
        it = alive.erase(it);
        changed = true;
      } else {
        ++it;
      }
    }
  }
  return alive;
}

std::vector<Point> uncovered_points(const CoverLevel& cover, const std::vector<Point>& points) {
  CoverIndex index(std::make_shared<const CoverLevel>(cover));
  std::vector<Point> missing;
  for (const Point& p : points) {
    if (!index.covers(p)) missing.push_back(p);
  }
  return missing;
}

SandwichVerdict verify_sandwich(const LevelResult& subdivision, const LevelResult& global,
                                const ReferenceAttractor& reference) {
  const CoverLevel& a = *subdivision.cover;
  const CoverLevel& b = *global.cover;
  const TransitionInfo& ia = subdivision.info;
  const TransitionInfo& ib = global.info;
  if (a.depth() != b.depth() || !(a.root() == b.root()) || ia.continuous != ib.continuous ||
      ia.samples_per_axis != ib.samples_per_axis || ia.h != ib.h || ia.substeps != ib.substeps) {
    throw std::invalid_argument("sandwich check needs results of the same depth and parameters");
  }
  SandwichVerdict verdict;
  verdict.uncovered_points = uncovered_points(subdivision.kept_level(), reference.points);
  verdict.reference_covered = verdict.uncovered_points.empty();
  std::set_difference(subdivision.prune.kept.begin(), subdivision.prune.kept.end(),
                      global.prune.kept.begin(), global.prune.kept.end(),
                      std::back_inserter(verdict.extra_keys));
  verdict.subset_of_global = verdict.extra_keys.empty();
  return verdict;
}

std::string to_csv(const ReferenceAttractor& reference) {
  std::string out;
  char buf[32];
  for (const Point& p : reference.points) {
    for (std::size_t k = 0; k < p.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", p[k]);
      if (k) out += ',';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace subdiv
