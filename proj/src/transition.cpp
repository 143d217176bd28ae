#include "subdiv/transition.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "subdiv/parallel.hpp"

namespace subdiv {

TransitionMap::TransitionMap(std::shared_ptr<const CoverLevel> level, std::vector<double> images,
                             std::size_t images_per_box, double radius, TransitionInfo info)
    : index_(std::move(level)),
      images_(std::move(images)),
      per_box_(images_per_box),
      radius_(radius),
      info_(info) {
  if (images_.size() != index_.level().size() * per_box_ * index_.level().dim()) {
    throw std::invalid_argument("image table does not match the cover level");
  }
}

std::span<const double> TransitionMap::image(std::size_t src, std::size_t l) const {
  const std::size_t d = level().dim();
  return std::span<const double>(images_).subspan((src * per_box_ + l) * d, d);
}

bool TransitionMap::removed(std::size_t src, std::size_t tgt) const {
  return !removed_.empty() && std::binary_search(removed_.begin(), removed_.end(), std::pair{src, tgt});
}

bool TransitionMap::has_edge(std::size_t src, std::size_t tgt) const {
  if (removed(src, tgt)) return false;
  const Box box = level().box(tgt);
  for (std::size_t l = 0; l < per_box_; ++l) {
    if (point_box_distance(image(src, l), box) <= radius_) return true;
  }
  return false;
}

std::vector<std::size_t> TransitionMap::targets(std::size_t src) const {
  std::vector<std::size_t> out;
  for (std::size_t l = 0; l < per_box_; ++l) {
    index_.visit_ball(image(src, l), radius_, [&](std::size_t pos) {
      if (!removed(src, pos)) out.push_back(pos);
      return true;
    });
  }
  if (per_box_ > 1) {
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }
  return out;
}

std::size_t TransitionMap::out_degree(std::size_t src) const {
  const std::size_t d = level().dim();
  std::size_t n = index_.count_union(std::span<const double>(images_).subspan(src * per_box_ * d, per_box_ * d),
                                     radius_);
  auto lo = std::lower_bound(removed_.begin(), removed_.end(), std::pair<std::size_t, std::size_t>{src, 0});
  while (lo != removed_.end() && lo->first == src) {
    --n;
    ++lo;
  }
  return n;
}

std::size_t TransitionMap::edge_count(unsigned threads) const {
  std::vector<std::size_t> degree(level().size());
  parallel_for(degree.size(), threads, [&](std::size_t i) { degree[i] = out_degree(i); });
  std::size_t total = 0;
  for (std::size_t v : degree) total += v;
  return total;
}

bool TransitionMap::image_union_near(std::size_t src, std::span<const double> p, double slack) const {
  bool found = false;
  index_.visit_ball(p, slack, [&](std::size_t pos) {
    found = has_edge(src, pos);
    return !found;
  });
  return found;
}

std::size_t TransitionMap::find_alive_target(std::size_t src, const AliveSet& alive) const {
  std::size_t hit = CoverLevel::npos;
  for (std::size_t l = 0; l < per_box_ && hit == CoverLevel::npos; ++l) {
    index_.visit_ball(
        image(src, l), radius_,
        [&](std::size_t pos) {
          if (removed(src, pos)) return true;
          hit = pos;
          return false;
        },
        &alive);
  }
  return hit;
}

void TransitionMap::remove_edge(std::size_t src, std::size_t tgt) {
  if (!has_edge(src, tgt)) throw std::invalid_argument("no such edge to remove");
  auto it = std::lower_bound(removed_.begin(), removed_.end(), std::pair{src, tgt});
  removed_.insert(it, {src, tgt});
}

void check_margin(const ContinuousSystem& sys, const Box& Q, double h) {
  const double margin = region_margin(sys.validity_region, Q);
  if (sys.bound_P * h > margin) {
    throw ConfigError("P*h = " + std::to_string(sys.bound_P * h) + " exceeds the margin " +
                      std::to_string(margin) + " between Q and the validity region of " + sys.name);
  }
}

namespace {

std::size_t power(unsigned base, std::size_t exp) {
  std::size_t r = 1;
  for (std::size_t i = 0; i < exp; ++i) r *= base;
  return r;
}

template <class ImageFn>
TransitionMap build_from_centers(std::shared_ptr<const CoverLevel> level, unsigned samples_per_axis,
                                 double radius, TransitionInfo info, unsigned threads, ImageFn&& image_of) {
  if (samples_per_axis == 0) throw std::invalid_argument("samples per axis must be positive");
  const std::size_t d = level->dim();
  const std::size_t per_box = power(samples_per_axis, d);
  std::vector<double> images(level->size() * per_box * d);
  parallel_for(level->size(), threads, [&](std::size_t src) {
    const SampleGrid grid = sample_centers(level->box(src), samples_per_axis);
    for (std::size_t l = 0; l < per_box; ++l) {
      const Point y = image_of(grid.centers[l]);
      std::copy(y.begin(), y.end(), images.begin() + static_cast<std::ptrdiff_t>((src * per_box + l) * d));
    }
  });
  return TransitionMap(std::move(level), std::move(images), per_box, radius, info);
}

}  // namespace

TransitionMap build_transition_discrete(std::shared_ptr<const CoverLevel> level,
                                        const DiscreteSystem& sys, unsigned samples_per_axis,
                                        unsigned threads) {
  if (level->dim() != sys.dim()) throw ConfigError("cover and system dimensions differ");
  if (!sys.validity_region.contains(level->root())) {
    throw ConfigError("cover root leaves the validity region of " + sys.name);
  }
  TransitionInfo info;
  info.samples_per_axis = samples_per_axis;
  info.subdiameter = level->rho() / samples_per_axis;
  const double radius = sys.lipschitz * info.subdiameter;
  return build_from_centers(std::move(level), samples_per_axis, radius, info, threads,
                            [&](const Point& z) { return eval_inverse(sys, z); });
}

TransitionMap build_transition_continuous(std::shared_ptr<const CoverLevel> level,
                                          const ContinuousSystem& sys, unsigned samples_per_axis,
                                          const EulerParams& euler, unsigned threads) {
  if (level->dim() != sys.dim()) throw ConfigError("cover and system dimensions differ");
  check_margin(sys, level->root(), euler.h());
  TransitionInfo info;
  info.continuous = true;
  info.samples_per_axis = samples_per_axis;
  info.subdiameter = level->rho() / samples_per_axis;
  info.h = euler.h();
  info.substeps = euler.substeps();
  const double radius =
      enclosure_radius(sys.lipschitz, sys.bound_P, euler.h(), euler.substeps(), info.subdiameter);
  return build_from_centers(std::move(level), samples_per_axis, radius, info, threads,
                            [&](const Point& z) { return euler_backward(sys, z, euler); });
}

namespace {

std::mt19937_64 box_rng(std::uint64_t seed, const BoxKey& key) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(key.flat_index() * 64 + key.depth())));
}

Point preimage(const System& sys, std::span<const double> x, double h) {
  if (const auto* ds = std::get_if<DiscreteSystem>(&sys)) return eval_inverse(*ds, x);
  return reference_backward_flow(std::get<ContinuousSystem>(sys), x, h, kReferenceTolerance);
}

}  // namespace

GapReport check_containment_condition(const TransitionMap& map, const System& sys,
                                      std::size_t samples, std::uint64_t seed, unsigned threads) {
  const CoverLevel& level = map.level();
  if (map.info().continuous != std::holds_alternative<ContinuousSystem>(sys)) {
    throw std::invalid_argument("transition map and system kinds differ");
  }
  const double slack = map.info().continuous ? 10.0 * kReferenceTolerance : 0.0;
  std::vector<std::vector<ContainmentViolation>> per_source(level.size());
  parallel_for(level.size(), threads, [&](std::size_t src) {
    const Box box = level.box(src);
    auto rng = box_rng(seed, level.key(src));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Point x(level.dim());
    for (std::size_t s = 0; s < samples; ++s) {
      for (std::size_t k = 0; k < x.size(); ++k) x[k] = box.lo(k) + unit(rng) * box.side(k);
      const Point y = preimage(sys, x, map.info().h);
      if (!map.index().covers(y)) continue;
      if (!map.image_union_near(src, y, slack)) {
        per_source[src].push_back({level.key(src).flat_index(), x, y});
      }
    }
  });
  GapReport report;
  report.containment_samples = samples * level.size();
  for (auto& v : per_source) {
    for (auto& violation : v) report.containment_violations.push_back(std::move(violation));
  }
  return report;
}

namespace {

double grid_spacing(double rho, unsigned samples_per_axis) {
  return samples_per_axis > 1 ? rho / (samples_per_axis - 1) : rho;
}

}  // namespace

double total_gap(const GapReport& g) { return g.overapprox_gap + g.neighbor_gap + g.defect_gap; }

bool gaps_within_bounds(const GapReport& g, double slack) {
  return g.overapprox_gap <= g.overapprox_bound + slack && g.neighbor_gap <= g.neighbor_bound + slack &&
         g.defect_gap <= g.defect_bound + slack;
}

bool gap_not_larger(const GapReport& previous, const GapReport& next, double slack) {
  return total_gap(next) - next.sampling_high <= total_gap(previous) + previous.sampling_low + slack;
}

GapReport measure_overapprox_gap(const TransitionMap& map, const System& sys,
                                 unsigned samples_per_axis, unsigned threads) {
  const CoverLevel& level = map.level();
  const TransitionInfo& info = map.info();
  const double rho = level.rho();
  GapReport report;
  std::vector<double> gap_a(level.size(), 0.0), gap_b(level.size(), 0.0);

  if (const auto* ds = std::get_if<DiscreteSystem>(&sys)) {
    if (info.continuous) throw std::invalid_argument("transition map and system kinds differ");
    // Any x in a target box is within rho + L varrho of some center image.
    report.overapprox_bound = ds->lipschitz * info.subdiameter + rho;
    // Grid points of a box are within spacing/2 of every point; the images
    // of D_i are sampled through f^-1 and the targets directly.
    report.sampling_low = 0.5 * grid_spacing(rho, samples_per_axis);
    report.sampling_high = ds->lipschitz * report.sampling_low;
    parallel_for(level.size(), threads, [&](std::size_t src) {
      std::vector<Point> images;
      for (std::size_t l = 0; l < map.images_per_box(); ++l) {
        auto im = map.image(src, l);
        images.emplace_back(im.begin(), im.end());
      }
      for (const Point& x : box_grid(level.box(src), samples_per_axis)) images.push_back(eval_inverse(*ds, x));
      double worst = 0.0;
      for (std::size_t tgt : map.targets(src)) {
        for (const Point& x : box_grid(level.box(tgt), samples_per_axis)) {
          double nearest = std::numeric_limits<double>::infinity();
          for (const Point& y : images) nearest = std::min(nearest, max_norm_distance(x, y));
          worst = std::max(worst, nearest);
        }
      }
      gap_a[src] = worst;
    });
    for (double g : gap_a) report.overapprox_gap = std::max(report.overapprox_gap, g);
    return report;
  }

  const auto& cs = std::get<ContinuousSystem>(sys);
  if (!info.continuous) throw std::invalid_argument("transition map and system kinds differ");
  const double h = info.h;
  const double r = map.radius();
  const double L = cs.lipschitz;
  const double P = cs.bound_P;
  report.neighbor_bound = rho + r + P * h;
  report.defect_bound = (rho + r) / h + 0.5 * L * P * h + rho / h + L * rho;
  // The neighbor gap is exact; the defect misses at most (1/h + L) times the
  // distance from a point of D_i to the nearest sampled z.
  report.sampling_low = (1.0 / h + L) * 0.5 * grid_spacing(rho, samples_per_axis);
  parallel_for(level.size(), threads, [&](std::size_t src) {
    const Box source = level.box(src);
    const std::vector<Point> zs = box_grid(source, samples_per_axis);
    std::vector<Point> gz;
    gz.reserve(zs.size());
    for (const Point& z : zs) gz.push_back(eval_field(cs, z));
    double neighbor = 0.0, defect = 0.0;
    for (std::size_t tgt : map.targets(src)) {
      // Both quantities are convex in x, so the corners of D_j attain the sup over x.
      for (const Point& x : box_grid(level.box(tgt), 2)) {
        neighbor = std::max(neighbor, point_box_distance(x, source));
        for (std::size_t m = 0; m < zs.size(); ++m) {
          for (std::size_t k = 0; k < x.size(); ++k) {
            defect = std::max(defect, std::abs((x[k] - zs[m][k]) / h + gz[m][k]));
          }
        }
      }
    }
    gap_a[src] = neighbor;
    gap_b[src] = defect;
  });
  for (std::size_t i = 0; i < level.size(); ++i) {
    report.neighbor_gap = std::max(report.neighbor_gap, gap_a[i]);
    report.defect_gap = std::max(report.defect_gap, gap_b[i]);
  }
  return report;
}

}  // namespace subdiv
