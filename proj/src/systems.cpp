#include "subdiv/systems.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace subdiv {

const Box& validity_region(const System& sys) {
  return std::visit([](const auto& s) -> const Box& { return s.validity_region; }, sys);
}

const std::string& system_name(const System& sys) {
  return std::visit([](const auto& s) -> const std::string& { return s.name; }, sys);
}

namespace {

void require_finite(std::span<const double> v, const std::string& what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw EvaluationError(what + " produced a non-finite value");
  }
}

}  // namespace

Point eval_inverse(const DiscreteSystem& sys, std::span<const double> x) {
  Point out(sys.dim());
  sys.inverse(x, out);
  require_finite(out, sys.name + " inverse map");
  return out;
}

Point eval_forward(const DiscreteSystem& sys, std::span<const double> x) {
  if (!sys.forward) throw std::logic_error(sys.name + " has no forward map");
  Point out(sys.dim());
  sys.forward(x, out);
  require_finite(out, sys.name + " forward map");
  return out;
}

void eval_field(const ContinuousSystem& sys, std::span<const double> x, std::span<double> out,
                std::span<double> scratch) {
  const Box& r = sys.validity_region;
  for (std::size_t k = 0; k < r.dim(); ++k) scratch[k] = std::clamp(x[k], r.lo(k), r.hi(k));
  sys.field(scratch, out);
  require_finite(out, sys.name + " vector field");
}

Point eval_field(const ContinuousSystem& sys, std::span<const double> x) {
  Point out(sys.dim()), scratch(sys.dim());
  eval_field(sys, x, out, scratch);
  return out;
}

BuiltinId parse_builtin(const std::string& name) {
  if (name == "linmap2d") return BuiltinId::linmap2d;
  if (name == "henon") return BuiltinId::henon;
  if (name == "halving1d") return BuiltinId::halving1d;
  if (name == "cubic1d") return BuiltinId::cubic1d;
  if (name == "saddle2d") return BuiltinId::saddle2d;
  throw ConfigError("unknown system '" + name + "'");
}

std::string builtin_name(BuiltinId id) {
  switch (id) {
    case BuiltinId::linmap2d: return "linmap2d";
    case BuiltinId::henon: return "henon";
    case BuiltinId::halving1d: return "halving1d";
    case BuiltinId::cubic1d: return "cubic1d";
    case BuiltinId::saddle2d: return "saddle2d";
  }
  return {};
}

bool is_continuous(BuiltinId id) { return id == BuiltinId::cubic1d || id == BuiltinId::saddle2d; }

double region_margin(const Box& region, const Box& Q) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < Q.dim(); ++k) {
    m = std::min({m, Q.lo(k) - region.lo(k), region.hi(k) - Q.hi(k)});
  }
  return m;
}

System make_builtin(BuiltinId id, const Box& Q, const BuiltinParams& params) {
  const std::string name = builtin_name(id);
  const std::size_t dim = (id == BuiltinId::halving1d || id == BuiltinId::cubic1d) ? 1 : 2;
  if (Q.dim() != dim) {
    throw ConfigError(name + " is " + std::to_string(dim) + "-dimensional but Q has dimension " +
                      std::to_string(Q.dim()));
  }

  switch (id) {
    case BuiltinId::linmap2d:
      // f(x, y) = (x/2, 2y)
      return DiscreteSystem{
          name,
          [](std::span<const double> x, std::span<double> out) {
            out[0] = 2.0 * x[0];
            out[1] = 0.5 * x[1];
          },
          [](std::span<const double> x, std::span<double> out) {
            out[0] = 0.5 * x[0];
            out[1] = 2.0 * x[1];
          },
          2.0, Q};

    case BuiltinId::halving1d:
      return DiscreteSystem{
          name, [](std::span<const double> x, std::span<double> out) { out[0] = 2.0 * x[0]; },
          [](std::span<const double> x, std::span<double> out) { out[0] = 0.5 * x[0]; }, 2.0, Q};

    case BuiltinId::henon: {
      const double a = params.henon_a;
      const double b = params.henon_b;
      if (b == 0.0 || !std::isfinite(a) || !std::isfinite(b)) {
        throw ConfigError("henon requires finite a and nonzero b");
      }
      // Row sums of the Jacobian of f^-1(x', y') = (y'/b, x' - 1 + a (y'/b)^2) on Q.
      const double ymax = std::max(std::abs(Q.lo(1)), std::abs(Q.hi(1)));
      const double L = std::max(1.0 / std::abs(b), 1.0 + 2.0 * std::abs(a) * ymax / (b * b));
      return DiscreteSystem{
          name,
          [a, b](std::span<const double> x, std::span<double> out) {
            const double u = x[1] / b;
            out[0] = u;
            out[1] = x[0] - 1.0 + a * u * u;
          },
          [a, b](std::span<const double> x, std::span<double> out) {
            const double u = x[0];
            out[0] = 1.0 - a * u * u + x[1];
            out[1] = b * u;
          },
          L, Q};
    }

    case BuiltinId::cubic1d: {
      Box region({-2.0}, {2.0});
      if (!region.contains(Q)) throw ConfigError("cubic1d requires Q inside [-2, 2]");
      return ContinuousSystem{
          name,
          [](std::span<const double> x, std::span<double> out) { out[0] = x[0] - x[0] * x[0] * x[0]; },
          6.0, 11.0, region};
    }

    case BuiltinId::saddle2d: {
      Box region({-2.0, -2.0}, {2.0, 2.0});
      if (!region.contains(Q)) throw ConfigError("saddle2d requires Q inside [-2, 2]^2");
      return ContinuousSystem{
          name,
          [](std::span<const double> x, std::span<double> out) {
            out[0] = x[0];
            out[1] = -x[1];
          },
          2.0, 1.0, region};
    }
  }
  throw ConfigError("unhandled built-in");
}

ConstantCheck spot_check_constants(const System& sys, std::size_t pairs, std::uint64_t seed) {
  const Box& region = validity_region(sys);
  const std::size_t d = region.dim();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto draw = [&] {
    Point p(d);
    for (std::size_t k = 0; k < d; ++k) p[k] = region.lo(k) + unit(rng) * region.side(k);
    return p;
  };

  ConstantCheck out;
  out.pairs = pairs;
  for (std::size_t i = 0; i < pairs; ++i) {
    const Point x = draw(), z = draw();
    Point fx, fz;
    double L = 0.0;
    if (const auto* ds = std::get_if<DiscreteSystem>(&sys)) {
      fx = eval_inverse(*ds, x);
      fz = eval_inverse(*ds, z);
      L = ds->lipschitz;
    } else {
      const auto& cs = std::get<ContinuousSystem>(sys);
      fx = eval_field(cs, x);
      fz = eval_field(cs, z);
      L = cs.lipschitz;
      const double bound = std::max(max_norm(fx), max_norm(fz));
      out.worst_bound = std::max(out.worst_bound, bound);
      if (bound > cs.bound_P * (1.0 + 1e-12)) ++out.bound_violations;
    }
    const double dx = max_norm_distance(x, z);
    const double df = max_norm_distance(fx, fz);
    if (dx > 0.0) out.worst_lipschitz_ratio = std::max(out.worst_lipschitz_ratio, df / dx);
    if (df > L * dx * (1.0 + 1e-12) + 1e-300) ++out.lipschitz_violations;
  }
  return out;
}

}  // namespace subdiv
