#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>

#include "subdiv/box.hpp"

namespace subdiv {

// Writes the value of a map at x into out (both of the system dimension).
using VectorMap = std::function<void(std::span<const double> x, std::span<double> out)>;

struct EvaluationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Discrete dynamics x -> f(x) given through f^-1, which must be L-Lipschitz
// in the max-norm on validity_region.
struct DiscreteSystem {
  std::string name;
  VectorMap inverse;
  VectorMap forward;  // optional; used by oracles only
  double lipschitz = 0.0;
  Box validity_region;

  std::size_t dim() const { return validity_region.dim(); }
};

// x' = g(x) with |g| <= P and g L-Lipschitz on validity_region. Outside the
// region the argument is clamped onto it before evaluation, which keeps
// both constants valid on all of R^d.
struct ContinuousSystem {
  std::string name;
  VectorMap field;
  double bound_P = 0.0;
  double lipschitz = 0.0;
  Box validity_region;

  std::size_t dim() const { return validity_region.dim(); }
};

using System = std::variant<DiscreteSystem, ContinuousSystem>;

const Box& validity_region(const System& sys);
const std::string& system_name(const System& sys);

Point eval_inverse(const DiscreteSystem& sys, std::span<const double> x);
Point eval_forward(const DiscreteSystem& sys, std::span<const double> x);
Point eval_field(const ContinuousSystem& sys, std::span<const double> x);
// Non-allocating variant; `scratch` must have dim() entries.
void eval_field(const ContinuousSystem& sys, std::span<const double> x, std::span<double> out,
                std::span<double> scratch);

enum class BuiltinId { linmap2d, henon, halving1d, cubic1d, saddle2d };

BuiltinId parse_builtin(const std::string& name);
std::string builtin_name(BuiltinId id);
bool is_continuous(BuiltinId id);

struct BuiltinParams {
  double henon_a = 1.4;
  double henon_b = 0.3;
};

// Built-in systems with analytic constants. Rejects a Q that leaves the
// system's validity region or has the wrong dimension.
System make_builtin(BuiltinId id, const Box& Q, const BuiltinParams& params = {});

// Distance by which Q sits inside the validity region (negative if it pokes
// out). Backward trajectories of duration h from Q stay in the region when
// P h <= margin.
double region_margin(const Box& region, const Box& Q);

struct ConstantCheck {
  std::size_t pairs = 0;
  std::size_t lipschitz_violations = 0;
  std::size_t bound_violations = 0;
  double worst_lipschitz_ratio = 0.0;
  double worst_bound = 0.0;
};

// Random pairs in the validity region against the declared L (and P).
ConstantCheck spot_check_constants(const System& sys, std::size_t pairs, std::uint64_t seed);

}  // namespace subdiv
