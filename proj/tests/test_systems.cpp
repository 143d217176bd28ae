#include <cmath>
#include <random>

#include "doctest.h"
#include "subdiv/systems.hpp"

using namespace subdiv;

namespace {

const Box kSquare({-1.0, -1.0}, {1.0, 1.0});
const Box kHenonQ({-2.0, -2.0}, {2.0, 2.0});

}  // namespace

TEST_CASE("henon inverse") {
  const auto sys = std::get<DiscreteSystem>(make_builtin(BuiltinId::henon, kHenonQ));
  const Point y = eval_inverse(sys, Point{1.0, 0.0});
  CHECK(y[0] == 0.0);
  CHECK(y[1] == 0.0);
  CHECK(sys.lipschitz == doctest::Approx(std::max(1.0 / 0.3, 1.0 + 2.0 * 1.4 * 2.0 / 0.09)));
  CHECK(sys.lipschitz == doctest::Approx(63.2222).epsilon(1e-4));
}

TEST_CASE("henon forward and inverse round trip") {
  const auto sys = std::get<DiscreteSystem>(make_builtin(BuiltinId::henon, kHenonQ));
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const Point x{coord(rng), coord(rng)};
    worst = std::max(worst, max_norm_distance(eval_forward(sys, eval_inverse(sys, x)), x));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("linear maps") {
  const auto lin = std::get<DiscreteSystem>(make_builtin(BuiltinId::linmap2d, kSquare));
  CHECK(eval_inverse(lin, Point{1.0, 1.0}) == Point{2.0, 0.5});
  CHECK(lin.lipschitz == 2.0);
  const auto half = std::get<DiscreteSystem>(make_builtin(BuiltinId::halving1d, Box({-1.0}, {1.0})));
  CHECK(eval_inverse(half, Point{0.0}) == Point{0.0});
  CHECK(half.lipschitz == 2.0);
}

TEST_CASE("flow fields") {
  const auto cubic = std::get<ContinuousSystem>(make_builtin(BuiltinId::cubic1d, Box({-1.5}, {1.5})));
  CHECK(eval_field(cubic, Point{1.0}) == Point{0.0});
  CHECK(cubic.bound_P == 6.0);
  CHECK(cubic.lipschitz == 11.0);
  CHECK(cubic.validity_region == Box({-2.0}, {2.0}));
  // Outside the validity region the argument is clamped first.
  CHECK(eval_field(cubic, Point{5.0}) == Point{-6.0});
  CHECK(eval_field(cubic, Point{-5.0}) == Point{6.0});

  const auto saddle = std::get<ContinuousSystem>(make_builtin(BuiltinId::saddle2d, kSquare));
  CHECK(eval_field(saddle, Point{1.0, 1.0}) == Point{1.0, -1.0});
  CHECK(saddle.bound_P == 2.0);
  CHECK(saddle.lipschitz == 1.0);
  CHECK(saddle.validity_region == kHenonQ);
}

TEST_CASE("built-ins reject a root box they cannot handle") {
  CHECK_THROWS_AS(make_builtin(BuiltinId::cubic1d, Box({-2.5}, {1.0})), ConfigError);
  CHECK_THROWS_AS(make_builtin(BuiltinId::saddle2d, Box({-1.0, -1.0}, {3.0, 1.0})), ConfigError);
  CHECK_THROWS_AS(make_builtin(BuiltinId::linmap2d, Box({-1.0}, {1.0})), ConfigError);
  CHECK_THROWS_AS(make_builtin(BuiltinId::halving1d, kSquare), ConfigError);
  CHECK_THROWS_AS(make_builtin(BuiltinId::henon, kHenonQ, {1.4, 0.0}), ConfigError);
  CHECK_THROWS_AS(parse_builtin("lorenz"), ConfigError);
}

TEST_CASE("built-in names round trip") {
  for (auto id : {BuiltinId::linmap2d, BuiltinId::henon, BuiltinId::halving1d, BuiltinId::cubic1d,
                  BuiltinId::saddle2d}) {
    CHECK(parse_builtin(builtin_name(id)) == id);
  }
  CHECK(is_continuous(BuiltinId::cubic1d));
  CHECK(is_continuous(BuiltinId::saddle2d));
  CHECK_FALSE(is_continuous(BuiltinId::henon));
}

TEST_CASE("declared constants hold on random pairs") {
  const std::pair<BuiltinId, Box> cases[] = {
      {BuiltinId::linmap2d, kSquare},
      {BuiltinId::henon, kHenonQ},
      {BuiltinId::halving1d, Box({-1.0}, {1.0})},
      {BuiltinId::cubic1d, Box({-1.5}, {1.5})},
      {BuiltinId::saddle2d, kSquare},
  };
  for (const auto& [id, Q] : cases) {
    CAPTURE(builtin_name(id));
    const ConstantCheck c = spot_check_constants(make_builtin(id, Q), 10000, 99);
    CHECK(c.pairs == 10000);
    CHECK(c.lipschitz_violations == 0);
    CHECK(c.bound_violations == 0);
    CHECK(c.worst_lipschitz_ratio > 0.0);
  }
}

TEST_CASE("the spot check notices understated constants") {
  auto sys = std::get<ContinuousSystem>(make_builtin(BuiltinId::cubic1d, Box({-1.0}, {1.0})));
  sys.lipschitz = 5.0;
  sys.bound_P = 1.0;
  const ConstantCheck c = spot_check_constants(sys, 2000, 1);
  CHECK(c.lipschitz_violations > 0);
  CHECK(c.bound_violations > 0);
}

TEST_CASE("non-finite values abort evaluation") {
  DiscreteSystem bad{"bad",
                     [](std::span<const double>, std::span<double> out) { out[0] = NAN; },
                     {},
                     1.0,
                     Box({0.0}, {1.0})};
  CHECK_THROWS_AS(eval_inverse(bad, Point{0.5}), EvaluationError);
  CHECK_THROWS_AS(eval_forward(bad, Point{0.5}), std::logic_error);
  bad.forward = bad.inverse;
  CHECK_THROWS_AS(eval_forward(bad, Point{0.5}), EvaluationError);

  ContinuousSystem blowup{"blowup",
                          [](std::span<const double>, std::span<double> out) { out[0] = INFINITY; },
                          1.0, 1.0, Box({0.0}, {1.0})};
  CHECK_THROWS_AS(eval_field(blowup, Point{0.5}), EvaluationError);
}

TEST_CASE("margin of Q inside the validity region") {
  CHECK(region_margin(Box({-2.0}, {2.0}), Box({-1.5}, {1.5})) == 0.5);
  CHECK(region_margin(Box({-2.0, -2.0}, {2.0, 2.0}), Box({-1.0, -1.9}, {1.0, 1.0})) == doctest::Approx(0.1));
  CHECK(region_margin(Box({0.0}, {1.0}), Box({-1.0}, {1.0})) < 0.0);
}
