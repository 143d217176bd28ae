#include <algorithm>
#include <random>

#include "doctest.h"
#include "subdiv/cover_index.hpp"

using namespace subdiv;

namespace {

std::shared_ptr<const CoverLevel> random_level(std::mt19937_64& rng, const Box& Q, unsigned depth, double keep) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::uint64_t> active;
  const std::uint64_t total = std::uint64_t{1} << (depth * Q.dim());
  for (std::uint64_t i = 0; i < total; ++i) {
    if (unit(rng) < keep) active.push_back(i);
  }
  return std::make_shared<const CoverLevel>(Q, depth, std::move(active));
}

}  // namespace

TEST_CASE("ball queries match a linear scan") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Box boxes[] = {Box({-1.0}, {1.0}), Box({-2.0, -1.0}, {2.0, 1.5}), Box({0.0, 0.0, 0.0}, {1.0, 2.0, 3.0})};
  for (const Box& Q : boxes) {
    const unsigned depth = Q.dim() == 3 ? 3 : 5;
    for (double keep : {0.05, 0.4, 1.0}) {
      const auto level = random_level(rng, Q, depth, keep);
      const CoverIndex index(level);
      for (int t = 0; t < 200; ++t) {
        Point c(Q.dim());
        for (std::size_t k = 0; k < Q.dim(); ++k) c[k] = Q.lo(k) - 0.5 + unit(rng) * (Q.side(k) + 1.0);
        const double radius = t % 5 == 0 ? 0.0 : unit(rng) * Q.diameter() * 0.3;
        std::vector<std::size_t> expected;
        for (std::size_t pos = 0; pos < level->size(); ++pos) {
          if (point_box_distance(c, level->box(pos)) <= radius) expected.push_back(pos);
        }
        CHECK(index.within(c, radius) == expected);
        CHECK(index.count_union(c, radius) == expected.size());
        CHECK(index.covers(c) == !index.locate(c).empty());
      }
    }
  }
}

TEST_CASE("union counts over several balls match a linear scan") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Box Q({0.0, 0.0}, {1.0, 1.0});
  const auto level = random_level(rng, Q, 5, 0.5);
  const CoverIndex index(level);
  for (int t = 0; t < 200; ++t) {
    const std::size_t balls = 1 + rng() % 4;
    std::vector<double> centers;
    for (std::size_t b = 0; b < 2 * balls; ++b) centers.push_back(unit(rng) * 1.2 - 0.1);
    const double radius = unit(rng) * 0.2;
    std::size_t expected = 0;
    for (std::size_t pos = 0; pos < level->size(); ++pos) {
      for (std::size_t b = 0; b < balls; ++b) {
        if (point_box_distance(std::span<const double>(centers).subspan(2 * b, 2), level->box(pos)) <= radius) {
          ++expected;
          break;
        }
      }
    }
    CHECK(index.count_union(centers, radius) == expected);
  }
}

TEST_CASE("ball queries skip dead boxes") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Box Q({-1.0, -1.0}, {1.0, 1.0});
  const auto level = random_level(rng, Q, 4, 0.7);
  const CoverIndex index(level);
  AliveSet alive(level->size());
  for (std::size_t pos = 0; pos < level->size(); ++pos) {
    if (rng() % 2) alive.kill(pos);
  }
  for (int t = 0; t < 200; ++t) {
    const Point c{unit(rng) * 2 - 1, unit(rng) * 2 - 1};
    const double radius = unit(rng) * 0.5;
    std::vector<std::size_t> expected, seen;
    for (std::size_t pos = 0; pos < level->size(); ++pos) {
      if (alive.alive(pos) && point_box_distance(c, level->box(pos)) <= radius) expected.push_back(pos);
    }
    index.visit_ball(c, radius, [&](std::size_t pos) {
      if (alive.alive(pos)) seen.push_back(pos);
      return true;
    }, &alive);
    CHECK(seen == expected);
  }
}

TEST_CASE("alive set range counts") {
  std::mt19937_64 rng(1);
  AliveSet alive(100);
  std::vector<char> flags(100, 1);
  for (int t = 0; t < 60; ++t) {
    const std::size_t pos = rng() % 100;
    alive.kill(pos);
    flags[pos] = 0;
    const std::size_t a = rng() % 101;
    const std::size_t b = a + rng() % (101 - a);
    CHECK(alive.count(a, b) == static_cast<std::size_t>(std::count(flags.begin() + a, flags.begin() + b, 1)));
  }
  for (std::size_t pos = 0; pos < 100; ++pos) CHECK(alive.alive(pos) == (flags[pos] != 0));
}

TEST_CASE("empty levels answer every query with nothing") {
  const auto level = std::make_shared<const CoverLevel>(Box({0.0}, {1.0}), 3, std::vector<std::uint64_t>{});
  const CoverIndex index(level);
  CHECK(index.within(Point{0.5}, 10.0).empty());
  CHECK(index.count_union(Point{0.5}, 10.0) == 0);
  CHECK_FALSE(index.covers(Point{0.5}));
}
