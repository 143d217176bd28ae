#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "subdiv/attractor.hpp"
#include "subdiv/box.hpp"
#include "subdiv/systems.hpp"
#include "subdiv/transition.hpp"

namespace testing_support {

using namespace subdiv;

using EdgeTable = std::map<std::uint64_t, std::vector<std::uint64_t>>;

inline EdgeTable random_graph(std::mt19937_64& rng, std::size_t max_nodes, double max_density) {
  std::uniform_int_distribution<std::size_t> size(0, max_nodes);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t n = size(rng);
  const double density = unit(rng) * max_density;
  EdgeTable g;
  for (std::uint64_t i = 0; i < n; ++i) {
    auto& succ = g[i];
    for (std::uint64_t j = 0; j < n; ++j) {
      if (unit(rng) < density) succ.push_back(j);
    }
  }
  return g;
}

inline EdgeTable edge_table(const TransitionMap& map) {
  EdgeTable g;
  const CoverLevel& level = map.level();
  for (std::size_t i = 0; i < level.size(); ++i) {
    auto& succ = g[level.active()[i]];
    for (std::size_t t : map.targets(i)) succ.push_back(level.active()[t]);
  }
  return g;
}

// Edge sets recomputed from scratch by scanning every (i, j) pair with the
// defining inequality. Uses nothing from the transition module.
template <class ImageFn>
EdgeTable brute_force_edges(const CoverLevel& level, unsigned M, double radius, ImageFn&& image_of) {
  EdgeTable g;
  const std::size_t d = level.dim();
  for (std::size_t i = 0; i < level.size(); ++i) {
    const Box src = level.box(i);
    std::vector<Point> images;
    // Sample centers by direct formula rather than through sample_centers.
    std::size_t count = 1;
    for (std::size_t k = 0; k < d; ++k) count *= M;
    for (std::size_t l = 0; l < count; ++l) {
      Point z(d);
      std::size_t rest = l;
      for (std::size_t k = 0; k < d; ++k) {
        const std::size_t c = rest % M;
        rest /= M;
        z[k] = src.lo(k) + (static_cast<double>(c) + 0.5) * (src.hi(k) - src.lo(k)) / M;
      }
      images.push_back(image_of(z));
    }
    auto& succ = g[level.active()[i]];
    for (std::size_t j = 0; j < level.size(); ++j) {
      const Box tgt = level.box(j);
      for (const Point& y : images) {
        double dist = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
          dist = std::max({dist, tgt.lo(k) - y[k], y[k] - tgt.hi(k)});
        }
        if (dist <= radius) {
          succ.push_back(level.active()[j]);
          break;
        }
      }
    }
  }
  return g;
}

inline ContinuousSystem linear_decay_system() {
  return ContinuousSystem{"decay",
                          [](std::span<const double> x, std::span<double> out) {
                            for (std::size_t k = 0; k < x.size(); ++k) out[k] = -x[k];
                          },
                          10.0, 1.0, Box({-10.0}, {10.0})};
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("subdiv_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace testing_support
