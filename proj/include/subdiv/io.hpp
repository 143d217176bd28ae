#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "subdiv/attractor.hpp"
#include "subdiv/box.hpp"
#include "subdiv/transition.hpp"

namespace subdiv {

using json = nlohmann::json;

json to_json(const Box& b);
Box box_from_json(const json& j);
json to_json(const BoxKey& key, std::size_t dim);
BoxKey key_from_json(const json& j, std::size_t dim);

// {"depth": n, "edges": {"<flat index>": [target flat indices]}}
json to_json(const TransitionMap& map);

// Gap fields and violation count; timings are left out so the record only
// depends on the inputs.
json to_json(const GapReport& gaps);
json to_json(const LevelReport& report);

// One JSONL line per kept box: {"depth","hi","index","lo"}.
std::string box_records(const LevelResult& level);

struct Checkpoint {
  unsigned depth = 0;
  std::vector<std::uint64_t> kept;
  std::string config_hash;
};

json to_json(const Checkpoint& c);
Checkpoint checkpoint_from_json(const json& j);

// Parses {"edges": {"<id>": [ids...]}}; throws std::invalid_argument on
// malformed input.
std::map<std::uint64_t, std::vector<std::uint64_t>> edges_from_json(const json& j);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace subdiv
