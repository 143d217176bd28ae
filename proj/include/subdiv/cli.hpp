#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "subdiv/attractor.hpp"
#include "subdiv/box.hpp"
#include "subdiv/systems.hpp"

namespace subdiv {

// Exit codes of the command line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitConfig = 2,
  kExitBudget = 3,
  kExitInterrupted = 130,
};

struct RunConfig {
  std::string system;
  BuiltinParams builtin;
  std::string q;  // "lo1,lo2,...:hi1,hi2,..."
  unsigned max_depth = 8;
  SchemeParams scheme;
  std::string out = "boxes.jsonl";
  std::string stats = "stats.json";
  std::optional<std::string> resume;
};

// Parses "lo1,...,lod:hi1,...,hid"; the dimension is inferred.
Box parse_box(const std::string& spec);

// Stable hash (FNV-1a, hex) over the settings that determine the computed
// levels: system and parameters, Q, M, and for flows N, h0 and alpha, plus
// the diagnostics seed. Depth, threads, budget and paths are excluded.
std::string config_hash(const RunConfig& config);

std::string checkpoint_path(const std::string& out, unsigned depth);

int cli_main(int argc, char** argv);
int cli_main(const std::vector<std::string>& args);

}  // namespace subdiv
