#include "subdiv/io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace subdiv {

json to_json(const Box& b) { return {{"lo", b.lo()}, {"hi", b.hi()}}; }

Box box_from_json(const json& j) {
  return {j.at("lo").get<Point>(), j.at("hi").get<Point>()};
}

json to_json(const BoxKey& key, std::size_t dim) {
  return {{"depth", key.depth()}, {"path", key.path(dim)}};
}

BoxKey key_from_json(const json& j, std::size_t dim) {
  const auto path = j.at("path").get<std::vector<unsigned>>();
  if (path.size() != j.at("depth").get<unsigned>()) throw std::invalid_argument("key depth and path disagree");
  return BoxKey::from_path(dim, path);
}

json to_json(const TransitionMap& map) {
  const CoverLevel& level = map.level();
  json edges = json::object();
  for (std::size_t i = 0; i < level.size(); ++i) {
    json targets = json::array();
    for (std::size_t t : map.targets(i)) targets.push_back(level.active()[t]);
    edges[std::to_string(level.active()[i])] = std::move(targets);
  }
  return {{"depth", level.depth()}, {"edges", std::move(edges)}};
}

json to_json(const GapReport& gaps) {
  return {{"containment_samples", gaps.containment_samples},
          {"containment_violations", gaps.containment_violations.size()},
          {"overapprox_gap", gaps.overapprox_gap},
          {"overapprox_bound", gaps.overapprox_bound},
          {"neighbor_gap", gaps.neighbor_gap},
          {"neighbor_bound", gaps.neighbor_bound},
          {"defect_gap", gaps.defect_gap},
          {"defect_bound", gaps.defect_bound},
          {"sampling_low", gaps.sampling_low},
          {"sampling_high", gaps.sampling_high}};
}

json to_json(const LevelReport& report) {
  json j = {{"depth", report.depth},         {"rho", report.rho},
            {"h", report.h},                 {"r", report.r},
            {"boxes_in", report.boxes_in},   {"boxes_kept", report.boxes_kept},
            {"edges", report.edges}};
  if (report.gaps) j["gaps"] = to_json(*report.gaps);
  return j;
}

std::string box_records(const LevelResult& level) {
  std::string out;
  const CoverLevel& cover = *level.cover;
  for (std::uint64_t k : level.prune.kept) {
    const Box b = key_box(cover.root(), BoxKey(cover.depth(), k));
    json rec = {{"depth", cover.depth()}, {"index", k}, {"lo", b.lo()}, {"hi", b.hi()}};
    out += rec.dump();
    out += '\n';
  }
  return out;
}

json to_json(const Checkpoint& c) {
  return {{"depth", c.depth}, {"kept", c.kept}, {"config_hash", c.config_hash}};
}

Checkpoint checkpoint_from_json(const json& j) {
  Checkpoint c;
  c.depth = j.at("depth").get<unsigned>();
  c.kept = j.at("kept").get<std::vector<std::uint64_t>>();
  c.config_hash = j.at("config_hash").get<std::string>();
  return c;
}

namespace {

std::uint64_t parse_id(const std::string& s) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("node id '" + s + "' is not a nonnegative integer");
  }
  if (used != s.size() || s.empty() || s[0] == '-') {
    throw std::invalid_argument("node id '" + s + "' is not a nonnegative integer");
  }
  return v;
}

}  // namespace

std::map<std::uint64_t, std::vector<std::uint64_t>> edges_from_json(const json& j) {
  if (!j.is_object() || !j.contains("edges") || !j.at("edges").is_object()) {
    throw std::invalid_argument("graph must be an object with an \"edges\" object");
  }
  std::map<std::uint64_t, std::vector<std::uint64_t>> edges;
  for (const auto& [key, targets] : j.at("edges").items()) {
    if (!targets.is_array()) throw std::invalid_argument("targets of node " + key + " must be an array");
    auto& out = edges[parse_id(key)];
    for (const auto& t : targets) {
      if (!t.is_number_unsigned()) throw std::invalid_argument("targets must be nonnegative integers");
      out.push_back(t.get<std::uint64_t>());
    }
  }
  return edges;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

}  // namespace subdiv
