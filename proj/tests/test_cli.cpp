#include <csignal>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <fcntl.h>

#include <sys/wait.h>
#include <unistd.h>

#include "doctest.h"
#include "subdiv/cli.hpp"
#include "subdiv/io.hpp"
#include "support.hpp"

using namespace subdiv;
using testing_support::TempDir;

namespace {

std::vector<json> read_jsonl(const std::string& path) {
  std::vector<json> out;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(json::parse(line));
  }
  return out;
}

std::vector<json> records_at(const std::vector<json>& recs, unsigned depth) {
  std::vector<json> out;
  for (const auto& r : recs) {
    if (r.at("depth").get<unsigned>() == depth) out.push_back(r);
  }
  return out;
}

bool covered(const std::vector<json>& recs, const Point& p) {
  for (const auto& r : recs) {
    if (box_from_json(r).contains(p)) return true;
  }
  return false;
}

int run(std::vector<std::string> args) { return cli_main(args); }

}  // namespace

TEST_CASE("box syntax") {
  CHECK(parse_box("-1:1") == Box({-1.0}, {1.0}));
  CHECK(parse_box("-1,-2:1,2.5") == Box({-1.0, -2.0}, {1.0, 2.5}));
  CHECK_THROWS_AS(parse_box("-1,-2:1"), ConfigError);
  CHECK_THROWS_AS(parse_box("1:-1"), ConfigError);
  CHECK_THROWS_AS(parse_box("a:1"), ConfigError);
  CHECK_THROWS_AS(parse_box("0:1:2"), ConfigError);
  CHECK_THROWS_AS(parse_box(":"), ConfigError);
}

TEST_CASE("config hash ignores depth, threads, budget and paths") {
  RunConfig a;
  a.system = "halving1d";
  a.q = "-1:1";
  RunConfig b = a;
  b.max_depth = 3;
  b.scheme.threads = 4;
  b.scheme.box_budget = 10;
  b.out = "elsewhere.jsonl";
  CHECK(config_hash(a) == config_hash(b));
  b.q = "-1:2";
  CHECK(config_hash(a) != config_hash(b));
  RunConfig c = a;
  c.scheme.samples_per_axis = 2;
  CHECK(config_hash(a) != config_hash(c));
  RunConfig d = a;
  d.system = "cubic1d";
  RunConfig e = d;
  e.scheme.h0 = 0.05;
  CHECK(config_hash(d) != config_hash(e));
}

TEST_CASE("run writes one record per kept box per level") {
  TempDir dir("run");
  const std::string out = dir.file("boxes.jsonl"), stats = dir.file("stats.json");
  REQUIRE(run({"run", "--system", "halving1d", "--q", "-1:1", "--depth", "8", "--samples-per-axis", "1", "--out",
               out, "--stats", stats}) == kExitOk);
  const auto recs = read_jsonl(out);
  const json st = json::parse(read_file(stats));
  REQUIRE(st.size() == 9);
  std::size_t total = 0;
  for (const auto& level : st) total += level.at("boxes_kept").get<std::size_t>();
  CHECK(recs.size() == total);
  const double rho8 = 2.0 / 256;
  const auto last = records_at(recs, 8);
  REQUIRE_FALSE(last.empty());
  for (const auto& r : last) CHECK(point_box_distance(Point{0.0}, box_from_json(r)) <= 8 * rho8);
  for (const auto& r : recs) {
    CHECK(r.size() == 4);
    const Box b = box_from_json(r);
    CHECK(b == key_box(Box({-1.0}, {1.0}), BoxKey(r.at("depth"), r.at("index"))));
  }
  for (unsigned n = 0; n <= 8; ++n) CHECK(std::filesystem::exists(checkpoint_path(out, n)));
  const Checkpoint c = checkpoint_from_json(json::parse(read_file(checkpoint_path(out, 8))));
  CHECK(c.depth == 8);
  CHECK(c.kept.size() == last.size());
}

TEST_CASE("saddle run keeps the unstable axis") {
  TempDir dir("saddle");
  const std::string out = dir.file("boxes.jsonl"), stats = dir.file("stats.json");
  REQUIRE(run({"run", "--system", "saddle2d", "--q", "-1,-1:1,1", "--depth", "6", "--h0", "0.2", "--h-decay", "0.5",
               "--euler-substeps", "1", "--out", out, "--stats", stats}) == kExitOk);
  const auto recs = read_jsonl(out);
  for (unsigned n = 0; n <= 6; ++n) {
    const auto level = records_at(recs, n);
    for (int i = 0; i < 40; ++i) CHECK(covered(level, Point{-1.0 + 2.0 * i / 39.0, 0.0}));
  }
  const json st = json::parse(read_file(stats));
  double previous = INFINITY;
  for (const auto& level : st) {
    CHECK(level.at("boxes_kept").get<std::size_t>() <= level.at("boxes_in").get<std::size_t>());
    CHECK(level.at("r").get<double>() < previous);
    previous = level.at("r").get<double>();
  }
}

TEST_CASE("depth zero writes the root box only") {
  TempDir dir("zero");
  const std::string out = dir.file("b.jsonl");
  REQUIRE(run({"run", "--system", "linmap2d", "--q", "-1,-1:1,1", "--depth", "0", "--out", out, "--stats",
               dir.file("s.json")}) == kExitOk);
  const auto recs = read_jsonl(out);
  REQUIRE(recs.size() == 1);
  CHECK(box_from_json(recs[0]) == Box({-1.0, -1.0}, {1.0, 1.0}));
  CHECK(recs[0].at("index") == 0);
}

TEST_CASE("configuration errors exit with status 2") {
  TempDir dir("errors");
  const std::string out = dir.file("b.jsonl"), stats = dir.file("s.json");
  CHECK(run({"run", "--system", "nosuch", "--q", "-1:1", "--out", out, "--stats", stats}) == kExitConfig);
  CHECK(run({"run", "--system", "halving1d", "--q", "-1", "--out", out, "--stats", stats}) == kExitConfig);
  CHECK(run({"run", "--system", "linmap2d", "--q", "-1:1", "--out", out, "--stats", stats}) == kExitConfig);
  CHECK(run({"run", "--system", "cubic1d", "--q", "-1.5:1.5", "--h0", "0.2", "--out", out, "--stats", stats}) ==
        kExitConfig);
  CHECK(run({"run", "--system", "cubic1d", "--q", "-1.5:1.5", "--h0", "0.05", "--h-decay", "1.5", "--out", out,
             "--stats", stats}) == kExitConfig);
  CHECK(run({"run", "--system", "halving1d", "--q", "-1:1", "--samples-per-axis", "0", "--out", out, "--stats",
             stats}) == kExitConfig);
  CHECK(run({"run", "--system", "henon", "--q", "-2,-2:2,2", "--param", "henon.c=1", "--out", out, "--stats",
             stats}) == kExitConfig);
  CHECK(run({"run", "--q", "-1:1"}) == kExitConfig);
  CHECK(run({"frobnicate"}) == kExitConfig);
  CHECK(run({"run", "--system", "halving1d", "--q", "-1:1", "--config", dir.file("missing.json")}) == kExitConfig);
}

TEST_CASE("config file values apply unless a flag overrides them") {
  TempDir dir("config");
  const std::string cfg = dir.file("cfg.json");
  const std::string out = dir.file("b.jsonl"), stats = dir.file("s.json");
  write_file(cfg, json{{"system", "halving1d"},
                       {"q", "-1:1"},
                       {"depth", 5},
                       {"out", out},
                       {"stats", stats},
                       {"diagnostics", true}}
                      .dump());
  REQUIRE(run({"run", "--config", cfg, "--depth", "3"}) == kExitOk);
  const json st = json::parse(read_file(stats));
  CHECK(st.size() == 4);
  CHECK(st.back().contains("gaps"));

  write_file(cfg, json{{"system", "henon"}, {"q", {{"lo", {-2, -2}}, {"hi", {2, 2}}}}, {"params", {{"henon.a", 1.3}}},
                       {"depth", 2}, {"out", out}, {"stats", stats}}
                      .dump());
  REQUIRE(run({"run", "--config", cfg}) == kExitOk);
  RunConfig expect;
  expect.system = "henon";
  expect.q = "-2,-2:2,2";
  expect.builtin.henon_a = 1.3;
  CHECK(checkpoint_from_json(json::parse(read_file(checkpoint_path(out, 2)))).config_hash == config_hash(expect));
  REQUIRE(run({"run", "--config", cfg, "--param", "henon.a=1.4"}) == kExitOk);
  expect.builtin.henon_a = 1.4;
  CHECK(checkpoint_from_json(json::parse(read_file(checkpoint_path(out, 2)))).config_hash == config_hash(expect));

  write_file(cfg, "{ not json");
  CHECK(run({"run", "--config", cfg}) == kExitConfig);
  write_file(cfg, json{{"system", "halving1d"}, {"q", "-1:1"}, {"no-such-flag", 3}}.dump());
  CHECK(run({"run", "--config", cfg}) == kExitConfig);
}

TEST_CASE("budget overflow exits with status 3 after flushing finished levels") {
  TempDir dir("budget");
  const std::string out = dir.file("b.jsonl"), stats = dir.file("s.json");
  CHECK(run({"run", "--system", "linmap2d", "--q", "-1,-1:1,1", "--depth", "8", "--box-budget", "300", "--out", out,
             "--stats", stats}) == kExitBudget);
  const json st = json::parse(read_file(stats));
  CHECK(st.size() == 5);
  CHECK(records_at(read_jsonl(out), 4).size() == st.back().at("boxes_kept").get<std::size_t>());
}

TEST_CASE("outputs are byte-identical for any thread count") {
  TempDir dir("det");
  std::string jsonl[2], stats[2];
  const char* threads[] = {"1", "4"};
  for (int i = 0; i < 2; ++i) {
    const std::string out = dir.file("b" + std::to_string(i) + ".jsonl");
    const std::string st = dir.file("s" + std::to_string(i) + ".json");
    REQUIRE(run({"run", "--system", "cubic1d", "--q", "-1.5:1.5", "--depth", "6", "--h0", "0.08", "--diagnostics",
                 "--threads", threads[i], "--seed", "5", "--out", out, "--stats", st}) == kExitOk);
    jsonl[i] = read_file(out);
    stats[i] = read_file(st);
  }
  CHECK(jsonl[0] == jsonl[1]);
  CHECK(stats[0] == stats[1]);
}

TEST_CASE("check subcommand") {
  TempDir dir("check");
  const std::string out = dir.file("b.jsonl"), stats = dir.file("s.json"), verdict = dir.file("v.json");
  const std::vector<std::string> base{"--system", "linmap2d", "--q", "-1,-1:1,1", "--depth", "5",
                                      "--out",    out,        "--stats", stats};
  auto with = [&](std::vector<std::string> head, std::vector<std::string> tail = {}) {
    head.insert(head.end(), base.begin(), base.end());
    head.insert(head.end(), tail.begin(), tail.end());
    return head;
  };
  REQUIRE(run(with({"run"})) == kExitOk);

  SUBCASE("containment") {
    CHECK(run(with({"check", "--mode", "containment", "--verdict", verdict})) == kExitOk);
    const json v = json::parse(read_file(verdict));
    CHECK(v.at("pass") == true);
    CHECK(v.at("levels").size() == 6);
    for (const auto& level : v.at("levels")) {
      CHECK(level.at("violations") == 0);
      CHECK(level.at("replay_matches") == true);
    }
  }
  SUBCASE("gaps") {
    CHECK(run(with({"check", "--mode", "gaps", "--verdict", verdict})) == kExitOk);
    const json v = json::parse(read_file(verdict));
    CHECK(v.at("pass") == true);
    double previous = INFINITY;
    for (const auto& level : v.at("levels")) {
      CHECK(level.at("pass") == true);
      const double g = level.at("total_gap");
      if (level.at("depth").get<unsigned>() >= 3) CHECK(g <= previous);
      previous = g;
    }
  }
  SUBCASE("sandwich passes on fresh artifacts") {
    CHECK(run(with({"check", "--mode", "sandwich", "--verdict", verdict})) == kExitOk);
    const json v = json::parse(read_file(verdict));
    for (const auto& level : v.at("levels")) CHECK(level.at("global_checked") == true);
  }
  SUBCASE("sandwich fails with a witness once a box is removed") {
    auto recs = read_jsonl(out);
    // (0, 0.5) is a box corner, so every box touching it has to go.
    std::string tampered;
    bool dropped = false;
    for (const auto& r : recs) {
      if (r.at("depth") == 5 && box_from_json(r).contains(Point{0.0, 0.5})) {
        dropped = true;
        continue;
      }
      tampered += r.dump() + "\n";
    }
    REQUIRE(dropped);
    write_file(out, tampered);
    CHECK(run(with({"check", "--mode", "sandwich", "--verdict", verdict})) == kExitCheckFailed);
    const json v = json::parse(read_file(verdict));
    CHECK(v.at("pass") == false);
    const json& last = v.at("levels").back();
    CHECK(last.at("uncovered").get<std::size_t>() > 0);
    CHECK_FALSE(last.at("uncovered_witnesses").empty());
  }
  SUBCASE("a different configuration is refused") {
    CHECK(run(with({"check", "--mode", "containment"}, {"--samples-per-axis", "2"})) == kExitConfig);
  }
  SUBCASE("unknown modes are refused") { CHECK(run(with({"check", "--mode", "everything"})) == kExitConfig); }
}

TEST_CASE("check on flows") {
  TempDir dir("checkflow");
  const std::string out = dir.file("b.jsonl"), stats = dir.file("s.json"), verdict = dir.file("v.json");
  const std::vector<std::string> base{"--system", "cubic1d", "--q", "-1.5:1.5", "--depth", "5", "--h0", "0.08",
                                      "--diagnostic-samples", "10", "--out", out, "--stats", stats};
  std::vector<std::string> args{"run"};
  args.insert(args.end(), base.begin(), base.end());
  REQUIRE(run(args) == kExitOk);
  for (const char* mode : {"containment", "gaps", "sandwich"}) {
    std::vector<std::string> check{"check", "--mode", mode, "--verdict", verdict};
    check.insert(check.end(), base.begin(), base.end());
    CHECK(run(check) == kExitOk);
  }
}

TEST_CASE("prune-graph subcommand") {
  TempDir dir("graph");
  const std::string in = dir.file("g.json"), out = dir.file("k.json");
  write_file(in, R"({"edges":{"0":[1],"1":[],"2":[2]}})");
  REQUIRE(run({"prune-graph", in, "--out", out}) == kExitOk);
  CHECK(json::parse(read_file(out)) == json::parse(R"({"kept":[2]})"));

  write_file(in, R"({"edges":{"3":[3],"7":[7],"9":[9]}})");
  REQUIRE(run({"prune-graph", in, "--out", out}) == kExitOk);
  CHECK(json::parse(read_file(out)) == json::parse(R"({"kept":[3,7,9]})"));

  write_file(in, R"({"edges":{}})");
  REQUIRE(run({"prune-graph", in, "--out", out}) == kExitOk);
  CHECK(read_file(out) == "{\"kept\":[]}\n");

  write_file(in, R"({"edges":{"0":[1)");
  CHECK(run({"prune-graph", in}) == kExitConfig);
  write_file(in, R"({"edges":{"x":[1]}})");
  CHECK(run({"prune-graph", in}) == kExitConfig);
  write_file(in, R"({"edges":{"0":[-1]}})");
  CHECK(run({"prune-graph", in}) == kExitConfig);
  write_file(in, R"([1,2])");
  CHECK(run({"prune-graph", in}) == kExitConfig);
}

TEST_CASE("oracle subcommand writes csv") {
  TempDir dir("oracle");
  const std::string out = dir.file("o.csv");
  REQUIRE(run({"oracle", "--system", "halving1d", "--q", "-1:1", "--resolution", "0.125", "--out", out}) == kExitOk);
  CHECK(read_file(out) == "0\n");
  REQUIRE(run({"oracle", "--system", "henon", "--q", "-2,-2:2,2", "--orbit-points", "50", "--out", out}) == kExitOk);
  std::istringstream lines(read_file(out));
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) ++count;
  CHECK(count == 50);
}

TEST_CASE("an interrupted run flushes and resumes to the same files") {
  TempDir dir("interrupt");
  const std::string ref_out = dir.file("ref.jsonl"), ref_stats = dir.file("ref.json");
  const std::vector<std::string> common{"--system", "henon", "--q", "-2,-2:2,2"};
  auto args = [&](std::vector<std::string> extra) {
    std::vector<std::string> a{"run"};
    a.insert(a.end(), common.begin(), common.end());
    a.insert(a.end(), extra.begin(), extra.end());
    return a;
  };
  REQUIRE(run(args({"--depth", "7", "--out", ref_out, "--stats", ref_stats})) == kExitOk);

  const std::string out = dir.file("b.jsonl"), stats = dir.file("s.json");
  const pid_t pid = fork();
  REQUIRE(pid >= 0);
  if (pid == 0) {
    std::vector<std::string> a = args({"--depth", "11", "--out", out, "--stats", stats});
    std::vector<char*> argv;
    std::string prog = SUBDIV_CLI_PATH;
    argv.push_back(prog.data());
    for (auto& s : a) argv.push_back(s.data());
    argv.push_back(nullptr);
    const int devnull = ::open("/dev/null", O_WRONLY);
    if (devnull >= 0) dup2(devnull, STDERR_FILENO);
    execv(prog.c_str(), argv.data());
    _exit(127);
  }
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(60);
  while (!std::filesystem::exists(checkpoint_path(out, 5)) && std::chrono::steady_clock::now() < deadline) {
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
  kill(pid, SIGINT);
  int status = 0;
  waitpid(pid, &status, 0);
  REQUIRE(WIFEXITED(status));
  CHECK(WEXITSTATUS(status) == kExitInterrupted);
  const json partial = json::parse(read_file(stats));
  CHECK(partial.size() >= 6);
  CHECK(partial.size() < 12);

  REQUIRE(run(args({"--depth", "7", "--out", out, "--stats", stats, "--resume", checkpoint_path(out, 5)})) == kExitOk);
  CHECK(read_file(out) == read_file(ref_out));
  CHECK(read_file(stats) == read_file(ref_stats));

  // A checkpoint from another configuration is refused.
  CHECK(run(args({"--depth", "7", "--samples-per-axis", "2", "--out", out, "--stats", stats, "--resume",
                  checkpoint_path(out, 5)})) == kExitConfig);
}
