#include "subdiv/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "subdiv/io.hpp"
#include "subdiv/oracle.hpp"

namespace subdiv {

namespace {

std::atomic<bool> g_interrupt{false};

extern "C" void handle_sigint(int) { g_interrupt.store(true); }

class SigintGuard {
 public:
  SigintGuard() {
    g_interrupt.store(false);
    previous_ = std::signal(SIGINT, handle_sigint);
  }
  ~SigintGuard() { std::signal(SIGINT, previous_); }
  SigintGuard(const SigintGuard&) = delete;
  SigintGuard& operator=(const SigintGuard&) = delete;

 private:
  void (*previous_)(int) = SIG_DFL;
};

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<double> parse_numbers(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw ConfigError("bad number '" + item + "' in box");
    }
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
    if (used != item.size()) throw ConfigError("bad number '" + item + "' in box");
    out.push_back(v);
  }
  return out;
}

void apply_param(BuiltinParams& params, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("parameter '" + assignment + "' must be key=value");
  const std::string key = assignment.substr(0, eq);
  double value = 0.0;
  try {
    std::size_t used = 0;
    value = std::stod(assignment.substr(eq + 1), &used);
    if (used != assignment.size() - eq - 1) throw std::invalid_argument("trailing characters");
  } catch (const std::exception&) {
    throw ConfigError("parameter '" + key + "' needs a numeric value");
  }
  if (key == "henon.a") {
    params.henon_a = value;
  } else if (key == "henon.b") {
    params.henon_b = value;
  } else {
    throw ConfigError("unknown system parameter '" + key + "'");
  }
}

// Turns a JSON config into command line arguments for every key that the
// command line does not set itself.
std::vector<std::string> config_arguments(const json& config, const std::vector<std::string>& given) {
  if (!config.is_object()) throw ConfigError("config file must hold a JSON object");
  auto given_on_cli = [&](const std::string& flag) {
    return std::any_of(given.begin(), given.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
  };
  auto scalar = [](const json& v) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_float()) return format_double(v.get<double>());
    if (v.is_number()) return v.dump();
    throw ConfigError("config values must be strings, numbers or booleans");
  };
  std::vector<std::string> out;
  for (const auto& [key, value] : config.items()) {
    if (key == "params" || key.rfind("henon.", 0) == 0) {
      // System parameters come first so that --param on the command line wins.
      if (key == "params") {
        if (!value.is_object()) throw ConfigError("\"params\" must be an object");
        for (const auto& [pk, pv] : value.items()) {
          out.push_back("--param");
          out.push_back(pk + "=" + scalar(pv));
        }
      } else {
        out.push_back("--param");
        out.push_back(key + "=" + scalar(value));
      }
      continue;
    }
    const std::string flag = "--" + key;
    if (key == "config" || given_on_cli(flag)) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) out.push_back(flag);
    } else if (key == "q" && value.is_object()) {
      const Box b = box_from_json(value);
      std::string spec;
      for (std::size_t k = 0; k < b.dim(); ++k) spec += (k ? "," : "") + format_double(b.lo(k));
      spec += ':';
      for (std::size_t k = 0; k < b.dim(); ++k) spec += (k ? "," : "") + format_double(b.hi(k));
      out.push_back(flag);
      out.push_back(spec);
    } else if (value.is_array()) {
      for (const auto& v : value) {
        out.push_back(flag);
        out.push_back(scalar(v));
      }
    } else {
      out.push_back(flag);
      out.push_back(scalar(value));
    }
  }
  return out;
}

struct RunFlags {
  RunConfig config;
  std::vector<std::string> params;
  std::string config_file;
};

void add_run_flags(CLI::App* app, RunFlags& f) {
  RunConfig& c = f.config;
  app->add_option("--config", f.config_file, "JSON file with flag values (flags override it)");
  app->add_option("--system", c.system, "linmap2d, henon, halving1d, cubic1d or saddle2d")->required();
  app->add_option("--q", c.q, "root box as lo1,lo2,...:hi1,hi2,...")->required();
  app->add_option("--param", f.params, "system parameter key=value, e.g. henon.a=1.4");
  app->add_option("--depth", c.max_depth, "maximal subdivision depth")->capture_default_str();
  app->add_option("--samples-per-axis", c.scheme.samples_per_axis, "sample centers per axis (M)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--euler-substeps", c.scheme.euler_substeps, "Euler substeps per step (N)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--h0", c.scheme.h0, "initial time step")->capture_default_str();
  app->add_option("--h-decay", c.scheme.h_decay, "alpha in h_n = h0 2^(-alpha n)")->capture_default_str();
  app->add_option("--seed", c.scheme.seed, "seed of the sampled diagnostics")->capture_default_str();
  app->add_option("--threads", c.scheme.threads, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--box-budget", c.scheme.box_budget, "maximal number of boxes per level")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--diagnostic-samples", c.scheme.diagnostic_samples, "containment samples per box")
      ->capture_default_str();
  app->add_flag("--diagnostics", c.scheme.diagnostics, "record condition diagnostics per level");
  app->add_option("--out", c.out, "boxes JSONL file")->capture_default_str();
  app->add_option("--stats", c.stats, "stats JSON file")->capture_default_str();
}

void finish_flags(RunFlags& f) {
  for (const auto& p : f.params) apply_param(f.config.builtin, p);
}

struct Setup {
  Box Q;
  System sys;
};

Setup make_setup(const RunConfig& c) {
  const Box Q = parse_box(c.q);
  System sys = make_builtin(parse_builtin(c.system), Q, c.builtin);
  validate(c.scheme, sys, Q);
  return {Q, std::move(sys)};
}

bool is_flow(const System& sys) { return std::holds_alternative<ContinuousSystem>(sys); }

std::string read_existing(const std::string& path) {
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return {};
  return read_file(path);
}

// Keeps the JSONL lines and stats entries of levels up to `depth`, so that a
// resumed run ends with the same files as an uninterrupted one.
std::string jsonl_prefix(const std::string& content, unsigned depth) {
  std::string out;
  std::istringstream in(content);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (json::parse(line).at("depth").get<unsigned>() <= depth) out += line + '\n';
  }
  return out;
}

json stats_prefix(const std::string& content, unsigned depth) {
  json out = json::array();
  if (content.empty()) return out;
  for (const auto& rec : json::parse(content)) {
    if (rec.at("depth").get<unsigned>() <= depth) out.push_back(rec);
  }
  return out;
}

int cmd_run(const RunConfig& cfg) {
  const Setup setup = make_setup(cfg);
  const std::string hash = config_hash(cfg);

  std::optional<ResumePoint> resume;
  std::string jsonl;
  json stats = json::array();
  if (cfg.resume) {
    const Checkpoint c = checkpoint_from_json(json::parse(read_file(*cfg.resume)));
    if (c.config_hash != hash) {
      std::cerr << "error: checkpoint " << *cfg.resume << " was written with a different configuration\n";
      return kExitConfig;
    }
    resume = ResumePoint{c.depth, c.kept};
    jsonl = jsonl_prefix(read_existing(cfg.out), c.depth);
    stats = stats_prefix(read_existing(cfg.stats), c.depth);
    std::cerr << "resuming after depth " << c.depth << " (" << c.kept.size() << " boxes)\n";
  }

  std::ofstream out(cfg.out, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + cfg.out);
  out << jsonl;
  out.flush();
  write_file(cfg.stats, stats.dump(2) + "\n");

  SigintGuard guard;
  RunHooks hooks;
  hooks.interrupt = &g_interrupt;
  hooks.on_level = [&](const LevelResult& level) {
    const LevelReport& r = level.report;
    out << box_records(level);
    out.flush();
    stats.push_back(to_json(r));
    write_file(cfg.stats, stats.dump(2) + "\n");
    write_file(checkpoint_path(cfg.out, r.depth), to_json(Checkpoint{r.depth, level.prune.kept, hash}).dump() + "\n");
    std::cerr << "depth " << r.depth << ": kept " << r.boxes_kept << " of " << r.boxes_in << " boxes, "
              << r.edges << " edges, map " << r.map_ms << " ms, prune " << r.prune_ms << " ms\n";
  };

  const SubdivisionRun run = run_subdivision(setup.sys, setup.Q, cfg.max_depth, cfg.scheme, hooks, resume);
  std::cerr << "status: " << to_string(run.status) << "\n";
  switch (run.status) {
    case RunStatus::interrupted:
      return kExitInterrupted;
    case RunStatus::budget_exceeded:
      return kExitBudget;
    default:
      return kExitOk;
  }
}

struct Artifacts {
  std::vector<unsigned> depths;                               // levels listed in the stats file
  std::map<unsigned, std::vector<std::uint64_t>> kept;        // from the JSONL file
};

Artifacts load_artifacts(const RunConfig& cfg, const Box& Q) {
  Artifacts a;
  for (const auto& rec : json::parse(read_file(cfg.stats))) a.depths.push_back(rec.at("depth").get<unsigned>());
  if (a.depths.empty()) throw ConfigError("stats file lists no levels");
  for (std::size_t i = 0; i < a.depths.size(); ++i) {
    if (a.depths[i] != i) throw ConfigError("stats file levels are not 0, 1, 2, ...");
    a.kept[a.depths[i]];
  }
  std::istringstream in(read_file(cfg.out));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json rec = json::parse(line);
    const auto depth = rec.at("depth").get<unsigned>();
    const auto index = rec.at("index").get<std::uint64_t>();
    if (!a.kept.count(depth)) throw ConfigError("box record at depth " + std::to_string(depth) + " has no level");
    if (depth > max_key_depth(Q.dim()) || (index >> (depth * Q.dim())) != 0) {
      throw ConfigError("box record index out of range");
    }
    const Box expected = key_box(Q, BoxKey(depth, index));
    if (!(box_from_json(rec) == expected)) throw ConfigError("box record geometry does not match its index");
    a.kept[depth].push_back(index);
  }
  for (auto& [depth, keys] : a.kept) {
    std::sort(keys.begin(), keys.end());
    if (std::adjacent_find(keys.begin(), keys.end()) != keys.end()) throw ConfigError("duplicate box record");
  }
  const Checkpoint c = checkpoint_from_json(json::parse(read_file(checkpoint_path(cfg.out, a.depths.back()))));
  if (c.config_hash != config_hash(cfg)) throw ConfigError("artifacts were written with a different configuration");
  return a;
}

std::shared_ptr<const CoverLevel> cover_for(const Artifacts& a, const Box& Q, unsigned depth) {
  if (depth == 0) return std::make_shared<const CoverLevel>(CoverLevel::root_level(Q));
  const CoverLevel parent(Q, depth - 1, a.kept.at(depth - 1));
  return std::make_shared<const CoverLevel>(refine_cover(parent, a.kept.at(depth - 1)));
}

json point_json(const Point& p) { return p; }

ReferenceAttractor reference_for(const System& sys, const Box& Q, double resolution, unsigned threads) {
  if (const auto* ds = std::get_if<DiscreteSystem>(&sys); ds && ds->name == "henon") {
    return forward_orbit_points(*ds, Point{0.0, 0.0}, 1000, 10000);
  }
  OracleOptions options;
  options.threads = threads;
  return reference_attractor_points(sys, Q, resolution, options);
}

int cmd_check(const RunConfig& cfg, const std::string& mode, double resolution, unsigned global_depth,
              const std::string& verdict_path) {
  const Setup setup = make_setup(cfg);
  const Artifacts art = load_artifacts(cfg, setup.Q);
  const SchemeParams& scheme = cfg.scheme;

  json levels = json::array();
  bool pass = true;
  if (mode == "containment") {
    for (unsigned n : art.depths) {
      const TransitionMap map = build_transition(cover_for(art, setup.Q, n), setup.sys, scheme);
      const GapReport rep =
          check_containment_condition(map, setup.sys, scheme.diagnostic_samples, scheme.seed, scheme.threads);
      const bool replay = prune(map).kept == art.kept.at(n);
      json witnesses = json::array();
      for (std::size_t i = 0; i < std::min<std::size_t>(rep.containment_violations.size(), 10); ++i) {
        const auto& v = rep.containment_violations[i];
        witnesses.push_back({{"source", v.source}, {"witness", v.witness}, {"image", v.image}});
      }
      pass = pass && rep.containment_violations.empty();
      levels.push_back({{"depth", n},
                        {"samples", rep.containment_samples},
                        {"violations", rep.containment_violations.size()},
                        {"witnesses", witnesses},
                        {"replay_matches", replay}});
    }
  } else if (mode == "gaps") {
    std::optional<GapReport> previous;
    const double slack = 1e-12;
    for (unsigned n : art.depths) {
      const TransitionMap map = build_transition(cover_for(art, setup.Q, n), setup.sys, scheme);
      const GapReport g = measure_overapprox_gap(map, setup.sys, scheme.gap_samples_per_axis, scheme.threads);
      json rec = to_json(g);
      rec["depth"] = n;
      rec["total_gap"] = total_gap(g);
      bool ok = gaps_within_bounds(g, slack);
      if (n >= 3 && previous) ok = ok && gap_not_larger(*previous, g, slack);
      rec["pass"] = ok;
      pass = pass && ok;
      levels.push_back(std::move(rec));
      previous = g;
    }
  } else if (mode == "sandwich") {
    const ReferenceAttractor ref = reference_for(setup.sys, setup.Q, resolution, scheme.threads);
    for (unsigned n : art.depths) {
      const CoverLevel kept(setup.Q, n, art.kept.at(n));
      const std::vector<Point> missing = uncovered_points(kept, ref.points);
      json rec = {{"depth", n}, {"reference_points", ref.points.size()}, {"uncovered", missing.size()}};
      json witnesses = json::array();
      for (std::size_t i = 0; i < std::min<std::size_t>(missing.size(), 10); ++i) witnesses.push_back(point_json(missing[i]));
      rec["uncovered_witnesses"] = witnesses;
      bool ok = missing.empty();
      const double full = std::ldexp(1.0, static_cast<int>(n * setup.Q.dim()));
      if (n <= global_depth && full <= static_cast<double>(scheme.box_budget)) {
        const LevelResult global = run_global(setup.sys, setup.Q, n, scheme);
        std::vector<std::uint64_t> extra;
        std::set_difference(art.kept.at(n).begin(), art.kept.at(n).end(), global.prune.kept.begin(),
                            global.prune.kept.end(), std::back_inserter(extra));
        rec["global_checked"] = true;
        rec["extra_keys"] = extra;
        ok = ok && extra.empty();
      } else {
        rec["global_checked"] = false;
      }
      rec["pass"] = ok;
      pass = pass && ok;
      levels.push_back(std::move(rec));
    }
  } else {
    throw ConfigError("unknown check mode '" + mode + "'");
  }

  const json verdict = {{"mode", mode}, {"pass", pass}, {"levels", levels}};
  if (verdict_path.empty()) {
    std::cout << verdict.dump(2) << "\n";
  } else {
    write_file(verdict_path, verdict.dump(2) + "\n");
  }
  std::cerr << mode << " check " << (pass ? "passed" : "failed") << "\n";
  return pass ? kExitOk : kExitCheckFailed;
}

int cmd_prune_graph(const std::string& input, const std::string& output) {
  json graph;
  try {
    graph = json::parse(input == "-" ? std::string(std::istreambuf_iterator<char>(std::cin), {}) : read_file(input));
  } catch (const json::parse_error& e) {
    std::cerr << "error: malformed graph JSON: " << e.what() << "\n";
    return kExitConfig;
  }
  std::map<std::uint64_t, std::vector<std::uint64_t>> edges;
  try {
    edges = edges_from_json(graph);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  const PruneResult result = prune(IndexGraph::from_edges(edges));
  const json out = {{"kept", result.kept}};
  if (output.empty()) {
    std::cout << out.dump() << "\n";
  } else {
    write_file(output, out.dump() + "\n");
  }
  return kExitOk;
}

int cmd_oracle(const RunConfig& cfg, double resolution, const OracleOptions& options, std::size_t orbit_points,
               const std::string& output) {
  const Box Q = parse_box(cfg.q);
  const System sys = make_builtin(parse_builtin(cfg.system), Q, cfg.builtin);
  ReferenceAttractor ref;
  if (orbit_points > 0) {
    const auto* ds = std::get_if<DiscreteSystem>(&sys);
    if (!ds || !ds->forward) throw ConfigError("forward orbits need a discrete system with a forward map");
    ref = forward_orbit_points(*ds, Q.center(), 1000, orbit_points);
  } else {
    ref = reference_attractor_points(sys, Q, resolution, options);
  }
  const std::string csv = to_csv(ref);
  if (output.empty()) {
    std::cout << csv;
  } else {
    write_file(output, csv);
  }
  std::cerr << ref.points.size() << " reference points\n";
  return kExitOk;
}

// Finds the value following `flag` (either "--flag v" or "--flag=v").
std::optional<std::string> flag_value(const std::vector<std::string>& args, const std::string& flag) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == flag && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind(flag + "=", 0) == 0) return args[i].substr(flag.size() + 1);
  }
  return std::nullopt;
}

}  // namespace

Box parse_box(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos || spec.find(':', colon + 1) != std::string::npos) {
    throw ConfigError("box must be written lo1,...,lod:hi1,...,hid");
  }
  std::vector<double> lo = parse_numbers(spec.substr(0, colon));
  std::vector<double> hi = parse_numbers(spec.substr(colon + 1));
  if (lo.empty() || lo.size() != hi.size()) throw ConfigError("box corners need the same positive dimension");
  try {
    return {std::move(lo), std::move(hi)};
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

std::string config_hash(const RunConfig& c) {
  const BuiltinId id = parse_builtin(c.system);
  const Box Q = parse_box(c.q);
  json canon = {{"system", builtin_name(id)},
                {"q", to_json(Q)},
                {"samples_per_axis", c.scheme.samples_per_axis},
                {"seed", c.scheme.seed}};
  if (id == BuiltinId::henon) canon["params"] = {{"henon.a", c.builtin.henon_a}, {"henon.b", c.builtin.henon_b}};
  if (is_continuous(id)) {
    canon["euler_substeps"] = c.scheme.euler_substeps;
    canon["h0"] = c.scheme.h0;
    canon["h_decay"] = c.scheme.h_decay;
  }
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : canon.dump()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string checkpoint_path(const std::string& out, unsigned depth) {
  return out + ".ckpt." + std::to_string(depth) + ".json";
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return cli_main(args);
}

int cli_main(const std::vector<std::string>& input) {
  std::vector<std::string> args = input;
  try {
    // Splice config file values in right after the subcommand; explicit flags
    // are skipped there, so they always win.
    if (const auto path = flag_value(args, "--config"); path && !args.empty()) {
      json config;
      try {
        config = json::parse(read_file(*path));
      } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed config file: ") + e.what());
      }
      const auto extra = config_arguments(config, args);
      args.insert(args.begin() + 1, extra.begin(), extra.end());
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  CLI::App app{"Outer approximation of relative global attractors by box subdivision"};
  app.require_subcommand(1);

  RunFlags run_flags;
  CLI::App* run = app.add_subcommand("run", "run the subdivision scheme");
  add_run_flags(run, run_flags);
  std::string resume;
  run->add_option("--resume", resume, "checkpoint to continue from");

  RunFlags check_flags;
  CLI::App* check = app.add_subcommand("check", "replay the condition checks on run artifacts");
  add_run_flags(check, check_flags);
  std::string mode = "containment";
  double check_resolution = 0.0;
  unsigned global_depth = 6;
  std::string verdict_path;
  check->add_option("--mode", mode, "containment, gaps or sandwich")
      ->check(CLI::IsMember({"containment", "gaps", "sandwich"}))
      ->capture_default_str();
  check->add_option("--resolution", check_resolution, "reference grid spacing (default diam(Q)/64)");
  check->add_option("--global-depth", global_depth, "deepest level compared with the global scheme")
      ->capture_default_str();
  check->add_option("--verdict", verdict_path, "write the verdict JSON here instead of stdout");

  std::string graph_input;
  std::string graph_output;
  CLI::App* prune_graph = app.add_subcommand("prune-graph", "prune a user supplied graph");
  prune_graph->add_option("graph", graph_input, "graph JSON file, '-' for stdin")->required();
  prune_graph->add_option("--out", graph_output, "output file (default stdout)");

  RunConfig oracle_config;
  std::vector<std::string> oracle_params;
  std::string oracle_config_file;
  double oracle_resolution = 0.0;
  OracleOptions oracle_options;
  std::size_t orbit_points = 0;
  std::string oracle_output;
  CLI::App* oracle = app.add_subcommand("oracle", "reference points of the relative attractor as CSV");
  oracle->add_option("--config", oracle_config_file, "JSON file with flag values");
  oracle->add_option("--system", oracle_config.system, "built-in system")->required();
  oracle->add_option("--q", oracle_config.q, "root box as lo1,lo2,...:hi1,hi2,...")->required();
  oracle->add_option("--param", oracle_params, "system parameter key=value");
  oracle->add_option("--resolution", oracle_resolution, "grid spacing (default diam(Q)/64)");
  oracle->add_option("--iterations", oracle_options.iterations, "backward iterations (maps)")->capture_default_str();
  oracle->add_option("--horizon", oracle_options.time_horizon, "backward time (flows)")->capture_default_str();
  oracle->add_option("--orbit-points", orbit_points, "sample a forward orbit instead of a grid");
  oracle->add_option("--threads", oracle_options.threads, "worker threads")->check(CLI::PositiveNumber);
  oracle->add_option("--out", oracle_output, "CSV file (default stdout)");

  std::vector<char*> argv;
  std::string program = "subdiv";
  argv.push_back(program.data());
  for (auto& a : args) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*run) {
      finish_flags(run_flags);
      if (!resume.empty()) run_flags.config.resume = resume;
      return cmd_run(run_flags.config);
    }
    if (*check) {
      finish_flags(check_flags);
      const Box Q = parse_box(check_flags.config.q);
      const double res = check_resolution > 0.0 ? check_resolution : Q.diameter() / 64.0;
      return cmd_check(check_flags.config, mode, res, global_depth, verdict_path);
    }
    if (*prune_graph) return cmd_prune_graph(graph_input, graph_output);
    if (*oracle) {
      for (const auto& p : oracle_params) apply_param(oracle_config.builtin, p);
      const Box Q = parse_box(oracle_config.q);
      const double res = oracle_resolution > 0.0 ? oracle_resolution : Q.diameter() / 64.0;
      return cmd_oracle(oracle_config, res, oracle_options, orbit_points, oracle_output);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const json::exception& e) {
    std::cerr << "error: malformed JSON: " << e.what() << "\n";
    return kExitConfig;
  } catch (const BudgetError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBudget;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace subdiv
