// Command-line front end: run scenarios, benchmark planning-tick timing, and
// reproduce the success-rate table. Thin shell over the library; exit codes
// are the only channel CI consumes (0 success, 2 task failure, 1 error).
#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <json.hpp>

#include "rgrasp/sim.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rgrasp;

namespace {

struct RunSpec {
  std::string scenario;
  std::string planner = "ours";
  std::vector<std::string> overrides;
  std::string out_dir;
  std::string initial_config;
  int repetitions = 1;
  int seed = -1;  // -1: keep the scenario's seed
  bool deterministic = true;
  int jobs = 1;
};

PlannerKind planner_kind(const std::string& s) {
  if (s == "ours") return PlannerKind::ours;
  if (s == "linear") return PlannerKind::linear;
  throw ConfigError("unknown planner: " + s + " (expected ours|linear)");
}

Scene make_scene(const RunSpec& spec) {
  Scene scene = load_scene(spec.scenario);
  if (!spec.initial_config.empty()) {
    const auto it = scene.robot.named_configs.find(spec.initial_config);
    if (it == scene.robot.named_configs.end())
      throw ConfigError("unknown initial config: " + spec.initial_config);
    scene.q0 = it->second;
  }
  for (const std::string& kv : spec.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw ConfigError("override must be key=value: " + kv);
    apply_override(scene, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (spec.seed >= 0) scene.seed = static_cast<unsigned>(spec.seed);
  return scene;
}

SimOptions make_options(const RunSpec& spec) {
  SimOptions opt;
  opt.planner = planner_kind(spec.planner);
  opt.deterministic = spec.deterministic;
  return opt;
}

void print_summary(const std::string& label, const TraceSummary& s) {
  std::printf(
      "%s: %s  terr=%.4f m  t_succ=%.2f s  min_gamma=%.4f  min_dist=%.4f  "
      "tick mean=%.2f ms p95=%.2f ms  ticks=%d  overruns=%d\n",
      label.c_str(),
      s.collision ? "COLLISION" : (s.success ? "SUCCESS" : "TIMEOUT"),
      s.terminal_error, s.time_to_success, s.min_gamma, s.min_dist,
      s.mean_tick_ms, s.p95_tick_ms, s.ticks, s.overruns);
}

json summary_json(const TraceSummary& s) {
  json j;
  j["success"] = s.success;
  j["collision"] = s.collision;
  j["terminal_error"] = s.terminal_error;
  j["time_to_success"] =
      std::isfinite(s.time_to_success) ? s.time_to_success : -1.0;
  j["min_gamma"] = s.min_gamma;
  j["min_dist"] = s.min_dist;
  j["max_qp_residual"] = s.max_qp_residual;
  j["mean_tick_ms"] = s.mean_tick_ms;
  j["p95_tick_ms"] = s.p95_tick_ms;
  j["max_tick_ms"] = s.max_tick_ms;
  j["ticks"] = s.ticks;
  j["overruns"] = s.overruns;
  return j;
}

int cmd_run(const RunSpec& spec) {
  if (!spec.out_dir.empty()) fs::create_directories(spec.out_dir);
  bool all_success = true;
  json reps = json::array();
  auto one = [&spec](int rep) {
    Scene scene = make_scene(spec);
    if (spec.repetitions > 1)
      scene.seed = (spec.seed >= 0 ? spec.seed : scene.seed) + rep;
    return run_episode(scene, make_options(spec));
  };
  for (int rep = 0; rep < spec.repetitions; rep += spec.jobs) {
    std::vector<std::future<Trace>> batch;
    const int count = std::min(spec.jobs, spec.repetitions - rep);
    for (int k = 0; k < count; ++k)
      batch.push_back(std::async(std::launch::async, one, rep + k));
    for (int k = 0; k < count; ++k) {
      const Trace trace = batch[k].get();
      const TraceSummary s = evaluate_trace(trace);
      print_summary("rep " + std::to_string(rep + k), s);
      all_success = all_success && s.success;
      reps.push_back(summary_json(s));
      if (!spec.out_dir.empty()) {
        const std::string stem =
            spec.out_dir + "/rep" + std::to_string(rep + k);
        write_trace_csv(trace, stem + "_trace.csv");
        write_events_json(trace, s, stem + "_events.json");
      }
    }
  }
  if (!spec.out_dir.empty()) {
    json j;
    j["scenario"] = spec.scenario;
    j["planner"] = spec.planner;
    j["repetitions"] = reps;
    std::ofstream out(spec.out_dir + "/summary.json");
    out << j.dump(2) << "\n";
  }
  return all_success ? 0 : 2;
}

int cmd_bench(const RunSpec& spec, int min_ticks) {
  // Accumulate planning ticks across repeated episodes (distinct seeds) until
  // the sample is large enough for a stable p95.
  std::vector<double> wall;
  double max_resid = 0.0;
  int overruns = 0;
  int episode = 0;
  bool any_failure = false;
  while (static_cast<int>(wall.size()) < min_ticks) {
    Scene scene = make_scene(spec);
    scene.seed = (spec.seed >= 0 ? spec.seed : 1) + episode;
    const Trace trace = run_episode(scene, make_options(spec));
    const TraceSummary s = evaluate_trace(trace);
    any_failure = any_failure || !s.success;
    for (const TickRecord& t : trace.ticks)
      if (!t.skipped) wall.push_back(t.wall_ms);
    max_resid = std::max(max_resid, s.max_qp_residual);
    overruns += s.overruns;
    ++episode;
    if (episode > 200) throw ConfigError("bench: scenario produces too few ticks");
  }
  std::sort(wall.begin(), wall.end());
  const int n = static_cast<int>(wall.size());
  const double mean =
      std::accumulate(wall.begin(), wall.end(), 0.0) / n;
  const double p95 = wall[std::max(0, static_cast<int>(std::ceil(0.95 * n)) - 1)];
  const double worst = wall.back();
  const double rate_hz = 1000.0 / std::max(p95, 1e-9);
  std::printf(
      "bench: %d ticks over %d episodes  mean=%.3f ms  p95=%.3f ms  max=%.3f ms"
      "  p95 planning rate=%.1f Hz  max residual=%.2e\n",
      n, episode, mean, p95, worst, rate_hz, max_resid);
  if (!spec.out_dir.empty()) {
    fs::create_directories(spec.out_dir);
    json j;
    j["scenario"] = spec.scenario;
    j["planner"] = spec.planner;
    j["ticks"] = n;
    j["episodes"] = episode;
    j["mean_ms"] = mean;
    j["p95_ms"] = p95;
    j["max_ms"] = worst;
    j["p95_rate_hz"] = rate_hz;
    j["max_qp_residual"] = max_resid;
    j["overruns"] = overruns;
    std::ofstream out(spec.out_dir + "/bench.json");
    out << j.dump(2) << "\n";
  }
  return any_failure ? 2 : 0;
}

int cmd_table1(const std::string& suite_dir, const RunSpec& base) {
  const std::vector<std::string> shapes = {"box", "bowl", "dish", "mug",
                                           "wineglass"};
  const std::vector<std::string> poses = {"center_up", "left_bottom",
                                          "right_bottom"};
  const std::vector<std::string> planners = {"linear", "ours"};

  struct Cell {
    int success = 0, total = 0;
  };
  std::map<std::string, std::map<std::string, Cell>> table;

  struct Job {
    std::string shape, planner, pose;
  };
  std::vector<Job> jobs;
  for (const auto& shape : shapes)
    for (const auto& planner : planners)
      for (const auto& pose : poses) jobs.push_back({shape, planner, pose});

  auto one = [&](const Job& job) {
    RunSpec spec = base;
    spec.scenario = suite_dir + "/" + job.shape + ".json";
    spec.planner = job.planner;
    spec.initial_config = job.pose;
    const Trace trace = run_episode(make_scene(spec), make_options(spec));
    return evaluate_trace(trace).success;
  };
  for (size_t i = 0; i < jobs.size(); i += base.jobs) {
    std::vector<std::future<bool>> batch;
    const size_t count = std::min<size_t>(base.jobs, jobs.size() - i);
    for (size_t k = 0; k < count; ++k)
      batch.push_back(std::async(std::launch::async, one, jobs[i + k]));
    for (size_t k = 0; k < count; ++k) {
      const Job& job = jobs[i + k];
      Cell& cell = table[job.shape][job.planner];
      cell.total += 1;
      cell.success += batch[k].get() ? 1 : 0;
    }
  }

  std::printf("| shape | linear | ours |\n|---|---|---|\n");
  bool ours_all = true;
  std::string csv = "shape,linear,ours\n";
  for (const auto& shape : shapes) {
    const Cell lin = table[shape]["linear"];
    const Cell ours = table[shape]["ours"];
    const double lp = 100.0 * lin.success / lin.total;
    const double op = 100.0 * ours.success / ours.total;
    std::printf("| %s | %.1f%% | %.1f%% |\n", shape.c_str(), lp, op);
    csv += shape + "," + std::to_string(lp) + "," + std::to_string(op) + "\n";
    ours_all = ours_all && ours.success == ours.total;
  }
  if (!base.out_dir.empty()) {
    fs::create_directories(base.out_dir);
    std::ofstream out(base.out_dir + "/table1.csv");
    out << csv;
  }
  return ours_all ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reactive grasping controller harness"};
  app.require_subcommand(1);

  RunSpec spec;
  int min_ticks = 1000;
  std::string suite_dir;
  bool threaded = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--planner", spec.planner, "ours|linear")
        ->check(CLI::IsMember({"ours", "linear"}));
    cmd->add_option("--set", spec.overrides,
                    "parameter override key=value (repeatable)");
    cmd->add_option("--seed", spec.seed, "episode seed (>=0)");
    cmd->add_option("--out", spec.out_dir, "output directory for artifacts");
    cmd->add_flag("--threaded", threaded,
                  "real-time two-thread mode instead of deterministic");
    cmd->add_option("--jobs", spec.jobs, "parallel episodes")
        ->check(CLI::PositiveNumber);
  };

  CLI::App* run = app.add_subcommand("run", "run one scenario");
  run->add_option("scenario", spec.scenario, "scenario JSON path")->required();
  run->add_option("--initial-config", spec.initial_config,
                  "named robot start pose");
  run->add_option("--reps", spec.repetitions, "repetitions (seeded)")
      ->check(CLI::PositiveNumber);
  add_common(run);

  CLI::App* bench = app.add_subcommand("bench", "planning-rate benchmark");
  bench->add_option("scenario", spec.scenario, "scenario JSON path")->required();
  bench->add_option("--min-ticks", min_ticks, "minimum tick sample size")
      ->check(CLI::PositiveNumber);
  add_common(bench);

  CLI::App* table = app.add_subcommand("table1", "success-rate table");
  table->add_option("suite_dir", suite_dir, "directory with the shape scenarios")
      ->required();
  add_common(table);

  CLI11_PARSE(app, argc, argv);
  spec.deterministic = !threaded;

  try {
    if (run->parsed()) return cmd_run(spec);
    if (bench->parsed()) return cmd_bench(spec, min_ticks);
    return cmd_table1(suite_dir, spec);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
