// Command-line front end: simulate, train, evaluate, ablate, report, gen-trace.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "rlstorage/harness.hpp"

namespace fs = std::filesystem;
using namespace rlstorage;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Options {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
};

ExperimentSpec load_spec(const Options& o) {
  Config c = o.config_path.empty() ? Config{} : Config::load(o.config_path);
  for (const auto& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    c.set(trim(std::string_view(kv).substr(0, eq)), trim(std::string_view(kv).substr(eq + 1)));
  }
  ExperimentSpec spec = experiment_from_config(c);
  if (o.seed) spec.seeds = {*o.seed};
  return spec;
}

void write_file(const fs::path& path, const std::string& data) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << data;
  if (!f) throw std::runtime_error("failed writing " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path agent_path(const fs::path& dir, std::uint64_t seed) {
  return dir / ("agent_seed" + std::to_string(seed) + ".bin");
}

void write_report(const Options& o, const Report& report) {
  const fs::path out(o.out);
  write_file(out / "summary.csv", emit_report(report, ReportFormat::Csv));
  write_file(out / "metrics.csv", metrics_csv(report));
  write_file(out / "plotdata.dat", emit_report(report, ReportFormat::PlotData));
  const std::string text = emit_report(report, ReportFormat::Text);
  write_file(out / "report.txt", text);
  std::cout << text;
}

int cmd_simulate(const Options& o, const std::string& trace_path) {
  ExperimentSpec spec = load_spec(o);
  if (!trace_path.empty()) spec.workload.trace_path = trace_path;
  spec.agent = AgentKind::None;
  std::vector<std::unique_ptr<Agent>> agents;
  for (std::size_t i = 0; i < spec.seeds.size(); ++i) agents.push_back(std::make_unique<NoopAgent>());
  write_report(o, evaluate_agents(spec, agents));
  return kExitOk;
}

int cmd_train(const Options& o) {
  const ExperimentSpec spec = load_spec(o);
  if (spec.agent != AgentKind::Tabular && spec.agent != AgentKind::Dqn)
    throw ConfigError("train needs experiment.agent = tabular or dqn");
  std::string log = "seed,episode,intervals,reward_sum,discounted_return,throughput_bps,final_readahead,"
                    "final_queue_depth,final_cache_pages\n";
  for (std::uint64_t seed : spec.seeds) {
    std::vector<EpisodeResult> history;
    auto agent = train_agent(spec, seed, &history);
    const auto bytes = save_agent(*agent);
    write_file(agent_path(o.out, seed), std::string(bytes.begin(), bytes.end()));
    for (std::size_t ep = 0; ep < history.size(); ++ep) {
      const auto& r = history[ep];
      char buf[256];
      std::snprintf(buf, sizeof buf, "%llu,%zu,%zu,%.9g,%.9g,%.9g,%u,%u,%u\n", static_cast<unsigned long long>(seed),
                    ep, r.intervals.size(), r.reward_sum, r.discounted_return, r.throughput(),
                    r.final_config.readahead_pages, r.final_config.queue_depth, r.final_config.cache_pages);
      log += buf;
    }
    std::cout << "seed " << seed << ": trained " << history.size() << " episodes, agent " << bytes.size()
              << " bytes -> " << agent_path(o.out, seed).string() << "\n";
  }
  write_file(fs::path(o.out) / "train_log.csv", log);
  return kExitOk;
}

int cmd_evaluate(const Options& o, const std::string& agent_dir) {
  const ExperimentSpec spec = load_spec(o);
  if (agent_dir.empty()) {
    write_report(o, run_experiment(spec));
    return kExitOk;
  }
  std::vector<std::unique_ptr<Agent>> agents;
  for (std::uint64_t seed : spec.seeds) {
    const std::string bytes = read_file(agent_path(agent_dir, seed));
    agents.push_back(load_agent(std::span(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size())));
  }
  write_report(o, evaluate_agents(spec, agents));
  return kExitOk;
}

int cmd_ablate(const Options& o, const std::vector<std::size_t>& depths) {
  const ExperimentSpec spec = load_spec(o);
  const fs::path out(o.out);
  if (!depths.empty()) {
    const std::string csv = emit_depth_ablation(run_depth_ablation(spec, depths));
    write_file(out / "depth_ablation.csv", csv);
    std::cout << csv;
    return kExitOk;
  }
  const std::string csv = emit_ablation(run_ablation(spec));
  write_file(out / "ablation.csv", csv);
  std::cout << csv;
  return kExitOk;
}

// Renders a CSV file as an aligned table.
int cmd_report(const Options& o, const std::string& input, const std::string& format) {
  const fs::path path = input.empty() ? fs::path(o.out) / "summary.csv" : fs::path(input);
  const std::string text = read_file(path);
  if (format == "csv") {
    std::cout << text;
    return kExitOk;
  }
  if (format != "text") throw ConfigError("report --format must be csv or text");
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) rows.push_back(split_list(line));
  std::vector<std::size_t> width;
  for (const auto& r : rows)
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (width.size() <= i) width.push_back(0);
      width[i] = std::max(width[i], r[i].size());
    }
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t i = 0; i < r.size(); ++i) {
      std::string cell = r[i].empty() ? "-" : r[i];
      cell.resize(std::max(width[i], cell.size()), ' ');
      line += cell + (i + 1 < r.size() ? "  " : "");
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    std::cout << line << "\n";
  }
  return kExitOk;
}

int cmd_gen_trace(const Options& o, const std::string& path) {
  const ExperimentSpec spec = load_spec(o);
  const Trace t = make_trace(spec.workload, DeviceProfile::preset(spec.device), spec.seeds.front());
  save_trace(t, path);
  std::cout << "wrote " << t.requests.size() << " requests to " << path << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Storage tuning simulator with reinforcement-learning agents"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config_path, "Config file (section.key = value)")->check(CLI::ExistingFile);
  app.add_option("--set", o.overrides, "Override a config key: key=value");
  app.add_option("--seed", o.seed, "Run a single seed instead of experiment.seeds");
  app.add_option("--out", o.out, "Output directory")->capture_default_str();

  std::string trace_path, agent_dir, input, format = "text", gen_path;
  std::vector<std::size_t> depths;
  auto* simulate = app.add_subcommand("simulate", "Run the static baseline (and heuristic) only");
  simulate->add_option("--trace", trace_path, "Replay a trace file instead of the workload preset");
  auto* train = app.add_subcommand("train", "Train one agent per seed and save it");
  auto* evaluate = app.add_subcommand("evaluate", "Evaluate agents against the baselines");
  evaluate->add_option("--agents", agent_dir, "Directory of saved agents (trains in-process if omitted)");
  auto* ablate = app.add_subcommand("ablate", "Feedback/collector ablation, or DQN depth ablation");
  ablate->add_option("--depths", depths, "DQN weight-layer counts, e.g. --depths 3 4 5");
  auto* report = app.add_subcommand("report", "Print a stored summary CSV");
  report->add_option("--input", input, "CSV file (default <out>/summary.csv)");
  report->add_option("--format", format, "text or csv")->capture_default_str();
  auto* gen = app.add_subcommand("gen-trace", "Write the workload trace for the first seed");
  gen->add_option("path", gen_path, "Output trace file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*simulate) return cmd_simulate(o, trace_path);
    if (*train) return cmd_train(o);
    if (*evaluate) return cmd_evaluate(o, agent_dir);
    if (*ablate) return cmd_ablate(o, depths);
    if (*report) return cmd_report(o, input, format);
    if (*gen) return cmd_gen_trace(o, gen_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
