#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rlstorage/agent.hpp"
#include "rlstorage/config.hpp"
#include "rlstorage/control.hpp"
#include "rlstorage/simenv.hpp"
#include "rlstorage/trace.hpp"

namespace rlstorage {

/// sum_i weights[i] * contributions[i].
double weighted_objective(std::span<const double> weights, std::span<const double> contributions);

/// A named synthetic workload: phases whose durations are sized so that the
/// whole preset yields `ops` requests. `share` is the fraction of operations
/// each phase contributes.
struct WorkloadPreset {
  struct Phase {
    PhaseSpec spec;  // duration_us is filled in per device
    double share = 1.0;
  };
  std::string name;
  std::uint64_t address_space = 1ull << 30;
  std::vector<Phase> phases;
};

WorkloadPreset builtin_preset(const std::string& name);
std::vector<std::string> builtin_preset_names();
/// Built-in preset overridden by any `preset.<name>.*` keys in `config`.
WorkloadPreset preset_from_config(const Config& config, const std::string& name);

/// Requests per second `device` sustains at full internal parallelism.
CapacityFn device_capacity(const DeviceProfile& device);

struct WorkloadSpec {
  std::string preset = "oltp-mixed";
  std::optional<WorkloadPreset> custom;  // overrides the built-in preset
  std::string trace_path;                // replays a trace file instead
  std::uint64_t ops = 10000;

  std::string name() const;
};

Trace make_trace(const WorkloadSpec& workload, const DeviceProfile& device, std::uint64_t seed);

/// Trace seeds for training and evaluation episodes of an experiment seed.
std::uint64_t train_trace_seed(std::uint64_t seed, std::uint64_t episode);
std::uint64_t eval_trace_seed(std::uint64_t seed, std::uint64_t episode);

struct ExperimentSpec {
  std::string name = "experiment";
  std::string device = "sata";
  WorkloadSpec workload;
  TunableConfig initial;
  AgentKind agent = AgentKind::Tabular;
  AgentKind baseline = AgentKind::None;  // None = static, or Heuristic
  LoopConfig loop;
  TabularParams tabular;
  DqnParams dqn;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::uint64_t train_episodes = 30;
  std::uint64_t eval_episodes = 1;
  std::vector<double> objective_weights = {1.0, -0.5, 0.0, 0.0};
  double gain_beta = 1.0;
  double gamma_adj = 0.01;

  void validate() const;
};

ExperimentSpec experiment_from_config(const Config& config);
/// Named experiments used by the acceptance suite.
ExperimentSpec fixture_experiment(const std::string& name);

std::unique_ptr<Agent> make_agent(const ExperimentSpec& spec, std::uint64_t seed);

EpisodeResult baseline_static(const ExperimentSpec& spec, const Trace& trace, std::uint64_t seed);
EpisodeResult baseline_heuristic(const ExperimentSpec& spec, const Trace& trace, std::uint64_t seed);

/// Runs `train_episodes` with exploration on fresh traces, then returns the
/// trained agent. Each episode uses a fresh simulator.
std::unique_ptr<Agent> train_agent(const ExperimentSpec& spec, std::uint64_t seed,
                                   std::vector<EpisodeResult>* history = nullptr);

struct PolicyRun {
  std::string policy;
  std::uint64_t seed = 0;
  std::uint64_t episode = 0;
  EpisodeResult result;
};

struct ReportRow {
  std::string experiment, workload, device, policy;
  double throughput = 0.0;  // bytes/s over the makespan, mean across runs
  double mean_latency_us = 0.0;
  double p99_latency_us = 0.0;
  double hit_rate = 0.0;
  double utilization = 0.0;
  double throughput_ratio = 1.0;
  double latency_ratio = 1.0;
  double gain = 0.0;
  double objective = 0.0;
  double perf_total = 0.0;
  std::optional<double> util_eff;
  std::optional<std::uint64_t> c_model;
  std::size_t agent_bytes = 0;
  double runtime_ms = 0.0;  // simulated makespan
  double decision_overhead = 0.0;  // wall-clock decision time / simulated time
  std::vector<double> seed_throughput_ratios;
};

struct Report {
  std::string experiment;
  std::vector<ReportRow> rows;
  std::vector<PolicyRun> runs;

  const ReportRow& row(const std::string& policy) const;
};

/// Computes ratios, gains and objectives for every policy against the
/// reference policy's run on the same seed and episode.
Report assemble_report(const ExperimentSpec& spec, std::vector<PolicyRun> runs,
                       const std::map<std::string, std::size_t>& agent_bytes = {},
                       const std::map<std::string, std::uint64_t>& c_model = {});

/// Evaluates one trained agent per seed (in `spec.seeds` order) against the
/// static and heuristic baselines on the evaluation traces.
Report evaluate_agents(const ExperimentSpec& spec, std::span<const std::unique_ptr<Agent>> agents);

/// Trains one agent per seed, then evaluate_agents.
Report run_experiment(const ExperimentSpec& spec);

struct AblationVariant {
  std::string name;
  bool feedback = true;
  bool collector = true;
  std::vector<double> seed_throughput;  // evaluation throughput per seed
  std::vector<double> seed_gain;        // gain(full, variant) per seed
  std::vector<PolicyRun> runs;
  double throughput_delta = 0.0;        // mean relative change vs full
  double gain = 0.0;
};

struct AblationReport {
  std::string experiment;
  std::vector<AblationVariant> variants;

  const AblationVariant& variant(const std::string& name) const;
};

/// Full, feedback off, collector off, and both off, on identical seeds and
/// workloads.
AblationReport run_ablation(const ExperimentSpec& spec);

struct DepthResult {
  std::size_t weight_layers = 0;
  std::vector<std::size_t> layer_sizes;
  std::uint64_t c_model = 0;
  std::size_t parameters = 0;
  double throughput_ratio = 0.0;
  double inference_us = 0.0;
};

/// Trains and evaluates DQN agents whose networks have each of `depths`
/// weight layers.
std::vector<DepthResult> run_depth_ablation(const ExperimentSpec& spec, const std::vector<std::size_t>& depths);

enum class ReportFormat { Csv, Text, PlotData };

ReportFormat report_format_from_name(const std::string& name);

inline constexpr const char* kMetricsCsvHeader =
    "experiment,workload,device,policy,seed,interval,iops,mean_lat_us,p99_lat_us,hit_rate,utilization,reward,"
    "readahead,queue_depth,cache_pages";
inline constexpr const char* kSummaryCsvHeader =
    "experiment,workload,device,policy,throughput_ratio,latency_ratio,gain,objective,c_model,agent_bytes,runtime_ms";

std::string emit_report(const Report& report, ReportFormat format);
std::string metrics_csv(const Report& report);
void append_metrics_csv(std::string& out, const std::string& experiment, const std::string& workload,
                        const std::string& device, const std::string& policy, std::uint64_t seed,
                        const EpisodeResult& result);
std::string emit_ablation(const AblationReport& report);
std::string emit_depth_ablation(const std::vector<DepthResult>& results);

}  // namespace rlstorage
