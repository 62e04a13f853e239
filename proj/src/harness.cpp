#include "rlstorage/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace rlstorage {
namespace {

Pattern pattern_from_name(const std::string& s) {
  if (s == "sequential") return Pattern::Sequential;
  if (s == "random") return Pattern::Random;
  if (s == "mixed") return Pattern::Mixed;
  throw ConfigError("unknown access pattern: " + s);
}

WorkloadPreset::Phase phase(Pattern pattern, double seq, std::uint64_t block, double read, double util,
                            double share) {
  WorkloadPreset::Phase p;
  p.spec.pattern = pattern;
  p.spec.sequential_fraction = seq;
  p.spec.block_size_bytes = block;
  p.spec.read_fraction = read;
  p.spec.target_utilization = util;
  p.share = share;
  return p;
}

double mean(std::span<const double> v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double log2p(double v) { return std::log2(std::max(v, 1.0)); }

// Per-interval throughput normalized by `norm`, both series cut to the
// shorter one so that the comparison covers the same stretch of time.
double series_gain(const EpisodeResult& with, const EpisodeResult& base, double norm, double beta) {
  auto f = with.throughput_series();
  auto b = base.throughput_series();
  const std::size_t n = std::min(f.size(), b.size());
  f.resize(n);
  b.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    f[i] /= norm;
    b[i] /= norm;
  }
  return gain(f, b, beta);
}

LoopConfig eval_loop(const ExperimentSpec& spec) {
  LoopConfig cfg = spec.loop;
  cfg.explore = false;
  return cfg;
}

Trace eval_trace(const ExperimentSpec& spec, const DeviceProfile& device, std::uint64_t seed, std::uint64_t ep) {
  return make_trace(spec.workload, device, eval_trace_seed(seed, ep));
}

std::string policy_name(AgentKind k) { return k == AgentKind::None ? "static" : agent_kind_name(k); }

}  // namespace

double weighted_objective(std::span<const double> weights, std::span<const double> contributions) {
  if (weights.size() != contributions.size()) throw std::invalid_argument("weights and contributions differ in length");
  double sum = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) sum += weights[i] * contributions[i];
  return sum;
}

std::vector<std::string> builtin_preset_names() {
  return {"kv-random", "oltp-mixed", "scan-sequential", "seq-random-flip"};
}

WorkloadPreset builtin_preset(const std::string& name) {
  WorkloadPreset w;
  w.name = name;
  if (name == "kv-random") {
    w.address_space = 1ull << 30;
    w.phases = {phase(Pattern::Random, 0.0, 4096, 0.8, 0.9, 1.0)};
  } else if (name == "oltp-mixed") {
    w.address_space = 256ull << 20;
    w.phases = {
        phase(Pattern::Mixed, 0.6, 8192, 0.7, 0.3, 0.25),
        phase(Pattern::Mixed, 0.3, 65536, 0.7, 0.8, 0.25),
        phase(Pattern::Mixed, 0.6, 16384, 0.7, 0.5, 0.25),
        phase(Pattern::Mixed, 0.3, 32768, 0.7, 0.9, 0.25),
    };
  } else if (name == "scan-sequential") {
    w.address_space = 1ull << 30;
    w.phases = {phase(Pattern::Sequential, 1.0, 131072, 1.0, 0.5, 1.0)};
  } else if (name == "seq-random-flip") {
    w.address_space = 256ull << 20;
    w.phases = {
        phase(Pattern::Sequential, 1.0, 16384, 1.0, 0.6, 0.5),
        phase(Pattern::Random, 0.0, 8192, 0.7, 0.8, 0.5),
    };
  } else {
    throw ConfigError("unknown workload preset: " + name);
  }
  return w;
}

WorkloadPreset preset_from_config(const Config& config, const std::string& name) {
  const std::string prefix = "preset." + name + ".";
  const auto keys = config.keys_with_prefix(prefix);
  WorkloadPreset w;
  try {
    w = builtin_preset(name);
  } catch (const ConfigError&) {
    if (keys.empty()) throw;
    w.name = name;
  }
  w.address_space = config.get_uint(prefix + "address_space", w.address_space);
  std::vector<WorkloadPreset::Phase> phases;
  for (const auto& key : config.keys_with_prefix(prefix + "phase.")) {
    // pattern seq_fraction block_size read_fraction target_utilization share
    std::istringstream in(*config.get(key));
    std::string pattern;
    double seq = 0, read = 0, util = 0, share = 0;
    std::uint64_t block = 0;
    if (!(in >> pattern >> seq >> block >> read >> util >> share))
      throw ConfigError("config key " + key + ": expected 'pattern seq_fraction block read_fraction util share'");
    phases.push_back(phase(pattern_from_name(pattern), seq, block, read, util, share));
  }
  if (!phases.empty()) w.phases = std::move(phases);
  if (w.phases.empty()) throw ConfigError("workload preset " + name + " has no phases");
  return w;
}

CapacityFn device_capacity(const DeviceProfile& device) {
  return [device](std::uint64_t block, Pattern pattern) {
    const double st = service_time(device, block, pattern == Pattern::Sequential);
    return static_cast<double>(device.internal_parallelism) * 1e6 / st;
  };
}

std::uint64_t train_trace_seed(std::uint64_t seed, std::uint64_t episode) { return mix_seed(seed, 1000 + episode); }

std::uint64_t eval_trace_seed(std::uint64_t seed, std::uint64_t episode) { return mix_seed(seed, 5000 + episode); }

std::string WorkloadSpec::name() const {
  if (!trace_path.empty()) return trace_path;
  return custom ? custom->name : preset;
}

Trace make_trace(const WorkloadSpec& workload, const DeviceProfile& device, std::uint64_t seed) {
  if (!workload.trace_path.empty()) return load_trace(workload.trace_path);
  const WorkloadPreset preset = workload.custom ? *workload.custom : builtin_preset(workload.preset);
  const CapacityFn capacity = device_capacity(device);
  const double total_share =
      std::accumulate(preset.phases.begin(), preset.phases.end(), 0.0,
                      [](double acc, const WorkloadPreset::Phase& p) { return acc + p.share; });
  if (!(total_share > 0.0)) throw std::invalid_argument("workload phases have no share");

  std::vector<PhaseSpec> specs;
  for (const auto& p : preset.phases) {
    PhaseSpec s = p.spec;
    const double ops = static_cast<double>(workload.ops) * p.share / total_share;
    const double rate = s.target_utilization * capacity(s.block_size_bytes, s.pattern);
    s.duration_us = static_cast<std::uint64_t>(std::llround(ops / rate * 1e6));
    specs.push_back(s);
  }
  Trace t = gen_phased(specs, preset.address_space, capacity, seed);
  if (t.requests.size() > workload.ops) t.requests.resize(workload.ops);
  t.header.description = preset.name;
  return t;
}

void ExperimentSpec::validate() const {
  if (seeds.empty()) throw std::invalid_argument("experiment needs at least one seed");
  if (eval_episodes == 0) throw std::invalid_argument("experiment needs at least one evaluation episode");
  if (objective_weights.size() != 4) throw std::invalid_argument("objective needs four weights");
  initial.validate();
  loop.validate();
  if (workload.trace_path.empty() && !workload.custom) builtin_preset(workload.preset);
  DeviceProfile::preset(device).validate();
}

ExperimentSpec experiment_from_config(const Config& c) {
  ExperimentSpec s;
  s.name = c.get_string("experiment.name", s.name);
  s.device = c.get_string("experiment.device", s.device);
  s.workload.preset = c.get_string("experiment.workload", s.workload.preset);
  s.workload.trace_path = c.get_string("experiment.trace_path", "");
  s.workload.ops = c.get_uint("experiment.ops", s.workload.ops);
  auto kind = [&](const std::string& key, const std::string& fallback) {
    try {
      return agent_kind_from_name(c.get_string(key, fallback));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(key + ": " + e.what());
    }
  };
  s.agent = kind("experiment.agent", agent_kind_name(s.agent));
  s.baseline = kind("experiment.baseline", "static");
  if (s.baseline != AgentKind::None && s.baseline != AgentKind::Heuristic)
    throw ConfigError("experiment.baseline must be static or heuristic");
  s.seeds = c.get_uints("experiment.seeds", s.seeds);
  s.train_episodes = c.get_uint("experiment.train_episodes", s.train_episodes);
  s.eval_episodes = c.get_uint("experiment.eval_episodes", s.eval_episodes);
  if (!c.keys_with_prefix("preset." + s.workload.preset + ".").empty())
    s.workload.custom = preset_from_config(c, s.workload.preset);

  auto u32 = [&](const std::string& key, std::uint32_t fallback) {
    return static_cast<std::uint32_t>(c.get_uint(key, fallback));
  };
  s.initial.readahead_pages = u32("initial.readahead_pages", s.initial.readahead_pages);
  s.initial.queue_depth = u32("initial.queue_depth", s.initial.queue_depth);
  s.initial.cache_pages = u32("initial.cache_pages", s.initial.cache_pages);

  LoopConfig& l = s.loop;
  l.decision_interval_us = c.get_double("loop.decision_interval_us", l.decision_interval_us);
  l.reward_lambda = c.get_double("loop.reward_lambda", l.reward_lambda);
  l.throughput_norm = c.get_double("loop.throughput_norm", l.throughput_norm);
  l.latency_norm_us = c.get_double("loop.latency_norm_us", l.latency_norm_us);
  l.return_discount = c.get_double("loop.return_discount", l.return_discount);
  l.smoothed_actuation = c.get_bool("loop.smoothed_actuation", l.smoothed_actuation);
  l.smoothing_alpha = c.get_double("loop.smoothing_alpha", l.smoothing_alpha);
  l.feedback_enabled = c.get_bool("loop.feedback_enabled", l.feedback_enabled);
  l.collector_enabled = c.get_bool("loop.collector_enabled", l.collector_enabled);

  std::vector<std::string> state_features;
  for (Feature f : l.binning.features) state_features.emplace_back(feature_name(f));
  state_features = c.get_strings("features.state", state_features);
  BinningScheme scheme;
  for (const auto& name : state_features) {
    const auto f = feature_from_name(name);
    if (!f) throw ConfigError("features.state: unknown feature " + name);
    scheme.features.push_back(*f);
    scheme.edges.push_back(c.get_doubles("features.bins." + name, {0.33, 0.66}));
  }
  l.binning = scheme;
  // bins for features outside the state are accepted but unused
  for (std::size_t i = 0; i < kFeatureCount; ++i)
    c.get_doubles(std::string("features.bins.") + feature_name(static_cast<Feature>(i)), {});
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    const std::string key = std::string("features.bounds.") + feature_name(static_cast<Feature>(i));
    const auto b = c.get_doubles(key, {l.bounds.lo[i], l.bounds.hi[i]});
    if (b.size() != 2) throw ConfigError(key + ": expected 'lo, hi'");
    l.bounds.lo[i] = b[0];
    l.bounds.hi[i] = b[1];
  }

  auto schedule = [&](const std::string& section, EpsilonSchedule e) {
    e.start = c.get_double(section + ".epsilon_start", e.start);
    e.end = c.get_double(section + ".epsilon_end", e.end);
    e.decay_steps = c.get_uint(section + ".epsilon_decay_steps", e.decay_steps);
    return e;
  };
  s.tabular.alpha = c.get_double("agent.alpha", s.tabular.alpha);
  s.tabular.gamma = c.get_double("agent.gamma", s.tabular.gamma);
  s.tabular.epsilon = schedule("agent", s.tabular.epsilon);

  std::vector<std::uint64_t> hidden(s.dqn.hidden.begin(), s.dqn.hidden.end());
  hidden = c.get_uints("dqn.hidden", hidden);
  s.dqn.hidden.assign(hidden.begin(), hidden.end());
  s.dqn.learning_rate = c.get_double("dqn.learning_rate", s.dqn.learning_rate);
  s.dqn.gamma = c.get_double("dqn.gamma", s.tabular.gamma);
  s.dqn.epsilon = schedule("dqn", s.tabular.epsilon);
  s.dqn.batch_size = c.get_uint("dqn.batch_size", s.dqn.batch_size);
  s.dqn.replay_capacity = c.get_uint("dqn.replay_capacity", s.dqn.replay_capacity);
  s.dqn.target_sync_interval = c.get_uint("dqn.target_sync_interval", s.dqn.target_sync_interval);

  s.objective_weights = c.get_doubles("objective.weights", s.objective_weights);
  s.gain_beta = c.get_double("objective.beta", s.gain_beta);
  s.gamma_adj = c.get_double("objective.gamma_adj", s.gamma_adj);

  try {
    s.validate();
    s.tabular.validate();
    s.dqn.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  std::vector<std::string> unknown;
  for (const auto& k : c.unused_keys())
    if (!k.starts_with("preset.")) unknown.push_back(k);
  if (!unknown.empty()) throw ConfigError("unknown config key: " + unknown.front());
  return s;
}

ExperimentSpec fixture_experiment(const std::string& name) {
  ExperimentSpec s;
  s.name = name;
  s.seeds = {1, 2, 3, 4, 5};
  s.initial = {0, 8, 256};
  if (name == "mixed-sata") {
    s.device = "sata";
    s.workload.preset = "oltp-mixed";
    s.agent = AgentKind::Tabular;
    s.train_episodes = 30;
  } else if (name == "flip-sata") {
    s.device = "sata";
    s.workload.preset = "seq-random-flip";
    s.agent = AgentKind::Tabular;
    s.train_episodes = 30;
  } else if (name == "depth-nvme") {
    s.device = "nvme";
    s.workload.preset = "oltp-mixed";
    s.workload.ops = 5000;
    s.agent = AgentKind::Dqn;
    s.seeds = {1};
    s.train_episodes = 5;
  } else {
    throw std::invalid_argument("unknown fixture experiment: " + name);
  }
  return s;
}

std::unique_ptr<Agent> make_agent(const ExperimentSpec& spec, std::uint64_t seed) {
  switch (spec.agent) {
    case AgentKind::Tabular: {
      TabularParams p = spec.tabular;
      p.seed = mix_seed(seed, 7);
      return std::make_unique<TabularAgent>(spec.loop.binning.state_count(), p);
    }
    case AgentKind::Dqn: {
      DqnParams p = spec.dqn;
      p.seed = mix_seed(seed, 7);
      p.input_size = kFeatureCount;
      return std::make_unique<DqnAgent>(p);
    }
    case AgentKind::None:
      return std::make_unique<NoopAgent>();
    case AgentKind::Heuristic:
      return std::make_unique<HeuristicAgent>();
  }
  throw std::invalid_argument("unknown agent kind");
}

EpisodeResult baseline_static(const ExperimentSpec& spec, const Trace& trace, std::uint64_t seed) {
  NoopAgent agent;
  return run_episode(DeviceProfile::preset(spec.device), spec.initial, trace, agent, eval_loop(spec), seed);
}

EpisodeResult baseline_heuristic(const ExperimentSpec& spec, const Trace& trace, std::uint64_t seed) {
  HeuristicAgent agent;
  return run_episode(DeviceProfile::preset(spec.device), spec.initial, trace, agent, eval_loop(spec), seed);
}

std::unique_ptr<Agent> train_agent(const ExperimentSpec& spec, std::uint64_t seed,
                                   std::vector<EpisodeResult>* history) {
  const DeviceProfile device = DeviceProfile::preset(spec.device);
  auto agent = make_agent(spec, seed);
  LoopConfig cfg = spec.loop;
  cfg.explore = true;
  for (std::uint64_t ep = 0; ep < spec.train_episodes; ++ep) {
    const Trace trace = make_trace(spec.workload, device, train_trace_seed(seed, ep));
    EpisodeResult r = run_episode(device, spec.initial, trace, *agent, cfg, seed);
    if (history) history->push_back(std::move(r));
  }
  return agent;
}

const ReportRow& Report::row(const std::string& policy) const {
  for (const auto& r : rows)
    if (r.policy == policy) return r;
  throw std::out_of_range("report has no policy " + policy);
}

Report assemble_report(const ExperimentSpec& spec, std::vector<PolicyRun> runs,
                       const std::map<std::string, std::size_t>& agent_bytes,
                       const std::map<std::string, std::uint64_t>& c_model) {
  const std::string reference = policy_name(spec.baseline);
  auto find_ref = [&](const PolicyRun& run) -> const PolicyRun& {
    for (const auto& r : runs)
      if (r.policy == reference && r.seed == run.seed && r.episode == run.episode) return r;
    throw std::logic_error("no matching " + reference + " run for seed " + std::to_string(run.seed));
  };

  std::vector<std::string> policies;
  for (const auto& r : runs)
    if (std::find(policies.begin(), policies.end(), r.policy) == policies.end()) policies.push_back(r.policy);

  Report report;
  report.experiment = spec.name;
  for (const auto& policy : policies) {
    ReportRow row;
    row.experiment = spec.name;
    row.workload = spec.workload.name();
    row.device = spec.device;
    row.policy = policy;

    std::vector<double> thr, lat, p99, hit, util, ratio, lat_ratio, gains, objective, perf, eff, runtime, overhead;
    std::map<std::uint64_t, std::vector<double>> per_seed;
    for (const auto& run : runs) {
      if (run.policy != policy) continue;
      const EpisodeResult& r = run.result;
      const EpisodeResult& ref = find_ref(run).result;

      std::vector<double> utils, seqs, queues, ops;
      for (const auto& iv : r.intervals) {
        utils.push_back(iv.metrics.utilization);
        seqs.push_back(iv.features.sequentiality);
        queues.push_back(iv.config.queue_depth);
        ops.push_back(static_cast<double>(iv.metrics.completions));
      }
      thr.push_back(r.throughput());
      lat.push_back(r.mean_latency_us);
      p99.push_back(r.p99_latency_us);
      hit.push_back(r.hit_rate);
      util.push_back(mean(utils));
      ratio.push_back(ref.throughput() > 0.0 ? r.throughput() / ref.throughput() : 0.0);
      lat_ratio.push_back(ref.mean_latency_us > 0.0 ? r.mean_latency_us / ref.mean_latency_us : 0.0);
      per_seed[run.seed].push_back(ratio.back());
      gains.push_back(series_gain(r, ref, spec.loop.throughput_norm, spec.gain_beta));
      const std::vector<double> contributions = {r.throughput() / spec.loop.throughput_norm,
                                                 r.p99_latency_us / spec.loop.latency_norm_us, r.hit_rate,
                                                 util.back()};
      objective.push_back(weighted_objective(spec.objective_weights, contributions));

      const TunableConfig& fc = r.final_config;
      const std::vector<double> intensity = {mean(seqs), util.back(), 1.0 - r.hit_rate};
      const std::vector<double> knobs = {log2p(fc.readahead_pages + 1.0), log2p(fc.queue_depth),
                                         log2p(fc.cache_pages)};
      perf.push_back(perf_total(intensity, knobs, spec.gamma_adj, queues));
      if (std::accumulate(ops.begin(), ops.end(), 0.0) > 0.0) eff.push_back(util_eff(perf.back(), ops));
      runtime.push_back(r.makespan_us / 1000.0);
      overhead.push_back(r.makespan_us > 0.0 ? r.decision_wall_us / r.makespan_us : 0.0);
    }
    row.throughput = mean(thr);
    row.mean_latency_us = mean(lat);
    row.p99_latency_us = mean(p99);
    row.hit_rate = mean(hit);
    row.utilization = mean(util);
    row.throughput_ratio = mean(ratio);
    row.latency_ratio = mean(lat_ratio);
    row.gain = mean(gains);
    row.objective = mean(objective);
    row.perf_total = mean(perf);
    if (!eff.empty()) row.util_eff = mean(eff);
    row.runtime_ms = mean(runtime);
    row.decision_overhead = mean(overhead);
    for (const auto& [seed, v] : per_seed) row.seed_throughput_ratios.push_back(mean(v));
    if (auto it = agent_bytes.find(policy); it != agent_bytes.end()) row.agent_bytes = it->second;
    if (auto it = c_model.find(policy); it != c_model.end()) row.c_model = it->second;
    report.rows.push_back(std::move(row));
  }
  report.runs = std::move(runs);
  return report;
}

Report evaluate_agents(const ExperimentSpec& spec, std::span<const std::unique_ptr<Agent>> agents) {
  spec.validate();
  if (agents.size() != spec.seeds.size()) throw std::invalid_argument("need one agent per seed");
  const DeviceProfile device = DeviceProfile::preset(spec.device);
  const std::string rl = policy_name(spec.agent);
  const bool learner = spec.agent == AgentKind::Tabular || spec.agent == AgentKind::Dqn;
  std::vector<PolicyRun> runs;
  std::map<std::string, std::size_t> bytes;
  std::map<std::string, std::uint64_t> c_model;

  for (std::size_t k = 0; k < spec.seeds.size(); ++k) {
    const std::uint64_t seed = spec.seeds[k];
    Agent& agent = *agents[k];
    if (agent.kind() != spec.agent) throw std::invalid_argument("agent kind does not match the experiment");
    if (learner) bytes[rl] = save_agent(agent).size();
    if (const auto* dqn = dynamic_cast<const DqnAgent*>(&agent)) c_model[rl] = dqn->online().complexity();

    for (std::uint64_t ep = 0; ep < spec.eval_episodes; ++ep) {
      const Trace trace = eval_trace(spec, device, seed, ep);
      if (learner) runs.push_back({rl, seed, ep, run_episode(device, spec.initial, trace, agent, eval_loop(spec), seed)});
      runs.push_back({"static", seed, ep, baseline_static(spec, trace, seed)});
      runs.push_back({"heuristic", seed, ep, baseline_heuristic(spec, trace, seed)});
    }
  }
  return assemble_report(spec, std::move(runs), bytes, c_model);
}

Report run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  std::vector<std::unique_ptr<Agent>> agents;
  for (std::uint64_t seed : spec.seeds) agents.push_back(train_agent(spec, seed));
  return evaluate_agents(spec, agents);
}

const AblationVariant& AblationReport::variant(const std::string& name) const {
  for (const auto& v : variants)
    if (v.name == name) return v;
  throw std::out_of_range("ablation has no variant " + name);
}

AblationReport run_ablation(const ExperimentSpec& spec) {
  spec.validate();
  if (spec.agent != AgentKind::Tabular && spec.agent != AgentKind::Dqn)
    throw std::invalid_argument("ablation needs a learning agent");
  const DeviceProfile device = DeviceProfile::preset(spec.device);

  AblationReport report;
  report.experiment = spec.name;
  for (const auto& [name, feedback, collector] :
       {std::tuple{"full", true, true}, std::tuple{"feedback-off", false, true},
        std::tuple{"collector-off", true, false}, std::tuple{"both-off", false, false}}) {
    AblationVariant v;
    v.name = name;
    v.feedback = feedback;
    v.collector = collector;
    report.variants.push_back(std::move(v));
  }

  for (auto& v : report.variants) {
    ExperimentSpec s = spec;
    s.loop.feedback_enabled = v.feedback;
    s.loop.collector_enabled = v.collector;
    for (std::uint64_t seed : spec.seeds) {
      auto agent = train_agent(s, seed);
      std::vector<double> thr;
      for (std::uint64_t ep = 0; ep < spec.eval_episodes; ++ep) {
        const Trace trace = eval_trace(s, device, seed, ep);
        EpisodeResult r = run_episode(device, s.initial, trace, *agent, eval_loop(s), seed);
        thr.push_back(r.throughput());
        v.runs.push_back({v.name, seed, ep, std::move(r)});
      }
      v.seed_throughput.push_back(mean(thr));
    }
  }

  const AblationVariant& full = report.variants.front();
  for (auto& v : report.variants) {
    std::vector<double> deltas;
    for (std::size_t i = 0; i < v.seed_throughput.size(); ++i)
      deltas.push_back((v.seed_throughput[i] - full.seed_throughput[i]) / full.seed_throughput[i]);
    std::map<std::uint64_t, std::vector<double>> per_seed;
    for (std::size_t i = 0; i < v.runs.size(); ++i)
      per_seed[v.runs[i].seed].push_back(
          series_gain(full.runs[i].result, v.runs[i].result, spec.loop.throughput_norm, spec.gain_beta));
    for (std::uint64_t seed : spec.seeds) v.seed_gain.push_back(mean(per_seed[seed]));
    v.throughput_delta = mean(deltas);
    v.gain = mean(v.seed_gain);
  }
  return report;
}

std::vector<DepthResult> run_depth_ablation(const ExperimentSpec& spec, const std::vector<std::size_t>& depths) {
  const DeviceProfile device = DeviceProfile::preset(spec.device);
  const std::size_t width = spec.dqn.hidden.empty() ? 16 : spec.dqn.hidden.front();
  std::vector<DepthResult> out;
  for (std::size_t depth : depths) {
    if (depth < 2) throw std::invalid_argument("a DQN needs at least two weight layers");
    ExperimentSpec s = spec;
    s.agent = AgentKind::Dqn;
    s.dqn.hidden.assign(depth - 1, width);
    s.validate();

    DepthResult d;
    d.weight_layers = depth;
    d.layer_sizes = s.dqn.layer_sizes();
    std::vector<double> ratios;
    double forward_us = 0.0;
    std::size_t forwards = 0;
    for (std::uint64_t seed : s.seeds) {
      auto agent = train_agent(s, seed);
      auto& dqn = dynamic_cast<DqnAgent&>(*agent);
      d.c_model = dqn.online().complexity();
      d.parameters = dqn.online().parameter_count();
      for (std::uint64_t ep = 0; ep < s.eval_episodes; ++ep) {
        const Trace trace = eval_trace(s, device, seed, ep);
        const EpisodeResult r = run_episode(device, s.initial, trace, dqn, eval_loop(s), seed);
        const EpisodeResult b = baseline_static(s, trace, seed);
        ratios.push_back(r.throughput() / b.throughput());
      }
      const std::vector<float> probe(kFeatureCount, 0.5f);
      const auto t0 = std::chrono::steady_clock::now();
      for (int k = 0; k < 1000; ++k) forwards += dqn.q_values(probe).size() > 0;
      forward_us += std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t0).count();
    }
    d.throughput_ratio = mean(ratios);
    d.inference_us = forwards > 0 ? forward_us / static_cast<double>(forwards) : 0.0;
    out.push_back(std::move(d));
  }
  return out;
}

ReportFormat report_format_from_name(const std::string& name) {
  if (name == "csv") return ReportFormat::Csv;
  if (name == "text") return ReportFormat::Text;
  if (name == "plotdata") return ReportFormat::PlotData;
  throw std::invalid_argument("unknown report format: " + name);
}

}  // namespace rlstorage
