#pragma once

#include <optional>
#include <span>
#include <vector>

#include "rlstorage/agent.hpp"
#include "rlstorage/features.hpp"
#include "rlstorage/simenv.hpp"
#include "rlstorage/trace.hpp"

namespace rlstorage {

struct LoopConfig {
  double decision_interval_us = 50000.0;
  double reward_lambda = 0.5;
  double throughput_norm = 100e6;  // bytes/s
  double latency_norm_us = 10000.0;
  double return_discount = 0.9;
  bool smoothed_actuation = false;
  double smoothing_alpha = 0.5;
  bool feedback_enabled = true;
  bool collector_enabled = true;
  bool explore = true;
  BinningScheme binning = BinningScheme::standard();
  FeatureBounds bounds = FeatureBounds::standard();

  void validate() const;
};

struct IntervalRecord {
  std::size_t interval = 0;
  FeatureVector features;
  StateId state = 0;
  ActionId action = action::kNoop;
  double reward = 0.0;
  MetricsSample metrics;
  TunableConfig config;  // after the action
};

struct EpisodeResult {
  std::vector<IntervalRecord> intervals;
  double discounted_return = 0.0;
  double reward_sum = 0.0;
  TunableConfig initial_config;
  TunableConfig final_config;

  std::size_t completions = 0;
  std::uint64_t total_bytes = 0;
  double makespan_us = 0.0;  // time of the last completion
  double mean_latency_us = 0.0;
  double p99_latency_us = 0.0;
  double hit_rate = 0.0;
  double decision_wall_us = 0.0;

  /// Bytes per second over the makespan.
  double throughput() const;
  std::vector<double> rewards() const;
  /// Bytes per second in each decision interval.
  std::vector<double> throughput_series() const;
};

/// Normalized interval throughput minus reward_lambda times normalized p99.
/// An interval without completions scores -reward_lambda.
double compute_reward(const MetricsSample& prev, const MetricsSample& cur, const LoopConfig& cfg);

/// alpha * (q_opt - q_curr).
double smooth_queue_adjust(double q_opt, double q_curr, double alpha);

/// sum_i W_i * C_i + gamma_adj * sum_j Q_j.
double perf_total(std::span<const double> intensities, std::span<const double> config_values, double gamma_adj,
                  std::span<const double> queue_depths);

/// p_total / sum_k D_k; throws std::domain_error when the denominator is zero.
double util_eff(double p_total, std::span<const double> disk_ops);

/// beta * sum_t (F_t - B_t).
double gain(std::span<const double> with_feedback, std::span<const double> baseline, double beta);

/// The observe -> infer -> act -> reward cycle over one trace.
class FeedbackLoop {
 public:
  struct Step {
    ActionId action = action::kNoop;
    double reward = 0.0;
    Observation observation;
    bool done = false;
  };

  FeedbackLoop(const DeviceProfile& profile, const TunableConfig& initial, const Trace& trace, Agent& agent,
               LoopConfig cfg, std::uint64_t seed = 0);

  /// Closes one decision interval: observes it, rewards the previous action,
  /// lets the agent learn (when feedback is on), then acts.
  Step step();
  bool done() const { return sim_.done(); }

  const Simulator& simulator() const { return sim_; }
  const EpisodeResult& result() const { return result_; }
  /// Finalizes totals; call once the trace is exhausted.
  EpisodeResult finish();

 private:
  Observation observe(const FeatureVector& v) const;
  TunableConfig actuate(ActionId a);

  Simulator sim_;
  Agent& agent_;
  LoopConfig cfg_;
  DataCollector collector_;
  TunableConfig target_;
  EpisodeResult result_;
  std::optional<Observation> prev_obs_;
  ActionId prev_action_ = action::kNoop;
  MetricsSample prev_metrics_;
  std::vector<double> latencies_;
  std::uint64_t pages_read_ = 0, pages_hit_ = 0;
};

EpisodeResult run_episode(const DeviceProfile& profile, const TunableConfig& initial, const Trace& trace,
                          Agent& agent, const LoopConfig& cfg, std::uint64_t seed = 0);

}  // namespace rlstorage
