#include "rlstorage/control.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rlstorage {

void LoopConfig::validate() const {
  if (!(decision_interval_us > 0.0)) throw std::invalid_argument("decision_interval_us must be positive");
  if (!(smoothing_alpha > 0.0 && smoothing_alpha <= 1.0))
    throw std::invalid_argument("smoothing_alpha must lie in (0, 1]");
  if (!(throughput_norm > 0.0) || !(latency_norm_us > 0.0)) throw std::invalid_argument("norms must be positive");
  if (!(reward_lambda >= 0.0)) throw std::invalid_argument("reward_lambda must be non-negative");
  if (!(return_discount >= 0.0 && return_discount <= 1.0))
    throw std::invalid_argument("return_discount must lie in [0, 1]");
  binning.validate();
  bounds.validate();
}

double EpisodeResult::throughput() const {
  return makespan_us > 0.0 ? static_cast<double>(total_bytes) / (makespan_us * 1e-6) : 0.0;
}

std::vector<double> EpisodeResult::rewards() const {
  std::vector<double> r;
  r.reserve(intervals.size());
  for (const auto& i : intervals) r.push_back(i.reward);
  return r;
}

std::vector<double> EpisodeResult::throughput_series() const {
  std::vector<double> s;
  s.reserve(intervals.size());
  for (const auto& i : intervals)
    s.push_back(static_cast<double>(i.metrics.bytes_transferred) / (i.metrics.window_us * 1e-6));
  return s;
}

double compute_reward(const MetricsSample& /*prev*/, const MetricsSample& cur, const LoopConfig& cfg) {
  if (cur.completions == 0 || !cur.p99_latency_us) return -cfg.reward_lambda;
  const double throughput = static_cast<double>(cur.bytes_transferred) / (cur.window_us * 1e-6);
  return throughput / cfg.throughput_norm - cfg.reward_lambda * (*cur.p99_latency_us / cfg.latency_norm_us);
}

double smooth_queue_adjust(double q_opt, double q_curr, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0, 1]");
  return alpha * (q_opt - q_curr);
}

double perf_total(std::span<const double> intensities, std::span<const double> config_values, double gamma_adj,
                  std::span<const double> queue_depths) {
  if (intensities.size() != config_values.size())
    throw std::invalid_argument("intensity and config lists differ in length");
  double weighted = 0.0;
  for (std::size_t i = 0; i < intensities.size(); ++i) weighted += intensities[i] * config_values[i];
  return weighted + gamma_adj * std::accumulate(queue_depths.begin(), queue_depths.end(), 0.0);
}

double util_eff(double p_total, std::span<const double> disk_ops) {
  const double denom = std::accumulate(disk_ops.begin(), disk_ops.end(), 0.0);
  if (denom == 0.0) throw std::domain_error("utilization efficiency undefined: no disk operations");
  return p_total / denom;
}

double gain(std::span<const double> with_feedback, std::span<const double> baseline, double beta) {
  if (with_feedback.size() != baseline.size()) throw std::invalid_argument("series differ in length");
  double sum = 0.0;
  for (std::size_t t = 0; t < baseline.size(); ++t) sum += with_feedback[t] - baseline[t];
  return beta * sum;
}

// ---------------------------------------------------------------------------

FeedbackLoop::FeedbackLoop(const DeviceProfile& profile, const TunableConfig& initial, const Trace& trace,
                           Agent& agent, LoopConfig cfg, std::uint64_t seed)
    : sim_(profile, initial, seed), agent_(agent), cfg_(std::move(cfg)), target_(initial) {
  cfg_.validate();
  sim_.load(trace);
  result_.initial_config = initial;
  result_.final_config = initial;
}

Observation FeedbackLoop::observe(const FeatureVector& v) const {
  return {discretize(v, cfg_.binning), normalize(v, cfg_.bounds), v};
}

TunableConfig FeedbackLoop::actuate(ActionId a) {
  TunableConfig next = apply_action(sim_.config(), a);
  if (cfg_.smoothed_actuation) {
    // the agent moves a queue-depth setpoint; the device follows it gradually
    target_ = apply_action(target_, a);
    const std::uint32_t curr = sim_.config().queue_depth;
    const auto step = static_cast<long long>(
        std::trunc(smooth_queue_adjust(target_.queue_depth, curr, cfg_.smoothing_alpha)));
    next.queue_depth = step == 0 ? target_.queue_depth : static_cast<std::uint32_t>(curr + step);
  }
  sim_.apply_config(next);
  return next;
}

FeedbackLoop::Step FeedbackLoop::step() {
  if (done()) throw std::logic_error("feedback loop already finished");
  const WindowResult w = sim_.run_until(sim_.now_us() + cfg_.decision_interval_us);
  const MetricsSample metrics = summarize(w.records, cfg_.decision_interval_us, w.busy_us);
  for (const auto& r : w.records) {
    latencies_.push_back(r.latency_us());
    result_.total_bytes += r.request.size;
    result_.makespan_us = r.complete_us;
    pages_read_ += r.pages_read;
    pages_hit_ += r.pages_hit;
  }

  const FeatureVector features = cfg_.collector_enabled
                                     ? collector_.extract(w.records, cfg_.decision_interval_us, metrics.utilization)
                                     : FeatureVector{};
  Step out;
  out.observation = observe(features);
  out.reward = compute_reward(prev_metrics_, metrics, cfg_);
  out.done = sim_.done();

  const auto t0 = std::chrono::steady_clock::now();
  if (prev_obs_ && cfg_.feedback_enabled)
    agent_.learn({*prev_obs_, prev_action_, out.reward, out.observation, out.done});
  if (!out.done) {
    out.action = agent_.act(out.observation, cfg_.explore);
    actuate(out.action);
  }
  result_.decision_wall_us +=
      std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t0).count();

  IntervalRecord rec;
  rec.interval = result_.intervals.size();
  rec.features = features;
  rec.state = out.observation.state;
  rec.action = out.action;
  rec.reward = out.reward;
  rec.metrics = metrics;
  rec.config = sim_.config();
  result_.intervals.push_back(std::move(rec));

  prev_obs_ = out.observation;
  prev_action_ = out.action;
  prev_metrics_ = metrics;
  return out;
}

EpisodeResult FeedbackLoop::finish() {
  const auto rewards = result_.rewards();
  result_.discounted_return = discounted_return(rewards, cfg_.return_discount);
  result_.reward_sum = std::accumulate(rewards.begin(), rewards.end(), 0.0);
  result_.final_config = sim_.config();
  result_.completions = latencies_.size();
  if (!latencies_.empty()) {
    result_.mean_latency_us =
        std::accumulate(latencies_.begin(), latencies_.end(), 0.0) / static_cast<double>(latencies_.size());
    result_.p99_latency_us = nearest_rank_percentile(latencies_, 0.99);
  }
  result_.hit_rate = pages_read_ > 0 ? static_cast<double>(pages_hit_) / static_cast<double>(pages_read_) : 0.0;
  return result_;
}

EpisodeResult run_episode(const DeviceProfile& profile, const TunableConfig& initial, const Trace& trace,
                          Agent& agent, const LoopConfig& cfg, std::uint64_t seed) {
  FeedbackLoop loop(profile, initial, trace, agent, cfg, seed);
  while (!loop.done()) loop.step();
  return loop.finish();
}

}  // namespace rlstorage
