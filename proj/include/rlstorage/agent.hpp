#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "rlstorage/features.hpp"
#include "rlstorage/mlp.hpp"
#include "rlstorage/rng.hpp"
#include "rlstorage/simenv.hpp"

namespace rlstorage {

/// 0 no-op; 1/2 readahead halve/double; 3/4 queue depth halve/double;
/// 5/6 cache halve/double. Results are clamped to TunableConfig bounds.
using ActionId = std::uint8_t;
inline constexpr std::size_t kActionCount = 7;

namespace action {
inline constexpr ActionId kNoop = 0;
inline constexpr ActionId kReadaheadHalve = 1;
inline constexpr ActionId kReadaheadDouble = 2;
inline constexpr ActionId kQueueHalve = 3;
inline constexpr ActionId kQueueDouble = 4;
inline constexpr ActionId kCacheHalve = 5;
inline constexpr ActionId kCacheDouble = 6;
}  // namespace action

const char* action_name(ActionId a);
TunableConfig apply_action(const TunableConfig& config, ActionId a);

/// Sum over t of gamma^t * rewards[t].
double discounted_return(std::span<const double> rewards, double gamma);

/// Linear decay from `start` to `end` over `decay_steps` decisions.
struct EpsilonSchedule {
  double start = 1.0;
  double end = 0.05;
  std::uint64_t decay_steps = 2000;

  double at(std::uint64_t step) const;
};

/// Lowest index wins ties.
ActionId greedy_action(std::span<const float> q_values);
ActionId select_action(std::span<const float> q_values, double epsilon, Rng& rng);

class QTable {
 public:
  QTable() = default;
  QTable(std::size_t states, std::size_t actions = kActionCount);

  std::size_t states() const { return states_; }
  std::size_t actions() const { return actions_; }

  float& at(std::size_t s, ActionId a) { return values_[s * actions_ + a]; }
  float at(std::size_t s, ActionId a) const { return values_[s * actions_ + a]; }
  std::span<const float> row(std::size_t s) const { return {values_.data() + s * actions_, actions_}; }
  float max(std::size_t s) const;

  std::vector<float>& values() { return values_; }
  const std::vector<float>& values() const { return values_; }

  bool operator==(const QTable&) const = default;

 private:
  std::size_t states_ = 0;
  std::size_t actions_ = 0;
  std::vector<float> values_;
};

/// Q(s,a) <- Q(s,a) + alpha * (r + gamma * max_a' Q(s',a') - Q(s,a)).
/// A terminal transition drops the bootstrap term. Returns the new Q(s,a).
float q_update(QTable& table, StateId s, ActionId a, double reward, StateId s_next, double alpha, double gamma,
               bool terminal = false);

/// What the agent sees at a decision point: the discretized state for the
/// tabular path, the normalized vector for the network path, and the raw
/// features for rule-based policies.
struct Observation {
  StateId state = 0;
  std::vector<float> input;
  FeatureVector features;
};

struct Transition {
  Observation state;
  ActionId action = action::kNoop;
  double reward = 0.0;
  Observation next;
  bool terminal = false;
};

enum class AgentKind : std::uint8_t { Tabular = 0, Dqn = 1, None = 2, Heuristic = 3 };

const char* agent_kind_name(AgentKind k);
AgentKind agent_kind_from_name(const std::string& name);

class Agent {
 public:
  virtual ~Agent() = default;
  virtual AgentKind kind() const = 0;
  /// Epsilon-greedy when `explore`, greedy otherwise.
  virtual ActionId act(const Observation& obs, bool explore) = 0;
  virtual void learn(const Transition& t) = 0;
  virtual std::unique_ptr<Agent> clone() const = 0;
};

struct TabularParams {
  double alpha = 0.1;
  double gamma = 0.9;
  EpsilonSchedule epsilon;
  std::uint64_t seed = 0;

  void validate() const;
};

class TabularAgent final : public Agent {
 public:
  TabularAgent(std::size_t states, TabularParams params);
  TabularAgent(QTable table, TabularParams params);

  AgentKind kind() const override { return AgentKind::Tabular; }
  ActionId act(const Observation& obs, bool explore) override;
  void learn(const Transition& t) override;
  std::unique_ptr<Agent> clone() const override { return std::make_unique<TabularAgent>(*this); }

  const QTable& table() const { return table_; }
  QTable& table() { return table_; }
  const TabularParams& params() const { return params_; }
  std::uint64_t decisions() const { return decisions_; }

 private:
  QTable table_;
  TabularParams params_;
  Rng rng_;
  std::uint64_t decisions_ = 0;
};

struct DqnSample {
  std::vector<float> state;
  ActionId action = action::kNoop;
  float reward = 0.0f;
  std::vector<float> next;
  bool terminal = false;

  bool operator==(const DqnSample&) const = default;
};

/// Fixed-capacity ring; sampling is uniform with replacement.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, std::uint64_t seed);

  void push(DqnSample sample);
  std::vector<DqnSample> sample(std::size_t n);

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;
  std::vector<DqnSample> items_;
  Rng rng_;
};

struct DqnParams {
  std::size_t input_size = kFeatureCount;
  std::vector<std::size_t> hidden = {16, 16};
  double learning_rate = 0.01;
  double gamma = 0.9;
  EpsilonSchedule epsilon;
  std::size_t batch_size = 32;
  std::size_t replay_capacity = 4096;
  std::size_t target_sync_interval = 250;
  std::uint64_t seed = 0;

  std::vector<std::size_t> layer_sizes() const;
  void validate() const;
};

class DqnAgent final : public Agent {
 public:
  explicit DqnAgent(DqnParams params);
  DqnAgent(Mlp online, DqnParams params);

  AgentKind kind() const override { return AgentKind::Dqn; }
  ActionId act(const Observation& obs, bool explore) override;
  /// Stores the transition; trains one batch once the buffer holds batch_size.
  void learn(const Transition& t) override;
  std::unique_ptr<Agent> clone() const override { return std::make_unique<DqnAgent>(*this); }

  /// One SGD step on the mean squared TD error of `batch` against the target
  /// network. Returns the loss before the step.
  double train_step(std::span<const DqnSample> batch);
  void target_sync();

  std::vector<float> q_values(std::span<const float> input) const { return online_.forward(input); }
  const Mlp& online() const { return online_; }
  Mlp& online() { return online_; }
  const Mlp& target() const { return target_; }
  const ReplayBuffer& replay() const { return replay_; }
  const DqnParams& params() const { return params_; }
  std::uint64_t train_steps() const { return train_steps_; }

 private:
  DqnParams params_;
  Mlp online_;
  Mlp target_;
  ReplayBuffer replay_;
  Rng rng_;
  std::uint64_t decisions_ = 0;
  std::uint64_t train_steps_ = 0;
};

/// Always returns the no-op action; the static baseline.
class NoopAgent final : public Agent {
 public:
  AgentKind kind() const override { return AgentKind::None; }
  ActionId act(const Observation&, bool) override { return action::kNoop; }
  void learn(const Transition&) override {}
  std::unique_ptr<Agent> clone() const override { return std::make_unique<NoopAgent>(*this); }
};

/// Rule-based readahead tuner: double above `high` sequentiality, halve below
/// `low`, otherwise leave the config alone.
class HeuristicAgent final : public Agent {
 public:
  explicit HeuristicAgent(double low = 0.2, double high = 0.8) : low_(low), high_(high) {}

  AgentKind kind() const override { return AgentKind::Heuristic; }
  ActionId act(const Observation& obs, bool) override;
  void learn(const Transition&) override {}
  std::unique_ptr<Agent> clone() const override { return std::make_unique<HeuristicAgent>(*this); }

 private:
  double low_, high_;
};

inline constexpr std::uint8_t kAgentFormatVersion = 1;

/// `RLSA`, version, kind, then a Q-table (state count, action count, float32
/// values row-major) or an embedded network. Only learning agents serialize.
std::vector<std::uint8_t> save_agent(const Agent& agent);
std::unique_ptr<Agent> load_agent(std::span<const std::uint8_t> bytes);

}  // namespace rlstorage
