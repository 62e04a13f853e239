#include "rlstorage/agent.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rlstorage/binio.hpp"

namespace rlstorage {
namespace {

std::uint32_t halve(std::uint32_t v, std::uint32_t lo) { return std::max(v / 2, lo); }

std::uint32_t twice(std::uint32_t v, std::uint32_t hi) {
  return static_cast<std::uint32_t>(std::min<std::uint64_t>(std::uint64_t{v} * 2, hi));
}

}  // namespace

const char* action_name(ActionId a) {
  static constexpr std::array<const char*, kActionCount> names = {
      "noop", "readahead/2", "readahead*2", "queue_depth/2", "queue_depth*2", "cache/2", "cache*2"};
  if (a >= kActionCount) throw std::out_of_range("action id out of range");
  return names[a];
}

TunableConfig apply_action(const TunableConfig& config, ActionId a) {
  TunableConfig c = config;
  switch (a) {
    case action::kNoop:
      break;
    case action::kReadaheadHalve:
      c.readahead_pages /= 2;
      break;
    case action::kReadaheadDouble:
      c.readahead_pages = c.readahead_pages == 0 ? 1 : twice(c.readahead_pages, TunableConfig::kMaxReadahead);
      break;
    case action::kQueueHalve:
      c.queue_depth = halve(c.queue_depth, 1);
      break;
    case action::kQueueDouble:
      c.queue_depth = twice(c.queue_depth, TunableConfig::kMaxQueueDepth);
      break;
    case action::kCacheHalve:
      c.cache_pages = halve(c.cache_pages, 1);
      break;
    case action::kCacheDouble:
      c.cache_pages = twice(c.cache_pages, TunableConfig::kMaxCachePages);
      break;
    default:
      throw std::out_of_range("action id out of range");
  }
  return c;
}

double discounted_return(std::span<const double> rewards, double gamma) {
  double total = 0.0;
  double weight = 1.0;
  for (double r : rewards) {
    total += weight * r;
    weight *= gamma;
  }
  return total;
}

double EpsilonSchedule::at(std::uint64_t step) const {
  if (decay_steps == 0) return end;
  const double frac = std::min(1.0, static_cast<double>(step) / static_cast<double>(decay_steps));
  return start + (end - start) * frac;
}

ActionId greedy_action(std::span<const float> q_values) {
  if (q_values.empty()) throw std::invalid_argument("no action values");
  return static_cast<ActionId>(std::max_element(q_values.begin(), q_values.end()) - q_values.begin());
}

ActionId select_action(std::span<const float> q_values, double epsilon, Rng& rng) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in [0, 1]");
  if (epsilon > 0.0 && uniform01(rng) < epsilon)
    return static_cast<ActionId>(uniform_below(rng, q_values.size()));
  return greedy_action(q_values);
}

// ---------------------------------------------------------------------------

QTable::QTable(std::size_t states, std::size_t actions)
    : states_(states), actions_(actions), values_(states * actions, 0.0f) {
  if (states == 0 || actions == 0) throw std::invalid_argument("empty Q-table");
}

float QTable::max(std::size_t s) const {
  const auto r = row(s);
  return *std::max_element(r.begin(), r.end());
}

float q_update(QTable& table, StateId s, ActionId a, double reward, StateId s_next, double alpha, double gamma,
               bool terminal) {
  if (s >= table.states() || s_next >= table.states() || a >= table.actions())
    throw std::out_of_range("state or action out of table range");
  float& q = table.at(s, a);
  const double target = reward + (terminal ? 0.0 : gamma * static_cast<double>(table.max(s_next)));
  q = static_cast<float>(static_cast<double>(q) + alpha * (target - static_cast<double>(q)));
  return q;
}

const char* agent_kind_name(AgentKind k) {
  switch (k) {
    case AgentKind::Tabular:
      return "tabular";
    case AgentKind::Dqn:
      return "dqn";
    case AgentKind::None:
      return "none";
    case AgentKind::Heuristic:
      return "heuristic";
  }
  return "?";
}

AgentKind agent_kind_from_name(const std::string& name) {
  if (name == "tabular") return AgentKind::Tabular;
  if (name == "dqn") return AgentKind::Dqn;
  if (name == "none" || name == "static") return AgentKind::None;
  if (name == "heuristic") return AgentKind::Heuristic;
  throw std::invalid_argument("unknown agent kind: " + name);
}

// ---------------------------------------------------------------------------

void TabularParams::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0, 1]");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in [0, 1)");
}

TabularAgent::TabularAgent(std::size_t states, TabularParams params)
    : TabularAgent(QTable(states), params) {}

TabularAgent::TabularAgent(QTable table, TabularParams params)
    : table_(std::move(table)), params_(params), rng_(params.seed) {
  params_.validate();
}

ActionId TabularAgent::act(const Observation& obs, bool explore) {
  const double eps = explore ? params_.epsilon.at(decisions_++) : 0.0;
  return select_action(table_.row(obs.state), eps, rng_);
}

void TabularAgent::learn(const Transition& t) {
  q_update(table_, t.state.state, t.action, t.reward, t.next.state, params_.alpha, params_.gamma, t.terminal);
}

// ---------------------------------------------------------------------------

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::uint64_t seed) : capacity_(capacity), rng_(seed) {
  if (capacity == 0) throw std::invalid_argument("replay capacity must be >= 1");
  items_.reserve(capacity);
}

void ReplayBuffer::push(DqnSample sample) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(sample));
  } else {
    items_[head_] = std::move(sample);
  }
  head_ = (head_ + 1) % capacity_;
}

std::vector<DqnSample> ReplayBuffer::sample(std::size_t n) {
  if (items_.empty()) throw std::logic_error("sampling from an empty replay buffer");
  std::vector<DqnSample> batch;
  batch.reserve(n);
  for (std::size_t k = 0; k < n; ++k) batch.push_back(items_[uniform_below(rng_, items_.size())]);
  return batch;
}

std::vector<std::size_t> DqnParams::layer_sizes() const {
  std::vector<std::size_t> sizes{input_size};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(kActionCount);
  return sizes;
}

void DqnParams::validate() const {
  if (hidden.empty()) throw std::invalid_argument("DQN needs at least one hidden layer");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in [0, 1)");
  if (batch_size == 0 || replay_capacity < batch_size)
    throw std::invalid_argument("replay capacity must hold at least one batch");
  if (target_sync_interval == 0) throw std::invalid_argument("target sync interval must be >= 1");
}

DqnAgent::DqnAgent(DqnParams params)
    : DqnAgent(Mlp(params.layer_sizes(), mix_seed(params.seed, 1)), params) {}

DqnAgent::DqnAgent(Mlp online, DqnParams params)
    : params_(std::move(params)),
      online_(std::move(online)),
      target_(online_),
      replay_(params_.replay_capacity, mix_seed(params_.seed, 2)),
      rng_(mix_seed(params_.seed, 3)) {
  params_.validate();
  if (online_.output_size() != kActionCount) throw std::invalid_argument("DQN output must have 7 actions");
  params_.input_size = online_.input_size();
  const auto& sizes = online_.layer_sizes();
  params_.hidden.assign(sizes.begin() + 1, sizes.end() - 1);
}

ActionId DqnAgent::act(const Observation& obs, bool explore) {
  const double eps = explore ? params_.epsilon.at(decisions_++) : 0.0;
  return select_action(online_.forward(obs.input), eps, rng_);
}

void DqnAgent::learn(const Transition& t) {
  replay_.push({t.state.input, t.action, static_cast<float>(t.reward), t.next.input, t.terminal});
  if (replay_.size() < params_.batch_size) return;
  const auto batch = replay_.sample(params_.batch_size);
  train_step(batch);
}

double DqnAgent::train_step(std::span<const DqnSample> batch) {
  if (batch.empty()) throw std::invalid_argument("empty training batch");
  const float scale = 2.0f / static_cast<float>(batch.size());
  Mlp::Params grad(online_.parameter_count(), 0.0f);
  double loss = 0.0;
  std::vector<float> out_grad(kActionCount);
  for (const auto& s : batch) {
    if (s.action >= kActionCount) throw std::out_of_range("action out of range");
    double y = s.reward;
    if (!s.terminal) {
      const auto next_q = target_.forward(s.next);
      y += params_.gamma * static_cast<double>(*std::max_element(next_q.begin(), next_q.end()));
    }
    const auto q = online_.forward(s.state);
    const double err = static_cast<double>(q[s.action]) - y;
    loss += err * err;
    std::fill(out_grad.begin(), out_grad.end(), 0.0f);
    out_grad[s.action] = scale * static_cast<float>(err);
    const auto g = online_.backward(s.state, out_grad);
    for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += g[k];
  }
  online_.sgd_step(grad, static_cast<float>(params_.learning_rate));
  if (++train_steps_ % params_.target_sync_interval == 0) target_sync();
  return loss / static_cast<double>(batch.size());
}

void DqnAgent::target_sync() { target_ = online_; }

ActionId HeuristicAgent::act(const Observation& obs, bool) {
  if (obs.features.sequentiality > high_) return action::kReadaheadDouble;
  if (obs.features.sequentiality < low_) return action::kReadaheadHalve;
  return action::kNoop;
}

// ---------------------------------------------------------------------------

std::vector<std::uint8_t> save_agent(const Agent& agent) {
  ByteWriter w;
  w.magic("RLSA");
  w.u8(kAgentFormatVersion);
  w.u8(static_cast<std::uint8_t>(agent.kind()));
  if (const auto* tab = dynamic_cast<const TabularAgent*>(&agent)) {
    const QTable& t = tab->table();
    w.u32(static_cast<std::uint32_t>(t.states()));
    w.u32(static_cast<std::uint32_t>(t.actions()));
    for (float v : t.values()) w.f32(v);
  } else if (const auto* dqn = dynamic_cast<const DqnAgent*>(&agent)) {
    write_mlp(w, dqn->online());
  } else {
    throw std::invalid_argument(std::string("agent kind '") + agent_kind_name(agent.kind()) +
                                "' has no learned state to save");
  }
  return w.take();
}

std::unique_ptr<Agent> load_agent(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic("RLSA");
  if (r.u8() != kAgentFormatVersion) throw FormatError("unsupported agent format version");
  const auto kind = r.u8();
  std::unique_ptr<Agent> out;
  if (kind == static_cast<std::uint8_t>(AgentKind::Tabular)) {
    const std::uint32_t states = r.u32();
    const std::uint32_t actions = r.u32();
    if (actions != kActionCount) throw FormatError("agent file has unexpected action count");
    if (states == 0 || r.remaining() < std::size_t{4} * states * actions) throw FormatError("truncated byte stream");
    QTable table(states, actions);
    for (float& v : table.values()) {
      v = r.f32();
      if (!std::isfinite(v)) throw FormatError("non-finite Q-value");
    }
    out = std::make_unique<TabularAgent>(std::move(table), TabularParams{});
  } else if (kind == static_cast<std::uint8_t>(AgentKind::Dqn)) {
    Mlp online = read_mlp(r);
    out = std::make_unique<DqnAgent>(std::move(online), DqnParams{});
  } else {
    throw FormatError("unknown agent kind byte");
  }
  if (r.remaining() != 0) throw FormatError("trailing bytes after agent");
  return out;
}

}  // namespace rlstorage
