#include <cmath>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "rlstorage/agent.hpp"

using namespace rlstorage;

namespace {

Observation obs_state(StateId s) {
  Observation o;
  o.state = s;
  return o;
}

Observation obs_input(std::vector<float> x) {
  Observation o;
  o.input = std::move(x);
  return o;
}

}  // namespace

TEST_CASE("actions halve and double with clamps") {
  const TunableConfig c{8, 8, 1024};
  CHECK(apply_action(c, action::kNoop) == c);
  CHECK(apply_action(c, action::kReadaheadHalve).readahead_pages == 4);
  CHECK(apply_action(c, action::kReadaheadDouble).readahead_pages == 16);
  CHECK(apply_action(c, action::kQueueHalve).queue_depth == 4);
  CHECK(apply_action(c, action::kQueueDouble).queue_depth == 16);
  CHECK(apply_action(c, action::kCacheHalve).cache_pages == 512);
  CHECK(apply_action(c, action::kCacheDouble).cache_pages == 2048);

  CHECK(apply_action({1, 1, 1}, action::kReadaheadHalve).readahead_pages == 0);
  CHECK(apply_action({0, 1, 1}, action::kReadaheadHalve).readahead_pages == 0);
  CHECK(apply_action({0, 1, 1}, action::kReadaheadDouble).readahead_pages == 1);
  CHECK(apply_action({256, 1, 1}, action::kReadaheadDouble).readahead_pages == 256);
  CHECK(apply_action({0, 1, 1}, action::kQueueHalve).queue_depth == 1);
  CHECK(apply_action({0, 1024, 1}, action::kQueueDouble).queue_depth == 1024);
  CHECK(apply_action({0, 1, 1}, action::kCacheHalve).cache_pages == 1);
  CHECK(apply_action({0, 1, 1u << 22}, action::kCacheDouble).cache_pages == 1u << 22);
  CHECK_THROWS_AS(apply_action(c, 7), std::out_of_range);

  for (ActionId a = 0; a < kActionCount; ++a) {
    CHECK_NOTHROW(apply_action(c, a).validate());
    CHECK(std::string(action_name(a)).size() > 0);
  }
}

TEST_CASE("discounted return") {
  const std::vector<double> r = {1, 1, 1};
  CHECK(discounted_return(r, 0.5) == doctest::Approx(1.75));
  CHECK(discounted_return({}, 0.9) == 0.0);
  const std::vector<double> one = {3.0};
  CHECK(discounted_return(one, 0.0) == 3.0);
}

TEST_CASE("epsilon schedule") {
  const EpsilonSchedule e;
  CHECK(e.at(0) == 1.0);
  CHECK(e.at(1000) == doctest::Approx(0.525));
  CHECK(e.at(2000) == doctest::Approx(0.05));
  CHECK(e.at(100000) == doctest::Approx(0.05));
}

TEST_CASE("greedy and epsilon-greedy selection") {
  const std::vector<float> q = {0.1f, 0.5f, 0.5f, -1.0f};
  CHECK(greedy_action(q) == 1);
  Rng rng(1);
  for (int k = 0; k < 20; ++k) CHECK(select_action(q, 0.0, rng) == 1);
  std::array<int, 4> counts{};
  for (int k = 0; k < 4000; ++k) ++counts[select_action(q, 1.0, rng)];
  for (int c : counts) CHECK(c > 800);
  CHECK_THROWS_AS(select_action(q, 1.5, rng), std::invalid_argument);
}

TEST_CASE("q_update by hand and against the oracle") {
  QTable t(2, 2);
  t.at(1, 0) = 2.0f;
  t.at(1, 1) = 4.0f;
  CHECK(q_update(t, 0, 0, 1.0, 1, 0.5, 0.9) == doctest::Approx(0.5 * (1.0 + 0.9 * 4.0)));
  CHECK(q_update(t, 0, 1, 1.0, 1, 0.5, 0.9, true) == doctest::Approx(0.5));
  CHECK_THROWS_AS(q_update(t, 2, 0, 0, 0, 0.1, 0.9), std::out_of_range);

  Rng rng(9);
  for (int k = 0; k < 100; ++k) {
    QTable q(3, kActionCount);
    for (auto& v : q.values()) v = static_cast<float>(uniform_real(rng, -5, 5));
    const StateId s = uniform_below(rng, 3), s2 = uniform_below(rng, 3);
    const auto a = static_cast<ActionId>(uniform_below(rng, kActionCount));
    const double r = uniform_real(rng, -2, 2), alpha = uniform_real(rng, 0.01, 1), gamma = uniform_real(rng, 0, 0.99);
    const std::vector<double> row(q.row(s2).begin(), q.row(s2).end());
    const double expect = oracle::q_update(q.at(s, a), r, row, alpha, gamma);
    CHECK(oracle::rel_err(q_update(q, s, a, r, s2, alpha, gamma), expect) < 1e-6);
  }
}

TEST_CASE("tabular agent learns from transitions") {
  TabularParams p;
  p.alpha = 1.0;
  p.gamma = 0.0;
  TabularAgent agent(4, p);
  CHECK(agent.act(obs_state(2), false) == 0);
  agent.learn({obs_state(2), action::kQueueDouble, 1.0, obs_state(3), false});
  CHECK(agent.act(obs_state(2), false) == action::kQueueDouble);
  CHECK(agent.table().at(2, action::kQueueDouble) == 1.0f);
  CHECK_THROWS_AS(TabularAgent(4, TabularParams{0.0, 0.9, {}, 0}), std::invalid_argument);
}

TEST_CASE("replay buffer is a ring with seeded sampling") {
  ReplayBuffer b(3, 5);
  CHECK_THROWS_AS(b.sample(1), std::logic_error);
  for (int k = 0; k < 5; ++k) b.push({{static_cast<float>(k)}, 0, 0.0f, {}, false});
  CHECK(b.size() == 3);
  std::set<float> seen;
  for (const auto& s : b.sample(100)) seen.insert(s.state[0]);
  CHECK(seen == std::set<float>{2.0f, 3.0f, 4.0f});

  ReplayBuffer x(8, 1), y(8, 1);
  for (int k = 0; k < 8; ++k) {
    x.push({{static_cast<float>(k)}, 0, 0.0f, {}, false});
    y.push({{static_cast<float>(k)}, 0, 0.0f, {}, false});
  }
  CHECK(x.sample(16) == y.sample(16));
}

TEST_CASE("dqn train step lowers the TD loss on a fixed batch") {
  DqnParams p;
  p.seed = 3;
  p.target_sync_interval = 1000;
  DqnAgent agent(p);
  std::vector<DqnSample> batch;
  Rng rng(2);
  for (int k = 0; k < 16; ++k) {
    std::vector<float> s(kFeatureCount);
    for (auto& v : s) v = static_cast<float>(uniform01(rng));
    batch.push_back({s, static_cast<ActionId>(k % kActionCount), static_cast<float>(s[0]), s, true});
  }
  const double first = agent.train_step(batch);
  double last = first;
  for (int k = 0; k < 300; ++k) last = agent.train_step(batch);
  CHECK(last < 0.1 * first);
  CHECK(agent.train_steps() == 301);
}

TEST_CASE("dqn target network syncs on schedule") {
  DqnParams p;
  p.batch_size = 2;
  p.replay_capacity = 8;
  p.target_sync_interval = 3;
  DqnAgent agent(p);
  const Mlp initial = agent.target();
  const Observation o = obs_input(std::vector<float>(kFeatureCount, 0.5f));
  for (int k = 0; k < 3; ++k) agent.learn({o, 1, 1.0, o, false});
  CHECK(agent.train_steps() == 2);
  CHECK(agent.target() == initial);
  agent.learn({o, 1, 1.0, o, false});
  CHECK(agent.train_steps() == 3);
  CHECK(agent.target() == agent.online());
}

TEST_CASE("heuristic agent follows sequentiality") {
  HeuristicAgent h;
  Observation o;
  o.features.sequentiality = 0.9;
  CHECK(h.act(o, true) == action::kReadaheadDouble);
  o.features.sequentiality = 0.1;
  CHECK(h.act(o, true) == action::kReadaheadHalve);
  o.features.sequentiality = 0.5;
  CHECK(h.act(o, true) == action::kNoop);
  NoopAgent n;
  CHECK(n.act(o, true) == action::kNoop);
}

TEST_CASE("agent kinds by name") {
  CHECK(agent_kind_from_name("tabular") == AgentKind::Tabular);
  CHECK(agent_kind_from_name("dqn") == AgentKind::Dqn);
  CHECK(agent_kind_from_name("none") == AgentKind::None);
  CHECK(agent_kind_from_name("static") == AgentKind::None);
  CHECK(agent_kind_from_name("heuristic") == AgentKind::Heuristic);
  CHECK_THROWS_AS(agent_kind_from_name("ppo"), std::invalid_argument);
}

TEST_CASE("agent serialization") {
  TabularAgent tab(81, TabularParams{});
  tab.table().at(5, 3) = 1.5f;
  const auto bytes = save_agent(tab);
  CHECK(bytes.size() == 4 + 1 + 1 + 4 + 4 + 81 * 7 * 4);
  CHECK(bytes.size() <= 5120);
  const auto back = load_agent(bytes);
  REQUIRE(back->kind() == AgentKind::Tabular);
  CHECK(dynamic_cast<TabularAgent&>(*back).table() == tab.table());
  CHECK(save_agent(*back) == bytes);

  DqnAgent dqn(DqnParams{});
  const auto dbytes = save_agent(dqn);
  const auto dback = load_agent(dbytes);
  REQUIRE(dback->kind() == AgentKind::Dqn);
  CHECK(dynamic_cast<DqnAgent&>(*dback).online() == dqn.online());

  CHECK_THROWS_AS(save_agent(NoopAgent{}), std::invalid_argument);
  CHECK_THROWS_AS(save_agent(HeuristicAgent{}), std::invalid_argument);

  auto bad = bytes;
  bad[4] = 2;
  CHECK_THROWS_AS(load_agent(bad), FormatError);
  bad = bytes;
  bad[5] = 9;
  CHECK_THROWS_AS(load_agent(bad), FormatError);
  bad = bytes;
  bad[10] = 6;  // action count
  CHECK_THROWS_AS(load_agent(bad), FormatError);
  bad = bytes;
  bad.resize(bytes.size() - 1);
  CHECK_THROWS_AS(load_agent(bad), FormatError);
  bad = bytes;
  bad.push_back(0);
  CHECK_THROWS_AS(load_agent(bad), FormatError);
  CHECK_THROWS_AS(load_agent(std::vector<std::uint8_t>{}), FormatError);
}
