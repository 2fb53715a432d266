#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "rantl/dqn.hpp"
#include "rantl/explore.hpp"
#include "rantl/qtable.hpp"
#include "rantl/seed.hpp"
#include "support.hpp"

using namespace rantl;
using namespace rantl::testing;

TEST_CASE("q_update with alpha 1 and gamma 0 stores the reward") {
  QTable t({0, 1}, 1.0, 0.0);
  q_update(t, 3, 2, 0.7, 9);
  CHECK(t.value(3, 2) == 0.7);
  CHECK(t.visits(3, 2) == 1);
}

TEST_CASE("zero rewards keep the table at zero") {
  QTable t({0, 1}, 0.3, 0.9);
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> s(0, 15), a(0, 10);
  for (int i = 0; i < 500; ++i) q_update(t, s(rng), a(rng), 0.0, s(rng));
  for (double v : t.values()) CHECK(v == 0.0);
}

TEST_CASE("out-of-domain states are contract violations") {
  QTable t({2, 3}, 0.1, 0.9);
  CHECK_THROWS_AS(q_update(t, 16, 0, 0.0, 0), ContractViolation);
  CHECK_THROWS_AS(q_update(t, 0, 11, 0.0, 0), ContractViolation);
  CHECK_THROWS_AS(q_update(t, 0, 0, 0.0, -1), ContractViolation);
  CHECK_THROWS_AS(QTable({0, 1, 2}, 0.1, 0.9), ContractViolation);
}

TEST_CASE("tabular Q-learning converges to the value-iteration fixed point") {
  const ToyMdp m;
  const QStar star = value_iteration(m);
  // fixed point of the Bellman optimality equation
  for (int s = 0; s < 2; ++s)
    for (int a = 0; a < 2; ++a)
      CHECK(star[s][a] ==
            doctest::Approx(m.reward[s][a] + m.gamma * std::max(star[a][0], star[a][1]))
                .epsilon(1e-9));
  const QTable q = tabular_q(m, 10000, 17);
  double sup = 0.0;
  for (int s = 0; s < 2; ++s)
    for (int a = 0; a < 2; ++a) sup = std::max(sup, std::abs(q.value(s, a) - star[s][a]));
  CHECK(sup < 1e-3);
}

TEST_CASE("constant reward shift moves Q by c/(1-gamma) and keeps the argmax") {
  ToyMdp m, shifted;
  const double c = 0.35;
  for (auto& row : shifted.reward)
    for (auto& r : row) r += c;
  const QStar a = value_iteration(m), b = value_iteration(shifted);
  for (int s = 0; s < 2; ++s) {
    for (int k = 0; k < 2; ++k) CHECK(b[s][k] - a[s][k] == doctest::Approx(c / (1 - m.gamma)));
    CHECK(greedy(a[s].data(), 2) == greedy(b[s].data(), 2));
  }
  const QTable qa = tabular_q(m, 20000, 3), qb = tabular_q(shifted, 20000, 3);
  for (int s = 0; s < 2; ++s) CHECK(greedy(qa.row(s).data(), 2) == greedy(qb.row(s).data(), 2));
}

TEST_CASE("DQN on one-hot states recovers the tabular greedy policy") {
  const ToyMdp m;
  const QTable tab = tabular_q(m, 10000, 1);
  DqnLearner learner = dqn_on_toy(m, 4000, 7);
  for (int s = 0; s < 2; ++s) {
    std::vector<double> sv(2, 0.0);
    sv[s] = 1.0;
    const auto q = learner.q_values(sv);
    CHECK(greedy(q.data(), 2) == greedy(tab.row(s).data(), 2));
  }
}

TEST_CASE("QTable text round-trip keeps every value exactly") {
  QTable t = random_table(ResourceDim::compute, 4);
  t.set_visits(5, 3, 12);
  t.training_tti = 77;
  t.final_mean_reward = 0.123456789012345;
  std::stringstream ss;
  t.save(ss);
  CHECK(QTable::load(ss) == t);
  std::stringstream bad("qtable v1\nsignature 0 1\nlevels x\n");
  CHECK_THROWS_AS(QTable::load(bad), std::runtime_error);
}

TEST_CASE("experts read their own two dimensions") {
  CHECK(signature_of(ResourceDim::radio) == std::vector<int>{0, 1});
  CHECK(signature_of(ResourceDim::compute) == std::vector<int>{2, 3});
  ScenarioConfig cfg;
  cfg.expert_train_tti = 0;
  const QTable empty = train_expert(cfg, ResourceDim::radio, 1);
  CHECK(empty.n_states() == 16);
  CHECK(empty.n_actions() == 11);
  for (double v : empty.values()) CHECK(v == 0.0);
}

TEST_CASE("trained radio expert beats the even split; both experts stay bounded") {
  const ScenarioConfig cfg;
  const double bound = 1.0 / (1.0 - cfg.gamma);
  for (ResourceDim dim : {ResourceDim::radio, ResourceDim::compute}) {
    const QTable t = train_expert(cfg, dim, 42);
    for (double v : t.values()) {
      CHECK(v >= -bound);
      CHECK(v <= bound);
    }
  }
  // Only the radio expert is compared: at the default load the even CPU split
  // is already within noise of the best fixed split, so there is little to beat.
  // the radio expert the default pipeline trains (train-experts, seed base 1)
  const QTable radio = train_expert(cfg, ResourceDim::radio, derive_seed(cfg.rng_seed, 0));
  double learned = 0.0, fixed = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    learned += evaluate_expert(radio, ResourceDim::radio, cfg, 1000 + seed, 1000);
    fixed += evaluate_fixed(JointAction{5, 5}, cfg, 1000 + seed, 1000);
  }
  CHECK(learned > fixed);
}

TEST_CASE("select_action: greedy, restricted and uniform") {
  std::mt19937_64 rng(1);
  const std::vector<double> q{0.1, 0.9, 0.3, 0.2, 0.5};
  const std::vector<int> all{0, 1, 2, 3, 4}, some{0, 2, 3};
  CHECK(select_action(q, 0.0, all, rng) == 1);
  CHECK(select_action(q, 0.0, some, rng) == 2);
  const std::vector<double> tie{0.4, 0.4, 0.1};
  const std::vector<int> rev{2, 1, 0};
  CHECK(select_action(tie, 0.0, rev, rng) == 0);
  CHECK_THROWS_AS(select_action(q, 0.0, std::vector<int>{}, rng), ContractViolation);

  // epsilon 1: multinomial over four allowed actions, 3 sigma each
  const std::vector<int> four{1, 2, 3, 4};
  std::array<int, 5> hits{};
  const int n = 10000;
  for (int i = 0; i < n; ++i) ++hits[select_action(q, 1.0, four, rng)];
  CHECK(hits[0] == 0);
  const double sigma = std::sqrt(n * 0.25 * 0.75);
  for (int a : four) CHECK(std::abs(hits[a] - n * 0.25) < 3 * sigma);
}

TEST_CASE("exploration schedule") {
  const ExplorationSchedule e{1.0, 0.05, 1000};
  CHECK(e.epsilon(0) == 1.0);
  CHECK(e.epsilon(1000) == 0.05);
  CHECK(e.epsilon(5000) == 0.05);
  for (long t = 1; t < 1200; ++t) CHECK(e.epsilon(t) <= e.epsilon(t - 1));
}

TEST_CASE("replay buffer: capacity, FIFO eviction, uniform sampling") {
  ReplayBuffer rb(10);
  for (int i = 0; i < 25; ++i) rb.push(Transition{{0, 0, 0, 0}, i, 0.0, {0, 0, 0, 0}});
  CHECK(rb.size() == 10);
  for (std::size_t i = 0; i < 10; ++i) CHECK(rb.at(i).action == 15 + static_cast<int>(i));
  std::mt19937_64 rng(2);
  std::array<int, 10> hits{};
  const int n = 20000;
  for (int i = 0; i < n; ++i) ++hits[rb.sample_index(rng)];
  const double sigma = std::sqrt(n * 0.1 * 0.9);
  for (int h : hits) CHECK(std::abs(h - n * 0.1) < 4 * sigma);
}

TEST_CASE("DQN step: terminal targets, warm-up, errors") {
  DqnParams p;
  p.warmup = 5;
  p.batch_size = 4;
  DqnLearner learner(p, 3);
  const std::vector<double> s{0.1, 0.2, 0.3, 0.4};
  for (int i = 0; i < 4; ++i) CHECK(!learner.step(Transition{s, i, 0.5, s, true}, 0.25).has_value());
  CHECK(learner.step(Transition{s, 9, 0.5, s, true}, 0.25).has_value());
  const std::size_t idx[] = {0, 4};
  for (double y : learner.td_targets(idx)) CHECK(y == 0.75);  // reward + shaping, no bootstrap
  CHECK(learner.replay().at(0).reward == 0.75);

  learner.set_target_bonus([](std::span<const double>, int a) { return a == 9 ? 1.0 : 0.0; });
  CHECK(learner.td_targets(idx)[1] == 1.75);

  CHECK_THROWS_AS(learner.step(Transition{s, 0, 0.0, s, false}, NAN), std::invalid_argument);
  CHECK_THROWS_AS(dqn_step(learner, Transition{s, 0, 0.0, s, false}, INFINITY),
                  std::invalid_argument);
  CHECK_THROWS_AS(learner.step(Transition{s, 500, 0.0, s, false}, 0.0), ContractViolation);
}

TEST_CASE("bootstrap max ranges over the allowed next actions only") {
  DqnParams p;
  p.warmup = 1000;  // no training, target net stays the initial one
  DqnLearner learner(p, 6);
  const std::vector<double> s{0.3, 0.1, 0.7, 0.2};
  learner.step(Transition{s, 0, 0.0, s, false, {}}, 0.0);
  learner.step(Transition{s, 0, 0.0, s, false, {4, 17}}, 0.0);
  const auto q = learner.target().evaluate(s, 1);
  const std::size_t idx[] = {0, 1};
  const auto y = learner.td_targets(idx);
  CHECK(y[0] == doctest::Approx(0.95 * *std::max_element(q.begin(), q.end())));
  CHECK(y[1] == doctest::Approx(0.95 * std::max(q[4], q[17])));
}

TEST_CASE("same seed, same action sequence") {
  auto run = [](std::uint64_t seed) {
    DqnParams p;
    p.warmup = 20;
    DqnLearner l(p, seed);
    std::vector<int> acts;
    std::vector<int> all(121);
    std::iota(all.begin(), all.end(), 0);
    std::vector<double> s{0, 0, 0, 0};
    for (int t = 0; t < 150; ++t) {
      const int a = l.act(s, 0.3, all);
      acts.push_back(a);
      std::vector<double> n{a / 121.0, 0.5, 0.1, 0.0};
      l.step(Transition{s, a, std::sin(a), n, false}, 0.0);
      s = n;
    }
    return acts;
  };
  CHECK(run(4) == run(4));
  CHECK(run(4) != run(5));
}
