#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "rantl/config.hpp"
#include "rantl/explore.hpp"
#include "rantl/qnet.hpp"

namespace rantl {

struct Transition {
  std::vector<double> state;
  int action = 0;
  double reward = 0.0;
  std::vector<double> next_state;
  bool done = false;
  /// Actions the bootstrap max ranges over at next_state; empty means all.
  std::vector<int> next_allowed;
};

/// Fixed-capacity FIFO ring of transitions with uniform sampling.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const noexcept { return size_; }
  std::size_t capacity() const noexcept { return slots_.size(); }

  /// i-th stored transition, 0 = oldest.
  const Transition& at(std::size_t i) const;
  /// Uniform index in [0, size()).
  std::size_t sample_index(std::mt19937_64& rng) const;

 private:
  std::vector<Transition> slots_;
  std::size_t head_ = 0;  // next write slot
  std::size_t size_ = 0;
};

struct DqnParams {
  int state_dim = 4;
  int n_actions = 121;
  std::vector<int> hidden{30, 30};
  CellKind cell = CellKind::dense;
  int unroll = 8;
  double gamma = 0.95;
  double learning_rate = 1e-3;
  int batch_size = 32;
  int warmup = 200;
  int replay_capacity = 10000;
  int target_sync = 100;

  static DqnParams from_config(const ScenarioConfig& cfg);
};

/// Deep Q-learner: online and target QNet, replay buffer, one RNG that
/// drives both exploration and minibatch sampling.
class DqnLearner {
 public:
  DqnLearner(DqnParams params, std::uint64_t seed);

  /// Epsilon-greedy action over `allowed` from the online net's values.
  int act(std::span<const double> state, double epsilon, std::span<const int> allowed);
  std::vector<double> q_values(std::span<const double> state);

  /// Store the transition with reward + shaping and, once warm, run one
  /// minibatch update. Returns the pre-update loss when an update ran.
  std::optional<double> step(const Transition& t, double shaping);

  /// Extra reward added to every TD target at update time, evaluated on the
  /// sampled (state, action). Unset means none.
  using TargetBonus = std::function<double(std::span<const double> state, int action)>;
  void set_target_bonus(TargetBonus bonus) { bonus_ = std::move(bonus); }

  /// Minibatch TD targets for the given stored indices (exposed for tests).
  std::vector<double> td_targets(std::span<const std::size_t> indices) const;

  const QNet& online() const noexcept { return online_; }
  const QNet& target() const noexcept { return target_; }
  const ReplayBuffer& replay() const noexcept { return replay_; }
  const DqnParams& params() const noexcept { return params_; }
  long updates() const noexcept { return updates_; }

 private:
  /// Input sequence ending at stored index i (state side or next-state side).
  int sequence(std::size_t i, bool next, std::vector<double>& out) const;

  DqnParams params_;
  QNet online_;
  QNet target_;
  ReplayBuffer replay_;
  std::mt19937_64 rng_;
  long steps_ = 0;
  long updates_ = 0;
  std::deque<std::vector<double>> history_;  // recent states for the LSTM kind
  TargetBonus bonus_;
};

/// One learner step: store and maybe train. Throws std::invalid_argument
/// for a non-finite shaping term.
std::optional<double> dqn_step(DqnLearner& learner, const Transition& t, double shaping);

}  // namespace rantl
