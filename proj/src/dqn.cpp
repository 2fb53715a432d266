#include "rantl/dqn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rantl {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : slots_(capacity) {
  if (capacity == 0) throw ContractViolation("replay capacity must be >= 1");
}

void ReplayBuffer::push(Transition t) {
  slots_[head_] = std::move(t);
  head_ = (head_ + 1) % slots_.size();
  size_ = std::min(size_ + 1, slots_.size());
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= size_) throw ContractViolation("replay index out of range");
  const std::size_t oldest = (head_ + slots_.size() - size_) % slots_.size();
  return slots_[(oldest + i) % slots_.size()];
}

std::size_t ReplayBuffer::sample_index(std::mt19937_64& rng) const {
  if (size_ == 0) throw ContractViolation("sampling from an empty replay buffer");
  std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
  return pick(rng);
}

DqnParams DqnParams::from_config(const ScenarioConfig& cfg) {
  DqnParams p;
  p.cell = cfg.cell;
  p.hidden = cfg.cell == CellKind::dense ? std::vector<int>{cfg.hidden_width, cfg.hidden_width}
                                         : std::vector<int>{cfg.hidden_width};
  p.unroll = cfg.recurrent_unroll;
  p.gamma = cfg.gamma;
  p.learning_rate = cfg.learning_rate;
  p.batch_size = cfg.batch_size;
  p.warmup = cfg.warmup;
  p.replay_capacity = cfg.replay_capacity;
  p.target_sync = cfg.target_sync;
  return p;
}

namespace {
QNetTopology topology_of(const DqnParams& p) {
  QNetTopology t;
  t.input_dim = p.state_dim;
  t.hidden = p.hidden;
  t.output_dim = p.n_actions;
  t.cell = p.cell;
  return t;
}
}  // namespace

DqnLearner::DqnLearner(DqnParams params, std::uint64_t seed)
    : params_(std::move(params)),
      online_(topology_of(params_), seed, AdamParams{params_.learning_rate}),
      target_(online_),
      replay_(static_cast<std::size_t>(params_.replay_capacity)),
      rng_(seed + 0x632be59bd9b4e019ULL) {}

std::vector<double> DqnLearner::q_values(std::span<const double> state) {
  if (state.size() != static_cast<std::size_t>(params_.state_dim))
    throw ContractViolation("learner state dimension mismatch");
  if (params_.cell == CellKind::dense) return online_.evaluate(state, 1);
  history_.emplace_back(state.begin(), state.end());
  while (history_.size() > static_cast<std::size_t>(params_.unroll)) history_.pop_front();
  std::vector<double> seq;
  for (const auto& s : history_) seq.insert(seq.end(), s.begin(), s.end());
  return online_.evaluate(seq, static_cast<int>(history_.size()));
}

int DqnLearner::act(std::span<const double> state, double epsilon, std::span<const int> allowed) {
  const auto q = q_values(state);
  return select_action(q, epsilon, allowed, rng_);
}

int DqnLearner::sequence(std::size_t i, bool next, std::vector<double>& out) const {
  out.clear();
  if (params_.cell == CellKind::dense) {
    const auto& t = replay_.at(i);
    const auto& s = next ? t.next_state : t.state;
    out.assign(s.begin(), s.end());
    return 1;
  }
  const std::size_t len = static_cast<std::size_t>(params_.unroll);
  // state side: states of i-len+1..i; next side: states of i-len+2..i, then next_state of i
  const std::size_t want = next ? len - 1 : len;
  const std::size_t first = i + 1 >= want ? i + 1 - want : 0;
  for (std::size_t k = first; k <= i && want > 0; ++k) {
    const auto& s = replay_.at(k).state;
    out.insert(out.end(), s.begin(), s.end());
  }
  if (next) {
    const auto& s = replay_.at(i).next_state;
    out.insert(out.end(), s.begin(), s.end());
  }
  return static_cast<int>(out.size() / params_.state_dim);
}

std::vector<double> DqnLearner::td_targets(std::span<const std::size_t> indices) const {
  std::vector<double> y;
  y.reserve(indices.size());
  std::vector<double> seq;
  for (std::size_t i : indices) {
    const Transition& t = replay_.at(i);
    double bonus = 0.0;
    if (bonus_) {
      bonus = bonus_(t.state, t.action);
      if (!std::isfinite(bonus)) throw std::invalid_argument("non-finite target bonus");
    }
    if (t.done) {
      y.push_back(t.reward + bonus);
      continue;
    }
    const int steps = sequence(i, true, seq);
    const auto q = target_.evaluate(seq, steps);
    double best;
    if (t.next_allowed.empty()) {
      best = *std::max_element(q.begin(), q.end());
    } else {
      best = q.at(t.next_allowed.front());
      for (int a : t.next_allowed) best = std::max(best, q.at(a));
    }
    y.push_back(t.reward + bonus + params_.gamma * best);
  }
  return y;
}

std::optional<double> DqnLearner::step(const Transition& t, double shaping) {
  if (!std::isfinite(shaping)) throw std::invalid_argument("non-finite shaping term");
  if (!std::isfinite(t.reward)) throw std::invalid_argument("non-finite reward");
  if (t.state.size() != static_cast<std::size_t>(params_.state_dim) ||
      t.next_state.size() != static_cast<std::size_t>(params_.state_dim))
    throw ContractViolation("transition state dimension mismatch");
  if (t.action < 0 || t.action >= params_.n_actions)
    throw ContractViolation("transition action out of range");

  Transition stored = t;
  stored.reward += shaping;
  replay_.push(std::move(stored));
  ++steps_;

  std::optional<double> loss;
  if (replay_.size() >= static_cast<std::size_t>(std::max(params_.warmup, 1))) {
    std::vector<std::size_t> idx(params_.batch_size);
    for (auto& i : idx) i = replay_.sample_index(rng_);
    const auto y = td_targets(idx);
    std::vector<std::vector<double>> inputs(idx.size());
    std::vector<TdSample> batch(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const int steps = sequence(idx[k], false, inputs[k]);
      batch[k] = TdSample{inputs[k], steps, replay_.at(idx[k]).action, y[k]};
    }
    loss = online_.train_step(batch);
    ++updates_;
  }
  if (steps_ % params_.target_sync == 0) target_.sync_from(online_);
  return loss;
}

std::optional<double> dqn_step(DqnLearner& learner, const Transition& t, double shaping) {
  return learner.step(t, shaping);
}

}  // namespace rantl
