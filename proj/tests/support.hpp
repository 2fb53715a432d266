#pragma once

// Shared fixtures and independent oracles for the unit tests and the
// acceptance binary. Nothing here calls into the code it checks.

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "rantl/dqn.hpp"
#include "rantl/qnet.hpp"
#include "rantl/qtable.hpp"
#include "rantl/transfer.hpp"

namespace rantl::testing {

// Two states, two actions, deterministic: action a moves to state a.
struct ToyMdp {
  static constexpr int kStates = 2;
  static constexpr int kActions = 2;
  double gamma = 0.9;
  std::array<std::array<double, 2>, 2> reward{{{0.0, 1.0}, {0.5, -0.2}}};
  int next(int /*s*/, int a) const { return a; }
};

using QStar = std::array<std::array<double, 2>, 2>;

inline QStar value_iteration(const ToyMdp& m, double tol = 1e-9) {
  QStar q{};
  for (int it = 0; it < 100000; ++it) {
    QStar n{};
    double diff = 0.0;
    for (int s = 0; s < 2; ++s)
      for (int a = 0; a < 2; ++a) {
        const int sp = m.next(s, a);
        n[s][a] = m.reward[s][a] + m.gamma * std::max(q[sp][0], q[sp][1]);
        diff = std::max(diff, std::abs(n[s][a] - q[s][a]));
      }
    q = n;
    if (diff < tol * (1 - m.gamma)) break;
  }
  return q;
}

// Q-learning on the toy MDP in a table whose first two rows stand for the
// two states (the table type always has a 2-dim signature).
inline QTable tabular_q(const ToyMdp& m, int updates, std::uint64_t seed) {
  QTable t({0, 1}, 0.1, m.gamma, /*levels=*/2, /*actions=*/2);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> coin(0, 1);
  int s = 0;
  for (int i = 0; i < updates; ++i) {
    const int a = coin(rng);  // persistent uniform exploration
    const int sp = m.next(s, a);
    t.update(s, a, m.reward[s][a], sp);
    s = sp;
  }
  return t;
}

inline int greedy(const double* q, int n) { return static_cast<int>(std::max_element(q, q + n) - q); }

// DQN with one-hot states on the toy MDP, uniform behaviour policy.
inline DqnLearner dqn_on_toy(const ToyMdp& m, int steps, std::uint64_t seed) {
  DqnParams p;
  p.state_dim = 2;
  p.n_actions = 2;
  p.hidden = {16};
  p.gamma = m.gamma;
  p.learning_rate = 3e-3;
  p.warmup = 64;
  p.replay_capacity = 2000;
  p.target_sync = 50;
  DqnLearner learner(p, seed);
  const std::vector<int> all{0, 1};
  int s = 0;
  for (int t = 0; t < steps; ++t) {
    std::vector<double> sv(2, 0.0);
    sv[s] = 1.0;
    const int a = learner.act(sv, 1.0, all);
    const int sp = m.next(s, a);
    std::vector<double> nv(2, 0.0);
    nv[sp] = 1.0;
    learner.step(Transition{sv, a, m.reward[s][a], nv, false, {}}, 0.0);
    s = sp;
  }
  return learner;
}

// Forward pass written from the documented parameter layout alone.
inline std::vector<double> oracle_forward(const QNetTopology& t, std::span<const double> p,
                                          std::span<const double> inputs, int steps) {
  std::size_t off = 0;
  std::vector<double> x;
  std::size_t first = 0;
  if (t.cell == CellKind::lstm) {
    const int H = t.hidden[0], I = t.input_dim;
    const std::size_t wx = off, wh = wx + std::size_t(4 * H) * I, b = wh + std::size_t(4 * H) * H;
    off = b + (t.bias ? 4 * H : 0);
    std::vector<double> h(H, 0.0), c(H, 0.0);
    for (int st = 0; st < steps; ++st) {
      std::vector<double> z(4 * H, 0.0);
      for (int r = 0; r < 4 * H; ++r) {
        z[r] = t.bias ? p[b + r] : 0.0;
        for (int i = 0; i < I; ++i) z[r] += p[wx + std::size_t(r) * I + i] * inputs[st * I + i];
        for (int i = 0; i < H; ++i) z[r] += p[wh + std::size_t(r) * H + i] * h[i];
      }
      auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
      for (int k = 0; k < H; ++k) {
        const double ig = sig(z[k]), fg = sig(z[H + k]), gg = std::tanh(z[2 * H + k]),
                     og = sig(z[3 * H + k]);
        c[k] = fg * c[k] + ig * gg;
        h[k] = og * std::tanh(c[k]);
      }
    }
    x = h;
    first = 1;
  } else {
    x.assign(inputs.begin(), inputs.end());
  }
  std::vector<int> widths(t.hidden.begin() + first, t.hidden.end());
  widths.push_back(t.output_dim);
  for (std::size_t li = 0; li < widths.size(); ++li) {
    const int in = static_cast<int>(x.size()), out = widths[li];
    std::vector<double> y(out);
    const std::size_t w = off, b = w + std::size_t(out) * in;
    off = b + (t.bias ? out : 0);
    for (int o = 0; o < out; ++o) {
      double z = t.bias ? p[b + o] : 0.0;
      for (int i = 0; i < in; ++i) z += p[w + std::size_t(o) * in + i] * x[i];
      y[o] = li + 1 < widths.size() ? std::tanh(z) : z;
    }
    x = std::move(y);
  }
  return x;
}

// Learner state whose fills sit at the centers of the given buckets.
inline LearnerState at_centers(std::array<int, 4> b) {
  LearnerState s;
  for (int d = 0; d < 4; ++d) {
    s.bucket[d] = b[d];
    s.fill[d] = (b[d] + 0.5) / kQuantLevels;
  }
  return s;
}

inline QTable random_table(ResourceDim dim, std::uint64_t seed) {
  QTable t(signature_of(dim), 0.1, 0.95);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int s = 0; s < t.n_states(); ++s)
    for (int a = 0; a < t.n_actions(); ++a) t.set_value(s, a, u(rng));
  return t;
}

// Marks every row visited so ranking uses the mapped state itself.
inline QTable visited(QTable t) {
  for (int s = 0; s < t.n_states(); ++s) t.set_visits(s, 0, 1);
  return t;
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path = std::filesystem::temp_directory_path() /
           ("rantl-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

}  // namespace rantl::testing
