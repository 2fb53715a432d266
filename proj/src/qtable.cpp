#include "rantl/qtable.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "rantl/explore.hpp"
#include "rantl/seed.hpp"

namespace rantl {

int select_action(std::span<const double> qvalues, double epsilon, std::span<const int> allowed,
                  std::mt19937_64& rng) {
  if (allowed.empty()) throw ContractViolation("select_action: empty allowed action set");
  for (int a : allowed)
    if (a < 0 || a >= static_cast<int>(qvalues.size()))
      throw ContractViolation("select_action: allowed action outside the action grid");
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) < epsilon) {
    std::uniform_int_distribution<std::size_t> pick(0, allowed.size() - 1);
    return allowed[pick(rng)];
  }
  int best = allowed[0];
  for (int a : allowed)
    if (qvalues[a] > qvalues[best] || (qvalues[a] == qvalues[best] && a < best)) best = a;
  return best;
}

std::string to_string(ResourceDim d) { return d == ResourceDim::radio ? "radio" : "compute"; }

ResourceDim parse_resource(const std::string& s) {
  if (s == "radio") return ResourceDim::radio;
  if (s == "compute") return ResourceDim::compute;
  throw std::invalid_argument("unknown resource dimension '" + s + "'");
}

std::vector<int> signature_of(ResourceDim d) {
  return d == ResourceDim::radio ? std::vector<int>{0, 1} : std::vector<int>{2, 3};
}

QTable::QTable(std::vector<int> signature, double alpha, double gamma, int levels, int actions)
    : signature_(std::move(signature)),
      levels_(levels),
      n_states_(1),
      n_actions_(actions),
      alpha_(alpha),
      gamma_(gamma) {
  if (signature_.size() != 2) throw ContractViolation("expert signature must have 2 dimensions");
  for (int d : signature_)
    if (d < 0 || d >= kStateDims) throw ContractViolation("expert signature dimension out of range");
  if (levels_ < 1 || n_actions_ < 1) throw ContractViolation("QTable needs >= 1 level and action");
  for (std::size_t i = 0; i < signature_.size(); ++i) n_states_ *= levels_;
  values_.assign(std::size_t(n_states_) * n_actions_, 0.0);
  visits_.assign(values_.size(), 0);
}

std::size_t QTable::cell(int s, int a) const {
  if (s < 0 || s >= n_states_) throw ContractViolation("QTable state out of domain");
  if (a < 0 || a >= n_actions_) throw ContractViolation("QTable action out of domain");
  return std::size_t(s) * n_actions_ + a;
}

int QTable::state_index(std::span<const int> buckets) const {
  if (buckets.size() != signature_.size())
    throw ContractViolation("expert state tuple has wrong arity");
  int idx = 0;
  for (int b : buckets) {
    if (b < 0 || b >= levels_) throw ContractViolation("expert state bucket out of domain");
    idx = idx * levels_ + b;
  }
  return idx;
}

std::vector<int> QTable::state_tuple(int index) const {
  if (index < 0 || index >= n_states_) throw ContractViolation("QTable state out of domain");
  std::vector<int> t(signature_.size());
  for (std::size_t i = t.size(); i-- > 0;) {
    t[i] = index % levels_;
    index /= levels_;
  }
  return t;
}

int QTable::state_of(const LearnerState& s) const {
  std::vector<int> b;
  for (int d : signature_) b.push_back(s.bucket[d]);
  return state_index(b);
}

std::span<const double> QTable::row(int s) const {
  return std::span<const double>(values_).subspan(cell(s, 0), n_actions_);
}

void QTable::update(int s, int a, double r, int s_next) {
  const auto next = row(s_next);
  const double best = *std::max_element(next.begin(), next.end());
  double& q = values_[cell(s, a)];
  q += alpha_ * (r + gamma_ * best - q);
  ++visits_[cell(s, a)];
}

void q_update(QTable& table, int s, int a, double r, int s_next) { table.update(s, a, r, s_next); }

void QTable::save(std::ostream& out) const {
  auto num = [](double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
  };
  out << "qtable v1\n";
  out << "signature";
  for (int d : signature_) out << ' ' << d;
  out << "\nlevels " << levels_ << "\nactions " << n_actions_ << "\nalpha " << num(alpha_)
      << "\ngamma " << num(gamma_) << "\ntraining_tti " << training_tti
      << "\nfinal_mean_reward " << num(final_mean_reward) << "\nentries " << values_.size()
      << '\n';
  for (int s = 0; s < n_states_; ++s) {
    const auto tuple = state_tuple(s);
    for (int a = 0; a < n_actions_; ++a) {
      for (int b : tuple) out << b << ' ';
      out << a << ' ' << num(value(s, a)) << ' ' << visits(s, a) << '\n';
    }
  }
}

QTable QTable::load(std::istream& in) {
  auto fail = [](const std::string& what) { throw std::runtime_error("malformed QTable: " + what); };
  std::string line;
  if (!std::getline(in, line) || line != "qtable v1") fail("bad magic");
  auto header = [&](const char* key) {
    if (!std::getline(in, line)) fail(std::string("missing ") + key);
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word != key) fail(std::string("expected ") + key);
    std::string rest;
    std::getline(ls, rest);
    return rest;
  };
  auto number = [&](const std::string& text) {
    std::istringstream ls(text);
    std::string tok;
    ls >> tok;
    double v = 0.0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc{}) fail("bad number '" + tok + "'");
    return v;
  };
  std::vector<int> sig;
  {
    std::istringstream ls(header("signature"));
    int d;
    while (ls >> d) sig.push_back(d);
  }
  const int levels = static_cast<int>(number(header("levels")));
  const int actions = static_cast<int>(number(header("actions")));
  const double alpha = number(header("alpha"));
  const double gamma = number(header("gamma"));
  QTable t(sig, alpha, gamma, levels, actions);
  t.training_tti = static_cast<long>(number(header("training_tti")));
  t.final_mean_reward = number(header("final_mean_reward"));
  const auto entries = static_cast<std::size_t>(number(header("entries")));
  if (entries != t.values_.size()) fail("entry count does not match signature and action grid");
  for (int s = 0; s < t.n_states_; ++s) {
    const auto tuple = t.state_tuple(s);
    for (int a = 0; a < t.n_actions_; ++a) {
      if (!std::getline(in, line)) fail("truncated entry list");
      std::istringstream ls(line);
      std::vector<int> got(tuple.size());
      for (auto& b : got) ls >> b;
      int act = -1;
      std::string val;
      long visits = -1;
      ls >> act >> val >> visits;
      if (!ls || got != tuple || act != a) fail("entry out of order: '" + line + "'");
      t.values_[t.cell(s, a)] = number(val);
      t.visits_[t.cell(s, a)] = visits;
    }
  }
  return t;
}

namespace {

JointAction expert_joint_action(ResourceDim dim, int level) {
  constexpr int even = (kSplitLevels - 1) / 2;
  return dim == ResourceDim::radio ? JointAction{level, even} : JointAction{even, level};
}

}  // namespace

QTable train_expert(const ScenarioConfig& cfg, ResourceDim dim, std::uint64_t seed) {
  QTable table(signature_of(dim), cfg.tabular_alpha, cfg.gamma);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  const ExplorationSchedule sched{cfg.eps_start, cfg.eps_end, cfg.explore_tti};
  std::vector<int> all(kSplitLevels);
  std::iota(all.begin(), all.end(), 0);

  const int n = cfg.expert_train_tti;
  const int tail = std::min(n, 1000);
  double tail_sum = 0.0;
  // Each episode is a fresh placement so the table is not tuned to one cell.
  std::optional<SliceEnv> env;
  LearnerState obs;
  for (int t = 0; t < n; ++t) {
    if (t % cfg.expert_episode_tti == 0) {
      env.emplace(cfg, derive_seed(seed, static_cast<std::uint64_t>(t / cfg.expert_episode_tti)));
      obs = env->observe();
    }
    const int s = table.state_of(obs);
    const int a = select_action(table.row(s), sched.epsilon(t), all, rng);
    const TtiOutcome out = env->step(expert_joint_action(dim, a));
    const LearnerState next = env->observe();
    table.update(s, a, out.reward, table.state_of(next));
    if (t >= n - tail) tail_sum += out.reward;
    obs = next;
  }
  table.training_tti = n;
  table.final_mean_reward = tail > 0 ? tail_sum / tail : 0.0;
  return table;
}

double evaluate_expert(const QTable& table, ResourceDim dim, const ScenarioConfig& cfg,
                       std::uint64_t seed, int n_tti) {
  SliceEnv env(cfg, seed);
  std::mt19937_64 rng(seed);
  std::vector<int> all(kSplitLevels);
  std::iota(all.begin(), all.end(), 0);
  double sum = 0.0;
  for (int t = 0; t < n_tti; ++t) {
    const int s = table.state_of(env.observe());
    const int a = select_action(table.row(s), 0.0, all, rng);
    sum += env.step(expert_joint_action(dim, a)).reward;
  }
  return n_tti > 0 ? sum / n_tti : 0.0;
}

double evaluate_fixed(const JointAction& action, const ScenarioConfig& cfg, std::uint64_t seed,
                      int n_tti) {
  SliceEnv env(cfg, seed);
  double sum = 0.0;
  for (int t = 0; t < n_tti; ++t) sum += env.step(action).reward;
  return n_tti > 0 ? sum / n_tti : 0.0;
}

}  // namespace rantl
