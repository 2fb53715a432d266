#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rantl/config.hpp"
#include "rantl/env.hpp"

namespace rantl {

enum class ResourceDim { radio, compute };

std::string to_string(ResourceDim d);
ResourceDim parse_resource(const std::string& s);

/// Learner-state components an expert of the given resource reads:
/// radio -> (URLLC radio fill, eMBB radio fill), compute -> the two backlogs.
std::vector<int> signature_of(ResourceDim d);

/// Dense tabular Q-function over (quantized expert state, action level).
/// Expert states are bucket tuples over `signature`; their index is the
/// row-major (lexicographic) rank of the tuple.
class QTable {
 public:
  QTable(std::vector<int> signature, double alpha, double gamma, int levels = kQuantLevels,
         int actions = kSplitLevels);

  const std::vector<int>& signature() const noexcept { return signature_; }
  int levels() const noexcept { return levels_; }
  int n_states() const noexcept { return n_states_; }
  int n_actions() const noexcept { return n_actions_; }
  double alpha() const noexcept { return alpha_; }
  double gamma() const noexcept { return gamma_; }

  int state_index(std::span<const int> buckets) const;
  std::vector<int> state_tuple(int index) const;
  /// Expert state read off a learner observation through `signature`.
  int state_of(const LearnerState& s) const;

  double value(int s, int a) const { return values_.at(cell(s, a)); }
  void set_value(int s, int a, double v) { values_.at(cell(s, a)) = v; }
  long visits(int s, int a) const { return visits_.at(cell(s, a)); }
  void set_visits(int s, int a, long n) { visits_.at(cell(s, a)) = n; }
  std::span<const double> row(int s) const;
  std::span<const double> values() const noexcept { return values_; }

  /// One Q-learning backup: Q(s,a) += alpha * (r + gamma max Q(s',.) - Q(s,a)).
  void update(int s, int a, double r, int s_next);

  // Training metadata carried with the table.
  long training_tti = 0;
  double final_mean_reward = 0.0;

  /// Text layout: a `key value` header, then one `state-tuple action value
  /// visits` line per entry.
  void save(std::ostream& out) const;
  static QTable load(std::istream& in);

  bool operator==(const QTable&) const = default;

 private:
  std::size_t cell(int s, int a) const;

  std::vector<int> signature_;
  int levels_;
  int n_states_;
  int n_actions_;
  double alpha_;
  double gamma_;
  std::vector<double> values_;
  std::vector<long> visits_;
};

void q_update(QTable& table, int s, int a, double r, int s_next);

/// Train a single-resource expert; the other resource stays at an even split.
/// Runs cfg.expert_train_tti TTIs, a fresh cell placement every
/// cfg.expert_episode_tti, with epsilon-greedy exploration over cfg.explore_tti.
QTable train_expert(const ScenarioConfig& cfg, ResourceDim dim, std::uint64_t seed);

/// Mean reward of the expert's greedy policy (other resource at 0.5) over
/// n_tti TTIs of a fresh cell.
double evaluate_expert(const QTable& table, ResourceDim dim, const ScenarioConfig& cfg,
                       std::uint64_t seed, int n_tti);

/// Mean reward of a fixed joint action over n_tti TTIs of a fresh cell.
double evaluate_fixed(const JointAction& action, const ScenarioConfig& cfg, std::uint64_t seed,
                      int n_tti);

}  // namespace rantl
