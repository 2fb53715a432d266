#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "rantl/action.hpp"
#include "rantl/config.hpp"
#include "rantl/env.hpp"
#include "rantl/qtable.hpp"

namespace rantl {

inline constexpr int kRadioExpert = 0;
inline constexpr int kComputeExpert = 1;

/// How each expert sees the learner: which learner-state components form its
/// state, and which JointAction component is its action.
struct MappingSpec {
  std::array<std::vector<int>, 2> selector{std::vector<int>{0, 1}, std::vector<int>{2, 3}};

  /// Selectors must be disjoint and together cover all learner components.
  void validate() const;
};

/// Decaying shaping coefficient and per-expert weights.
struct TransferSchedule {
  double beta0 = 0.5;
  int explore_tti = 1000;
  std::array<double, 2> weights{0.5, 0.5};

  /// beta0 at t = 0, linear to 0 at explore_tti, 0 afterwards.
  double beta(long t) const;

  static TransferSchedule from_config(const ScenarioConfig& cfg);
};

/// An expert table with its min-max normalization frozen at load time.
class LoadedExpert {
 public:
  explicit LoadedExpert(QTable table);

  const QTable& table() const noexcept { return table_; }
  /// Q scaled to [0, 1]; 0.5 everywhere for a constant table.
  double normalized(int s, int a) const;
  bool degenerate() const noexcept { return degenerate_; }

 private:
  QTable table_;
  double lo_ = 0.0;
  double hi_ = 0.0;
  bool degenerate_ = false;
};

struct ExpertPair {
  LoadedExpert radio;
  LoadedExpert compute;

  const LoadedExpert& operator[](int id) const { return id == kRadioExpert ? radio : compute; }
};

/// Expert state (bucket tuple index) whose bucket centers are nearest, in
/// Euclidean distance, to the selected learner components. Ties resolve to
/// the lexicographically smallest tuple.
int map_state(const MappingSpec& spec, const LearnerState& s_l, const QTable& expert, int expert_id);

/// The state whose row reduced_action_set ranks: the mapped state, or, when
/// the expert never visited it, the nearest state it did visit. An unvisited
/// row is all zeros and would just yield the k lowest levels.
int ranking_state(const MappingSpec& spec, const LearnerState& s_l, const QTable& expert,
                  int expert_id);

/// Projection of the joint action onto the expert's own split level.
int map_action(const MappingSpec& spec, const JointAction& a_l, int expert_id);

/// beta(t) * sum_i w_i * normalized Q_i(mapped state, mapped action).
double shaping_term(const TransferSchedule& sched, const ExpertPair& experts,
                    const MappingSpec& spec, const LearnerState& s_l, const JointAction& a_l,
                    long t);

/// Top-k levels of each expert at its ranking state (ties to the lower level),
/// combined as a Cartesian product. Returned as joint-action indices in
/// increasing order.
std::vector<int> reduced_action_set(const ExpertPair& experts, const MappingSpec& spec,
                                    const LearnerState& s_l, int k);

}  // namespace rantl
