#include "rantl/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>

namespace rantl {

void MappingSpec::validate() const {
  std::array<int, kStateDims> seen{};
  for (const auto& sel : selector) {
    if (sel.empty()) throw ContractViolation("mapping selector is empty");
    for (int d : sel) {
      if (d < 0 || d >= kStateDims) throw ContractViolation("mapping selector out of range");
      ++seen[d];
    }
  }
  for (int c : seen)
    if (c != 1) throw ContractViolation("mapping selectors must partition the learner state");
}

double TransferSchedule::beta(long t) const {
  if (t >= explore_tti || explore_tti <= 0) return 0.0;
  return beta0 * (1.0 - static_cast<double>(t) / explore_tti);
}

TransferSchedule TransferSchedule::from_config(const ScenarioConfig& cfg) {
  return {cfg.beta0, cfg.explore_tti, {cfg.expert_weight_radio, 1.0 - cfg.expert_weight_radio}};
}

LoadedExpert::LoadedExpert(QTable table) : table_(std::move(table)) {
  const auto v = table_.values();
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  lo_ = *lo;
  hi_ = *hi;
  degenerate_ = !(hi_ > lo_);
  if (degenerate_)
    std::clog << "warning: expert table over dimensions (" << table_.signature()[0] << ","
              << table_.signature()[1] << ") is constant; its normalized values are 0.5\n";
}

// Whole-table min-max, so values stay comparable across states.
double LoadedExpert::normalized(int s, int a) const {
  if (degenerate_) return 0.5;
  return (table_.value(s, a) - lo_) / (hi_ - lo_);
}

namespace {

long row_visits(const QTable& t, int s) {
  long n = 0;
  for (int a = 0; a < t.n_actions(); ++a) n += t.visits(s, a);
  return n;
}

// Nearest bucket center to the selected learner components; with
// visited_only, states the expert never saw are skipped.
int nearest_state(const std::vector<int>& sel, const LearnerState& s_l, const QTable& expert,
                  bool visited_only) {
  // Tuple indices enumerate in lexicographic order, so strict < keeps the smallest.
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (int s = 0; s < expert.n_states(); ++s) {
    if (visited_only && row_visits(expert, s) == 0) continue;
    const auto tuple = expert.state_tuple(s);
    double d2 = 0.0;
    for (std::size_t k = 0; k < sel.size(); ++k) {
      const double center = (tuple[k] + 0.5) / expert.levels();
      const double diff = s_l.fill[sel[k]] - center;
      d2 += diff * diff;
    }
    if (d2 < best_d) {
      best_d = d2;
      best = s;
    }
  }
  return best;
}

const std::vector<int>& checked_selector(const MappingSpec& spec, const QTable& expert,
                                         int expert_id) {
  const auto& sel = spec.selector.at(expert_id);
  if (sel != expert.signature())
    throw ContractViolation("expert signature does not match the mapping selector");
  return sel;
}

}  // namespace

int map_state(const MappingSpec& spec, const LearnerState& s_l, const QTable& expert,
              int expert_id) {
  return nearest_state(checked_selector(spec, expert, expert_id), s_l, expert, false);
}

int ranking_state(const MappingSpec& spec, const LearnerState& s_l, const QTable& expert,
                  int expert_id) {
  const int mapped = map_state(spec, s_l, expert, expert_id);
  if (row_visits(expert, mapped) > 0) return mapped;
  const int seen = nearest_state(spec.selector.at(expert_id), s_l, expert, true);
  return seen < 0 ? mapped : seen;
}

int map_action(const MappingSpec& /*spec*/, const JointAction& a_l, int expert_id) {
  if (!a_l.valid()) throw ContractViolation("joint action outside the split grid");
  return expert_id == kRadioExpert ? a_l.radio_level : a_l.cpu_level;
}

double shaping_term(const TransferSchedule& sched, const ExpertPair& experts,
                    const MappingSpec& spec, const LearnerState& s_l, const JointAction& a_l,
                    long t) {
  const double beta = sched.beta(t);
  if (beta == 0.0) return 0.0;
  double sum = 0.0;
  for (int id : {kRadioExpert, kComputeExpert}) {
    const auto& e = experts[id];
    const int s = map_state(spec, s_l, e.table(), id);
    sum += sched.weights[id] * e.normalized(s, map_action(spec, a_l, id));
  }
  return beta * sum;
}

std::vector<int> reduced_action_set(const ExpertPair& experts, const MappingSpec& spec,
                                    const LearnerState& s_l, int k) {
  if (k < 1) throw ContractViolation("reduced action set needs k >= 1");
  std::array<std::vector<int>, 2> top;
  for (int id : {kRadioExpert, kComputeExpert}) {
    const auto& table = experts[id].table();
    const auto row = table.row(ranking_state(spec, s_l, table, id));
    std::vector<int> order(row.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return row[a] > row[b]; });
    order.resize(std::min<std::size_t>(k, order.size()));
    std::sort(order.begin(), order.end());
    top[id] = std::move(order);
  }
  std::vector<int> out;
  out.reserve(top[0].size() * top[1].size());
  for (int r : top[0])
    for (int c : top[1]) out.push_back(JointAction{r, c}.index());
  return out;
}

}  // namespace rantl
