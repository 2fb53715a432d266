#pragma once

#include <compare>
#include <cstddef>

#include "rantl/config.hpp"

namespace rantl {

/// Split levels 0..10 map to URLLC fractions 0.0, 0.1, ..., 1.0.
inline constexpr int kSplitLevels = 11;
inline constexpr int kJointActions = kSplitLevels * kSplitLevels;

/// One TTI's resource split: fraction of RBs and of MEC CPU given to URLLC.
struct JointAction {
  int radio_level = 0;
  int cpu_level = 0;

  static JointAction from_index(int index) {
    if (index < 0 || index >= kJointActions)
      throw ContractViolation("joint action index out of range");
    return {index / kSplitLevels, index % kSplitLevels};
  }

  int index() const { return radio_level * kSplitLevels + cpu_level; }
  bool valid() const {
    return radio_level >= 0 && radio_level < kSplitLevels && cpu_level >= 0 &&
           cpu_level < kSplitLevels;
  }
  double radio_fraction() const { return radio_level / double(kSplitLevels - 1); }
  double cpu_fraction() const { return cpu_level / double(kSplitLevels - 1); }

  auto operator<=>(const JointAction&) const = default;
};

}  // namespace rantl
