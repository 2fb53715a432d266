#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "rantl/qtable.hpp"

namespace rantl {

enum class StoreErrorKind { io, duplicate, integrity, not_found, format };

class StoreError : public std::runtime_error {
 public:
  StoreError(StoreErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  StoreErrorKind kind() const noexcept { return kind_; }

 private:
  StoreErrorKind kind_;
};

/// One stored expert with its task descriptor.
struct ExpertArtifact {
  std::string task_id;
  std::vector<ResourceDim> resources;
  std::vector<int> signature;  // learner-state components the table reads
  int action_grid = kSplitLevels;
  QTable table{{0, 1}, 0.1, 0.95};
  long training_tti = 0;
  double final_mean_reward = 0.0;
  std::string created_at;  // UTC, ISO 8601; filled in on save when empty
  long sequence = 0;       // store-wide save order, assigned on save
  std::string config_hash;

  /// Throws StoreError(format) if the descriptor disagrees with the table.
  void validate() const;

  bool operator==(const ExpertArtifact&) const = default;
};

/// Build an artifact for a freshly trained table.
ExpertArtifact make_artifact(std::string task_id, ResourceDim dim, QTable table,
                             std::string config_hash);

/// What a target task needs from the store.
struct TargetDescriptor {
  std::vector<ResourceDim> dimensions{ResourceDim::radio, ResourceDim::compute};
  std::vector<int> signature{0, 1, 2, 3};
  int action_grid = kSplitLevels;
};

/// Flat-file expert library:
///   <root>/experts/<digest>/meta      key = value descriptor
///   <root>/experts/<digest>/table     QTable text
///   <root>/experts/<digest>/checksum  sha256 of meta and table
///   <root>/lock                       writers hold an exclusive flock
/// <digest> is the sha256 of the task id. Artifacts are never rewritten.
class ExpertStore {
 public:
  explicit ExpertStore(std::filesystem::path root);

  const std::filesystem::path& root() const noexcept { return root_; }

  /// Writes the artifact, assigning `sequence` and, if empty, `created_at`.
  /// Returns the task id. Duplicate ids raise StoreError(duplicate).
  std::string save(ExpertArtifact artifact) const;

  ExpertArtifact load(const std::string& task_id) const;

  /// Every artifact, oldest first. Verifies each checksum.
  std::vector<ExpertArtifact> list() const;

  /// Artifacts whose signature is a subset of the target's, whose action
  /// grid matches and whose resources are all wanted; best final reward
  /// first, newer first on ties.
  std::vector<ExpertArtifact> select(const TargetDescriptor& target) const;

 private:
  std::filesystem::path experts_dir() const { return root_ / "experts"; }
  std::filesystem::path artifact_dir(const std::string& task_id) const;
  ExpertArtifact read_dir(const std::filesystem::path& dir) const;

  std::filesystem::path root_;
};

std::string save_expert(const std::filesystem::path& store, ExpertArtifact artifact);
ExpertArtifact load_expert(const std::filesystem::path& store, const std::string& task_id);
std::vector<ExpertArtifact> select_experts(const std::filesystem::path& store,
                                           const TargetDescriptor& target);

}  // namespace rantl
