#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "foon/embedding.hpp"
#include "foon/kitchen.hpp"
#include "foon/model.hpp"
#include "foon/store.hpp"

namespace foon {

struct SearchBudget {
  std::size_t max_paths = 10000;  // search-tree nodes, i.e. partial plans
  std::size_t max_depth = 100;    // Cartesian-product levels below a root
};

struct CandidatePath {
  std::vector<FunctionalUnit> units;  // executable order, pruned and aligned
  ObjectNode goal;
  std::size_t overlap_score = 0;
  std::size_t length = 0;
};

/// Shared, optionally disk-backed store of retrieved reference trees.
/// Readers run concurrently; writers are serialized.
class ReferenceTreeCache {
public:
  ReferenceTreeCache() = default;
  explicit ReferenceTreeCache(std::filesystem::path directory);

  std::optional<TaskTree> get(const std::string& key) const;
  void put(const std::string& key, const TaskTree& tree);
  std::size_t size() const;

private:
  std::filesystem::path file_for(const std::string& key) const;

  mutable std::shared_mutex mutex_;
  std::map<std::string, TaskTree> entries_;
  std::optional<std::filesystem::path> directory_;
};

/// Everything a retrieval reads. All references must outlive the call.
struct RetrievalContext {
  const UniversalFoon& foon;
  const EmbeddingTable& table;
  SimilarityConfig similarity;
  const KitchenModel& kitchen;
  SearchBudget budget;
  ReferenceTreeCache* cache = nullptr;
};

/// Drop ingredient-class objects whose name is not required; nodes carrying the
/// goal key are always kept.
FunctionalUnit prune_unit(const FunctionalUnit& unit, std::span<const std::string> required,
                          const ObjectKey& goal_key, const KitchenModel& kitchen);

/// A unit is relevant when one of its ingredient names is required or more
/// similar than the threshold to a required name.
bool overlaps_request(const FunctionalUnit& unit, std::span<const std::string> required,
                      const EmbeddingTable& table, const SimilarityConfig& cfg, const KitchenModel& kitchen);

/// Every goal-reaching executable plan, in depth-first discovery order.
std::vector<CandidatePath> enumerate_candidate_paths(const RetrievalContext& ctx, const ObjectNode& goal,
                                                     std::span<const std::string> required);

/// Highest ingredient overlap with `required`; then fewest units; then first found.
CandidatePath select_best_path(std::vector<CandidatePath> paths);

TaskTree retrieve_reference_task_tree(const RetrievalContext& ctx, const ObjectNode& goal,
                                      std::span<const std::string> required);

}  // namespace foon
