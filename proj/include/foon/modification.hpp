#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "foon/embedding.hpp"
#include "foon/kitchen.hpp"
#include "foon/model.hpp"
#include "foon/retrieval.hpp"
#include "foon/store.hpp"

namespace foon {

/// Groups physical states (raw, finely separated, liquid, ...) so that a known
/// state can stand in for an unknown one of the same class.
struct StateClassConfig {
  std::vector<std::string> classes;
  std::map<std::string, std::string> assignment;  // state label -> class

  std::optional<std::string> class_of(std::string_view state) const;

  static StateClassConfig load(const std::filesystem::path& path);
  static StateClassConfig parse(std::string_view text);
};

/// Most frequent motion verb that brings an object into each state.
struct MotionVerbStats {
  std::map<std::string, std::string> verb_by_state;

  /// Counts, per unit, every output state label that no same-named input
  /// already had. Frequency ties go to the smaller verb.
  static MotionVerbStats build(const UniversalFoon& foon);
};

struct IntegrationPolicy {
  std::set<std::string> accepting_verbs;

  bool accepts(std::string_view verb) const { return accepting_verbs.count(std::string(verb)) > 0; }

  static IntegrationPolicy load(const std::filesystem::path& path);
  static IntegrationPolicy parse(std::string_view text);
};

struct PlanningContext {
  const UniversalFoon& foon;
  const EmbeddingTable& table;
  SimilarityConfig similarity;
  const KitchenModel& kitchen;
  SearchBudget budget;
  const StateClassConfig& state_classes;
  const MotionVerbStats& verb_stats;
  const IntegrationPolicy& policy;
  ReferenceTreeCache* cache = nullptr;

  RetrievalContext retrieval() const { return {foon, table, similarity, kitchen, budget, cache}; }
};

struct SubstitutedTree {
  TaskTree subtree;
  std::vector<SubstitutionRecord> records;
};

/// Tree that makes one ingredient in the requested state. Empty when the
/// ingredient is on hand as is. Throws MissingStateError when the object is known
/// but the state is never produced.
TaskTree retrieve_subtree(const RetrievalContext& ctx, const RequestedIngredient& ingredient,
                          std::span<const std::string> context_names = {});

/// Borrow the subtree of the nearest known ingredient and rename it.
SubstitutedTree substitute_object(const PlanningContext& ctx, const RequestedIngredient& ingredient,
                                  std::span<const std::string> context_names = {});

/// Borrow the subtree of a same-class state of the same object and relabel it.
SubstitutedTree substitute_state(const PlanningContext& ctx, const RequestedIngredient& ingredient,
                                 std::span<const std::string> context_names = {});

struct Integration {
  TaskTree tree;
  std::size_t accepting_index = 0;  // position of the unit that took the ingredient
};

/// Splice `subtree` in front of the accepting unit (the earliest unit with an
/// accepting verb unless `accepting_index` names one) and feed its goal into it.
Integration integrate_subtree(TaskTree tree, const TaskTree& subtree, const IntegrationPolicy& policy,
                              const KitchenModel& kitchen, std::optional<std::size_t> accepting_index = std::nullopt);

/// Strip every ingredient not in `required`, drop units that no longer handle
/// any ingredient or no longer change anything, and rewire their consumers.
TaskTree remove_extraneous(TaskTree tree, std::span<const std::string> required, const KitchenModel& kitchen);

/// The full pipeline: reference goal, reference tree, missing-ingredient
/// subtrees, integration and clean-up.
TaskTree construct_final_task_tree(const PlanningContext& ctx, const PlanningRequest& request);

/// Messages for every requested ingredient missing from the tree and every
/// ingredient present that was not requested.
std::vector<std::string> closure_violations(const TaskTree& tree, const PlanningRequest& request,
                                            const KitchenModel& kitchen);

}  // namespace foon
