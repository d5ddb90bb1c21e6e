#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "foon/document.hpp"
#include "foon/kitchen.hpp"
#include "foon/model.hpp"

namespace foon {

struct DishClassConfig {
  std::vector<std::string> classes;
  std::map<std::string, std::string> assignment;  // subgraph id -> class

  bool declares(std::string_view cls) const;

  static DishClassConfig load(const std::filesystem::path& path);
  static DishClassConfig parse(std::string_view text);
};

/// Terminal product of one merged subgraph and where its units ended up.
struct SubgraphGoal {
  ObjectNode goal;
  std::string dish_class;
  std::vector<std::size_t> unit_indices;  // positions in UniversalFoon::units()
};

struct GoalCandidate {
  std::string subgraph_id;
  ObjectNode goal;
  std::vector<std::string> ingredients;
};

/// Union of subgraphs with duplicate units removed, indexed by object key.
/// Immutable once built.
class UniversalFoon {
public:
  UniversalFoon() = default;

  const std::vector<FunctionalUnit>& units() const { return units_; }
  const std::map<ObjectKey, std::vector<std::size_t>>& producers() const { return producers_; }
  const std::map<ObjectKey, std::vector<std::size_t>>& consumers() const { return consumers_; }
  const std::map<std::string, std::vector<std::string>>& class_registry() const { return class_registry_; }
  const std::map<std::string, SubgraphGoal>& subgraph_goals() const { return subgraph_goals_; }

  /// Index positions into units(); empty for leaves.
  const std::vector<std::size_t>& producer_indices(const ObjectKey& key) const;

  /// Sorted names of ingredient-class object nodes: the objects a subtree can be
  /// retrieved for.
  std::vector<std::string> ingredient_names(const KitchenModel& kitchen) const;

  bool has_ingredient(std::string_view name, const KitchenModel& kitchen) const;

  /// Stable 64-bit fingerprint of the unit list, used to key caches.
  std::uint64_t fingerprint() const;

private:
  friend class FoonBuilder;

  std::vector<FunctionalUnit> units_;
  std::map<std::string, std::size_t> unit_lookup_;  // canonical string -> index
  std::map<ObjectKey, std::vector<std::size_t>> producers_;
  std::map<ObjectKey, std::vector<std::size_t>> consumers_;
  std::map<std::string, std::vector<std::string>> class_registry_;
  std::map<std::string, SubgraphGoal> subgraph_goals_;
};

/// Union-merge subgraphs. Class assignment comes from `classes` when it names the
/// subgraph, otherwise from the subgraph's own dish_class.
UniversalFoon merge(std::span<const Subgraph> subgraphs, const DishClassConfig& classes = {});

/// Object nodes produced but never consumed inside `subgraph` (deduplicated).
std::vector<ObjectNode> terminal_objects(const Subgraph& subgraph);

/// Explicit goal, else the unique terminal object. Throws ValidationError listing
/// the candidates when that is ambiguous.
ObjectNode derive_goal(const Subgraph& subgraph);

std::vector<GoalCandidate> find_goal_candidates(const UniversalFoon& foon, std::string_view dish_type,
                                                const KitchenModel& kitchen);

std::vector<FunctionalUnit> units_producing(const UniversalFoon& foon, const ObjectKey& key);

std::string serialize_universal(const UniversalFoon& foon);
UniversalFoon universal_from_json(const Json& doc, Warnings* warnings = nullptr);

/// Load any mix of subgraph documents, universal documents and legacy FOON text
/// files and merge them.
UniversalFoon load_foon(std::span<const std::filesystem::path> paths, const DishClassConfig& classes,
                        Warnings* warnings = nullptr);

}  // namespace foon
