#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "foon/model.hpp"

namespace foon {

/// What the robot can assume is on hand, plus the utensil lexicon used to tell
/// ingredients apart from tools and containers.
class KitchenModel {
public:
  KitchenModel() = default;
  KitchenModel(std::set<ObjectKey> base_items, std::set<std::string> utensils);

  static KitchenModel load(const std::filesystem::path& path);
  static KitchenModel parse(std::string_view text);

  const std::set<ObjectKey>& base_items() const { return base_items_; }
  const std::set<std::string>& utensils() const { return utensils_; }

  bool is_utensil(std::string_view name) const;

  /// Not a utensil and holding no ingredient list.
  bool is_ingredient_class(const ObjectNode& node) const;

  /// Ingredient-class node, or any node whose ingredient list is non-empty.
  bool carries_ingredient(const ObjectNode& node) const;

  /// Kitchen items never carry a location or contents. Beyond the listed base
  /// items, anything whole or raw and every utensil is on hand.
  bool is_base_available(const ObjectNode& node) const;

  /// Ingredient names a node contributes: its own name when ingredient-class,
  /// otherwise the non-utensil entries of its ingredient list.
  std::vector<std::string> ingredient_names(const ObjectNode& node) const;
  std::vector<std::string> ingredient_names(const FunctionalUnit& unit) const;
  std::vector<std::string> ingredient_names(const std::vector<FunctionalUnit>& units) const;

private:
  std::set<ObjectKey> base_items_;
  std::set<std::string> utensils_;
};

/// Every input of unit k must be base-available or equal an output of a unit
/// before k. Returns one message per violation; empty means executable.
std::vector<std::string> executability_violations(const std::vector<FunctionalUnit>& units,
                                                  const KitchenModel& kitchen);

inline bool is_executable(const std::vector<FunctionalUnit>& units, const KitchenModel& kitchen) {
  return executability_violations(units, kitchen).empty();
}

}  // namespace foon
