#include "foon/kitchen.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "foon/document.hpp"
#include "foon/error.hpp"
#include "json.hpp"

namespace foon {

KitchenModel::KitchenModel(std::set<ObjectKey> base_items, std::set<std::string> utensils)
    : base_items_(std::move(base_items)) {
  for (const auto& u : utensils) utensils_.insert(normalize_name(u));
}

KitchenModel KitchenModel::load(const std::filesystem::path& path) {
  return parse(read_text_file(path));
}

KitchenModel KitchenModel::parse(std::string_view text) {
  const nlohmann::json doc = parse_json_text(text);
  if (!doc.is_object()) throw ParseError("kitchen", "expected an object");
  std::set<ObjectKey> base;
  std::set<std::string> utensils;
  if (doc.contains("base_items")) {
    const auto& items = doc.at("base_items");
    if (!items.is_array()) throw ParseError("base_items", "expected an array");
    for (std::size_t i = 0; i < items.size(); ++i) {
      const auto& item = items[i];
      const std::string where = "base_items[" + std::to_string(i) + "]";
      if (!item.is_object() || !item.contains("name") || !item.at("name").is_string()) {
        throw ParseError(where, "expected {name, states}");
      }
      ObjectNode node;
      node.name = item.at("name").get<std::string>();
      if (item.contains("states")) node.states = parse_states(item.at("states"), where + ".states");
      normalize_and_validate(node);
      base.insert(key_of(node));
    }
  }
  if (doc.contains("utensils")) {
    const auto& list = doc.at("utensils");
    if (!list.is_array()) throw ParseError("utensils", "expected an array of names");
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (!list[i].is_string()) throw ParseError("utensils[" + std::to_string(i) + "]", "expected a string");
      utensils.insert(normalize_name(list[i].get<std::string>()));
    }
  }
  return KitchenModel(std::move(base), std::move(utensils));
}

bool KitchenModel::is_utensil(std::string_view name) const {
  return utensils_.count(std::string(name)) > 0;
}

bool KitchenModel::is_ingredient_class(const ObjectNode& node) const {
  return !is_utensil(node.name) && node.ingredients.empty();
}

bool KitchenModel::carries_ingredient(const ObjectNode& node) const {
  return is_ingredient_class(node) || !node.ingredients.empty();
}

bool KitchenModel::is_base_available(const ObjectNode& node) const {
  if (node.location || !node.ingredients.empty()) return false;
  if (is_utensil(node.name)) return true;
  const ObjectKey key = key_of(node);
  if (base_items_.count(key)) return true;
  if (key.states.size() == 1 && !key.states.front().argument) {
    const auto& label = key.states.front().label;
    return label == "whole" || label == "raw";
  }
  return false;
}

std::vector<std::string> KitchenModel::ingredient_names(const ObjectNode& node) const {
  if (is_ingredient_class(node)) return {node.name};
  std::vector<std::string> out;
  for (const auto& i : node.ingredients) {
    if (!is_utensil(i)) out.push_back(i);
  }
  return out;
}

std::vector<std::string> KitchenModel::ingredient_names(const FunctionalUnit& unit) const {
  std::vector<std::string> out;
  auto add = [&](const ObjectNode& node) {
    for (auto& name : ingredient_names(node)) {
      if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(std::move(name));
    }
  };
  for (const auto& n : unit.inputs) add(n);
  for (const auto& n : unit.outputs) add(n);
  return out;
}

std::vector<std::string> KitchenModel::ingredient_names(const std::vector<FunctionalUnit>& units) const {
  std::vector<std::string> out;
  for (const auto& unit : units) {
    for (auto& name : ingredient_names(unit)) {
      if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(std::move(name));
    }
  }
  return out;
}

std::vector<std::string> executability_violations(const std::vector<FunctionalUnit>& units,
                                                  const KitchenModel& kitchen) {
  std::vector<std::string> violations;
  std::set<std::string> produced;
  for (std::size_t k = 0; k < units.size(); ++k) {
    for (const auto& input : units[k].inputs) {
      if (kitchen.is_base_available(input) || produced.count(canonical_string(input))) continue;
      bool produced_later = false;
      for (std::size_t j = k; j < units.size() && !produced_later; ++j) {
        for (const auto& out : units[j].outputs) {
          if (object_node_equals(out, input)) produced_later = true;
        }
      }
      std::ostringstream msg;
      msg << "unit " << k << " (" << units[k].motion.verb << ") needs " << to_string(input)
          << (produced_later ? ", which is only produced at or after that unit"
                             : ", which is neither available nor produced");
      violations.push_back(msg.str());
    }
    for (const auto& out : units[k].outputs) produced.insert(canonical_string(out));
  }
  return violations;
}

}  // namespace foon
