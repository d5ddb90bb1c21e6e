#include "foon/store.hpp"

#include <algorithm>
#include <set>

#include "foon/error.hpp"

namespace foon {

bool DishClassConfig::declares(std::string_view cls) const {
  return std::find(classes.begin(), classes.end(), cls) != classes.end();
}

DishClassConfig DishClassConfig::load(const std::filesystem::path& path) {
  return parse(read_text_file(path));
}

DishClassConfig DishClassConfig::parse(std::string_view text) {
  const Json doc = parse_json_text(text);
  if (!doc.is_object() || !doc.contains("classes") || !doc.at("classes").is_array()) {
    throw ParseError("classes", "dish class file needs a 'classes' array");
  }
  DishClassConfig cfg;
  for (const auto& c : doc.at("classes")) {
    if (!c.is_string()) throw ParseError("classes", "expected class names");
    cfg.classes.push_back(normalize_name(c.get<std::string>()));
  }
  if (doc.contains("assignment")) {
    const auto& a = doc.at("assignment");
    if (!a.is_object()) throw ParseError("assignment", "expected an object of id -> class");
    for (const auto& item : a.items()) {
      if (!item.value().is_string()) throw ParseError("assignment." + item.key(), "expected a class name");
      const auto cls = normalize_name(item.value().get<std::string>());
      if (!cfg.declares(cls)) {
        throw ParseError("assignment." + item.key(), "class '" + cls + "' is not declared");
      }
      cfg.assignment[item.key()] = cls;
    }
  }
  return cfg;
}

namespace {

const std::vector<std::size_t> kNoUnits;

}  // namespace

const std::vector<std::size_t>& UniversalFoon::producer_indices(const ObjectKey& key) const {
  auto it = producers_.find(key);
  return it == producers_.end() ? kNoUnits : it->second;
}

std::vector<std::string> UniversalFoon::ingredient_names(const KitchenModel& kitchen) const {
  std::set<std::string> names;
  for (const auto& unit : units_) {
    for (const auto* side : {&unit.inputs, &unit.outputs}) {
      for (const auto& node : *side) {
        if (kitchen.is_ingredient_class(node)) names.insert(node.name);
      }
    }
  }
  return {names.begin(), names.end()};
}

bool UniversalFoon::has_ingredient(std::string_view name, const KitchenModel& kitchen) const {
  const auto names = ingredient_names(kitchen);
  return std::binary_search(names.begin(), names.end(), std::string(name));
}

std::uint64_t UniversalFoon::fingerprint() const {
  // FNV-1a over the canonical unit strings in order.
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    h ^= 0xff;
    h *= 1099511628211ULL;
  };
  for (const auto& u : units_) mix(canonical_string(u));
  return h;
}

class FoonBuilder {
public:
  std::size_t add_unit(const FunctionalUnit& unit) {
    const auto canon = canonical_string(unit);
    if (auto it = foon_.unit_lookup_.find(canon); it != foon_.unit_lookup_.end()) return it->second;
    const std::size_t index = foon_.units_.size();
    foon_.units_.push_back(unit);
    foon_.unit_lookup_.emplace(canon, index);
    auto index_side = [&](const std::vector<ObjectNode>& nodes, auto& map) {
      std::set<ObjectKey> seen;
      for (const auto& n : nodes) {
        auto key = key_of(n);
        if (seen.insert(key).second) map[key].push_back(index);
      }
    };
    index_side(unit.outputs, foon_.producers_);
    index_side(unit.inputs, foon_.consumers_);
    return index;
  }

  void add_subgraph(const std::string& id, const ObjectNode& goal, const std::string& dish_class,
                    std::vector<std::size_t> indices) {
    auto [it, inserted] = foon_.subgraph_goals_.try_emplace(id);
    if (!inserted) {
      // Same id merged twice: the second copy must describe the same recipe.
      if (!object_node_equals(it->second.goal, goal)) {
        throw ValidationError("foon_store", "subgraph id '" + id + "' merged with two different goals");
      }
      return;
    }
    it->second = SubgraphGoal{goal, dish_class, std::move(indices)};
    if (!dish_class.empty()) foon_.class_registry_[dish_class].push_back(id);
  }

  UniversalFoon take() { return std::move(foon_); }

private:
  UniversalFoon foon_;
};

std::vector<ObjectNode> terminal_objects(const Subgraph& subgraph) {
  std::set<std::string> consumed;
  for (const auto& u : subgraph.units) {
    for (const auto& n : u.inputs) consumed.insert(canonical_string(n));
  }
  std::vector<ObjectNode> out;
  std::set<std::string> seen;
  for (const auto& u : subgraph.units) {
    for (const auto& n : u.outputs) {
      const auto canon = canonical_string(n);
      if (!consumed.count(canon) && seen.insert(canon).second) out.push_back(n);
    }
  }
  return out;
}

ObjectNode derive_goal(const Subgraph& subgraph) {
  if (subgraph.goal) return *subgraph.goal;
  const auto terminals = terminal_objects(subgraph);
  if (terminals.size() == 1) return terminals.front();
  std::string names;
  for (const auto& t : terminals) names += (names.empty() ? "" : ", ") + to_string(t);
  throw ValidationError("foon_store", "subgraph '" + subgraph.id + "' has " + std::to_string(terminals.size()) +
                                          " goal candidates (" + names + "); annotate an explicit goal");
}

namespace {

std::string resolve_class(const Subgraph& sg, const DishClassConfig& classes) {
  if (auto it = classes.assignment.find(sg.id); it != classes.assignment.end()) return it->second;
  if (sg.dish_class) {
    if (!classes.classes.empty() && !classes.declares(*sg.dish_class)) {
      throw ValidationError("foon_store", "subgraph '" + sg.id + "' uses undeclared dish class '" +
                                              *sg.dish_class + "'");
    }
    return *sg.dish_class;
  }
  return {};
}

void absorb(FoonBuilder& builder, const Subgraph& sg, const DishClassConfig& classes) {
  Subgraph copy = sg;
  normalize_and_validate(copy);
  const ObjectNode goal = derive_goal(copy);
  std::vector<std::size_t> indices;
  for (const auto& u : copy.units) {
    const auto idx = builder.add_unit(u);
    if (std::find(indices.begin(), indices.end(), idx) == indices.end()) indices.push_back(idx);
  }
  builder.add_subgraph(copy.id, goal, resolve_class(copy, classes), std::move(indices));
}

void absorb(FoonBuilder& builder, const UniversalFoon& other, const DishClassConfig& classes) {
  std::vector<std::size_t> remap;
  remap.reserve(other.units().size());
  for (const auto& u : other.units()) remap.push_back(builder.add_unit(u));
  for (const auto& [id, sg] : other.subgraph_goals()) {
    std::vector<std::size_t> indices;
    for (auto i : sg.unit_indices) indices.push_back(remap.at(i));
    std::string cls = sg.dish_class;
    if (auto it = classes.assignment.find(id); it != classes.assignment.end()) cls = it->second;
    builder.add_subgraph(id, sg.goal, cls, std::move(indices));
  }
}

}  // namespace

UniversalFoon merge(std::span<const Subgraph> subgraphs, const DishClassConfig& classes) {
  FoonBuilder builder;
  for (const auto& sg : subgraphs) absorb(builder, sg, classes);
  return builder.take();
}

std::vector<GoalCandidate> find_goal_candidates(const UniversalFoon& foon, std::string_view dish_type,
                                                const KitchenModel& kitchen) {
  std::vector<GoalCandidate> out;
  auto it = foon.class_registry().find(std::string(dish_type));
  if (it == foon.class_registry().end()) return out;
  for (const auto& id : it->second) {
    const auto& sg = foon.subgraph_goals().at(id);
    std::vector<FunctionalUnit> units;
    for (auto i : sg.unit_indices) units.push_back(foon.units()[i]);
    out.push_back({id, sg.goal, kitchen.ingredient_names(units)});
  }
  return out;
}

std::vector<FunctionalUnit> units_producing(const UniversalFoon& foon, const ObjectKey& key) {
  std::vector<FunctionalUnit> out;
  for (auto i : foon.producer_indices(key)) out.push_back(foon.units()[i]);
  return out;
}

std::string serialize_universal(const UniversalFoon& foon) {
  Json j;
  j["format"] = "universal-foon";
  j["subgraphs"] = Json::array();
  // Registry order first so class listings round-trip in insertion order.
  std::set<std::string> written;
  auto write = [&](const std::string& id) {
    if (!written.insert(id).second) return;
    const auto& sg = foon.subgraph_goals().at(id);
    Json s;
    s["id"] = id;
    if (!sg.dish_class.empty()) s["dish_class"] = sg.dish_class;
    s["goal"] = to_json(sg.goal);
    s["units"] = sg.unit_indices;
    j["subgraphs"].push_back(s);
  };
  for (const auto& [cls, ids] : foon.class_registry()) {
    for (const auto& id : ids) write(id);
  }
  for (const auto& [id, sg] : foon.subgraph_goals()) write(id);
  j["units"] = Json::array();
  for (const auto& u : foon.units()) j["units"].push_back(to_json(u));
  return dump_canonical(j);
}

UniversalFoon universal_from_json(const Json& doc, Warnings* warnings) {
  if (!doc.is_object() || !doc.contains("units")) throw ParseError("", "expected a universal FOON document");
  if (warnings) {
    for (const auto& item : doc.items()) {
      if (item.key() != "format" && item.key() != "subgraphs" && item.key() != "units") {
        warnings->push_back("unknown field '" + item.key() + "' ignored");
      }
    }
  }
  const auto units = units_from_json(doc.at("units"), "units", warnings);
  FoonBuilder builder;
  std::vector<std::size_t> remap;
  for (const auto& u : units) remap.push_back(builder.add_unit(u));
  if (doc.contains("subgraphs")) {
    const auto& list = doc.at("subgraphs");
    if (!list.is_array()) throw ParseError("subgraphs", "expected an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const auto& s = list[i];
      const std::string where = "subgraphs[" + std::to_string(i) + "]";
      if (!s.is_object() || !s.contains("id") || !s.at("id").is_string() || !s.contains("goal")) {
        throw ParseError(where, "expected {id, goal, units}");
      }
      std::vector<std::size_t> indices;
      if (s.contains("units")) {
        for (const auto& idx : s.at("units")) {
          if (!idx.is_number_unsigned() || idx.get<std::size_t>() >= remap.size()) {
            throw ParseError(where + ".units", "unit index out of range");
          }
          indices.push_back(remap[idx.get<std::size_t>()]);
        }
      }
      std::string cls;
      if (s.contains("dish_class") && s.at("dish_class").is_string()) {
        cls = normalize_name(s.at("dish_class").get<std::string>());
      }
      builder.add_subgraph(s.at("id").get<std::string>(), object_from_json(s.at("goal"), where + ".goal", warnings),
                           cls, std::move(indices));
    }
  }
  return builder.take();
}

UniversalFoon load_foon(std::span<const std::filesystem::path> paths, const DishClassConfig& classes,
                        Warnings* warnings) {
  FoonBuilder builder;
  for (const auto& path : paths) {
    const std::string text = read_text_file(path);
    try {
      const auto first = text.find_first_not_of(" \t\r\n");
      if (first != std::string::npos && text[first] == '{') {
        const Json doc = parse_json_text(text);
        if (doc.is_object() && doc.contains("format") && doc.at("format") == "universal-foon") {
          absorb(builder, universal_from_json(doc, warnings), classes);
        } else {
          absorb(builder, subgraph_from_json(doc, warnings), classes);
        }
      } else {
        absorb(builder, import_legacy_foon(text, path.stem().string()), classes);
      }
    } catch (const ParseError& e) {
      throw ParseError(path.string() + (e.position().empty() ? "" : ":" + e.position()),
                       std::string(e.what()).substr(e.position().empty() ? 0 : e.position().size() + 2));
    }
  }
  return builder.take();
}

}  // namespace foon
