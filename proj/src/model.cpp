#include "foon/model.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "foon/error.hpp"

namespace foon {

std::string normalize_name(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (char c : raw) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

std::vector<std::string> PlanningRequest::ingredient_names() const {
  std::vector<std::string> names;
  for (const auto& ing : ingredients) {
    if (std::find(names.begin(), names.end(), ing.name) == names.end()) names.push_back(ing.name);
  }
  return names;
}

ObjectKey key_of(const ObjectNode& node) {
  ObjectKey key{node.name, node.states, node.ingredients};
  std::sort(key.states.begin(), key.states.end());
  std::sort(key.ingredients.begin(), key.ingredients.end());
  return key;
}

ObjectKey make_key(std::string_view name, std::vector<std::string> state_labels) {
  ObjectKey key;
  key.name = normalize_name(name);
  for (auto& label : state_labels) key.states.push_back({normalize_name(label), std::nullopt});
  std::sort(key.states.begin(), key.states.end());
  return key;
}

bool object_node_equals(const ObjectNode& a, const ObjectNode& b) {
  return a.location == b.location && key_of(a) == key_of(b);
}

std::string to_string(const StateLabel& state) {
  return state.argument ? state.label + " [" + *state.argument + "]" : state.label;
}

std::string canonical_string(const ObjectNode& node) {
  const ObjectKey key = key_of(node);
  std::string out = key.name;
  out += '{';
  for (const auto& s : key.states) {
    out += s.label;
    if (s.argument) out += '[' + *s.argument + ']';
    out += ';';
  }
  out += "}[";
  for (const auto& i : key.ingredients) out += i + ';';
  out += ']';
  if (node.location) out += '@' + *node.location;
  return out;
}

namespace {

std::vector<std::string> sorted_canonical(const std::vector<ObjectNode>& nodes) {
  std::vector<std::string> out;
  out.reserve(nodes.size());
  for (const auto& n : nodes) out.push_back(canonical_string(n));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::string canonical_string(const FunctionalUnit& unit) {
  std::string out = unit.motion.verb + " <";
  for (const auto& s : sorted_canonical(unit.inputs)) out += s + '|';
  out += "> <";
  for (const auto& s : sorted_canonical(unit.outputs)) out += s + '|';
  out += '>';
  return out;
}

bool functional_unit_equals(const FunctionalUnit& a, const FunctionalUnit& b) {
  return a.motion.verb == b.motion.verb && sorted_canonical(a.inputs) == sorted_canonical(b.inputs) &&
         sorted_canonical(a.outputs) == sorted_canonical(b.outputs);
}

bool task_tree_equals(const TaskTree& a, const TaskTree& b) {
  if (a.units.size() != b.units.size() || !object_node_equals(a.goal, b.goal) ||
      a.provenance != b.provenance) {
    return false;
  }
  for (std::size_t i = 0; i < a.units.size(); ++i) {
    if (!functional_unit_equals(a.units[i], b.units[i])) return false;
  }
  return true;
}

bool has_state_label(const ObjectNode& node, std::string_view label) {
  return std::any_of(node.states.begin(), node.states.end(),
                     [&](const StateLabel& s) { return s.label == label; });
}

std::vector<std::string> state_labels(const ObjectNode& node) {
  std::vector<std::string> out;
  for (const auto& s : node.states) out.push_back(to_string(s));
  return out;
}

std::string to_string(const ObjectNode& node) {
  std::string out = node.name + '{';
  for (std::size_t i = 0; i < node.states.size(); ++i) {
    if (i) out += ", ";
    out += to_string(node.states[i]);
  }
  out += '}';
  if (!node.ingredients.empty()) {
    out += "[ing: ";
    for (std::size_t i = 0; i < node.ingredients.size(); ++i) {
      if (i) out += ", ";
      out += node.ingredients[i];
    }
    out += ']';
  }
  if (node.location) out += '@' + *node.location;
  return out;
}

std::string to_string(const ObjectKey& key) {
  ObjectNode node{key.name, key.states, key.ingredients, std::nullopt};
  return to_string(node);
}

std::string to_string(SubstitutionKind kind) {
  return kind == SubstitutionKind::object ? "object" : "state";
}

void normalize_and_validate(ObjectNode& node) {
  node.name = normalize_name(node.name);
  if (node.name.empty()) throw ValidationError("foon_model", "object name must be non-empty");
  std::set<StateLabel> seen_states;
  for (auto& s : node.states) {
    s.label = normalize_name(s.label);
    if (s.label.empty()) {
      throw ValidationError("foon_model", "state label of '" + node.name + "' must be non-empty");
    }
    if (s.argument) {
      *s.argument = normalize_name(*s.argument);
      if (s.argument->empty()) s.argument.reset();
    }
    if (!seen_states.insert(s).second) {
      throw ValidationError("foon_model",
                            "duplicate state '" + to_string(s) + "' on '" + node.name + "'");
    }
  }
  std::set<std::string> seen_ingredients;
  for (auto& i : node.ingredients) {
    i = normalize_name(i);
    if (i.empty()) {
      throw ValidationError("foon_model", "empty ingredient name in '" + node.name + "'");
    }
    if (!seen_ingredients.insert(i).second) {
      throw ValidationError("foon_model", "duplicate ingredient '" + i + "' in '" + node.name + "'");
    }
  }
  if (node.location) {
    *node.location = normalize_name(*node.location);
    if (node.location->empty()) node.location.reset();
  }
}

void normalize_and_validate(FunctionalUnit& unit) {
  unit.motion.verb = normalize_name(unit.motion.verb);
  if (unit.motion.verb.empty()) throw ValidationError("foon_model", "motion verb must be non-empty");
  if (unit.motion.weight && !(*unit.motion.weight >= 0.0 && *unit.motion.weight <= 1.0)) {
    throw ValidationError("foon_model", "motion weight " + std::to_string(*unit.motion.weight) +
                                            " of '" + unit.motion.verb + "' outside [0,1]");
  }
  if (unit.inputs.empty()) {
    throw ValidationError("foon_model", "unit '" + unit.motion.verb + "' has no inputs");
  }
  if (unit.outputs.empty()) {
    throw ValidationError("foon_model", "unit '" + unit.motion.verb + "' has no outputs");
  }
  for (auto& n : unit.inputs) normalize_and_validate(n);
  for (auto& n : unit.outputs) normalize_and_validate(n);
}

void normalize_and_validate(Subgraph& subgraph) {
  if (subgraph.units.empty()) {
    throw ValidationError("foon_model", "subgraph '" + subgraph.id + "': units non-empty");
  }
  if (subgraph.dish_class) *subgraph.dish_class = normalize_name(*subgraph.dish_class);
  for (auto& u : subgraph.units) normalize_and_validate(u);
  if (subgraph.goal) normalize_and_validate(*subgraph.goal);
}

void normalize_and_validate(PlanningRequest& request) {
  if (request.ingredients.empty()) {
    throw ValidationError("foon_model", "planning request needs at least one ingredient");
  }
  request.dish_type = normalize_name(request.dish_type);
  if (request.dish_type.empty()) throw ValidationError("foon_model", "planning request needs a dish type");
  for (auto& ing : request.ingredients) {
    ing.name = normalize_name(ing.name);
    ing.state = normalize_name(ing.state);
    if (ing.name.empty() || ing.state.empty()) {
      throw ValidationError("foon_model", "requested ingredient needs a name and a state");
    }
  }
}

ObjectNode make_object(std::string_view name, std::vector<std::string> state_labels,
                       std::vector<std::string> ingredients, std::optional<std::string> location) {
  ObjectNode node;
  node.name = std::string(name);
  for (auto& label : state_labels) {
    // "in [bowl]" style labels carry an argument.
    StateLabel state;
    const auto open = label.find('[');
    if (open != std::string::npos && label.back() == ']') {
      state.label = label.substr(0, open);
      state.argument = label.substr(open + 1, label.size() - open - 2);
    } else {
      state.label = label;
    }
    node.states.push_back(std::move(state));
  }
  node.ingredients = std::move(ingredients);
  node.location = std::move(location);
  normalize_and_validate(node);
  return node;
}

}  // namespace foon
