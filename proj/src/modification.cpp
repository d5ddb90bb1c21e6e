#include "foon/modification.hpp"

#include <algorithm>
#include <set>

#include "foon/document.hpp"
#include "foon/error.hpp"
#include "foon/goal_select.hpp"

namespace foon {

std::optional<std::string> StateClassConfig::class_of(std::string_view state) const {
  auto it = assignment.find(std::string(state));
  if (it == assignment.end()) return std::nullopt;
  return it->second;
}

StateClassConfig StateClassConfig::load(const std::filesystem::path& path) { return parse(read_text_file(path)); }

StateClassConfig StateClassConfig::parse(std::string_view text) {
  const Json doc = parse_json_text(text);
  if (!doc.is_object() || !doc.contains("classes") || !doc.at("classes").is_array()) {
    throw ParseError("classes", "state class file needs a 'classes' array");
  }
  StateClassConfig cfg;
  for (const auto& c : doc.at("classes")) {
    if (!c.is_string()) throw ParseError("classes", "expected class names");
    cfg.classes.push_back(normalize_name(c.get<std::string>()));
  }
  if (doc.contains("assignment")) {
    const auto& a = doc.at("assignment");
    if (!a.is_object()) throw ParseError("assignment", "expected an object of state -> class");
    for (const auto& item : a.items()) {
      if (!item.value().is_string()) throw ParseError("assignment." + item.key(), "expected a class name");
      const auto cls = normalize_name(item.value().get<std::string>());
      if (std::find(cfg.classes.begin(), cfg.classes.end(), cls) == cfg.classes.end()) {
        throw ParseError("assignment." + item.key(), "class '" + cls + "' is not declared");
      }
      cfg.assignment[normalize_name(item.key())] = cls;
    }
  }
  return cfg;
}

MotionVerbStats MotionVerbStats::build(const UniversalFoon& foon) {
  std::map<std::string, std::map<std::string, std::size_t>> counts;
  for (const auto& unit : foon.units()) {
    std::set<std::string> fresh;
    for (const auto& out : unit.outputs) {
      for (const auto& s : out.states) {
        const bool had = std::any_of(unit.inputs.begin(), unit.inputs.end(), [&](const ObjectNode& in) {
          return in.name == out.name && has_state_label(in, s.label);
        });
        if (!had) fresh.insert(s.label);
      }
    }
    for (const auto& label : fresh) ++counts[label][unit.motion.verb];
  }
  MotionVerbStats stats;
  for (const auto& [label, verbs] : counts) {
    // std::map iterates verbs in order, so the first maximum is the smallest verb.
    auto best = verbs.begin();
    for (auto it = verbs.begin(); it != verbs.end(); ++it) {
      if (it->second > best->second) best = it;
    }
    stats.verb_by_state[label] = best->first;
  }
  return stats;
}

IntegrationPolicy IntegrationPolicy::load(const std::filesystem::path& path) { return parse(read_text_file(path)); }

IntegrationPolicy IntegrationPolicy::parse(std::string_view text) {
  const Json doc = parse_json_text(text);
  if (!doc.is_object() || !doc.contains("accepting_verbs") || !doc.at("accepting_verbs").is_array()) {
    throw ParseError("accepting_verbs", "integration policy needs an 'accepting_verbs' array");
  }
  IntegrationPolicy policy;
  for (const auto& v : doc.at("accepting_verbs")) {
    if (!v.is_string()) throw ParseError("accepting_verbs", "expected verb names");
    policy.accepting_verbs.insert(normalize_name(v.get<std::string>()));
  }
  return policy;
}

namespace {

bool contains(std::span<const std::string> names, std::string_view name) {
  return std::find(names.begin(), names.end(), name) != names.end();
}

std::vector<std::string> with_name(std::span<const std::string> names, const std::string& extra) {
  std::vector<std::string> out(names.begin(), names.end());
  if (!contains(out, extra)) out.push_back(extra);
  return out;
}

// Keys of `name` that carry `label` and have producers, fewest labels first.
std::vector<ObjectKey> producible_keys_with(const UniversalFoon& foon, const KitchenModel& kitchen,
                                            const std::string& name, const std::string& label) {
  std::vector<ObjectKey> keys;
  for (const auto& [key, producers] : foon.producers()) {
    if (key.name != name || !key.ingredients.empty() || kitchen.is_utensil(name)) continue;
    if (std::any_of(key.states.begin(), key.states.end(), [&](const StateLabel& s) { return s.label == label; })) {
      keys.push_back(key);
    }
  }
  std::stable_sort(keys.begin(), keys.end(),
                   [](const ObjectKey& a, const ObjectKey& b) { return a.states.size() < b.states.size(); });
  return keys;
}

ObjectNode node_of(const ObjectKey& key) { return ObjectNode{key.name, key.states, key.ingredients, std::nullopt}; }

template <typename Fn>
void for_each_node(TaskTree& tree, Fn&& fn) {
  for (auto& unit : tree.units) {
    for (auto& n : unit.inputs) fn(n);
    for (auto& n : unit.outputs) fn(n);
  }
  fn(tree.goal);
}

void rename_object(TaskTree& tree, const std::string& from, const std::string& to) {
  for_each_node(tree, [&](ObjectNode& n) {
    if (n.name == from) n.name = to;
    for (auto& s : n.states) {
      if (s.argument == from) s.argument = to;
    }
    if (n.location == from) n.location = to;
    std::vector<std::string> list;
    for (auto& i : n.ingredients) {
      const std::string& v = i == from ? to : i;
      if (std::find(list.begin(), list.end(), v) == list.end()) list.push_back(v);
    }
    n.ingredients = std::move(list);
  });
}

}  // namespace

TaskTree retrieve_subtree(const RetrievalContext& ctx, const RequestedIngredient& ingredient,
                          std::span<const std::string> context_names) {
  if (!ctx.foon.has_ingredient(ingredient.name, ctx.kitchen)) {
    throw PreconditionError("tree_modification", "'" + ingredient.name + "' is not an ingredient of the FOON");
  }
  const ObjectNode wanted = make_object(ingredient.name, {ingredient.state});
  if (ctx.kitchen.is_base_available(wanted)) return TaskTree{{}, wanted, {}};
  const auto names = with_name(context_names, ingredient.name);
  if (!ctx.foon.producer_indices(key_of(wanted)).empty()) {
    return retrieve_reference_task_tree(ctx, wanted, names);
  }
  const auto keys = producible_keys_with(ctx.foon, ctx.kitchen, ingredient.name, ingredient.state);
  if (keys.empty()) throw MissingStateError(ingredient.name, ingredient.state);
  return retrieve_reference_task_tree(ctx, node_of(keys.front()), names);
}

SubstitutedTree substitute_state(const PlanningContext& ctx, const RequestedIngredient& ingredient,
                                 std::span<const std::string> context_names) {
  const auto& name = ingredient.name;
  const auto& state = ingredient.state;
  if (!ctx.foon.has_ingredient(name, ctx.kitchen)) {
    throw PreconditionError("tree_modification", "'" + name + "' is not an ingredient of the FOON");
  }
  if (ctx.kitchen.is_base_available(make_object(name, {state})) ||
      !producible_keys_with(ctx.foon, ctx.kitchen, name, state).empty()) {
    throw PreconditionError("tree_modification", "state '" + state + "' of '" + name + "' is already reachable");
  }
  const auto cls = ctx.state_classes.class_of(state);
  if (!cls) throw PlanningError("tree_modification", "no state analog for '" + state + "': state has no class");

  std::set<std::string> analogs;
  for (const auto& [key, producers] : ctx.foon.producers()) {
    if (key.name != name || !key.ingredients.empty()) continue;
    for (const auto& s : key.states) {
      if (s.label != state && ctx.state_classes.class_of(s.label) == cls) analogs.insert(s.label);
    }
  }

  const auto rctx = ctx.retrieval();
  std::optional<TaskTree> best;
  std::string best_state;
  for (const auto& analog : analogs) {
    TaskTree candidate;
    try {
      candidate = retrieve_subtree(rctx, {name, analog}, context_names);
    } catch (const BudgetExceededError&) {
      throw;
    } catch (const PlanningError&) {
      continue;
    }
    if (!best || candidate.units.size() < best->units.size()) {
      best = std::move(candidate);
      best_state = analog;
    }
  }
  if (!best) {
    throw PlanningError("tree_modification", "no state analog for '" + state + "' of '" + name + "'");
  }

  std::string note = "verb unchanged";
  auto verb = ctx.verb_stats.verb_by_state.find(state);
  for (auto& unit : best->units) {
    const bool produces = std::any_of(unit.outputs.begin(), unit.outputs.end(), [&](const ObjectNode& out) {
      return out.name == name && has_state_label(out, best_state);
    });
    const bool had = std::any_of(unit.inputs.begin(), unit.inputs.end(), [&](const ObjectNode& in) {
      return in.name == name && has_state_label(in, best_state);
    });
    if (!produces || had || verb == ctx.verb_stats.verb_by_state.end()) continue;
    if (unit.motion.verb != verb->second) note = "verb '" + unit.motion.verb + "' replaced by '" + verb->second + "'";
    unit.motion.verb = verb->second;
  }
  for_each_node(*best, [&](ObjectNode& n) {
    if (n.name != name) return;
    for (auto& s : n.states) {
      if (s.label == best_state) s.label = state;
    }
  });

  SubstitutionRecord record{SubstitutionKind::state, best_state, state,
                            100.0 * similarity(ctx.table, best_state, state), name, note};
  best->provenance.push_back(record);
  return {std::move(*best), {record}};
}

SubstitutedTree substitute_object(const PlanningContext& ctx, const RequestedIngredient& ingredient,
                                  std::span<const std::string> context_names) {
  const auto& x = ingredient.name;
  if (ctx.foon.has_ingredient(x, ctx.kitchen)) {
    throw PreconditionError("tree_modification", "'" + x + "' is already an ingredient of the FOON");
  }
  const auto candidates = ctx.foon.ingredient_names(ctx.kitchen);
  const auto nearest = nearest_ingredient(ctx.table, x, candidates);
  const auto& y = nearest.name;

  SubstitutedTree result;
  result.records.push_back({SubstitutionKind::object, y, x, nearest.confidence, x, ""});
  const auto names = with_name(context_names, y);
  try {
    result.subtree = retrieve_subtree(ctx.retrieval(), {y, ingredient.state}, names);
  } catch (const MissingStateError&) {
    auto inner = substitute_state(ctx, {y, ingredient.state}, names);
    result.subtree = std::move(inner.subtree);
    result.subtree.provenance.clear();
    for (auto& r : inner.records) {
      r.ingredient = x;
      result.records.push_back(r);
    }
  }
  rename_object(result.subtree, y, x);
  result.subtree.provenance = result.records;
  return result;
}

namespace {

bool node_in(const std::vector<ObjectNode>& nodes, const ObjectNode& node) {
  return std::any_of(nodes.begin(), nodes.end(), [&](const ObjectNode& n) { return object_node_equals(n, node); });
}

// Outputs of `unit` that should record a newly added ingredient.
std::vector<std::size_t> absorbing_outputs(const FunctionalUnit& unit, const KitchenModel& kitchen,
                                           bool fall_back_to_any) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < unit.outputs.size(); ++i) {
    if (!unit.outputs[i].ingredients.empty()) idx.push_back(i);
  }
  if (!idx.empty()) return idx;
  for (std::size_t i = 0; i < unit.outputs.size(); ++i) {
    const auto& out = unit.outputs[i];
    if (!kitchen.is_ingredient_class(out) && !node_in(unit.inputs, out)) idx.push_back(i);
  }
  if (!idx.empty() || !fall_back_to_any) return idx;
  for (std::size_t i = 0; i < unit.outputs.size(); ++i) {
    if (!node_in(unit.inputs, unit.outputs[i])) idx.push_back(i);
  }
  if (!idx.empty()) return idx;
  for (std::size_t i = 0; i < unit.outputs.size(); ++i) idx.push_back(i);
  return idx;
}

}  // namespace

Integration integrate_subtree(TaskTree tree, const TaskTree& subtree, const IntegrationPolicy& policy,
                              const KitchenModel& kitchen, std::optional<std::size_t> accepting_index) {
  std::size_t target = 0;
  if (accepting_index) {
    if (*accepting_index >= tree.units.size()) {
      throw PreconditionError("tree_modification", "accepting unit index out of range");
    }
    target = *accepting_index;
  } else {
    auto it = std::find_if(tree.units.begin(), tree.units.end(),
                           [&](const FunctionalUnit& u) { return policy.accepts(u.motion.verb); });
    if (it == tree.units.end()) {
      throw PlanningError("tree_modification",
                          "no functional unit accepts additional ingredient '" + subtree.goal.name + "'");
    }
    target = static_cast<std::size_t>(it - tree.units.begin());
  }

  std::vector<FunctionalUnit> spliced;
  for (const auto& unit : subtree.units) {
    const bool already = std::any_of(tree.units.begin(), tree.units.begin() + static_cast<std::ptrdiff_t>(target),
                                     [&](const FunctionalUnit& u) { return functional_unit_equals(u, unit); });
    if (!already) spliced.push_back(unit);
  }
  tree.units.insert(tree.units.begin() + static_cast<std::ptrdiff_t>(target), spliced.begin(), spliced.end());
  target += spliced.size();

  const std::string& added = subtree.goal.name;
  std::vector<std::pair<ObjectNode, ObjectNode>> changed;  // old -> new
  auto absorb = [&](FunctionalUnit& unit, bool fall_back) {
    for (auto i : absorbing_outputs(unit, kitchen, fall_back)) {
      auto& out = unit.outputs[i];
      if (std::find(out.ingredients.begin(), out.ingredients.end(), added) != out.ingredients.end()) continue;
      ObjectNode before = out;
      out.ingredients.push_back(added);
      changed.emplace_back(std::move(before), out);
    }
  };

  auto& accepting = tree.units[target];
  if (!node_in(accepting.inputs, subtree.goal)) accepting.inputs.push_back(subtree.goal);
  absorb(accepting, true);

  for (std::size_t j = target + 1; j < tree.units.size(); ++j) {
    bool touched = false;
    for (auto& in : tree.units[j].inputs) {
      for (const auto& [before, after] : changed) {
        if (object_node_equals(in, before)) {
          in = after;
          touched = true;
          break;
        }
      }
    }
    if (touched) absorb(tree.units[j], false);
  }
  for (const auto& [before, after] : changed) {
    if (object_node_equals(tree.goal, before)) tree.goal = after;
  }
  tree.provenance.insert(tree.provenance.end(), subtree.provenance.begin(), subtree.provenance.end());
  return {std::move(tree), target};
}

namespace {

struct Carried {
  ObjectNode node;
  bool carries = false;
};

}  // namespace

TaskTree remove_extraneous(TaskTree tree, std::span<const std::string> required, const KitchenModel& kitchen) {
  const ObjectKey goal_key = key_of(tree.goal);
  auto strip = [&](const ObjectNode& node) -> std::optional<Carried> {
    const bool ingredient = kitchen.is_ingredient_class(node);
    if (ingredient && !contains(required, node.name) && key_of(node) != goal_key) return std::nullopt;
    Carried c{node, false};
    std::erase_if(c.node.ingredients,
                  [&](const std::string& i) { return !contains(required, i) && !kitchen.is_utensil(i); });
    c.carries = ingredient || std::any_of(c.node.ingredients.begin(), c.node.ingredients.end(),
                                          [&](const std::string& i) { return !kitchen.is_utensil(i); });
    return c;
  };

  std::map<std::string, std::vector<Carried>> rewired;  // canonical output of a deleted unit -> stand-ins
  std::optional<ObjectNode> new_goal;
  std::vector<FunctionalUnit> kept;
  for (const auto& unit : tree.units) {
    const bool handled = std::any_of(unit.inputs.begin(), unit.inputs.end(),
                                     [&](const ObjectNode& n) { return kitchen.carries_ingredient(n); }) ||
                         std::any_of(unit.outputs.begin(), unit.outputs.end(),
                                     [&](const ObjectNode& n) { return kitchen.carries_ingredient(n); });
    std::vector<Carried> inputs;
    auto add_input = [&](const Carried& c) {
      for (const auto& existing : inputs) {
        if (object_node_equals(existing.node, c.node)) return;
      }
      inputs.push_back(c);
    };
    for (const auto& in : unit.inputs) {
      auto s = strip(in);
      if (!s) continue;
      auto it = rewired.find(canonical_string(s->node));
      if (it == rewired.end()) {
        add_input(*s);
      } else {
        for (const auto& r : it->second) add_input(r);
      }
    }
    std::vector<ObjectNode> outputs;
    for (const auto& out : unit.outputs) {
      if (auto s = strip(out)) outputs.push_back(std::move(s->node));
    }
    const bool carries = std::any_of(inputs.begin(), inputs.end(), [](const Carried& c) { return c.carries; });
    const bool no_op = std::all_of(outputs.begin(), outputs.end(), [&](const ObjectNode& out) {
      return std::any_of(inputs.begin(), inputs.end(), [&](const Carried& c) { return object_node_equals(c.node, out); });
    });
    if (no_op) continue;
    if ((handled && !carries) || outputs.empty()) {
      for (const auto& out : outputs) {
        std::vector<Carried> standins;
        for (const auto& c : inputs) {
          if (c.node.name == out.name) standins.push_back(c);
        }
        if (standins.empty()) {
          for (const auto& c : inputs) {
            if (!kitchen.is_base_available(c.node)) standins.push_back(c);
          }
        }
        rewired[canonical_string(out)] = std::move(standins);
      }
      continue;
    }
    FunctionalUnit next;
    next.motion = unit.motion;
    for (auto& c : inputs) next.inputs.push_back(std::move(c.node));
    next.outputs = std::move(outputs);
    kept.push_back(std::move(next));
  }

  const auto goal = strip(tree.goal);
  bool reachable = false;
  if (goal) {
    for (const auto& unit : kept) {
      if (node_in(unit.outputs, goal->node)) reachable = true;
    }
  }
  if (!reachable) throw PlanningError("tree_modification", "goal unreachable after removal");
  tree.units = std::move(kept);
  tree.goal = goal->node;
  return tree;
}

std::vector<std::string> closure_violations(const TaskTree& tree, const PlanningRequest& request,
                                            const KitchenModel& kitchen) {
  const auto required = request.ingredient_names();
  const ObjectKey goal_key = key_of(tree.goal);
  std::vector<std::string> problems;
  std::set<std::string> present;
  std::set<std::string> extra;
  auto scan = [&](const ObjectNode& node, bool is_input) {
    for (const auto& name : kitchen.ingredient_names(node)) {
      if (name == node.name && key_of(node) == goal_key) continue;
      if (is_input) present.insert(name);
      if (!contains(required, name)) extra.insert(name);
    }
  };
  for (const auto& unit : tree.units) {
    for (const auto& n : unit.inputs) scan(n, true);
    for (const auto& n : unit.outputs) scan(n, false);
  }
  for (const auto& name : required) {
    if (!present.count(name)) problems.push_back("requested ingredient '" + name + "' is missing from the tree");
  }
  for (const auto& name : extra) problems.push_back("ingredient '" + name + "' was not requested");
  return problems;
}

TaskTree construct_final_task_tree(const PlanningContext& ctx, const PlanningRequest& request) {
  const auto names = request.ingredient_names();
  const auto rctx = ctx.retrieval();
  const auto selection = identify_goal_node(ctx.foon, ctx.table, ctx.similarity, ctx.kitchen, request);
  TaskTree tree = retrieve_reference_task_tree(rctx, selection.goal, names);

  std::optional<std::size_t> target;
  for (const auto& ingredient : request.ingredients) {
    const bool present = std::any_of(tree.units.begin(), tree.units.end(), [&](const FunctionalUnit& u) {
      return std::any_of(u.inputs.begin(), u.inputs.end(), [&](const ObjectNode& n) {
        return n.name == ingredient.name && has_state_label(n, ingredient.state);
      });
    });
    if (present) continue;

    TaskTree subtree;
    if (ctx.foon.has_ingredient(ingredient.name, ctx.kitchen)) {
      try {
        subtree = retrieve_subtree(rctx, ingredient, names);
      } catch (const MissingStateError&) {
        subtree = substitute_state(ctx, ingredient, names).subtree;
      }
    } else {
      subtree = substitute_object(ctx, ingredient, names).subtree;
    }
    if (!target) {
      auto it = std::find_if(tree.units.begin(), tree.units.end(),
                             [&](const FunctionalUnit& u) { return ctx.policy.accepts(u.motion.verb); });
      if (it == tree.units.end()) {
        throw PlanningError("tree_modification",
                            "no functional unit accepts additional ingredient '" + ingredient.name + "'");
      }
      target = static_cast<std::size_t>(it - tree.units.begin());
    }
    auto integrated = integrate_subtree(std::move(tree), subtree, ctx.policy, ctx.kitchen, target);
    tree = std::move(integrated.tree);
    target = integrated.accepting_index;
  }

  tree = remove_extraneous(std::move(tree), names, ctx.kitchen);

  auto problems = executability_violations(tree.units, ctx.kitchen);
  auto closure = closure_violations(tree, request, ctx.kitchen);
  problems.insert(problems.end(), closure.begin(), closure.end());
  if (!problems.empty()) {
    throw PlanningError("tree_modification", "internal: final tree is invalid: " + problems.front());
  }
  return tree;
}

}  // namespace foon
