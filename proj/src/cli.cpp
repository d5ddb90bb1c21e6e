#include "foon/cli.hpp"

#include <algorithm>
#include <iostream>
#include <regex>
#include <set>
#include <sstream>

#include "foon/error.hpp"

namespace foon {

IntegrationPolicy default_integration_policy() {
  return IntegrationPolicy{{"add", "mix", "pour", "sprinkle", "stir"}};
}

Workspace Workspace::load(const CliConfig& config) {
  if (config.foon_paths.empty()) throw ValidationError("cli", "no FOON documents given");
  if (config.similarity_threshold < -1.0 || config.similarity_threshold > 1.0) {
    throw ValidationError("cli", "similarity threshold must lie in [-1, 1]");
  }
  if (config.budget.max_paths == 0 || config.budget.max_depth == 0) {
    throw ValidationError("cli", "search budgets must be positive");
  }
  Workspace ws;
  const DishClassConfig classes = config.dish_classes ? DishClassConfig::load(*config.dish_classes) : DishClassConfig{};
  ws.foon = load_foon(config.foon_paths, classes, &ws.warnings);
  if (config.embeddings) ws.table = EmbeddingTable::load(*config.embeddings);
  if (config.kitchen) ws.kitchen = KitchenModel::load(*config.kitchen);
  if (config.state_classes) ws.state_classes = StateClassConfig::load(*config.state_classes);
  ws.policy = config.integration_policy ? IntegrationPolicy::load(*config.integration_policy)
                                        : default_integration_policy();
  ws.verb_stats = MotionVerbStats::build(ws.foon);
  ws.similarity.threshold = config.similarity_threshold;
  ws.budget = config.budget;
  ws.cache = config.cache_dir ? std::make_unique<ReferenceTreeCache>(*config.cache_dir)
                              : std::make_unique<ReferenceTreeCache>();
  return ws;
}

PlanningContext Workspace::context() const {
  return {foon, table, similarity, kitchen, budget, state_classes, verb_stats, policy, cache.get()};
}

std::string cmd_merge(std::span<const std::filesystem::path> inputs, const DishClassConfig& classes,
                      Warnings* warnings) {
  if (inputs.empty()) throw ValidationError("cli", "nothing to merge");
  return serialize_universal(load_foon(inputs, classes, warnings));
}

PlanResult cmd_plan(const Workspace& workspace, const PlanningRequest& request) {
  if (request.id.empty()) throw ValidationError("cli", "request has no id");
  PlanResult result;
  result.tree = {request.id, request, construct_final_task_tree(workspace.context(), request)};
  result.progress = cmd_progress(result.tree);
  return result;
}

ProgressDocument cmd_progress(const TreeDocument& tree) {
  if (!tree.request) throw ValidationError("cli", "tree document '" + tree.recipe_id + "' carries no request");
  return {tree.recipe_id, derive_progress_lines(tree.tree, *tree.request)};
}

namespace {

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

std::string node_label(const ObjectNode& node) {
  std::string label = node.name;
  std::string states;
  for (const auto& s : node.states) states += (states.empty() ? "" : ", ") + to_string(s);
  if (!states.empty()) label += "\\n" + states;
  if (!node.ingredients.empty()) {
    std::string list;
    for (const auto& i : node.ingredients) list += (list.empty() ? "" : ", ") + i;
    label += "\\n{" + list + "}";
  }
  if (node.location) label += "\\n@ " + *node.location;
  return label;
}

bool substituted(const ObjectNode& node, const std::vector<SubstitutionRecord>& provenance) {
  for (const auto& r : provenance) {
    if (r.kind == SubstitutionKind::object && node.name == r.replacement) return true;
    if (r.kind == SubstitutionKind::state && node.name == r.ingredient && has_state_label(node, r.replacement)) {
      return true;
    }
  }
  return false;
}

}  // namespace

std::string cmd_render(const TaskTree& tree) {
  std::set<std::string> produced;
  for (const auto& unit : tree.units) {
    for (const auto& out : unit.outputs) produced.insert(canonical_string(out));
  }
  std::map<std::string, std::string> ids;
  std::ostringstream nodes;
  std::ostringstream edges;
  auto object_id = [&](const ObjectNode& node) {
    const std::string key = canonical_string(node);
    auto it = ids.find(key);
    if (it != ids.end()) return it->second;
    const std::string id = "o" + std::to_string(ids.size());
    ids.emplace(key, id);
    std::string fill = "#fff2a8";  // intermediate
    std::string font = "black";
    if (object_node_equals(node, tree.goal)) {
      fill = "#1f3a93";
      font = "white";
    } else if (!produced.count(key)) {
      fill = "#8fd18f";
    }
    std::string style = substituted(node, tree.provenance) ? "\"filled,dashed\"" : "filled";
    nodes << "  " << id << " [label=\"" << dot_escape(node_label(node)) << "\", shape=ellipse, style=" << style
          << ", fillcolor=\"" << fill << "\", fontcolor=" << font << "];\n";
    return id;
  };
  for (std::size_t i = 0; i < tree.units.size(); ++i) {
    const auto& unit = tree.units[i];
    const std::string mid = "m" + std::to_string(i);
    for (const auto& in : unit.inputs) edges << "  " << object_id(in) << " -> " << mid << ";\n";
    nodes << "  " << mid << " [label=\"" << dot_escape(unit.motion.verb)
          << "\", shape=box, style=filled, fillcolor=\"#e06666\"];\n";
    for (const auto& out : unit.outputs) edges << "  " << mid << " -> " << object_id(out) << ";\n";
  }
  std::ostringstream out;
  out << "digraph task_tree {\n  rankdir=TB;\n  node [fontname=\"Helvetica\"];\n" << nodes.str() << edges.str()
      << "}\n";
  return out.str();
}

ReportOutput cmd_report(std::span<const AnnotationSet> annotations, std::span<const ProgressDocument> progress,
                        std::span<const double> thresholds) {
  for (std::size_t i = 1; i < thresholds.size(); ++i) {
    if (thresholds[i] < thresholds[i - 1]) throw ValidationError("cli", "thresholds must be sorted ascending");
  }
  for (const auto& set : annotations) {
    auto it = std::find_if(progress.begin(), progress.end(),
                           [&](const ProgressDocument& p) { return p.recipe_id == set.recipe_id; });
    if (it == progress.end()) continue;
    std::vector<std::string> names;
    for (const auto& line : it->lines) names.push_back(line.ingredient);
    validate_annotations(set, names);
  }
  const Report report = build_report(annotations, thresholds);
  return {render_report_table(report), report_to_json(report)};
}

}  // namespace foon
