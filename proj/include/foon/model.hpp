#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace foon {

/// Lowercase, trim, and collapse internal whitespace to single spaces.
std::string normalize_name(std::string_view raw);

struct StateLabel {
  std::string label;
  std::optional<std::string> argument;

  friend auto operator<=>(const StateLabel&, const StateLabel&) = default;
  friend bool operator==(const StateLabel&, const StateLabel&) = default;
};

/// One side of the bipartite graph. `states` and `ingredients` are ordered sets:
/// insertion order is kept for display, comparisons ignore it.
struct ObjectNode {
  std::string name;
  std::vector<StateLabel> states;
  std::vector<std::string> ingredients;
  std::optional<std::string> location;
};

struct MotionNode {
  std::string verb;
  std::optional<double> weight;
};

struct FunctionalUnit {
  std::vector<ObjectNode> inputs;
  MotionNode motion;
  std::vector<ObjectNode> outputs;
};

struct Subgraph {
  std::string id;
  std::optional<std::string> dish_class;
  std::vector<FunctionalUnit> units;
  std::optional<ObjectNode> goal;
};

enum class SubstitutionKind { object, state };

struct SubstitutionRecord {
  SubstitutionKind kind = SubstitutionKind::object;
  std::string original;     // label taken from existing knowledge
  std::string replacement;  // requested label written into the tree
  double confidence = 0.0;  // 100 * cosine(original, replacement)
  std::string ingredient;   // requested ingredient the record belongs to
  std::string note;

  friend bool operator==(const SubstitutionRecord&, const SubstitutionRecord&) = default;
};

struct TaskTree {
  std::vector<FunctionalUnit> units;
  ObjectNode goal;
  std::vector<SubstitutionRecord> provenance;
};

struct RequestedIngredient {
  std::string name;
  std::string state;

  friend bool operator==(const RequestedIngredient&, const RequestedIngredient&) = default;
};

struct PlanningRequest {
  std::string id;
  std::vector<RequestedIngredient> ingredients;
  std::string dish_type;

  std::vector<std::string> ingredient_names() const;
};

/// Identity used by retrieval: name, state set and ingredient set; location is
/// ignored. States and ingredients are held sorted.
struct ObjectKey {
  std::string name;
  std::vector<StateLabel> states;
  std::vector<std::string> ingredients;

  friend auto operator<=>(const ObjectKey&, const ObjectKey&) = default;
  friend bool operator==(const ObjectKey&, const ObjectKey&) = default;
};

ObjectKey key_of(const ObjectNode& node);
ObjectKey make_key(std::string_view name, std::vector<std::string> state_labels);

bool object_node_equals(const ObjectNode& a, const ObjectNode& b);
bool functional_unit_equals(const FunctionalUnit& a, const FunctionalUnit& b);
bool task_tree_equals(const TaskTree& a, const TaskTree& b);

/// Order-insensitive canonical form; equal strings iff object_node_equals.
std::string canonical_string(const ObjectNode& node);
/// Canonical form of a unit (verb plus sorted node multisets); equal strings iff
/// functional_unit_equals.
std::string canonical_string(const FunctionalUnit& unit);

bool has_state_label(const ObjectNode& node, std::string_view label);
std::vector<std::string> state_labels(const ObjectNode& node);

std::string to_string(const StateLabel& state);
std::string to_string(const ObjectNode& node);
std::string to_string(const ObjectKey& key);
std::string to_string(SubstitutionKind kind);

/// Normalize every label in place and check the type invariants.
/// Throws ValidationError naming the offending field.
void normalize_and_validate(ObjectNode& node);
void normalize_and_validate(FunctionalUnit& unit);
void normalize_and_validate(Subgraph& subgraph);
void normalize_and_validate(PlanningRequest& request);

ObjectNode make_object(std::string_view name, std::vector<std::string> state_labels = {},
                       std::vector<std::string> ingredients = {},
                       std::optional<std::string> location = std::nullopt);

}  // namespace foon
