#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "foon/model.hpp"
#include "json.hpp"

namespace foon {

using Json = nlohmann::ordered_json;

/// Collected non-fatal diagnostics (unknown fields and the like).
using Warnings = std::vector<std::string>;

std::string read_text_file(const std::filesystem::path& path);

/// Write through a sibling temp file and rename, so readers never see a partial file.
void write_text_file_atomic(const std::filesystem::path& path, std::string_view text);

/// Parse JSON text; syntax errors become ParseError("line N", ...).
Json parse_json_text(std::string_view text);

/// Pretty-printed canonical text with a trailing newline.
std::string dump_canonical(const Json& doc);

std::vector<StateLabel> parse_states(const Json& states, const std::string& path);

Json to_json(const StateLabel& state);
Json to_json(const ObjectNode& node);
Json to_json(const FunctionalUnit& unit);
Json to_json(const SubstitutionRecord& record);
Json to_json(const PlanningRequest& request);

ObjectNode object_from_json(const Json& doc, const std::string& path, Warnings* warnings = nullptr);
FunctionalUnit unit_from_json(const Json& doc, const std::string& path, Warnings* warnings = nullptr);
std::vector<FunctionalUnit> units_from_json(const Json& doc, const std::string& path,
                                            Warnings* warnings = nullptr);
SubstitutionRecord substitution_from_json(const Json& doc, const std::string& path,
                                          Warnings* warnings = nullptr);
PlanningRequest request_from_json(const Json& doc, const std::string& path, Warnings* warnings = nullptr);

std::string serialize_subgraph(const Subgraph& subgraph);
Subgraph deserialize_subgraph(std::string_view text, Warnings* warnings = nullptr);
Subgraph subgraph_from_json(const Json& doc, Warnings* warnings = nullptr);

/// A planned tree plus the request that produced it.
struct TreeDocument {
  std::string recipe_id;
  std::optional<PlanningRequest> request;
  TaskTree tree;
};

std::string serialize_tree(const TreeDocument& doc);
TreeDocument deserialize_tree(std::string_view text, Warnings* warnings = nullptr);

PlanningRequest deserialize_request(std::string_view text, Warnings* warnings = nullptr);

/// Import a subgraph in the line-oriented FOON release format:
///   O<TAB>id<TAB>name<TAB>flag    object; inputs precede the M line, outputs follow
///   S<TAB>id<TAB>label[<TAB>[location] | {a,b}]
///   M<TAB>id<TAB>verb[<TAB>...]
///   //                            ends a functional unit
/// "in"/"on" states with a bracketed argument become the object's location;
/// braced lists become the ingredient list.
Subgraph import_legacy_foon(std::string_view text, const std::string& id);

}  // namespace foon
