#include "foon/document.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <random>
#include <sstream>

#include "foon/error.hpp"

namespace foon {

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file_atomic(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::random_device rd;
  auto tmp = path;
  tmp += ".tmp" + std::to_string(rd());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("io", "cannot write '" + tmp.string() + "'");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw Error("io", "short write to '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error("io", "cannot replace '" + path.string() + "': " + ec.message());
  }
}

Json parse_json_text(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    throw ParseError("line " + std::to_string(line), "malformed document");
  }
}

std::string dump_canonical(const Json& doc) { return doc.dump(2) + "\n"; }

namespace {

void check_fields(const Json& doc, const std::string& path, std::initializer_list<const char*> known,
                  Warnings* warnings) {
  if (!warnings) return;
  for (const auto& item : doc.items()) {
    const bool ok = std::any_of(known.begin(), known.end(),
                                [&](const char* k) { return item.key() == k; });
    if (!ok) {
      warnings->push_back((path.empty() ? "" : path + ": ") + "unknown field '" + item.key() +
                          "' ignored");
    }
  }
}

const Json& require(const Json& doc, const char* field, const std::string& path) {
  if (!doc.is_object()) throw ParseError(path, "expected an object");
  auto it = doc.find(field);
  if (it == doc.end()) throw ParseError(path.empty() ? field : path + "." + field, "missing field");
  return *it;
}

std::string get_string(const Json& doc, const char* field, const std::string& path) {
  const Json& v = require(doc, field, path);
  if (!v.is_string()) throw ParseError(path.empty() ? field : path + "." + field, "expected a string");
  return v.get<std::string>();
}

std::optional<std::string> get_optional_string(const Json& doc, const char* field, const std::string& path) {
  auto it = doc.find(field);
  if (it == doc.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw ParseError(path.empty() ? field : path + "." + field, "expected a string");
  return it->get<std::string>();
}

std::vector<std::string> get_string_list(const Json& doc, const char* field, const std::string& path) {
  std::vector<std::string> out;
  auto it = doc.find(field);
  if (it == doc.end()) return out;
  const std::string where = path.empty() ? field : path + "." + field;
  if (!it->is_array()) throw ParseError(where, "expected an array");
  for (std::size_t i = 0; i < it->size(); ++i) {
    if (!(*it)[i].is_string()) throw ParseError(where + "[" + std::to_string(i) + "]", "expected a string");
    out.push_back((*it)[i].get<std::string>());
  }
  return out;
}

template <typename Fn>
auto rethrow_as_parse(const std::string& path, Fn&& fn) {
  try {
    return fn();
  } catch (const ValidationError& e) {
    throw ParseError(path, e.what());
  }
}

}  // namespace

std::vector<StateLabel> parse_states(const Json& states, const std::string& path) {
  if (!states.is_array()) throw ParseError(path, "expected an array");
  std::vector<StateLabel> out;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto& s = states[i];
    const std::string where = path + "[" + std::to_string(i) + "]";
    if (s.is_string()) {
      out.push_back({s.get<std::string>(), std::nullopt});
    } else if (s.is_object()) {
      out.push_back({get_string(s, "label", where), get_optional_string(s, "argument", where)});
    } else {
      throw ParseError(where, "expected a label string or {label, argument}");
    }
  }
  return out;
}

Json to_json(const StateLabel& state) {
  Json j;
  j["label"] = state.label;
  if (state.argument) j["argument"] = *state.argument;
  return j;
}

Json to_json(const ObjectNode& node) {
  Json j;
  j["name"] = node.name;
  j["states"] = Json::array();
  for (const auto& s : node.states) j["states"].push_back(to_json(s));
  j["ingredients"] = node.ingredients;
  if (node.location) j["location"] = *node.location;
  return j;
}

Json to_json(const FunctionalUnit& unit) {
  Json j;
  j["inputs"] = Json::array();
  for (const auto& n : unit.inputs) j["inputs"].push_back(to_json(n));
  Json motion;
  motion["verb"] = unit.motion.verb;
  if (unit.motion.weight) motion["weight"] = *unit.motion.weight;
  j["motion"] = motion;
  j["outputs"] = Json::array();
  for (const auto& n : unit.outputs) j["outputs"].push_back(to_json(n));
  return j;
}

Json to_json(const SubstitutionRecord& record) {
  Json j;
  j["kind"] = to_string(record.kind);
  j["original"] = record.original;
  j["replacement"] = record.replacement;
  j["confidence"] = record.confidence;
  if (!record.ingredient.empty()) j["ingredient"] = record.ingredient;
  if (!record.note.empty()) j["note"] = record.note;
  return j;
}

Json to_json(const PlanningRequest& request) {
  Json j;
  if (!request.id.empty()) j["id"] = request.id;
  j["dish_type"] = request.dish_type;
  j["ingredients"] = Json::array();
  for (const auto& ing : request.ingredients) {
    j["ingredients"].push_back(Json{{"name", ing.name}, {"state", ing.state}});
  }
  return j;
}

ObjectNode object_from_json(const Json& doc, const std::string& path, Warnings* warnings) {
  if (!doc.is_object()) throw ParseError(path, "expected an object");
  check_fields(doc, path, {"name", "states", "ingredients", "location"}, warnings);
  ObjectNode node;
  node.name = get_string(doc, "name", path);
  if (doc.contains("states")) node.states = parse_states(doc.at("states"), path + ".states");
  node.ingredients = get_string_list(doc, "ingredients", path);
  node.location = get_optional_string(doc, "location", path);
  rethrow_as_parse(path, [&] {
    normalize_and_validate(node);
    return 0;
  });
  return node;
}

FunctionalUnit unit_from_json(const Json& doc, const std::string& path, Warnings* warnings) {
  if (!doc.is_object()) throw ParseError(path, "expected an object");
  check_fields(doc, path, {"inputs", "motion", "outputs"}, warnings);
  FunctionalUnit unit;
  const Json& motion = require(doc, "motion", path);
  check_fields(motion, path + ".motion", {"verb", "weight"}, warnings);
  unit.motion.verb = get_string(motion, "verb", path + ".motion");
  if (auto it = motion.find("weight"); it != motion.end() && !it->is_null()) {
    if (!it->is_number()) throw ParseError(path + ".motion.weight", "expected a number");
    unit.motion.weight = it->get<double>();
  }
  for (const char* side : {"inputs", "outputs"}) {
    const Json& nodes = require(doc, side, path);
    const std::string where = path + "." + side;
    if (!nodes.is_array()) throw ParseError(where, "expected an array");
    auto& target = std::string_view(side) == "inputs" ? unit.inputs : unit.outputs;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      target.push_back(object_from_json(nodes[i], where + "[" + std::to_string(i) + "]", warnings));
    }
  }
  if (unit.motion.weight && !(*unit.motion.weight >= 0.0 && *unit.motion.weight <= 1.0)) {
    throw ParseError(path + ".motion.weight", "weight must lie in [0,1]");
  }
  rethrow_as_parse(path, [&] {
    normalize_and_validate(unit);
    return 0;
  });
  return unit;
}

std::vector<FunctionalUnit> units_from_json(const Json& doc, const std::string& path, Warnings* warnings) {
  if (!doc.is_array()) throw ParseError(path, "expected an array");
  std::vector<FunctionalUnit> units;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    units.push_back(unit_from_json(doc[i], path + "[" + std::to_string(i) + "]", warnings));
  }
  return units;
}

SubstitutionRecord substitution_from_json(const Json& doc, const std::string& path, Warnings* warnings) {
  if (!doc.is_object()) throw ParseError(path, "expected an object");
  check_fields(doc, path, {"kind", "original", "replacement", "confidence", "ingredient", "note"}, warnings);
  SubstitutionRecord r;
  const std::string kind = get_string(doc, "kind", path);
  if (kind == "object") {
    r.kind = SubstitutionKind::object;
  } else if (kind == "state") {
    r.kind = SubstitutionKind::state;
  } else {
    throw ParseError(path + ".kind", "expected 'object' or 'state'");
  }
  r.original = get_string(doc, "original", path);
  r.replacement = get_string(doc, "replacement", path);
  const Json& conf = require(doc, "confidence", path);
  if (!conf.is_number()) throw ParseError(path + ".confidence", "expected a number");
  r.confidence = conf.get<double>();
  r.ingredient = get_optional_string(doc, "ingredient", path).value_or("");
  r.note = get_optional_string(doc, "note", path).value_or("");
  return r;
}

PlanningRequest request_from_json(const Json& doc, const std::string& path, Warnings* warnings) {
  if (!doc.is_object()) throw ParseError(path, "expected an object");
  check_fields(doc, path, {"id", "dish_type", "ingredients"}, warnings);
  PlanningRequest request;
  request.id = get_optional_string(doc, "id", path).value_or("");
  request.dish_type = get_string(doc, "dish_type", path);
  const Json& list = require(doc, "ingredients", path);
  const std::string where = path.empty() ? "ingredients" : path + ".ingredients";
  if (!list.is_array()) throw ParseError(where, "expected an array");
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string item = where + "[" + std::to_string(i) + "]";
    check_fields(list[i], item, {"name", "state"}, warnings);
    request.ingredients.push_back({get_string(list[i], "name", item), get_string(list[i], "state", item)});
  }
  rethrow_as_parse(path, [&] {
    normalize_and_validate(request);
    return 0;
  });
  return request;
}

std::string serialize_subgraph(const Subgraph& subgraph) {
  Json j;
  j["id"] = subgraph.id;
  if (subgraph.dish_class) j["dish_class"] = *subgraph.dish_class;
  if (subgraph.goal) j["goal"] = to_json(*subgraph.goal);
  j["units"] = Json::array();
  for (const auto& u : subgraph.units) j["units"].push_back(to_json(u));
  return dump_canonical(j);
}

Subgraph subgraph_from_json(const Json& doc, Warnings* warnings) {
  if (!doc.is_object()) throw ParseError("", "expected a subgraph object");
  check_fields(doc, "", {"id", "dish_class", "goal", "units"}, warnings);
  Subgraph sg;
  sg.id = get_string(doc, "id", "");
  sg.dish_class = get_optional_string(doc, "dish_class", "");
  if (auto it = doc.find("goal"); it != doc.end() && !it->is_null()) {
    sg.goal = object_from_json(*it, "goal", warnings);
  }
  sg.units = units_from_json(require(doc, "units", ""), "units", warnings);
  rethrow_as_parse("units", [&] {
    normalize_and_validate(sg);
    return 0;
  });
  return sg;
}

Subgraph deserialize_subgraph(std::string_view text, Warnings* warnings) {
  return subgraph_from_json(parse_json_text(text), warnings);
}

std::string serialize_tree(const TreeDocument& doc) {
  Json j;
  if (!doc.recipe_id.empty()) j["recipe_id"] = doc.recipe_id;
  if (doc.request) j["request"] = to_json(*doc.request);
  j["goal"] = to_json(doc.tree.goal);
  j["units"] = Json::array();
  for (const auto& u : doc.tree.units) j["units"].push_back(to_json(u));
  j["provenance"] = Json::array();
  for (const auto& r : doc.tree.provenance) j["provenance"].push_back(to_json(r));
  return dump_canonical(j);
}

TreeDocument deserialize_tree(std::string_view text, Warnings* warnings) {
  const Json j = parse_json_text(text);
  if (!j.is_object()) throw ParseError("", "expected a task tree object");
  check_fields(j, "", {"recipe_id", "request", "goal", "units", "provenance"}, warnings);
  TreeDocument doc;
  doc.recipe_id = get_optional_string(j, "recipe_id", "").value_or("");
  if (auto it = j.find("request"); it != j.end() && !it->is_null()) {
    doc.request = request_from_json(*it, "request", warnings);
  }
  doc.tree.goal = object_from_json(require(j, "goal", ""), "goal", warnings);
  doc.tree.units = units_from_json(require(j, "units", ""), "units", warnings);
  if (auto it = j.find("provenance"); it != j.end()) {
    if (!it->is_array()) throw ParseError("provenance", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      doc.tree.provenance.push_back(
          substitution_from_json((*it)[i], "provenance[" + std::to_string(i) + "]", warnings));
    }
  }
  return doc;
}

PlanningRequest deserialize_request(std::string_view text, Warnings* warnings) {
  return request_from_json(parse_json_text(text), "", warnings);
}

namespace {

std::vector<std::string> split_tabs(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    fields.emplace_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return fields;
}

std::vector<std::string> split_list(std::string_view body) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= body.size()) {
    const auto comma = body.find(',', start);
    auto item = normalize_name(body.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                                  : comma - start));
    if (!item.empty() && std::find(out.begin(), out.end(), item) == out.end()) out.push_back(item);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

Subgraph import_legacy_foon(std::string_view text, const std::string& id) {
  Subgraph sg;
  sg.id = id;
  FunctionalUnit current;
  bool seen_motion = false;
  ObjectNode* last_object = nullptr;
  std::size_t line_no = 0;

  auto fail = [&](const std::string& msg) { throw ParseError("line " + std::to_string(line_no), msg); };
  auto finish_unit = [&] {
    if (current.inputs.empty() && current.outputs.empty() && !seen_motion) return;
    if (!seen_motion) fail("functional unit without a motion line");
    try {
      normalize_and_validate(current);
    } catch (const ValidationError& e) {
      fail(e.what());
    }
    sg.units.push_back(std::move(current));
    current = FunctionalUnit{};
    seen_motion = false;
    last_object = nullptr;
  };

  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    if (line.substr(0, 2) == "//") {
      finish_unit();
      continue;
    }
    const auto fields = split_tabs(line);
    const std::string& tag = fields[0];
    if (tag == "O") {
      if (fields.size() < 3) fail("object line needs id and name");
      ObjectNode node;
      node.name = fields[2];
      auto& side = seen_motion ? current.outputs : current.inputs;
      side.push_back(std::move(node));
      last_object = &side.back();
    } else if (tag == "S") {
      if (!last_object) fail("state line without a preceding object line");
      if (fields.size() < 3) fail("state line needs id and label");
      StateLabel state{fields[2], std::nullopt};
      std::string arg = fields.size() > 3 ? fields[3] : "";
      if (arg.size() >= 2 && arg.front() == '{' && arg.back() == '}') {
        for (auto& ing : split_list(std::string_view(arg).substr(1, arg.size() - 2))) {
          if (std::find(last_object->ingredients.begin(), last_object->ingredients.end(), ing) ==
              last_object->ingredients.end()) {
            last_object->ingredients.push_back(ing);
          }
        }
      } else if (arg.size() >= 2 && arg.front() == '[' && arg.back() == ']') {
        const auto inner = arg.substr(1, arg.size() - 2);
        const auto label = normalize_name(state.label);
        if (label == "in" || label == "on") {
          last_object->location = inner;
          continue;
        }
        state.argument = inner;
      } else if (!arg.empty()) {
        state.argument = arg;
      }
      const auto normalized = normalize_name(state.label);
      const bool dup = std::any_of(last_object->states.begin(), last_object->states.end(), [&](const StateLabel& s) {
        return normalize_name(s.label) == normalized && s.argument == state.argument;
      });
      if (!dup) last_object->states.push_back(std::move(state));
    } else if (tag == "M") {
      if (seen_motion) fail("second motion line in one functional unit");
      if (fields.size() < 3) fail("motion line needs id and verb");
      current.motion.verb = fields[2];
      seen_motion = true;
      last_object = nullptr;
    } else {
      fail("unknown record type '" + tag + "'");
    }
  }
  finish_unit();
  try {
    normalize_and_validate(sg);
  } catch (const ValidationError& e) {
    throw ParseError("", e.what());
  }
  return sg;
}

}  // namespace foon
