#include "foon/progress.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "foon/error.hpp"

namespace foon {

namespace {

bool lists(const ObjectNode& node, const std::string& name) {
  return std::find(node.ingredients.begin(), node.ingredients.end(), name) != node.ingredients.end();
}

std::optional<std::string> place_of(const ObjectNode& node, const std::string& ingredient) {
  if (node.location) return node.location;
  if (node.name != ingredient) return node.name;
  return std::nullopt;
}

std::string join_states(const std::vector<StateLabel>& states) {
  std::string out;
  for (const auto& s : states) out += (out.empty() ? "" : ", ") + to_string(s);
  return out;
}

bool same_states(std::vector<StateLabel> a, std::vector<StateLabel> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b;
}

// Round a non-negative ratio num/den to hundredths, halves up.
double hundredths(long long num, long long den) {
  return static_cast<double>((2 * num * 100 + den) / (2 * den)) / 100.0;
}

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", v);
  return buf;
}

}  // namespace

std::vector<ProgressLine> derive_progress_lines(const TaskTree& tree, const PlanningRequest& request) {
  std::vector<ProgressLine> lines;
  for (const auto& ingredient : request.ingredients) {
    const auto& x = ingredient.name;
    ProgressLine line;
    line.ingredient = x;
    for (const auto& record : tree.provenance) {
      if (record.ingredient != x) continue;
      if (!line.substitution_confidence || record.kind == SubstitutionKind::object) {
        line.substitution_confidence = record.confidence;
      }
      if (record.kind == SubstitutionKind::object) break;
    }
    bool started = false;
    for (std::size_t i = 0; i < tree.units.size(); ++i) {
      const auto& unit = tree.units[i];
      const ObjectNode* in = nullptr;
      for (const auto& n : unit.inputs) {
        if (n.name == x) {
          in = &n;
          break;
        }
      }
      if (!in) {
        for (const auto& n : unit.inputs) {
          if (lists(n, x)) {
            in = &n;
            break;
          }
        }
      }
      if (!in || unit.outputs.empty()) continue;
      if (!started) {
        line.initial_states = in->states;
        started = true;
      }
      const ObjectNode* out = nullptr;
      for (const auto& n : unit.outputs) {
        if (n.name == x) {
          out = &n;
          break;
        }
      }
      if (!out) {
        for (const auto& n : unit.outputs) {
          if (lists(n, x)) {
            out = &n;
            break;
          }
        }
      }
      if (!out) out = &unit.outputs.front();
      line.steps.push_back({unit.motion.verb, out->states, place_of(*out, x), i});
    }
    if (!started) {
      throw ValidationError("progress_line", "ingredient '" + x + "' never appears in the task tree");
    }
    lines.push_back(std::move(line));
  }
  return lines;
}

std::string render_progress_text(const ProgressLine& line) {
  std::string out = line.ingredient;
  if (line.steps.empty()) {
    out += " (no transitions)";
  } else {
    out += ": " + join_states(line.initial_states);
    std::vector<StateLabel> prev_states = line.initial_states;
    std::optional<std::string> prev_location;
    for (const auto& step : line.steps) {
      std::string part = step.motion;
      if (!same_states(step.states, prev_states)) {
        std::vector<StateLabel> fresh;
        for (const auto& s : step.states) {
          if (std::find(prev_states.begin(), prev_states.end(), s) == prev_states.end()) fresh.push_back(s);
        }
        part += ", " + join_states(fresh.empty() ? step.states : fresh);
      }
      if (step.location && step.location != prev_location) part += ", " + *step.location;
      out += " → (" + part + ")";
      prev_states = step.states;
      prev_location = step.location;
    }
  }
  if (line.substitution_confidence) {
    char buf[48];
    std::snprintf(buf, sizeof buf, " [substituted %.1f%%]", *line.substitution_confidence);
    out += buf;
  }
  return out;
}

std::string render_progress_text(std::span<const ProgressLine> lines) {
  std::string out;
  for (const auto& line : lines) out += render_progress_text(line) + "\n";
  return out;
}

std::string serialize_progress(const ProgressDocument& doc) {
  Json j;
  j["recipe_id"] = doc.recipe_id;
  j["lines"] = Json::array();
  for (const auto& line : doc.lines) {
    Json l;
    l["ingredient"] = line.ingredient;
    if (line.substitution_confidence) {
      l["substituted"] = true;
      l["confidence"] = *line.substitution_confidence;
    }
    l["initial_states"] = Json::array();
    for (const auto& s : line.initial_states) l["initial_states"].push_back(to_json(s));
    l["steps"] = Json::array();
    for (const auto& step : line.steps) {
      Json s;
      s["motion"] = step.motion;
      s["states"] = Json::array();
      for (const auto& st : step.states) s["states"].push_back(to_json(st));
      if (step.location) s["location"] = *step.location;
      s["unit"] = step.unit;
      l["steps"].push_back(std::move(s));
    }
    j["lines"].push_back(std::move(l));
  }
  return dump_canonical(j);
}

ProgressDocument deserialize_progress(std::string_view text, Warnings* warnings) {
  const Json j = parse_json_text(text);
  if (!j.is_object()) throw ParseError("", "expected a progress document object");
  if (!j.contains("recipe_id") || !j.at("recipe_id").is_string()) throw ParseError("recipe_id", "expected a string");
  if (!j.contains("lines") || !j.at("lines").is_array()) throw ParseError("lines", "expected an array");
  for (const auto& item : j.items()) {
    if (warnings && item.key() != "recipe_id" && item.key() != "lines") {
      warnings->push_back("unknown field '" + item.key() + "' ignored");
    }
  }
  ProgressDocument doc;
  doc.recipe_id = j.at("recipe_id").get<std::string>();
  const auto& lines = j.at("lines");
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string path = "lines[" + std::to_string(i) + "]";
    const auto& l = lines[i];
    if (!l.is_object() || !l.contains("ingredient") || !l.at("ingredient").is_string()) {
      throw ParseError(path + ".ingredient", "expected a string");
    }
    ProgressLine line;
    line.ingredient = l.at("ingredient").get<std::string>();
    if (l.contains("confidence")) {
      if (!l.at("confidence").is_number()) throw ParseError(path + ".confidence", "expected a number");
      line.substitution_confidence = l.at("confidence").get<double>();
    }
    if (l.contains("initial_states")) line.initial_states = parse_states(l.at("initial_states"), path + ".initial_states");
    if (l.contains("steps")) {
      const auto& steps = l.at("steps");
      if (!steps.is_array()) throw ParseError(path + ".steps", "expected an array");
      for (std::size_t k = 0; k < steps.size(); ++k) {
        const std::string sp = path + ".steps[" + std::to_string(k) + "]";
        const auto& s = steps[k];
        if (!s.is_object() || !s.contains("motion") || !s.at("motion").is_string()) {
          throw ParseError(sp + ".motion", "expected a string");
        }
        ProgressStep step;
        step.motion = s.at("motion").get<std::string>();
        if (s.contains("states")) step.states = parse_states(s.at("states"), sp + ".states");
        if (s.contains("location")) {
          if (!s.at("location").is_string()) throw ParseError(sp + ".location", "expected a string");
          step.location = s.at("location").get<std::string>();
        }
        if (s.contains("unit")) {
          if (!s.at("unit").is_number_unsigned()) throw ParseError(sp + ".unit", "expected a unit index");
          step.unit = s.at("unit").get<std::size_t>();
        }
        line.steps.push_back(std::move(step));
      }
    }
    doc.lines.push_back(std::move(line));
  }
  return doc;
}

std::string serialize_annotations(const AnnotationSet& set) {
  Json j;
  j["recipe_id"] = set.recipe_id;
  j["scores"] = Json::object();
  for (const auto& [name, score] : set.scores) j["scores"][name] = score;
  return dump_canonical(j);
}

AnnotationSet deserialize_annotations(std::string_view text, Warnings* warnings) {
  const Json j = parse_json_text(text);
  if (!j.is_object()) throw ParseError("", "expected an annotation object");
  if (!j.contains("recipe_id") || !j.at("recipe_id").is_string()) throw ParseError("recipe_id", "expected a string");
  if (!j.contains("scores") || !j.at("scores").is_object()) throw ParseError("scores", "expected an object");
  for (const auto& item : j.items()) {
    if (warnings && item.key() != "recipe_id" && item.key() != "scores") {
      warnings->push_back("unknown field '" + item.key() + "' ignored");
    }
  }
  AnnotationSet set;
  set.recipe_id = j.at("recipe_id").get<std::string>();
  for (const auto& item : j.at("scores").items()) {
    const auto& v = item.value();
    if (!v.is_number_integer() || v.get<int>() < 0 || v.get<int>() > 2) {
      throw ParseError("scores." + item.key(), "score must be 0, 1 or 2");
    }
    set.scores[normalize_name(item.key())] = v.get<int>();
  }
  return set;
}

void validate_annotations(const AnnotationSet& set, std::span<const std::string> ingredients) {
  for (const auto& name : ingredients) {
    if (!set.scores.count(name)) {
      throw ValidationError("progress_line", "recipe '" + set.recipe_id + "': no score for '" + name + "'");
    }
  }
  for (const auto& [name, score] : set.scores) {
    if (std::find(ingredients.begin(), ingredients.end(), name) == ingredients.end()) {
      throw ValidationError("progress_line", "recipe '" + set.recipe_id + "': '" + name + "' was not requested");
    }
    if (score < 0 || score > 2) {
      throw ValidationError("progress_line", "recipe '" + set.recipe_id + "': score for '" + name +
                                                 "' must be 0, 1 or 2");
    }
  }
}

double correctness(std::span<const int> scores) {
  if (scores.empty()) throw ValidationError("progress_line", "no scores to evaluate");
  long long sum = 0;
  for (int s : scores) {
    if (s < 0 || s > 2) throw ValidationError("progress_line", "score must be 0, 1 or 2");
    sum += s;
  }
  return hundredths(sum * 100, 2 * static_cast<long long>(scores.size()));
}

double correctness(const AnnotationSet& set) {
  std::vector<int> scores;
  for (const auto& [name, score] : set.scores) scores.push_back(score);
  return correctness(scores);
}

std::vector<double> default_thresholds() {
  std::vector<double> t;
  for (int v = 0; v <= 100; v += 10) t.push_back(v);
  return t;
}

std::vector<ThresholdPoint> threshold_curve(std::span<const double> values, std::span<const double> thresholds) {
  if (values.empty()) throw ValidationError("progress_line", "no recipes to evaluate");
  std::vector<ThresholdPoint> curve;
  for (double t : thresholds) {
    const auto n = std::count_if(values.begin(), values.end(), [&](double v) { return v >= t; });
    curve.push_back({t, hundredths(static_cast<long long>(n) * 100, static_cast<long long>(values.size()))});
  }
  return curve;
}

Report build_report(std::span<const AnnotationSet> sets, std::span<const double> thresholds) {
  if (sets.empty()) throw ValidationError("progress_line", "no annotation sets");
  Report report;
  std::set<std::string> seen;
  long double mean = 0;
  std::vector<double> values;
  for (const auto& set : sets) {
    if (!seen.insert(set.recipe_id).second) {
      throw ValidationError("progress_line", "recipe '" + set.recipe_id + "' annotated twice");
    }
    ReportRow row;
    row.recipe_id = set.recipe_id;
    row.ingredients = set.scores.size();
    for (const auto& [name, score] : set.scores) row.total += score;
    row.correctness = correctness(set);
    mean += static_cast<long double>(row.total) / (2.0L * static_cast<long double>(row.ingredients));
    values.push_back(row.correctness);
    report.rows.push_back(row);
  }
  std::sort(report.rows.begin(), report.rows.end(),
            [](const ReportRow& a, const ReportRow& b) { return a.recipe_id < b.recipe_id; });
  mean = mean * 100.0L / static_cast<long double>(sets.size());
  report.mean_correctness = static_cast<double>(std::floor(mean * 100.0L + 0.5L) / 100.0L);
  report.curve = threshold_curve(values, thresholds);
  return report;
}

std::string render_report_table(const Report& report) {
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-16s %11s %7s %12s\n", "recipe", "ingredients", "score", "correctness");
  out << buf;
  for (const auto& row : report.rows) {
    const std::string score = std::to_string(row.total) + "/" + std::to_string(2 * row.ingredients);
    std::snprintf(buf, sizeof buf, "%-16s %11zu %7s %12s\n", row.recipe_id.c_str(), row.ingredients, score.c_str(),
                  percent(row.correctness).c_str());
    out << buf;
  }
  out << "\nmean correctness: " << percent(report.mean_correctness) << "\n\n";
  std::snprintf(buf, sizeof buf, "%-10s %10s\n", "threshold", "recipes");
  out << buf;
  for (const auto& p : report.curve) {
    std::snprintf(buf, sizeof buf, ">= %-7s %10s\n", percent(p.threshold).c_str(), percent(p.rate).c_str());
    out << buf;
  }
  return out.str();
}

Json report_to_json(const Report& report) {
  Json j;
  j["recipes"] = Json::array();
  for (const auto& row : report.rows) {
    j["recipes"].push_back(
        {{"recipe_id", row.recipe_id}, {"ingredients", row.ingredients}, {"total", row.total}, {"correctness", row.correctness}});
  }
  j["mean_correctness"] = report.mean_correctness;
  j["curve"] = Json::array();
  for (const auto& p : report.curve) j["curve"].push_back({{"threshold", p.threshold}, {"rate", p.rate}});
  return j;
}

}  // namespace foon
