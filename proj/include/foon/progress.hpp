#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "foon/document.hpp"
#include "foon/model.hpp"

namespace foon {

struct ProgressStep {
  std::string motion;
  std::vector<StateLabel> states;
  std::optional<std::string> location;
  std::size_t unit = 0;  // index into the task tree
};

/// States one ingredient passes through, in execution order.
struct ProgressLine {
  std::string ingredient;
  std::vector<StateLabel> initial_states;
  std::vector<ProgressStep> steps;
  std::optional<double> substitution_confidence;
};

/// One line per requested ingredient, in request order. Once an ingredient is
/// listed inside a composite the line follows that composite. Throws
/// ValidationError for an ingredient the tree never touches.
std::vector<ProgressLine> derive_progress_lines(const TaskTree& tree, const PlanningRequest& request);

/// "onion: whole → (pick-and-place, cutting board) → (slice, sliced)". A step shows
/// the states and location only where they changed.
std::string render_progress_text(const ProgressLine& line);
std::string render_progress_text(std::span<const ProgressLine> lines);

struct ProgressDocument {
  std::string recipe_id;
  std::vector<ProgressLine> lines;
};

std::string serialize_progress(const ProgressDocument& doc);
ProgressDocument deserialize_progress(std::string_view text, Warnings* warnings = nullptr);

/// Per-ingredient scores for one recipe: 0 incorrect, 1 partly correct, 2 correct.
struct AnnotationSet {
  std::string recipe_id;
  std::map<std::string, int> scores;
};

std::string serialize_annotations(const AnnotationSet& set);
AnnotationSet deserialize_annotations(std::string_view text, Warnings* warnings = nullptr);

/// Throws ValidationError unless `set` scores exactly `ingredients`, each in {0,1,2}.
void validate_annotations(const AnnotationSet& set, std::span<const std::string> ingredients);

/// Sum of scores over twice their count, as a percentage rounded to 2 decimals.
double correctness(std::span<const int> scores);
double correctness(const AnnotationSet& set);

struct ThresholdPoint {
  double threshold = 0.0;
  double rate = 0.0;  // percent of recipes at or above the threshold, 2 decimals
};

std::vector<double> default_thresholds();

std::vector<ThresholdPoint> threshold_curve(std::span<const double> values, std::span<const double> thresholds);

struct ReportRow {
  std::string recipe_id;
  std::size_t ingredients = 0;
  int total = 0;
  double correctness = 0.0;
};

struct Report {
  std::vector<ReportRow> rows;  // sorted by recipe id
  double mean_correctness = 0.0;
  std::vector<ThresholdPoint> curve;
};

Report build_report(std::span<const AnnotationSet> sets, std::span<const double> thresholds);
std::string render_report_table(const Report& report);
Json report_to_json(const Report& report);

}  // namespace foon
