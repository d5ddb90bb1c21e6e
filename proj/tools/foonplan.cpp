// foonplan: merge FOON subgraphs, plan task trees and score progress lines.

#include <CLI11.hpp>

#include <iostream>

#include "foon/cli.hpp"
#include "foon/error.hpp"

namespace {

using foon::CliConfig;
using std::filesystem::path;

void write_or_print(const std::optional<path>& out, const std::string& text) {
  if (out) {
    foon::write_text_file_atomic(*out, text);
  } else {
    std::cout << text;
  }
}

void add_planning_options(CLI::App& cmd, CliConfig& cfg) {
  cmd.add_option("--foon", cfg.foon_paths, "FOON documents (subgraph, universal or legacy text)")
      ->required()
      ->check(CLI::ExistingFile)
      ->envname("FOONPLAN_FOON");
  cmd.add_option("--embeddings", cfg.embeddings, "Word vectors: 'count dim' header, then 'token v1 ... vd'")
      ->check(CLI::ExistingFile)
      ->envname("FOONPLAN_EMBEDDINGS");
  cmd.add_option("--dish-classes", cfg.dish_classes, "Dish class file")
      ->check(CLI::ExistingFile)
      ->envname("FOONPLAN_DISH_CLASSES");
  cmd.add_option("--state-classes", cfg.state_classes, "State class file")
      ->check(CLI::ExistingFile)
      ->envname("FOONPLAN_STATE_CLASSES");
  cmd.add_option("--kitchen", cfg.kitchen, "Kitchen model file")
      ->check(CLI::ExistingFile)
      ->envname("FOONPLAN_KITCHEN");
  cmd.add_option("--integration-policy", cfg.integration_policy, "Accepting verbs file")
      ->check(CLI::ExistingFile)
      ->envname("FOONPLAN_INTEGRATION_POLICY");
  cmd.add_option("--similarity-threshold", cfg.similarity_threshold, "Cosine above which two names match")
      ->capture_default_str()
      ->envname("FOONPLAN_SIMILARITY_THRESHOLD");
  cmd.add_option("--max-paths", cfg.budget.max_paths, "Partial plans explored per retrieval")
      ->capture_default_str()
      ->envname("FOONPLAN_MAX_PATHS");
  cmd.add_option("--max-depth", cfg.budget.max_depth, "Search levels per retrieval")
      ->capture_default_str()
      ->envname("FOONPLAN_MAX_DEPTH");
  cmd.add_option("--cache-dir", cfg.cache_dir, "Directory for cached reference trees")->envname("FOONPLAN_CACHE_DIR");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Plan cooking task trees over a functional object-oriented network"};
  app.require_subcommand(1);

  std::vector<path> merge_inputs;
  std::optional<path> dish_classes;
  std::optional<path> merge_out;
  auto* merge = app.add_subcommand("merge", "Merge FOON documents into one universal FOON");
  merge->add_option("inputs", merge_inputs, "Documents to merge")->required()->check(CLI::ExistingFile);
  merge->add_option("--dish-classes", dish_classes, "Dish class file")
      ->check(CLI::ExistingFile)
      ->envname("FOONPLAN_DISH_CLASSES");
  merge->add_option("-o,--output", merge_out, "Write here instead of stdout");

  CliConfig plan_cfg;
  path request_path;
  auto* plan = app.add_subcommand("plan", "Build the task tree for a request");
  add_planning_options(*plan, plan_cfg);
  plan->add_option("request", request_path, "Request document")->required()->check(CLI::ExistingFile);
  plan->add_option("--output-dir", plan_cfg.output_dir, "Write <id>.tree.json and <id>.progress.json here")
      ->envname("FOONPLAN_OUTPUT_DIR");

  path tree_path;
  std::optional<path> progress_out;
  auto* progress = app.add_subcommand("progress", "Derive progress lines from a task tree document");
  progress->add_option("tree", tree_path, "Task tree document")->required()->check(CLI::ExistingFile);
  progress->add_option("-o,--output", progress_out, "Write the progress document here");

  path render_tree;
  std::optional<path> render_out;
  auto* render = app.add_subcommand("render", "Graphviz description of a task tree");
  render->add_option("tree", render_tree, "Task tree document")->required()->check(CLI::ExistingFile);
  render->add_option("-o,--output", render_out, "Write here instead of stdout");

  std::vector<path> annotation_paths;
  std::vector<path> progress_paths;
  std::vector<double> thresholds = foon::default_thresholds();
  std::optional<path> report_json;
  auto* report = app.add_subcommand("report", "Correctness table over annotation files");
  report->add_option("annotations", annotation_paths, "Annotation documents")->required()->check(CLI::ExistingFile);
  report->add_option("--progress", progress_paths, "Progress documents giving each recipe's ingredients")
      ->check(CLI::ExistingFile);
  report->add_option("--thresholds", thresholds, "Correctness thresholds in percent, ascending")
      ->capture_default_str();
  report->add_option("--json", report_json, "Also write the report as JSON here");

  path results_dir;
  std::string host = "127.0.0.1";
  int port = 8080;
  auto* serve = app.add_subcommand("serve", "HTTP endpoint for reviewing and annotating plans");
  serve->add_option("results", results_dir, "Directory of plan outputs")
      ->required()
      ->check(CLI::ExistingDirectory)
      ->envname("FOONPLAN_RESULTS_DIR");
  serve->add_option("--host", host, "Address to bind")->capture_default_str()->envname("FOONPLAN_HOST");
  serve->add_option("--port", port, "Port to bind")->capture_default_str()->envname("FOONPLAN_PORT");

  CLI11_PARSE(app, argc, argv);

  try {
    foon::Warnings warnings;
    if (*merge) {
      const auto classes = dish_classes ? foon::DishClassConfig::load(*dish_classes) : foon::DishClassConfig{};
      const auto text = foon::cmd_merge(merge_inputs, classes, &warnings);
      for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
      write_or_print(merge_out, text);
    } else if (*plan) {
      const auto ws = foon::Workspace::load(plan_cfg);
      for (const auto& w : ws.warnings) std::cerr << "warning: " << w << "\n";
      auto request = foon::deserialize_request(foon::read_text_file(request_path), &warnings);
      for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
      if (request.id.empty()) request.id = request_path.stem().string();
      const auto result = foon::cmd_plan(ws, request);
      const auto tree_text = foon::serialize_tree(result.tree);
      const auto progress_text = foon::serialize_progress(result.progress);
      if (plan_cfg.output_dir) {
        std::filesystem::create_directories(*plan_cfg.output_dir);
        foon::write_text_file_atomic(*plan_cfg.output_dir / (request.id + ".tree.json"), tree_text);
        foon::write_text_file_atomic(*plan_cfg.output_dir / (request.id + ".progress.json"), progress_text);
        std::cout << foon::render_progress_text(result.progress.lines);
      } else {
        std::cout << tree_text;
      }
    } else if (*progress) {
      const auto doc = foon::cmd_progress(foon::deserialize_tree(foon::read_text_file(tree_path), &warnings));
      for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
      if (progress_out) foon::write_text_file_atomic(*progress_out, foon::serialize_progress(doc));
      std::cout << foon::render_progress_text(doc.lines);
    } else if (*render) {
      const auto doc = foon::deserialize_tree(foon::read_text_file(render_tree), &warnings);
      write_or_print(render_out, foon::cmd_render(doc.tree));
    } else if (*report) {
      std::vector<foon::AnnotationSet> sets;
      for (const auto& p : annotation_paths) sets.push_back(foon::deserialize_annotations(foon::read_text_file(p)));
      std::vector<foon::ProgressDocument> docs;
      for (const auto& p : progress_paths) docs.push_back(foon::deserialize_progress(foon::read_text_file(p)));
      const auto out = foon::cmd_report(sets, docs, thresholds);
      if (report_json) foon::write_text_file_atomic(*report_json, foon::dump_canonical(out.document));
      std::cout << out.table;
    } else if (*serve) {
      foon::cmd_serve(results_dir, host, port);
    }
  } catch (const foon::Error& e) {
    std::cerr << "error: " << e.module() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
