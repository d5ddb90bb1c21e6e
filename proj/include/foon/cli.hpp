#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "foon/document.hpp"
#include "foon/embedding.hpp"
#include "foon/kitchen.hpp"
#include "foon/modification.hpp"
#include "foon/progress.hpp"
#include "foon/retrieval.hpp"
#include "foon/store.hpp"

namespace foon {

/// Inputs shared by the planning commands. Every named file must exist and parse
/// before a command runs.
struct CliConfig {
  std::vector<std::filesystem::path> foon_paths;
  std::optional<std::filesystem::path> embeddings;
  std::optional<std::filesystem::path> dish_classes;
  std::optional<std::filesystem::path> state_classes;
  std::optional<std::filesystem::path> kitchen;
  std::optional<std::filesystem::path> integration_policy;
  std::optional<std::filesystem::path> cache_dir;
  std::optional<std::filesystem::path> output_dir;
  double similarity_threshold = 0.90;
  SearchBudget budget;
};

/// Verbs that accept extra ingredients when no policy file is given.
IntegrationPolicy default_integration_policy();

/// Everything loaded from a CliConfig.
struct Workspace {
  UniversalFoon foon;
  EmbeddingTable table;
  KitchenModel kitchen;
  StateClassConfig state_classes;
  IntegrationPolicy policy;
  MotionVerbStats verb_stats;
  SimilarityConfig similarity;
  SearchBudget budget;
  std::unique_ptr<ReferenceTreeCache> cache;
  Warnings warnings;

  static Workspace load(const CliConfig& config);
  PlanningContext context() const;
};

std::string cmd_merge(std::span<const std::filesystem::path> inputs, const DishClassConfig& classes,
                      Warnings* warnings = nullptr);

struct PlanResult {
  TreeDocument tree;
  ProgressDocument progress;
};

/// The final task tree for `request`; the document's recipe id is the request id.
PlanResult cmd_plan(const Workspace& workspace, const PlanningRequest& request);

ProgressDocument cmd_progress(const TreeDocument& tree);

/// Graphviz description: inputs green, intermediates yellow, the goal dark blue,
/// motions red; objects touched by a substitution are dashed.
std::string cmd_render(const TaskTree& tree);

struct ReportOutput {
  std::string table;
  Json document;
};

/// `progress` supplies each recipe's ingredient list where available; otherwise
/// the scored ingredients are taken as the list.
ReportOutput cmd_report(std::span<const AnnotationSet> annotations, std::span<const ProgressDocument> progress,
                        std::span<const double> thresholds);

struct HttpResponse {
  int status = 200;
  std::string body;
};

/// Review data kept as files in one results directory:
/// <id>.tree.json, <id>.progress.json and <id>.annotations.json.
class ReviewStore {
public:
  explicit ReviewStore(std::filesystem::path directory);

  HttpResponse list_recipes() const;
  HttpResponse progress(const std::string& id) const;
  HttpResponse tree(const std::string& id) const;
  HttpResponse put_annotations(const std::string& id, const std::string& body);

private:
  std::filesystem::path file(const std::string& id, const char* suffix) const;
  std::optional<ProgressDocument> load_progress(const std::string& id) const;
  std::mutex& lock_for(const std::string& id);

  std::filesystem::path directory_;
  std::mutex locks_mutex_;
  std::map<std::string, std::unique_ptr<std::mutex>> locks_;
};

/// HTTP front end for a ReviewStore:
///   GET /recipes, GET /recipes/{id}/progress, GET /recipes/{id}/tree,
///   PUT /recipes/{id}/annotations
class ReviewServer {
public:
  explicit ReviewServer(ReviewStore& store);
  ~ReviewServer();

  /// Binds and returns the port; port 0 picks a free one.
  int bind(const std::string& host, int port);
  /// Serves until stop() is called.
  void listen();
  void stop();

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Serve `results_dir` until the process is stopped.
void cmd_serve(const std::filesystem::path& results_dir, const std::string& host, int port);

}  // namespace foon
