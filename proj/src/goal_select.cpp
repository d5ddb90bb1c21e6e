#include "foon/goal_select.hpp"

#include "foon/error.hpp"

namespace foon {

namespace {

// Fraction of recipe ingredients matched by at least one requested ingredient,
// kept as a ratio to compare exactly.
struct Coverage {
  std::size_t covered = 0;
  std::size_t total = 0;

  bool greater_than(const Coverage& other) const {
    // covered/total > other.covered/other.total, with empty lists counting as 0.
    if (total == 0) return false;
    if (other.total == 0) return covered > 0;
    return covered * other.total > other.covered * total;
  }
};

Coverage coverage(const EmbeddingTable& table, const SimilarityConfig& cfg,
                  const std::vector<std::string>& required, const std::vector<std::string>& recipe) {
  Coverage c{0, recipe.size()};
  for (const auto& j : recipe) {
    for (const auto& i : required) {
      if (similarity(table, i, j) > cfg.threshold) {
        ++c.covered;
        break;
      }
    }
  }
  return c;
}

}  // namespace

GoalSelection identify_goal_node(const UniversalFoon& foon, const EmbeddingTable& table,
                                 const SimilarityConfig& cfg, const KitchenModel& kitchen,
                                 const PlanningRequest& request) {
  const auto candidates = find_goal_candidates(foon, request.dish_type, kitchen);
  if (candidates.empty()) {
    throw PlanningError("goal_select", "no recipes of type '" + request.dish_type + "'");
  }
  const auto required = request.ingredient_names();
  const GoalCandidate* best = nullptr;
  std::size_t best_score = 0;
  Coverage best_cov;
  for (const auto& cand : candidates) {
    const std::size_t score = compute_similarity(table, cfg, required, cand.ingredients);
    const Coverage cov = coverage(table, cfg, required, cand.ingredients);
    bool better = !best || score > best_score;
    if (best && score == best_score) {
      if (cov.greater_than(best_cov)) {
        better = true;
      } else if (!best_cov.greater_than(cov)) {
        better = cand.subgraph_id < best->subgraph_id;
      }
    }
    if (better) {
      best = &cand;
      best_score = score;
      best_cov = cov;
    }
  }
  return {best->goal, best->subgraph_id, best_score};
}

}  // namespace foon
