#pragma once

#include <string>

#include "foon/embedding.hpp"
#include "foon/kitchen.hpp"
#include "foon/model.hpp"
#include "foon/store.hpp"

namespace foon {

struct GoalSelection {
  ObjectNode goal;
  std::string source_subgraph;
  std::size_t score = 0;
};

/// Pick the recipe of the requested dish class whose ingredient list best
/// matches the request. Ties: larger covered fraction of the recipe's
/// ingredients, then smaller subgraph id.
GoalSelection identify_goal_node(const UniversalFoon& foon, const EmbeddingTable& table,
                                 const SimilarityConfig& cfg, const KitchenModel& kitchen,
                                 const PlanningRequest& request);

}  // namespace foon
