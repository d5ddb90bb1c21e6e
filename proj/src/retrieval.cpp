#include "foon/retrieval.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <mutex>
#include <set>
#include <sstream>

#include "foon/document.hpp"
#include "foon/error.hpp"

namespace foon {

FunctionalUnit prune_unit(const FunctionalUnit& unit, std::span<const std::string> required,
                          const ObjectKey& goal_key, const KitchenModel& kitchen) {
  auto keep = [&](const ObjectNode& node) {
    if (!kitchen.is_ingredient_class(node)) return true;
    if (std::find(required.begin(), required.end(), node.name) != required.end()) return true;
    return key_of(node) == goal_key;
  };
  FunctionalUnit out;
  out.motion = unit.motion;
  std::copy_if(unit.inputs.begin(), unit.inputs.end(), std::back_inserter(out.inputs), keep);
  std::copy_if(unit.outputs.begin(), unit.outputs.end(), std::back_inserter(out.outputs), keep);
  return out;
}

bool overlaps_request(const FunctionalUnit& unit, std::span<const std::string> required,
                      const EmbeddingTable& table, const SimilarityConfig& cfg, const KitchenModel& kitchen) {
  for (const auto& name : kitchen.ingredient_names(unit)) {
    for (const auto& r : required) {
      if (name == r || similarity(table, name, r) > cfg.threshold) return true;
    }
  }
  return false;
}

namespace {

using Resolution = std::vector<std::pair<int, std::size_t>>;  // key id -> unit index, sorted by key id

const std::size_t* lookup(const Resolution& r, int key) {
  auto it = std::lower_bound(r.begin(), r.end(), key, [](const auto& e, int k) { return e.first < k; });
  return it != r.end() && it->first == key ? &it->second : nullptr;
}

struct SearchNode {
  std::vector<std::size_t> combination;  // one unit per key resolved at this level
  Resolution resolved;                    // everything resolved from the root down to here
  int parent = -1;
  std::size_t depth = 0;
  std::vector<int> children;
  bool complete = false;
};

class Search {
public:
  Search(const RetrievalContext& ctx, const ObjectNode& goal, std::span<const std::string> required)
      : ctx_(ctx), goal_key_(key_of(goal)), required_(required.begin(), required.end()) {
    goal_id_ = key_id(goal_key_);
  }

  std::vector<CandidatePath> run() {
    const auto& roots = ctx_.foon.producer_indices(goal_key_);
    if (roots.empty()) {
      throw PlanningError("task_retrieval", "no functional unit produces " + to_string(goal_key_));
    }
    std::deque<int> queue;
    std::vector<int> root_nodes;
    for (auto r : roots) {
      SearchNode node;
      node.combination = {r};
      node.resolved = {{goal_id_, r}};
      if (!acyclic(node.resolved)) continue;
      const int id = add_node(std::move(node));
      root_nodes.push_back(id);
      queue.push_back(id);
    }
    while (!queue.empty()) {
      const int id = queue.front();
      queue.pop_front();
      expand(id, queue);
    }

    std::vector<CandidatePath> paths;
    std::vector<int> stack(root_nodes.rbegin(), root_nodes.rend());
    while (!stack.empty()) {
      const int id = stack.back();
      stack.pop_back();
      const auto& node = nodes_[static_cast<std::size_t>(id)];
      if (node.complete) paths.push_back(build_path(node.resolved));
      for (auto it = node.children.rbegin(); it != node.children.rend(); ++it) stack.push_back(*it);
    }
    if (paths.empty()) {
      std::string unmet;
      for (const auto& k : unmet_) unmet += (unmet.empty() ? "" : "; ") + to_string(k);
      throw PlanningError("task_retrieval", "no executable path to " + to_string(goal_key_) +
                                                "; unmet dependencies: " + (unmet.empty() ? "(cycles only)" : unmet));
    }
    return paths;
  }

private:
  struct Prepared {
    FunctionalUnit pruned;
    std::vector<int> required_keys;  // non-available inputs, in input order
  };

  int key_id(const ObjectKey& key) {
    auto [it, inserted] = key_ids_.try_emplace(key, static_cast<int>(keys_.size()));
    if (inserted) keys_.push_back(key);
    return it->second;
  }

  const Prepared& prepared(std::size_t unit) {
    auto it = prepared_.find(unit);
    if (it != prepared_.end()) return it->second;
    Prepared p;
    p.pruned = prune_unit(ctx_.foon.units()[unit], required_, goal_key_, ctx_.kitchen);
    for (const auto& in : p.pruned.inputs) {
      if (ctx_.kitchen.is_base_available(in)) continue;
      const int k = key_id(key_of(in));
      if (std::find(p.required_keys.begin(), p.required_keys.end(), k) == p.required_keys.end()) {
        p.required_keys.push_back(k);
      }
    }
    return prepared_.emplace(unit, std::move(p)).first->second;
  }

  // Producers of `key` that are relevant to the request; all producers when none is.
  const std::vector<std::size_t>& options(int key) {
    auto it = options_.find(key);
    if (it != options_.end()) return it->second;
    const auto& all = ctx_.foon.producer_indices(keys_[static_cast<std::size_t>(key)]);
    std::vector<std::size_t> relevant;
    for (auto u : all) {
      if (overlaps_request(ctx_.foon.units()[u], required_, ctx_.table, ctx_.similarity, ctx_.kitchen)) {
        relevant.push_back(u);
      }
    }
    return options_.emplace(key, relevant.empty() ? all : relevant).first->second;
  }

  bool acyclic(const Resolution& resolved) {
    std::set<std::size_t> units;
    for (const auto& [k, u] : resolved) units.insert(u);
    std::map<std::size_t, int> color;  // 0 new, 1 on stack, 2 done
    for (auto start : units) {
      if (color[start] != 0) continue;
      std::vector<std::pair<std::size_t, std::size_t>> stack{{start, 0}};
      color[start] = 1;
      while (!stack.empty()) {
        auto& [u, next] = stack.back();
        const auto& req = prepared(u).required_keys;
        if (next == req.size()) {
          color[u] = 2;
          stack.pop_back();
          continue;
        }
        const std::size_t* dep = lookup(resolved, req[next++]);
        if (!dep) continue;
        if (color[*dep] == 1) return false;
        if (color[*dep] == 0) {
          color[*dep] = 1;
          stack.emplace_back(*dep, 0);
        }
      }
    }
    return true;
  }

  int add_node(SearchNode node) {
    if (nodes_.size() >= ctx_.budget.max_paths) {
      std::size_t complete = 0;
      for (const auto& n : nodes_) complete += n.complete ? 1 : 0;
      throw BudgetExceededError("task_retrieval",
                                "search budget of " + std::to_string(ctx_.budget.max_paths) +
                                    " partial plans exceeded while retrieving " + to_string(goal_key_) + " (" +
                                    std::to_string(complete) + " complete plans found so far)");
    }
    nodes_.push_back(std::move(node));
    return static_cast<int>(nodes_.size() - 1);
  }

  void expand(int id, std::deque<int>& queue) {
    std::vector<int> frontier;
    {
      const auto& node = nodes_[static_cast<std::size_t>(id)];
      for (auto u : node.combination) {
        for (int k : prepared(u).required_keys) {
          if (!lookup(node.resolved, k) && std::find(frontier.begin(), frontier.end(), k) == frontier.end()) {
            frontier.push_back(k);
          }
        }
      }
    }
    if (frontier.empty()) {
      nodes_[static_cast<std::size_t>(id)].complete = true;
      return;
    }
    std::vector<const std::vector<std::size_t>*> choices;
    for (int k : frontier) {
      const auto& opts = options(k);
      if (opts.empty()) {
        unmet_.insert(keys_[static_cast<std::size_t>(k)]);
        return;
      }
      choices.push_back(&opts);
    }
    const std::size_t depth = nodes_[static_cast<std::size_t>(id)].depth + 1;
    if (depth > ctx_.budget.max_depth) {
      throw BudgetExceededError("task_retrieval", "search depth limit of " + std::to_string(ctx_.budget.max_depth) +
                                                      " exceeded while retrieving " + to_string(goal_key_));
    }

    // Cartesian product over the frontier's producer options.
    std::vector<std::size_t> pick(choices.size(), 0);
    bool any_child = false;
    while (true) {
      SearchNode child;
      child.parent = id;
      child.depth = depth;
      child.resolved = nodes_[static_cast<std::size_t>(id)].resolved;
      for (std::size_t i = 0; i < choices.size(); ++i) {
        const auto u = (*choices[i])[pick[i]];
        child.combination.push_back(u);
        child.resolved.emplace_back(frontier[i], u);
      }
      std::sort(child.resolved.begin(), child.resolved.end());
      if (acyclic(child.resolved)) {
        const int cid = add_node(std::move(child));
        nodes_[static_cast<std::size_t>(id)].children.push_back(cid);
        queue.push_back(cid);
        any_child = true;
      }
      bool exhausted = true;
      for (std::size_t i = choices.size(); i-- > 0;) {
        if (++pick[i] < choices[i]->size()) {
          exhausted = false;
          break;
        }
        pick[i] = 0;
      }
      if (exhausted) break;
    }
    if (!any_child) {
      for (int k : frontier) unmet_.insert(keys_[static_cast<std::size_t>(k)]);
    }
  }

  CandidatePath build_path(const Resolution& resolved) {
    std::vector<std::size_t> order;
    std::set<std::size_t> visited;
    // Post-order from the root so producers precede consumers.
    auto visit = [&](auto&& self, std::size_t u) -> void {
      if (!visited.insert(u).second) return;
      for (int k : prepared(u).required_keys) self(self, *lookup(resolved, k));
      order.push_back(u);
    };
    const std::size_t root = *lookup(resolved, goal_id_);
    visit(visit, root);

    auto produced_node = [&](std::size_t producer, int k) -> const ObjectNode& {
      for (const auto& out : prepared(producer).pruned.outputs) {
        if (key_id(key_of(out)) == k) return out;
      }
      throw PlanningError("task_retrieval", "internal: producer lost its output");
    };

    CandidatePath path;
    for (auto u : order) {
      FunctionalUnit unit = prepared(u).pruned;
      for (auto& in : unit.inputs) {
        if (ctx_.kitchen.is_base_available(in)) continue;
        in = produced_node(*lookup(resolved, key_id(key_of(in))), key_id(key_of(in)));
      }
      path.units.push_back(std::move(unit));
    }
    path.goal = produced_node(root, goal_id_);
    path.length = path.units.size();
    const auto names = ctx_.kitchen.ingredient_names(path.units);
    path.overlap_score = compute_similarity(ctx_.table, ctx_.similarity, required_, names);
    return path;
  }

  const RetrievalContext& ctx_;
  ObjectKey goal_key_;
  int goal_id_ = 0;
  std::vector<std::string> required_;
  std::map<ObjectKey, int> key_ids_;
  std::vector<ObjectKey> keys_;
  std::map<std::size_t, Prepared> prepared_;
  std::map<int, std::vector<std::size_t>> options_;
  std::vector<SearchNode> nodes_;
  std::set<ObjectKey> unmet_;
};

std::string cache_key(const RetrievalContext& ctx, const ObjectNode& goal, std::span<const std::string> required) {
  std::vector<std::string> sorted(required.begin(), required.end());
  std::sort(sorted.begin(), sorted.end());
  std::ostringstream key;
  char fp[17];
  std::snprintf(fp, sizeof fp, "%016llx", static_cast<unsigned long long>(ctx.foon.fingerprint()));
  key << fp << '|' << canonical_string(goal) << '|';
  for (const auto& s : sorted) key << s << ';';
  key << '|' << ctx.similarity.threshold << '|' << ctx.budget.max_paths << '|' << ctx.budget.max_depth;
  return key.str();
}

}  // namespace

std::vector<CandidatePath> enumerate_candidate_paths(const RetrievalContext& ctx, const ObjectNode& goal,
                                                     std::span<const std::string> required) {
  return Search(ctx, goal, required).run();
}

CandidatePath select_best_path(std::vector<CandidatePath> paths) {
  if (paths.empty()) throw PlanningError("task_retrieval", "no candidate paths");
  std::size_t best = 0;
  for (std::size_t i = 1; i < paths.size(); ++i) {
    const auto& p = paths[i];
    const auto& b = paths[best];
    if (p.overlap_score > b.overlap_score || (p.overlap_score == b.overlap_score && p.length < b.length)) best = i;
  }
  return std::move(paths[best]);
}

TaskTree retrieve_reference_task_tree(const RetrievalContext& ctx, const ObjectNode& goal,
                                      std::span<const std::string> required) {
  std::string key;
  if (ctx.cache) {
    key = cache_key(ctx, goal, required);
    if (auto hit = ctx.cache->get(key)) return *hit;
  }
  auto best = select_best_path(enumerate_candidate_paths(ctx, goal, required));
  TaskTree tree{std::move(best.units), std::move(best.goal), {}};
  if (ctx.cache) ctx.cache->put(key, tree);
  return tree;
}

ReferenceTreeCache::ReferenceTreeCache(std::filesystem::path directory) : directory_(std::move(directory)) {
  std::filesystem::create_directories(*directory_);
}

std::filesystem::path ReferenceTreeCache::file_for(const std::string& key) const {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : key) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char name[32];
  std::snprintf(name, sizeof name, "%016llx.json", static_cast<unsigned long long>(h));
  return *directory_ / name;
}

std::optional<TaskTree> ReferenceTreeCache::get(const std::string& key) const {
  {
    std::shared_lock lock(mutex_);
    if (auto it = entries_.find(key); it != entries_.end()) return it->second;
  }
  if (!directory_) return std::nullopt;
  const auto file = file_for(key);
  std::error_code ec;
  if (!std::filesystem::exists(file, ec)) return std::nullopt;
  // A damaged or colliding cache file is treated as a miss.
  try {
    const auto doc = deserialize_tree(read_text_file(file));
    if (doc.recipe_id != key) return std::nullopt;
    return doc.tree;
  } catch (const Error&) {
    return std::nullopt;
  }
}

void ReferenceTreeCache::put(const std::string& key, const TaskTree& tree) {
  std::unique_lock lock(mutex_);
  entries_[key] = tree;
  if (directory_) write_text_file_atomic(file_for(key), serialize_tree({key, std::nullopt, tree}));
}

std::size_t ReferenceTreeCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

}  // namespace foon
