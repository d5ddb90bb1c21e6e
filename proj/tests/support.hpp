#pragma once

// Shared fixtures, generators and brute-force oracles for the test binaries.
// The oracles deliberately avoid the library's search, pruning and similarity
// code; they only reuse the plain data types.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sys/wait.h>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "foon/cli.hpp"
#include "foon/embedding.hpp"
#include "foon/kitchen.hpp"
#include "foon/model.hpp"
#include "foon/store.hpp"

namespace testing {

inline std::filesystem::path data_dir() { return FOON_TEST_DATA; }

inline std::filesystem::path kitchen_file(const std::string& name) { return data_dir() / "kitchen" / name; }

inline std::vector<std::filesystem::path> kitchen_foon_files() {
  return {kitchen_file("greek_salad.json"), kitchen_file("waldorf_salad.json"), kitchen_file("garden_salad.json"),
          kitchen_file("chive_omelette.json")};
}

inline foon::CliConfig kitchen_config() {
  foon::CliConfig cfg;
  cfg.foon_paths = kitchen_foon_files();
  cfg.embeddings = kitchen_file("embeddings.txt");
  cfg.dish_classes = kitchen_file("dish_classes.json");
  cfg.state_classes = kitchen_file("state_classes.json");
  cfg.kitchen = kitchen_file("kitchen.json");
  cfg.integration_policy = kitchen_file("integration_policy.json");
  return cfg;
}

// ---------------------------------------------------------------------------
// Raw vectors straight from an embedding file, no normalization.

using RawVectors = std::map<std::string, std::vector<double>>;

inline RawVectors read_raw_vectors(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::size_t count = 0, dim = 0;
  in >> count >> dim;
  RawVectors out;
  std::string token;
  while (in >> token) {
    std::vector<double> v(dim);
    for (auto& x : v) in >> x;
    out[token] = v;
  }
  return out;
}

inline double raw_cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return dot / std::sqrt(na * nb);
}

// Single-token similarity with the exact-match fallback for unknown words.
inline double token_similarity(const RawVectors& vectors, const std::string& a, const std::string& b) {
  if (a == b) return 1.0;
  auto ia = vectors.find(a);
  auto ib = vectors.find(b);
  if (ia == vectors.end() || ib == vectors.end()) return 0.0;
  return raw_cosine(ia->second, ib->second);
}

inline foon::EmbeddingTable table_from(const RawVectors& vectors) {
  foon::EmbeddingTable table(vectors.empty() ? 0 : vectors.begin()->second.size());
  for (const auto& [k, v] : vectors) table.add(k, v);
  return table;
}

// ---------------------------------------------------------------------------
// Executability, checked the slow way.

inline bool oracle_base_available(const foon::ObjectNode& n, const std::set<std::string>& utensils,
                                  const std::set<std::pair<std::string, std::string>>& base_items) {
  if (n.location || !n.ingredients.empty()) return false;
  if (utensils.count(n.name)) return true;
  if (n.states.size() != 1 || n.states[0].argument) return false;
  const auto& label = n.states[0].label;
  return label == "whole" || label == "raw" || base_items.count({n.name, label});
}

inline bool same_node(const foon::ObjectNode& a, const foon::ObjectNode& b) {
  auto sorted_states = [](const foon::ObjectNode& n) {
    std::vector<std::string> s;
    for (const auto& l : n.states) s.push_back(l.label + "|" + l.argument.value_or(""));
    std::sort(s.begin(), s.end());
    return s;
  };
  auto sorted_list = [](std::vector<std::string> v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  return a.name == b.name && a.location == b.location && sorted_states(a) == sorted_states(b) &&
         sorted_list(a.ingredients) == sorted_list(b.ingredients);
}

inline bool oracle_executable(const std::vector<foon::FunctionalUnit>& units, const std::set<std::string>& utensils,
                              const std::set<std::pair<std::string, std::string>>& base_items) {
  for (std::size_t k = 0; k < units.size(); ++k) {
    for (const auto& in : units[k].inputs) {
      if (oracle_base_available(in, utensils, base_items)) continue;
      bool found = false;
      for (std::size_t j = 0; j < k && !found; ++j) {
        for (const auto& out : units[j].outputs) found = found || same_node(out, in);
      }
      if (!found) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Random FOONs for the retrieval oracle.

struct RandomFoon {
  std::vector<foon::Subgraph> subgraphs;
  foon::ObjectNode goal;
  std::vector<std::string> required;
  RawVectors vectors;
};

inline const std::set<std::string>& random_utensils() {
  static const std::set<std::string> u{"knife", "bowl"};
  return u;
}

/// Up to `max_units` units over 8 ingredient names and 4 states; every object
/// key has at most `max_producers` producers; 1 to `max_required` required names.
inline RandomFoon random_foon(std::mt19937& rng, std::size_t max_units = 15, std::size_t max_producers = 3,
                              std::size_t max_required = 6) {
  const std::vector<std::string> names{"n0", "n1", "n2", "n3", "n4", "n5", "n6", "n7"};
  const std::vector<std::string> states{"s1", "s2", "s3"};
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  auto chance = [&](double p) { return std::uniform_real_distribution<double>(0, 1)(rng) < p; };

  RandomFoon out;
  // n0..n5 have vectors; some are near-copies of others so the threshold matters.
  std::normal_distribution<double> gauss(0, 1);
  for (std::size_t i = 0; i < 6; ++i) {
    std::vector<double> v(3);
    if (i > 0 && chance(0.4)) {
      v = out.vectors[names[pick(i)]];
      for (auto& x : v) x += 0.25 * gauss(rng);
    } else {
      for (auto& x : v) x = gauss(rng);
    }
    out.vectors[names[i]] = v;
  }

  std::map<std::pair<std::string, std::string>, std::size_t> producer_count;
  std::vector<std::pair<std::string, std::string>> produced;
  std::vector<foon::FunctionalUnit> units;
  const std::size_t target = std::min(max_units, max_units / 2 + pick(max_units / 2 + 1));
  std::size_t attempts = 0;
  while (units.size() < target && attempts++ < 400) {
    foon::FunctionalUnit u;
    u.motion.verb = "v" + std::to_string(pick(4));
    const std::size_t n_in = 1 + pick(3);
    for (std::size_t i = 0; i < n_in; ++i) {
      // Outputs only use the first five names, so producers pile up on few keys.
      const auto& name = names[pick(names.size())];
      if (!produced.empty() && chance(0.85)) {
        const auto& [pn, ps] = produced[pick(produced.size())];
        u.inputs.push_back(foon::make_object(pn, {ps}));
      } else if (chance(0.7)) {
        u.inputs.push_back(foon::make_object(name, {"whole"}));
      } else {
        u.inputs.push_back(foon::make_object(name, {states[pick(states.size())]}));
      }
    }
    if (chance(0.3)) u.inputs.push_back(foon::make_object(chance(0.5) ? "knife" : "bowl"));
    const std::pair<std::string, std::string> out_key{names[pick(5)], states[pick(states.size())]};
    if (producer_count[out_key] >= max_producers) continue;
    u.outputs.push_back(foon::make_object(out_key.first, {out_key.second}));
    if (chance(0.15)) {
      const std::pair<std::string, std::string> extra{names[pick(5)], states[pick(states.size())]};
      if (extra != out_key && producer_count[extra] < max_producers) {
        u.outputs.push_back(foon::make_object(extra.first, {extra.second}));
      }
    }
    bool duplicate_input = false;
    for (std::size_t a = 0; a < u.inputs.size(); ++a) {
      for (std::size_t b = a + 1; b < u.inputs.size(); ++b) duplicate_input |= same_node(u.inputs[a], u.inputs[b]);
    }
    if (duplicate_input) continue;
    bool duplicate_unit = false;
    for (const auto& e : units) duplicate_unit |= foon::functional_unit_equals(e, u);
    if (duplicate_unit) continue;
    for (const auto& o : u.outputs) {
      const std::pair<std::string, std::string> k{o.name, o.states[0].label};
      ++producer_count[k];
      produced.push_back(k);
    }
    units.push_back(std::move(u));
  }
  // Two subgraphs so that merging is exercised too.
  const std::size_t split = units.size() / 2;
  out.subgraphs.push_back({"a", std::nullopt, {units.begin(), units.begin() + static_cast<std::ptrdiff_t>(split)}, {}});
  out.subgraphs.push_back({"b", std::nullopt, {units.begin() + static_cast<std::ptrdiff_t>(split), units.end()}, {}});
  std::erase_if(out.subgraphs, [](const foon::Subgraph& s) { return s.units.empty(); });
  for (auto& sg : out.subgraphs) sg.goal = sg.units.back().outputs.front();

  // Goals late in the generation order tend to have deeper plans.
  const auto& [gn, gs] = produced[produced.size() / 2 + pick(produced.size() - produced.size() / 2)];
  out.goal = foon::make_object(gn, {gs});
  // Mostly names that objects are produced for, otherwise pruning leaves little to search.
  std::vector<std::string> core(names.begin(), names.begin() + 5), rest(names.begin() + 5, names.end());
  std::shuffle(core.begin(), core.end(), rng);
  std::shuffle(rest.begin(), rest.end(), rng);
  std::vector<std::string> pool;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (!rest.empty() && (core.empty() || chance(0.2))) {
      pool.push_back(rest.back());
      rest.pop_back();
    } else {
      pool.push_back(core.back());
      core.pop_back();
    }
  }
  pool.resize(std::min(max_required, 1 + pick(max_required)));
  out.required = pool;
  return out;
}

// ---------------------------------------------------------------------------
// Brute-force retrieval: enumerate every assignment of one producer to each
// needed object key, keep the acyclic ones, and report the best
// (score, unit count).

struct OracleResult {
  bool solvable = false;
  std::size_t score = 0;
  std::size_t length = 0;
  std::size_t plans = 0;
};

inline OracleResult retrieval_oracle(const std::vector<foon::FunctionalUnit>& units, const foon::ObjectNode& goal,
                                     const std::vector<std::string>& required, const RawVectors& vectors,
                                     double threshold, const std::set<std::string>& utensils,
                                     const std::set<std::pair<std::string, std::string>>& base_items) {
  using Key = std::string;
  auto key = [](const foon::ObjectNode& n) {
    std::vector<std::string> s;
    for (const auto& l : n.states) s.push_back(l.label + "|" + l.argument.value_or(""));
    std::sort(s.begin(), s.end());
    std::vector<std::string> i = n.ingredients;
    std::sort(i.begin(), i.end());
    std::string k = n.name + "#";
    for (const auto& x : s) k += x + ",";
    k += "#";
    for (const auto& x : i) k += x + ",";
    return k;
  };
  auto is_required = [&](const std::string& n) {
    return std::find(required.begin(), required.end(), n) != required.end();
  };
  auto ingredient_class = [&](const foon::ObjectNode& n) { return !utensils.count(n.name) && n.ingredients.empty(); };
  auto names_of = [&](const foon::ObjectNode& n) {
    std::vector<std::string> out;
    if (ingredient_class(n)) {
      out.push_back(n.name);
    } else {
      for (const auto& i : n.ingredients) {
        if (!utensils.count(i)) out.push_back(i);
      }
    }
    return out;
  };
  const Key goal_key = key(goal);

  std::vector<foon::FunctionalUnit> pruned;
  std::vector<std::vector<Key>> needs;
  std::vector<bool> relevant;
  std::map<Key, std::vector<std::size_t>> producers;
  for (std::size_t u = 0; u < units.size(); ++u) {
    foon::FunctionalUnit p;
    p.motion = units[u].motion;
    auto keep = [&](const foon::ObjectNode& n) { return !ingredient_class(n) || is_required(n.name) || key(n) == goal_key; };
    for (const auto& n : units[u].inputs) {
      if (keep(n)) p.inputs.push_back(n);
    }
    for (const auto& n : units[u].outputs) {
      if (keep(n)) p.outputs.push_back(n);
    }
    std::vector<Key> need;
    for (const auto& n : p.inputs) {
      if (oracle_base_available(n, utensils, base_items)) continue;
      if (std::find(need.begin(), need.end(), key(n)) == need.end()) need.push_back(key(n));
    }
    bool rel = false;
    for (const auto* side : {&units[u].inputs, &units[u].outputs}) {
      for (const auto& n : *side) {
        for (const auto& name : names_of(n)) {
          for (const auto& r : required) rel = rel || name == r || token_similarity(vectors, name, r) > threshold;
        }
      }
    }
    for (const auto& n : units[u].outputs) {
      auto& list = producers[key(n)];
      if (list.empty() || list.back() != u) list.push_back(u);
    }
    pruned.push_back(std::move(p));
    needs.push_back(std::move(need));
    relevant.push_back(rel);
  }
  auto options = [&](const Key& k, bool root) {
    std::vector<std::size_t> all = producers.count(k) ? producers.at(k) : std::vector<std::size_t>{};
    if (root) return all;
    std::vector<std::size_t> rel;
    for (auto u : all) {
      if (relevant[u]) rel.push_back(u);
    }
    return rel.empty() ? all : rel;
  };

  OracleResult best;
  std::map<Key, std::size_t> assign;
  std::function<void(std::vector<Key>)> rec = [&](std::vector<Key> pending) {
    if (pending.empty()) {
      // Acyclic: depth-first colouring of the unit dependency graph.
      std::set<std::size_t> chosen;
      for (const auto& [k, u] : assign) chosen.insert(u);
      std::map<std::size_t, int> colour;
      std::function<bool(std::size_t)> cyclic = [&](std::size_t u) {
        colour[u] = 1;
        for (const auto& k : needs[u]) {
          const auto d = assign.at(k);
          if (colour[d] == 1) return true;
          if (colour[d] == 0 && cyclic(d)) return true;
        }
        colour[u] = 2;
        return false;
      };
      for (auto u : chosen) {
        if (colour[u] == 0 && cyclic(u)) return;
      }
      std::set<std::string> names;
      for (auto u : chosen) {
        for (const auto* side : {&pruned[u].inputs, &pruned[u].outputs}) {
          for (const auto& n : *side) {
            for (const auto& name : names_of(n)) names.insert(name);
          }
        }
      }
      std::size_t score = 0;
      for (const auto& r : required) {
        for (const auto& n : names) score += token_similarity(vectors, r, n) > threshold ? 1 : 0;
      }
      ++best.plans;
      if (!best.solvable || score > best.score || (score == best.score && chosen.size() < best.length)) {
        best.solvable = true;
        best.score = score;
        best.length = chosen.size();
      }
      return;
    }
    const Key k = pending.front();
    pending.erase(pending.begin());
    for (auto u : options(k, k == goal_key && assign.empty())) {
      assign[k] = u;
      auto next = pending;
      for (const auto& nk : needs[u]) {
        if (!assign.count(nk) && std::find(next.begin(), next.end(), nk) == next.end()) next.push_back(nk);
      }
      rec(next);
      assign.erase(k);
    }
  };
  rec({goal_key});
  return best;
}

// ---------------------------------------------------------------------------
// Merge algebra helpers.

/// Subgraph of 1..6 units drawn from a fixed pool of 12 slicing/mixing units, so
/// that independent draws overlap.
inline foon::Subgraph random_pool_subgraph(std::mt19937& rng, const std::string& id) {
  static const std::vector<foon::FunctionalUnit> pool = [] {
    std::vector<foon::FunctionalUnit> p;
    const std::vector<std::string> items{"onion", "tomato", "cucumber", "carrot"};
    for (const auto& n : items) {
      p.push_back({{foon::make_object(n, {"whole"}), foon::make_object("knife")}, {"slice", std::nullopt},
                   {foon::make_object(n, {"sliced"})}});
      p.push_back({{foon::make_object(n, {"whole"}), foon::make_object("knife")}, {"dice", 0.5},
                   {foon::make_object(n, {"diced"})}});
      p.push_back({{foon::make_object("bowl"), foon::make_object(n, {"sliced"})}, {"add", std::nullopt},
                   {foon::make_object("bowl", {"contains"}, {n})}});
    }
    return p;
  }();
  std::uniform_int_distribution<std::size_t> count(1, 6), index(0, pool.size() - 1);
  foon::Subgraph sg{id, std::nullopt, {}, {}};
  const auto n = count(rng);
  for (std::size_t i = 0; i < n; ++i) sg.units.push_back(pool[index(rng)]);
  sg.goal = sg.units.back().outputs.front();
  return sg;
}

inline std::set<std::string> unit_set(const std::vector<foon::FunctionalUnit>& units) {
  std::set<std::string> out;
  for (const auto& u : units) out.insert(foon::canonical_string(u));
  return out;
}

inline std::set<std::string> merged_set(std::vector<foon::Subgraph> subgraphs) {
  return unit_set(foon::merge(subgraphs).units());
}

/// A merged FOON viewed as one subgraph, for nesting merges.
inline foon::Subgraph as_subgraph(const foon::UniversalFoon& foon, const std::string& id) {
  return {id, std::nullopt, foon.units(), foon.units().back().outputs.front()};
}

// ---------------------------------------------------------------------------
// Random requests against the kitchen fixture. Every state offered here is
// reachable directly, through a same-class state, or through a substitute.

inline foon::PlanningRequest random_kitchen_request(std::mt19937& rng, const std::string& id) {
  static const std::vector<std::pair<std::string, std::vector<std::string>>> menu{
      {"tomato", {"sliced", "diced", "chopped", "whole"}},
      {"cucumber", {"sliced", "diced"}},
      {"onion", {"sliced", "diced", "whole"}},
      {"lettuce", {"chopped", "sliced"}},
      {"apple", {"chopped", "sliced"}},
      {"celery", {"chopped", "sliced"}},
      {"raisin", {"whole"}},
      {"olive oil", {"liquid"}},
      {"vinegar", {"liquid"}},
      {"salt", {"ground"}},
      {"milk", {"liquid"}},
      {"egg", {"whole"}},
      {"chives", {"chopped", "whole"}},
      {"carrot", {"sliced", "diced", "chopped", "whole"}},
      {"leek", {"chopped", "sliced"}},
      {"prunes", {"whole"}},
  };
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  std::vector<std::size_t> order(menu.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  foon::PlanningRequest req;
  req.id = id;
  req.dish_type = pick(3) == 0 ? "omelette" : "salad";
  const std::size_t n = 2 + pick(5);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& [name, states] = menu[order[i]];
    req.ingredients.push_back({name, states[pick(states.size())]});
  }
  return req;
}

// ---------------------------------------------------------------------------
// Utensil preservation in a final tree.

// Utensils a unit touches, full or empty.
inline std::set<std::string> tools(const foon::FunctionalUnit& u, const foon::KitchenModel& kitchen) {
  std::set<std::string> out;
  for (const auto& n : u.inputs) {
    if (kitchen.is_utensil(n.name)) out.insert(n.name);
  }
  return out;
}

// Some FOON unit with the same verb uses exactly the same tools.
inline bool tools_preserved(const foon::FunctionalUnit& u, const foon::UniversalFoon& foon,
                            const foon::KitchenModel& kitchen) {
  for (const auto& f : foon.units()) {
    if (f.motion.verb == u.motion.verb && tools(f, kitchen) == tools(u, kitchen)) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Running the foonplan binary.

struct CommandResult {
  int exit_code = -1;
  std::string out;
};

// Runs through the shell; stderr goes wherever `command` redirects it.
inline CommandResult run_command(const std::string& command) {
  CommandResult r;
  FILE* pipe = ::popen(command.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = ::pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

inline std::string quoted(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

inline std::string foonplan() { return quoted(FOONPLAN_EXE); }

// Every config flag of `plan` for the kitchen fixture.
inline std::string kitchen_plan_flags() {
  std::string flags;
  for (const auto& f : kitchen_foon_files()) flags += " --foon " + quoted(f);
  flags += " --embeddings " + quoted(kitchen_file("embeddings.txt"));
  flags += " --dish-classes " + quoted(kitchen_file("dish_classes.json"));
  flags += " --state-classes " + quoted(kitchen_file("state_classes.json"));
  flags += " --kitchen " + quoted(kitchen_file("kitchen.json"));
  flags += " --integration-policy " + quoted(kitchen_file("integration_policy.json"));
  return flags;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("foonplan-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

private:
  std::filesystem::path path_;
};

}  // namespace testing
