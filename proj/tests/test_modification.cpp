#include <doctest.h>

#include <cmath>
#include <random>

#include "foon/error.hpp"
#include "foon/goal_select.hpp"
#include "foon/cli.hpp"
#include "foon/modification.hpp"
#include "support.hpp"

using namespace foon;

namespace {

FunctionalUnit unit(std::vector<ObjectNode> in, const std::string& verb, std::vector<ObjectNode> out) {
  return {std::move(in), {verb, std::nullopt}, std::move(out)};
}

FunctionalUnit slice(const std::string& name) {
  return unit({make_object(name, {"whole"}), make_object("knife")}, "slice", {make_object(name, {"sliced"})});
}

// slice tomato, add it to a bowl, mix.
TaskTree small_salad() {
  TaskTree t;
  t.units = {slice("tomato"),
             unit({make_object("bowl"), make_object("tomato", {"sliced"})}, "add",
                  {make_object("bowl", {"contains"}, {"tomato"})}),
             unit({make_object("bowl", {"contains"}, {"tomato"}), make_object("spoon")}, "mix",
                  {make_object("salad", {"mixed"}, {"tomato"})})};
  t.goal = make_object("salad", {"mixed"}, {"tomato"});
  return t;
}

const KitchenModel& small_kitchen() {
  static const KitchenModel k({}, {"knife", "bowl", "spoon"});
  return k;
}

const IntegrationPolicy& add_and_mix() {
  static const IntegrationPolicy p{{"add", "mix"}};
  return p;
}

std::vector<std::string> verbs(const TaskTree& t) {
  std::vector<std::string> v;
  for (const auto& u : t.units) v.push_back(u.motion.verb);
  return v;
}

struct Kitchen {
  Workspace ws = Workspace::load(testing::kitchen_config());
  testing::RawVectors raw = testing::read_raw_vectors(testing::kitchen_file("embeddings.txt"));
  PlanningContext ctx() const { return ws.context(); }
  double cos(const std::string& a, const std::string& b) const { return testing::raw_cosine(raw.at(a), raw.at(b)); }
};

}  // namespace

TEST_CASE("configuration files") {
  const auto classes = StateClassConfig::load(testing::kitchen_file("state_classes.json"));
  CHECK(classes.class_of("diced") == std::optional<std::string>("finely separated"));
  CHECK_FALSE(classes.class_of("frozen").has_value());
  CHECK_THROWS_WITH_AS(StateClassConfig::parse(R"({"classes":["a"],"assignment":{"x":"b"}})"),
                       doctest::Contains("not declared"), ParseError);
  const auto policy = IntegrationPolicy::load(testing::kitchen_file("integration_policy.json"));
  CHECK(policy.accepts("sprinkle"));
  CHECK_FALSE(policy.accepts("slice"));
  CHECK_THROWS_AS(IntegrationPolicy::parse(R"({"verbs":[]})"), ParseError);
}

TEST_CASE("most frequent verb per produced state") {
  Kitchen k;
  const auto& v = k.ws.verb_stats.verb_by_state;
  CHECK(v.at("sliced") == "slice");
  CHECK(v.at("diced") == "dice");
  CHECK(v.at("chopped") == "chop");
  CHECK(v.at("contains") == "add");
  CHECK(v.at("mixed") == "mix");  // three mixes against one whisk
  CHECK(v.at("cooked") == "fry");
  CHECK_FALSE(v.count("whole"));
}

TEST_CASE("subtree retrieval for one ingredient") {
  Kitchen k;
  const auto rctx = k.ctx().retrieval();
  const auto sliced = retrieve_subtree(rctx, {"tomato", "sliced"});
  CHECK(verbs(sliced) == std::vector<std::string>{"slice"});
  CHECK(object_node_equals(sliced.goal, make_object("tomato", {"sliced"})));

  const auto whole = retrieve_subtree(rctx, {"tomato", "whole"});
  CHECK(whole.units.empty());
  CHECK(object_node_equals(whole.goal, make_object("tomato", {"whole"})));

  CHECK_THROWS_AS(retrieve_subtree(rctx, {"tomato", "grated"}), MissingStateError);
  CHECK_THROWS_AS(retrieve_subtree(rctx, {"carrot", "sliced"}), PreconditionError);
}

TEST_CASE("state substitution borrows a same-class state") {
  Kitchen k;
  const auto s = substitute_state(k.ctx(), {"onion", "diced"});
  CHECK(verbs(s.subtree) == std::vector<std::string>{"dice"});
  CHECK(object_node_equals(s.subtree.goal, make_object("onion", {"diced"})));
  CHECK(object_node_equals(s.subtree.units[0].outputs[0], make_object("onion", {"diced"})));
  REQUIRE(s.records.size() == 1);
  CHECK(s.records[0].kind == SubstitutionKind::state);
  CHECK(s.records[0].original == "sliced");
  CHECK(s.records[0].replacement == "diced");
  CHECK(s.records[0].ingredient == "onion");
  CHECK(s.records[0].note == "verb 'slice' replaced by 'dice'");
  CHECK(std::abs(s.records[0].confidence - 100.0 * k.cos("sliced", "diced")) < 1e-6);
  CHECK(s.subtree.provenance == s.records);

  // sliced and diced tomatoes both take one unit; the smaller label wins.
  const auto t = substitute_state(k.ctx(), {"tomato", "chopped"});
  CHECK(t.records[0].original == "diced");
  CHECK(verbs(t.subtree) == std::vector<std::string>{"chop"});
}

TEST_CASE("state substitution failures") {
  Kitchen k;
  CHECK_THROWS_WITH_AS(substitute_state(k.ctx(), {"onion", "frozen"}), doctest::Contains("no state analog"),
                       PlanningError);
  // egg is only ever whole, so nothing of the finely separated class exists.
  CHECK_THROWS_WITH_AS(substitute_state(k.ctx(), {"egg", "chopped"}), doctest::Contains("no state analog"),
                       PlanningError);
  CHECK_THROWS_AS(substitute_state(k.ctx(), {"onion", "sliced"}), PreconditionError);
  CHECK_THROWS_AS(substitute_state(k.ctx(), {"carrot", "sliced"}), PreconditionError);
}

TEST_CASE("a verb without statistics is kept and noted") {
  Kitchen k;
  MotionVerbStats empty;
  PlanningContext ctx{k.ws.foon, k.ws.table, k.ws.similarity, k.ws.kitchen, k.ws.budget,
                      k.ws.state_classes, empty, k.ws.policy, nullptr};
  const auto s = substitute_state(ctx, {"onion", "diced"});
  CHECK(verbs(s.subtree) == std::vector<std::string>{"slice"});
  CHECK(s.records[0].note == "verb unchanged");
}

TEST_CASE("object substitution: carrot takes the cucumber subtree") {
  Kitchen k;
  const auto s = substitute_object(k.ctx(), {"carrot", "sliced"});
  REQUIRE(s.subtree.units.size() == 1);
  CHECK(functional_unit_equals(s.subtree.units[0], slice("carrot")));
  CHECK(object_node_equals(s.subtree.goal, make_object("carrot", {"sliced"})));
  REQUIRE(s.records.size() == 1);
  CHECK(s.records[0].kind == SubstitutionKind::object);
  CHECK(s.records[0].original == "cucumber");
  CHECK(s.records[0].replacement == "carrot");
  CHECK(std::abs(s.records[0].confidence - 100.0 * k.cos("carrot", "cucumber")) < 1e-6);
  CHECK_THROWS_AS(substitute_object(k.ctx(), {"tomato", "sliced"}), PreconditionError);
}

TEST_CASE("object substitution chains into state substitution") {
  Kitchen k;
  // leek is closest to celery, which is chopped but never sliced.
  const auto s = substitute_object(k.ctx(), {"leek", "sliced"});
  REQUIRE(s.records.size() == 2);
  CHECK(s.records[0].kind == SubstitutionKind::object);
  CHECK(s.records[0].original == "celery");
  CHECK(s.records[1].kind == SubstitutionKind::state);
  CHECK(s.records[1].original == "chopped");
  CHECK(s.records[1].replacement == "sliced");
  CHECK(s.records[1].ingredient == "leek");
  CHECK(functional_unit_equals(s.subtree.units.at(0), slice("leek")));
  CHECK(s.subtree.provenance == s.records);
}

TEST_CASE("object substitution of a base item needs no units") {
  Kitchen k;
  const auto s = substitute_object(k.ctx(), {"prunes", "whole"});
  CHECK(s.subtree.units.empty());
  CHECK(object_node_equals(s.subtree.goal, make_object("prunes", {"whole"})));
  CHECK(s.records[0].original == "raisin");
}

TEST_CASE("integration splices before the earliest accepting unit") {
  TaskTree sub{{slice("carrot")}, make_object("carrot", {"sliced"}), {}};
  const auto r = integrate_subtree(small_salad(), sub, add_and_mix(), small_kitchen());
  CHECK(r.accepting_index == 2);
  CHECK(verbs(r.tree) == std::vector<std::string>{"slice", "slice", "add", "mix"});
  CHECK(functional_unit_equals(r.tree.units[2],
                               unit({make_object("bowl"), make_object("tomato", {"sliced"}), make_object("carrot", {"sliced"})},
                                    "add", {make_object("bowl", {"contains"}, {"tomato", "carrot"})})));
  CHECK(object_node_equals(r.tree.goal, make_object("salad", {"mixed"}, {"tomato", "carrot"})));
  CHECK(is_executable(r.tree.units, small_kitchen()));
}

TEST_CASE("integrating an empty subtree only touches the accepting unit") {
  TaskTree sub{{}, make_object("prunes", {"whole"}), {}};
  const auto before = small_salad();
  const auto r = integrate_subtree(before, sub, add_and_mix(), small_kitchen());
  REQUIRE(r.tree.units.size() == 3);
  CHECK(functional_unit_equals(r.tree.units[0], before.units[0]));
  CHECK(r.tree.units[1].inputs.size() == 3);
  CHECK(r.tree.units[1].outputs[0].ingredients == std::vector<std::string>{"tomato", "prunes"});
  CHECK(is_executable(r.tree.units, small_kitchen()));
}

TEST_CASE("two missing ingredients join the same unit in request order") {
  TaskTree carrot{{slice("carrot")}, make_object("carrot", {"sliced"}), {}};
  TaskTree prunes{{}, make_object("prunes", {"whole"}), {}};
  auto r = integrate_subtree(small_salad(), carrot, add_and_mix(), small_kitchen());
  r = integrate_subtree(r.tree, prunes, add_and_mix(), small_kitchen(), r.accepting_index);
  CHECK(r.accepting_index == 2);
  CHECK(r.tree.units[2].outputs[0].ingredients == std::vector<std::string>{"tomato", "carrot", "prunes"});
  CHECK(r.tree.goal.ingredients == std::vector<std::string>{"tomato", "carrot", "prunes"});
  CHECK(is_executable(r.tree.units, small_kitchen()));
}

TEST_CASE("units already done before the accepting unit are not repeated") {
  TaskTree sub{{slice("tomato"), unit({make_object("tomato", {"sliced"})}, "mash", {make_object("tomato", {"mashed"})})},
               make_object("tomato", {"mashed"}),
               {}};
  const auto r = integrate_subtree(small_salad(), sub, add_and_mix(), small_kitchen());
  CHECK(verbs(r.tree) == std::vector<std::string>{"slice", "mash", "add", "mix"});
}

TEST_CASE("integration needs an accepting unit") {
  TaskTree only_slice{{slice("tomato")}, make_object("tomato", {"sliced"}), {}};
  TaskTree sub{{}, make_object("carrot", {"whole"}), {}};
  CHECK_THROWS_WITH_AS(integrate_subtree(only_slice, sub, add_and_mix(), small_kitchen()),
                       doctest::Contains("'carrot'"), PlanningError);
}

TEST_CASE("removal strips unrequested ingredients and rewires") {
  TaskTree carrot{{slice("carrot")}, make_object("carrot", {"sliced"}), {}};
  const auto integrated = integrate_subtree(small_salad(), carrot, add_and_mix(), small_kitchen()).tree;
  const std::vector<std::string> only_carrot{"carrot"};
  const auto t = remove_extraneous(integrated, only_carrot, small_kitchen());
  CHECK(verbs(t) == std::vector<std::string>{"slice", "add", "mix"});
  CHECK(functional_unit_equals(t.units[1], unit({make_object("bowl"), make_object("carrot", {"sliced"})}, "add",
                                                {make_object("bowl", {"contains"}, {"carrot"})})));
  CHECK(object_node_equals(t.goal, make_object("salad", {"mixed"}, {"carrot"})));
  CHECK(is_executable(t.units, small_kitchen()));
}

TEST_CASE("removal drops a unit whose only ingredient went and feeds its consumer the container") {
  // add tomato, then add onion: without tomato the first add disappears and
  // the second starts from the empty bowl.
  TaskTree t;
  t.units = {unit({make_object("bowl"), make_object("tomato", {"whole"})}, "add",
                  {make_object("bowl", {"contains"}, {"tomato"})}),
             unit({make_object("bowl", {"contains"}, {"tomato"}), make_object("onion", {"whole"})}, "add",
                  {make_object("bowl", {"contains"}, {"tomato", "onion"})})};
  t.goal = t.units[1].outputs[0];
  const std::vector<std::string> onion{"onion"};
  const auto r = remove_extraneous(t, onion, small_kitchen());
  REQUIRE(r.units.size() == 1);
  CHECK(functional_unit_equals(r.units[0], unit({make_object("bowl"), make_object("onion", {"whole"})}, "add",
                                                {make_object("bowl", {"contains"}, {"onion"})})));
  CHECK(is_executable(r.units, small_kitchen()));
}

TEST_CASE("removal reports an unreachable goal") {
  TaskTree t{{slice("tomato")}, make_object("tomato", {"sliced"}), {}};
  const std::vector<std::string> none;
  // the goal survives stripping but its only input does not
  CHECK_THROWS_WITH_AS(remove_extraneous(t, none, small_kitchen()), doctest::Contains("goal unreachable"),
                       PlanningError);
  TaskTree salad = small_salad();
  salad.goal = make_object("tomato", {"sliced"});
  salad.units.pop_back();
  salad.units.pop_back();
  const std::vector<std::string> onion{"onion"};
  CHECK_THROWS_WITH_AS(remove_extraneous(salad, onion, small_kitchen()), doctest::Contains("goal unreachable"),
                       PlanningError);
}

TEST_CASE("a request matching its recipe exactly leaves the reference tree alone") {
  Kitchen k;
  PlanningRequest req{"greek", {{"tomato", "sliced"}, {"cucumber", "sliced"}, {"onion", "sliced"}, {"olive oil", "liquid"}},
                      "salad"};
  const auto names = req.ingredient_names();
  const auto sel = identify_goal_node(k.ws.foon, k.ws.table, k.ws.similarity, k.ws.kitchen, req);
  const auto reference = retrieve_reference_task_tree(k.ctx().retrieval(), sel.goal, names);
  const auto final_tree = construct_final_task_tree(k.ctx(), req);
  CHECK(task_tree_equals(final_tree, reference));
  CHECK(verbs(final_tree) == std::vector<std::string>{"slice", "add", "slice", "add", "slice", "add", "pour", "mix"});
  CHECK(final_tree.provenance.empty());
}

TEST_CASE("dropping an ingredient from a recipe") {
  Kitchen k;
  PlanningRequest req{"no-tomato", {{"cucumber", "sliced"}, {"onion", "sliced"}, {"olive oil", "liquid"}}, "salad"};
  const auto t = construct_final_task_tree(k.ctx(), req);
  CHECK(verbs(t) == std::vector<std::string>{"slice", "add", "slice", "add", "pour", "mix"});
  CHECK(object_node_equals(t.goal, make_object("salad", {"mixed"}, {"cucumber", "onion", "olive oil"})));
  CHECK(closure_violations(t, req, k.ws.kitchen).empty());
}

TEST_CASE("salad with prunes and carrot") {
  Kitchen k;
  PlanningRequest req{"prunes",
                      {{"lettuce", "chopped"}, {"tomato", "diced"}, {"carrot", "sliced"}, {"prunes", "whole"}},
                      "salad"};
  const auto t = construct_final_task_tree(k.ctx(), req);
  CHECK(verbs(t) == std::vector<std::string>{"chop", "slice", "add", "dice", "add", "mix"});
  REQUIRE(t.provenance.size() == 2);
  CHECK(t.provenance[0].original == "cucumber");
  CHECK(t.provenance[1].original == "raisin");
  CHECK(t.provenance[1].replacement == "prunes");
  CHECK(t.provenance[1].confidence == doctest::Approx(62.9).epsilon(1e-3));
  CHECK(object_node_equals(t.goal, make_object("salad", {"mixed"}, {"lettuce", "tomato", "carrot", "prunes"})));
  CHECK(is_executable(t.units, k.ws.kitchen));
  CHECK(closure_violations(t, req, k.ws.kitchen).empty());
}

TEST_CASE("closure violations are spelled out") {
  const PlanningRequest req{"r", {{"tomato", "sliced"}, {"basil", "chopped"}}, "salad"};
  const auto problems = closure_violations(small_salad(), req, small_kitchen());
  REQUIRE(problems.size() == 1);
  CHECK(problems[0].find("'basil' is missing") != std::string::npos);
  const PlanningRequest narrow{"r", {{"basil", "chopped"}}, "salad"};
  CHECK(closure_violations(small_salad(), narrow, small_kitchen()).size() == 2);
}

TEST_CASE("property: random requests give closed, complete, executable trees") {
  Kitchen k;
  std::mt19937 rng(77);
  for (int i = 0; i < 100; ++i) {
    const auto req = testing::random_kitchen_request(rng, "r" + std::to_string(i));
    TaskTree t;
    REQUIRE_NOTHROW(t = construct_final_task_tree(k.ctx(), req));
    CHECK(closure_violations(t, req, k.ws.kitchen).empty());
    CHECK(testing::oracle_executable(t.units, k.ws.kitchen.utensils(),
                                     {{"olive oil", "liquid"}, {"vinegar", "liquid"}, {"milk", "liquid"}, {"salt", "ground"}}));
    CHECK(t.units.size() <= 30);
    for (const auto& u : t.units) CHECK_MESSAGE(testing::tools_preserved(u, k.ws.foon, k.ws.kitchen), canonical_string(u));
  }
}
