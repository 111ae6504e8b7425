#include <algorithm>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "soberdse/explorers.hpp"

using namespace soberdse;

namespace {

BenchmarkInstance tiny_instance(int knobs, int levels, Family family = Family::rugged) {
  BenchmarkInstance inst = synth_instance(family, 9, SizeClass::small);
  inst.id = "tiny";
  inst.schema.knobs.clear();
  for (int k = 0; k < knobs; ++k) {
    Knob knob{"k" + std::to_string(k), KnobKind::unroll, {}};
    for (int l = 0; l < levels; ++l) knob.levels.push_back(l + 1);
    inst.schema.knobs.push_back(knob);
  }
  return inst;
}

Budget budget_of(std::uint64_t n) {
  Budget b;
  b.max_evaluations = n;
  return b;
}

}  // namespace

TEST_SUITE("explorers") {

TEST_CASE("explorer codes and names") {
  for (ExplorerId id : kAllExplorers) {
    CHECK(explorer_from_code(code(id)) == id);
    CHECK(parse_explorer(to_string(id)) == id);
  }
  CHECK_THROWS_AS(explorer_from_code(10), std::invalid_argument);
  CHECK_THROWS_AS(explorer_from_code(-1), std::invalid_argument);
  CHECK_THROWS_AS(parse_explorer("GREEDY"), std::invalid_argument);
  CHECK_THROWS_AS(budget_of(0).validate(), std::invalid_argument);
}

TEST_CASE("saturated small space gives zero ADRS for every explorer") {
  const auto inst = tiny_instance(3, 4);
  const SurrogateModel m(inst);
  const auto exact = exhaustive_front(m, inst.schema);
  for (ExplorerId id : kAllExplorers) {
    const auto r = explore(id, inst, m, budget_of(64), 1);
    CAPTURE(to_string(id));
    CHECK(adrs(exact, r.front) == 0.0);
  }
  const auto p = run_portfolio(inst, m, budget_of(64), 0);
  for (double a : p.adrs) CHECK(a == 0.0);
  CHECK(p.best == ExplorerId::nsga2);
  CHECK(p.exhaustive_reference);
}

TEST_CASE("budget of one") {
  const auto inst = synth_instance(Family::smooth, 0, SizeClass::medium);
  const SurrogateModel m(inst);
  for (ExplorerId id : kAllExplorers) {
    const auto r = explore(id, inst, m, budget_of(1), 3);
    CAPTURE(to_string(id));
    REQUIRE(r.evaluated.size() == 1);
    CHECK(r.evaluations_used == 1);
    REQUIRE(r.front.size() == 1);
    CHECK(r.front.points()[0] == r.evaluated[0]);
  }
}

TEST_CASE("explorers are deterministic and respect the budget") {
  Rng rng(21);
  for (ExplorerId id : kAllExplorers) {
    const Family fam = kAllFamilies[rng.below(kAllFamilies.size())];
    const auto inst = synth_instance(fam, rng.below(50), SizeClass::medium);
    const SurrogateModel m(inst);
    const std::uint64_t budget = 1 + rng.below(400);
    std::uint64_t calls = 0;
    const auto a = explore(id, inst, m, budget_of(budget), 7, [&](const Knobs&) { ++calls; });
    const auto b = explore(id, inst, m, budget_of(budget), 7);
    CAPTURE(to_string(id));
    CHECK(a.same_outcome(b));
    CHECK(calls <= budget);
    CHECK(a.evaluations_used == calls);
    CHECK(a.evaluated.size() == calls);
    CHECK(a.explorer == id);
    CHECK(a.benchmark_id == inst.id);

    std::set<Knobs> seen;
    for (const auto& p : a.evaluated) {
      CHECK(seen.insert(p.knobs).second);
      REQUIRE(p.knobs.size() == inst.schema.size());
      for (std::size_t k = 0; k < p.knobs.size(); ++k) {
        CHECK(p.knobs[k] >= 0);
        CHECK(p.knobs[k] < inst.schema.knobs[k].cardinality());
      }
      CHECK(p.obj() == m.evaluate(p.knobs));
    }
    CHECK(a.front.points() == oracle::brute_front(a.evaluated));
  }
}

TEST_CASE("reference front over results covering a 16-point space") {
  const auto inst = tiny_instance(2, 4);
  const SurrogateModel m(inst);
  const auto all = oracle::all_knobs(inst.schema);
  std::vector<ExplorationResult> results(2);
  std::vector<DesignPoint> every;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const DesignPoint p{all[i], m.evaluate(all[i])};
    results[i < 8 ? 0 : 1].evaluated.push_back(p);
    every.push_back(p);
  }
  CHECK(reference_front(results, m, 16).points() == oracle::brute_front(every));
  CHECK(reference_front(results, m, 0).points() == oracle::brute_front(every));
  CHECK(reference_front(results, m, 16) == exhaustive_front(m, inst.schema));
}

TEST_CASE("argmin ties go to the lowest code") {
  CHECK(argmin_explorer(std::array<double, 10>{0.3, 0.1, 0.2, 0.1, 0.5, 0.1, 1, 1, 1, 1}) == ExplorerId::sa);
  CHECK(argmin_explorer(std::array<double, 10>{}) == ExplorerId::nsga2);
}

TEST_CASE("portfolio is independent of worker count") {
  const auto inst = synth_instance(Family::clustered, 1, SizeClass::medium);
  const SurrogateModel m(inst);
  PortfolioOptions one;
  PortfolioOptions four;
  four.workers = 4;
  const auto a = run_portfolio(inst, m, budget_of(200), 5, one);
  const auto b = run_portfolio(inst, m, budget_of(200), 5, four);
  CHECK(a.adrs == b.adrs);
  CHECK(a.best == b.best);
  CHECK(a.reference == b.reference);
  for (std::size_t i = 0; i < kExplorerCount; ++i) {
    CHECK(a.results[i].same_outcome(b.results[i]));
    const auto solo = explore(kAllExplorers[i], inst, m, budget_of(200), explorer_seed(5, kAllExplorers[i]));
    CHECK(solo.evaluated == a.results[i].evaluated);
    CHECK(solo.front == a.results[i].front);
  }
}

TEST_CASE("deceptive instance spreads the explorers") {
  const auto inst = synth_instance(Family::deceptive, 0, SizeClass::medium);
  const auto p = run_portfolio(inst, SurrogateModel(inst), budget_of(500), 0);
  auto sorted = p.adrs;
  std::sort(sorted.begin(), sorted.end());
  const double median = 0.5 * (sorted[4] + sorted[5]);
  CHECK(p.adrs[static_cast<std::size_t>(code(p.best))] < median);
}

TEST_CASE("parallel_for visits every index once") {
  std::vector<int> hits(100, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { ++hits[i]; });
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  CHECK_THROWS(parallel_for(10, 3, [](std::size_t i) {
    if (i == 7) throw std::runtime_error("boom");
  }));
}

}  // TEST_SUITE
