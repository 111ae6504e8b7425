// NSGA-II and the Q-learning operator-selection variant built on its skeleton.

#include <algorithm>
#include <array>

#include "search_context.hpp"

namespace soberdse::detail {

namespace {

constexpr std::size_t kPopulation = 40;
constexpr double kCrossoverRate = 0.9;

struct Ranked {
  std::vector<int> rank;
  std::vector<double> crowding;
};

Ranked rank_population(const std::vector<Individual>& pop) {
  std::vector<ObjectiveVector> objs;
  for (const auto& ind : pop) objs.push_back(ind.obj);
  Ranked r;
  r.rank = nondominated_ranks(objs);
  r.crowding.assign(pop.size(), 0.0);
  const int max_rank = r.rank.empty() ? -1 : *std::max_element(r.rank.begin(), r.rank.end());
  for (int level = 0; level <= max_rank; ++level) {
    std::vector<std::size_t> layer;
    for (std::size_t i = 0; i < pop.size(); ++i)
      if (r.rank[i] == level) layer.push_back(i);
    const auto cd = crowding_distance(objs, layer);
    for (std::size_t j = 0; j < layer.size(); ++j) r.crowding[layer[j]] = cd[j];
  }
  return r;
}

std::vector<Individual> initial_population(SearchContext& ctx) {
  std::vector<Individual> pop;
  while (pop.size() < kPopulation && !ctx.done()) {
    Knobs knobs = ctx.fresh_variant(ctx.random_knobs());
    auto obj = ctx.evaluate(knobs);
    if (!obj) break;
    pop.push_back({std::move(knobs), *obj});
  }
  return pop;
}

Knobs uniform_crossover(SearchContext& ctx, const Knobs& a, const Knobs& b) {
  Knobs child = a;
  for (std::size_t k = 0; k < child.size(); ++k)
    if (ctx.rng().bernoulli(0.5)) child[k] = b[k];
  return child;
}

void mutate_knob(SearchContext& ctx, Knobs& knobs, std::size_t k) {
  const int card = ctx.cardinality(k);
  knobs[k] = (knobs[k] + 1 + static_cast<int>(ctx.rng().below(static_cast<std::size_t>(card - 1)))) % card;
}

void mutate_knobs(SearchContext& ctx, Knobs& knobs, std::size_t count) {
  std::vector<std::size_t> order(knobs.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  ctx.rng().shuffle(order.begin(), order.end());
  for (std::size_t i = 0; i < std::min(count, order.size()); ++i) mutate_knob(ctx, knobs, order[i]);
}

enum class Operator { crossover = 0, mutate_one, mutate_two, restart };
constexpr std::size_t kOperatorCount = 4;

}  // namespace

void run_nsga2(SearchContext& ctx) {
  std::vector<Individual> pop = initial_population(ctx);
  const double mutation_rate = 1.0 / static_cast<double>(ctx.knob_count());
  while (!ctx.done() && !pop.empty()) {
    const Ranked ranked = rank_population(pop);
    std::vector<Individual> pool = pop;
    for (std::size_t i = 0; i < kPopulation && !ctx.done(); ++i) {
      const auto& p1 = pop[tournament(ctx.rng(), ranked.rank, ranked.crowding)];
      const auto& p2 = pop[tournament(ctx.rng(), ranked.rank, ranked.crowding)];
      Knobs child = ctx.rng().bernoulli(kCrossoverRate) ? uniform_crossover(ctx, p1.knobs, p2.knobs) : p1.knobs;
      for (std::size_t k = 0; k < child.size(); ++k)
        if (ctx.rng().bernoulli(mutation_rate)) mutate_knob(ctx, child, k);
      child = ctx.fresh_variant(std::move(child));
      auto obj = ctx.evaluate(child);
      if (!obj) break;
      pool.push_back({std::move(child), *obj});
    }
    pop = select_survivors(std::move(pool), kPopulation);
  }
}

void run_qlmoea(SearchContext& ctx) {
  constexpr double kAlpha = 0.1;
  constexpr double kGamma = 0.9;
  constexpr double kEpsilon = 0.1;
  // state = progress decile x front-growth sign (shrank, same, grew)
  std::array<std::array<std::array<double, kOperatorCount>, 3>, 10> q{};

  std::vector<Individual> pop = initial_population(ctx);
  auto decile = [&] { return std::min<std::size_t>(9, static_cast<std::size_t>(ctx.progress() * 10.0)); };
  std::size_t growth = 1;
  while (!ctx.done() && !pop.empty()) {
    const std::size_t state_decile = decile();
    const std::size_t state_growth = growth;
    auto& row = q[state_decile][state_growth];
    std::size_t op = 0;
    if (ctx.rng().bernoulli(kEpsilon)) {
      op = ctx.rng().below(kOperatorCount);
    } else {
      op = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
    }

    const std::size_t front_before = ctx.front().size();
    const std::uint64_t inserts_before = ctx.front_insertions();
    const Ranked ranked = rank_population(pop);
    std::vector<Individual> pool = pop;
    for (std::size_t i = 0; i < kPopulation && !ctx.done(); ++i) {
      const auto& p1 = pop[tournament(ctx.rng(), ranked.rank, ranked.crowding)];
      Knobs child;
      switch (static_cast<Operator>(op)) {
        case Operator::crossover: {
          const auto& p2 = pop[tournament(ctx.rng(), ranked.rank, ranked.crowding)];
          child = uniform_crossover(ctx, p1.knobs, p2.knobs);
          break;
        }
        case Operator::mutate_one:
          child = p1.knobs;
          mutate_knobs(ctx, child, 1);
          break;
        case Operator::mutate_two:
          child = p1.knobs;
          mutate_knobs(ctx, child, 2);
          break;
        case Operator::restart:
          child = ctx.random_knobs();
          break;
      }
      child = ctx.fresh_variant(std::move(child));
      auto obj = ctx.evaluate(child);
      if (!obj) break;
      pool.push_back({std::move(child), *obj});
    }
    pop = select_survivors(std::move(pool), kPopulation);

    const std::size_t front_after = ctx.front().size();
    growth = front_after < front_before ? 0 : (front_after == front_before ? 1 : 2);
    const double reward =
        static_cast<double>(ctx.front_insertions() - inserts_before) / static_cast<double>(kPopulation);
    const auto& next_row = q[decile()][growth];
    const double target = reward + kGamma * *std::max_element(next_row.begin(), next_row.end());
    row[op] += kAlpha * (target - row[op]);
  }
}

}  // namespace soberdse::detail
