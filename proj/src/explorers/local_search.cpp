#include <cmath>

#include "search_context.hpp"

namespace soberdse::detail {

void run_sa(SearchContext& ctx) {
  constexpr double kInitialTemperature = 1.0;
  constexpr double kCooling = 0.995;
  constexpr int kWeightPeriod = 50;

  Knobs current = ctx.random_knobs();
  auto current_obj = ctx.evaluate(current);
  if (!current_obj) return;
  double temperature = kInitialTemperature;
  double weight = 0.5;
  auto scalarize = [&](const ObjectiveVector& o) {
    return weight * std::log(o.area()) + (1.0 - weight) * std::log(o.latency());
  };

  for (long step = 0; !ctx.done(); ++step) {
    if (step % kWeightPeriod == 0) weight = ctx.rng().uniform();
    Knobs candidate = current;
    const std::size_t k = ctx.rng().below(ctx.knob_count());
    int dir = ctx.rng().bernoulli(0.5) ? 1 : -1;
    if (candidate[k] + dir < 0 || candidate[k] + dir >= ctx.cardinality(k)) dir = -dir;
    candidate[k] += dir;
    auto obj = ctx.evaluate(candidate);
    if (!obj) break;
    const double delta = scalarize(*obj) - scalarize(*current_obj);
    if (delta <= 0.0 || ctx.rng().uniform() < std::exp(-delta / temperature)) {
      current = std::move(candidate);
      current_obj = obj;
    }
    temperature *= kCooling;
  }
}

void run_lattice(SearchContext& ctx) {
  constexpr double kRandomJump = 0.15;

  auto random_step = [&] {
    Knobs knobs = ctx.fresh_variant(ctx.random_knobs());
    return ctx.evaluate(knobs).has_value();
  };
  if (!random_step()) return;

  while (!ctx.done()) {
    if (ctx.rng().bernoulli(kRandomJump)) {
      if (!random_step()) break;
      continue;
    }
    // Pareto-neighbor selection: visit an unexplored lattice neighbor of a
    // randomly ordered front member.
    std::vector<std::size_t> members = ctx.front();
    ctx.rng().shuffle(members.begin(), members.end());
    bool stepped = false;
    for (std::size_t idx : members) {
      std::vector<Knobs> fresh;
      for (auto& n : ctx.neighbors(ctx.archive()[idx].knobs))
        if (!ctx.seen(n)) fresh.push_back(std::move(n));
      if (fresh.empty()) continue;
      if (!ctx.evaluate(fresh[ctx.rng().below(fresh.size())])) return;
      stepped = true;
      break;
    }
    if (!stepped && !random_step()) break;
  }
}

}  // namespace soberdse::detail
