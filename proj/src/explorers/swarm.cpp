// Ant colony and particle swarm explorers.

#include <algorithm>
#include <cmath>

#include "search_context.hpp"

namespace soberdse::detail {

void run_aco(SearchContext& ctx) {
  constexpr int kAnts = 20;
  constexpr double kEvaporation = 0.1;
  constexpr double kTauMin = 0.05;
  constexpr double kTauMax = 10.0;

  const std::size_t n = ctx.knob_count();
  std::vector<std::vector<double>> tau(n);
  for (std::size_t k = 0; k < n; ++k) tau[k].assign(static_cast<std::size_t>(ctx.cardinality(k)), 1.0);

  auto sample_level = [&](std::size_t k) {
    double total = 0.0;
    for (double t : tau[k]) total += t;
    double u = ctx.rng().uniform() * total;
    for (std::size_t l = 0; l < tau[k].size(); ++l) {
      if (u < tau[k][l]) return static_cast<int>(l);
      u -= tau[k][l];
    }
    return static_cast<int>(tau[k].size() - 1);
  };

  while (!ctx.done()) {
    std::vector<Individual> ants;
    for (int a = 0; a < kAnts && !ctx.done(); ++a) {
      Knobs knobs(n);
      for (std::size_t k = 0; k < n; ++k) knobs[k] = sample_level(k);
      knobs = ctx.fresh_variant(std::move(knobs));
      auto obj = ctx.evaluate(knobs);
      if (!obj) break;
      ants.push_back({std::move(knobs), *obj});
    }
    for (auto& row : tau)
      for (double& t : row) t *= 1.0 - kEvaporation;
    for (const auto& ant : ants) {
      // rank = number of archive members dominating the ant's point
      std::size_t rank = 0;
      for (const auto& p : ctx.archive())
        if (dominates(p.obj(), ant.obj)) ++rank;
      const double deposit = 1.0 / (1.0 + static_cast<double>(rank));
      for (std::size_t k = 0; k < n; ++k) tau[k][static_cast<std::size_t>(ant.knobs[k])] += deposit;
    }
    for (auto& row : tau)
      for (double& t : row) t = std::clamp(t, kTauMin, kTauMax);
  }
}

void run_pso(SearchContext& ctx) {
  constexpr std::size_t kParticles = 30;
  constexpr double kInertia = 0.7;
  constexpr double kCognitive = 1.5;
  constexpr double kSocial = 1.5;

  const std::size_t n = ctx.knob_count();
  struct Particle {
    std::vector<double> x, v;
    Knobs best;
    ObjectiveVector best_obj{0.0, 0.0};
  };
  auto to_knobs = [&](const std::vector<double>& x) {
    Knobs knobs(n);
    for (std::size_t k = 0; k < n; ++k)
      knobs[k] = std::clamp(static_cast<int>(std::lround(x[k])), 0, ctx.cardinality(k) - 1);
    return knobs;
  };

  std::vector<Particle> swarm;
  for (std::size_t i = 0; i < kParticles && !ctx.done(); ++i) {
    Particle p;
    for (std::size_t k = 0; k < n; ++k) {
      const double span = ctx.cardinality(k) - 1;
      p.x.push_back(ctx.rng().uniform(0.0, span));
      p.v.push_back(ctx.rng().uniform(-0.25, 0.25) * span);
    }
    Knobs knobs = ctx.fresh_variant(to_knobs(p.x));
    auto obj = ctx.evaluate(knobs);
    if (!obj) return;
    p.best = std::move(knobs);
    p.best_obj = *obj;
    swarm.push_back(std::move(p));
  }

  while (!ctx.done()) {
    // Leaders: front members, least crowded first via binary tournament.
    const std::vector<std::size_t> front = ctx.front();
    std::vector<ObjectiveVector> front_objs;
    for (std::size_t idx : front) front_objs.push_back(ctx.archive()[idx].obj());
    std::vector<std::size_t> all(front.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    const std::vector<double> crowd = crowding_distance(front_objs, all);

    for (auto& p : swarm) {
      if (ctx.done()) break;
      const std::size_t a = ctx.rng().below(front.size());
      const std::size_t b = ctx.rng().below(front.size());
      const std::size_t leader_pos = crowd[a] > crowd[b] ? a : (crowd[b] > crowd[a] ? b : std::min(a, b));
      const Knobs& leader = ctx.archive()[front[leader_pos]].knobs;
      for (std::size_t k = 0; k < n; ++k) {
        const double span = ctx.cardinality(k) - 1;
        const double r1 = ctx.rng().uniform();
        const double r2 = ctx.rng().uniform();
        p.v[k] = kInertia * p.v[k] + kCognitive * r1 * (p.best[k] - p.x[k]) + kSocial * r2 * (leader[k] - p.x[k]);
        p.v[k] = std::clamp(p.v[k], -0.5 * span, 0.5 * span);
        p.x[k] = std::clamp(p.x[k] + p.v[k], 0.0, span);
      }
      Knobs knobs = ctx.fresh_variant(to_knobs(p.x));
      auto obj = ctx.evaluate(knobs);
      if (!obj) return;
      if (dominates(*obj, p.best_obj) || (!dominates(p.best_obj, *obj) && ctx.rng().bernoulli(0.5))) {
        p.best = std::move(knobs);
        p.best_obj = *obj;
      }
    }
  }
}

}  // namespace soberdse::detail
