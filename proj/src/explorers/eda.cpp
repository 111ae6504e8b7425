// Decomposition-based estimation of distribution: one univariate marginal
// model per Tchebycheff subproblem.

#include <algorithm>
#include <cmath>
#include <limits>

#include "search_context.hpp"

namespace soberdse::detail {

void run_eda(SearchContext& ctx) {
  constexpr std::size_t kSubproblems = 8;
  constexpr std::size_t kSamples = 8;
  constexpr double kLearningRate = 0.2;
  constexpr double kFloor = 1e-3;

  const std::size_t n = ctx.knob_count();
  using Marginals = std::vector<std::vector<double>>;
  std::vector<Marginals> model(kSubproblems);
  for (auto& m : model) {
    m.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      const auto card = static_cast<std::size_t>(ctx.cardinality(k));
      m[k].assign(card, 1.0 / static_cast<double>(card));
    }
  }
  std::vector<std::array<double, 2>> weights(kSubproblems);
  for (std::size_t j = 0; j < kSubproblems; ++j) {
    const double w = static_cast<double>(j) / static_cast<double>(kSubproblems - 1);
    weights[j] = {std::max(w, 0.01), std::max(1.0 - w, 0.01)};
  }
  std::vector<std::optional<Individual>> incumbent(kSubproblems);

  auto sample = [&](const Marginals& m) {
    Knobs knobs(n);
    for (std::size_t k = 0; k < n; ++k) {
      double u = ctx.rng().uniform();
      int level = static_cast<int>(m[k].size()) - 1;
      for (std::size_t l = 0; l < m[k].size(); ++l) {
        if (u < m[k][l]) {
          level = static_cast<int>(l);
          break;
        }
        u -= m[k][l];
      }
      knobs[k] = level;
    }
    return knobs;
  };

  while (!ctx.done()) {
    std::vector<std::vector<Individual>> offspring(kSubproblems);
    for (std::size_t j = 0; j < kSubproblems && !ctx.done(); ++j) {
      for (std::size_t s = 0; s < kSamples && !ctx.done(); ++s) {
        Knobs knobs = ctx.fresh_variant(sample(model[j]));
        auto obj = ctx.evaluate(knobs);
        if (!obj) break;
        offspring[j].push_back({std::move(knobs), *obj});
      }
    }
    // Normalize log objectives by the archive's observed range.
    std::array<double, 2> lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    std::array<double, 2> hi{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const auto& p : ctx.archive()) {
      const std::array<double, 2> v{std::log(p.obj().area()), std::log(p.obj().latency())};
      for (int i = 0; i < 2; ++i) {
        lo[i] = std::min(lo[i], v[i]);
        hi[i] = std::max(hi[i], v[i]);
      }
    }
    auto tchebycheff = [&](std::size_t j, const ObjectiveVector& o) {
      const std::array<double, 2> v{std::log(o.area()), std::log(o.latency())};
      double g = 0.0;
      for (int i = 0; i < 2; ++i) {
        const double range = std::max(hi[i] - lo[i], 1e-9);
        g = std::max(g, weights[j][static_cast<std::size_t>(i)] * (v[i] - lo[i]) / range);
      }
      return g;
    };
    for (std::size_t j = 0; j < kSubproblems; ++j) {
      std::optional<Individual> best = incumbent[j];
      for (auto& ind : offspring[j]) {
        if (!best || tchebycheff(j, ind.obj) < tchebycheff(j, best->obj)) best = ind;
      }
      if (!best) continue;
      incumbent[j] = best;
      for (std::size_t k = 0; k < n; ++k) {
        auto& row = model[j][k];
        double total = 0.0;
        for (std::size_t l = 0; l < row.size(); ++l) {
          const double target = static_cast<int>(l) == best->knobs[k] ? 1.0 : 0.0;
          row[l] = std::max(kFloor, (1.0 - kLearningRate) * row[l] + kLearningRate * target);
          total += row[l];
        }
        for (double& p : row) p /= total;
      }
    }
  }
}

}  // namespace soberdse::detail
