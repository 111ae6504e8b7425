// Table-based policy-gradient construction of knob vectors. The actor-critic
// variant subtracts a learned per-knob baseline from the reward.

#include <algorithm>
#include <cmath>

#include "search_context.hpp"

namespace soberdse::detail {

void run_policy_search(SearchContext& ctx, bool with_baseline) {
  constexpr double kLearningRate = 0.05;
  constexpr double kEpsilon = 0.1;

  const std::size_t n = ctx.knob_count();
  std::vector<std::vector<double>> theta(n);
  for (std::size_t k = 0; k < n; ++k) theta[k].assign(static_cast<std::size_t>(ctx.cardinality(k)), 0.0);
  std::vector<double> baseline(n, 0.0);
  std::vector<std::vector<double>> pi(n);

  while (!ctx.done()) {
    Knobs knobs(n);
    for (std::size_t k = 0; k < n; ++k) {
      const auto& row = theta[k];
      const double top = *std::max_element(row.begin(), row.end());
      pi[k].resize(row.size());
      double total = 0.0;
      for (std::size_t l = 0; l < row.size(); ++l) {
        pi[k][l] = std::exp(row[l] - top);
        total += pi[k][l];
      }
      for (double& p : pi[k]) p /= total;
      if (ctx.rng().bernoulli(kEpsilon)) {
        knobs[k] = static_cast<int>(ctx.rng().below(row.size()));
      } else {
        double u = ctx.rng().uniform();
        int level = static_cast<int>(row.size()) - 1;
        for (std::size_t l = 0; l < row.size(); ++l) {
          if (u < pi[k][l]) {
            level = static_cast<int>(l);
            break;
          }
          u -= pi[k][l];
        }
        knobs[k] = level;
      }
    }
    const std::vector<ObjectiveVector> front = ctx.front_objectives();
    auto obj = ctx.evaluate(knobs);
    if (!obj) break;
    const double reward = -excess_over_front(front, *obj);
    for (std::size_t k = 0; k < n; ++k) {
      double advantage = reward;
      if (with_baseline) {
        advantage = reward - baseline[k];
        baseline[k] += kLearningRate * (reward - baseline[k]);
      }
      for (std::size_t l = 0; l < theta[k].size(); ++l) {
        const double indicator = static_cast<int>(l) == knobs[k] ? 1.0 : 0.0;
        theta[k][l] += kLearningRate * advantage * (indicator - pi[k][l]);
      }
    }
  }
}

}  // namespace soberdse::detail
