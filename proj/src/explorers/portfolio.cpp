#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

#include "search_context.hpp"

namespace soberdse {

namespace {

constexpr std::array<std::string_view, kExplorerCount> kExplorerNames = {
    "NSGA2", "SA", "ACO", "PSO", "LATTICE", "SBO", "EDA", "AC", "PG", "QLMOEA"};

}  // namespace

ExplorerId explorer_from_code(int c) {
  if (c < 0 || c >= static_cast<int>(kExplorerCount)) {
    throw std::invalid_argument("unknown explorer code " + std::to_string(c));
  }
  return static_cast<ExplorerId>(c);
}

std::string_view to_string(ExplorerId id) noexcept {
  const int c = code(id);
  return c >= 0 && c < static_cast<int>(kExplorerCount) ? kExplorerNames[static_cast<std::size_t>(c)] : "?";
}

ExplorerId parse_explorer(std::string_view name) {
  for (std::size_t i = 0; i < kExplorerCount; ++i) {
    std::string lower(kExplorerNames[i]);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (name == kExplorerNames[i] || name == lower) return static_cast<ExplorerId>(i);
  }
  throw std::invalid_argument("unknown explorer: " + std::string(name));
}

void Budget::validate() const {
  if (max_evaluations < 1) throw std::invalid_argument("budget must allow at least one evaluation");
  if (max_wall_seconds && !(*max_wall_seconds > 0.0)) {
    throw std::invalid_argument("wall-clock budget must be positive");
  }
}

bool ExplorationResult::same_outcome(const ExplorationResult& other) const {
  return explorer == other.explorer && benchmark_id == other.benchmark_id && evaluated == other.evaluated &&
         front == other.front && adrs == other.adrs && evaluations_used == other.evaluations_used;
}

ExplorationResult explore(ExplorerId explorer, const BenchmarkInstance& instance, const SurrogateModel& model,
                          const Budget& budget, std::uint64_t seed, const EvaluationObserver& observer) {
  budget.validate();
  explorer_from_code(code(explorer));
  if (!(instance.schema == model.schema())) {
    throw std::invalid_argument("instance " + instance.id + " does not match its surrogate model");
  }
  const auto start = std::chrono::steady_clock::now();
  detail::SearchContext ctx(model, budget, seed, observer);

  if (budget.exhaustive_fallback && ctx.space_size() <= budget.max_evaluations) {
    for (std::uint64_t i = 0; i < ctx.space_size(); ++i) ctx.evaluate(knobs_at(model.schema(), i));
  } else {
    switch (explorer) {
      case ExplorerId::nsga2: detail::run_nsga2(ctx); break;
      case ExplorerId::sa: detail::run_sa(ctx); break;
      case ExplorerId::aco: detail::run_aco(ctx); break;
      case ExplorerId::pso: detail::run_pso(ctx); break;
      case ExplorerId::lattice: detail::run_lattice(ctx); break;
      case ExplorerId::sbo: detail::run_sbo(ctx); break;
      case ExplorerId::eda: detail::run_eda(ctx); break;
      case ExplorerId::ac: detail::run_policy_search(ctx, true); break;
      case ExplorerId::pg: detail::run_policy_search(ctx, false); break;
      case ExplorerId::qlmoea: detail::run_qlmoea(ctx); break;
    }
  }

  ExplorationResult result;
  result.explorer = explorer;
  result.benchmark_id = instance.id;
  result.evaluated = ctx.archive();
  result.front = pareto_filter(result.evaluated);
  result.evaluations_used = ctx.evaluations_used();
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

std::uint64_t explorer_seed(std::uint64_t master_seed, ExplorerId explorer) noexcept {
  return hash_seeds({master_seed, static_cast<std::uint64_t>(code(explorer))});
}

ParetoFront reference_front(std::span<const ExplorationResult> results, const SurrogateModel& model,
                            std::uint64_t exhaustive_limit) {
  if (model.schema().space_size() <= exhaustive_limit) return exhaustive_front(model, model.schema(), exhaustive_limit);
  std::vector<std::vector<DesignPoint>> sets;
  for (const auto& r : results) sets.push_back(r.evaluated);
  return reference_front(std::span<const std::vector<DesignPoint>>(sets));
}

ExplorerId argmin_explorer(std::span<const double> adrs_row) {
  if (adrs_row.size() != kExplorerCount) throw std::invalid_argument("ADRS row must have one entry per explorer");
  std::size_t best = 0;
  for (std::size_t i = 1; i < adrs_row.size(); ++i)
    if (adrs_row[i] < adrs_row[best]) best = i;
  return static_cast<ExplorerId>(best);
}

void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& task) {
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> pool;
  const unsigned n = std::min<unsigned>(workers, static_cast<unsigned>(count));
  for (unsigned w = 0; w < n; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

PortfolioResult run_portfolio(const BenchmarkInstance& instance, const SurrogateModel& model, const Budget& budget,
                              std::uint64_t master_seed, const PortfolioOptions& options) {
  std::vector<ExplorationResult> results(kExplorerCount);
  parallel_for(kExplorerCount, options.workers, [&](std::size_t i) {
    const ExplorerId id = kAllExplorers[i];
    try {
      results[i] = explore(id, instance, model, budget, explorer_seed(master_seed, id));
    } catch (const std::exception& e) {
      throw std::runtime_error("explorer " + std::string(to_string(id)) + " failed on " + instance.id + ": " +
                               e.what());
    }
  });
  return assemble_portfolio(model, std::move(results), options.exhaustive_limit);
}

PortfolioResult assemble_portfolio(const SurrogateModel& model, std::vector<ExplorationResult> results,
                                   std::uint64_t exhaustive_limit) {
  if (results.size() != kExplorerCount) throw std::invalid_argument("a portfolio needs one result per explorer");
  PortfolioResult out;
  out.results = std::move(results);
  out.exhaustive_reference = model.schema().space_size() <= exhaustive_limit;
  out.reference = reference_front(out.results, model, exhaustive_limit);
  for (std::size_t i = 0; i < kExplorerCount; ++i) {
    out.results[i].adrs = adrs(out.reference, out.results[i].front);
    out.adrs[i] = *out.results[i].adrs;
  }
  out.best = argmin_explorer(out.adrs);
  return out;
}

}  // namespace soberdse
