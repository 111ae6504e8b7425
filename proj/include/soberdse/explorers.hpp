#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "soberdse/benchmark.hpp"
#include "soberdse/pareto.hpp"
#include "soberdse/surrogate.hpp"

namespace soberdse {

/// Portfolio members. The integer codes are the dataset's label space.
enum class ExplorerId { nsga2 = 0, sa, aco, pso, lattice, sbo, eda, ac, pg, qlmoea };

inline constexpr std::size_t kExplorerCount = 10;
inline constexpr std::array<ExplorerId, kExplorerCount> kAllExplorers = {
    ExplorerId::nsga2, ExplorerId::sa,  ExplorerId::aco, ExplorerId::pso, ExplorerId::lattice,
    ExplorerId::sbo,   ExplorerId::eda, ExplorerId::ac,  ExplorerId::pg,  ExplorerId::qlmoea};

constexpr int code(ExplorerId id) noexcept { return static_cast<int>(id); }
/// Throws std::invalid_argument for codes outside [0, 9].
ExplorerId explorer_from_code(int code);
std::string_view to_string(ExplorerId id) noexcept;
ExplorerId parse_explorer(std::string_view name);

struct Budget {
  std::uint64_t max_evaluations = 500;
  std::optional<double> max_wall_seconds;
  /// Evaluate the whole space when it fits in the budget.
  bool exhaustive_fallback = true;

  void validate() const;
};

struct ExplorationResult {
  ExplorerId explorer = ExplorerId::nsga2;
  std::string benchmark_id;
  std::vector<DesignPoint> evaluated;  // in evaluation order, no repeats
  ParetoFront front;
  std::optional<double> adrs;
  std::uint64_t evaluations_used = 0;
  double wall_seconds = 0.0;

  /// Equality on everything except wall time.
  bool same_outcome(const ExplorationResult& other) const;
};

/// Invoked on every surrogate call an explorer makes (memo hits excluded).
using EvaluationObserver = std::function<void(const Knobs&)>;

/// Runs one explorer. Deterministic in (explorer, instance, budget, seed);
/// never makes more than budget.max_evaluations surrogate calls.
ExplorationResult explore(ExplorerId explorer, const BenchmarkInstance& instance, const SurrogateModel& model,
                          const Budget& budget, std::uint64_t seed, const EvaluationObserver& observer = {});

std::uint64_t explorer_seed(std::uint64_t master_seed, ExplorerId explorer) noexcept;

/// Front of all points the results evaluated, or the exhaustive front when
/// the space has at most `exhaustive_limit` points.
ParetoFront reference_front(std::span<const ExplorationResult> results, const SurrogateModel& model,
                            std::uint64_t exhaustive_limit = kDefaultExhaustiveLimit);

/// Index of the minimum; ties go to the lowest code.
ExplorerId argmin_explorer(std::span<const double> adrs_row);

struct PortfolioOptions {
  std::uint64_t exhaustive_limit = kDefaultExhaustiveLimit;
  unsigned workers = 1;
};

struct PortfolioResult {
  std::vector<ExplorationResult> results;  // indexed by explorer code
  ParetoFront reference;
  bool exhaustive_reference = false;
  std::array<double, kExplorerCount> adrs{};
  ExplorerId best = ExplorerId::nsga2;
};

/// Runs every explorer with seeds derived from `master_seed`, builds the
/// reference front and fills each result's ADRS. Explorer failures are
/// rethrown as std::runtime_error naming the explorer.
PortfolioResult run_portfolio(const BenchmarkInstance& instance, const SurrogateModel& model, const Budget& budget,
                              std::uint64_t master_seed, const PortfolioOptions& options = {});

/// Reference front, ADRS and argmin for ten results indexed by explorer code.
PortfolioResult assemble_portfolio(const SurrogateModel& model, std::vector<ExplorationResult> results,
                                   std::uint64_t exhaustive_limit = kDefaultExhaustiveLimit);

/// Runs `task(i)` for i in [0, count) on up to `workers` threads.
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& task);

}  // namespace soberdse
