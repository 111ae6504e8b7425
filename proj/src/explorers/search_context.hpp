#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "soberdse/explorers.hpp"
#include "soberdse/rng.hpp"

namespace soberdse::detail {

/// Shared explorer state: memoized, budget-counting evaluation plus the
/// archive of everything evaluated and its running non-dominated subset.
class SearchContext {
 public:
  SearchContext(const SurrogateModel& model, const Budget& budget, std::uint64_t seed,
                const EvaluationObserver& observer);

  /// Memoized evaluation. Returns nullopt only when the point is new and the
  /// budget (or wall clock) is spent.
  std::optional<ObjectiveVector> evaluate(const Knobs& knobs);

  /// Budget spent, space exhausted, or the explorer keeps proposing repeats.
  bool done() const;

  bool seen(const Knobs& knobs) const { return memo_.contains(index_of(knobs)); }

  Rng& rng() noexcept { return rng_; }
  const KnobSchema& schema() const noexcept { return model_.schema(); }
  std::size_t knob_count() const noexcept { return model_.schema().size(); }
  int cardinality(std::size_t k) const noexcept { return model_.schema().knobs[k].cardinality(); }
  std::uint64_t space_size() const noexcept { return space_size_; }

  std::uint64_t evaluations_used() const noexcept { return used_; }
  std::uint64_t max_evaluations() const noexcept { return budget_.max_evaluations; }
  double progress() const noexcept {
    return static_cast<double>(used_) / static_cast<double>(budget_.max_evaluations);
  }

  const std::vector<DesignPoint>& archive() const noexcept { return archive_; }
  /// Archive indices of the current non-dominated set.
  const std::vector<std::size_t>& front() const noexcept { return front_; }
  std::vector<ObjectiveVector> front_objectives() const;
  std::uint64_t front_insertions() const noexcept { return front_insertions_; }

  Knobs random_knobs();
  /// Unvisited point near `knobs`: the point itself if new, otherwise up to
  /// `tries` random single-knob mutations. Falls back to the input.
  Knobs fresh_variant(Knobs knobs, int tries = 10);
  /// All +-1 single-knob steps that stay inside the schema.
  std::vector<Knobs> neighbors(const Knobs& knobs) const;

  std::uint64_t index_of(const Knobs& knobs) const;

 private:
  void update_front(std::size_t archive_index);

  const SurrogateModel& model_;
  Budget budget_;
  Rng rng_;
  const EvaluationObserver& observer_;
  std::uint64_t space_size_;
  std::uint64_t used_ = 0;
  std::uint64_t consecutive_repeats_ = 0;
  std::uint64_t front_insertions_ = 0;
  bool out_of_time_ = false;
  std::chrono::steady_clock::time_point start_;
  std::unordered_map<std::uint64_t, std::size_t> memo_;
  std::vector<DesignPoint> archive_;
  std::vector<std::size_t> front_;
};

/// Non-domination rank per objective vector (0 = first front).
std::vector<int> nondominated_ranks(const std::vector<ObjectiveVector>& objs);

/// Crowding distance of each member within the given subset (indices into objs).
std::vector<double> crowding_distance(const std::vector<ObjectiveVector>& objs,
                                      const std::vector<std::size_t>& subset);

/// Smallest relative excess of `candidate` over any front member; 0 when it
/// weakly dominates one of them. Returns 0 for an empty front.
double excess_over_front(const std::vector<ObjectiveVector>& front, const ObjectiveVector& candidate);

struct Individual {
  Knobs knobs;
  ObjectiveVector obj;
};

/// NSGA-II environmental selection: keep `count` members by (rank, crowding).
std::vector<Individual> select_survivors(std::vector<Individual> pool, std::size_t count);

/// Binary tournament on (rank, crowding) over a ranked population.
std::size_t tournament(Rng& rng, const std::vector<int>& rank, const std::vector<double>& crowding);

void run_nsga2(SearchContext& ctx);
void run_sa(SearchContext& ctx);
void run_aco(SearchContext& ctx);
void run_pso(SearchContext& ctx);
void run_lattice(SearchContext& ctx);
void run_sbo(SearchContext& ctx);
void run_eda(SearchContext& ctx);
void run_policy_search(SearchContext& ctx, bool with_baseline);
void run_qlmoea(SearchContext& ctx);

}  // namespace soberdse::detail
