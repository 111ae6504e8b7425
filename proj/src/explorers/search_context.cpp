#include "search_context.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace soberdse::detail {

namespace {
// Consecutive memo hits after which an explorer is considered converged.
constexpr std::uint64_t kStallLimit = 5000;
}  // namespace

SearchContext::SearchContext(const SurrogateModel& model, const Budget& budget, std::uint64_t seed,
                             const EvaluationObserver& observer)
    : model_(model),
      budget_(budget),
      rng_(seed),
      observer_(observer),
      space_size_(model.schema().space_size()),
      start_(std::chrono::steady_clock::now()) {}

std::uint64_t SearchContext::index_of(const Knobs& knobs) const {
  std::uint64_t index = 0;
  const auto& knobs_schema = model_.schema().knobs;
  for (std::size_t k = 0; k < knobs.size(); ++k) {
    index = index * static_cast<std::uint64_t>(knobs_schema[k].cardinality()) + static_cast<std::uint64_t>(knobs[k]);
  }
  return index;
}

std::optional<ObjectiveVector> SearchContext::evaluate(const Knobs& knobs) {
  if (knobs.size() != knob_count()) {
    throw std::invalid_argument("proposal has " + std::to_string(knobs.size()) + " knobs, schema has " +
                                std::to_string(knob_count()));
  }
  for (std::size_t k = 0; k < knobs.size(); ++k) {
    if (knobs[k] < 0 || knobs[k] >= cardinality(k)) {
      throw std::invalid_argument("proposal knob " + std::to_string(k) + " out of range");
    }
  }
  const std::uint64_t key = index_of(knobs);
  if (auto it = memo_.find(key); it != memo_.end()) {
    ++consecutive_repeats_;
    return archive_[it->second].objectives;
  }
  if (used_ >= budget_.max_evaluations) return std::nullopt;
  if (budget_.max_wall_seconds) {
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start_;
    if (elapsed.count() >= *budget_.max_wall_seconds) {
      out_of_time_ = true;
      return std::nullopt;
    }
  }
  if (observer_) observer_(knobs);
  const ObjectiveVector obj = model_.evaluate(knobs);
  ++used_;
  consecutive_repeats_ = 0;
  memo_.emplace(key, archive_.size());
  archive_.push_back({knobs, obj});
  update_front(archive_.size() - 1);
  return obj;
}

bool SearchContext::done() const {
  return used_ >= budget_.max_evaluations || out_of_time_ || archive_.size() >= space_size_ ||
         consecutive_repeats_ >= kStallLimit;
}

void SearchContext::update_front(std::size_t archive_index) {
  const ObjectiveVector& obj = archive_[archive_index].obj();
  for (std::size_t i : front_) {
    if (weakly_dominates(archive_[i].obj(), obj)) return;
  }
  std::erase_if(front_, [&](std::size_t i) { return dominates(obj, archive_[i].obj()); });
  front_.push_back(archive_index);
  ++front_insertions_;
}

std::vector<ObjectiveVector> SearchContext::front_objectives() const {
  std::vector<ObjectiveVector> out;
  out.reserve(front_.size());
  for (std::size_t i : front_) out.push_back(archive_[i].obj());
  return out;
}

Knobs SearchContext::random_knobs() {
  Knobs knobs(knob_count());
  for (std::size_t k = 0; k < knobs.size(); ++k) knobs[k] = static_cast<int>(rng_.below(static_cast<std::size_t>(cardinality(k))));
  return knobs;
}

Knobs SearchContext::fresh_variant(Knobs knobs, int tries) {
  if (!seen(knobs)) return knobs;
  for (int t = 0; t < tries; ++t) {
    Knobs variant = knobs;
    const std::size_t k = rng_.below(knob_count());
    const int card = cardinality(k);
    variant[k] = (variant[k] + 1 + static_cast<int>(rng_.below(static_cast<std::size_t>(card - 1)))) % card;
    if (!seen(variant)) return variant;
  }
  return knobs;
}

std::vector<Knobs> SearchContext::neighbors(const Knobs& knobs) const {
  std::vector<Knobs> out;
  for (std::size_t k = 0; k < knobs.size(); ++k) {
    for (int step : {-1, 1}) {
      const int level = knobs[k] + step;
      if (level < 0 || level >= cardinality(k)) continue;
      Knobs n = knobs;
      n[k] = level;
      out.push_back(std::move(n));
    }
  }
  return out;
}

std::vector<int> nondominated_ranks(const std::vector<ObjectiveVector>& objs) {
  const std::size_t n = objs.size();
  std::vector<int> rank(n, 0);
  std::vector<int> dominated_by(n, 0);
  std::vector<std::vector<std::size_t>> dominates_list(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (dominates(objs[i], objs[j])) {
        dominates_list[i].push_back(j);
        ++dominated_by[j];
      } else if (dominates(objs[j], objs[i])) {
        dominates_list[j].push_back(i);
        ++dominated_by[i];
      }
    }
  }
  std::vector<std::size_t> current;
  for (std::size_t i = 0; i < n; ++i)
    if (dominated_by[i] == 0) current.push_back(i);
  int level = 0;
  while (!current.empty()) {
    std::vector<std::size_t> next;
    for (std::size_t i : current) {
      rank[i] = level;
      for (std::size_t j : dominates_list[i])
        if (--dominated_by[j] == 0) next.push_back(j);
    }
    current = std::move(next);
    ++level;
  }
  return rank;
}

std::vector<double> crowding_distance(const std::vector<ObjectiveVector>& objs,
                                      const std::vector<std::size_t>& subset) {
  const std::size_t m = subset.size();
  std::vector<double> dist(m, 0.0);
  if (m <= 2) {
    std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
    return dist;
  }
  std::vector<std::size_t> order(m);
  for (int objective = 0; objective < 2; ++objective) {
    auto value = [&](std::size_t pos) {
      const auto& o = objs[subset[pos]];
      return objective == 0 ? o.area() : o.latency();
    };
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return value(a) < value(b); });
    const double lo = value(order.front());
    const double hi = value(order.back());
    dist[order.front()] = std::numeric_limits<double>::infinity();
    dist[order.back()] = std::numeric_limits<double>::infinity();
    if (hi <= lo) continue;
    for (std::size_t i = 1; i + 1 < m; ++i) {
      dist[order[i]] += (value(order[i + 1]) - value(order[i - 1])) / (hi - lo);
    }
  }
  return dist;
}

double excess_over_front(const std::vector<ObjectiveVector>& front, const ObjectiveVector& candidate) {
  if (front.empty()) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& member : front) best = std::min(best, relative_distance(member, candidate));
  return best;
}

std::vector<Individual> select_survivors(std::vector<Individual> pool, std::size_t count) {
  if (pool.size() <= count) return pool;
  std::vector<ObjectiveVector> objs;
  objs.reserve(pool.size());
  for (const auto& ind : pool) objs.push_back(ind.obj);
  const std::vector<int> rank = nondominated_ranks(objs);
  const int max_rank = *std::max_element(rank.begin(), rank.end());
  std::vector<Individual> survivors;
  for (int r = 0; r <= max_rank && survivors.size() < count; ++r) {
    std::vector<std::size_t> layer;
    for (std::size_t i = 0; i < pool.size(); ++i)
      if (rank[i] == r) layer.push_back(i);
    if (survivors.size() + layer.size() <= count) {
      for (std::size_t i : layer) survivors.push_back(pool[i]);
      continue;
    }
    const std::vector<double> crowd = crowding_distance(objs, layer);
    std::vector<std::size_t> order(layer.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return crowd[a] > crowd[b]; });
    for (std::size_t pos = 0; survivors.size() < count; ++pos) survivors.push_back(pool[layer[order[pos]]]);
  }
  return survivors;
}

std::size_t tournament(Rng& rng, const std::vector<int>& rank, const std::vector<double>& crowding) {
  const std::size_t a = rng.below(rank.size());
  const std::size_t b = rng.below(rank.size());
  if (rank[a] != rank[b]) return rank[a] < rank[b] ? a : b;
  if (crowding[a] != crowding[b]) return crowding[a] > crowding[b] ? a : b;
  return std::min(a, b);
}

}  // namespace soberdse::detail
