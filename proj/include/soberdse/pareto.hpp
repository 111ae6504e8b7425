#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace soberdse {

/// Knob-index vector: entry k selects a level of knob k.
using Knobs = std::vector<int>;

/// (area, latency) pair. Both finite and non-negative; enforced at construction.
class ObjectiveVector {
 public:
  ObjectiveVector(double area, double latency);

  double area() const noexcept { return area_; }
  double latency() const noexcept { return latency_; }

  friend bool operator==(const ObjectiveVector&, const ObjectiveVector&) = default;

 private:
  double area_;
  double latency_;
};

struct DesignPoint {
  Knobs knobs;
  std::optional<ObjectiveVector> objectives;

  const ObjectiveVector& obj() const;  // throws if unevaluated

  friend bool operator==(const DesignPoint&, const DesignPoint&) = default;
};

/// Mutually non-dominated, objective-deduplicated points sorted by area then latency.
class ParetoFront {
 public:
  ParetoFront() = default;
  /// Validates the front invariants; throws std::invalid_argument on violation.
  explicit ParetoFront(std::vector<DesignPoint> points);

  const std::vector<DesignPoint>& points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  auto begin() const noexcept { return points_.begin(); }
  auto end() const noexcept { return points_.end(); }

  friend bool operator==(const ParetoFront&, const ParetoFront&) = default;

 private:
  struct Trusted {};
  ParetoFront(Trusted, std::vector<DesignPoint> points) : points_(std::move(points)) {}
  friend ParetoFront pareto_filter(std::span<const DesignPoint> points);

  std::vector<DesignPoint> points_;
};

/// p dominates q: no worse in both objectives and strictly better in at least one.
bool dominates(const ObjectiveVector& p, const ObjectiveVector& q) noexcept;

/// p is no worse than q in both objectives (equal vectors included).
bool weakly_dominates(const ObjectiveVector& p, const ObjectiveVector& q) noexcept;

/// Non-dominated subset of `points`. Among points sharing an objective vector
/// the lexicographically smallest knob vector is kept.
ParetoFront pareto_filter(std::span<const DesignPoint> points);

/// Guard for zero-valued reference objectives in the relative distance.
inline constexpr double kAdrsEpsilon = 1e-9;

/// Worst-objective relative excess of `candidate` over `reference`; zero iff
/// `candidate` weakly dominates `reference`.
double relative_distance(const ObjectiveVector& reference, const ObjectiveVector& candidate) noexcept;

/// Average distance from each reference point to its closest approximation point.
/// Throws std::invalid_argument("degenerate ADRS input") if either front is empty.
double adrs(const ParetoFront& reference, const ParetoFront& approx);

/// Front of the union of several evaluated point sets. Throws if all sets are empty.
ParetoFront reference_front(std::span<const std::vector<DesignPoint>> point_sets);

}  // namespace soberdse
