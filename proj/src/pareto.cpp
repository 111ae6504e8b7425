#include "soberdse/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace soberdse {

ObjectiveVector::ObjectiveVector(double area, double latency) : area_(area), latency_(latency) {
  if (!std::isfinite(area) || !std::isfinite(latency)) {
    throw std::invalid_argument("objective vector must be finite");
  }
  if (area < 0.0 || latency < 0.0) {
    throw std::invalid_argument("objective vector must be non-negative");
  }
}

const ObjectiveVector& DesignPoint::obj() const {
  if (!objectives) throw std::logic_error("design point has not been evaluated");
  return *objectives;
}

namespace {

bool front_order(const DesignPoint& a, const DesignPoint& b) {
  const auto& oa = a.obj();
  const auto& ob = b.obj();
  if (oa.area() != ob.area()) return oa.area() < ob.area();
  if (oa.latency() != ob.latency()) return oa.latency() < ob.latency();
  return a.knobs < b.knobs;
}

}  // namespace

ParetoFront::ParetoFront(std::vector<DesignPoint> points) : points_(std::move(points)) {
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!points_[i].objectives) throw std::invalid_argument("front member is unevaluated");
    if (i == 0) continue;
    const auto& prev = points_[i - 1].obj();
    const auto& cur = points_[i].obj();
    // Sorted by area with strictly decreasing latency is equivalent to
    // mutual non-dominance plus deduplication.
    if (!(prev.area() < cur.area() && prev.latency() > cur.latency())) {
      throw std::invalid_argument("points violate the Pareto front invariant at index " +
                                  std::to_string(i));
    }
  }
}

bool dominates(const ObjectiveVector& p, const ObjectiveVector& q) noexcept {
  return p.area() <= q.area() && p.latency() <= q.latency() &&
         (p.area() < q.area() || p.latency() < q.latency());
}

bool weakly_dominates(const ObjectiveVector& p, const ObjectiveVector& q) noexcept {
  return p.area() <= q.area() && p.latency() <= q.latency();
}

ParetoFront pareto_filter(std::span<const DesignPoint> points) {
  std::vector<const DesignPoint*> order;
  order.reserve(points.size());
  for (const auto& p : points) {
    if (!p.objectives) throw std::invalid_argument("pareto_filter requires evaluated points");
    order.push_back(&p);
  }
  std::sort(order.begin(), order.end(),
            [](const DesignPoint* a, const DesignPoint* b) { return front_order(*a, *b); });

  std::vector<DesignPoint> kept;
  double best_latency = std::numeric_limits<double>::infinity();
  for (const DesignPoint* p : order) {
    if (p->obj().latency() < best_latency) {
      best_latency = p->obj().latency();
      kept.push_back(*p);
    }
  }
  return ParetoFront(ParetoFront::Trusted{}, std::move(kept));
}

double relative_distance(const ObjectiveVector& reference, const ObjectiveVector& candidate) noexcept {
  auto term = [](double ref, double cand) {
    const double denom = ref == 0.0 ? kAdrsEpsilon : ref;
    return std::max(0.0, (cand - ref) / denom);
  };
  return std::max(term(reference.area(), candidate.area()),
                  term(reference.latency(), candidate.latency()));
}

double adrs(const ParetoFront& reference, const ParetoFront& approx) {
  if (reference.empty() || approx.empty()) {
    throw std::invalid_argument("degenerate ADRS input");
  }
  double total = 0.0;
  for (const auto& lambda : reference) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& mu : approx) {
      best = std::min(best, relative_distance(lambda.obj(), mu.obj()));
      if (best == 0.0) break;
    }
    total += best;
  }
  return total / static_cast<double>(reference.size());
}

ParetoFront reference_front(std::span<const std::vector<DesignPoint>> point_sets) {
  std::vector<DesignPoint> all;
  for (const auto& set : point_sets) all.insert(all.end(), set.begin(), set.end());
  if (all.empty()) throw std::invalid_argument("reference front needs at least one evaluated point");
  return pareto_filter(all);
}

}  // namespace soberdse
