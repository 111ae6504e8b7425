#include "soberdse/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "soberdse/rng.hpp"

namespace soberdse {

namespace {

// Total log-range spanned by the backbone: latency 40 -> 0.1, area 0.3 -> 90.
constexpr double kBaseLatency = 40.0;
constexpr double kLatencyLogRange = 5.991464547107979;  // ln 400
constexpr double kBaseArea = 0.3;
constexpr double kAreaLogRange = 5.703782474656201;  // ln 300

constexpr double kRuggedLow = 0.7;
constexpr double kRuggedHigh = 1.3;
constexpr double kPlateauStep = 0.2;
constexpr int kTrapCount = 8;
constexpr double kTrapWallLow = 1.0;
constexpr double kTrapWallHigh = 1.5;
constexpr int kPocketCount = 3;
constexpr int kPocketRadius = 1;
constexpr double kPocketLatencyBonus = -0.7;  // log-space
constexpr double kPocketAreaBonus = -0.3;

struct KindRanges {
  double lat_lo, lat_hi, area_lo, area_hi;
};

KindRanges kind_ranges(KnobKind kind) {
  switch (kind) {
    case KnobKind::unroll: return {0.6, 1.2, 0.6, 1.2};
    case KnobKind::pipeline: return {0.8, 1.5, 0.2, 0.5};
    case KnobKind::partition: return {0.2, 0.6, 0.3, 0.8};
  }
  return {0.5, 1.0, 0.5, 1.0};
}

std::uint64_t knobs_hash(std::uint64_t seed, const Knobs& knobs) {
  std::uint64_t h = splitmix64(seed ^ 0x7275676765644bULL);
  for (int v : knobs) h = hash_combine(h, static_cast<std::uint64_t>(v));
  return h;
}

}  // namespace

SurrogateModel::SurrogateModel(const BenchmarkInstance& instance)
    : SurrogateModel(instance.id, instance.family, instance.seed, instance.schema) {}

SurrogateModel::SurrogateModel(std::string instance_id, Family family, std::uint64_t seed, KnobSchema schema)
    : instance_id_(std::move(instance_id)), family_(family), seed_(seed), schema_(std::move(schema)) {
  const std::size_t n = schema_.size();
  Rng rng(hash_seeds({0x5157ULL, static_cast<std::uint64_t>(family), seed}));

  // SMOOTH keeps area convex and latency gain concave in the level position,
  // so ln(area) + ln(latency) is convex along every knob.
  const double area_lo = family == Family::smooth ? 1.0 : 0.8;
  const double lat_hi = family == Family::smooth ? 1.0 : 1.3;
  std::vector<double> lat_coef(n), area_coef(n), lat_shape(n), area_shape(n);
  double lat_sum = 0.0;
  double area_sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const KindRanges r = kind_ranges(schema_.knobs[k].kind);
    lat_coef[k] = rng.uniform(r.lat_lo, r.lat_hi);
    area_coef[k] = rng.uniform(r.area_lo, r.area_hi);
    lat_shape[k] = rng.uniform(0.7, lat_hi);
    area_shape[k] = rng.uniform(area_lo, 1.4);
    lat_sum += lat_coef[k];
    area_sum += area_coef[k];
  }
  log_latency_.resize(n);
  log_area_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const int card = schema_.knobs[k].cardinality();
    for (int i = 0; i < card; ++i) {
      // PLATEAU: adjacent level pairs share one response.
      const double t = position(k, family == Family::plateau ? i / 2 * 2 : i);
      log_latency_[k].push_back(-kLatencyLogRange * lat_coef[k] / lat_sum * std::pow(t, lat_shape[k]));
      log_area_[k].push_back(kAreaLogRange * area_coef[k] / area_sum * std::pow(t, area_shape[k]));
    }
  }
  base_log_latency_ = std::log(kBaseLatency);
  base_log_area_ = std::log(kBaseArea);

  switch (family) {
    case Family::plateau:
      quant_step_ = kPlateauStep;
      break;
    case Family::deceptive:
      // Each trap walls in one design point: its single-step neighbours are
      // penalized, making it a local minimum that is usually not Pareto-optimal.
      for (int i = 0; i < kTrapCount; ++i) {
        Trap trap;
        for (std::size_t k = 0; k < n; ++k) {
          trap.center.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(schema_.knobs[k].cardinality()))));
        }
        trap.wall = rng.uniform(kTrapWallLow, kTrapWallHigh);
        traps_.push_back(std::move(trap));
      }
      break;
    case Family::clustered:
      // Pockets sit at spread-out quantiles of every knob so that they land at
      // different points of the area/latency trade-off.
      for (int i = 0; i < kPocketCount; ++i) {
        Pocket pocket;
        const double q = (i + 0.5) / kPocketCount;
        pocket.radius = kPocketRadius;
        for (std::size_t k = 0; k < n; ++k) {
          const int top = schema_.knobs[k].cardinality() - 1;
          const int jitter = static_cast<int>(rng.below(3)) - 1;
          pocket.center.push_back(std::clamp(static_cast<int>(std::lround(q * top)) + jitter, 0, top));
        }
        pockets_.push_back(std::move(pocket));
      }
      break;
    case Family::smooth:
    case Family::rugged:
      break;
  }
}

bool SurrogateModel::Pocket::contains(const Knobs& knobs) const noexcept {
  if (knobs.size() != center.size()) return false;
  for (std::size_t k = 0; k < knobs.size(); ++k)
    if (std::abs(knobs[k] - center[k]) > radius) return false;
  return true;
}

double SurrogateModel::position(std::size_t k, int level) const noexcept {
  return static_cast<double>(level) / static_cast<double>(schema_.knobs[k].cardinality() - 1);
}

void SurrogateModel::check(const Knobs& knobs) const {
  if (knobs.size() != schema_.size()) {
    throw std::invalid_argument("knob vector has " + std::to_string(knobs.size()) + " entries, schema has " +
                                std::to_string(schema_.size()));
  }
  for (std::size_t k = 0; k < knobs.size(); ++k) {
    if (knobs[k] < 0 || knobs[k] >= schema_.knobs[k].cardinality()) {
      throw std::invalid_argument("knob " + std::to_string(k) + " index " + std::to_string(knobs[k]) +
                                  " outside [0, " + std::to_string(schema_.knobs[k].cardinality()) + ")");
    }
  }
}

ObjectiveVector SurrogateModel::evaluate(const Knobs& knobs) const {
  check(knobs);
  const std::size_t n = knobs.size();
  double log_lat = base_log_latency_;
  double log_area = base_log_area_;
  for (std::size_t k = 0; k < n; ++k) {
    const auto i = static_cast<std::size_t>(knobs[k]);
    log_lat += log_latency_[k][i];
    log_area += log_area_[k][i];
  }

  double lat_factor = 1.0;
  double area_factor = 1.0;
  switch (family_) {
    case Family::smooth:
      break;
    case Family::rugged:
      lat_factor = kRuggedLow + (kRuggedHigh - kRuggedLow) * unit_from_hash(knobs_hash(seed_, knobs));
      break;
    case Family::deceptive:
      for (const auto& trap : traps_) {
        int steps = 0;
        for (std::size_t k = 0; k < n && steps <= 1; ++k) steps += std::abs(knobs[k] - trap.center[k]);
        if (steps == 1) {
          lat_factor *= 1.0 + trap.wall;
          area_factor *= 1.0 + trap.wall;
        }
      }
      break;
    case Family::plateau:
      log_lat = std::round(log_lat / quant_step_) * quant_step_;
      log_area = std::round(log_area / quant_step_) * quant_step_;
      break;
    case Family::clustered:
      for (const auto& pocket : pockets_) {
        if (pocket.contains(knobs)) {
          log_lat += kPocketLatencyBonus;
          log_area += kPocketAreaBonus;
          break;
        }
      }
      break;
  }
  const double latency = std::clamp(std::exp(log_lat) * lat_factor, kObjectiveFloor, kObjectiveCeiling);
  const double area = std::clamp(std::exp(log_area) * area_factor, kObjectiveFloor, kObjectiveCeiling);
  return ObjectiveVector(area, latency);
}

ObjectiveVector evaluate(const SurrogateModel& model, const DesignPoint& point) {
  return model.evaluate(point.knobs);
}

Knobs knobs_at(const KnobSchema& schema, std::uint64_t index) {
  Knobs knobs(schema.size());
  for (std::size_t k = schema.size(); k-- > 0;) {
    const auto card = static_cast<std::uint64_t>(schema.knobs[k].cardinality());
    knobs[k] = static_cast<int>(index % card);
    index /= card;
  }
  return knobs;
}

std::vector<DesignPoint> enumerate_space(const SurrogateModel& model, std::uint64_t limit) {
  const std::uint64_t size = model.schema().space_size();
  if (size > limit) {
    throw std::invalid_argument("design space of " + std::to_string(size) + " points exceeds exhaustive limit " +
                                std::to_string(limit));
  }
  std::vector<DesignPoint> points;
  points.reserve(size);
  for (std::uint64_t i = 0; i < size; ++i) {
    Knobs knobs = knobs_at(model.schema(), i);
    auto obj = model.evaluate(knobs);
    points.push_back({std::move(knobs), obj});
  }
  return points;
}

ParetoFront exhaustive_front(const SurrogateModel& model, const KnobSchema& schema, std::uint64_t limit) {
  if (!(schema == model.schema())) throw std::invalid_argument("schema does not match the surrogate model");
  return pareto_filter(enumerate_space(model, limit));
}

}  // namespace soberdse
