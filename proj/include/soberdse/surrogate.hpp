#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "soberdse/benchmark.hpp"
#include "soberdse/pareto.hpp"

namespace soberdse {

inline constexpr double kObjectiveFloor = 0.01;
inline constexpr double kObjectiveCeiling = 100.0;
inline constexpr std::uint64_t kDefaultExhaustiveLimit = 100'000;

/// Analytic QoR stand-in: a separable multiplicative backbone with a
/// family-specific landscape modifier. Parameters are re-derived from
/// (family, seed, schema) and never serialized.
class SurrogateModel {
 public:
  SurrogateModel(std::string instance_id, Family family, std::uint64_t seed, KnobSchema schema);
  explicit SurrogateModel(const BenchmarkInstance& instance);

  /// Pure and bit-reproducible. Throws std::invalid_argument naming the
  /// offending knob index when `knobs` does not conform to the schema.
  ObjectiveVector evaluate(const Knobs& knobs) const;

  const std::string& instance_id() const noexcept { return instance_id_; }
  Family family() const noexcept { return family_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const KnobSchema& schema() const noexcept { return schema_; }

  /// Knob-space boxes with a latency/area bonus (clustered family only).
  struct Pocket {
    std::vector<int> center;  // level index per knob
    int radius;               // in levels, L-infinity
    bool contains(const Knobs& knobs) const noexcept;
  };
  const std::vector<Pocket>& pockets() const noexcept { return pockets_; }

 private:
  struct Trap {
    std::vector<int> center;  // level index per knob
    double wall;              // relative penalty on single-step neighbours
  };

  void check(const Knobs& knobs) const;
  double position(std::size_t k, int level) const noexcept;

  std::string instance_id_;
  Family family_;
  std::uint64_t seed_;
  KnobSchema schema_;
  // Per knob, per level: log-latency and log-area contributions.
  std::vector<std::vector<double>> log_latency_;
  std::vector<std::vector<double>> log_area_;
  double base_log_latency_ = 0.0;
  double base_log_area_ = 0.0;
  double quant_step_ = 0.0;
  std::vector<Trap> traps_;
  std::vector<Pocket> pockets_;
};

ObjectiveVector evaluate(const SurrogateModel& model, const DesignPoint& point);

/// Knob vector at mixed-radix `index` (last knob varies fastest).
Knobs knobs_at(const KnobSchema& schema, std::uint64_t index);

/// Every point of the design space, evaluated. Throws when |DS| > limit.
std::vector<DesignPoint> enumerate_space(const SurrogateModel& model, std::uint64_t limit = kDefaultExhaustiveLimit);

/// Front of the whole enumerated space. Throws std::invalid_argument naming
/// |DS| and the limit when the space is too large.
ParetoFront exhaustive_front(const SurrogateModel& model, const KnobSchema& schema,
                             std::uint64_t limit = kDefaultExhaustiveLimit);

}  // namespace soberdse
