#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "soberdse/benchmark.hpp"
#include "soberdse/explorers.hpp"

namespace soberdse {

using AdrsRow = std::array<double, kExplorerCount>;

struct PerformanceCell {
  double adrs = 0.0;
  std::uint64_t evaluations_used = 0;
  double wall_seconds = 0.0;
};

/// ADRS of every explorer on every benchmark.
class PerformanceTable {
 public:
  void set(const std::string& benchmark_id, ExplorerId explorer, const PerformanceCell& cell);
  /// Throws std::out_of_range naming (benchmark, explorer) when absent.
  const PerformanceCell& at(const std::string& benchmark_id, ExplorerId explorer) const;
  AdrsRow adrs_row(const std::string& benchmark_id) const;
  bool contains(const std::string& benchmark_id) const;
  std::vector<std::string> benchmark_ids() const;
  std::size_t size() const noexcept { return rows_.size(); }
  /// Every row has all ten finite, non-negative entries.
  void validate() const;
  bool operator==(const PerformanceTable& other) const;

 private:
  using Row = std::array<std::optional<PerformanceCell>, kExplorerCount>;
  std::map<std::string, Row> rows_;
};

struct LabeledSample {
  std::string benchmark_id;
  FeatureVector features{};
  ExplorerId label = ExplorerId::nsga2;
  AdrsRow adrs_row{};

  /// Label is argmin_explorer(adrs_row).
  static LabeledSample from_row(std::string benchmark_id, const FeatureVector& features, const AdrsRow& row);
};

}  // namespace soberdse
