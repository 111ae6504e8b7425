#include "soberdse/performance.hpp"

#include <cmath>
#include <stdexcept>

namespace soberdse {

namespace {

std::string cell_name(const std::string& benchmark_id, ExplorerId explorer) {
  return "(" + benchmark_id + ", " + std::string(to_string(explorer)) + ")";
}

}  // namespace

void PerformanceTable::set(const std::string& benchmark_id, ExplorerId explorer, const PerformanceCell& cell) {
  if (!std::isfinite(cell.adrs) || cell.adrs < 0.0) {
    throw std::invalid_argument("ADRS for " + cell_name(benchmark_id, explorer) + " must be finite and >= 0");
  }
  rows_[benchmark_id][static_cast<std::size_t>(code(explorer))] = cell;
}

const PerformanceCell& PerformanceTable::at(const std::string& benchmark_id, ExplorerId explorer) const {
  auto it = rows_.find(benchmark_id);
  if (it != rows_.end()) {
    const auto& cell = it->second[static_cast<std::size_t>(code(explorer))];
    if (cell) return *cell;
  }
  throw std::out_of_range("performance table has no entry for " + cell_name(benchmark_id, explorer));
}

AdrsRow PerformanceTable::adrs_row(const std::string& benchmark_id) const {
  AdrsRow row{};
  for (ExplorerId id : kAllExplorers) row[static_cast<std::size_t>(code(id))] = at(benchmark_id, id).adrs;
  return row;
}

bool PerformanceTable::contains(const std::string& benchmark_id) const { return rows_.count(benchmark_id) > 0; }

std::vector<std::string> PerformanceTable::benchmark_ids() const {
  std::vector<std::string> ids;
  for (const auto& [id, row] : rows_) ids.push_back(id);
  return ids;
}

void PerformanceTable::validate() const {
  for (const auto& [id, row] : rows_) adrs_row(id);
}

bool PerformanceTable::operator==(const PerformanceTable& other) const {
  if (rows_.size() != other.rows_.size()) return false;
  for (const auto& [id, row] : rows_) {
    auto it = other.rows_.find(id);
    if (it == other.rows_.end()) return false;
    for (std::size_t i = 0; i < kExplorerCount; ++i) {
      const auto& a = row[i];
      const auto& b = it->second[i];
      if (a.has_value() != b.has_value()) return false;
      if (a && (a->adrs != b->adrs || a->evaluations_used != b->evaluations_used ||
                a->wall_seconds != b->wall_seconds)) {
        return false;
      }
    }
  }
  return true;
}

LabeledSample LabeledSample::from_row(std::string benchmark_id, const FeatureVector& features, const AdrsRow& row) {
  LabeledSample s;
  s.benchmark_id = std::move(benchmark_id);
  s.features = features;
  s.adrs_row = row;
  s.label = argmin_explorer(row);
  return s;
}

}  // namespace soberdse
