#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace soberdse {

enum class KnobKind { unroll, pipeline, partition };

struct Knob {
  std::string name;
  KnobKind kind = KnobKind::unroll;
  std::vector<int> levels;  // strictly increasing settings, one per index

  int cardinality() const noexcept { return static_cast<int>(levels.size()); }
  friend bool operator==(const Knob&, const Knob&) = default;
};

struct KnobSchema {
  std::vector<Knob> knobs;

  std::size_t size() const noexcept { return knobs.size(); }
  /// Product of cardinalities (|DS|).
  std::uint64_t space_size() const noexcept;
  /// Throws std::invalid_argument if knob count, level order or |DS| bounds are violated.
  void validate() const;

  friend bool operator==(const KnobSchema&, const KnobSchema&) = default;
};

inline constexpr std::size_t kNodeTypeCount = 8;
enum class NodeType { arith, mem_load, mem_store, branch, phi, loop_header, call, pragma };
enum class EdgeType { control, data };

struct GraphNode {
  int id = 0;
  NodeType type = NodeType::arith;
  friend bool operator==(const GraphNode&, const GraphNode&) = default;
};

struct GraphEdge {
  int src = 0;
  int dst = 0;
  EdgeType type = EdgeType::control;
  friend bool operator==(const GraphEdge&, const GraphEdge&) = default;
};

/// Synthetic operation graph. Control edges form a DAG; pragma nodes each hang
/// off exactly one loop header and the rest of the graph is connected.
struct OperationGraph {
  std::vector<GraphNode> nodes;
  std::vector<GraphEdge> edges;

  void validate() const;
  friend bool operator==(const OperationGraph&, const OperationGraph&) = default;
};

enum class Family { smooth, rugged, deceptive, plateau, clustered };
enum class SizeClass { small, medium, large };

inline constexpr std::array<Family, 5> kAllFamilies = {Family::smooth, Family::rugged, Family::deceptive,
                                                       Family::plateau, Family::clustered};

struct BenchmarkInstance {
  std::string id;
  KnobSchema schema;
  OperationGraph graph;
  Family family = Family::smooth;
  std::uint64_t seed = 0;
  SizeClass size_class = SizeClass::small;

  friend bool operator==(const BenchmarkInstance&, const BenchmarkInstance&) = default;
};

inline constexpr std::size_t kFeatureDim = 24;
using FeatureVector = std::array<double, kFeatureDim>;

/// Deterministic synthetic benchmark. Graph shape depends on the family so that
/// extracted features carry family signal.
BenchmarkInstance synth_instance(Family family, std::uint64_t seed, SizeClass size);

/// Fixed-length structural readout, invariant to node relabeling and edge order.
FeatureVector extract_features(const BenchmarkInstance& instance);

std::string instance_id(Family family, std::uint64_t seed, SizeClass size);

std::string_view to_string(Family f) noexcept;
std::string_view to_string(SizeClass s) noexcept;
std::string_view to_string(KnobKind k) noexcept;
std::string_view to_string(NodeType t) noexcept;
std::string_view to_string(EdgeType t) noexcept;

// Parsers throw std::invalid_argument naming the offending token.
Family parse_family(std::string_view s);
SizeClass parse_size_class(std::string_view s);
KnobKind parse_knob_kind(std::string_view s);
NodeType parse_node_type(std::string_view s);
EdgeType parse_edge_type(std::string_view s);

}  // namespace soberdse
