#include "soberdse/benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <string>

#include "soberdse/rng.hpp"

namespace soberdse {

namespace {

constexpr std::size_t kMinKnobs = 2;
constexpr std::size_t kMaxKnobs = 12;
constexpr std::uint64_t kMinSpace = 100;
constexpr std::uint64_t kMaxSpace = 10'000'000;
constexpr std::size_t kMinNodes = 8;
constexpr std::size_t kMaxNodes = 512;

struct SizeProfile {
  std::uint64_t min_space;
  std::uint64_t max_space;
  int min_knobs;
  int max_knobs;
  double body_scale;
};

SizeProfile size_profile(SizeClass s) {
  switch (s) {
    case SizeClass::small: return {100, 1'000, 2, 4, 1.0};
    case SizeClass::medium: return {5'000, 100'000, 4, 8, 1.5};
    case SizeClass::large: return {200'000, 10'000'000, 7, 12, 2.5};
  }
  throw std::invalid_argument("unknown size class");
}

// Body node types drawn per loop, in this order.
constexpr std::array<NodeType, 6> kBodyTypes = {NodeType::arith,  NodeType::mem_load, NodeType::mem_store,
                                                NodeType::branch, NodeType::phi,      NodeType::call};

struct GraphProfile {
  int min_nests, max_nests;
  int min_depth, max_depth;
  int min_body, max_body;
  std::array<double, 6> type_weights;
};

GraphProfile graph_profile(Family f) {
  switch (f) {
    case Family::smooth: return {1, 2, 1, 2, 5, 9, {0.62, 0.14, 0.08, 0.05, 0.06, 0.05}};
    case Family::rugged: return {1, 2, 2, 3, 4, 9, {0.30, 0.10, 0.08, 0.26, 0.21, 0.05}};
    case Family::deceptive: return {1, 1, 4, 6, 2, 5, {0.42, 0.20, 0.10, 0.08, 0.15, 0.05}};
    case Family::plateau: return {1, 2, 2, 3, 5, 10, {0.22, 0.36, 0.28, 0.04, 0.05, 0.05}};
    case Family::clustered: return {3, 5, 1, 2, 3, 6, {0.34, 0.14, 0.08, 0.05, 0.06, 0.33}};
  }
  throw std::invalid_argument("unknown family");
}

int max_cardinality(KnobKind kind) { return kind == KnobKind::pipeline ? 4 : 8; }

std::vector<int> make_levels(KnobKind kind, int cardinality) {
  std::vector<int> levels(static_cast<std::size_t>(cardinality));
  for (int i = 0; i < cardinality; ++i) {
    levels[static_cast<std::size_t>(i)] = kind == KnobKind::pipeline ? i : (1 << i);
  }
  return levels;
}

KnobSchema synth_schema(Rng& rng, const SizeProfile& prof) {
  std::vector<KnobKind> kinds;
  std::vector<int> cards;
  const int count = rng.between(prof.min_knobs, prof.max_knobs);
  auto add_knob = [&] {
    const double u = rng.uniform();
    const KnobKind kind = u < 0.45 ? KnobKind::unroll : (u < 0.7 ? KnobKind::pipeline : KnobKind::partition);
    kinds.push_back(kind);
    cards.push_back(rng.between(2, max_cardinality(kind)));
  };
  for (int i = 0; i < count; ++i) add_knob();

  auto product = [&] {
    std::uint64_t p = 1;
    for (int c : cards) p *= static_cast<std::uint64_t>(c);
    return p;
  };
  for (int iter = 0; iter < 10'000; ++iter) {
    const std::uint64_t p = product();
    if (p > prof.max_space) {
      std::vector<std::size_t> shrinkable;
      for (std::size_t k = 0; k < cards.size(); ++k)
        if (cards[k] > 2) shrinkable.push_back(k);
      if (shrinkable.empty()) {
        kinds.pop_back();
        cards.pop_back();
      } else {
        --cards[shrinkable[rng.below(shrinkable.size())]];
      }
    } else if (p < prof.min_space) {
      std::vector<std::size_t> growable;
      for (std::size_t k = 0; k < cards.size(); ++k)
        if (cards[k] < max_cardinality(kinds[k])) growable.push_back(k);
      if (growable.empty() || (cards.size() < static_cast<std::size_t>(prof.max_knobs) && rng.bernoulli(0.2))) {
        add_knob();
      } else {
        ++cards[growable[rng.below(growable.size())]];
      }
    } else {
      break;
    }
  }

  KnobSchema schema;
  std::array<int, 3> per_kind{};
  for (std::size_t k = 0; k < cards.size(); ++k) {
    const auto kind_index = static_cast<std::size_t>(kinds[k]);
    Knob knob;
    knob.kind = kinds[k];
    knob.name = std::string(to_string(kinds[k])) + "_" + std::to_string(per_kind[kind_index]++);
    knob.levels = make_levels(kinds[k], cards[k]);
    schema.knobs.push_back(std::move(knob));
  }
  schema.validate();
  return schema;
}

OperationGraph synth_graph(Rng& rng, Family family, const SizeProfile& prof, std::size_t knob_count) {
  const GraphProfile gp = graph_profile(family);
  std::array<double, 6> weights = gp.type_weights;
  for (double& w : weights) w *= rng.uniform(0.75, 1.25);
  const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);

  OperationGraph g;
  auto add_node = [&](NodeType t) {
    const int id = static_cast<int>(g.nodes.size());
    g.nodes.push_back({id, t});
    return id;
  };
  auto draw_type = [&] {
    double u = rng.uniform() * wsum;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (u < weights[i]) return kBodyTypes[i];
      u -= weights[i];
    }
    return kBodyTypes.back();
  };
  // Reserve room for one pragma node per knob.
  const std::size_t body_cap = kMaxNodes - knob_count;

  const int entry = add_node(NodeType::arith);
  std::vector<int> headers;
  const int nests = rng.between(gp.min_nests, gp.max_nests);
  for (int t = 0; t < nests; ++t) {
    const int depth = rng.between(gp.min_depth, gp.max_depth);
    int parent = entry;
    std::vector<int> outer_body;
    for (int d = 0; d < depth && g.nodes.size() < body_cap; ++d) {
      const int header = add_node(NodeType::loop_header);
      headers.push_back(header);
      g.edges.push_back({parent, header, EdgeType::control});
      const int body = static_cast<int>(std::lround(rng.between(gp.min_body, gp.max_body) * prof.body_scale));
      std::vector<int> members;
      for (int b = 0; b < body && g.nodes.size() < body_cap; ++b) {
        const NodeType type = draw_type();
        const int node = add_node(type);
        g.edges.push_back({header, node, EdgeType::control});
        const int incoming = type == NodeType::phi ? 2 : 1;
        for (int e = 0; e < incoming; ++e) {
          if (!members.empty() && (outer_body.empty() || rng.bernoulli(0.75))) {
            g.edges.push_back({members[rng.below(members.size())], node, EdgeType::data});
          } else if (!outer_body.empty()) {
            g.edges.push_back({outer_body[rng.below(outer_body.size())], node, EdgeType::data});
          }
        }
        if (!members.empty() && g.nodes[static_cast<std::size_t>(members.back())].type == NodeType::branch) {
          g.edges.push_back({members.back(), node, EdgeType::control});
        }
        members.push_back(node);
      }
      outer_body = std::move(members);
      parent = header;
    }
  }
  if (headers.empty()) {
    headers.push_back(add_node(NodeType::loop_header));
    g.edges.push_back({entry, headers.back(), EdgeType::control});
  }
  while (g.nodes.size() + knob_count < kMinNodes) {
    const int node = add_node(NodeType::arith);
    g.edges.push_back({headers.back(), node, EdgeType::control});
  }
  // Knob k annotates one loop; deeper loops are picked first, as unrolling
  // pragmas usually target innermost loops.
  for (std::size_t k = 0; k < knob_count; ++k) {
    const std::size_t pick = rng.bernoulli(0.6) ? headers.size() - 1 - (k % headers.size())
                                                : rng.below(headers.size());
    const int pragma = add_node(NodeType::pragma);
    g.edges.push_back({pragma, headers[pick], EdgeType::control});
  }
  g.validate();
  return g;
}

double ordered_sum(std::vector<double>& values) {
  std::sort(values.begin(), values.end());
  double s = 0.0;
  for (double v : values) s += v;
  return s;
}

}  // namespace

std::uint64_t KnobSchema::space_size() const noexcept {
  std::uint64_t p = 1;
  for (const auto& k : knobs) p *= static_cast<std::uint64_t>(k.cardinality());
  return p;
}

void KnobSchema::validate() const {
  if (knobs.size() < kMinKnobs || knobs.size() > kMaxKnobs) {
    throw std::invalid_argument("knob count " + std::to_string(knobs.size()) + " outside [2, 12]");
  }
  long double product = 1.0L;
  for (std::size_t k = 0; k < knobs.size(); ++k) {
    const auto& knob = knobs[k];
    if (knob.cardinality() < 2) {
      throw std::invalid_argument("knob " + std::to_string(k) + " has cardinality < 2");
    }
    for (std::size_t i = 1; i < knob.levels.size(); ++i) {
      if (knob.levels[i] <= knob.levels[i - 1]) {
        throw std::invalid_argument("knob " + std::to_string(k) + " levels not strictly increasing");
      }
    }
    product *= knob.cardinality();
  }
  if (product < static_cast<long double>(kMinSpace) || product > static_cast<long double>(kMaxSpace)) {
    throw std::invalid_argument("design space size outside [1e2, 1e7]");
  }
}

void OperationGraph::validate() const {
  const std::size_t n = nodes.size();
  if (n < kMinNodes || n > kMaxNodes) {
    throw std::invalid_argument("graph node count " + std::to_string(n) + " outside [8, 512]");
  }
  // Ids are arbitrary integers; map them to dense indices.
  std::vector<std::pair<int, std::size_t>> ids;
  for (std::size_t i = 0; i < n; ++i) ids.emplace_back(nodes[i].id, i);
  std::sort(ids.begin(), ids.end());
  for (std::size_t i = 1; i < n; ++i) {
    if (ids[i].first == ids[i - 1].first) throw std::invalid_argument("duplicate node id");
  }
  auto lookup = [&](int id) -> std::size_t {
    auto it = std::lower_bound(ids.begin(), ids.end(), std::make_pair(id, std::size_t{0}));
    if (it == ids.end() || it->first != id) throw std::invalid_argument("edge references unknown node " + std::to_string(id));
    return it->second;
  };

  std::vector<std::vector<std::size_t>> undirected(n);
  std::vector<std::vector<std::size_t>> control(n);
  std::vector<int> indegree(n, 0);
  std::vector<int> pragma_links(n, 0);
  for (const auto& e : edges) {
    const std::size_t s = lookup(e.src);
    const std::size_t d = lookup(e.dst);
    const bool s_pragma = nodes[s].type == NodeType::pragma;
    const bool d_pragma = nodes[d].type == NodeType::pragma;
    if (s_pragma || d_pragma) {
      const std::size_t p = s_pragma ? s : d;
      const std::size_t other = s_pragma ? d : s;
      if (nodes[other].type != NodeType::loop_header) {
        throw std::invalid_argument("pragma node attached to a non-loop-header");
      }
      ++pragma_links[p];
    } else {
      undirected[s].push_back(d);
      undirected[d].push_back(s);
    }
    if (e.type == EdgeType::control) {
      control[s].push_back(d);
      ++indegree[d];
    }
  }
  std::size_t first_regular = n;
  std::size_t regular = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (nodes[i].type == NodeType::pragma) {
      if (pragma_links[i] != 1) throw std::invalid_argument("pragma node must attach to exactly one loop header");
    } else {
      ++regular;
      if (first_regular == n) first_regular = i;
    }
  }
  if (regular > 0) {
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> stack{first_regular};
    seen[first_regular] = true;
    std::size_t visited = 0;
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      ++visited;
      for (std::size_t u : undirected[v]) {
        if (!seen[u]) {
          seen[u] = true;
          stack.push_back(u);
        }
      }
    }
    if (visited != regular) throw std::invalid_argument("graph is disconnected without pragma nodes");
  }
  std::queue<std::size_t> ready;
  for (std::size_t i = 0; i < n; ++i)
    if (indegree[i] == 0) ready.push(i);
  std::size_t processed = 0;
  while (!ready.empty()) {
    const std::size_t v = ready.front();
    ready.pop();
    ++processed;
    for (std::size_t u : control[v])
      if (--indegree[u] == 0) ready.push(u);
  }
  if (processed != n) throw std::invalid_argument("control edges contain a cycle");
}

BenchmarkInstance synth_instance(Family family, std::uint64_t seed, SizeClass size) {
  const SizeProfile prof = size_profile(size);
  Rng rng(hash_seeds({0x5eedULL, static_cast<std::uint64_t>(family), seed, static_cast<std::uint64_t>(size)}));
  BenchmarkInstance inst;
  inst.id = instance_id(family, seed, size);
  inst.family = family;
  inst.seed = seed;
  inst.size_class = size;
  inst.schema = synth_schema(rng, prof);
  inst.graph = synth_graph(rng, family, prof, inst.schema.size());
  return inst;
}

FeatureVector extract_features(const BenchmarkInstance& instance) {
  const auto& schema = instance.schema;
  const auto& g = instance.graph;
  const std::size_t n = g.nodes.size();

  std::vector<double> f;
  f.reserve(kFeatureDim);
  f.push_back(std::log10(static_cast<double>(schema.space_size())));
  f.push_back(static_cast<double>(schema.size()));
  double card_sum = 0.0;
  int card_max = 0;
  std::array<double, 3> kinds{};
  for (const auto& k : schema.knobs) {
    card_sum += k.cardinality();
    card_max = std::max(card_max, k.cardinality());
    kinds[static_cast<std::size_t>(k.kind)] += 1.0;
  }
  f.push_back(schema.size() ? card_sum / static_cast<double>(schema.size()) : 0.0);
  f.push_back(card_max);
  f.insert(f.end(), kinds.begin(), kinds.end());
  f.push_back(static_cast<double>(n));
  f.push_back(static_cast<double>(g.edges.size()));

  std::vector<std::pair<int, std::size_t>> ids;
  for (std::size_t i = 0; i < n; ++i) ids.emplace_back(g.nodes[i].id, i);
  std::sort(ids.begin(), ids.end());
  auto lookup = [&](int id) {
    return std::lower_bound(ids.begin(), ids.end(), std::make_pair(id, std::size_t{0}))->second;
  };

  std::array<double, kNodeTypeCount> hist{};
  std::vector<std::size_t> type_of(n);
  for (std::size_t i = 0; i < n; ++i) {
    type_of[i] = static_cast<std::size_t>(g.nodes[i].type);
    hist[type_of[i]] += 1.0;
  }
  for (double& h : hist) h = n ? h / static_cast<double>(n) : 0.0;
  f.insert(f.end(), hist.begin(), hist.end());

  // Longest path (in edges) over control edges; they form a DAG.
  std::vector<std::vector<std::size_t>> control(n);
  std::vector<std::vector<std::size_t>> neighbors(n);
  std::vector<int> indegree(n, 0);
  for (const auto& e : g.edges) {
    const std::size_t s = lookup(e.src);
    const std::size_t d = lookup(e.dst);
    neighbors[s].push_back(d);
    neighbors[d].push_back(s);
    if (e.type == EdgeType::control) {
      control[s].push_back(d);
      ++indegree[d];
    }
  }
  std::vector<int> depth(n, 0);
  std::queue<std::size_t> ready;
  for (std::size_t i = 0; i < n; ++i)
    if (indegree[i] == 0) ready.push(i);
  int max_depth = 0;
  while (!ready.empty()) {
    const std::size_t v = ready.front();
    ready.pop();
    max_depth = std::max(max_depth, depth[v]);
    for (std::size_t u : control[v]) {
      depth[u] = std::max(depth[u], depth[v] + 1);
      if (--indegree[u] == 0) ready.push(u);
    }
  }
  f.push_back(max_depth);
  f.push_back(n ? static_cast<double>(g.edges.size()) / static_cast<double>(n) : 0.0);

  // Two rounds of self-inclusive neighbor averaging over type one-hots.
  // Sums are taken over sorted operands so the result is independent of
  // node and edge order down to the last bit.
  using Row = std::array<double, kNodeTypeCount>;
  std::vector<Row> x(n, Row{});
  for (std::size_t i = 0; i < n; ++i) x[i][type_of[i]] = 1.0;
  std::vector<double> scratch;
  for (int round = 0; round < 2; ++round) {
    std::vector<Row> next(n, Row{});
    for (std::size_t v = 0; v < n; ++v) {
      for (std::size_t c = 0; c < kNodeTypeCount; ++c) {
        scratch.clear();
        scratch.push_back(x[v][c]);
        for (std::size_t u : neighbors[v]) scratch.push_back(x[u][c]);
        next[v][c] = ordered_sum(scratch) / static_cast<double>(1 + neighbors[v].size());
      }
    }
    x = std::move(next);
  }
  Row mean{};
  Row max{};
  for (std::size_t c = 0; c < kNodeTypeCount; ++c) {
    scratch.clear();
    for (std::size_t v = 0; v < n; ++v) {
      scratch.push_back(x[v][c]);
      max[c] = std::max(max[c], x[v][c]);
    }
    mean[c] = n ? ordered_sum(scratch) / static_cast<double>(n) : 0.0;
  }
  scratch.clear();
  for (std::size_t v = 0; v < n; ++v) scratch.push_back(x[v][type_of[v]]);
  const double self_retention = n ? ordered_sum(scratch) / static_cast<double>(n) : 0.0;
  double mean_entropy = 0.0;
  double max_avg = 0.0;
  double drift = 0.0;
  for (std::size_t c = 0; c < kNodeTypeCount; ++c) {
    if (mean[c] > 0.0) mean_entropy -= mean[c] * std::log(mean[c]);
    max_avg += max[c];
    drift += (mean[c] - hist[c]) * (mean[c] - hist[c]);
  }
  f.push_back(self_retention);
  f.push_back(mean_entropy);
  f.push_back(max_avg / static_cast<double>(kNodeTypeCount));
  f.push_back(max[static_cast<std::size_t>(NodeType::loop_header)]);
  f.push_back(std::sqrt(drift));

  if (f.size() != kFeatureDim) throw std::logic_error("feature assembly produced wrong dimension");
  FeatureVector out{};
  std::copy(f.begin(), f.end(), out.begin());
  return out;
}

std::string instance_id(Family family, std::uint64_t seed, SizeClass size) {
  return std::string(to_string(family)) + "-" + std::string(to_string(size)) + "-s" + std::to_string(seed);
}

std::string_view to_string(Family f) noexcept {
  switch (f) {
    case Family::smooth: return "smooth";
    case Family::rugged: return "rugged";
    case Family::deceptive: return "deceptive";
    case Family::plateau: return "plateau";
    case Family::clustered: return "clustered";
  }
  return "?";
}

std::string_view to_string(SizeClass s) noexcept {
  switch (s) {
    case SizeClass::small: return "small";
    case SizeClass::medium: return "medium";
    case SizeClass::large: return "large";
  }
  return "?";
}

std::string_view to_string(KnobKind k) noexcept {
  switch (k) {
    case KnobKind::unroll: return "unroll";
    case KnobKind::pipeline: return "pipeline";
    case KnobKind::partition: return "partition";
  }
  return "?";
}

std::string_view to_string(NodeType t) noexcept {
  switch (t) {
    case NodeType::arith: return "arith";
    case NodeType::mem_load: return "mem-load";
    case NodeType::mem_store: return "mem-store";
    case NodeType::branch: return "branch";
    case NodeType::phi: return "phi";
    case NodeType::loop_header: return "loop-header";
    case NodeType::call: return "call";
    case NodeType::pragma: return "pragma";
  }
  return "?";
}

std::string_view to_string(EdgeType t) noexcept { return t == EdgeType::control ? "control" : "data"; }

namespace {

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view s, const std::array<Enum, N>& all, const char* what) {
  for (Enum e : all)
    if (to_string(e) == s) return e;
  throw std::invalid_argument(std::string("unknown ") + what + ": " + std::string(s));
}

}  // namespace

Family parse_family(std::string_view s) { return parse_enum(s, kAllFamilies, "family"); }

SizeClass parse_size_class(std::string_view s) {
  return parse_enum(s, std::array{SizeClass::small, SizeClass::medium, SizeClass::large}, "size class");
}

KnobKind parse_knob_kind(std::string_view s) {
  return parse_enum(s, std::array{KnobKind::unroll, KnobKind::pipeline, KnobKind::partition}, "knob kind");
}

NodeType parse_node_type(std::string_view s) {
  return parse_enum(s,
                    std::array{NodeType::arith, NodeType::mem_load, NodeType::mem_store, NodeType::branch,
                               NodeType::phi, NodeType::loop_header, NodeType::call, NodeType::pragma},
                    "node type");
}

EdgeType parse_edge_type(std::string_view s) {
  return parse_enum(s, std::array{EdgeType::control, EdgeType::data}, "edge type");
}

}  // namespace soberdse
