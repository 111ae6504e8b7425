#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "oracles.hpp"
#include "soberdse/benchmark.hpp"

using namespace soberdse;

namespace {

// Z-scores every feature over the whole sample.
std::vector<std::vector<double>> standardize(const std::vector<FeatureVector>& raw) {
  std::vector<std::vector<double>> out(raw.size(), std::vector<double>(kFeatureDim));
  for (std::size_t d = 0; d < kFeatureDim; ++d) {
    double mean = 0.0;
    for (const auto& f : raw) mean += f[d];
    mean /= static_cast<double>(raw.size());
    double var = 0.0;
    for (const auto& f : raw) var += (f[d] - mean) * (f[d] - mean);
    const double sd = std::sqrt(var / static_cast<double>(raw.size()));
    for (std::size_t i = 0; i < raw.size(); ++i) out[i][d] = sd > 1e-12 ? (raw[i][d] - mean) / sd : 0.0;
  }
  return out;
}

}  // namespace

TEST_SUITE("benchmark") {

TEST_CASE("synthesis is deterministic") {
  for (Family f : kAllFamilies) {
    CHECK(synth_instance(f, 3, SizeClass::medium) == synth_instance(f, 3, SizeClass::medium));
  }
  CHECK_FALSE(synth_instance(Family::smooth, 1, SizeClass::small) == synth_instance(Family::smooth, 2, SizeClass::small));
}

TEST_CASE("size classes bound the design space") {
  CHECK(synth_instance(Family::smooth, 1, SizeClass::small).schema.space_size() >= 100);
  CHECK(synth_instance(Family::smooth, 1, SizeClass::small).schema.space_size() <= 1000);
  for (Family f : kAllFamilies) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto s = synth_instance(f, seed, SizeClass::small).schema.space_size();
      CHECK(s >= 100);
      CHECK(s <= 1'000);
      const auto m = synth_instance(f, seed, SizeClass::medium).schema.space_size();
      CHECK(m >= 5'000);
      CHECK(m <= 100'000);
    }
  }
}

TEST_CASE("generated instances are valid") {
  for (Family f : kAllFamilies) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto inst = synth_instance(f, seed, SizeClass::medium);
      CHECK_NOTHROW(inst.schema.validate());
      CHECK_NOTHROW(inst.graph.validate());
      CHECK(inst.id == instance_id(f, seed, SizeClass::medium));
    }
  }
}

TEST_CASE("enum names round-trip and unknown tokens are named") {
  for (Family f : kAllFamilies) CHECK(parse_family(to_string(f)) == f);
  CHECK(parse_size_class("large") == SizeClass::large);
  CHECK_THROWS_WITH_AS(parse_family("wobbly"), doctest::Contains("wobbly"), std::invalid_argument);
}

TEST_CASE("isolated arithmetic nodes") {
  BenchmarkInstance inst;
  inst.schema.knobs = {{"u", KnobKind::unroll, {1, 2, 4, 8, 16, 32, 64, 128, 256, 512}},
                       {"p", KnobKind::partition, {1, 2, 4, 8, 16, 32, 64, 128, 256, 512}},
                       {"q", KnobKind::pipeline, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}}};
  for (int i = 0; i < 7; ++i) inst.graph.nodes.push_back({i, NodeType::arith});
  const FeatureVector f = extract_features(inst);
  CHECK(f[0] == doctest::Approx(3.0));
  CHECK(f[8] == 0.0);  // edge count
  CHECK(f[9] == 1.0);
  for (std::size_t t = 10; t < 17; ++t) CHECK(f[t] == 0.0);
  CHECK(f[17] == 0.0);  // depth
}

TEST_CASE("features are invariant to node relabeling and edge order") {
  Rng rng(3);
  for (Family fam : kAllFamilies) {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      const auto inst = synth_instance(fam, seed, SizeClass::medium);
      const FeatureVector base = extract_features(inst);
      for (int trial = 0; trial < 5; ++trial) {
        auto shuffled = inst;
        std::vector<int> relabel(inst.graph.nodes.size());
        std::iota(relabel.begin(), relabel.end(), 1000);
        rng.shuffle(relabel.begin(), relabel.end());
        auto mapped = [&](int id) {
          for (std::size_t i = 0; i < inst.graph.nodes.size(); ++i)
            if (inst.graph.nodes[i].id == id) return relabel[i];
          return -1;
        };
        for (std::size_t i = 0; i < shuffled.graph.nodes.size(); ++i) shuffled.graph.nodes[i].id = relabel[i];
        for (auto& e : shuffled.graph.edges) {
          e.src = mapped(e.src);
          e.dst = mapped(e.dst);
        }
        rng.shuffle(shuffled.graph.nodes.begin(), shuffled.graph.nodes.end());
        rng.shuffle(shuffled.graph.edges.begin(), shuffled.graph.edges.end());
        CHECK(extract_features(shuffled) == base);
      }
    }
  }
}

TEST_CASE("families are separable in feature space") {
  std::vector<FeatureVector> raw;
  std::vector<int> label;
  for (std::size_t fi = 0; fi < kAllFamilies.size(); ++fi) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      raw.push_back(extract_features(synth_instance(kAllFamilies[fi], seed, SizeClass::medium)));
      label.push_back(static_cast<int>(fi));
    }
  }
  for (std::size_t fi = 0; fi < kAllFamilies.size(); ++fi) {
    for (std::uint64_t seed = 1000; seed < 1020; ++seed) {
      raw.push_back(extract_features(synth_instance(kAllFamilies[fi], seed, SizeClass::medium)));
      label.push_back(static_cast<int>(fi));
    }
  }
  const auto z = standardize(raw);
  const std::size_t train_n = 500;
  const std::vector<std::vector<double>> train(z.begin(), z.begin() + train_n);
  const std::vector<std::vector<double>> test(z.begin() + train_n, z.end());
  const std::vector<int> train_label(label.begin(), label.begin() + train_n);
  const std::vector<int> test_label(label.begin() + train_n, label.end());

  std::vector<std::vector<double>> centroid(5, std::vector<double>(kFeatureDim, 0.0));
  for (std::size_t i = 0; i < train_n; ++i)
    for (std::size_t d = 0; d < kFeatureDim; ++d) centroid[train_label[i]][d] += train[i][d] / 100.0;
  double min_gap = INFINITY;
  for (int a = 0; a < 5; ++a) {
    for (int b = a + 1; b < 5; ++b) {
      double d2 = 0.0;
      for (std::size_t d = 0; d < kFeatureDim; ++d) d2 += std::pow(centroid[a][d] - centroid[b][d], 2);
      min_gap = std::min(min_gap, std::sqrt(d2));
    }
  }
  MESSAGE("closest family centroids: " << min_gap);
  CHECK(min_gap >= 0.5);

  const double acc = oracle::nearest_centroid_accuracy(train, train_label, test, test_label, 5);
  MESSAGE("nearest-centroid accuracy on held-out instances: " << acc);
  CHECK(acc >= 0.8);
}

}  // TEST_SUITE
