#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "soberdse/benchmark.hpp"
#include "soberdse/explorers.hpp"
#include "soberdse/performance.hpp"

namespace soberdse {

inline constexpr const char* kInstancesFile = "instances.jsonl";
inline constexpr const char* kRunsFile = "runs.jsonl";
inline constexpr const char* kLabelsFile = "labels.jsonl";
inline constexpr const char* kManifestFile = "manifest.json";

struct SynthConfig {
  std::vector<Family> families;
  std::vector<std::uint64_t> seeds;
  SizeClass size = SizeClass::medium;
};

struct RunConfig {
  Budget budget;
  std::uint64_t master_seed = 0;
  double split_fraction = 0.69;
  unsigned workers = 1;
  std::uint64_t exhaustive_limit = kDefaultExhaustiveLimit;
  /// Store measured wall time in runs.jsonl. Off by default so that repeated
  /// runs produce identical bytes; wall_seconds is then written as 0.
  bool record_timing = false;
};

struct Manifest {
  SynthConfig synth;
  std::optional<RunConfig> run;  // absent until the portfolio has been run
  std::vector<std::string> train_ids;
  std::vector<std::string> inference_ids;
  std::map<std::string, std::string> file_hashes;  // file name -> FNV-1a hex
};

struct Dataset {
  std::filesystem::path dir;
  Manifest manifest;
  std::vector<BenchmarkInstance> instances;
  std::vector<FeatureVector> features;
  /// Per instance, ten results indexed by explorer code. Loaded results carry
  /// only their fronts (evaluated == front points).
  std::vector<std::vector<ExplorationResult>> runs;
  PerformanceTable table;
  std::vector<LabeledSample> samples;  // instance order

  std::size_t index_of(const std::string& benchmark_id) const;
  std::vector<LabeledSample> samples_for(const std::vector<std::string>& ids) const;
  /// Hash over the dataset's file hashes; identifies training data in checkpoints.
  std::string fingerprint() const;
};

/// 64-bit FNV-1a over the bytes of `path`, 16 lower-case hex digits.
std::string file_hash(const std::filesystem::path& path);
std::string hex64(std::uint64_t v);

/// floor(fraction * n), guarded against representation error.
std::size_t train_count(std::size_t n, double split_fraction);

/// Writes instances.jsonl and a synth-stage manifest.
Manifest synth_dataset(const SynthConfig& config, const std::filesystem::path& dir);
/// Runs the portfolio over a synthesized dataset; writes runs.jsonl,
/// labels.jsonl and the completed manifest (last). Explorer failures remove
/// partial files and rethrow naming (benchmark, explorer).
Dataset run_dataset(const std::filesystem::path& dir, const RunConfig& config);
Dataset generate(const SynthConfig& synth, const RunConfig& run, const std::filesystem::path& dir);

/// Reads `manifest.json` (or a directory holding it), verifying every file
/// hash. Errors: missing file naming its path; "dataset corrupted/stale".
Dataset load(const std::filesystem::path& manifest_path);

}  // namespace soberdse
