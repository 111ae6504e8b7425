#include "soberdse/dataset.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "soberdse/rng.hpp"
#include "soberdse/surrogate.hpp"

namespace soberdse {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* kFormat = "soberdse-dataset/1";
constexpr std::uint64_t kSplitTag = 0x53504c4954ULL;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("missing dataset file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << bytes;
  if (!out.flush()) throw std::runtime_error("write failed for " + path.string());
}

// Writes every file to a temporary name first so that a failure part way
// leaves no partial dataset behind.
void commit_files(const fs::path& dir, const std::vector<std::pair<std::string, std::string>>& files) {
  std::vector<fs::path> temps;
  try {
    for (const auto& [name, bytes] : files) {
      temps.push_back(dir / (name + ".tmp"));
      write_file(temps.back(), bytes);
    }
  } catch (...) {
    std::error_code ec;
    for (const auto& t : temps) fs::remove(t, ec);
    throw;
  }
  for (std::size_t i = 0; i < files.size(); ++i) fs::rename(temps[i], dir / files[i].first);
}

json schema_json(const KnobSchema& schema) {
  json knobs = json::array();
  for (const auto& k : schema.knobs) {
    knobs.push_back({{"name", k.name}, {"kind", std::string(to_string(k.kind))}, {"levels", k.levels}});
  }
  return knobs;
}

KnobSchema schema_from(const json& j) {
  KnobSchema s;
  for (const auto& k : j) {
    s.knobs.push_back({k.at("name").get<std::string>(), parse_knob_kind(k.at("kind").get<std::string>()),
                       k.at("levels").get<std::vector<int>>()});
  }
  s.validate();
  return s;
}

json graph_json(const OperationGraph& g) {
  json nodes = json::array();
  for (const auto& n : g.nodes) nodes.push_back({{"id", n.id}, {"type", std::string(to_string(n.type))}});
  json edges = json::array();
  for (const auto& e : g.edges) {
    edges.push_back({{"src", e.src}, {"dst", e.dst}, {"type", std::string(to_string(e.type))}});
  }
  return {{"nodes", nodes}, {"edges", edges}};
}

OperationGraph graph_from(const json& j) {
  OperationGraph g;
  for (const auto& n : j.at("nodes")) {
    g.nodes.push_back({n.at("id").get<int>(), parse_node_type(n.at("type").get<std::string>())});
  }
  for (const auto& e : j.at("edges")) {
    g.edges.push_back({e.at("src").get<int>(), e.at("dst").get<int>(), parse_edge_type(e.at("type").get<std::string>())});
  }
  g.validate();
  return g;
}

std::string instance_line(const BenchmarkInstance& inst, const FeatureVector& features) {
  json j;
  j["id"] = inst.id;
  j["family"] = std::string(to_string(inst.family));
  j["seed"] = inst.seed;
  j["size_class"] = std::string(to_string(inst.size_class));
  j["schema"] = schema_json(inst.schema);
  j["graph"] = graph_json(inst.graph);
  j["feature_vector"] = features;
  return j.dump() + "\n";
}

std::string run_line(const ExplorationResult& r, bool record_timing) {
  json front = json::array();
  for (const auto& p : r.front) {
    front.push_back({{"knobs", p.knobs}, {"area", p.obj().area()}, {"latency", p.obj().latency()}});
  }
  json j;
  j["benchmark_id"] = r.benchmark_id;
  j["explorer_code"] = code(r.explorer);
  j["adrs"] = r.adrs.value();
  j["evaluations_used"] = r.evaluations_used;
  j["wall_seconds"] = record_timing ? r.wall_seconds : 0.0;
  j["front"] = front;
  return j.dump() + "\n";
}

std::string label_line(const LabeledSample& s) {
  json j;
  j["benchmark_id"] = s.benchmark_id;
  j["label_code"] = code(s.label);
  j["adrs_row"] = s.adrs_row;
  return j.dump() + "\n";
}

std::vector<json> parse_lines(const std::string& bytes, const std::string& name) {
  std::vector<json> rows;
  std::istringstream in(bytes);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      rows.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw std::runtime_error(name + " line " + std::to_string(n) + ": " + e.what());
    }
  }
  return rows;
}

json manifest_json(const Manifest& m) {
  json families = json::array();
  for (Family f : m.synth.families) families.push_back(std::string(to_string(f)));
  json counts = json::object();
  for (Family f : m.synth.families) counts[std::string(to_string(f))] = m.synth.seeds.size();
  json config;
  config["families"] = families;
  config["seeds"] = m.synth.seeds;
  config["size_class"] = std::string(to_string(m.synth.size));
  if (m.run) {
    config["budget"] = m.run->budget.max_evaluations;
    if (m.run->budget.max_wall_seconds) config["max_wall_seconds"] = *m.run->budget.max_wall_seconds;
    config["exhaustive_fallback"] = m.run->budget.exhaustive_fallback;
    config["master_seed"] = m.run->master_seed;
    config["split_fraction"] = m.run->split_fraction;
    config["exhaustive_limit"] = m.run->exhaustive_limit;
    config["record_timing"] = m.run->record_timing;
  }
  json j;
  j["format"] = kFormat;
  j["config"] = config;
  j["counts"] = {{"instances", m.synth.families.size() * m.synth.seeds.size()}, {"families", counts}};
  j["split"] = {{"train", m.train_ids}, {"inference", m.inference_ids}};
  j["files"] = m.file_hashes;
  return j;
}

Manifest manifest_from(const json& j) {
  if (j.value("format", "") != kFormat) throw std::runtime_error("not a dataset manifest (format mismatch)");
  Manifest m;
  const json& c = j.at("config");
  for (const auto& f : c.at("families")) m.synth.families.push_back(parse_family(f.get<std::string>()));
  m.synth.seeds = c.at("seeds").get<std::vector<std::uint64_t>>();
  m.synth.size = parse_size_class(c.at("size_class").get<std::string>());
  if (c.contains("budget")) {
    RunConfig r;
    r.budget.max_evaluations = c.at("budget").get<std::uint64_t>();
    if (c.contains("max_wall_seconds")) r.budget.max_wall_seconds = c.at("max_wall_seconds").get<double>();
    r.budget.exhaustive_fallback = c.at("exhaustive_fallback").get<bool>();
    r.master_seed = c.at("master_seed").get<std::uint64_t>();
    r.split_fraction = c.at("split_fraction").get<double>();
    r.exhaustive_limit = c.at("exhaustive_limit").get<std::uint64_t>();
    r.record_timing = c.at("record_timing").get<bool>();
    m.run = r;
  }
  m.train_ids = j.at("split").at("train").get<std::vector<std::string>>();
  m.inference_ids = j.at("split").at("inference").get<std::vector<std::string>>();
  m.file_hashes = j.at("files").get<std::map<std::string, std::string>>();
  return m;
}

fs::path manifest_path_of(const fs::path& p) { return fs::is_directory(p) ? p / kManifestFile : p; }

void load_instances(Dataset& d, const std::string& bytes) {
  for (const auto& j : parse_lines(bytes, kInstancesFile)) {
    BenchmarkInstance inst;
    inst.id = j.at("id").get<std::string>();
    inst.family = parse_family(j.at("family").get<std::string>());
    inst.seed = j.at("seed").get<std::uint64_t>();
    inst.size_class = parse_size_class(j.at("size_class").get<std::string>());
    inst.schema = schema_from(j.at("schema"));
    inst.graph = graph_from(j.at("graph"));
    d.features.push_back(j.at("feature_vector").get<FeatureVector>());
    d.instances.push_back(std::move(inst));
  }
}

void load_results(Dataset& d, const std::string& runs_bytes, const std::string& labels_bytes) {
  d.runs.assign(d.instances.size(), std::vector<ExplorationResult>(kExplorerCount));
  std::vector<std::array<bool, kExplorerCount>> present(d.instances.size());
  for (const auto& j : parse_lines(runs_bytes, kRunsFile)) {
    ExplorationResult r;
    r.benchmark_id = j.at("benchmark_id").get<std::string>();
    r.explorer = explorer_from_code(j.at("explorer_code").get<int>());
    r.adrs = j.at("adrs").get<double>();
    r.evaluations_used = j.at("evaluations_used").get<std::uint64_t>();
    r.wall_seconds = j.at("wall_seconds").get<double>();
    std::vector<DesignPoint> points;
    for (const auto& p : j.at("front")) {
      points.push_back({p.at("knobs").get<Knobs>(), ObjectiveVector(p.at("area").get<double>(), p.at("latency").get<double>())});
    }
    r.front = ParetoFront(points);
    r.evaluated = std::move(points);
    const std::size_t i = d.index_of(r.benchmark_id);
    const auto c = static_cast<std::size_t>(code(r.explorer));
    d.table.set(r.benchmark_id, r.explorer, {*r.adrs, r.evaluations_used, r.wall_seconds});
    present[i][c] = true;
    d.runs[i][c] = std::move(r);
  }
  for (std::size_t i = 0; i < d.instances.size(); ++i) {
    for (std::size_t c = 0; c < kExplorerCount; ++c) {
      if (!present[i][c]) {
        throw std::runtime_error(std::string(kRunsFile) + " has no entry for (" + d.instances[i].id + ", " +
                                 std::string(to_string(explorer_from_code(static_cast<int>(c)))) + ")");
      }
    }
  }
  for (const auto& j : parse_lines(labels_bytes, kLabelsFile)) {
    const auto id = j.at("benchmark_id").get<std::string>();
    const auto row = j.at("adrs_row").get<AdrsRow>();
    LabeledSample s = LabeledSample::from_row(id, d.features[d.index_of(id)], row);
    if (code(s.label) != j.at("label_code").get<int>()) {
      throw std::runtime_error(std::string(kLabelsFile) + " label for " + id + " is not the argmin of its row");
    }
    if (row != d.table.adrs_row(id)) {
      throw std::runtime_error(std::string(kLabelsFile) + " row for " + id + " disagrees with " + kRunsFile);
    }
    d.samples.push_back(std::move(s));
  }
  if (d.samples.size() != d.instances.size()) {
    throw std::runtime_error(std::string(kLabelsFile) + " does not cover every instance");
  }
}

}  // namespace

std::string hex64(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = kDigits[v & 0xf];
  return s;
}

std::string file_hash(const fs::path& path) { return hex64(hash_string(read_file(path))); }

std::size_t train_count(std::size_t n, double split_fraction) {
  if (!(split_fraction > 0.0 && split_fraction < 1.0)) throw std::invalid_argument("split fraction must be in (0, 1)");
  return static_cast<std::size_t>(std::floor(split_fraction * static_cast<double>(n) + 1e-9));
}

std::size_t Dataset::index_of(const std::string& benchmark_id) const {
  for (std::size_t i = 0; i < instances.size(); ++i)
    if (instances[i].id == benchmark_id) return i;
  throw std::out_of_range("unknown benchmark " + benchmark_id);
}

std::vector<LabeledSample> Dataset::samples_for(const std::vector<std::string>& ids) const {
  std::vector<LabeledSample> out;
  for (const auto& id : ids) {
    bool found = false;
    for (const auto& s : samples) {
      if (s.benchmark_id == id) {
        out.push_back(s);
        found = true;
        break;
      }
    }
    if (!found) throw std::out_of_range("no labeled sample for " + id);
  }
  return out;
}

std::string Dataset::fingerprint() const {
  std::string all;
  for (const auto& [name, hash] : manifest.file_hashes) all += name + "=" + hash + ";";
  return hex64(hash_string(all));
}

Manifest synth_dataset(const SynthConfig& config, const fs::path& dir) {
  if (config.families.empty()) throw std::invalid_argument("no families given");
  if (config.seeds.empty()) throw std::invalid_argument("no seeds given");
  fs::create_directories(dir);
  std::string bytes;
  for (Family f : config.families) {
    for (std::uint64_t seed : config.seeds) {
      const BenchmarkInstance inst = synth_instance(f, seed, config.size);
      bytes += instance_line(inst, extract_features(inst));
    }
  }
  Manifest m;
  m.synth = config;
  m.file_hashes[kInstancesFile] = hex64(hash_string(bytes));
  std::error_code ec;
  for (const char* stale : {kRunsFile, kLabelsFile}) fs::remove(dir / stale, ec);
  commit_files(dir, {{kInstancesFile, bytes}, {kManifestFile, manifest_json(m).dump(2) + "\n"}});
  return m;
}

Dataset run_dataset(const fs::path& dir, const RunConfig& config) {
  config.budget.validate();
  train_count(0, config.split_fraction);
  const fs::path manifest_path = dir / kManifestFile;
  if (!fs::exists(dir)) throw std::runtime_error("dataset directory not found: " + dir.string());
  Dataset d = load(manifest_path);
  d.manifest.run = config;

  std::vector<SurrogateModel> models;
  for (const auto& inst : d.instances) models.emplace_back(inst);
  const std::size_t n = d.instances.size();
  std::vector<ExplorationResult> flat(n * kExplorerCount);
  parallel_for(flat.size(), config.workers, [&](std::size_t t) {
    const std::size_t i = t / kExplorerCount;
    const ExplorerId id = kAllExplorers[t % kExplorerCount];
    try {
      flat[t] = explore(id, d.instances[i], models[i], config.budget, explorer_seed(config.master_seed, id));
    } catch (const std::exception& e) {
      throw std::runtime_error("explorer " + std::string(to_string(id)) + " failed on " + d.instances[i].id + ": " +
                               e.what());
    }
  });

  d.runs.clear();
  d.table = PerformanceTable();
  d.samples.clear();
  std::string runs_bytes;
  std::string labels_bytes;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<ExplorationResult> results(std::make_move_iterator(flat.begin() + static_cast<std::ptrdiff_t>(i * kExplorerCount)),
                                           std::make_move_iterator(flat.begin() + static_cast<std::ptrdiff_t>((i + 1) * kExplorerCount)));
    PortfolioResult p = assemble_portfolio(models[i], std::move(results), config.exhaustive_limit);
    for (auto& r : p.results) {
      if (!config.record_timing) r.wall_seconds = 0.0;
      d.table.set(r.benchmark_id, r.explorer, {*r.adrs, r.evaluations_used, r.wall_seconds});
      runs_bytes += run_line(r, config.record_timing);
    }
    d.samples.push_back(LabeledSample::from_row(d.instances[i].id, d.features[i], p.adrs));
    labels_bytes += label_line(d.samples.back());
    d.runs.push_back(std::move(p.results));
  }

  std::vector<std::string> ids;
  for (const auto& inst : d.instances) ids.push_back(inst.id);
  Rng rng(hash_seeds({config.master_seed, kSplitTag}));
  rng.shuffle(ids.begin(), ids.end());
  const std::size_t n_train = train_count(n, config.split_fraction);
  d.manifest.train_ids.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));
  d.manifest.inference_ids.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train), ids.end());
  d.manifest.file_hashes[kRunsFile] = hex64(hash_string(runs_bytes));
  d.manifest.file_hashes[kLabelsFile] = hex64(hash_string(labels_bytes));
  commit_files(dir, {{kRunsFile, runs_bytes}, {kLabelsFile, labels_bytes}});
  commit_files(dir, {{kManifestFile, manifest_json(d.manifest).dump(2) + "\n"}});
  return d;
}

Dataset generate(const SynthConfig& synth, const RunConfig& run, const fs::path& dir) {
  synth_dataset(synth, dir);
  return run_dataset(dir, run);
}

Dataset load(const fs::path& path) {
  const fs::path manifest_path = manifest_path_of(path);
  Dataset d;
  d.dir = manifest_path.parent_path();
  json j;
  try {
    j = json::parse(read_file(manifest_path));
  } catch (const json::exception& e) {
    throw std::runtime_error("dataset corrupted/stale: " + manifest_path.string() + " is not valid JSON (" + e.what() +
                             ")");
  }
  try {
    d.manifest = manifest_from(j);
  } catch (const json::exception& e) {
    throw std::runtime_error("dataset corrupted/stale: bad manifest " + manifest_path.string() + " (" + e.what() + ")");
  }

  std::map<std::string, std::string> bytes;
  for (const auto& [name, expected] : d.manifest.file_hashes) {
    const fs::path file = d.dir / name;
    bytes[name] = read_file(file);
    const std::string actual = hex64(hash_string(bytes[name]));
    if (actual != expected) {
      throw std::runtime_error("dataset corrupted/stale: " + file.string() + " hashes to " + actual +
                               ", manifest expects " + expected);
    }
  }
  if (!bytes.count(kInstancesFile)) throw std::runtime_error("dataset corrupted/stale: manifest lists no instances file");
  try {
    load_instances(d, bytes[kInstancesFile]);
    if (d.manifest.run) {
      for (const char* name : {kRunsFile, kLabelsFile}) {
        if (!bytes.count(name)) {
          throw std::runtime_error("missing dataset file: " + (d.dir / name).string());
        }
      }
      load_results(d, bytes[kRunsFile], bytes[kLabelsFile]);
    }
  } catch (const json::exception& e) {
    throw std::runtime_error("dataset corrupted/stale: " + std::string(e.what()));
  }
  return d;
}

}  // namespace soberdse
