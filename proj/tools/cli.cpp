#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "json.hpp"
#include "soberdse/dataset.hpp"
#include "soberdse/rng.hpp"
#include "soberdse/selector.hpp"

namespace soberdse::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr const char* kCheckpointFile = "checkpoint.txt";
constexpr const char* kLossCurveFile = "supervised_loss.csv";
constexpr const char* kRewardCurveFile = "rl_reward.csv";
constexpr const char* kReportFile = "report.csv";
constexpr std::uint64_t kRerunTag = 0x5245525552ULL;

// Bad flag values detected after parsing; mapped to the usage exit code.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    parts.emplace_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::uint64_t parse_u64(std::string_view s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw std::invalid_argument("bad seed '" + std::string(s) + "'");
  }
  return v;
}

std::vector<Family> parse_families(const std::string& text) {
  std::vector<Family> out;
  for (const auto& token : split(text, ',')) {
    try {
      out.push_back(parse_family(token));
    } catch (const std::exception&) {
      throw UsageError("unknown family '" + token + "'");
    }
  }
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out.flush()) throw std::runtime_error("write failed for " + path.string());
}

std::vector<json> read_jsonl(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("missing file: " + path.string());
  std::vector<json> rows;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) rows.push_back(json::parse(line));
  return rows;
}

Dataset load_run_dataset(const std::string& dir) {
  if (!fs::exists(dir)) throw std::runtime_error("dataset not found: " + dir);
  Dataset d = load(dir);
  if (!d.manifest.run) throw std::runtime_error("dataset " + dir + " has no labels file; run the portfolio first");
  return d;
}

// --- synth ---------------------------------------------------------------

struct SynthFlags {
  std::string families = "smooth,rugged,deceptive,plateau,clustered";
  std::string seeds = "0..5";
  std::string size = "medium";
  std::string out;
};

void cmd_synth(const SynthFlags& f, std::ostream& out) {
  SynthConfig cfg;
  cfg.families = parse_families(f.families);
  try {
    cfg.seeds = parse_seed_list(f.seeds);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  try {
    cfg.size = parse_size_class(f.size);
  } catch (const std::exception&) {
    throw UsageError("unknown size class '" + f.size + "'");
  }
  synth_dataset(cfg, f.out);
  out << "wrote " << cfg.families.size() * cfg.seeds.size() << " instances to " << (fs::path(f.out) / kInstancesFile).string()
      << '\n';
}

// --- run -----------------------------------------------------------------

struct RunFlags {
  std::string dataset;
  long long budget = 500;
  std::uint64_t master_seed = 0;
  unsigned workers = 1;
  double split = 0.69;
  std::uint64_t exhaustive_limit = kDefaultExhaustiveLimit;
  bool record_timing = false;
};

void cmd_run(const RunFlags& f, std::ostream& out) {
  if (f.budget < 1) throw UsageError("--budget must be >= 1, got " + std::to_string(f.budget));
  if (f.workers < 1) throw UsageError("--workers must be >= 1");
  if (!(f.split > 0.0 && f.split < 1.0)) throw UsageError("--split must be in (0, 1)");
  if (!fs::exists(f.dataset)) throw std::runtime_error("dataset not found: " + f.dataset);
  RunConfig cfg;
  cfg.budget.max_evaluations = static_cast<std::uint64_t>(f.budget);
  cfg.master_seed = f.master_seed;
  cfg.workers = f.workers;
  cfg.split_fraction = f.split;
  cfg.exhaustive_limit = f.exhaustive_limit;
  cfg.record_timing = f.record_timing;
  const Dataset d = run_dataset(f.dataset, cfg);
  std::array<int, kExplorerCount> wins{};
  for (const auto& s : d.samples) ++wins[static_cast<std::size_t>(code(s.label))];
  out << "ran " << d.instances.size() << " instances x " << kExplorerCount << " explorers; train "
      << d.manifest.train_ids.size() << ", inference " << d.manifest.inference_ids.size() << "\nbest counts:";
  for (ExplorerId id : kAllExplorers) out << ' ' << to_string(id) << '=' << wins[static_cast<std::size_t>(code(id))];
  out << '\n';
}

// --- train ---------------------------------------------------------------

struct TrainFlags {
  std::string dataset;
  std::uint64_t seed = 0;
  std::string out;
  int supervised_epochs = 250;
  int rl_epochs = 1000;
  double entropy_coef = 0.01;
  double reward_floor = -10.0;
};

void cmd_train(const TrainFlags& f, std::ostream& out, std::ostream& err) {
  if (f.supervised_epochs < 0 || f.rl_epochs < 0) throw UsageError("epoch counts must be >= 0");
  const Dataset d = load_run_dataset(f.dataset);
  const auto train = d.samples_for(d.manifest.train_ids);
  if (train.empty()) throw std::runtime_error("dataset " + f.dataset + " has an empty training split");

  Checkpoint ckpt;
  ckpt.seed = f.seed;
  ckpt.dataset_fingerprint = d.fingerprint();
  ckpt.supervised.epochs = f.supervised_epochs;
  SupervisedTraining sup = pretrain_supervised(train, f.seed, ckpt.supervised);
  for (const auto& w : sup.warnings) err << "warning: " << w << '\n';
  PpoConfig ppo;
  ppo.epochs = f.rl_epochs;
  ppo.entropy_coef = f.entropy_coef;
  ppo.reward_floor = f.reward_floor;
  RlTraining rl = train_rl(PpoAgent::init(f.seed, ppo), sup.head, train, d.table, f.seed);
  ckpt.head = std::move(sup.head);
  ckpt.agent = std::move(rl.agent);

  std::ostringstream ck;
  write_checkpoint(ck, ckpt);
  std::string loss = "epoch,loss\n";
  for (std::size_t i = 0; i < sup.loss_curve.size(); ++i) loss += std::to_string(i) + "," + csv_number(sup.loss_curve[i]) + "\n";
  std::string reward = "epoch,mean_reward\n";
  for (std::size_t i = 0; i < rl.reward_curve.size(); ++i) {
    reward += std::to_string(i) + "," + csv_number(rl.reward_curve[i]) + "\n";
  }
  const fs::path dir(f.out);
  write_text(dir / kCheckpointFile, ck.str());
  write_text(dir / kLossCurveFile, loss);
  write_text(dir / kRewardCurveFile, reward);
  out << "trained on " << train.size() << " samples; checkpoint " << (dir / kCheckpointFile).string() << '\n';
}

// --- infer ---------------------------------------------------------------

struct InferFlags {
  std::string dataset;
  std::string checkpoints;
  long long budget = 500;
  std::string out;
};

void cmd_infer(const InferFlags& f, std::ostream& out, std::ostream& err) {
  if (f.budget < 1) throw UsageError("--budget must be >= 1, got " + std::to_string(f.budget));
  const Dataset d = load_run_dataset(f.dataset);
  fs::path ckpt_path(f.checkpoints);
  if (fs::is_directory(ckpt_path)) ckpt_path /= kCheckpointFile;
  std::ifstream ck(ckpt_path);
  if (!ck) throw std::runtime_error("missing checkpoint: " + ckpt_path.string());
  const Checkpoint ckpt = read_checkpoint(ck);
  if (ckpt.dataset_fingerprint != d.fingerprint()) {
    err << "warning: checkpoint was trained on dataset " << ckpt.dataset_fingerprint << ", inferring on "
        << d.fingerprint() << '\n';
  }

  Budget budget = d.manifest.run->budget;
  budget.max_evaluations = static_cast<std::uint64_t>(f.budget);
  std::string csv = "benchmark_id";
  for (ExplorerId id : kAllExplorers) csv += ",adrs_" + std::string(to_string(id));
  csv += ",selected,selected_adrs,rerun_adrs,supervised_selected,best,best_adrs,regret\n";

  std::size_t correct = 0;
  double selected_sum = 0.0;
  std::array<double, kExplorerCount> fixed_sum{};
  for (const auto& id : d.manifest.inference_ids) {
    const std::size_t i = d.index_of(id);
    const BenchmarkInstance& inst = d.instances[i];
    const AdrsRow row = d.table.adrs_row(id);
    const Recommendation rec = recommend(ckpt.head, ckpt.agent, d.features[i]);
    const ExplorerId sup = recommend_supervised(ckpt.head, d.features[i]);
    const ExplorerId best = argmin_explorer(row);
    const double selected = row[static_cast<std::size_t>(code(rec.explorer))];

    const SurrogateModel model(inst);
    const ParetoFront reference = reference_front(d.runs[i], model, d.manifest.run->exhaustive_limit);
    const std::uint64_t seed =
        hash_seeds({d.manifest.run->master_seed, static_cast<std::uint64_t>(code(rec.explorer)), kRerunTag});
    const ExplorationResult rerun = explore(rec.explorer, inst, model, budget, seed);
    const double rerun_adrs = adrs(reference, rerun.front);

    csv += id;
    for (double v : row) csv += "," + csv_number(v);
    csv += "," + std::string(to_string(rec.explorer)) + "," + csv_number(selected) + "," + csv_number(rerun_adrs) +
           "," + std::string(to_string(sup)) + "," + std::string(to_string(best)) + "," +
           csv_number(row[static_cast<std::size_t>(code(best))]) + "," +
           csv_number(selected - row[static_cast<std::size_t>(code(best))]) + "\n";
    correct += rec.explorer == best;
    selected_sum += selected;
    for (std::size_t k = 0; k < kExplorerCount; ++k) fixed_sum[k] += row[k];
  }
  fs::path report(f.out);
  if (fs::is_directory(report) || !report.has_extension()) report /= kReportFile;
  write_text(report, csv);

  const std::size_t n = d.manifest.inference_ids.size();
  out << "wrote " << n << " rows to " << report.string() << '\n';
  if (n > 0) {
    const auto best_fixed = std::min_element(fixed_sum.begin(), fixed_sum.end()) - fixed_sum.begin();
    out << "top-1 accuracy " << csv_number(static_cast<double>(correct) / static_cast<double>(n))
        << "; mean selected ADRS " << csv_number(selected_sum / static_cast<double>(n)) << "; best fixed "
        << to_string(explorer_from_code(static_cast<int>(best_fixed))) << " "
        << csv_number(fixed_sum[static_cast<std::size_t>(best_fixed)] / static_cast<double>(n)) << '\n';
  }
}

// --- report --------------------------------------------------------------

struct ReportFlags {
  std::string runs;
  std::string labels;
  std::string report;
  std::string out;
};

std::vector<std::map<std::string, std::string>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("missing file: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + " is empty");
  const auto header = split(line, ',');
  std::vector<std::map<std::string, std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != header.size()) throw std::runtime_error(path.string() + " has a ragged row");
    std::map<std::string, std::string> row;
    for (std::size_t i = 0; i < header.size(); ++i) row[header[i]] = cells[i];
    rows.push_back(std::move(row));
  }
  return rows;
}

void cmd_report(const ReportFlags& f, std::ostream& out) {
  const auto runs = read_jsonl(f.runs);
  const auto labels = read_jsonl(f.labels);
  const fs::path dir(f.out);

  std::string matrix = "benchmark_id";
  for (ExplorerId id : kAllExplorers) matrix += "," + std::string(to_string(id));
  matrix += ",best\n";
  std::map<std::string, int> label_of;
  for (const auto& l : labels) {
    const auto id = l.at("benchmark_id").get<std::string>();
    const auto row = l.at("adrs_row").get<std::vector<double>>();
    label_of[id] = l.at("label_code").get<int>();
    matrix += id;
    for (double v : row) matrix += "," + csv_number(v);
    matrix += "," + std::string(to_string(explorer_from_code(label_of[id]))) + "\n";
  }
  write_text(dir / "adrs_matrix.csv", matrix);

  std::array<double, kExplorerCount> seconds{};
  std::array<std::uint64_t, kExplorerCount> evaluations{};
  std::array<std::size_t, kExplorerCount> count{};
  for (const auto& r : runs) {
    const auto c = static_cast<std::size_t>(code(explorer_from_code(r.at("explorer_code").get<int>())));
    seconds[c] += r.at("wall_seconds").get<double>();
    evaluations[c] += r.at("evaluations_used").get<std::uint64_t>();
    ++count[c];
  }
  std::string runtime = "explorer,runs,total_wall_seconds,total_evaluations\n";
  for (ExplorerId id : kAllExplorers) {
    const auto c = static_cast<std::size_t>(code(id));
    runtime += std::string(to_string(id)) + "," + std::to_string(count[c]) + "," + csv_number(seconds[c]) + "," +
               std::to_string(evaluations[c]) + "\n";
  }
  write_text(dir / "runtime.csv", runtime);

  std::size_t written = 2;
  if (!f.report.empty()) {
    fs::path report(f.report);
    if (fs::is_directory(report)) report /= kReportFile;
    const auto rows = read_csv(report);
    std::string acc = "model,correct,total,accuracy\n";
    for (const char* column : {"selected", "supervised_selected"}) {
      if (!rows.empty() && !rows.front().count(column)) continue;
      std::size_t correct = 0;
      for (const auto& row : rows) {
        const auto it = label_of.find(row.at("benchmark_id"));
        if (it == label_of.end()) throw std::runtime_error("no label for " + row.at("benchmark_id"));
        correct += code(parse_explorer(row.at(column))) == it->second;
      }
      const double accuracy = rows.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(rows.size());
      acc += std::string(column == std::string("selected") ? "hybrid" : "supervised") + "," + std::to_string(correct) +
             "," + std::to_string(rows.size()) + "," + csv_number(accuracy) + "\n";
    }
    write_text(dir / "accuracy.csv", acc);
    ++written;
  }
  out << "wrote " << written << " tables to " << dir.string() << '\n';
}

int dispatch(CLI::App& app, const std::function<void()>& action, std::ostream& err) {
  try {
    action();
    return kExitOk;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n' << "run '" << app.get_name() << " --help' for usage\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace

std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
  std::vector<std::uint64_t> seeds;
  for (const auto& part : split(text, ',')) {
    const auto dots = part.find("..");
    if (dots == std::string::npos) {
      seeds.push_back(parse_u64(part));
      continue;
    }
    const std::uint64_t lo = parse_u64(std::string_view(part).substr(0, dots));
    const std::uint64_t hi = parse_u64(std::string_view(part).substr(dots + 2));
    if (hi < lo) throw std::invalid_argument("empty seed range '" + part + "'");
    if (hi - lo >= 1'000'000) throw std::invalid_argument("seed range '" + part + "' is too long");
    for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
  }
  return seeds;
}

std::string csv_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Per-instance selection of design-space explorers", "soberdse"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  SynthFlags synth;
  auto* s = app.add_subcommand("synth", "Synthesize benchmark instances");
  s->add_option("--families", synth.families, "Comma-separated families");
  s->add_option("--seeds", synth.seeds, "Seeds, e.g. 0..4 or 1,3,5");
  s->add_option("--size", synth.size, "Size class: small, medium or large");
  s->add_option("--out", synth.out, "Dataset directory")->required();

  RunFlags runf;
  auto* r = app.add_subcommand("run", "Run the explorer portfolio and derive labels");
  r->add_option("--dataset", runf.dataset, "Dataset directory")->required();
  r->add_option("--budget", runf.budget, "Surrogate evaluations per explorer");
  r->add_option("--master-seed", runf.master_seed, "Seed from which explorer seeds are derived");
  r->add_option("--workers", runf.workers, "Parallel (instance, explorer) workers");
  r->add_option("--split", runf.split, "Training fraction of the instances");
  r->add_option("--exhaustive-limit", runf.exhaustive_limit, "Largest space with an exhaustive reference front");
  r->add_flag("--record-timing", runf.record_timing, "Store measured wall time (output is then not reproducible)");

  TrainFlags train;
  auto* t = app.add_subcommand("train", "Pretrain the supervised head and train the PPO agent");
  t->add_option("--dataset", train.dataset, "Dataset directory")->required();
  t->add_option("--seed", train.seed, "Training seed");
  t->add_option("--out", train.out, "Checkpoint directory")->required();
  t->add_option("--supervised-epochs", train.supervised_epochs, "Supervised epochs");
  t->add_option("--rl-epochs", train.rl_epochs, "PPO epochs");
  t->add_option("--entropy-coef", train.entropy_coef, "Entropy bonus coefficient");
  t->add_option("--reward-floor", train.reward_floor, "Lower clamp on training rewards (0 disables)");

  InferFlags infer;
  auto* i = app.add_subcommand("infer", "Recommend explorers for the inference split");
  i->add_option("--dataset", infer.dataset, "Dataset directory")->required();
  i->add_option("--checkpoints", infer.checkpoints, "Checkpoint directory or file")->required();
  i->add_option("--budget", infer.budget, "Budget for re-running the selected explorer");
  i->add_option("--out", infer.out, "Report directory or CSV path")->required();

  ReportFlags report;
  auto* p = app.add_subcommand("report", "Summarize runs, labels and an inference report as CSV");
  p->add_option("--runs", report.runs, "runs.jsonl")->required();
  p->add_option("--labels", report.labels, "labels.jsonl")->required();
  p->add_option("--report", report.report, "report.csv from infer (optional)");
  p->add_option("--out", report.out, "Output directory")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (s->parsed()) return dispatch(*s, [&] { cmd_synth(synth, out); }, err);
  if (r->parsed()) return dispatch(*r, [&] { cmd_run(runf, out); }, err);
  if (t->parsed()) return dispatch(*t, [&] { cmd_train(train, out, err); }, err);
  if (i->parsed()) return dispatch(*i, [&] { cmd_infer(infer, out, err); }, err);
  return dispatch(*p, [&] { cmd_report(report, out); }, err);
}

}  // namespace soberdse::cli
