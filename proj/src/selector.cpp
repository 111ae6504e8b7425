#include "soberdse/selector.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "soberdse/rng.hpp"

namespace soberdse {

namespace {

constexpr std::uint64_t kHeadTag = 0x53555045ULL;
constexpr std::uint64_t kActorTag = 0x4143544fULL;
constexpr std::uint64_t kCriticTag = 0x43524954ULL;
constexpr std::uint64_t kRolloutTag = 0x524f4c4cULL;

Vector critic_input(const Vector& state) { return state.head(static_cast<Eigen::Index>(kFeatureDim)); }

int sample_action(const Vector& pi, Rng& rng) {
  double u = rng.uniform();
  for (Eigen::Index i = 0; i < pi.size(); ++i) {
    if (u < pi(i)) return static_cast<int>(i);
    u -= pi(i);
  }
  return static_cast<int>(pi.size()) - 1;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

FeatureScaler FeatureScaler::identity() {
  FeatureScaler s;
  s.scale.fill(1.0);
  return s;
}

FeatureScaler FeatureScaler::fit(std::span<const FeatureVector> features) {
  if (features.empty()) throw std::invalid_argument("cannot fit a feature scaler on no samples");
  FeatureScaler s;
  const double n = static_cast<double>(features.size());
  for (std::size_t j = 0; j < kFeatureDim; ++j) {
    double mean = 0.0;
    for (const auto& f : features) mean += f[j];
    mean /= n;
    double var = 0.0;
    for (const auto& f : features) var += (f[j] - mean) * (f[j] - mean);
    const double sd = std::sqrt(var / n);
    s.mean[j] = mean;
    s.scale[j] = sd > 1e-12 ? sd : 1.0;
  }
  return s;
}

Vector FeatureScaler::apply(const FeatureVector& features) const {
  Vector z(static_cast<Eigen::Index>(kFeatureDim));
  for (std::size_t j = 0; j < kFeatureDim; ++j) z(static_cast<Eigen::Index>(j)) = (features[j] - mean[j]) / scale[j];
  return z;
}

SupervisedTraining pretrain_supervised(std::span<const LabeledSample> data, std::uint64_t seed,
                                       const SupervisedConfig& config) {
  if (data.empty()) throw std::invalid_argument("supervised pretraining needs at least one sample");
  if (config.epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  SupervisedTraining out;
  std::vector<FeatureVector> features;
  for (const auto& s : data) features.push_back(s.features);
  out.head.scaler = FeatureScaler::fit(features);
  out.head.net = Mlp::init(static_cast<int>(kFeatureDim), config.hidden_dim, static_cast<int>(kExplorerCount),
                           hash_seeds({seed, kHeadTag}));

  const bool single_class = std::all_of(data.begin(), data.end(), [&](const auto& s) { return s.label == data[0].label; });
  if (single_class) {
    out.warnings.push_back("all samples share label " + std::string(to_string(data[0].label)) +
                           "; the head will be a constant predictor");
  }

  std::vector<Vector> inputs;
  for (const auto& f : features) inputs.push_back(out.head.scaler.apply(f));
  const double inv_n = 1.0 / static_cast<double>(data.size());
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    MlpGradients grad = MlpGradients::zeros_like(out.head.net);
    double loss = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const ForwardCache cache = forward_cached(out.head.net, inputs[i]);
      const LossAndGradient ce = cross_entropy(softmax(cache.logits), code(data[i].label));
      loss += ce.loss * inv_n;
      backward(out.head.net, cache, ce.dlogits * inv_n, grad);
    }
    if (!std::isfinite(loss)) {
      throw std::runtime_error("diverged: supervised loss is not finite at epoch " + std::to_string(epoch));
    }
    out.loss_curve.push_back(loss);
    sgd_step(out.head.net, grad, config.learning_rate);
  }
  return out;
}

Vector supervised_probs(const SupervisedHead& head, const FeatureVector& features) {
  return softmax(forward(head.net, head.scaler.apply(features)));
}

Vector selector_state(const SupervisedHead& head, const FeatureVector& features) {
  const Vector z = head.scaler.apply(features);
  Vector state(kStateDim);
  state << z, softmax(forward(head.net, z));
  return state;
}

double reward(double adrs_chosen, double adrs_best) {
  if (!(adrs_chosen >= 0.0) || !(adrs_best >= 0.0)) throw std::invalid_argument("ADRS values must be >= 0");
  return -std::abs(adrs_chosen - adrs_best) / std::max(adrs_best, kRewardEpsilon);
}

GaeResult gae(std::span<const double> rewards, std::span<const double> values, double bootstrap_value, double gamma,
              double lambda) {
  if (rewards.size() != values.size()) {
    throw std::invalid_argument("GAE needs one value per reward (" + std::to_string(rewards.size()) + " rewards, " +
                                std::to_string(values.size()) + " values)");
  }
  if (rewards.empty()) throw std::invalid_argument("GAE needs at least one step");
  const std::size_t n = rewards.size();
  GaeResult out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  double next_value = bootstrap_value;
  double next_adv = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    const double delta = rewards[t] + gamma * next_value - values[t];
    next_adv = delta + gamma * lambda * next_adv;
    out.advantages[t] = next_adv;
    out.returns[t] = next_adv + values[t];
    next_value = values[t];
  }
  return out;
}

PpoAgent PpoAgent::init(std::uint64_t seed, const PpoConfig& config) {
  PpoAgent a;
  a.config = config;
  a.actor = Mlp::init(kStateDim, config.hidden_dim, static_cast<int>(kExplorerCount), hash_seeds({seed, kActorTag}));
  a.critic = Mlp::init(static_cast<int>(kFeatureDim), config.hidden_dim, 1, hash_seeds({seed, kCriticTag}));
  return a;
}

double clipped_policy_term(double ratio, double advantage, double clip) {
  const double clipped = std::clamp(ratio, 1.0 - clip, 1.0 + clip);
  return -std::min(ratio * advantage, clipped * advantage);
}

PpoLosses ppo_loss(const PpoAgent& agent, std::span<const Transition> buffer, std::span<const double> advantages,
                   std::span<const double> returns, MlpGradients* actor_grad, MlpGradients* critic_grad) {
  if (buffer.empty()) throw std::invalid_argument("PPO buffer is empty");
  if (advantages.size() != buffer.size() || returns.size() != buffer.size()) {
    throw std::invalid_argument("PPO buffer, advantages and returns differ in length");
  }
  const PpoConfig& cfg = agent.config;
  const double inv_n = 1.0 / static_cast<double>(buffer.size());
  PpoLosses l;
  for (std::size_t t = 0; t < buffer.size(); ++t) {
    const Transition& tr = buffer[t];
    const ForwardCache ac = forward_cached(agent.actor, tr.state);
    const Vector pi = softmax(ac.logits);
    if (tr.action < 0 || tr.action >= pi.size()) throw std::invalid_argument("transition action out of range");
    const double log_pi = std::log(std::max(pi(tr.action), kProbabilityFloor));
    const double ratio = std::exp(log_pi - tr.log_prob);
    const double a = advantages[t];
    const double h = entropy(pi);
    l.policy += clipped_policy_term(ratio, a, cfg.clip) * inv_n;
    l.entropy += h * inv_n;

    if (actor_grad) {
      const double clipped = std::clamp(ratio, 1.0 - cfg.clip, 1.0 + cfg.clip);
      Vector dlogits = -cfg.entropy_coef * inv_n * entropy_gradient(pi);
      if (ratio * a <= clipped * a) {
        // d ratio / d logits = ratio (onehot - pi)
        Vector dratio = -ratio * pi;
        dratio(tr.action) += ratio;
        dlogits += -a * inv_n * dratio;
      }
      backward(agent.actor, ac, dlogits, *actor_grad);
    }

    const ForwardCache cc = forward_cached(agent.critic, critic_input(tr.state));
    const double err = cc.logits(0) - returns[t];
    l.value += err * err * inv_n;
    if (critic_grad) {
      Vector dv(1);
      dv(0) = cfg.value_coef * 2.0 * err * inv_n;
      backward(agent.critic, cc, dv, *critic_grad);
    }
  }
  l.total = l.policy + cfg.value_coef * l.value - cfg.entropy_coef * l.entropy;
  return l;
}

GaeResult buffer_advantages(std::span<const Transition> buffer, const PpoConfig& config) {
  GaeResult out;
  std::size_t start = 0;
  while (start < buffer.size()) {
    std::size_t end = start;
    while (end + 1 < buffer.size() && !buffer[end].done) ++end;
    std::vector<double> r, v;
    for (std::size_t t = start; t <= end; ++t) {
      r.push_back(buffer[t].reward);
      v.push_back(buffer[t].value);
    }
    // The buffer end is treated as terminal.
    const GaeResult ep = gae(r, v, 0.0, config.gamma, config.lambda);
    out.advantages.insert(out.advantages.end(), ep.advantages.begin(), ep.advantages.end());
    out.returns.insert(out.returns.end(), ep.returns.begin(), ep.returns.end());
    start = end + 1;
  }
  const std::size_t n = out.advantages.size();
  if (n >= 2) {
    const double mean = std::accumulate(out.advantages.begin(), out.advantages.end(), 0.0) / static_cast<double>(n);
    double var = 0.0;
    for (double a : out.advantages) var += (a - mean) * (a - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    for (double& a : out.advantages) a = sd > 1e-12 ? (a - mean) / sd : 0.0;
  }
  return out;
}

PpoLosses ppo_update(PpoAgent& agent, std::span<const Transition> buffer) {
  if (buffer.empty()) throw std::invalid_argument("PPO buffer is empty");
  const GaeResult adv = buffer_advantages(buffer, agent.config);
  PpoLosses first;
  for (int pass = 0; pass < agent.config.passes; ++pass) {
    MlpGradients ga = MlpGradients::zeros_like(agent.actor);
    MlpGradients gc = MlpGradients::zeros_like(agent.critic);
    const PpoLosses l = ppo_loss(agent, buffer, adv.advantages, adv.returns, &ga, &gc);
    if (!std::isfinite(l.total)) {
      throw std::runtime_error("diverged: PPO loss is not finite (policy " + fmt(l.policy) + ", value " +
                               fmt(l.value) + ", entropy " + fmt(l.entropy) + ")");
    }
    if (pass == 0) first = l;
    sgd_step(agent.actor, ga, agent.config.learning_rate);
    sgd_step(agent.critic, gc, agent.config.learning_rate);
  }
  return first;
}

RlTraining train_rl(PpoAgent agent, const SupervisedHead& head, std::span<const LabeledSample> data,
                    const PerformanceTable& table, std::uint64_t seed) {
  if (data.empty()) throw std::invalid_argument("RL training needs at least one sample");
  std::vector<Vector> states;
  std::vector<AdrsRow> rows;
  for (const auto& s : data) {
    states.push_back(selector_state(head, s.features));
    AdrsRow row{};
    for (ExplorerId id : kAllExplorers) row[static_cast<std::size_t>(code(id))] = table.at(s.benchmark_id, id).adrs;
    rows.push_back(row);
  }

  Rng rng(hash_seeds({seed, kRolloutTag}));
  RlTraining out;
  std::vector<std::size_t> order(data.size());
  std::vector<Transition> buffer;
  for (int epoch = 0; epoch < agent.config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order.begin(), order.end());
    buffer.clear();
    double total = 0.0;
    for (std::size_t i : order) {
      Transition tr;
      tr.state = states[i];
      const Vector pi = softmax(forward(agent.actor, tr.state));
      tr.action = sample_action(pi, rng);
      tr.log_prob = std::log(std::max(pi(tr.action), kProbabilityFloor));
      tr.value = forward(agent.critic, critic_input(tr.state))(0);
      const double best = *std::min_element(rows[i].begin(), rows[i].end());
      tr.reward = reward(rows[i][static_cast<std::size_t>(tr.action)], best);
      if (agent.config.reward_floor < 0.0) tr.reward = std::max(tr.reward, agent.config.reward_floor);
      tr.done = true;
      total += tr.reward;
      buffer.push_back(std::move(tr));
    }
    out.reward_curve.push_back(total / static_cast<double>(buffer.size()));
    ppo_update(agent, buffer);
  }
  out.agent = std::move(agent);
  return out;
}

int argmax(const Vector& v) {
  int best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (v(i) > v(best)) best = static_cast<int>(i);
  return best;
}

Recommendation recommend(const SupervisedHead& head, const PpoAgent& agent, const FeatureVector& features) {
  Recommendation r;
  r.probabilities = softmax(forward(agent.actor, selector_state(head, features)));
  r.explorer = explorer_from_code(argmax(r.probabilities));
  return r;
}

ExplorerId recommend_supervised(const SupervisedHead& head, const FeatureVector& features) {
  return explorer_from_code(argmax(supervised_probs(head, features)));
}

void write_checkpoint(std::ostream& out, const Checkpoint& c) {
  const PpoConfig& p = c.agent.config;
  out << "soberdse-checkpoint 1\n";
  out << "seed " << c.seed << " dataset " << (c.dataset_fingerprint.empty() ? "-" : c.dataset_fingerprint) << '\n';
  out << "supervised hidden " << c.supervised.hidden_dim << " lr " << fmt(c.supervised.learning_rate) << " epochs "
      << c.supervised.epochs << '\n';
  out << "ppo hidden " << p.hidden_dim << " clip " << fmt(p.clip) << " gamma " << fmt(p.gamma) << " lambda "
      << fmt(p.lambda) << " value_coef " << fmt(p.value_coef) << " entropy_coef " << fmt(p.entropy_coef) << " lr "
      << fmt(p.learning_rate) << " epochs " << p.epochs << " passes " << p.passes << " reward_floor "
      << fmt(p.reward_floor) << '\n';
  out << "scaler_mean";
  for (double v : c.head.scaler.mean) out << ' ' << fmt(v);
  out << "\nscaler_scale";
  for (double v : c.head.scaler.scale) out << ' ' << fmt(v);
  out << '\n';
  write_mlp(out, c.head.net);
  write_mlp(out, c.agent.actor);
  write_mlp(out, c.agent.critic);
}

namespace {

std::istringstream next_line(std::istream& in, const std::string& tag) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("checkpoint truncated before '" + tag + "'");
  std::istringstream row(line);
  std::string head;
  row >> head;
  if (head != tag) throw std::runtime_error("checkpoint expected '" + tag + "', found '" + head + "'");
  return row;
}

template <class T>
T keyed(std::istringstream& row, const std::string& key) {
  std::string k;
  T v{};
  if (!(row >> k) || k != key || !(row >> v)) throw std::runtime_error("checkpoint field '" + key + "' missing");
  return v;
}

double keyed_double(std::istringstream& row, const std::string& key) {
  return std::strtod(keyed<std::string>(row, key).c_str(), nullptr);
}

}  // namespace

Checkpoint read_checkpoint(std::istream& in) {
  Checkpoint c;
  {
    auto row = next_line(in, "soberdse-checkpoint");
    int version = 0;
    if (!(row >> version) || version != 1) throw std::runtime_error("unsupported checkpoint version");
  }
  {
    auto row = next_line(in, "seed");
    row >> c.seed;
    c.dataset_fingerprint = keyed<std::string>(row, "dataset");
    if (c.dataset_fingerprint == "-") c.dataset_fingerprint.clear();
  }
  {
    auto row = next_line(in, "supervised");
    c.supervised.hidden_dim = keyed<int>(row, "hidden");
    c.supervised.learning_rate = keyed_double(row, "lr");
    c.supervised.epochs = keyed<int>(row, "epochs");
  }
  PpoConfig p;
  {
    auto row = next_line(in, "ppo");
    p.hidden_dim = keyed<int>(row, "hidden");
    p.clip = keyed_double(row, "clip");
    p.gamma = keyed_double(row, "gamma");
    p.lambda = keyed_double(row, "lambda");
    p.value_coef = keyed_double(row, "value_coef");
    p.entropy_coef = keyed_double(row, "entropy_coef");
    p.learning_rate = keyed_double(row, "lr");
    p.epochs = keyed<int>(row, "epochs");
    p.passes = keyed<int>(row, "passes");
    p.reward_floor = keyed_double(row, "reward_floor");
  }
  for (auto* target : {&c.head.scaler.mean, &c.head.scaler.scale}) {
    auto row = next_line(in, target == &c.head.scaler.mean ? "scaler_mean" : "scaler_scale");
    for (double& v : *target) {
      std::string token;
      if (!(row >> token)) throw std::runtime_error("checkpoint scaler row is short");
      v = std::strtod(token.c_str(), nullptr);
    }
  }
  c.head.net = read_mlp(in);
  c.agent.actor = read_mlp(in);
  c.agent.critic = read_mlp(in);
  c.agent.config = p;
  if (c.head.net.input_dim != static_cast<int>(kFeatureDim) || c.agent.actor.input_dim != kStateDim ||
      c.agent.critic.input_dim != static_cast<int>(kFeatureDim) || c.agent.critic.output_dim != 1) {
    throw std::runtime_error("checkpoint networks have unexpected shapes");
  }
  return c;
}

}  // namespace soberdse
