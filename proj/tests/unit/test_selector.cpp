#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "soberdse/selector.hpp"

using namespace soberdse;

namespace {

struct ToySet {
  std::vector<LabeledSample> samples;
  PerformanceTable table;
};

// Instances of `fa` favour explorer `a`, instances of `fb` favour `b`.
ToySet two_family_set(Family fa, Family fb, ExplorerId a, ExplorerId b, int per_family = 20) {
  ToySet t;
  for (Family fam : {fa, fb}) {
    for (int seed = 0; seed < per_family; ++seed) {
      const auto inst = synth_instance(fam, static_cast<std::uint64_t>(seed), SizeClass::medium);
      AdrsRow row;
      for (std::size_t k = 0; k < kExplorerCount; ++k) row[k] = 0.2 + 0.01 * static_cast<double>(k);
      row[static_cast<std::size_t>(code(fam == fa ? a : b))] = 0.05;
      for (std::size_t k = 0; k < kExplorerCount; ++k) t.table.set(inst.id, kAllExplorers[k], {row[k], 100, 0.0});
      t.samples.push_back(LabeledSample::from_row(inst.id, extract_features(inst), row));
    }
  }
  return t;
}

double accuracy_supervised(const SupervisedHead& head, const std::vector<LabeledSample>& data) {
  int correct = 0;
  for (const auto& s : data) correct += recommend_supervised(head, s.features) == s.label;
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

double mean_policy_entropy(const SupervisedHead& head, const PpoAgent& agent, const std::vector<LabeledSample>& data) {
  double h = 0.0;
  for (const auto& s : data) h += entropy(recommend(head, agent, s.features).probabilities);
  return h / static_cast<double>(data.size());
}

std::vector<Transition> random_buffer(Rng& rng, const PpoAgent& agent, std::size_t n, double clip) {
  std::vector<Transition> buf;
  while (buf.size() < n) {
    Transition t;
    t.state = Vector(kStateDim);
    for (int i = 0; i < kStateDim; ++i) t.state(i) = rng.uniform(-2.0, 2.0);
    t.action = static_cast<int>(rng.below(kExplorerCount));
    const double log_pi = std::log(softmax(forward(agent.actor, t.state))(t.action));
    t.log_prob = log_pi + rng.uniform(-0.4, 0.4);
    const double ratio = std::exp(log_pi - t.log_prob);
    // Keep clear of the clip kinks, where the loss is not differentiable.
    if (std::abs(ratio - (1.0 + clip)) < 1e-3 || std::abs(ratio - (1.0 - clip)) < 1e-3) continue;
    t.reward = rng.uniform(-1.0, 0.0);
    t.value = rng.uniform(-1.0, 0.0);
    buf.push_back(t);
  }
  return buf;
}

}  // namespace

TEST_SUITE("selector") {

TEST_CASE("reward") {
  CHECK(reward(0.3, 0.3) == 0.0);
  CHECK(reward(0.2, 0.1) == doctest::Approx(-1.0));
  CHECK(reward(0.0, 0.0) == 0.0);
  CHECK(reward(0.1, 0.0) == doctest::Approx(-0.1 / kRewardEpsilon));
  CHECK_THROWS(reward(-0.1, 0.0));
}

TEST_CASE("gae single step and degenerate lambdas") {
  const std::vector<double> r{1.0}, v{0.5};
  const GaeResult one = gae(r, v, 0.0, 0.99, 0.95);
  CHECK(one.advantages[0] == doctest::Approx(0.5));
  CHECK(one.returns[0] == doctest::Approx(1.0));

  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.below(10);
    std::vector<double> rw(n), vs(n);
    for (auto& x : rw) x = rng.uniform(-1, 1);
    for (auto& x : vs) x = rng.uniform(-1, 1);
    const double boot = rng.uniform(-1, 1);
    const double gamma = rng.uniform(0.5, 1.0);
    const double lambda = rng.uniform(0.0, 1.0);

    const GaeResult g = gae(rw, vs, boot, gamma, lambda);
    const auto direct = oracle::gae_direct_sum(rw, vs, boot, gamma, lambda);
    const GaeResult g0 = gae(rw, vs, boot, gamma, 0.0);
    const GaeResult g1 = gae(rw, vs, boot, gamma, 1.0);
    const auto ret = oracle::discounted_returns(rw, boot, gamma);
    for (std::size_t t = 0; t < n; ++t) {
      const double next = t + 1 < n ? vs[t + 1] : boot;
      CHECK(std::abs(g.advantages[t] - direct[t]) <= 1e-12);
      CHECK(std::abs(g.returns[t] - (g.advantages[t] + vs[t])) <= 1e-12);
      CHECK(std::abs(g0.advantages[t] - (rw[t] + gamma * next - vs[t])) <= 1e-12);
      CHECK(std::abs(g1.advantages[t] - (ret[t] - vs[t])) <= 1e-12);
    }
  }
  CHECK_THROWS(gae(std::vector<double>{1, 2}, std::vector<double>{1}, 0, 0.99, 0.95));
  CHECK_THROWS(gae(std::vector<double>{}, std::vector<double>{}, 0, 0.99, 0.95));
}

TEST_CASE("clipped policy term") {
  CHECK(clipped_policy_term(1.5, 2.0, 0.2) == doctest::Approx(-1.2 * 2.0));
  CHECK(clipped_policy_term(1.0, 2.0, 0.2) == doctest::Approx(-2.0));
  CHECK(clipped_policy_term(0.5, -1.0, 0.2) == doctest::Approx(0.8));
  CHECK(clipped_policy_term(1.5, -1.0, 0.2) == doctest::Approx(1.5));
}

TEST_CASE("advantages are normalized over the buffer") {
  Rng rng(9);
  const PpoAgent agent = PpoAgent::init(1);
  const auto buf = random_buffer(rng, agent, 12, agent.config.clip);
  const GaeResult g = buffer_advantages(buf, agent.config);
  const double mean = std::accumulate(g.advantages.begin(), g.advantages.end(), 0.0) / 12.0;
  double var = 0.0;
  for (double a : g.advantages) var += (a - mean) * (a - mean);
  CHECK(std::abs(mean) < 1e-12);
  CHECK(var / 12.0 == doctest::Approx(1.0));
  for (std::size_t t = 0; t < buf.size(); ++t) CHECK(g.returns[t] == doctest::Approx(buf[t].reward));
}

TEST_CASE("ppo loss gradients match central differences") {
  Rng rng(10);
  for (int trial = 0; trial < 10; ++trial) {
    PpoConfig cfg;
    cfg.hidden_dim = 6 + static_cast<int>(rng.below(10));
    cfg.entropy_coef = rng.uniform(0.0, 0.1);
    cfg.value_coef = rng.uniform(0.1, 1.0);
    const PpoAgent agent = PpoAgent::init(rng.next(), cfg);
    const auto buf = random_buffer(rng, agent, 3, cfg.clip);
    std::vector<double> adv(3), ret(3);
    for (auto& a : adv) a = rng.uniform(-1.5, 1.5);
    for (auto& r : ret) r = rng.uniform(-1.0, 0.0);

    MlpGradients ga = MlpGradients::zeros_like(agent.actor);
    MlpGradients gc = MlpGradients::zeros_like(agent.critic);
    const PpoLosses l = ppo_loss(agent, buf, adv, ret, &ga, &gc);
    CHECK(l.total == doctest::Approx(l.policy + cfg.value_coef * l.value - cfg.entropy_coef * l.entropy));

    const auto actor_cmp = oracle::compare_with_central_differences(
        agent.actor,
        [&](const Mlp& actor) {
          PpoAgent a = agent;
          a.actor = actor;
          return ppo_loss(a, buf, adv, ret, nullptr, nullptr).total;
        },
        oracle::flatten(ga));
    const auto critic_cmp = oracle::compare_with_central_differences(
        agent.critic,
        [&](const Mlp& critic) {
          PpoAgent a = agent;
          a.critic = critic;
          return ppo_loss(a, buf, adv, ret, nullptr, nullptr).total;
        },
        oracle::flatten(gc));
    CHECK(actor_cmp.max_relative_error <= 1e-4);
    CHECK(critic_cmp.max_relative_error <= 1e-4);
  }
  const PpoAgent agent = PpoAgent::init(0);
  CHECK_THROWS(ppo_loss(agent, {}, {}, {}, nullptr, nullptr));
}

TEST_CASE("feature scaler") {
  std::vector<FeatureVector> f(4);
  for (std::size_t i = 0; i < 4; ++i) {
    f[i].fill(5.0);
    f[i][0] = static_cast<double>(i);
  }
  const FeatureScaler s = FeatureScaler::fit(f);
  CHECK(s.mean[0] == doctest::Approx(1.5));
  CHECK(s.scale[1] == 1.0);
  const Vector z = s.apply(f[3]);
  CHECK(z(0) == doctest::Approx(1.5 / std::sqrt(1.25)));
  CHECK(z(1) == 0.0);
}

TEST_CASE("supervised head memorizes one sample") {
  const auto t = two_family_set(Family::smooth, Family::plateau, ExplorerId::lattice, ExplorerId::pso, 1);
  const std::vector<LabeledSample> one{t.samples[1]};
  const auto trained = pretrain_supervised(one, 0);
  CHECK(recommend_supervised(trained.head, one[0].features) == ExplorerId::pso);
  CHECK(trained.loss_curve.size() == 250);
  CHECK_FALSE(trained.warnings.empty());
  CHECK_THROWS(pretrain_supervised(std::vector<LabeledSample>{}, 0));
}

TEST_CASE("supervised head separates two families") {
  // First two families, labelled by family index.
  const auto t = two_family_set(Family::smooth, Family::rugged, ExplorerId::nsga2, ExplorerId::sa);
  const auto trained = pretrain_supervised(t.samples, 0);
  CHECK(accuracy_supervised(trained.head, t.samples) >= 0.95);
  CHECK(trained.loss_curve.back() <= trained.loss_curve.front());
  CHECK(trained.warnings.empty());
}

TEST_CASE("supervised accuracy across every family pair") {
  // 250 plain gradient steps at lr 3e-4 leave the head far from converged, so
  // training accuracy depends on the pair. Report the spread and check only
  // what holds for all pairs.
  std::vector<double> acc;
  for (std::size_t a = 0; a < kAllFamilies.size(); ++a) {
    for (std::size_t b = a + 1; b < kAllFamilies.size(); ++b) {
      const auto t = two_family_set(kAllFamilies[a], kAllFamilies[b], ExplorerId::nsga2, ExplorerId::sa);
      const auto trained = pretrain_supervised(t.samples, 0);
      acc.push_back(accuracy_supervised(trained.head, t.samples));
      CHECK(trained.loss_curve.back() < trained.loss_curve.front());
      CHECK(acc.back() > 0.5);
    }
  }
  std::sort(acc.begin(), acc.end());
  MESSAGE("training accuracy over 10 family pairs: min " << acc.front() << ", median " << acc[5] << ", max "
                                                         << acc.back());
}

TEST_CASE("policy learns a universally best explorer") {
  ToySet t = two_family_set(Family::smooth, Family::plateau, ExplorerId::eda, ExplorerId::eda);
  const auto sup = pretrain_supervised(t.samples, 0);
  const auto rl = train_rl(PpoAgent::init(0), sup.head, t.samples, t.table, 0);
  int picks = 0;
  for (const auto& s : t.samples) picks += recommend(sup.head, rl.agent, s.features).explorer == ExplorerId::eda;
  CHECK(static_cast<double>(picks) / static_cast<double>(t.samples.size()) >= 0.95);
  CHECK(rl.reward_curve.size() == 1000);
}

TEST_CASE("reward curve improves and entropy bonus keeps the policy broader") {
  const auto t = two_family_set(Family::smooth, Family::plateau, ExplorerId::lattice, ExplorerId::pso);
  const auto sup = pretrain_supervised(t.samples, 0);
  const auto rl = train_rl(PpoAgent::init(0), sup.head, t.samples, t.table, 0);
  const auto& c = rl.reward_curve;
  const double first = std::accumulate(c.begin(), c.begin() + 100, 0.0) / 100.0;
  const double last = std::accumulate(c.end() - 100, c.end(), 0.0) / 100.0;
  CHECK(last >= first);

  PpoConfig no_bonus;
  no_bonus.entropy_coef = 0.0;
  const auto plain = train_rl(PpoAgent::init(0, no_bonus), sup.head, t.samples, t.table, 0);
  const double h_bonus = mean_policy_entropy(sup.head, rl.agent, t.samples);
  const double h_plain = mean_policy_entropy(sup.head, plain.agent, t.samples);
  MESSAGE("policy entropy with bonus " << h_bonus << ", without " << h_plain);
  CHECK(h_bonus >= h_plain);
}

TEST_CASE("training needs every table entry") {
  ToySet t = two_family_set(Family::smooth, Family::plateau, ExplorerId::sa, ExplorerId::aco, 2);
  PerformanceTable partial;
  for (const auto& s : t.samples) partial.set(s.benchmark_id, ExplorerId::nsga2, {0.1, 1, 0.0});
  const auto sup = pretrain_supervised(t.samples, 0);
  PpoConfig short_run;
  short_run.epochs = 3;
  CHECK_THROWS_WITH(train_rl(PpoAgent::init(0, short_run), sup.head, t.samples, partial, 0),
                    doctest::Contains("performance table has no entry"));
}

TEST_CASE("recommendation") {
  const auto t = two_family_set(Family::smooth, Family::plateau, ExplorerId::sa, ExplorerId::aco, 2);
  const auto sup = pretrain_supervised(t.samples, 0);
  PpoAgent flat = PpoAgent::init(3);
  flat.actor.w1.setZero();
  flat.actor.b1.setZero();
  flat.actor.w2.setZero();
  flat.actor.b2.setZero();
  const Recommendation r = recommend(sup.head, flat, t.samples[0].features);
  CHECK(r.explorer == ExplorerId::nsga2);
  CHECK(r.probabilities(9) == doctest::Approx(0.1));

  const PpoAgent agent = PpoAgent::init(4);
  const Recommendation a = recommend(sup.head, agent, t.samples[1].features);
  const Recommendation b = recommend(sup.head, agent, t.samples[1].features);
  CHECK(a.explorer == b.explorer);
  CHECK(a.probabilities == b.probabilities);
  CHECK(argmax((Vector(4) << 1, 3, 3, 2).finished()) == 1);
}

TEST_CASE("checkpoint round-trip") {
  const auto t = two_family_set(Family::smooth, Family::plateau, ExplorerId::sa, ExplorerId::aco, 2);
  Checkpoint ck;
  SupervisedConfig sc;
  sc.epochs = 5;
  ck.head = pretrain_supervised(t.samples, 1, sc).head;
  ck.supervised = sc;
  ck.agent = PpoAgent::init(1);
  ck.seed = 1;
  ck.dataset_fingerprint = "00ff00ff00ff00ff";
  std::stringstream s;
  write_checkpoint(s, ck);
  const std::string text = s.str();
  const Checkpoint back = read_checkpoint(s);
  CHECK(back.head.net == ck.head.net);
  CHECK(back.head.scaler == ck.head.scaler);
  CHECK(back.agent.actor == ck.agent.actor);
  CHECK(back.agent.critic == ck.agent.critic);
  CHECK(back.dataset_fingerprint == ck.dataset_fingerprint);
  std::stringstream again;
  write_checkpoint(again, back);
  CHECK(again.str() == text);
  std::stringstream truncated(text.substr(0, text.size() / 2));
  CHECK_THROWS(read_checkpoint(truncated));
}

}  // TEST_SUITE
