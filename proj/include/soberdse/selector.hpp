#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "soberdse/benchmark.hpp"
#include "soberdse/explorers.hpp"
#include "soberdse/neural.hpp"
#include "soberdse/performance.hpp"

namespace soberdse {

inline constexpr int kStateDim = static_cast<int>(kFeatureDim + kExplorerCount);
inline constexpr double kRewardEpsilon = 1e-6;

/// Per-feature standardization fitted on the training features.
struct FeatureScaler {
  std::array<double, kFeatureDim> mean{};
  std::array<double, kFeatureDim> scale{};  // 1 for constant features

  static FeatureScaler identity();
  static FeatureScaler fit(std::span<const FeatureVector> features);
  Vector apply(const FeatureVector& features) const;
  bool operator==(const FeatureScaler&) const = default;
};

struct SupervisedConfig {
  int hidden_dim = 256;
  double learning_rate = 3e-4;
  int epochs = 250;
};

struct SupervisedHead {
  Mlp net;
  FeatureScaler scaler;
};

struct SupervisedTraining {
  SupervisedHead head;
  std::vector<double> loss_curve;  // mean cross-entropy before each epoch's step
  std::vector<std::string> warnings;
};

/// Full-batch gradient descent on mean cross-entropy. Throws on an empty
/// dataset; a single-class dataset trains with a warning.
SupervisedTraining pretrain_supervised(std::span<const LabeledSample> data, std::uint64_t seed,
                                       const SupervisedConfig& config = {});

Vector supervised_probs(const SupervisedHead& head, const FeatureVector& features);

/// [standardized features; supervised probabilities].
Vector selector_state(const SupervisedHead& head, const FeatureVector& features);

/// -|chosen - best| / max(best, 1e-6).
double reward(double adrs_chosen, double adrs_best);

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

/// Backward recursion; V(s_T) = bootstrap_value.
GaeResult gae(std::span<const double> rewards, std::span<const double> values, double bootstrap_value, double gamma,
              double lambda);

struct PpoConfig {
  int hidden_dim = 256;
  double clip = 0.2;
  double gamma = 0.99;
  double lambda = 0.95;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
  double learning_rate = 5e-4;
  int epochs = 1000;
  int passes = 4;
  /// Training rewards are clamped below at this value (0 disables).
  double reward_floor = -10.0;
};

struct PpoAgent {
  Mlp actor;   // state (34) -> logits (10)
  Mlp critic;  // standardized features (24) -> value
  PpoConfig config;

  static PpoAgent init(std::uint64_t seed, const PpoConfig& config = {});
};

struct Transition {
  Vector state;
  int action = 0;
  double reward = 0.0;
  double log_prob = 0.0;
  double value = 0.0;
  bool done = true;
};

struct PpoLosses {
  double total = 0.0;
  double policy = 0.0;
  double value = 0.0;
  double entropy = 0.0;
};

/// Per-sample clipped surrogate term -min(rho A, clip(rho) A).
double clipped_policy_term(double ratio, double advantage, double clip);

/// Total loss over `buffer` with fixed advantages and returns. Accumulates
/// gradients of the total into the non-null outputs.
PpoLosses ppo_loss(const PpoAgent& agent, std::span<const Transition> buffer, std::span<const double> advantages,
                   std::span<const double> returns, MlpGradients* actor_grad, MlpGradients* critic_grad);

/// Advantages per episode (split on `done`), then normalized over the buffer
/// when it holds at least two transitions.
GaeResult buffer_advantages(std::span<const Transition> buffer, const PpoConfig& config);

/// `passes` gradient steps on the buffer. Returns the losses of the first pass.
PpoLosses ppo_update(PpoAgent& agent, std::span<const Transition> buffer);

struct RlTraining {
  PpoAgent agent;
  std::vector<double> reward_curve;  // mean training reward per epoch
};

/// Length-1 episodes over the training samples; rewards come from `table`.
RlTraining train_rl(PpoAgent agent, const SupervisedHead& head, std::span<const LabeledSample> data,
                    const PerformanceTable& table, std::uint64_t seed);

struct Recommendation {
  ExplorerId explorer = ExplorerId::nsga2;
  Vector probabilities;
};

/// Greedy policy action; ties go to the lowest code.
Recommendation recommend(const SupervisedHead& head, const PpoAgent& agent, const FeatureVector& features);
/// Argmax of the supervised head alone.
ExplorerId recommend_supervised(const SupervisedHead& head, const FeatureVector& features);

/// Index of the largest entry, lowest on ties.
int argmax(const Vector& v);

struct Checkpoint {
  SupervisedHead head;
  SupervisedConfig supervised;
  PpoAgent agent;
  std::uint64_t seed = 0;
  std::string dataset_fingerprint;
};

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);

}  // namespace soberdse
