#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>

#include <Eigen/Dense>

namespace soberdse {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Two-layer perceptron: logits = W2 relu(W1 x + b1) + b2.
struct Mlp {
  int input_dim = 0;
  int hidden_dim = 0;
  int output_dim = 0;
  std::uint64_t seed = 0;
  Matrix w1;  // hidden x input
  Vector b1;
  Matrix w2;  // output x hidden
  Vector b2;

  /// Uniform in +-1/sqrt(fan_in), reproducible from `seed`.
  static Mlp init(int input_dim, int hidden_dim, int output_dim, std::uint64_t seed);
  static Mlp zeros(int input_dim, int hidden_dim, int output_dim);

  std::size_t parameter_count() const noexcept;
  /// Throws std::invalid_argument on inconsistent shapes or non-finite values.
  void validate() const;
  bool operator==(const Mlp& other) const;
};

/// Same shapes as an Mlp's parameters.
struct MlpGradients {
  Matrix w1;
  Vector b1;
  Matrix w2;
  Vector b2;

  static MlpGradients zeros_like(const Mlp& net);
  MlpGradients& operator+=(const MlpGradients& other);
  MlpGradients& operator*=(double s);
};

struct ForwardCache {
  Vector input;
  Vector pre;     // W1 x + b1
  Vector hidden;  // relu(pre)
  Vector logits;
};

Vector forward(const Mlp& net, const Vector& x);
ForwardCache forward_cached(const Mlp& net, const Vector& x);
/// Adds d(loss)/d(params) for one sample to `grad`, given d(loss)/d(logits).
void backward(const Mlp& net, const ForwardCache& cache, const Vector& dlogits, MlpGradients& grad);

/// Max-subtracted exponent normalization.
Vector softmax(const Vector& logits);

inline constexpr double kProbabilityFloor = 1e-12;

struct LossAndGradient {
  double loss = 0.0;
  Vector dlogits;
};

/// -ln p[label] with p floored at 1e-12; dlogits = p - onehot(label).
LossAndGradient cross_entropy(const Vector& p, int label);
/// -sum p ln p with 0 ln 0 = 0.
double entropy(const Vector& p);
/// d entropy(softmax(z)) / dz evaluated at p = softmax(z).
Vector entropy_gradient(const Vector& p);

/// theta <- theta - lr * grad. Throws std::runtime_error("diverged ...") when
/// any gradient entry or updated parameter is not finite.
void sgd_step(Mlp& net, const MlpGradients& grad, double learning_rate);

/// Loss at `net` for input `x`; writes analytic parameter gradients when
/// `grad` is non-null.
using LossFunction = std::function<double(const Mlp& net, const Vector& x, MlpGradients* grad)>;

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::size_t parameters_checked = 0;
  bool passed = false;
};

inline constexpr double kFiniteDifferenceStep = 1e-5;

/// Compares analytic gradients with central differences on every parameter.
/// Relative error is |a - n| / max(|a|, |n|, floor).
GradCheckReport grad_check(const Mlp& net, const LossFunction& loss, const Vector& x, double tolerance,
                           double step = kFiniteDifferenceStep, double floor = 1e-6);

/// Visits every parameter of a net (or gradient) in checkpoint order.
void for_each_parameter(Mlp& net, const std::function<void(double&)>& fn);
void for_each_parameter(const MlpGradients& grad, const std::function<void(double)>& fn);

/// Text record: "mlp <in> <hidden> <out> <seed>" then one line each for
/// w1 (row-major), b1, w2, b2 at 17 significant digits.
void write_mlp(std::ostream& out, const Mlp& net);
Mlp read_mlp(std::istream& in);

}  // namespace soberdse
