#include "soberdse/neural.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "soberdse/rng.hpp"

namespace soberdse {

namespace {

bool all_finite(const Matrix& m) { return m.allFinite(); }

std::string dims(const Mlp& net) {
  return std::to_string(net.input_dim) + "x" + std::to_string(net.hidden_dim) + "x" + std::to_string(net.output_dim);
}

void write_values(std::ostream& out, const char* tag, const double* data, Eigen::Index n) {
  out << tag;
  char buf[40];
  for (Eigen::Index i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof buf, " %.17g", data[i]);
    out << buf;
  }
  out << '\n';
}

void read_values(std::istream& in, const char* tag, double* data, Eigen::Index n) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(std::string("checkpoint truncated before ") + tag);
  std::istringstream row(line);
  std::string head;
  row >> head;
  if (head != tag) throw std::runtime_error(std::string("checkpoint expected ") + tag + ", found '" + head + "'");
  for (Eigen::Index i = 0; i < n; ++i) {
    std::string token;
    if (!(row >> token)) throw std::runtime_error(std::string("checkpoint row ") + tag + " is short");
    char* end = nullptr;
    data[i] = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0') {
      throw std::runtime_error(std::string("checkpoint row ") + tag + " has bad number '" + token + "'");
    }
  }
  std::string extra;
  if (row >> extra) throw std::runtime_error(std::string("checkpoint row ") + tag + " is long");
}

}  // namespace

Mlp Mlp::zeros(int input_dim, int hidden_dim, int output_dim) {
  if (input_dim < 1 || hidden_dim < 1 || output_dim < 1) throw std::invalid_argument("network dimensions must be >= 1");
  Mlp net;
  net.input_dim = input_dim;
  net.hidden_dim = hidden_dim;
  net.output_dim = output_dim;
  net.w1 = Matrix::Zero(hidden_dim, input_dim);
  net.b1 = Vector::Zero(hidden_dim);
  net.w2 = Matrix::Zero(output_dim, hidden_dim);
  net.b2 = Vector::Zero(output_dim);
  return net;
}

Mlp Mlp::init(int input_dim, int hidden_dim, int output_dim, std::uint64_t seed) {
  Mlp net = zeros(input_dim, hidden_dim, output_dim);
  net.seed = seed;
  Rng rng(seed);
  const double a1 = 1.0 / std::sqrt(static_cast<double>(input_dim));
  const double a2 = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  for (Eigen::Index r = 0; r < net.w1.rows(); ++r)
    for (Eigen::Index c = 0; c < net.w1.cols(); ++c) net.w1(r, c) = rng.uniform(-a1, a1);
  for (Eigen::Index i = 0; i < net.b1.size(); ++i) net.b1(i) = rng.uniform(-a1, a1);
  for (Eigen::Index r = 0; r < net.w2.rows(); ++r)
    for (Eigen::Index c = 0; c < net.w2.cols(); ++c) net.w2(r, c) = rng.uniform(-a2, a2);
  for (Eigen::Index i = 0; i < net.b2.size(); ++i) net.b2(i) = rng.uniform(-a2, a2);
  return net;
}

std::size_t Mlp::parameter_count() const noexcept {
  return static_cast<std::size_t>(w1.size() + b1.size() + w2.size() + b2.size());
}

void Mlp::validate() const {
  if (w1.rows() != hidden_dim || w1.cols() != input_dim || b1.size() != hidden_dim || w2.rows() != output_dim ||
      w2.cols() != hidden_dim || b2.size() != output_dim) {
    throw std::invalid_argument("network parameters do not match dimensions " + dims(*this));
  }
  if (!all_finite(w1) || !b1.allFinite() || !all_finite(w2) || !b2.allFinite()) {
    throw std::invalid_argument("network " + dims(*this) + " has non-finite parameters");
  }
}

bool Mlp::operator==(const Mlp& o) const {
  return input_dim == o.input_dim && hidden_dim == o.hidden_dim && output_dim == o.output_dim && seed == o.seed &&
         w1 == o.w1 && b1 == o.b1 && w2 == o.w2 && b2 == o.b2;
}

MlpGradients MlpGradients::zeros_like(const Mlp& net) {
  return {Matrix::Zero(net.w1.rows(), net.w1.cols()), Vector::Zero(net.b1.size()),
          Matrix::Zero(net.w2.rows(), net.w2.cols()), Vector::Zero(net.b2.size())};
}

MlpGradients& MlpGradients::operator+=(const MlpGradients& o) {
  w1 += o.w1;
  b1 += o.b1;
  w2 += o.w2;
  b2 += o.b2;
  return *this;
}

MlpGradients& MlpGradients::operator*=(double s) {
  w1 *= s;
  b1 *= s;
  w2 *= s;
  b2 *= s;
  return *this;
}

ForwardCache forward_cached(const Mlp& net, const Vector& x) {
  if (x.size() != net.input_dim) {
    throw std::invalid_argument("input has " + std::to_string(x.size()) + " entries, network " + dims(net) +
                                " expects " + std::to_string(net.input_dim));
  }
  ForwardCache c;
  c.input = x;
  c.pre = net.w1 * x + net.b1;
  c.hidden = c.pre.cwiseMax(0.0);
  c.logits = net.w2 * c.hidden + net.b2;
  return c;
}

Vector forward(const Mlp& net, const Vector& x) { return forward_cached(net, x).logits; }

void backward(const Mlp& net, const ForwardCache& cache, const Vector& dlogits, MlpGradients& grad) {
  if (dlogits.size() != net.output_dim) throw std::invalid_argument("logit gradient has the wrong length");
  grad.w2.noalias() += dlogits * cache.hidden.transpose();
  grad.b2 += dlogits;
  Vector dhidden = net.w2.transpose() * dlogits;
  for (Eigen::Index i = 0; i < dhidden.size(); ++i)
    if (cache.pre(i) <= 0.0) dhidden(i) = 0.0;
  grad.w1.noalias() += dhidden * cache.input.transpose();
  grad.b1 += dhidden;
}

Vector softmax(const Vector& logits) {
  if (logits.size() == 0) throw std::invalid_argument("softmax of an empty vector");
  if (!logits.allFinite()) throw std::invalid_argument("softmax of non-finite logits");
  const Vector e = (logits.array() - logits.maxCoeff()).exp().matrix();
  return e / e.sum();
}

LossAndGradient cross_entropy(const Vector& p, int label) {
  if (label < 0 || label >= p.size()) {
    throw std::invalid_argument("label " + std::to_string(label) + " outside [0, " + std::to_string(p.size()) + ")");
  }
  LossAndGradient out;
  out.loss = -std::log(std::max(p(label), kProbabilityFloor));
  out.dlogits = p;
  out.dlogits(label) -= 1.0;
  return out;
}

double entropy(const Vector& p) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (p(i) > 0.0) h -= p(i) * std::log(p(i));
  return h;
}

Vector entropy_gradient(const Vector& p) {
  const double h = entropy(p);
  Vector g(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) g(i) = p(i) > 0.0 ? -p(i) * (std::log(p(i)) + h) : 0.0;
  return g;
}

void sgd_step(Mlp& net, const MlpGradients& grad, double learning_rate) {
  if (grad.w1.rows() != net.w1.rows() || grad.w1.cols() != net.w1.cols() || grad.b1.size() != net.b1.size() ||
      grad.w2.rows() != net.w2.rows() || grad.w2.cols() != net.w2.cols() || grad.b2.size() != net.b2.size()) {
    throw std::invalid_argument("gradient shapes do not match network " + dims(net));
  }
  if (!grad.w1.allFinite() || !grad.b1.allFinite() || !grad.w2.allFinite() || !grad.b2.allFinite()) {
    throw std::runtime_error("diverged: non-finite gradient for network " + dims(net));
  }
  net.w1 -= learning_rate * grad.w1;
  net.b1 -= learning_rate * grad.b1;
  net.w2 -= learning_rate * grad.w2;
  net.b2 -= learning_rate * grad.b2;
  if (!net.w1.allFinite() || !net.b1.allFinite() || !net.w2.allFinite() || !net.b2.allFinite()) {
    throw std::runtime_error("diverged: non-finite parameters after update of network " + dims(net));
  }
}

void for_each_parameter(Mlp& net, const std::function<void(double&)>& fn) {
  for (Eigen::Index r = 0; r < net.w1.rows(); ++r)
    for (Eigen::Index c = 0; c < net.w1.cols(); ++c) fn(net.w1(r, c));
  for (Eigen::Index i = 0; i < net.b1.size(); ++i) fn(net.b1(i));
  for (Eigen::Index r = 0; r < net.w2.rows(); ++r)
    for (Eigen::Index c = 0; c < net.w2.cols(); ++c) fn(net.w2(r, c));
  for (Eigen::Index i = 0; i < net.b2.size(); ++i) fn(net.b2(i));
}

void for_each_parameter(const MlpGradients& g, const std::function<void(double)>& fn) {
  for (Eigen::Index r = 0; r < g.w1.rows(); ++r)
    for (Eigen::Index c = 0; c < g.w1.cols(); ++c) fn(g.w1(r, c));
  for (Eigen::Index i = 0; i < g.b1.size(); ++i) fn(g.b1(i));
  for (Eigen::Index r = 0; r < g.w2.rows(); ++r)
    for (Eigen::Index c = 0; c < g.w2.cols(); ++c) fn(g.w2(r, c));
  for (Eigen::Index i = 0; i < g.b2.size(); ++i) fn(g.b2(i));
}

GradCheckReport grad_check(const Mlp& net, const LossFunction& loss, const Vector& x, double tolerance, double step,
                           double floor) {
  MlpGradients analytic = MlpGradients::zeros_like(net);
  loss(net, x, &analytic);
  std::vector<double> a;
  a.reserve(net.parameter_count());
  for_each_parameter(analytic, [&](double v) { a.push_back(v); });

  Mlp probe = net;
  std::vector<double*> slots;
  for_each_parameter(probe, [&](double& v) { slots.push_back(&v); });

  GradCheckReport report;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const double saved = *slots[i];
    *slots[i] = saved + step;
    const double up = loss(probe, x, nullptr);
    *slots[i] = saved - step;
    const double down = loss(probe, x, nullptr);
    *slots[i] = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double denom = std::max({std::abs(a[i]), std::abs(numeric), floor});
    report.max_relative_error = std::max(report.max_relative_error, std::abs(a[i] - numeric) / denom);
  }
  report.parameters_checked = slots.size();
  report.passed = report.max_relative_error <= tolerance;
  return report;
}

void write_mlp(std::ostream& out, const Mlp& net) {
  net.validate();
  out << "mlp " << net.input_dim << ' ' << net.hidden_dim << ' ' << net.output_dim << ' ' << net.seed << '\n';
  // Eigen stores column-major; write row-major explicitly.
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> w1 = net.w1;
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> w2 = net.w2;
  write_values(out, "w1", w1.data(), w1.size());
  write_values(out, "b1", net.b1.data(), net.b1.size());
  write_values(out, "w2", w2.data(), w2.size());
  write_values(out, "b2", net.b2.data(), net.b2.size());
}

Mlp read_mlp(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("checkpoint truncated before network header");
  std::istringstream head(line);
  std::string tag;
  int input = 0, hidden = 0, output = 0;
  std::uint64_t seed = 0;
  if (!(head >> tag >> input >> hidden >> output >> seed) || tag != "mlp") {
    throw std::runtime_error("bad network header '" + line + "'");
  }
  Mlp net = Mlp::zeros(input, hidden, output);
  net.seed = seed;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> w1(hidden, input), w2(output, hidden);
  read_values(in, "w1", w1.data(), w1.size());
  read_values(in, "b1", net.b1.data(), net.b1.size());
  read_values(in, "w2", w2.data(), w2.size());
  read_values(in, "b2", net.b2.data(), net.b2.size());
  net.w1 = w1;
  net.w2 = w2;
  net.validate();
  return net;
}

}  // namespace soberdse
