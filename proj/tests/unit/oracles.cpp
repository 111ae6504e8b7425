#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace oracle {

using soberdse::DesignPoint;
using soberdse::ObjectiveVector;

bool dominates(const Pair& p, const Pair& q) {
  const bool no_worse = p.first <= q.first && p.second <= q.second;
  const bool better = p.first < q.first || p.second < q.second;
  return no_worse && better;
}

std::vector<DesignPoint> brute_front(const std::vector<DesignPoint>& points) {
  std::vector<DesignPoint> keep;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Pair pi{points[i].obj().area(), points[i].obj().latency()};
    bool dominated = false;
    bool shadowed = false;
    for (std::size_t j = 0; j < points.size(); ++j) {
      if (i == j) continue;
      const Pair pj{points[j].obj().area(), points[j].obj().latency()};
      if (dominates(pj, pi)) dominated = true;
      if (pj == pi && (points[j].knobs < points[i].knobs || (points[j].knobs == points[i].knobs && j < i)))
        shadowed = true;
    }
    if (!dominated && !shadowed) keep.push_back(points[i]);
  }
  std::sort(keep.begin(), keep.end(), [](const DesignPoint& a, const DesignPoint& b) {
    if (a.obj().area() != b.obj().area()) return a.obj().area() < b.obj().area();
    return a.obj().latency() < b.obj().latency();
  });
  return keep;
}

double brute_adrs(const std::vector<Pair>& reference, const std::vector<Pair>& approx) {
  double sum = 0.0;
  for (const Pair& g : reference) {
    double best = std::numeric_limits<double>::infinity();
    for (const Pair& w : approx) {
      const double da = g.first == 0.0 ? (w.first - g.first) / 1e-9 : (w.first - g.first) / g.first;
      const double dl = g.second == 0.0 ? (w.second - g.second) / 1e-9 : (w.second - g.second) / g.second;
      double f = 0.0;
      if (da > f) f = da;
      if (dl > f) f = dl;
      if (f < best) best = f;
    }
    sum += best;
  }
  return sum / static_cast<double>(reference.size());
}

std::vector<Pair> objectives(const soberdse::ParetoFront& front) {
  std::vector<Pair> out;
  for (const auto& p : front) out.emplace_back(p.obj().area(), p.obj().latency());
  return out;
}

std::vector<DesignPoint> random_points(soberdse::Rng& rng, std::size_t n) {
  std::vector<DesignPoint> pts;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = static_cast<double>(rng.below(40)) * 0.25;
    const double l = static_cast<double>(rng.below(40)) * 0.25;
    pts.push_back({soberdse::Knobs{static_cast<int>(rng.below(8)), static_cast<int>(rng.below(8))},
                   ObjectiveVector(a, l)});
  }
  return pts;
}

std::vector<double> gae_direct_sum(const std::vector<double>& rewards, const std::vector<double>& values,
                                   double bootstrap, double gamma, double lambda) {
  const std::size_t n = rewards.size();
  std::vector<double> delta(n);
  for (std::size_t t = 0; t < n; ++t) {
    const double next = t + 1 < n ? values[t + 1] : bootstrap;
    delta[t] = rewards[t] + gamma * next - values[t];
  }
  std::vector<double> adv(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    double weight = 1.0;
    for (std::size_t l = t; l < n; ++l) {
      adv[t] += weight * delta[l];
      weight *= gamma * lambda;
    }
  }
  return adv;
}

std::vector<double> discounted_returns(const std::vector<double>& rewards, double bootstrap, double gamma) {
  const std::size_t n = rewards.size();
  std::vector<double> g(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    double weight = 1.0;
    for (std::size_t l = t; l < n; ++l) {
      g[t] += weight * rewards[l];
      weight *= gamma;
    }
    g[t] += weight * bootstrap;
  }
  return g;
}

std::vector<double*> parameters(soberdse::Mlp& net) {
  std::vector<double*> out;
  for (Eigen::Index i = 0; i < net.w1.size(); ++i) out.push_back(net.w1.data() + i);
  for (Eigen::Index i = 0; i < net.b1.size(); ++i) out.push_back(net.b1.data() + i);
  for (Eigen::Index i = 0; i < net.w2.size(); ++i) out.push_back(net.w2.data() + i);
  for (Eigen::Index i = 0; i < net.b2.size(); ++i) out.push_back(net.b2.data() + i);
  return out;
}

std::vector<double> flatten(const soberdse::MlpGradients& grad) {
  std::vector<double> out;
  for (Eigen::Index i = 0; i < grad.w1.size(); ++i) out.push_back(grad.w1.data()[i]);
  for (Eigen::Index i = 0; i < grad.b1.size(); ++i) out.push_back(grad.b1.data()[i]);
  for (Eigen::Index i = 0; i < grad.w2.size(); ++i) out.push_back(grad.w2.data()[i]);
  for (Eigen::Index i = 0; i < grad.b2.size(); ++i) out.push_back(grad.b2.data()[i]);
  return out;
}

FdComparison compare_with_central_differences(soberdse::Mlp net, const std::function<double(const soberdse::Mlp&)>& loss,
                                              const std::vector<double>& analytic, double step) {
  FdComparison cmp;
  const auto params = parameters(net);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = *params[i];
    *params[i] = saved + step;
    const double up = loss(net);
    *params[i] = saved - step;
    const double down = loss(net);
    *params[i] = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double denom = std::max({std::abs(numeric), std::abs(analytic[i]), 1e-6});
    cmp.max_relative_error = std::max(cmp.max_relative_error, std::abs(numeric - analytic[i]) / denom);
    ++cmp.checked;
  }
  return cmp;
}

double log_sum(const ObjectiveVector& o) { return std::log(o.area()) + std::log(o.latency()); }

std::vector<soberdse::Knobs> all_knobs(const soberdse::KnobSchema& schema) {
  std::vector<soberdse::Knobs> out{soberdse::Knobs{}};
  for (const auto& knob : schema.knobs) {
    std::vector<soberdse::Knobs> next;
    for (const auto& prefix : out) {
      for (int level = 0; level < knob.cardinality(); ++level) {
        auto k = prefix;
        k.push_back(level);
        next.push_back(std::move(k));
      }
    }
    out = std::move(next);
  }
  return out;
}

std::vector<std::size_t> local_minima(const soberdse::SurrogateModel& model,
                                      const std::vector<ObjectiveVector>& values) {
  const auto& knobs = model.schema().knobs;
  // Mixed-radix strides, last knob fastest.
  std::vector<std::size_t> stride(knobs.size(), 1);
  for (std::size_t k = knobs.size(); k-- > 1;) stride[k - 1] = stride[k] * static_cast<std::size_t>(knobs[k].cardinality());
  const auto points = all_knobs(model.schema());
  std::vector<std::size_t> minima;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double here = log_sum(values[i]);
    bool is_min = true;
    for (std::size_t k = 0; k < knobs.size() && is_min; ++k) {
      const int level = points[i][k];
      if (level > 0 && log_sum(values[i - stride[k]]) < here) is_min = false;
      if (level + 1 < knobs[k].cardinality() && log_sum(values[i + stride[k]]) < here) is_min = false;
    }
    if (is_min) minima.push_back(i);
  }
  return minima;
}

double nearest_centroid_accuracy(const std::vector<std::vector<double>>& train, const std::vector<int>& train_labels,
                                 const std::vector<std::vector<double>>& test, const std::vector<int>& test_labels,
                                 int classes) {
  const std::size_t dim = train.front().size();
  std::vector<std::vector<double>> centroid(static_cast<std::size_t>(classes), std::vector<double>(dim, 0.0));
  std::vector<int> count(static_cast<std::size_t>(classes), 0);
  for (std::size_t i = 0; i < train.size(); ++i) {
    auto& c = centroid[static_cast<std::size_t>(train_labels[i])];
    for (std::size_t d = 0; d < dim; ++d) c[d] += train[i][d];
    ++count[static_cast<std::size_t>(train_labels[i])];
  }
  for (int c = 0; c < classes; ++c)
    for (auto& v : centroid[static_cast<std::size_t>(c)]) v /= std::max(1, count[static_cast<std::size_t>(c)]);
  int correct = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int c = 0; c < classes; ++c) {
      double d2 = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        const double diff = test[i][d] - centroid[static_cast<std::size_t>(c)][d];
        d2 += diff * diff;
      }
      if (d2 < best_d) {
        best_d = d2;
        best = c;
      }
    }
    correct += best == test_labels[i];
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

}  // namespace oracle
