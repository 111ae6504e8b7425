#pragma once

// Reference implementations used to check the library. They are written
// from the definitions, independently of src/, and favour clarity over speed.

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "soberdse/benchmark.hpp"
#include "soberdse/neural.hpp"
#include "soberdse/pareto.hpp"
#include "soberdse/rng.hpp"
#include "soberdse/surrogate.hpp"

namespace oracle {

using Pair = std::pair<double, double>;  // (area, latency)

bool dominates(const Pair& p, const Pair& q);

/// O(n^2) non-dominated set: equal objective vectors keep the smallest knobs,
/// output sorted by (area, latency).
std::vector<soberdse::DesignPoint> brute_front(const std::vector<soberdse::DesignPoint>& points);

/// Direct double loop over the distance definition.
double brute_adrs(const std::vector<Pair>& reference, const std::vector<Pair>& approx);

std::vector<Pair> objectives(const soberdse::ParetoFront& front);

/// Random evaluated point set with coarse objective values so ties and
/// duplicates actually occur.
std::vector<soberdse::DesignPoint> random_points(soberdse::Rng& rng, std::size_t n);

/// A_t as an explicit sum of discounted TD errors.
std::vector<double> gae_direct_sum(const std::vector<double>& rewards, const std::vector<double>& values,
                                   double bootstrap, double gamma, double lambda);

/// sum_{l>=t} gamma^(l-t) r_l + gamma^(T-t) bootstrap.
std::vector<double> discounted_returns(const std::vector<double>& rewards, double bootstrap, double gamma);

/// Flat copy of every parameter, in w1, b1, w2, b2 order (column-major inside
/// each matrix, matching Eigen storage).
std::vector<double*> parameters(soberdse::Mlp& net);
std::vector<double> flatten(const soberdse::MlpGradients& grad);

struct FdComparison {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
};

/// Central differences of `loss` w.r.t. every parameter of `net`, compared
/// with `analytic` (same order as flatten). Relative error uses a floor of
/// 1e-6 on the denominator.
FdComparison compare_with_central_differences(soberdse::Mlp net, const std::function<double(const soberdse::Mlp&)>& loss,
                                              const std::vector<double>& analytic, double step = 1e-5);

/// ln(area) + ln(latency); the scalarization used to talk about local minima.
double log_sum(const soberdse::ObjectiveVector& o);

/// Every point of the space, in mixed-radix order.
std::vector<soberdse::Knobs> all_knobs(const soberdse::KnobSchema& schema);

/// Indices (into all_knobs order) of points with no single-level neighbour
/// strictly lower in log_sum.
std::vector<std::size_t> local_minima(const soberdse::SurrogateModel& model,
                                      const std::vector<soberdse::ObjectiveVector>& values);

/// Nearest-centroid classifier accuracy: centroids from `train`, scored on `test`.
double nearest_centroid_accuracy(const std::vector<std::vector<double>>& train, const std::vector<int>& train_labels,
                                 const std::vector<std::vector<double>>& test, const std::vector<int>& test_labels,
                                 int classes);

}  // namespace oracle
