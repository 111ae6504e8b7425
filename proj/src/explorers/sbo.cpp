// Surrogate-assisted search: ridge-regressed quadratic model of the log
// objectives, with residual resampling to estimate dominance improvement.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "search_context.hpp"

namespace soberdse::detail {

namespace {

constexpr std::size_t kWarmup = 10;
constexpr std::uint64_t kRefitPeriod = 25;
constexpr double kRidge = 1e-3;
constexpr std::size_t kRandomCandidates = 64;
constexpr std::size_t kNeighborCandidates = 64;
constexpr int kResidualSamples = 16;

class QuadraticModel {
 public:
  explicit QuadraticModel(const SearchContext& ctx) : ctx_(ctx) {
    const std::size_t n = ctx.knob_count();
    dim_ = 1 + n + n * (n + 1) / 2;
    for (std::size_t k = 0; k < n; ++k) dim_ += static_cast<std::size_t>(ctx.cardinality(k) - 1);
  }

  Eigen::VectorXd features(const Knobs& knobs) const {
    const std::size_t n = knobs.size();
    Eigen::VectorXd phi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim_));
    Eigen::Index j = 0;
    phi[j++] = 1.0;
    std::vector<double> t(n);
    for (std::size_t k = 0; k < n; ++k) {
      const int card = ctx_.cardinality(k);
      if (knobs[k] > 0) phi[j + knobs[k] - 1] = 1.0;  // one-hot, level 0 as reference
      j += card - 1;
      t[k] = static_cast<double>(knobs[k]) / static_cast<double>(card - 1);
    }
    for (std::size_t k = 0; k < n; ++k) phi[j++] = t[k];
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a; b < n; ++b) phi[j++] = t[a] * t[b];
    return phi;
  }

  void fit(const std::vector<DesignPoint>& data) {
    const auto rows = static_cast<Eigen::Index>(data.size());
    Eigen::MatrixXd x(rows, static_cast<Eigen::Index>(dim_));
    Eigen::MatrixXd y(rows, 2);
    for (Eigen::Index i = 0; i < rows; ++i) {
      const auto& p = data[static_cast<std::size_t>(i)];
      x.row(i) = features(p.knobs).transpose();
      y(i, 0) = std::log(p.obj().area());
      y(i, 1) = std::log(p.obj().latency());
    }
    Eigen::MatrixXd gram = x.transpose() * x;
    gram.diagonal().array() += kRidge;
    weights_ = gram.ldlt().solve(x.transpose() * y);
    residuals_ = y - x * weights_;
  }

  Eigen::RowVector2d predict(const Knobs& knobs) const { return features(knobs).transpose() * weights_; }
  const Eigen::MatrixXd& residuals() const noexcept { return residuals_; }

 private:
  const SearchContext& ctx_;
  std::size_t dim_ = 0;
  Eigen::MatrixXd weights_;
  Eigen::MatrixXd residuals_;
};

// Smallest log-margin by which z escapes domination by any front member
// (positive iff no member weakly dominates z).
double dominance_gain(const std::vector<Eigen::RowVector2d>& front, const Eigen::RowVector2d& z) {
  double gain = std::numeric_limits<double>::infinity();
  for (const auto& m : front) gain = std::min(gain, std::max(m[0] - z[0], m[1] - z[1]));
  return gain;
}

}  // namespace

void run_sbo(SearchContext& ctx) {
  for (std::size_t i = 0; i < kWarmup && !ctx.done(); ++i) {
    if (!ctx.evaluate(ctx.fresh_variant(ctx.random_knobs()))) return;
  }
  QuadraticModel model(ctx);
  std::uint64_t fitted_at = 0;
  while (!ctx.done()) {
    if (fitted_at == 0 || ctx.evaluations_used() - fitted_at >= kRefitPeriod) {
      model.fit(ctx.archive());
      fitted_at = ctx.evaluations_used();
    }
    std::vector<Eigen::RowVector2d> front;
    for (std::size_t idx : ctx.front()) {
      const auto& o = ctx.archive()[idx].obj();
      front.emplace_back(std::log(o.area()), std::log(o.latency()));
    }

    std::vector<Knobs> pool;
    for (std::size_t i = 0; i < kRandomCandidates; ++i) {
      Knobs k = ctx.random_knobs();
      if (!ctx.seen(k)) pool.push_back(std::move(k));
    }
    std::vector<std::size_t> members = ctx.front();
    ctx.rng().shuffle(members.begin(), members.end());
    std::size_t added = 0;
    for (std::size_t idx : members) {
      for (auto& nb : ctx.neighbors(ctx.archive()[idx].knobs)) {
        if (added >= kNeighborCandidates) break;
        if (!ctx.seen(nb)) {
          pool.push_back(std::move(nb));
          ++added;
        }
      }
    }
    if (pool.empty()) {
      if (!ctx.evaluate(ctx.fresh_variant(ctx.random_knobs()))) return;
      continue;
    }

    const auto& res = model.residuals();
    const auto n_res = static_cast<std::size_t>(res.rows());
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < pool.size(); ++c) {
      const Eigen::RowVector2d mean = model.predict(pool[c]);
      double expected = 0.0;
      for (int s = 0; s < kResidualSamples; ++s) {
        const Eigen::RowVector2d z = mean + res.row(static_cast<Eigen::Index>(ctx.rng().below(n_res)));
        expected += std::max(0.0, dominance_gain(front, z));
      }
      // Mean-prediction gain breaks ties between candidates with no expected improvement.
      const double score = expected / kResidualSamples + 1e-3 * dominance_gain(front, mean);
      if (score > best_score) {
        best_score = score;
        best = c;
      }
    }
    if (!ctx.evaluate(pool[best])) return;
  }
}

}  // namespace soberdse::detail
