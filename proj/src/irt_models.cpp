#include "bkt_irt/irt_models.hpp"

#include <algorithm>
#include <random>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

namespace bkt_irt {

double irf_slope(double theta, const Irf4pl& item) {
  const double s = logistic(item.a * (theta - item.b));
  return item.a * (item.d - item.c) * s * (1.0 - s);
}

double irf_slope_max(const Irf4pl& item) { return item.a * (item.d - item.c) / 4.0; }

double irf_mirt(const Eigen::Ref<const Eigen::VectorXd>& theta, const MirtIrf& item) {
  if (theta.size() != item.loadings.size()) {
    std::ostringstream msg;
    msg << "ability has dimension " << theta.size() << " but item has " << item.loadings.size()
        << " loadings";
    throw Error(ErrorCode::DimensionMismatch, msg.str());
  }
  return item.c + (item.d - item.c) * logistic(item.loadings.dot(theta) + item.beta);
}

DynamicIrtPath simulate_dynamic_irt(const DynamicIrtConfig& config, std::int64_t steps, RngStream& stream) {
  validate_config(config);
  if (steps < 1) throw Error(ErrorCode::OutOfRange, "steps must be >= 1");
  const Eigen::Index n_items = config.difficulties.size();

  DynamicIrtPath path;
  path.theta.resize(steps);
  path.responses.resize(steps, n_items);
  std::normal_distribution<double> noise(0.0, 1.0);
  double theta = config.theta0;
  for (std::int64_t t = 0; t < steps; ++t) {
    if (config.noise_sd > 0.0) theta += config.noise_sd * noise(stream);
    path.theta(t) = theta;
    for (Eigen::Index i = 0; i < n_items; ++i) {
      path.responses(t, i) = stream.bernoulli(logistic(theta - config.difficulties(i))) ? 1 : 0;
    }
  }
  return path;
}

IrfCdFit fit_irf_cd(std::span<const BinnedPoint> bins, double a_fixed) {
  if (!(a_fixed > 0.0)) throw Error(ErrorCode::OutOfRange, "a_fixed must be positive");
  std::vector<BinnedPoint> used;
  for (const auto& bin : bins) {
    if (bin.count > 0.0) used.push_back(bin);
  }
  if (used.size() < 2) {
    throw Error(ErrorCode::InsufficientData, "need at least two bins with positive count");
  }
  const bool all_equal = std::all_of(used.begin(), used.end(), [&](const BinnedPoint& p) {
    return p.advantage == used.front().advantage;
  });
  if (all_equal) throw Error(ErrorCode::DegenerateFit, "all advantages are equal");

  const auto n = static_cast<Eigen::Index>(used.size());
  Eigen::VectorXd w(n), y(n), lo(n), hi(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& p = used[static_cast<std::size_t>(k)];
    w(k) = p.count;
    y(k) = p.proportion;
    hi(k) = logistic(a_fixed * p.advantage);
    lo(k) = 1.0 - hi(k);
  }
  const auto residual = [&](double c, double d) {
    return (w.array() * (y - c * lo - d * hi).array().square()).sum();
  };

  Eigen::Matrix2d normal;
  normal << (w.array() * lo.array() * lo.array()).sum(), (w.array() * lo.array() * hi.array()).sum(),
            (w.array() * lo.array() * hi.array()).sum(), (w.array() * hi.array() * hi.array()).sum();
  const Eigen::Vector2d rhs((w.array() * lo.array() * y.array()).sum(),
                            (w.array() * hi.array() * y.array()).sum());
  const Eigen::Vector2d free = normal.ldlt().solve(rhs);

  const auto feasible = [](double c, double d) { return c >= 0.0 && d <= 1.0 && c < d; };
  if (free.allFinite() && feasible(free(0), free(1))) {
    return {free(0), free(1), residual(free(0), free(1))};
  }

  // The minimum lies on a face. c = d is excluded (open constraint), leaving
  // c = 0 and d = 1 plus their shared corner.
  IrfCdFit best{0.0, 1.0, residual(0.0, 1.0)};
  const auto consider = [&](double c, double d) {
    if (!feasible(c, d)) return;
    const double r = residual(c, d);
    if (r < best.residual) best = {c, d, r};
  };
  const double hh = (w.array() * hi.array().square()).sum();
  if (hh > 0.0) consider(0.0, std::clamp((w.array() * y.array() * hi.array()).sum() / hh, 0.0, 1.0));
  const double ll = (w.array() * lo.array().square()).sum();
  if (ll > 0.0) {
    consider(std::clamp((w.array() * (y - hi).array() * lo.array()).sum() / ll, 0.0, 1.0), 1.0);
  }
  return best;
}

}  // namespace bkt_irt
