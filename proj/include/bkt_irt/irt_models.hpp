#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <type_traits>

#include <Eigen/Core>

#include "bkt_irt/core_model.hpp"
#include "bkt_irt/rng.hpp"

namespace bkt_irt {

/// Overflow-safe logistic 1 / (1 + exp(-z)).
template <typename Scalar>
  requires std::is_floating_point_v<Scalar>
Scalar logistic(Scalar z) {
  using std::exp;
  if (z >= Scalar(0)) return Scalar(1) / (Scalar(1) + exp(-z));
  const Scalar e = exp(z);
  return e / (Scalar(1) + e);
}

/// Coefficient-wise logistic for Eigen arrays.
template <typename Derived>
auto logistic(const Eigen::ArrayBase<Derived>& z) {
  using Scalar = typename Derived::Scalar;
  return z.unaryExpr([](Scalar v) { return logistic(v); });
}

/// c + (d - c) logistic(a (theta - b)).
template <typename Scalar>
  requires std::is_floating_point_v<Scalar>
Scalar irf_4pl(Scalar theta, const Irf4pl& item) {
  const Scalar z = Scalar(item.a) * (theta - Scalar(item.b));
  return Scalar(item.c) + Scalar(item.d - item.c) * logistic(z);
}

inline double irf_4pl(double theta, const Irf4pl& item) { return irf_4pl<double>(theta, item); }

template <typename Derived>
Eigen::Array<typename Derived::Scalar, Eigen::Dynamic, 1> irf_4pl(const Eigen::ArrayBase<Derived>& theta,
                                                                  const Irf4pl& item) {
  using Scalar = typename Derived::Scalar;
  return theta.unaryExpr([&item](Scalar t) { return irf_4pl<Scalar>(t, item); });
}

/// dP/dtheta = a (d - c) s (1 - s), s = logistic(a (theta - b)).
double irf_slope(double theta, const Irf4pl& item);

/// Slope at the inflection point theta = b: a (d - c) / 4.
double irf_slope_max(const Irf4pl& item);

/// c + (d - c) logistic(loadings' theta + beta). Throws DimensionMismatch.
double irf_mirt(const Eigen::Ref<const Eigen::VectorXd>& theta, const MirtIrf& item);

struct DynamicIrtPath {
  /// theta(t - 1) is the ability at step t, t = 1..T.
  Eigen::VectorXd theta;
  /// responses(t - 1, i) is the response to item i at step t.
  Eigen::MatrixXi responses;
};

/// theta_t = theta_{t-1} + eps_t, eps_t ~ N(0, noise_sd^2); the response to
/// item i at step t is Bernoulli(logistic(theta_t - b_i)).
DynamicIrtPath simulate_dynamic_irt(const DynamicIrtConfig& config, std::int64_t steps, RngStream& stream);

struct BinnedPoint {
  double advantage = 0.0;   // theta - b
  double proportion = 0.0;  // empirical proportion correct
  double count = 0.0;       // weight
};

struct IrfCdFit {
  double c = 0.0;
  double d = 1.0;
  /// Count-weighted sum of squared residuals at the returned (c, d).
  double residual = 0.0;
};

/// Count-weighted least squares for (c, d) in p = c + (d - c) logistic(a_fixed x).
/// The model is linear in (c, d); the unconstrained solution is projected onto
/// 0 <= c < d <= 1 by minimizing over the active faces.
IrfCdFit fit_irf_cd(std::span<const BinnedPoint> bins, double a_fixed = 1.0);

}  // namespace bkt_irt
