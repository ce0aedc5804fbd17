#include "bkt_irt/markov_engine.hpp"

#include <sstream>

namespace bkt_irt {

ChainMatrices build_matrices(const BktParams& params) {
  ChainMatrices out;
  out.transition.m << 1.0 - params.p_learn, params.p_learn,
                      params.p_forget, 1.0 - params.p_forget;
  out.emission.m << 1.0 - params.p_guess, params.p_guess,
                    params.p_slip, 1.0 - params.p_slip;
  return out;
}

StationaryDist stationary_closed_form(const BktParams& params) {
  const double total = params.p_learn + params.p_forget;
  if (total == 0.0) {
    throw Error(ErrorCode::Reducible,
                "p_learn = p_forget = 0: identity transition has no unique stationary distribution");
  }
  StationaryDist dist;
  // Divide for the smaller mass and complement the larger one, so the pair
  // sums to one and e.g. (0.3, 0.1) gives exactly 0.75.
  if (params.p_forget <= params.p_learn) {
    dist.lambda0 = params.p_forget / total;
    dist.lambda1 = 1.0 - dist.lambda0;
  } else {
    dist.lambda1 = params.p_learn / total;
    dist.lambda0 = 1.0 - dist.lambda1;
  }
  dist.periodic = total == 2.0;
  return dist;
}

Eigen::Matrix2d matrix_power(const Eigen::Matrix2d& m, std::int64_t exponent) {
  Eigen::Matrix2d result = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d base = m;
  while (exponent > 0) {
    if (exponent & 1) result = (result * base).eval();
    base = (base * base).eval();
    exponent >>= 1;
  }
  return result;
}

double marginal_at(const BktParams& params, std::int64_t t) {
  if (t < 0) throw Error(ErrorCode::OutOfRange, "marginal_at requires t >= 0");
  if (t == 0) return params.p_init;
  const Eigen::Matrix2d at = build_matrices(params).transition.m.transpose();
  const Eigen::Vector2d start(1.0 - params.p_init, params.p_init);
  const Eigen::Vector2d out = matrix_power(at, t) * start;
  return out(1);
}

Trajectory sample_trajectory(const BktParams& params, std::int64_t length, RngStream& stream) {
  if (length < 1) throw Error(ErrorCode::OutOfRange, "trajectory length must be >= 1");
  Trajectory traj;
  traj.provenance = stream.key();
  traj.latent.resize(static_cast<std::size_t>(length));
  traj.emitted.resize(static_cast<std::size_t>(length));

  bool mastered = stream.bernoulli(params.p_init);
  for (std::int64_t t = 0; t < length; ++t) {
    if (t > 0) {
      mastered = mastered ? !stream.bernoulli(params.p_forget) : stream.bernoulli(params.p_learn);
    }
    const double p_correct = mastered ? 1.0 - params.p_slip : params.p_guess;
    traj.latent[t] = mastered ? 1 : 0;
    traj.emitted[t] = stream.bernoulli(p_correct) ? 1 : 0;
  }
  return traj;
}

}  // namespace bkt_irt
