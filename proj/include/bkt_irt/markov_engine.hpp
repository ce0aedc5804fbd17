#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "bkt_irt/core_model.hpp"
#include "bkt_irt/rng.hpp"

namespace bkt_irt {

// State convention used everywhere in this library:
//   latent state 0 = unmastered, 1 = mastered
//   response     0 = incorrect,  1 = correct
// Transition rows are the current state, columns the next state; emission
// rows are the latent state, columns the response. Some presentations list
// the mastered row first; under that layout the matrices below are the same
// up to a simultaneous row/column permutation.

/// Row-stochastic 2x2 transition matrix, rows = current state.
struct Transition2 {
  Eigen::Matrix2d m;
};

/// Row-stochastic 2x2 emission matrix, rows = latent state, columns = response.
struct Emission2 {
  Eigen::Matrix2d m;
};

struct ChainMatrices {
  Transition2 transition;
  Emission2 emission;
};

/// A = [[1 - p_learn, p_learn], [p_forget, 1 - p_forget]],
/// B = [[1 - p_guess, p_guess], [p_slip, 1 - p_slip]].
ChainMatrices build_matrices(const BktParams& params);

/// Equilibrium law (lambda0, lambda1) of the latent chain. `periodic` marks
/// the p_learn = p_forget = 1 chain, which flips deterministically: the
/// stationary law exists but finite-t marginals oscillate.
struct StationaryDist {
  double lambda0 = 0.0;
  double lambda1 = 0.0;
  bool periodic = false;
};

/// (p_forget, p_learn) / (p_learn + p_forget). Throws Reducible when both
/// transition probabilities are zero.
StationaryDist stationary_closed_form(const BktParams& params);

struct PowerIterationResult {
  Eigen::VectorXd distribution;
  std::int64_t iterations = 0;
  bool converged = false;
  bool periodic = false;
};

/// Iterates x <- A^T x from `start` until successive iterates agree to `tol`
/// in the max norm. Declares the chain periodic when iterates t and t + 2
/// agree while t and t + 1 do not.
template <typename Derived>
PowerIterationResult stationary_power_iteration(const Eigen::MatrixBase<Derived>& transition,
                                                const Eigen::VectorXd& start, double tol = 1e-12,
                                                std::int64_t max_iters = 1'000'000) {
  const Eigen::MatrixXd at = transition.transpose();
  PowerIterationResult result;
  Eigen::VectorXd prev2 = start;
  Eigen::VectorXd prev = at * start;
  if ((prev - prev2).lpNorm<Eigen::Infinity>() < tol) {
    result.distribution = prev;
    result.iterations = 1;
    result.converged = true;
    return result;
  }
  for (std::int64_t it = 2; it <= max_iters; ++it) {
    Eigen::VectorXd next = at * prev;
    next /= next.sum();
    if ((next - prev).lpNorm<Eigen::Infinity>() < tol) {
      result.distribution = next;
      result.iterations = it;
      result.converged = true;
      return result;
    }
    if ((next - prev2).lpNorm<Eigen::Infinity>() < tol) {
      // Two-cycle: report the cycle average, which is the stationary law.
      result.distribution = 0.5 * (next + prev);
      result.iterations = it;
      result.periodic = true;
      return result;
    }
    prev2 = std::move(prev);
    prev = std::move(next);
  }
  result.distribution = prev;
  result.iterations = max_iters;
  return result;
}

/// P(Z_t = 1) for the chain started from P(Z_0 = 1) = p_init, computed as the
/// mastered entry of (A^T)^t (1 - p_init, p_init) by repeated squaring.
double marginal_at(const BktParams& params, std::int64_t t);

/// Matrix power by repeated squaring.
Eigen::Matrix2d matrix_power(const Eigen::Matrix2d& m, std::int64_t exponent);

struct Trajectory {
  std::vector<std::uint8_t> latent;
  std::vector<std::uint8_t> emitted;
  StreamKey provenance;
};

/// Samples latent[0] ~ Bernoulli(p_init), then latent[t + 1] | latent[t] via A
/// and emitted[t] | latent[t] via B. Consumes draws from `stream` in the fixed
/// order (latent, emission) per step.
Trajectory sample_trajectory(const BktParams& params, std::int64_t length, RngStream& stream);

}  // namespace bkt_irt
