#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "bkt_irt/core_model.hpp"

namespace bkt_irt {

struct FilterResult {
  /// P(Z_t = 1 | X_1..X_t), one entry per attempt.
  std::vector<double> posterior;
  /// P(X_t = 1 | X_1..X_{t-1}), one entry per attempt.
  std::vector<double> predictive;
  /// Sum over attempts of log P(X_t = x_t | X_1..X_{t-1}).
  double log_likelihood = 0.0;
};

/// Forward recursion over one response sequence. Throws ZeroLikelihood when
/// an observed response has probability zero under `params`.
FilterResult forward_filter(const BktParams& params, std::span<const int> responses);

/// Sum of forward_filter log-likelihoods over every person's sequence for
/// `skill_id`. Sequences are independent given the shared skill parameters.
double sequence_loglik(const BktParams& params, const ResponsePanel& panel, std::int64_t skill_id);

struct FitOptions {
  ConstraintFlags constraints;
  /// Stop when |delta loglik| / (1 + |loglik|) falls below this.
  double tol = 1e-6;
  int max_iters = 500;
};

struct FitReport {
  BktParams params;
  /// loglik_trace[0] is the log-likelihood at the (boundary-nudged) initial
  /// parameters, loglik_trace[k] the value after the k-th M-step.
  std::vector<double> loglik_trace;
  int iterations = 0;
  bool converged = false;
  ConstraintFlags constraint_set;
  /// Every response in the fitted skill is identical and the fit was not
  /// `identified`; the estimate sits on a boundary and is not trustworthy.
  bool degenerate_data = false;
};

/// Expected sufficient statistics accumulated by the E-step.
struct BktSufficientStats {
  double n_sequences = 0.0;
  double init_mastered = 0.0;     // sum of P(Z_1 = 1 | X)
  double from_unmastered = 0.0;   // expected visits to state 0 with a successor
  double learn = 0.0;             // expected 0 -> 1 transitions
  double from_mastered = 0.0;     // expected visits to state 1 with a successor
  double forget = 0.0;            // expected 1 -> 0 transitions
  double occ_unmastered = 0.0;    // expected emissions from state 0
  double guess = 0.0;             // ... of which correct
  double occ_mastered = 0.0;      // expected emissions from state 1
  double slip = 0.0;              // ... of which incorrect
  double log_likelihood = 0.0;

  BktSufficientStats& operator+=(const BktSufficientStats& other);
};

/// Scaled forward-backward pass for one sequence.
BktSufficientStats expected_counts(const BktParams& params, std::span<const int> responses);

/// Closed-form M-step. Under `classic` the forgetting transition is
/// structurally zero; under `identified` guess and slip are clamped to
/// [0, 0.5 - 1e-6]. All free estimates are then nudged into [1e-9, 1 - 1e-9].
BktParams maximize(const BktSufficientStats& stats, const BktParams& previous,
                   ConstraintFlags constraints);

/// Baum-Welch EM for one skill's shared parameters. Throws InvalidInit when
/// `init` violates `options.constraints`.
FitReport fit_baum_welch(const ResponsePanel& panel, std::int64_t skill_id, const BktParams& init,
                         const FitOptions& options = {});

/// Same, on pre-extracted sequences.
FitReport fit_baum_welch(std::span<const std::vector<int>> sequences, const BktParams& init,
                         const FitOptions& options = {});

}  // namespace bkt_irt
