#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "bkt_irt/core_model.hpp"
#include "bkt_irt/irt_models.hpp"
#include "bkt_irt/rng.hpp"

namespace bkt_irt {

/// Learner-item convergence simulation. Every (person, item) pair runs its own
/// two-state chain from the unmastered state with the person's learning rate
/// and the item's forgetting rate; after T steps one response is emitted.
struct SimConfig {
  int n_people = 1000;
  int n_items = 100;
  int replications = 1000;
  std::vector<int> iteration_counts{2, 5, 50};
  double p_slip = 0.1;
  double p_guess = 0.1;
  std::uint64_t seed = 20190101;
  double bin_width = 0.25;
  /// Bins cover [-advantage_limit, advantage_limit]; pairs outside are
  /// pooled into the extreme bins.
  double advantage_limit = 8.0;

  /// 1000 people, 100 items, 1000 replications.
  static SimConfig full_scale();
  /// 200 people, 50 items, 200 replications; runs in seconds.
  static SimConfig desk();
};

void validate_config(const SimConfig& config);

struct Population {
  Eigen::VectorXd p_learn;   // per person
  Eigen::VectorXd p_forget;  // per item
  Eigen::VectorXd theta;     // log p_learn
  Eigen::VectorXd b;         // log p_forget
};

/// Endpoint guard for the uniform draws so that logs stay finite.
inline constexpr double kUniformEpsilon = 1e-12;

/// p_learn ~ U(eps, 1 - eps) per person, then p_forget likewise per item, all
/// drawn in that order from `stream`.
Population draw_population(const SimConfig& config, RngStream& stream);

/// Population drawn from the stream reserved for it under `config.seed`.
Population draw_population(const SimConfig& config);

struct BinRow {
  double bin_center = 0.0;
  int iterations = 0;
  double prop_correct = 0.0;
  std::int64_t n_obs = 0;

  friend bool operator==(const BinRow&, const BinRow&) = default;
};

/// Rows for one iteration count, ascending in bin_center. Empty bins are omitted.
struct BinnedCurve {
  int iterations = 0;
  std::vector<BinRow> rows;

  friend bool operator==(const BinnedCurve&, const BinnedCurve&) = default;
};

struct ExperimentResult {
  Population population;
  std::vector<BinnedCurve> curves;  // one per entry of iteration_counts, same order
};

/// Index of the bin whose center (a multiple of bin_width) is nearest to
/// `advantage`, clamped to the extreme bins.
int bin_index(double advantage, double bin_width, double advantage_limit);

/// Runs the simulation. Each (person, item, replication) triple draws from its
/// own counter-based stream and workers merge integer histograms, so the
/// result is bit-identical for every thread count.
ExperimentResult run_equilibrium_experiment(const SimConfig& config, int threads = 1);

/// The superimposed response curve on the advantage scale: a = 1, b = 0,
/// c = p_guess, d = 1 - p_slip.
Irf4pl experiment_irf(const SimConfig& config);

/// Exact P(correct) after `steps` transitions from the unmastered state.
double pair_response_probability(double p_learn, double p_forget, double p_slip, double p_guess,
                                 std::int64_t steps);

struct CurveDeviation {
  double max_abs_dev = 0.0;
  double weighted_rmse = 0.0;
  std::int64_t bins_used = 0;
};

/// Deviation of the curve from irf_4pl(bin_center, item) over bins with
/// n_obs >= min_count; RMSE weights each bin by n_obs. Throws
/// InsufficientData when no bin qualifies.
CurveDeviation compare_to_irf(const BinnedCurve& curve, const Irf4pl& item, std::int64_t min_count);

/// Curve rows as fit_irf_cd input.
std::vector<BinnedPoint> to_binned_points(const BinnedCurve& curve);

}  // namespace bkt_irt
