#include <doctest.h>

#include <cmath>

#include "bkt_irt/experiment_lab.hpp"
#include "oracles.hpp"

using namespace bkt_irt;

namespace {

SimConfig small_config() {
  SimConfig config;
  config.n_people = 40;
  config.n_items = 15;
  config.replications = 30;
  config.seed = 9;
  return config;
}

BinnedCurve curve_from_irf(const Irf4pl& item, double shift) {
  BinnedCurve curve;
  curve.iterations = 50;
  for (int k = -8; k <= 8; ++k) {
    const double x = 0.5 * k;
    curve.rows.push_back({x, 50, irf_4pl(x, item) + shift, 300});
  }
  return curve;
}

}  // namespace

TEST_CASE("config validation") {
  CHECK_NOTHROW(validate_config(SimConfig::desk()));
  SimConfig bad = small_config();
  bad.iteration_counts = {};
  CHECK_THROWS_AS(validate_config(bad), Error);
  bad = small_config();
  bad.iteration_counts = {2, 0};
  CHECK_THROWS_AS(validate_config(bad), Error);
  bad = small_config();
  bad.bin_width = 0.0;
  CHECK_THROWS_AS(validate_config(bad), Error);
  bad = small_config();
  bad.replications = 0;
  try {
    validate_config(bad);
    FAIL("expected InvalidConfig");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidConfig);
  }
  CHECK(SimConfig::full_scale().n_people == 1000);
  CHECK(SimConfig::desk().replications == 200);
}

TEST_CASE("draw_population is deterministic and log-consistent") {
  const SimConfig config = small_config();
  const Population a = draw_population(config);
  const Population b = draw_population(config);
  CHECK(a.p_learn == b.p_learn);
  CHECK(a.p_forget == b.p_forget);
  CHECK(a.theta.maxCoeff() <= 0.0);
  CHECK(a.b.maxCoeff() <= 0.0);
  CHECK(a.theta.allFinite());
  CHECK(a.p_learn.minCoeff() > 0.0);
  CHECK(a.p_learn.maxCoeff() < 1.0);
  for (Eigen::Index p = 0; p < a.theta.size(); ++p) CHECK(a.theta(p) == std::log(a.p_learn(p)));
}

TEST_CASE("population learning rates are uniform on the unit interval") {
  SimConfig config = small_config();
  config.n_people = 100000;
  config.n_items = 1;
  const Population pop = draw_population(config);
  CHECK(std::abs(pop.p_learn.mean() - 0.5) <= 0.005);
}

TEST_CASE("bin_index rounds to the nearest center and pools the tails") {
  CHECK(bin_index(0.0, 0.25, 8.0) == 0);
  CHECK(bin_index(0.13, 0.25, 8.0) == 1);
  CHECK(bin_index(-0.6, 0.25, 8.0) == -2);
  CHECK(bin_index(-30.0, 0.25, 8.0) == -32);
  CHECK(bin_index(30.0, 0.25, 8.0) == 32);
}

TEST_CASE("results do not depend on the thread count") {
  const SimConfig config = small_config();
  const ExperimentResult one = run_equilibrium_experiment(config, 1);
  const ExperimentResult three = run_equilibrium_experiment(config, 3);
  const ExperimentResult many = run_equilibrium_experiment(config, 64);
  CHECK(one.curves == three.curves);
  CHECK(one.curves == many.curves);
  REQUIRE(one.curves.size() == 3);
  for (const auto& curve : one.curves) {
    std::int64_t total = 0;
    for (std::size_t k = 0; k < curve.rows.size(); ++k) {
      total += curve.rows[k].n_obs;
      CHECK(curve.rows[k].prop_correct >= 0.0);
      CHECK(curve.rows[k].prop_correct <= 1.0);
      CHECK(curve.rows[k].n_obs > 0);
      if (k > 0) CHECK(curve.rows[k].bin_center > curve.rows[k - 1].bin_center);
    }
    CHECK(total == std::int64_t{40} * 15 * 30);
  }
}

TEST_CASE("a single pair matches its exact response probability") {
  SimConfig config;
  config.n_people = 1;
  config.n_items = 1;
  config.replications = 100000;
  config.iteration_counts = {1, 3, 20};
  config.seed = 123;
  const ExperimentResult r = run_equilibrium_experiment(config, 1);
  const double pl = r.population.p_learn(0);
  const double pf = r.population.p_forget(0);
  for (const auto& curve : r.curves) {
    REQUIRE(curve.rows.size() == 1);
    // Exact response law from hand-iterated marginals.
    bkt_irt::BktParams p{0.0, pl, pf, config.p_slip, config.p_guess};
    const double exact = config.p_guess + (1.0 - config.p_slip - config.p_guess) * oracle::marginal(p, curve.iterations);
    CHECK(std::abs(pair_response_probability(pl, pf, config.p_slip, config.p_guess, curve.iterations) - exact) <= 1e-14);
    CHECK(std::abs(curve.rows[0].prop_correct - exact) <= oracle::three_sigma(exact, 100000));
  }
}

TEST_CASE("certain learning with noiseless emissions answers correctly") {
  CHECK(pair_response_probability(1.0, 0.0, 0.0, 0.0, 1) == 1.0);
  CHECK(pair_response_probability(1.0, 0.3, 0.0, 0.0, 1) == 1.0);
}

TEST_CASE("compare_to_irf") {
  const Irf4pl item{1.0, 0.0, 0.1, 0.9};
  const CurveDeviation zero = compare_to_irf(curve_from_irf(item, 0.0), item, 200);
  CHECK(zero.max_abs_dev == 0.0);
  CHECK(zero.weighted_rmse == 0.0);
  CHECK(zero.bins_used == 17);

  const CurveDeviation shifted = compare_to_irf(curve_from_irf(item, 0.02), item, 200);
  CHECK(std::abs(shifted.max_abs_dev - 0.02) <= 1e-15);
  CHECK(std::abs(shifted.weighted_rmse - 0.02) <= 1e-15);

  BinnedCurve sparse = curve_from_irf(item, 0.0);
  sparse.rows[3].n_obs = 10;
  sparse.rows[3].prop_correct = 1.0;
  CHECK(compare_to_irf(sparse, item, 200).max_abs_dev == 0.0);
  try {
    compare_to_irf(sparse, item, 1000);
    FAIL("expected InsufficientData");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientData);
  }
}

TEST_CASE("to_binned_points carries counts as weights") {
  const BinnedCurve curve = curve_from_irf({1.0, 0.0, 0.1, 0.9}, 0.0);
  const auto points = to_binned_points(curve);
  REQUIRE(points.size() == curve.rows.size());
  CHECK(points[4].advantage == curve.rows[4].bin_center);
  CHECK(points[4].count == 300.0);
  const IrfCdFit fit = fit_irf_cd(points, 1.0);
  CHECK(std::abs(fit.c - 0.1) <= 1e-9);
  CHECK(std::abs(fit.d - 0.9) <= 1e-9);
}
