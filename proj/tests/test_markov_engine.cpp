#include <doctest.h>

#include <cmath>

#include "bkt_irt/markov_engine.hpp"
#include "oracles.hpp"

using namespace bkt_irt;

TEST_CASE("build_matrices transcribes the unmastered-first layout") {
  const auto [a, b] = build_matrices({0.0, 0.3, 0.1, 0.1, 0.2});
  CHECK(a.m(0, 0) == doctest::Approx(0.7));
  CHECK(a.m(0, 1) == 0.3);
  CHECK(a.m(1, 0) == 0.1);
  CHECK(a.m(1, 1) == doctest::Approx(0.9));
  CHECK(b.m(0, 0) == doctest::Approx(0.8));
  CHECK(b.m(0, 1) == 0.2);
  CHECK(b.m(1, 0) == 0.1);
  CHECK(b.m(1, 1) == doctest::Approx(0.9));

  const auto still = build_matrices({0.5, 0.0, 0.0, 0.1, 0.2});
  CHECK(still.transition.m == Eigen::Matrix2d::Identity());
}

TEST_CASE("build_matrices rows are stochastic for random parameters") {
  RngStream rng(3, {1});
  for (int k = 0; k < 1000; ++k) {
    const auto [a, b] = build_matrices(oracle::random_params(rng));
    CHECK((a.m.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
    CHECK((b.m.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
    CHECK(a.m.minCoeff() >= 0.0);
    CHECK(b.m.minCoeff() >= 0.0);
  }
}

TEST_CASE("stationary_closed_form matches long power iteration") {
  const BktParams p{0.0, 0.3, 0.1, 0.0, 0.0};
  const auto oracle_dist = oracle::power_iterate(p, {1.0, 0.0}, 10000);
  CHECK(oracle_dist[0] == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(oracle_dist[1] == doctest::Approx(0.75).epsilon(1e-14));

  const StationaryDist dist = stationary_closed_form(p);
  CHECK(std::abs(dist.lambda0 - oracle_dist[0]) < 1e-12);
  CHECK(std::abs(dist.lambda1 - oracle_dist[1]) < 1e-12);
  CHECK_FALSE(dist.periodic);

  const StationaryDist sym = stationary_closed_form({0.0, 0.4, 0.4, 0.0, 0.0});
  CHECK(sym.lambda0 == 0.5);
  CHECK(sym.lambda1 == 0.5);
}

TEST_CASE("stationary_closed_form edge cases") {
  try {
    stationary_closed_form({0.3, 0.0, 0.0, 0.1, 0.1});
    FAIL("expected Reducible");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Reducible);
  }
  const StationaryDist flip = stationary_closed_form({0.3, 1.0, 1.0, 0.1, 0.1});
  CHECK(flip.periodic);
  CHECK(flip.lambda1 == 0.5);
}

TEST_CASE("power iteration flags the period-two chain") {
  const auto [a, b] = build_matrices({0.0, 1.0, 1.0, 0.0, 0.0});
  const auto result = stationary_power_iteration(a.m, Eigen::Vector2d(1.0, 0.0));
  CHECK(result.periodic);
  CHECK_FALSE(result.converged);
  CHECK(result.distribution(1) == doctest::Approx(0.5));

  const auto [a2, b2] = build_matrices({0.0, 0.3, 0.1, 0.0, 0.0});
  const auto ok = stationary_power_iteration(a2.m, Eigen::Vector2d(1.0, 0.0));
  CHECK(ok.converged);
  CHECK(ok.distribution(1) == doctest::Approx(0.75).epsilon(1e-11));
}

TEST_CASE("marginal_at examples") {
  CHECK(marginal_at({0.2, 0.3, 0.1, 0.1, 0.1}, 0) == 0.2);
  CHECK(marginal_at({0.0, 0.5, 0.5, 0.1, 0.1}, 1) == doctest::Approx(0.5).epsilon(1e-15));
  const BktParams p{0.0, 0.3, 0.1, 0.1, 0.1};
  CHECK(oracle::marginal(p, 2) == doctest::Approx(0.48).epsilon(1e-15));
  CHECK(std::abs(marginal_at(p, 2) - 0.48) < 1e-15);
  CHECK_THROWS_AS(marginal_at(p, -1), Error);
}

TEST_CASE("marginal_at agrees with repeated multiplication and converges geometrically") {
  RngStream rng(3, {2});
  for (int k = 0; k < 200; ++k) {
    const BktParams p = oracle::random_params(rng);
    const double lambda1 = stationary_closed_form(p).lambda1;
    const double rate = std::abs(1.0 - p.p_learn - p.p_forget);
    for (std::int64_t t : {0, 1, 2, 3, 7, 20, 64, 200}) {
      const double m = marginal_at(p, t);
      CHECK(std::abs(m - oracle::marginal(p, t)) < 1e-12);
      CHECK(std::abs(std::abs(m - lambda1) - std::pow(rate, static_cast<double>(t)) * std::abs(p.p_init - lambda1)) <
            1e-10);
    }
  }
}

TEST_CASE("sample_trajectory deterministic edge cases") {
  RngStream rng(1, {});
  const Trajectory always = sample_trajectory({1.0, 0.4, 0.0, 0.0, 0.3}, 500, rng);
  CHECK(std::all_of(always.emitted.begin(), always.emitted.end(), [](auto x) { return x == 1; }));
  CHECK(std::all_of(always.latent.begin(), always.latent.end(), [](auto x) { return x == 1; }));

  const Trajectory never = sample_trajectory({0.0, 0.0, 0.3, 0.2, 0.0}, 500, rng);
  CHECK(std::all_of(never.emitted.begin(), never.emitted.end(), [](auto x) { return x == 0; }));

  CHECK_THROWS_AS(sample_trajectory({0.0, 0.0, 0.3, 0.2, 0.0}, 0, rng), Error);
}

TEST_CASE("sample_trajectory is reproducible per stream key") {
  const BktParams p{0.3, 0.2, 0.1, 0.1, 0.2};
  RngStream a(99, {4});
  RngStream b(99, {4});
  const Trajectory ta = sample_trajectory(p, 1000, a);
  const Trajectory tb = sample_trajectory(p, 1000, b);
  CHECK(ta.latent == tb.latent);
  CHECK(ta.emitted == tb.emitted);
  CHECK(ta.provenance == StreamKey{99, {4, 0, 0, 0}});
}

TEST_CASE("long-run latent frequency matches the stationary law") {
  const BktParams p{0.0, 0.3, 0.1, 0.1, 0.2};
  RngStream rng(2024, {1});
  const std::int64_t length = 1'000'000;
  const Trajectory traj = sample_trajectory(p, length, rng);
  double mastered = 0.0;
  for (std::int64_t t = 1000; t < length; ++t) mastered += traj.latent[t];
  const double freq = mastered / static_cast<double>(length - 1000);
  CHECK(std::abs(freq - 0.75) < 0.005);
}
