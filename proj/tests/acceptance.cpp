// Acceptance gate: one line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <array>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "bkt_irt/bkt_engine.hpp"
#include "bkt_irt/equilibrium_bridge.hpp"
#include "bkt_irt/experiment_lab.hpp"
#include "bkt_irt/irt_models.hpp"
#include "bkt_irt/ising_field.hpp"
#include "bkt_irt/markov_engine.hpp"
#include "oracles.hpp"

using namespace bkt_irt;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double hand_logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

// 1. Stationary law mixed through the emission equals the unit-discrimination 4PL.
Outcome bridge_identity() {
  RngStream rng(1001, {1});
  double worst = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const BktParams p = oracle::random_params(rng);
    const StationaryDist dist = stationary_closed_form(p);
    const Emission2 b = build_matrices(p).emission;
    const double mixed = dist.lambda0 * b.m(0, 1) + dist.lambda1 * b.m(1, 1);
    const double target = p.p_guess + (1.0 - p.p_slip - p.p_guess) * hand_logistic(std::log(p.p_learn) - std::log(p.p_forget));
    worst = std::max({worst, std::abs(mixed - target), std::abs(bkt_to_irt(p).p_correct - target)});
  }
  return {worst <= 1e-12, fmt("max |diff| = %.3g over 1e4 draws", worst)};
}

// Stationary law by repeated squaring of the transition matrix, 2^k steps.
std::array<double, 2> squared_power_stationary(double pl, double pf) {
  double a00 = 1.0 - pl, a01 = pl, a10 = pf, a11 = 1.0 - pf;
  for (int k = 0; k < 256; ++k) {
    const double b00 = a00 * a00 + a01 * a10, b01 = a00 * a01 + a01 * a11;
    const double b10 = a10 * a00 + a11 * a10, b11 = a10 * a01 + a11 * a11;
    // Renormalize rows to keep the iterate stochastic.
    a00 = b00 / (b00 + b01);
    a01 = b01 / (b00 + b01);
    a10 = b10 / (b10 + b11);
    a11 = b11 / (b10 + b11);
  }
  return {a00, a01};
}

// 2. Closed-form stationary law vs power iteration.
Outcome stationary_vs_power() {
  RngStream rng(1002, {1});
  double worst = 0.0;
  int used = 0;
  while (used < 10000) {
    const BktParams p = oracle::random_params(rng);
    if (!(std::abs(1.0 - p.p_learn - p.p_forget) < 1.0)) continue;
    ++used;
    const StationaryDist dist = stationary_closed_form(p);
    const auto power = squared_power_stationary(p.p_learn, p.p_forget);
    worst = std::max({worst, std::abs(dist.lambda0 - power[0]), std::abs(dist.lambda1 - power[1])});
  }
  return {worst <= 1e-10, fmt("max |diff| = %.3g over 1e4 draws", worst)};
}

// 3. Geometric convergence of the marginal.
Outcome geometric_convergence() {
  RngStream rng(1003, {1});
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const BktParams p = oracle::random_params(rng);
    const double lambda1 = p.p_learn / (p.p_learn + p.p_forget);
    const double rate = std::abs(1.0 - p.p_learn - p.p_forget);
    for (std::int64_t t = 0; t <= 200; ++t) {
      const double lhs = std::abs(marginal_at(p, t) - lambda1);
      const double rhs = std::pow(rate, static_cast<double>(t)) * std::abs(p.p_init - lambda1);
      worst = std::max(worst, std::abs(lhs - rhs));
    }
  }
  return {worst <= 1e-10, fmt("max |diff| = %.3g over 1000 draws x t in [0, 200]", worst)};
}

// 4 and 5 share the desk-scale run.
struct DeskRun {
  SimConfig config;
  ExperimentResult result;
};

const DeskRun& desk_run() {
  static const DeskRun run = [] {
    SimConfig config = SimConfig::desk();
    // Seed of the desk-scale CLI example.
    config.seed = 42;
    return DeskRun{config, run_equilibrium_experiment(config, static_cast<int>(std::thread::hardware_concurrency()))};
  }();
  return run;
}

Outcome desk_simulation() {
  const DeskRun& run = desk_run();
  const Irf4pl item{1.0, 0.0, 0.1, 0.9};
  std::vector<double> dev, rmse;
  for (const auto& curve : run.result.curves) {
    const CurveDeviation d = compare_to_irf(curve, item, 200);
    dev.push_back(d.max_abs_dev);
    rmse.push_back(d.weighted_rmse);
  }
  const bool decreasing = dev[0] > dev[1] && dev[1] > dev[2];
  return {dev[2] <= 0.05 && decreasing,
          fmt("max dev T=2: %.4f, T=5: %.4f, T=50: %.4f (limit 0.05); weighted rmse %.4f, %.4f, %.4f", dev[0],
              dev[1], dev[2], rmse[0], rmse[1], rmse[2])};
}

Outcome desk_fit() {
  const DeskRun& run = desk_run();
  const IrfCdFit fit = fit_irf_cd(to_binned_points(run.result.curves.back()), 1.0);
  return {fit.c >= 0.05 && fit.c <= 0.15 && fit.d >= 0.85 && fit.d <= 0.95, fmt("c = %.4f, d = %.4f", fit.c, fit.d)};
}

// 6. Classic limit on one long trajectory.
Outcome classic_limit_check() {
  const BktParams p{0.0, 0.2, 0.0, 0.1, 0.2};
  RngStream rng(1006, {1});
  const std::int64_t length = 100000;
  const Trajectory traj = sample_trajectory(p, length, rng);
  const std::int64_t burn = 1000;
  double correct = 0.0;
  for (std::int64_t t = burn; t < length; ++t) correct += traj.emitted[t];
  const double n = static_cast<double>(length - burn);
  const double freq = correct / n;
  const double bound = oracle::three_sigma(1.0 - p.p_slip, n);
  return {std::abs(freq - (1.0 - p.p_slip)) <= bound, fmt("tail freq %.5f vs %.2f (3 sigma %.5f)", freq, 0.9, bound)};
}

std::vector<std::vector<int>> simulate(const BktParams& truth, int count, int length, std::uint64_t seed) {
  std::vector<std::vector<int>> seqs;
  for (int s = 0; s < count; ++s) {
    RngStream stream(seed, {static_cast<std::uint64_t>(s)});
    const Trajectory traj = sample_trajectory(truth, length, stream);
    seqs.emplace_back(traj.emitted.begin(), traj.emitted.end());
  }
  return seqs;
}

// 7. EM monotonicity and recovery.
Outcome em_properties() {
  RngStream rng(1007, {1});
  double worst_drop = 0.0;
  for (int k = 0; k < 100; ++k) {
    const BktParams truth = oracle::random_params(rng);
    const BktParams init = oracle::random_params(rng);
    const auto seqs = simulate(truth, 40, 12, 5000 + static_cast<std::uint64_t>(k));
    const FitReport r = fit_baum_welch(seqs, init);
    for (std::size_t i = 1; i < r.loglik_trace.size(); ++i) {
      worst_drop = std::max(worst_drop, r.loglik_trace[i - 1] - r.loglik_trace[i]);
    }
  }
  const BktParams truth{0.2, 0.3, 0.0, 0.1, 0.2};
  double worst_err = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto seqs = simulate(truth, 500, 20, seed);
    const FitReport r = fit_baum_welch(seqs, {0.5, 0.1, 0.0, 0.3, 0.3}, {.constraints = {.classic = true, .identified = true}});
    worst_err = std::max({worst_err, std::abs(r.params.p_init - truth.p_init), std::abs(r.params.p_learn - truth.p_learn),
                          std::abs(r.params.p_slip - truth.p_slip), std::abs(r.params.p_guess - truth.p_guess)});
  }
  return {worst_drop <= 1e-9 && worst_err <= 0.05,
          fmt("worst loglik drop %.3g; worst recovery error %.4f (limit 0.05)", worst_drop, worst_err)};
}

// 8. Forward filter vs path enumeration over every response sequence.
Outcome filter_vs_enumeration() {
  RngStream rng(1008, {1});
  double worst = 0.0;
  long sequences = 0;
  for (int k = 0; k < 20; ++k) {
    const BktParams p = oracle::random_params(rng);
    for (int length = 1; length <= 8; ++length) {
      for (std::uint32_t bits = 0; bits < (1U << length); ++bits) {
        std::vector<int> x(static_cast<std::size_t>(length));
        for (int t = 0; t < length; ++t) x[static_cast<std::size_t>(t)] = static_cast<int>((bits >> t) & 1U);
        worst = std::max(worst, std::abs(forward_filter(p, x).log_likelihood - oracle::brute_force_loglik(p, x)));
        ++sequences;
      }
    }
  }
  return {worst <= 1e-10, fmt("max |diff| = %.3g over %ld sequences", worst, sequences)};
}

// 9. IRF suite on fuzzed items.
Outcome irf_suite() {
  RngStream rng(1009, {1});
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double c = 0.4 * rng.uniform();
    const Irf4pl item{0.2 + 3.0 * rng.uniform(), 6.0 * rng.uniform() - 3.0, c, c + 0.05 + (0.95 - c) * rng.uniform()};
    const double x = 8.0 * rng.uniform() - 4.0;
    const auto f = [&](double t) { return irf_4pl(t, item); };
    const double far = 50.0 / item.a * 10.0;
    worst = std::max({worst,
                      std::abs(f(item.b - far) - item.c),
                      std::abs(f(item.b + far) - item.d),
                      std::abs(f(item.b + x) + f(item.b - x) - (item.c + item.d)),
                      std::abs(f(item.b) - 0.5 * (item.c + item.d)),
                      std::abs(irf_slope_max(item) - item.a * (item.d - item.c) / 4.0),
                      std::abs(oracle::central_difference(f, item.b) - irf_slope_max(item)),
                      std::abs(oracle::central_difference(f, x) - irf_slope(x, item))});
  }
  return {worst <= 1e-6, fmt("max |diff| = %.3g over 1e3 items", worst)};
}

// 10. Ising samplers vs exact Boltzmann law.
Outcome ising_oracle() {
  constexpr std::int64_t kSweeps = 1'000'000;
  constexpr double kAlpha = 0.001;
  RngStream net_rng(1010, {1});
  std::string detail;
  bool pass = true;
  for (Eigen::Index n = 2; n <= 4; ++n) {
    IsingNetwork net = make_network(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      net.fields(i) = 1.5 * net_rng.uniform() - 1.0;
      for (Eigen::Index j = i + 1; j < n; ++j) net.couplings(i, j) = net.couplings(j, i) = 0.2 + 0.8 * net_rng.uniform();
    }
    const Eigen::VectorXd exact = boltzmann_exact(net);
    for (const Dynamics dyn : {Dynamics::Glauber, Dynamics::Metropolis}) {
      RngStream rng(1010, {2, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(dyn)});
      const FieldFrequencies freq = field_frequencies(net, kSweeps, rng, dyn, ScanOrder::Fixed);
      const double stat = oracle::chi_square(freq.latent_counts, exact, static_cast<double>(freq.samples));
      const double crit = oracle::chi_square_critical(kAlpha, static_cast<int>(exact.size()) - 1);
      pass = pass && stat <= crit;
      detail += fmt("n=%ld %s chi2 %.1f/%.1f; ", static_cast<long>(n), dyn == Dynamics::Glauber ? "G" : "M", stat, crit);
    }
  }
  IsingNetwork single = make_network(1);
  single.fields(0) = 0.6;
  RngStream rng(1010, {3});
  const FieldFrequencies freq = field_frequencies(single, kSweeps, rng, Dynamics::Glauber);
  const double p1 = static_cast<double>(freq.latent_counts(1)) / static_cast<double>(freq.samples);
  const double target = hand_logistic(0.6);
  const double bound = oracle::three_sigma(target, static_cast<double>(freq.samples));
  pass = pass && std::abs(p1 - target) <= bound;
  detail += fmt("single node %.5f vs %.5f (3 sigma %.5f)", p1, target, bound);
  return {pass, detail};
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "bridge identity", 1.0, bridge_identity},
      {2, "stationary closed form vs power iteration", 5.0, stationary_vs_power},
      {3, "geometric convergence", 1.0, geometric_convergence},
      {4, "desk-scale simulation vs 4PL", 60.0, desk_simulation},
      {5, "fit_irf_cd on desk curve", 1.0, desk_fit},
      {6, "classic limit", 1.0, classic_limit_check},
      {7, "EM monotonicity and recovery", 120.0, em_properties},
      {8, "forward filter vs enumeration", 10.0, filter_vs_enumeration},
      {9, "IRF suite", 1.0, irf_suite},
      {10, "Ising samplers vs Boltzmann", 30.0, ising_oracle},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("threw: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_budget = seconds < c.budget_seconds;
    const bool pass = outcome.pass && in_budget;
    failures += pass ? 0 : 1;
    std::printf("%s criterion %2d  %-42s %7.2fs (budget %.0fs)%s  %s\n", pass ? "PASS" : "FAIL", c.id, c.name, seconds,
                c.budget_seconds, in_budget ? "" : " OVER BUDGET", outcome.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
