#include "bkt_irt/bkt_engine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bkt_irt/markov_engine.hpp"

namespace bkt_irt {
namespace {

constexpr double kBoundaryNudge = 1e-9;
constexpr double kIdentifiedCeiling = 0.5 - 1e-6;

void require_binary(std::span<const int> responses) {
  if (responses.empty()) throw Error(ErrorCode::InsufficientData, "response sequence is empty");
  for (int x : responses) {
    if (x != 0 && x != 1) throw Error(ErrorCode::OutOfRange, "responses must be 0 or 1");
  }
}

double nudge(double p) { return std::clamp(p, kBoundaryNudge, 1.0 - kBoundaryNudge); }

BktParams nudge_all(BktParams p, ConstraintFlags constraints) {
  p.p_init = nudge(p.p_init);
  p.p_learn = nudge(p.p_learn);
  p.p_forget = constraints.classic ? 0.0 : nudge(p.p_forget);
  p.p_slip = nudge(p.p_slip);
  p.p_guess = nudge(p.p_guess);
  return p;
}

[[noreturn]] void throw_zero_likelihood(std::size_t t) {
  std::ostringstream msg;
  msg << "observed response at attempt " << (t + 1) << " has probability 0";
  throw Error(ErrorCode::ZeroLikelihood, msg.str());
}

}  // namespace

FilterResult forward_filter(const BktParams& params, std::span<const int> responses) {
  require_binary(responses);
  const auto [transition, emission] = build_matrices(params);
  const Eigen::Matrix2d at = transition.m.transpose();

  FilterResult out;
  out.posterior.reserve(responses.size());
  out.predictive.reserve(responses.size());

  Eigen::Vector2d prior(1.0 - params.p_init, params.p_init);
  for (std::size_t t = 0; t < responses.size(); ++t) {
    if (t > 0) prior = at * prior;
    const int x = responses[t];
    out.predictive.push_back(prior.dot(emission.m.col(1)));
    const Eigen::Vector2d joint = prior.cwiseProduct(emission.m.col(x));
    const double realized = joint.sum();
    if (!(realized > 0.0)) throw_zero_likelihood(t);
    out.log_likelihood += std::log(realized);
    prior = joint / realized;
    out.posterior.push_back(prior(1));
  }
  return out;
}

double sequence_loglik(const BktParams& params, const ResponsePanel& panel, std::int64_t skill_id) {
  double total = 0.0;
  for (const auto& [person, seq] : panel.sequences(skill_id)) {
    total += forward_filter(params, seq).log_likelihood;
  }
  return total;
}

BktSufficientStats& BktSufficientStats::operator+=(const BktSufficientStats& o) {
  n_sequences += o.n_sequences;
  init_mastered += o.init_mastered;
  from_unmastered += o.from_unmastered;
  learn += o.learn;
  from_mastered += o.from_mastered;
  forget += o.forget;
  occ_unmastered += o.occ_unmastered;
  guess += o.guess;
  occ_mastered += o.occ_mastered;
  slip += o.slip;
  log_likelihood += o.log_likelihood;
  return *this;
}

BktSufficientStats expected_counts(const BktParams& params, std::span<const int> responses) {
  require_binary(responses);
  const auto [transition, emission] = build_matrices(params);
  const Eigen::Matrix2d& a = transition.m;
  const Eigen::Matrix2d& b = emission.m;
  const std::size_t n = responses.size();

  // alpha[t] = P(Z_t | X_1..X_t), scale[t] = P(X_t | X_1..X_{t-1}).
  std::vector<Eigen::Vector2d> alpha(n);
  std::vector<double> scale(n);
  Eigen::Vector2d prior(1.0 - params.p_init, params.p_init);
  BktSufficientStats stats;
  for (std::size_t t = 0; t < n; ++t) {
    if (t > 0) prior = a.transpose() * alpha[t - 1];
    const Eigen::Vector2d joint = prior.cwiseProduct(b.col(responses[t]));
    scale[t] = joint.sum();
    if (!(scale[t] > 0.0)) throw_zero_likelihood(t);
    alpha[t] = joint / scale[t];
    stats.log_likelihood += std::log(scale[t]);
  }

  // Scaled backward pass; gamma_t = alpha_t .* beta_t.
  Eigen::Vector2d beta(1.0, 1.0);
  for (std::size_t k = n; k-- > 0;) {
    const Eigen::Vector2d gamma = alpha[k].cwiseProduct(beta);
    const int x = responses[k];
    stats.occ_unmastered += gamma(0);
    stats.occ_mastered += gamma(1);
    if (x == 1) stats.guess += gamma(0);
    if (x == 0) stats.slip += gamma(1);
    if (k == 0) {
      stats.init_mastered += gamma(1);
      break;
    }
    // xi(i, j) = alpha_{k-1}(i) A(i, j) B(j, x_k) beta_k(j) / scale_k
    const Eigen::Vector2d emit_beta = b.col(x).cwiseProduct(beta) / scale[k];
    const Eigen::Vector2d& prev = alpha[k - 1];
    const double xi01 = prev(0) * a(0, 1) * emit_beta(1);
    const double xi10 = prev(1) * a(1, 0) * emit_beta(0);
    const Eigen::Vector2d prev_beta = a * emit_beta;
    const Eigen::Vector2d prev_gamma = prev.cwiseProduct(prev_beta);
    stats.learn += xi01;
    stats.forget += xi10;
    stats.from_unmastered += prev_gamma(0);
    stats.from_mastered += prev_gamma(1);
    beta = prev_beta;
  }
  stats.n_sequences = 1.0;
  return stats;
}

BktParams maximize(const BktSufficientStats& s, const BktParams& previous, ConstraintFlags constraints) {
  const auto ratio = [](double num, double den, double fallback) {
    return den > 0.0 ? std::clamp(num / den, 0.0, 1.0) : fallback;
  };
  BktParams next;
  next.p_init = ratio(s.init_mastered, s.n_sequences, previous.p_init);
  next.p_learn = ratio(s.learn, s.from_unmastered, previous.p_learn);
  next.p_forget = constraints.classic ? 0.0 : ratio(s.forget, s.from_mastered, previous.p_forget);
  next.p_guess = ratio(s.guess, s.occ_unmastered, previous.p_guess);
  next.p_slip = ratio(s.slip, s.occ_mastered, previous.p_slip);
  if (constraints.identified) {
    // Each emission parameter has its own concave term in the expected
    // complete-data log-likelihood, so clamping is the constrained maximizer.
    next.p_guess = std::min(next.p_guess, kIdentifiedCeiling);
    next.p_slip = std::min(next.p_slip, kIdentifiedCeiling);
  }
  return nudge_all(next, constraints);
}

FitReport fit_baum_welch(const ResponsePanel& panel, std::int64_t skill_id, const BktParams& init,
                         const FitOptions& options) {
  const auto by_person = panel.sequences(skill_id);
  std::vector<std::vector<int>> seqs;
  seqs.reserve(by_person.size());
  for (const auto& [person, seq] : by_person) seqs.push_back(seq);
  return fit_baum_welch(std::span<const std::vector<int>>(seqs), init, options);
}

FitReport fit_baum_welch(std::span<const std::vector<int>> sequences, const BktParams& init,
                         const FitOptions& options) {
  try {
    validate_bkt(init, options.constraints);
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidInit, std::string(e.name()) + ": " + e.what());
  }
  if (!(options.tol > 0.0)) throw Error(ErrorCode::InvalidConfig, "tol must be positive");
  if (options.max_iters < 0) throw Error(ErrorCode::InvalidConfig, "max_iters must be >= 0");
  if (sequences.empty()) throw Error(ErrorCode::InsufficientData, "no sequences to fit");

  const auto e_step = [&](const BktParams& p) {
    BktSufficientStats total;
    for (const auto& seq : sequences) total += expected_counts(p, seq);
    return total;
  };

  FitReport report;
  report.constraint_set = options.constraints;

  bool saw_correct = false;
  bool saw_incorrect = false;
  for (const auto& seq : sequences) {
    for (int x : seq) (x == 1 ? saw_correct : saw_incorrect) = true;
  }
  report.degenerate_data = !options.constraints.identified && (saw_correct != saw_incorrect);

  BktParams params = nudge_all(init, options.constraints);
  BktSufficientStats stats = e_step(params);
  report.loglik_trace.push_back(stats.log_likelihood);

  for (int iter = 1; iter <= options.max_iters; ++iter) {
    params = maximize(stats, params, options.constraints);
    const double previous = stats.log_likelihood;
    stats = e_step(params);
    report.loglik_trace.push_back(stats.log_likelihood);
    report.iterations = iter;
    if (std::abs(stats.log_likelihood - previous) / (1.0 + std::abs(previous)) < options.tol) {
      report.converged = true;
      break;
    }
  }
  report.params = params;
  if (report.degenerate_data) report.converged = false;
  return report;
}

}  // namespace bkt_irt
