#include "bkt_irt/equilibrium_bridge.hpp"

#include <cmath>
#include <sstream>

#include "bkt_irt/markov_engine.hpp"

namespace bkt_irt {
namespace {

void require_ergodic(double p_learn, double p_forget) {
  if (!(p_learn > 0.0) || !(p_forget > 0.0)) {
    std::ostringstream msg;
    msg << "equilibrium map needs p_learn > 0 and p_forget > 0, got p_learn = " << p_learn
        << ", p_forget = " << p_forget;
    throw Error(ErrorCode::NonErgodic, msg.str());
  }
}

}  // namespace

SkillEquilibrium bkt_to_irt(const BktParams& params) {
  require_ergodic(params.p_learn, params.p_forget);
  const double mastered = params.p_learn / (params.p_learn + params.p_forget);
  SkillEquilibrium eq;
  eq.theta = std::log(params.p_learn);
  eq.b = std::log(params.p_forget);
  eq.c = params.p_guess;
  eq.d = 1.0 - params.p_slip;
  eq.p_correct = params.p_guess + ((1.0 - params.p_slip) - params.p_guess) * mastered;
  return eq;
}

LearnerItemEquilibrium learner_item_equilibrium(double p_learn, double p_forget, double p_slip,
                                                double p_guess) {
  require_ergodic(p_learn, p_forget);
  LearnerItemEquilibrium eq;
  eq.theta = std::log(p_learn);
  eq.b = std::log(p_forget);
  eq.c = p_guess;
  eq.d = 1.0 - p_slip;
  // Evaluated on the IRT side: unit-discrimination 4PL at advantage theta - b.
  eq.p_correct = irf_4pl(eq.theta, Irf4pl{1.0, eq.b, eq.c, eq.d});
  return eq;
}

Irf4pl equilibrium_item(const SkillEquilibrium& eq) { return Irf4pl{1.0, eq.b, eq.c, eq.d}; }

EquilibriumBktParams irt_to_bkt(double theta, double b, double c, double d) {
  if (!(theta <= 0.0) || !(b <= 0.0)) {
    std::ostringstream msg;
    msg << "theta and b must be <= 0 (logs of probabilities), got theta = " << theta << ", b = " << b;
    throw Error(ErrorCode::OutOfDomain, msg.str());
  }
  if (!(c >= 0.0 && c < d && d <= 1.0)) {
    std::ostringstream msg;
    msg << "asymptotes must satisfy 0 <= c < d <= 1, got c = " << c << ", d = " << d;
    throw Error(ErrorCode::OutOfDomain, msg.str());
  }
  EquilibriumBktParams out;
  out.params.p_init = 0.5;
  out.params.p_learn = std::exp(theta);
  out.params.p_forget = std::exp(b);
  out.params.p_guess = c;
  out.params.p_slip = 1.0 - d;
  return out;
}

double classic_limit(const BktParams& params) {
  if (params.p_forget != 0.0 || !(params.p_learn > 0.0)) {
    throw Error(ErrorCode::OutOfDomain, "classic limit needs p_forget = 0 and p_learn > 0");
  }
  return 1.0 - params.p_slip;
}

double equilibrium_gap(const BktParams& params, std::int64_t t) {
  const double equilibrium = bkt_to_irt(params).p_correct;
  const Emission2 emission = build_matrices(params).emission;
  const double mastered = marginal_at(params, t);
  const double at_t = Eigen::Vector2d(1.0 - mastered, mastered).dot(emission.m.col(1));
  return std::abs(at_t - equilibrium);
}

double equilibrium_gap_closed_form(const BktParams& params, std::int64_t t) {
  require_ergodic(params.p_learn, params.p_forget);
  const double lambda1 = stationary_closed_form(params).lambda1;
  const double rate = std::abs(1.0 - params.p_learn - params.p_forget);
  return std::abs(1.0 - params.p_slip - params.p_guess) * std::pow(rate, static_cast<double>(t)) *
         std::abs(params.p_init - lambda1);
}

}  // namespace bkt_irt
