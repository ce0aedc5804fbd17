#pragma once

#include <cstdint>

#include "bkt_irt/core_model.hpp"
#include "bkt_irt/irt_models.hpp"

namespace bkt_irt {

// At equilibrium the latent mastery law of an ergodic knowledge tracing chain
// is logistic in log(p_learn) - log(p_forget), so the response law is a 4PL
// with unit discrimination:
//
//   P(correct) = p_guess + (1 - p_slip - p_guess) * logistic(theta - b),
//   theta = log p_learn,  b = log p_forget.
//
// These maps are exact reparameterizations, not estimators. theta and b of a
// single skill enter only through their difference, so equilibrium data for
// one skill cannot separate them.

/// Skill-centric equilibrium: ability and difficulty both belong to the skill.
struct SkillEquilibrium {
  double theta = 0.0;  // log p_learn
  double b = 0.0;      // log p_forget
  double c = 0.0;      // p_guess
  double d = 1.0;      // 1 - p_slip
  double p_correct = 0.0;
};

/// Learner-item equilibrium: ability from the learner's learning rate,
/// difficulty from the item's forgetting rate.
struct LearnerItemEquilibrium {
  double theta = 0.0;  // log p_learn of the learner
  double b = 0.0;      // log p_forget of the item
  double c = 0.0;      // item guess
  double d = 1.0;      // 1 - item slip
  double p_correct = 0.0;
};

/// Throws NonErgodic when p_learn or p_forget is zero.
SkillEquilibrium bkt_to_irt(const BktParams& params);

LearnerItemEquilibrium learner_item_equilibrium(double p_learn, double p_forget, double p_slip,
                                                double p_guess);

/// Equilibrium response curve of the skill as a 4PL item on the advantage scale.
Irf4pl equilibrium_item(const SkillEquilibrium& eq);

struct EquilibriumBktParams {
  BktParams params;
  /// p_init carries no information at equilibrium; it is set to 0.5.
  bool equilibrium_only = true;
};

/// Inverse map. Throws OutOfDomain for theta > 0 or b > 0 (a probability
/// above 1) or when 0 <= c < d <= 1 fails.
EquilibriumBktParams irt_to_bkt(double theta, double b, double c, double d);

/// Long-run correct probability of the classic model (p_forget = 0,
/// p_learn > 0): mastery is absorbing, so the answer is 1 - p_slip.
double classic_limit(const BktParams& params);

/// |P(X_t = 1) - P(X = 1 at equilibrium)| where P(X_t = 1) mixes
/// marginal_at(params, t) through the emission matrix.
double equilibrium_gap(const BktParams& params, std::int64_t t);

/// |1 - p_slip - p_guess| |1 - p_learn - p_forget|^t |p_init - lambda1|.
double equilibrium_gap_closed_form(const BktParams& params, std::int64_t t);

}  // namespace bkt_irt
