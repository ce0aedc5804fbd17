#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include <Eigen/Core>

#include "bkt_irt/error.hpp"

namespace bkt_irt {

/// The five per-skill probabilities of the knowledge tracing model.
///   p_init   probability the skill is mastered before the first attempt
///   p_learn  unmastered -> mastered transition probability
///   p_forget mastered -> unmastered transition probability
///   p_slip   P(incorrect | mastered)
///   p_guess  P(correct | unmastered)
struct BktParams {
  double p_init = 0.0;
  double p_learn = 0.0;
  double p_forget = 0.0;
  double p_slip = 0.0;
  double p_guess = 0.0;

  friend bool operator==(const BktParams&, const BktParams&) = default;
};

/// `classic` pins p_forget to exactly 0. `identified` requires guess and slip
/// strictly below 0.5, which selects one member of each label-swapped pair.
struct ConstraintFlags {
  bool classic = false;
  bool identified = false;
};

/// Returns `params` unchanged when every invariant holds, throws otherwise.
/// Closed interval [0, 1] with no slack; NaN is rejected as OutOfRange.
BktParams validate_bkt(const BktParams& params, ConstraintFlags flags = {});

/// Parameters of the mirrored model obtained by swapping the latent labels.
/// The swapped model attains the same likelihood on every data set.
BktParams label_swap(const BktParams& params);

/// 4PL item: c + (d - c) * logistic(a (theta - b)).
struct Irf4pl {
  double a = 1.0;  // discrimination
  double b = 0.0;  // difficulty
  double c = 0.0;  // lower asymptote (guessing)
  double d = 1.0;  // upper asymptote (1 - inattention)
};

Irf4pl make_4pl(double a, double b, double c, double d);
Irf4pl make_3pl(double a, double b, double c);
Irf4pl make_2pl(double a, double b);
/// Rasch item.
Irf4pl make_1pl(double b);

void validate_irf(const Irf4pl& item);

/// Compensatory multidimensional 4PL item: c + (d - c) * logistic(a'theta + beta).
struct MirtIrf {
  Eigen::VectorXd loadings;
  double beta = 0.0;
  double c = 0.0;
  double d = 1.0;
};

void validate_irf(const MirtIrf& item);

/// Random-walk ability with a 1PL observation model.
struct DynamicIrtConfig {
  double theta0 = 0.0;
  double noise_sd = 0.0;
  Eigen::VectorXd difficulties;
};

void validate_config(const DynamicIrtConfig& config);

struct ResponseRecord {
  std::int64_t person_id = 0;
  std::int64_t item_id = 0;
  std::int64_t skill_id = 0;
  std::int64_t attempt = 1;
  int correct = 0;

  friend bool operator==(const ResponseRecord&, const ResponseRecord&) = default;
};

/// Longitudinal response records. Construction validates that attempts per
/// (person, skill) are 1, 2, ..., T with no duplicates, and that every
/// response is 0 or 1.
class ResponsePanel {
 public:
  ResponsePanel() = default;
  explicit ResponsePanel(std::vector<ResponseRecord> records);

  const std::vector<ResponseRecord>& records() const noexcept { return records_; }
  bool empty() const noexcept { return records_.empty(); }

  bool has_skill(std::int64_t skill_id) const;
  std::vector<std::int64_t> skills() const;

  /// Response sequences for one skill, one per person, ordered by person id
  /// and then by attempt. Throws UnknownSkill if the skill is absent.
  std::map<std::int64_t, std::vector<int>> sequences(std::int64_t skill_id) const;

 private:
  std::vector<ResponseRecord> records_;
};

}  // namespace bkt_irt
