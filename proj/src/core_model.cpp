#include "bkt_irt/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <tuple>

namespace bkt_irt {
namespace {

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

void require_probability(double p, const char* name) {
  if (!is_probability(p)) {
    std::ostringstream msg;
    msg << name << " = " << p << " is outside [0, 1]";
    throw Error(ErrorCode::OutOfRange, msg.str());
  }
}

void require_asymptotes(double c, double d) {
  require_probability(c, "c");
  require_probability(d, "d");
  if (!(c < d)) {
    std::ostringstream msg;
    msg << "asymptotes must satisfy c < d, got c = " << c << ", d = " << d;
    throw Error(ErrorCode::OutOfRange, msg.str());
  }
}

}  // namespace

BktParams validate_bkt(const BktParams& params, ConstraintFlags flags) {
  require_probability(params.p_init, "p_init");
  require_probability(params.p_learn, "p_learn");
  require_probability(params.p_forget, "p_forget");
  require_probability(params.p_slip, "p_slip");
  require_probability(params.p_guess, "p_guess");
  if (flags.classic && params.p_forget != 0.0) {
    std::ostringstream msg;
    msg << "classic model requires p_forget = 0, got " << params.p_forget;
    throw Error(ErrorCode::ForgettingNonzero, msg.str());
  }
  if (flags.identified && !(params.p_guess < 0.5 && params.p_slip < 0.5)) {
    std::ostringstream msg;
    msg << "identified model requires p_guess < 0.5 and p_slip < 0.5, got p_guess = "
        << params.p_guess << ", p_slip = " << params.p_slip;
    throw Error(ErrorCode::Unidentified, msg.str());
  }
  return params;
}

BktParams label_swap(const BktParams& params) {
  return BktParams{
      .p_init = 1.0 - params.p_init,
      .p_learn = params.p_forget,
      .p_forget = params.p_learn,
      .p_slip = 1.0 - params.p_guess,
      .p_guess = 1.0 - params.p_slip,
  };
}

void validate_irf(const Irf4pl& item) {
  if (!(item.a > 0.0) || !std::isfinite(item.a)) {
    throw Error(ErrorCode::OutOfRange, "discrimination a must be positive and finite");
  }
  if (!std::isfinite(item.b)) {
    throw Error(ErrorCode::OutOfRange, "difficulty b must be finite");
  }
  require_asymptotes(item.c, item.d);
}

void validate_irf(const MirtIrf& item) {
  if (!item.loadings.allFinite() || !std::isfinite(item.beta)) {
    throw Error(ErrorCode::OutOfRange, "loadings and intercept must be finite");
  }
  require_asymptotes(item.c, item.d);
}

Irf4pl make_4pl(double a, double b, double c, double d) {
  Irf4pl item{a, b, c, d};
  validate_irf(item);
  return item;
}

Irf4pl make_3pl(double a, double b, double c) { return make_4pl(a, b, c, 1.0); }
Irf4pl make_2pl(double a, double b) { return make_4pl(a, b, 0.0, 1.0); }
Irf4pl make_1pl(double b) { return make_4pl(1.0, b, 0.0, 1.0); }

void validate_config(const DynamicIrtConfig& config) {
  if (!(config.noise_sd >= 0.0) || !std::isfinite(config.noise_sd)) {
    throw Error(ErrorCode::OutOfRange, "noise_sd must be a nonnegative finite value");
  }
  if (!std::isfinite(config.theta0) || !config.difficulties.allFinite()) {
    throw Error(ErrorCode::OutOfRange, "theta0 and difficulties must be finite");
  }
}

ResponsePanel::ResponsePanel(std::vector<ResponseRecord> records)
    : records_(std::move(records)) {
  using Key = std::tuple<std::int64_t, std::int64_t>;
  std::map<Key, std::set<std::int64_t>> attempts;
  for (const auto& r : records_) {
    if (r.correct != 0 && r.correct != 1) {
      std::ostringstream msg;
      msg << "person " << r.person_id << " skill " << r.skill_id << ": correct must be 0 or 1";
      throw Error(ErrorCode::InvalidPanel, msg.str());
    }
    if (r.attempt < 1) {
      std::ostringstream msg;
      msg << "person " << r.person_id << " skill " << r.skill_id << ": attempt must be >= 1";
      throw Error(ErrorCode::InvalidPanel, msg.str());
    }
    if (!attempts[{r.person_id, r.skill_id}].insert(r.attempt).second) {
      std::ostringstream msg;
      msg << "duplicate record for person " << r.person_id << " skill " << r.skill_id
          << " attempt " << r.attempt;
      throw Error(ErrorCode::InvalidPanel, msg.str());
    }
  }
  for (const auto& [key, seen] : attempts) {
    // std::set is ordered, so consecutive from 1 means the last element is the size.
    if (*seen.rbegin() != static_cast<std::int64_t>(seen.size())) {
      std::ostringstream msg;
      msg << "attempts for person " << std::get<0>(key) << " skill " << std::get<1>(key)
          << " are not consecutive from 1";
      throw Error(ErrorCode::InvalidPanel, msg.str());
    }
  }
}

bool ResponsePanel::has_skill(std::int64_t skill_id) const {
  return std::any_of(records_.begin(), records_.end(),
                     [&](const ResponseRecord& r) { return r.skill_id == skill_id; });
}

std::vector<std::int64_t> ResponsePanel::skills() const {
  std::set<std::int64_t> ids;
  for (const auto& r : records_) ids.insert(r.skill_id);
  return {ids.begin(), ids.end()};
}

std::map<std::int64_t, std::vector<int>> ResponsePanel::sequences(std::int64_t skill_id) const {
  std::map<std::int64_t, std::vector<std::pair<std::int64_t, int>>> by_person;
  for (const auto& r : records_) {
    if (r.skill_id == skill_id) by_person[r.person_id].emplace_back(r.attempt, r.correct);
  }
  if (by_person.empty()) {
    std::ostringstream msg;
    msg << "skill " << skill_id << " has no records";
    throw Error(ErrorCode::UnknownSkill, msg.str());
  }
  std::map<std::int64_t, std::vector<int>> out;
  for (auto& [person, rows] : by_person) {
    std::sort(rows.begin(), rows.end());
    auto& seq = out[person];
    seq.reserve(rows.size());
    for (const auto& row : rows) seq.push_back(row.second);
  }
  return out;
}

}  // namespace bkt_irt
