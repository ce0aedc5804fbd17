#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "bkt_irt/bkt_engine.hpp"
#include "bkt_irt/core_model.hpp"
#include "bkt_irt/equilibrium_bridge.hpp"
#include "bkt_irt/experiment_lab.hpp"
#include "bkt_irt/ising_field.hpp"
#include "bkt_irt/markov_engine.hpp"

namespace bkt_irt {

inline constexpr int kFormatVersion = 1;

// Response panels: CSV with header person_id,item_id,skill_id,attempt,correct.
// Lines starting with '#' are comments.
ResponsePanel read_panel_csv(std::istream& in);
ResponsePanel read_panel_csv(const std::filesystem::path& path);
void write_panel_csv(std::ostream& out, const ResponsePanel& panel);

// BktParams: {"p_init", "p_learn", "p_forget", "p_slip", "p_guess"}.
nlohmann::json to_json(const BktParams& params);
BktParams bkt_params_from_json(const nlohmann::json& j);

nlohmann::json to_json(const FitReport& report);
nlohmann::json to_json(const SkillEquilibrium& eq);
nlohmann::json to_json(const StationaryDist& dist);

/// Network file: {"n", "couplings": [[i, j, sigma], ...] (upper triangle),
/// "fields": [...], "emissions": [{"p_guess", "p_slip"}, ...]}. Missing fields
/// and emissions default to zero.
IsingNetwork network_from_json(const nlohmann::json& j);
nlohmann::json to_json(const IsingNetwork& net);

/// bin_center,iterations,prop_correct,n_obs,irf_value
void write_experiment_csv(std::ostream& out, const ExperimentResult& result, const Irf4pl& item);

nlohmann::json read_json_file(const std::filesystem::path& path);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace bkt_irt
