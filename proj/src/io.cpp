#include "bkt_irt/io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>
#include <vector>

#include <openssl/evp.h>

#include "bkt_irt/format.hpp"

namespace bkt_irt {
namespace {

constexpr const char* kPanelHeader = "person_id,item_id,skill_id,attempt,correct";

[[noreturn]] void parse_error(const std::string& what) { throw Error(ErrorCode::ParseError, what); }

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::int64_t parse_int(const std::string& field, std::size_t line_no) {
  std::int64_t value = 0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    parse_error("line " + std::to_string(line_no) + ": expected an integer, got '" + field + "'");
  }
  return value;
}

double require_number(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) parse_error(std::string("missing key '") + key + "'");
  if (!j.at(key).is_number()) parse_error(std::string("key '") + key + "' must be a number");
  return j.at(key).get<double>();
}

}  // namespace

ResponsePanel read_panel_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::vector<ResponseRecord> records;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      if (line != kPanelHeader) parse_error(std::string("panel header must be '") + kPanelHeader + "'");
      header_seen = true;
      continue;
    }
    std::array<std::string, 5> fields;
    std::stringstream row(line);
    std::size_t k = 0;
    for (std::string cell; std::getline(row, cell, ',');) {
      if (k == fields.size()) parse_error("line " + std::to_string(line_no) + ": too many fields");
      fields[k++] = trim(cell);
    }
    if (k != fields.size()) parse_error("line " + std::to_string(line_no) + ": expected 5 fields");
    records.push_back({parse_int(fields[0], line_no), parse_int(fields[1], line_no),
                       parse_int(fields[2], line_no), parse_int(fields[3], line_no),
                       static_cast<int>(parse_int(fields[4], line_no))});
  }
  if (!header_seen) parse_error("panel file has no header");
  return ResponsePanel(std::move(records));
}

ResponsePanel read_panel_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) parse_error("cannot open " + path.string());
  return read_panel_csv(in);
}

void write_panel_csv(std::ostream& out, const ResponsePanel& panel) {
  out << kPanelHeader << '\n';
  for (const auto& r : panel.records()) {
    out << r.person_id << ',' << r.item_id << ',' << r.skill_id << ',' << r.attempt << ',' << r.correct
        << '\n';
  }
}

nlohmann::json to_json(const BktParams& p) {
  return {{"p_init", p.p_init},
          {"p_learn", p.p_learn},
          {"p_forget", p.p_forget},
          {"p_slip", p.p_slip},
          {"p_guess", p.p_guess}};
}

BktParams bkt_params_from_json(const nlohmann::json& j) {
  if (!j.is_object()) parse_error("BktParams must be a JSON object");
  return BktParams{require_number(j, "p_init"), require_number(j, "p_learn"),
                   require_number(j, "p_forget"), require_number(j, "p_slip"),
                   require_number(j, "p_guess")};
}

nlohmann::json to_json(const FitReport& r) {
  return {{"format_version", kFormatVersion},
          {"params", to_json(r.params)},
          {"loglik_trace", r.loglik_trace},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"degenerate_data", r.degenerate_data},
          {"constraint_set",
           {{"classic", r.constraint_set.classic}, {"identified", r.constraint_set.identified}}}};
}

nlohmann::json to_json(const SkillEquilibrium& eq) {
  return {{"format_version", kFormatVersion},
          {"theta", eq.theta},
          {"b", eq.b},
          {"c", eq.c},
          {"d", eq.d},
          {"p_correct", eq.p_correct}};
}

nlohmann::json to_json(const StationaryDist& dist) {
  nlohmann::json j = {{"lambda0", dist.lambda0}, {"lambda1", dist.lambda1}};
  if (dist.periodic) j["periodic"] = true;
  return j;
}

IsingNetwork network_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("n") || !j.at("n").is_number_integer()) {
    parse_error("network file needs an integer 'n'");
  }
  const auto n = j.at("n").get<Eigen::Index>();
  if (n < 1) parse_error("network needs n >= 1");
  IsingNetwork net = make_network(n);
  if (j.contains("couplings")) {
    for (const auto& entry : j.at("couplings")) {
      if (!entry.is_array() || entry.size() != 3) parse_error("coupling entries are [i, j, sigma]");
      const auto a = entry[0].get<Eigen::Index>();
      const auto b = entry[1].get<Eigen::Index>();
      if (a < 0 || b < 0 || a >= n || b >= n || a == b) {
        parse_error("coupling indices must be distinct and within [0, n)");
      }
      net.couplings(a, b) = net.couplings(b, a) = entry[2].get<double>();
    }
  }
  if (j.contains("fields")) {
    const auto& f = j.at("fields");
    if (!f.is_array() || static_cast<Eigen::Index>(f.size()) != n) parse_error("'fields' needs n entries");
    for (Eigen::Index i = 0; i < n; ++i) net.fields(i) = f[static_cast<std::size_t>(i)].get<double>();
  }
  if (j.contains("emissions")) {
    const auto& e = j.at("emissions");
    if (!e.is_array() || static_cast<Eigen::Index>(e.size()) != n) parse_error("'emissions' needs n entries");
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& node = e[static_cast<std::size_t>(i)];
      net.p_guess(i) = require_number(node, "p_guess");
      net.p_slip(i) = require_number(node, "p_slip");
    }
  }
  validate_network(net);
  return net;
}

nlohmann::json to_json(const IsingNetwork& net) {
  const Eigen::Index n = net.size();
  nlohmann::json couplings = nlohmann::json::array();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = i + 1; k < n; ++k) {
      if (net.couplings(i, k) != 0.0) couplings.push_back({i, k, net.couplings(i, k)});
    }
  }
  nlohmann::json emissions = nlohmann::json::array();
  std::vector<double> fields(net.fields.data(), net.fields.data() + n);
  for (Eigen::Index i = 0; i < n; ++i) {
    emissions.push_back({{"p_guess", net.p_guess(i)}, {"p_slip", net.p_slip(i)}});
  }
  return {{"n", n}, {"couplings", couplings}, {"fields", fields}, {"emissions", emissions}};
}

void write_experiment_csv(std::ostream& out, const ExperimentResult& result, const Irf4pl& item) {
  out << "# format_version: " << kFormatVersion << '\n';
  out << "bin_center,iterations,prop_correct,n_obs,irf_value\n";
  for (const auto& curve : result.curves) {
    for (const auto& row : curve.rows) {
      out << format_double(row.bin_center) << ',' << row.iterations << ','
          << format_double(row.prop_correct) << ',' << row.n_obs << ','
          << format_double(irf_4pl(row.bin_center, item)) << '\n';
    }
  }
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) parse_error("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    parse_error(path.string() + ": " + e.what());
  }
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) parse_error("cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  std::array<char, 1 << 16> buffer{};
  while (in) {
    in.read(buffer.data(), buffer.size());
    EVP_DigestUpdate(ctx.get(), buffer.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  EVP_DigestFinal_ex(ctx.get(), digest.data(), &length);
  std::ostringstream hex;
  for (unsigned int i = 0; i < length; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

}  // namespace bkt_irt
