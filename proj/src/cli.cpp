#include "bkt_irt/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "bkt_irt/bkt_engine.hpp"
#include "bkt_irt/equilibrium_bridge.hpp"
#include "bkt_irt/experiment_lab.hpp"
#include "bkt_irt/format.hpp"
#include "bkt_irt/io.hpp"
#include "bkt_irt/ising_field.hpp"
#include "bkt_irt/markov_engine.hpp"

#ifndef BKT_IRT_VERSION
#define BKT_IRT_VERSION "0.0.0"
#endif

namespace bkt_irt::cli {
namespace {

constexpr std::uint64_t kDefaultSeed = 20190101;
constexpr std::uint64_t kSimulateTag = 0x73696d;  // "sim"
constexpr std::uint64_t kIsingTag = 0x697369;     // "isi"

/// I/O failures map to exit code 2 alongside argument errors.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::uint64_t resolve_seed(const std::string& text) {
  if (text == "auto") {
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) | rd();
  }
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw CLI::ValidationError("--seed", "expected an unsigned integer or 'auto', got '" + text + "'");
  }
  return value;
}

int resolve_threads(int requested) {
  if (const char* env = std::getenv("BKT_IRT_THREADS"); env != nullptr && *env != '\0') {
    int value = 0;
    const std::string_view text(env);
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec == std::errc() && ptr == text.data() + text.size() && value > 0) return value;
    throw CLI::ValidationError("BKT_IRT_THREADS", "must be a positive integer");
  }
  if (requested > 0) return requested;
  return std::max(1U, std::thread::hardware_concurrency());
}

/// Collects outputs of one run; writes either to the given file or to the
/// console stream, and produces the manifest for file outputs.
class RunContext {
 public:
  RunContext(const std::vector<std::string>& args, std::ostream& console)
      : console_(console), start_(std::chrono::steady_clock::now()) {
    manifest_.command_line = args;
    manifest_.version = BKT_IRT_VERSION;
  }

  void add_seed(std::uint64_t seed) { manifest_.seeds.push_back(seed); }

  /// Writes `body` to `path`, or to the console when `path` is empty.
  void emit(const std::string& path, const std::string& body) {
    if (path.empty()) {
      console_ << body;
      return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw IoError("cannot write " + path);
    file << body;
    file.close();
    if (!file) throw IoError("failed writing " + path);
    written_.push_back(path);
    if (primary_.empty()) primary_ = path;
  }

  void finish() {
    if (primary_.empty()) return;
    manifest_.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    for (const auto& path : written_) manifest_.outputs.emplace_back(path, sha256_file(path));
    write_manifest(primary_ + ".manifest.json", manifest_);
  }

 private:
  std::ostream& console_;
  std::chrono::steady_clock::time_point start_;
  RunManifest manifest_;
  std::vector<std::string> written_;
  std::string primary_;
};

struct ParamFlags {
  std::string file;
  BktParams values{0.2, 0.3, 0.0, 0.1, 0.2};

  void attach(CLI::App* app) {
    app->add_option("--params", file, "BktParams JSON file (overrides the individual flags)");
    app->add_option("--p-init", values.p_init, "initial mastery probability");
    app->add_option("--p-learn", values.p_learn, "learning transition probability");
    app->add_option("--p-forget", values.p_forget, "forgetting transition probability");
    app->add_option("--p-slip", values.p_slip, "slip probability");
    app->add_option("--p-guess", values.p_guess, "guess probability");
  }

  BktParams resolve() const {
    return file.empty() ? values : bkt_params_from_json(read_json_file(file));
  }
};

std::string dump(const nlohmann::json& j) { return j.dump() + "\n"; }

std::filesystem::path sibling(const std::string& path, const std::string& suffix) {
  std::filesystem::path p(path);
  return p.parent_path() / (p.stem().string() + suffix);
}

}  // namespace

void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
  nlohmann::json outputs = nlohmann::json::array();
  for (const auto& [file, digest] : m.outputs) outputs.push_back({{"path", file}, {"sha256", digest}});
  const nlohmann::json j = {{"format_version", kFormatVersion},
                            {"command_line", m.command_line},
                            {"seeds", m.seeds},
                            {"version", m.version},
                            {"wall_seconds", m.wall_seconds},
                            {"outputs", outputs}};
  std::ofstream file(path);
  if (!file) throw IoError("cannot write " + path.string());
  file << j.dump(2) << '\n';
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Knowledge tracing, item response and Ising field toolkit", "bkt_irt"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_version_flag("--version", BKT_IRT_VERSION);

  std::string out_path;
  std::string seed_text = std::to_string(kDefaultSeed);
  int threads = 0;

  // stationary
  double st_learn = 0.3, st_forget = 0.1;
  auto* stationary = app.add_subcommand("stationary", "Stationary law of the latent chain (JSON)");
  stationary->add_option("--p-learn", st_learn, "learning transition probability");
  stationary->add_option("--p-forget", st_forget, "forgetting transition probability");
  stationary->add_option("--out", out_path, "output file (default: stdout)");

  // simulate
  ParamFlags sim_params;
  int sim_people = 100;
  std::int64_t sim_attempts = 20;
  std::int64_t sim_skill = 1;
  auto* simulate = app.add_subcommand("simulate", "Sample response sequences as a panel CSV");
  sim_params.attach(simulate);
  simulate->add_option("--people", sim_people, "number of learners")->check(CLI::PositiveNumber);
  simulate->add_option("--attempts", sim_attempts, "attempts per learner")->check(CLI::PositiveNumber);
  simulate->add_option("--skill", sim_skill, "skill id written to the panel");
  simulate->add_option("--seed", seed_text, "seed, or 'auto' for entropy");
  simulate->add_option("--out", out_path, "output CSV (default: stdout)");

  // filter
  ParamFlags filt_params;
  std::string filt_panel;
  std::int64_t filt_skill = 1;
  auto* filter = app.add_subcommand("filter", "Per-attempt mastery posteriors for a panel");
  filt_params.attach(filter);
  filter->add_option("--panel", filt_panel, "panel CSV")->required();
  filter->add_option("--skill", filt_skill, "skill id to filter");
  filter->add_option("--out", out_path, "output CSV (default: stdout)");

  // fit-bkt
  ParamFlags fit_init;
  fit_init.values = BktParams{0.5, 0.2, 0.0, 0.1, 0.2};
  std::string fit_panel;
  std::int64_t fit_skill = 1;
  FitOptions fit_opts;
  auto* fit = app.add_subcommand("fit-bkt", "Baum-Welch fit of one skill's parameters (JSON)");
  fit_init.attach(fit);
  fit->add_option("--panel", fit_panel, "panel CSV")->required();
  fit->add_option("--skill", fit_skill, "skill id to fit");
  fit->add_flag("--classic", fit_opts.constraints.classic, "pin p_forget to 0");
  fit->add_flag("--identified", fit_opts.constraints.identified, "require guess, slip < 0.5");
  fit->add_option("--tol", fit_opts.tol, "relative log-likelihood tolerance");
  fit->add_option("--max-iters", fit_opts.max_iters, "maximum EM iterations");
  fit->add_option("--out", out_path, "output JSON (default: stdout)");

  // bridge
  ParamFlags bridge_params;
  auto* bridge = app.add_subcommand("bridge", "Equilibrium IRT parameters of a BKT skill (JSON)");
  bridge_params.attach(bridge);
  bridge->add_option("--out", out_path, "output JSON (default: stdout)");

  // experiment
  SimConfig exp_config = SimConfig::full_scale();
  bool exp_desk = false;
  std::string exp_iters = "2,5,50";
  std::string exp_out = "experiment.csv";
  auto* experiment = app.add_subcommand("experiment", "Learner-item convergence simulation (CSV)");
  experiment->add_flag("--desk", exp_desk, "small preset: 200 people, 50 items, 200 replications");
  experiment->add_option("--people", exp_config.n_people, "number of learners");
  experiment->add_option("--items", exp_config.n_items, "number of items");
  experiment->add_option("--reps", exp_config.replications, "replications");
  experiment->add_option("--iters", exp_iters, "comma-separated iteration counts");
  experiment->add_option("--slip", exp_config.p_slip, "slip probability");
  experiment->add_option("--guess", exp_config.p_guess, "guess probability");
  experiment->add_option("--seed", seed_text, "seed, or 'auto' for entropy");
  experiment->add_option("--bin-width", exp_config.bin_width, "advantage bin width");
  experiment->add_option("--threads", threads, "worker threads (0: all cores; BKT_IRT_THREADS overrides)");
  experiment->add_option("--out", exp_out, "output CSV; summary JSON is written alongside");

  // irf
  Irf4pl irf_item;
  double irf_from = -6.0, irf_to = 6.0, irf_step = 0.1;
  auto* irf = app.add_subcommand("irf", "Sample a 4PL item response curve (CSV)");
  irf->add_option("--a", irf_item.a, "discrimination");
  irf->add_option("--b", irf_item.b, "difficulty");
  irf->add_option("--c", irf_item.c, "lower asymptote");
  irf->add_option("--d", irf_item.d, "upper asymptote");
  irf->add_option("--from", irf_from, "first theta");
  irf->add_option("--to", irf_to, "last theta");
  irf->add_option("--step", irf_step, "theta spacing")->check(CLI::PositiveNumber);
  irf->add_option("--out", out_path, "output CSV (default: stdout)");

  // ising
  std::string ising_net;
  std::int64_t ising_sweeps = 100000;
  std::int64_t ising_burn = 0;
  std::int64_t ising_thin = 1;
  std::string ising_dynamics = "glauber";
  std::string ising_scan = "fixed";
  bool ising_exact = false;
  auto* ising = app.add_subcommand("ising", "Hidden Markov field sampler: latent state frequencies (CSV)");
  ising->add_option("--net", ising_net, "network JSON file")->required();
  ising->add_option("--sweeps", ising_sweeps, "number of sweeps")->check(CLI::PositiveNumber);
  ising->add_option("--burn-in", ising_burn, "sweeps discarded before counting");
  ising->add_option("--thin", ising_thin, "count every k-th sweep")->check(CLI::PositiveNumber);
  ising->add_option("--dynamics", ising_dynamics, "glauber or metropolis")
      ->check(CLI::IsMember({"glauber", "metropolis"}));
  ising->add_option("--scan", ising_scan, "fixed or random site order")
      ->check(CLI::IsMember({"fixed", "random"}));
  ising->add_option("--seed", seed_text, "seed, or 'auto' for entropy");
  ising->add_flag("--exact", ising_exact, "append the exact Boltzmann probability column");
  ising->add_option("--out", out_path, "output CSV (default: stdout)");

  std::vector<const char*> argv{"bkt_irt"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << BKT_IRT_VERSION << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "ArgumentError: " << e.what() << '\n';
    return 2;
  }

  RunContext run(args, out);
  try {
    if (*stationary) {
      BktParams p{0.0, st_learn, st_forget, 0.0, 0.0};
      validate_bkt(p);
      run.emit(out_path, dump(to_json(stationary_closed_form(p))));
    } else if (*simulate) {
      const BktParams p = validate_bkt(sim_params.resolve());
      const std::uint64_t seed = resolve_seed(seed_text);
      run.add_seed(seed);
      std::vector<ResponseRecord> records;
      for (int person = 1; person <= sim_people; ++person) {
        RngStream stream(seed, {kSimulateTag, static_cast<std::uint64_t>(person)});
        const Trajectory traj = sample_trajectory(p, sim_attempts, stream);
        for (std::int64_t t = 0; t < sim_attempts; ++t) {
          records.push_back({person, t + 1, sim_skill, t + 1, traj.emitted[t]});
        }
      }
      std::ostringstream body;
      body << "# format_version: " << kFormatVersion << '\n';
      write_panel_csv(body, ResponsePanel(std::move(records)));
      run.emit(out_path, body.str());
    } else if (*filter) {
      const BktParams p = validate_bkt(filt_params.resolve());
      const ResponsePanel panel = read_panel_csv(std::filesystem::path(filt_panel));
      std::ostringstream body;
      body << "# format_version: " << kFormatVersion << '\n';
      body << "person_id,attempt,correct,predictive,posterior,cum_loglik\n";
      for (const auto& [person, seq] : panel.sequences(filt_skill)) {
        const FilterResult r = forward_filter(p, seq);
        double cum = 0.0;
        for (std::size_t t = 0; t < seq.size(); ++t) {
          cum += std::log(seq[t] == 1 ? r.predictive[t] : 1.0 - r.predictive[t]);
          body << person << ',' << (t + 1) << ',' << seq[t] << ',' << format_double(r.predictive[t])
               << ',' << format_double(r.posterior[t]) << ',' << format_double(cum) << '\n';
        }
      }
      run.emit(out_path, body.str());
    } else if (*fit) {
      const ResponsePanel panel = read_panel_csv(std::filesystem::path(fit_panel));
      const FitReport report = fit_baum_welch(panel, fit_skill, fit_init.resolve(), fit_opts);
      run.emit(out_path, to_json(report).dump(2) + "\n");
    } else if (*bridge) {
      const BktParams p = validate_bkt(bridge_params.resolve());
      run.emit(out_path, dump(to_json(bkt_to_irt(p))));
    } else if (*experiment) {
      SimConfig config = exp_config;
      if (exp_desk) {
        const SimConfig desk = SimConfig::desk();
        if (experiment->count("--people") == 0) config.n_people = desk.n_people;
        if (experiment->count("--items") == 0) config.n_items = desk.n_items;
        if (experiment->count("--reps") == 0) config.replications = desk.replications;
      }
      config.iteration_counts.clear();
      std::stringstream list(exp_iters);
      for (std::string item; std::getline(list, item, ',');) {
        int value = 0;
        const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
        if (ec != std::errc() || ptr != item.data() + item.size()) {
          throw CLI::ValidationError("--iters", "expected comma-separated integers");
        }
        config.iteration_counts.push_back(value);
      }
      config.seed = resolve_seed(seed_text);
      run.add_seed(config.seed);
      const ExperimentResult result = run_equilibrium_experiment(config, resolve_threads(threads));
      const Irf4pl item = experiment_irf(config);

      std::ostringstream csv;
      write_experiment_csv(csv, result, item);
      nlohmann::json per_iteration = nlohmann::json::array();
      for (const auto& curve : result.curves) {
        const CurveDeviation dev = compare_to_irf(curve, item, 0);
        per_iteration.push_back({{"iterations", curve.iterations},
                                 {"max_abs_dev", dev.max_abs_dev},
                                 {"weighted_rmse", dev.weighted_rmse},
                                 {"bins", dev.bins_used}});
      }
      const nlohmann::json summary = {
          {"format_version", kFormatVersion},
          {"config",
           {{"people", config.n_people},
            {"items", config.n_items},
            {"reps", config.replications},
            {"iters", config.iteration_counts},
            {"slip", config.p_slip},
            {"guess", config.p_guess},
            {"seed", config.seed},
            {"bin_width", config.bin_width}}},
          {"irf", {{"a", item.a}, {"c", item.c}, {"d", item.d}}},
          {"deviation", per_iteration}};
      run.emit(exp_out, csv.str());
      run.emit(sibling(exp_out, ".summary.json").string(), summary.dump(2) + "\n");
    } else if (*irf) {
      validate_irf(irf_item);
      if (!(irf_to >= irf_from)) throw CLI::ValidationError("--to", "must be >= --from");
      std::ostringstream body;
      body << "# format_version: " << kFormatVersion << '\n' << "theta,p\n";
      const auto n = static_cast<Eigen::Index>(std::floor((irf_to - irf_from) / irf_step + 1e-9)) + 1;
      const Eigen::ArrayXd theta = Eigen::ArrayXd::LinSpaced(n, irf_from, irf_from + (n - 1) * irf_step);
      const Eigen::ArrayXd p = irf_4pl(theta, irf_item);
      for (Eigen::Index k = 0; k < n; ++k) body << format_double(theta(k)) << ',' << format_double(p(k)) << '\n';
      run.emit(out_path, body.str());
    } else if (*ising) {
      const IsingNetwork net = network_from_json(read_json_file(ising_net));
      const std::uint64_t seed = resolve_seed(seed_text);
      run.add_seed(seed);
      RngStream stream(seed, {kIsingTag});
      const Dynamics dyn = ising_dynamics == "glauber" ? Dynamics::Glauber : Dynamics::Metropolis;
      const ScanOrder order = ising_scan == "fixed" ? ScanOrder::Fixed : ScanOrder::Random;
      const FieldFrequencies freq =
          field_frequencies(net, ising_sweeps, stream, dyn, order, ising_burn, ising_thin);
      const Eigen::VectorXd exact = ising_exact ? boltzmann_exact(net) : Eigen::VectorXd();
      std::ostringstream body;
      body << "# format_version: " << kFormatVersion << '\n' << "state,z,count,frequency";
      if (ising_exact) body << ",exact";
      body << '\n';
      const Eigen::Index n = net.size();
      for (Eigen::Index s = 0; s < freq.latent_counts.size(); ++s) {
        std::string bits;
        for (Eigen::Index j = 0; j < n; ++j) bits += ((s >> j) & 1) ? '1' : '0';
        const double f = freq.samples > 0 ? static_cast<double>(freq.latent_counts(s)) / freq.samples : 0.0;
        body << s << ',' << bits << ',' << freq.latent_counts(s) << ',' << format_double(f);
        if (ising_exact) body << ',' << format_double(exact(s));
        body << '\n';
      }
      run.emit(out_path, body.str());
    }
    run.finish();
  } catch (const Error& e) {
    err << e.name() << ": " << e.what() << '\n';
    return e.code() == ErrorCode::ParseError ? 2 : 1;
  } catch (const CLI::ValidationError& e) {
    err << "ArgumentError: " << e.what() << '\n';
    return 2;
  } catch (const IoError& e) {
    err << "IoError: " << e.what() << '\n';
    return 2;
  } catch (const nlohmann::json::exception& e) {
    err << "ParseError: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace bkt_irt::cli
