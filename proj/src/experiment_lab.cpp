#include "bkt_irt/experiment_lab.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include "bkt_irt/markov_engine.hpp"

namespace bkt_irt {
namespace {

// Stream tags keep population draws and per-triple chains apart.
constexpr std::uint64_t kPopulationTag = 0x706f70;  // "pop"
constexpr std::uint64_t kChainTag = 0x636861;       // "cha"

struct Histogram {
  // counts[curve * n_bins + bin]
  std::vector<std::int64_t> correct;
  std::vector<std::int64_t> total;

  Histogram(std::size_t curves, std::size_t bins) : correct(curves * bins, 0), total(curves * bins, 0) {}

  Histogram& operator+=(const Histogram& other) {
    for (std::size_t k = 0; k < correct.size(); ++k) {
      correct[k] += other.correct[k];
      total[k] += other.total[k];
    }
    return *this;
  }
};

int half_bins(const SimConfig& config) {
  return static_cast<int>(std::floor(config.advantage_limit / config.bin_width + 1e-9));
}

}  // namespace

SimConfig SimConfig::full_scale() { return SimConfig{}; }

SimConfig SimConfig::desk() {
  SimConfig config;
  config.n_people = 200;
  config.n_items = 50;
  config.replications = 200;
  return config;
}

void validate_config(const SimConfig& config) {
  std::ostringstream msg;
  if (config.n_people < 1 || config.n_items < 1 || config.replications < 1) {
    msg << "people, items and replications must all be >= 1";
  } else if (config.iteration_counts.empty()) {
    msg << "iteration_counts must be non-empty";
  } else if (std::any_of(config.iteration_counts.begin(), config.iteration_counts.end(),
                         [](int t) { return t < 1; })) {
    msg << "every iteration count must be >= 1";
  } else if (!(config.bin_width > 0.0) || !std::isfinite(config.bin_width)) {
    msg << "bin_width must be positive";
  } else if (!(config.advantage_limit >= 0.0) || !std::isfinite(config.advantage_limit)) {
    msg << "advantage_limit must be nonnegative";
  } else if (!(config.p_slip >= 0.0 && config.p_slip <= 1.0 && config.p_guess >= 0.0 &&
               config.p_guess <= 1.0)) {
    msg << "p_slip and p_guess must lie in [0, 1]";
  } else {
    return;
  }
  throw Error(ErrorCode::InvalidConfig, msg.str());
}

Population draw_population(const SimConfig& config, RngStream& stream) {
  validate_config(config);
  Population pop;
  pop.p_learn.resize(config.n_people);
  pop.p_forget.resize(config.n_items);
  for (int p = 0; p < config.n_people; ++p) pop.p_learn(p) = stream.uniform_open(kUniformEpsilon);
  for (int i = 0; i < config.n_items; ++i) pop.p_forget(i) = stream.uniform_open(kUniformEpsilon);
  // std::log rather than the vectorized array log, so theta matches the bridge bit for bit.
  const auto log = [](double v) { return std::log(v); };
  pop.theta = pop.p_learn.unaryExpr(log);
  pop.b = pop.p_forget.unaryExpr(log);
  return pop;
}

Population draw_population(const SimConfig& config) {
  RngStream stream(config.seed, {kPopulationTag});
  return draw_population(config, stream);
}

int bin_index(double advantage, double bin_width, double advantage_limit) {
  const int k_max = static_cast<int>(std::floor(advantage_limit / bin_width + 1e-9));
  const double k = std::round(advantage / bin_width);
  if (k <= -k_max) return -k_max;
  if (k >= k_max) return k_max;
  return static_cast<int>(k);
}

ExperimentResult run_equilibrium_experiment(const SimConfig& config, int threads) {
  validate_config(config);
  ExperimentResult result;
  result.population = draw_population(config);
  const Population& pop = result.population;

  const int k_max = half_bins(config);
  const auto n_bins = static_cast<std::size_t>(2 * k_max + 1);
  const std::size_t n_curves = config.iteration_counts.size();
  const int max_steps = *std::max_element(config.iteration_counts.begin(), config.iteration_counts.end());

  // Which curves (if any) read the chain after each step.
  std::vector<std::vector<std::size_t>> readers(static_cast<std::size_t>(max_steps) + 1);
  for (std::size_t c = 0; c < n_curves; ++c) readers[config.iteration_counts[c]].push_back(c);

  const auto simulate_people = [&](int first, int last, Histogram& hist) {
    for (int p = first; p < last; ++p) {
      const double p_learn = pop.p_learn(p);
      for (int i = 0; i < config.n_items; ++i) {
        const double p_forget = pop.p_forget(i);
        const auto bin = static_cast<std::size_t>(
            bin_index(pop.theta(p) - pop.b(i), config.bin_width, config.advantage_limit) + k_max);
        for (int r = 0; r < config.replications; ++r) {
          RngStream stream(config.seed, {kChainTag, static_cast<std::uint64_t>(p),
                                         static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(r)});
          bool mastered = false;
          for (int step = 1; step <= max_steps; ++step) {
            mastered = mastered ? !stream.bernoulli(p_forget) : stream.bernoulli(p_learn);
            for (std::size_t c : readers[step]) {
              const bool correct = stream.bernoulli(mastered ? 1.0 - config.p_slip : config.p_guess);
              hist.correct[c * n_bins + bin] += correct ? 1 : 0;
              hist.total[c * n_bins + bin] += 1;
            }
          }
        }
      }
    }
  };

  const int workers = std::clamp(threads, 1, config.n_people);
  std::vector<Histogram> partial(static_cast<std::size_t>(workers), Histogram(n_curves, n_bins));
  if (workers == 1) {
    simulate_people(0, config.n_people, partial[0]);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      const int first = static_cast<int>(static_cast<std::int64_t>(config.n_people) * w / workers);
      const int last = static_cast<int>(static_cast<std::int64_t>(config.n_people) * (w + 1) / workers);
      pool.emplace_back([&, first, last, w] { simulate_people(first, last, partial[w]); });
    }
  }
  Histogram merged(n_curves, n_bins);
  for (const auto& h : partial) merged += h;

  for (std::size_t c = 0; c < n_curves; ++c) {
    BinnedCurve curve;
    curve.iterations = config.iteration_counts[c];
    for (std::size_t k = 0; k < n_bins; ++k) {
      const std::int64_t n = merged.total[c * n_bins + k];
      if (n == 0) continue;
      BinRow row;
      row.bin_center = static_cast<double>(static_cast<int>(k) - k_max) * config.bin_width;
      row.iterations = curve.iterations;
      row.n_obs = n;
      row.prop_correct = static_cast<double>(merged.correct[c * n_bins + k]) / static_cast<double>(n);
      curve.rows.push_back(row);
    }
    result.curves.push_back(std::move(curve));
  }
  return result;
}

Irf4pl experiment_irf(const SimConfig& config) {
  return Irf4pl{1.0, 0.0, config.p_guess, 1.0 - config.p_slip};
}

double pair_response_probability(double p_learn, double p_forget, double p_slip, double p_guess,
                                 std::int64_t steps) {
  const BktParams params{0.0, p_learn, p_forget, p_slip, p_guess};
  const double mastered = marginal_at(params, steps);
  return p_guess + (1.0 - p_slip - p_guess) * mastered;
}

CurveDeviation compare_to_irf(const BinnedCurve& curve, const Irf4pl& item, std::int64_t min_count) {
  CurveDeviation out;
  double weighted_sq = 0.0;
  double weight = 0.0;
  for (const auto& row : curve.rows) {
    if (row.n_obs < min_count) continue;
    const double dev = row.prop_correct - irf_4pl(row.bin_center, item);
    out.max_abs_dev = std::max(out.max_abs_dev, std::abs(dev));
    weighted_sq += static_cast<double>(row.n_obs) * dev * dev;
    weight += static_cast<double>(row.n_obs);
    ++out.bins_used;
  }
  if (out.bins_used == 0) {
    std::ostringstream msg;
    msg << "no bin has n_obs >= " << min_count;
    throw Error(ErrorCode::InsufficientData, msg.str());
  }
  out.weighted_rmse = weight > 0.0 ? std::sqrt(weighted_sq / weight) : 0.0;
  return out;
}

std::vector<BinnedPoint> to_binned_points(const BinnedCurve& curve) {
  std::vector<BinnedPoint> points;
  points.reserve(curve.rows.size());
  for (const auto& row : curve.rows) {
    points.push_back({row.bin_center, row.prop_correct, static_cast<double>(row.n_obs)});
  }
  return points;
}

}  // namespace bkt_irt
