#include "bkt_irt/ising_field.hpp"

#include <cmath>
#include <sstream>

#include "bkt_irt/error.hpp"
#include "bkt_irt/irt_models.hpp"

namespace bkt_irt {
namespace {

constexpr Eigen::Index kMaxExactNodes = 20;

double local_field(const IsingNetwork& net, const Eigen::Ref<const Spins>& z, Eigen::Index node) {
  return net.fields(node) + net.couplings.col(node).dot(z.cast<double>());
}

}  // namespace

IsingNetwork make_network(Eigen::Index n) {
  IsingNetwork net;
  net.couplings = Eigen::MatrixXd::Zero(n, n);
  net.fields = Eigen::VectorXd::Zero(n);
  net.p_guess = Eigen::VectorXd::Zero(n);
  net.p_slip = Eigen::VectorXd::Zero(n);
  return net;
}

void validate_network(const IsingNetwork& net) {
  const Eigen::Index n = net.fields.size();
  std::ostringstream msg;
  if (n < 1) {
    msg << "network needs at least one node";
  } else if (net.couplings.rows() != n || net.couplings.cols() != n || net.p_guess.size() != n ||
             net.p_slip.size() != n) {
    msg << "couplings, fields and emissions must all have " << n << " nodes";
  } else if (!net.couplings.allFinite() || !net.fields.allFinite()) {
    msg << "couplings and fields must be finite";
  } else if ((net.couplings - net.couplings.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    msg << "couplings must be symmetric";
  } else if (net.couplings.diagonal().cwiseAbs().maxCoeff() != 0.0) {
    msg << "coupling diagonal must be zero";
  } else if ((net.p_guess.array() < 0.0).any() || (net.p_guess.array() > 1.0).any() ||
             (net.p_slip.array() < 0.0).any() || (net.p_slip.array() > 1.0).any() ||
             !net.p_guess.allFinite() || !net.p_slip.allFinite()) {
    msg << "emission probabilities must lie in [0, 1]";
  } else {
    return;
  }
  throw Error(ErrorCode::InvalidNetwork, msg.str());
}

double energy(const IsingNetwork& net, const Eigen::Ref<const Spins>& z) {
  const Eigen::VectorXd zd = z.cast<double>();
  // Zero diagonal, so the half quadratic form is the sum over i < j.
  return -(0.5 * zd.dot(net.couplings * zd) + net.fields.dot(zd));
}

Spins state_from_index(std::uint64_t index, Eigen::Index n) {
  Spins z(n);
  for (Eigen::Index i = 0; i < n; ++i) z(i) = static_cast<int>((index >> i) & 1U);
  return z;
}

std::uint64_t state_index(const Eigen::Ref<const Spins>& z) {
  std::uint64_t index = 0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (z(i) != 0) index |= std::uint64_t{1} << i;
  }
  return index;
}

Eigen::VectorXd boltzmann_exact(const IsingNetwork& net) {
  validate_network(net);
  const Eigen::Index n = net.size();
  if (n > kMaxExactNodes) {
    std::ostringstream msg;
    msg << "exact enumeration supports at most " << kMaxExactNodes << " nodes, got " << n;
    throw Error(ErrorCode::TooLarge, msg.str());
  }
  const auto states = static_cast<Eigen::Index>(std::uint64_t{1} << n);
  Eigen::VectorXd log_mass(states);
  for (Eigen::Index s = 0; s < states; ++s) {
    log_mass(s) = -energy(net, state_from_index(static_cast<std::uint64_t>(s), n));
  }
  const double peak = log_mass.maxCoeff();
  Eigen::VectorXd mass = (log_mass.array() - peak).exp().matrix();
  return mass / mass.sum();
}

double conditional_mastery(const IsingNetwork& net, const Eigen::Ref<const Spins>& z, Eigen::Index node) {
  return logistic(local_field(net, z, node));
}

void glauber_step(const IsingNetwork& net, Spins& z, Eigen::Index node, RngStream& stream) {
  z(node) = stream.bernoulli(conditional_mastery(net, z, node)) ? 1 : 0;
}

bool metropolis_step(const IsingNetwork& net, Spins& z, Eigen::Index node, RngStream& stream) {
  // Turning node on changes the energy by -local_field; turning it off by +local_field.
  const double field = local_field(net, z, node);
  const double delta = z(node) == 0 ? -field : field;
  if (delta > 0.0 && !stream.bernoulli(std::exp(-delta))) return false;
  z(node) = 1 - z(node);
  return true;
}

void sweep(const IsingNetwork& net, Spins& z, Dynamics dynamics, ScanOrder order, RngStream& stream) {
  const Eigen::Index n = net.size();
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index node =
        order == ScanOrder::Fixed ? k : static_cast<Eigen::Index>(stream.below(static_cast<std::uint64_t>(n)));
    if (dynamics == Dynamics::Glauber) {
      glauber_step(net, z, node, stream);
    } else {
      metropolis_step(net, z, node, stream);
    }
  }
}

Spins emit_responses(const IsingNetwork& net, const Eigen::Ref<const Spins>& z, RngStream& stream) {
  Spins x(z.size());
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    const double p_correct = z(j) != 0 ? 1.0 - net.p_slip(j) : net.p_guess(j);
    x(j) = stream.bernoulli(p_correct) ? 1 : 0;
  }
  return x;
}

namespace {

Spins starting_state(const IsingNetwork& net, Spins initial) {
  if (initial.size() == 0) return Spins::Zero(net.size());
  if (initial.size() != net.size()) {
    throw Error(ErrorCode::DimensionMismatch, "initial state length differs from network size");
  }
  if ((initial.array() != 0 && initial.array() != 1).any()) {
    throw Error(ErrorCode::OutOfRange, "spins must be 0 or 1");
  }
  return initial;
}

}  // namespace

std::vector<FieldState> simulate_field(const IsingNetwork& net, std::int64_t sweeps, RngStream& stream,
                                       Dynamics dynamics, ScanOrder order, Spins initial) {
  validate_network(net);
  if (sweeps < 1) throw Error(ErrorCode::OutOfRange, "sweeps must be >= 1");
  Spins z = starting_state(net, std::move(initial));
  std::vector<FieldState> path;
  path.reserve(static_cast<std::size_t>(sweeps));
  for (std::int64_t s = 0; s < sweeps; ++s) {
    sweep(net, z, dynamics, order, stream);
    path.push_back({z, emit_responses(net, z, stream)});
  }
  return path;
}

FieldFrequencies field_frequencies(const IsingNetwork& net, std::int64_t sweeps, RngStream& stream,
                                   Dynamics dynamics, ScanOrder order, std::int64_t burn_in,
                                   std::int64_t thin) {
  validate_network(net);
  if (sweeps < 1) throw Error(ErrorCode::OutOfRange, "sweeps must be >= 1");
  if (burn_in < 0 || thin < 1) throw Error(ErrorCode::OutOfRange, "burn_in >= 0 and thin >= 1 required");
  const Eigen::Index n = net.size();
  if (n > kMaxExactNodes) throw Error(ErrorCode::TooLarge, "state histogram supports at most 20 nodes");

  FieldFrequencies freq;
  freq.latent_counts = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>::Zero(std::int64_t{1} << n);
  freq.correct_counts = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>::Zero(n);
  Spins z = Spins::Zero(n);
  for (std::int64_t s = 0; s < sweeps; ++s) {
    sweep(net, z, dynamics, order, stream);
    const Spins x = emit_responses(net, z, stream);
    if (s < burn_in || (s - burn_in) % thin != 0) continue;
    ++freq.latent_counts(static_cast<Eigen::Index>(state_index(z)));
    freq.correct_counts += x.cast<std::int64_t>();
    ++freq.samples;
  }
  return freq;
}

Eigen::VectorXd exact_marginals(const IsingNetwork& net) {
  const Eigen::VectorXd law = boltzmann_exact(net);
  const Eigen::Index n = net.size();
  Eigen::VectorXd marginals = Eigen::VectorXd::Zero(n);
  for (Eigen::Index s = 0; s < law.size(); ++s) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if ((static_cast<std::uint64_t>(s) >> j) & 1U) marginals(j) += law(s);
    }
  }
  return marginals;
}

Eigen::MatrixXd exact_covariance(const IsingNetwork& net) {
  const Eigen::VectorXd law = boltzmann_exact(net);
  const Eigen::Index n = net.size();
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
  for (Eigen::Index s = 0; s < law.size(); ++s) {
    const Eigen::VectorXd z = state_from_index(static_cast<std::uint64_t>(s), n).cast<double>();
    mean += law(s) * z;
    second += law(s) * z * z.transpose();
  }
  return second - mean * mean.transpose();
}

}  // namespace bkt_irt
