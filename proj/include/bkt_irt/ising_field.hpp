#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "bkt_irt/rng.hpp"

namespace bkt_irt {

/// Binary spin vector, entries in {0, 1}. A {-1, +1} spin s maps to z = (s + 1) / 2;
/// couplings and fields change accordingly, so keep to one convention per network.
using Spins = Eigen::VectorXi;

/// Hidden Markov field over a skill network: Ising latent mastery with
/// couplings sigma_ij and external fields h_i, plus a guess/slip emission per node.
struct IsingNetwork {
  Eigen::MatrixXd couplings;  // symmetric, zero diagonal
  Eigen::VectorXd fields;
  Eigen::VectorXd p_guess;
  Eigen::VectorXd p_slip;

  Eigen::Index size() const { return fields.size(); }
};

/// Network with `n` nodes, zero couplings and fields, noiseless emissions.
IsingNetwork make_network(Eigen::Index n);

/// Throws InvalidNetwork on shape mismatch, asymmetric couplings (1e-12),
/// nonzero diagonal or emission probabilities outside [0, 1].
void validate_network(const IsingNetwork& net);

/// E(z) = -(sum_{i<j} sigma_ij z_i z_j + sum_i h_i z_i). Boltzmann mass is exp(-E).
double energy(const IsingNetwork& net, const Eigen::Ref<const Spins>& z);

/// Exact Boltzmann law over all 2^n states; state index bit i holds z_i.
/// Throws TooLarge for n > 20.
Eigen::VectorXd boltzmann_exact(const IsingNetwork& net);

Spins state_from_index(std::uint64_t index, Eigen::Index n);
std::uint64_t state_index(const Eigen::Ref<const Spins>& z);

/// P(z_j = 1 | rest) = logistic(h_j + sum_i sigma_ij z_i).
double conditional_mastery(const IsingNetwork& net, const Eigen::Ref<const Spins>& z, Eigen::Index node);

/// Heat-bath update: resample z[node] from its exact conditional.
void glauber_step(const IsingNetwork& net, Spins& z, Eigen::Index node, RngStream& stream);

/// Propose flipping z[node]; accept with probability min(1, exp(-dE)). Moves
/// with dE <= 0 are accepted without consuming a draw. Returns whether the
/// flip was accepted.
bool metropolis_step(const IsingNetwork& net, Spins& z, Eigen::Index node, RngStream& stream);

enum class Dynamics { Glauber, Metropolis };
enum class ScanOrder { Fixed, Random };

struct FieldState {
  Spins z;  // latent mastery
  Spins x;  // emitted responses
};

/// One sweep = n single-site updates, in index order for ScanOrder::Fixed or at
/// uniformly chosen sites for ScanOrder::Random.
void sweep(const IsingNetwork& net, Spins& z, Dynamics dynamics, ScanOrder order, RngStream& stream);

/// x_j ~ Bernoulli(1 - p_slip_j) if z_j = 1 else Bernoulli(p_guess_j).
Spins emit_responses(const IsingNetwork& net, const Eigen::Ref<const Spins>& z, RngStream& stream);

/// Runs `sweeps` sweeps from `initial` (all zeros when empty), emitting
/// responses after each sweep. Returns one FieldState per sweep.
std::vector<FieldState> simulate_field(const IsingNetwork& net, std::int64_t sweeps, RngStream& stream,
                                       Dynamics dynamics, ScanOrder order = ScanOrder::Fixed,
                                       Spins initial = {});

struct FieldFrequencies {
  /// Visit counts of each latent state (index as in boltzmann_exact).
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1> latent_counts;
  /// Per-node counts of emitted correct responses.
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1> correct_counts;
  std::int64_t samples = 0;
};

/// Same chain as simulate_field without storing the path: after `burn_in`
/// sweeps, every `thin`-th sweep contributes its latent state and emissions.
FieldFrequencies field_frequencies(const IsingNetwork& net, std::int64_t sweeps, RngStream& stream,
                                   Dynamics dynamics, ScanOrder order = ScanOrder::Fixed,
                                   std::int64_t burn_in = 0, std::int64_t thin = 1);

/// Exact marginals P(z_j = 1) from the Boltzmann law.
Eigen::VectorXd exact_marginals(const IsingNetwork& net);

/// Exact covariance matrix of z under the Boltzmann law.
Eigen::MatrixXd exact_covariance(const IsingNetwork& net);

}  // namespace bkt_irt
