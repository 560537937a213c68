#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "ising/model.hpp"

namespace ising {

enum class TruthKind { RandomSparse, SquareLattice };

/// Ground-truth model recipe. Coupling and bias values are standard normal.
struct GroundTruthSpec {
  TruthKind kind = TruthKind::SquareLattice;
  std::size_t linear_size = 5;  // SquareLattice: N = linear_size^2
  std::size_t n_spins = 25;     // RandomSparse
  double density = 0.1;         // RandomSparse: fraction of unordered pairs
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument when the fields are inconsistent.
  void validate() const;
  std::size_t resolved_n_spins() const;
};

std::string to_string(TruthKind kind);
TruthKind truth_kind_from_string(const std::string& name);

/// round(density * N(N-1)/2) distinct pairs chosen uniformly.
IsingModel generate_random_sparse(const GroundTruthSpec& spec);

/// Nearest neighbours on the linear_size x linear_size torus. For
/// linear_size == 2 the wrap-around edges coincide with the direct ones and
/// their values are summed.
IsingModel generate_square_lattice(const GroundTruthSpec& spec);

/// Dispatches on spec.kind.
IsingModel generate_truth(const GroundTruthSpec& spec);

enum class UpdateRule { HeatBath, Metropolis };

std::string to_string(UpdateRule rule);
UpdateRule update_rule_from_string(const std::string& name);

struct SamplerConfig {
  std::size_t n_samples = 1000;
  std::size_t burn_in_sweeps = 1000;
  std::size_t thinning_sweeps = 10;
  std::uint64_t seed = 0;
  UpdateRule update_rule = UpdateRule::HeatBath;

  void validate() const;
};

/// Single-site MCMC: one sweep updates sites 0..N-1 in order. The chain
/// starts from a uniformly random configuration, discards burn_in_sweeps
/// sweeps, then records the state after every thinning_sweeps sweeps.
SpinDataset sample(const IsingModel& model, const SamplerConfig& cfg);

}  // namespace ising
