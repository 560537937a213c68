#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ising/model.hpp"
#include "ising/objectives.hpp"
#include "ising/prox.hpp"
#include "ising/synthgen.hpp"

namespace ising {

// ---------------------------------------------------------------------------
// Recovery metrics

/// Errors are relative to the true parameters:
///   err_J = sqrt( sum (K_est - K_true)^2 / sum K_true^2 ), err_h likewise.
/// An error is empty when the true parameters it normalizes by are all zero.
struct RecoveryReport {
  std::optional<double> err_couplings;
  std::optional<double> err_biases;
  double support_precision = 0.0;
  double support_recall = 0.0;
  double support_threshold = 0.0;

  std::optional<double> err_total() const;
};

inline constexpr double kDefaultSupportThreshold = 0.05;

/// Support: pairs with |K_est| > threshold vs. pairs with K_true != 0.
/// Precision is 1 when nothing is predicted; recall is 1 when nothing is true.
RecoveryReport recovery_report(const IsingModel& truth, const IsingModel& estimate,
                               double support_threshold = kDefaultSupportThreshold);

// ---------------------------------------------------------------------------
// Exact enumeration (small N only)

inline constexpr std::size_t kMaxEnumerationSpins = 20;

/// Configuration for enumeration index `index`: spin i is +1 iff bit i is set.
std::vector<Spin> configuration_from_index(std::uint64_t index, std::size_t n_spins);

/// Boltzmann probabilities over all 2^N configurations, indexed as above.
std::vector<double> boltzmann_probabilities(const IsingModel& model);

/// D independent draws from the exact Boltzmann distribution.
SpinDataset sample_exact(const IsingModel& model, std::size_t n_samples, std::uint64_t seed);

/// First and second moments, <x_i> and <x_i x_j> (pair layout as IsingModel).
struct Moments {
  std::vector<double> pair;
  std::vector<double> single;
};

Moments empirical_moments(const SpinDataset& data);
Moments model_moments(const IsingModel& model);

inline constexpr std::size_t kMaxMleSpins = 10;

/// Unregularized maximum-likelihood fit by exact enumeration of the partition
/// function (Newton ascent with line search) until the gradient norm falls
/// below `gradient_tolerance`. Test oracle; N <= kMaxMleSpins.
IsingModel exact_mle_oracle(const SpinDataset& data, double gradient_tolerance = 1e-8);

// ---------------------------------------------------------------------------
// Sweeps

struct SweepArm {
  ObjectiveKind objective;
  std::vector<double> lambdas;  // applied as lambda_J = lambda_h
  FitConfig fit;
};

/// Every repeat draws one truth and one sample of max(data_sizes)
/// configurations; each arm is fitted on every prefix size and lambda.
struct SweepSpec {
  GroundTruthSpec truth;
  SamplerConfig sampler;  // n_samples and seed are set per repeat
  std::vector<std::size_t> data_sizes;
  std::vector<SweepArm> arms;
  std::size_t n_repeats = 10;
  std::uint64_t seed = 0;
  double support_threshold = kDefaultSupportThreshold;

  void validate() const;
};

/// Seeds used by repeat r of a sweep with base seed s.
struct RepeatSeeds {
  std::uint64_t truth;
  std::uint64_t sampler;
};
RepeatSeeds repeat_seeds(std::uint64_t sweep_seed, std::size_t repeat);

struct SweepRow {
  std::size_t repeat = 0;
  std::size_t arm = 0;
  ObjectiveType objective = ObjectiveType::PseudoLikelihood;
  TruthKind truth_kind = TruthKind::SquareLattice;
  std::size_t n_spins = 0;
  std::size_t d = 0;
  double lambda = 0.0;
  RecoveryReport report;
  std::size_t iterations = 0;
  bool converged = false;
  double final_objective = 0.0;
  std::optional<double> seconds;
  std::size_t overflow_warnings = 0;
  /// Nonempty when the fit threw; metric fields are then meaningless.
  std::string error;
  /// Sum |K_est| + |h_est|, and mean |K| over true support for estimate and truth.
  double estimate_l1 = 0.0;
  double mean_abs_on_support_estimate = 0.0;
  double mean_abs_on_support_truth = 0.0;

  bool failed() const { return !error.empty(); }
};

struct Summary {
  double mean = 0.0;
  double stderr_ = 0.0;  // standard error of the mean
  std::size_t count = 0;
};

struct SweepAggregate {
  std::size_t arm = 0;
  ObjectiveType objective = ObjectiveType::PseudoLikelihood;
  TruthKind truth_kind = TruthKind::SquareLattice;
  std::size_t n_spins = 0;
  std::size_t d = 0;
  double lambda = 0.0;
  std::size_t n_failed = 0;
  Summary err_j, err_h, err_total, support_precision, support_recall, iterations, converged,
      final_objective, seconds;
};

struct SweepTable {
  std::vector<SweepRow> rows;             // ordered by (repeat, arm, d, lambda)
  std::vector<SweepAggregate> aggregates;  // ordered by (arm, d, lambda)

  /// Header plus one line per row, then one "mean" line per aggregate.
  std::string to_csv() const;
};

inline constexpr std::string_view kSweepCsvHeader =
    "repeat,objective,truth_kind,n_spins,d,lambda,err_j,err_h,err_total,support_precision,"
    "support_recall,iterations,converged,final_objective,seconds";

struct SweepOptions {
  unsigned jobs = 1;
  /// Wall-clock seconds are recorded only when set; otherwise written as NA
  /// so that output bytes depend on inputs alone.
  bool record_timing = false;
};

SweepTable run_sweep(const SweepSpec& spec, const SweepOptions& options = {});

/// Parses the JSON sweep description; throws FormatError on bad input.
SweepSpec sweep_spec_from_json(std::string_view text);

}  // namespace ising
