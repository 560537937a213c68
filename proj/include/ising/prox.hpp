#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ising/model.hpp"
#include "ising/objectives.hpp"

namespace ising {

/// Backtracking pushed a Lipschitz constant past kMaxLipschitz.
class NonConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kMaxLipschitz = 1e12;

struct RegularizationConfig {
  double lambda_couplings = 0.0;
  double lambda_biases = 0.0;

  static RegularizationConfig uniform(double lambda) { return {lambda, lambda}; }
  void validate() const;
};

struct FitConfig {
  RegularizationConfig regularization;
  std::size_t max_iterations = 200;
  /// Stop once the largest absolute parameter change falls below this.
  double tolerance = 1e-6;
  bool accelerated = false;
  double lipschitz_init = 1.0;
  double backtrack_factor = 2.0;
  /// Both constants are multiplied by this before every iteration after the first.
  double lipschitz_decay = 0.9;
  /// Warm start; all-zero when empty.
  std::optional<IsingModel> initial_model;
  ReductionConfig reduction;

  /// 200 iterations for PL, 50 for MPF.
  static std::size_t default_max_iterations(ObjectiveType type);
  static FitConfig defaults_for(ObjectiveType type);
  void validate() const;
};

struct IterationRecord {
  /// Composite value F = L + lambda_J |K|_1 + lambda_h |h|_1 at the new iterate.
  double objective = 0.0;
  double lipschitz_couplings = 0.0;
  double lipschitz_biases = 0.0;
  double max_change = 0.0;
  /// Smooth part L at the new iterate, and the majorizer G evaluated there.
  double smooth = 0.0;
  double majorizer = 0.0;
  /// Smooth value at the point the step was taken from.
  double smooth_at_anchor = 0.0;
};

struct FitResult {
  IsingModel model;
  std::vector<IterationRecord> trace;
  std::size_t iterations_run = 0;
  bool converged = false;
  std::size_t overflow_warnings = 0;
  /// Composite value at the starting point.
  double initial_objective = 0.0;

  double final_objective() const { return trace.empty() ? initial_objective : trace.back().objective; }
};

/// FISTA momentum state; beta starts at 1.
struct AccelState {
  double beta = 1.0;
  IsingModel previous_prox_point;
};

/// beta_{t+1} = (1 + sqrt(1 + 4 beta_t^2)) / 2.
double next_beta(double beta);

/// sign(x) * max(|x| - a, 0); returns +0.0 inside the dead zone.
double soft_threshold(double x, double a);

/// lambda_J |K|_1 + lambda_h |h|_1.
double l1_penalty(const IsingModel& model, const RegularizationConfig& reg);

/// One prox-gradient step from `model`:
///   K <- soft_threshold(K - grad_K / L_J, lambda_J / L_J), same for h with L_h.
IsingModel ista_step(const IsingModel& model, const ObjectiveGradient& grad, double lipschitz_couplings,
                     double lipschitz_biases, const RegularizationConfig& reg);

/// Quadratic majorizer G(candidate | anchor) built from the smooth value and
/// gradient at the anchor.
double majorizer_value(double anchor_value, const ObjectiveGradient& grad, const IsingModel& anchor,
                       const IsingModel& candidate, double lipschitz_couplings, double lipschitz_biases);

/// Relative slack allowed in the majorizer test for rounding in L.
inline constexpr double kMajorizerSlack = 1e-12;

struct BacktrackResult {
  double lipschitz_couplings = 0.0;
  double lipschitz_biases = 0.0;
  IsingModel candidate;
  double candidate_value = 0.0;
  double majorizer = 0.0;
  std::size_t trials = 0;
};

/// Grows both constants by `factor` until L(candidate) <= G(candidate | anchor).
/// Throws NonConvergenceError once a constant exceeds kMaxLipschitz.
BacktrackResult backtrack(const SmoothObjective& objective, const IsingModel& anchor, double anchor_value,
                          const ObjectiveGradient& grad, double lipschitz_couplings,
                          double lipschitz_biases, const RegularizationConfig& reg, double factor);

/// Proximal gradient descent (ISTA, or FISTA when cfg.accelerated).
FitResult fit(const SmoothObjective& objective, const FitConfig& cfg);
FitResult fit(const ObjectiveKind& kind, const SpinDataset& data, const FitConfig& cfg);

}  // namespace ising
