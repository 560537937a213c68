#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ising/model.hpp"

namespace ising {

enum class ObjectiveType { PseudoLikelihood, MinimumProbabilityFlow };

std::string to_string(ObjectiveType type);
/// Accepts "pl" / "mpf" (and the long names).
ObjectiveType objective_type_from_string(const std::string& name);

struct ObjectiveKind {
  ObjectiveType type = ObjectiveType::PseudoLikelihood;
  /// MPF only: skip flip neighbours that are themselves data points.
  bool mpf_exclude_data_neighbors = false;
};

/// Gradient laid out like IsingModel storage.
struct ObjectiveGradient {
  std::vector<double> couplings;
  std::vector<double> biases;

  ObjectiveGradient() = default;
  explicit ObjectiveGradient(std::size_t n_spins)
      : couplings(IsingModel::pair_count(n_spins), 0.0), biases(n_spins, 0.0) {}

  double max_abs() const;
  double norm() const;
};

/// How per-configuration terms are summed. Deterministic mode sums fixed
/// blocks of rows and combines them in block order, so results do not depend
/// on `threads`. Otherwise each worker takes a contiguous share and partial
/// sums are combined as workers finish.
struct ReductionConfig {
  bool deterministic = true;
  unsigned threads = 1;
};

/// Exponents of MPF terms are clamped to [-kMpfExponentClamp, kMpfExponentClamp].
inline constexpr double kMpfExponentClamp = 500.0;

struct ObjectiveEvaluation {
  double value = 0.0;
  ObjectiveGradient gradient;
};

/// Anything the proximal optimizer can minimize.
class SmoothObjective {
 public:
  virtual ~SmoothObjective() = default;
  virtual std::size_t n_spins() const = 0;
  virtual double value(const IsingModel& model) const = 0;
  virtual ObjectiveEvaluation evaluate(const IsingModel& model) const = 0;
  virtual std::size_t overflow_warnings() const { return 0; }
};

/// Data-bound objective, normalized per configuration:
///
///   PL : (1/D) sum_k sum_i [ log(2 cosh theta_i) - x_i theta_i ]
///   MPF: (1/D) sum_k sum_i exp(-x_i theta_i)       (= exp(-dE_i / 2))
///
/// Gradients are derivatives of these values (descent direction is -grad).
/// Not safe to call concurrently on one instance: the overflow counter is
/// updated by every evaluation.
class Objective final : public SmoothObjective {
 public:
  using Evaluation = ObjectiveEvaluation;

  Objective(ObjectiveKind kind, SpinDataset data, ReductionConfig reduction = {});

  const ObjectiveKind& kind() const noexcept { return kind_; }
  const SpinDataset& data() const noexcept { return data_; }
  std::size_t n_spins() const override { return data_.n_spins(); }

  double value(const IsingModel& model) const override;
  ObjectiveGradient gradient(const IsingModel& model) const;
  Evaluation evaluate(const IsingModel& model) const override;

  /// Number of clamped MPF exponents seen so far.
  std::size_t overflow_warnings() const override { return overflow_; }

 private:
  struct Partial;
  void accumulate(const IsingModel& model, std::size_t begin, std::size_t end,
                  bool with_gradient, Partial& out) const;
  Evaluation run(const IsingModel& model, bool with_gradient) const;

  ObjectiveKind kind_;
  SpinDataset data_;
  ReductionConfig reduction_;
  std::vector<unsigned char> skip_;  // D x N, MPF exclusion mask
  mutable std::size_t overflow_ = 0;
};

double pl_value(const IsingModel& model, const SpinDataset& data);
ObjectiveGradient pl_gradient(const IsingModel& model, const SpinDataset& data);
double mpf_value(const IsingModel& model, const SpinDataset& data, const ObjectiveKind& opts = {ObjectiveType::MinimumProbabilityFlow});
ObjectiveGradient mpf_gradient(const IsingModel& model, const SpinDataset& data,
                               const ObjectiveKind& opts = {ObjectiveType::MinimumProbabilityFlow});

}  // namespace ising
