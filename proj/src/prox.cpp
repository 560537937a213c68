#include "ising/prox.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ising {

void RegularizationConfig::validate() const {
  if (!(std::isfinite(lambda_couplings) && lambda_couplings >= 0.0) ||
      !(std::isfinite(lambda_biases) && lambda_biases >= 0.0)) {
    throw std::invalid_argument("regularization strengths must be finite and nonnegative");
  }
}

std::size_t FitConfig::default_max_iterations(ObjectiveType type) {
  return type == ObjectiveType::PseudoLikelihood ? 200 : 50;
}

FitConfig FitConfig::defaults_for(ObjectiveType type) {
  FitConfig cfg;
  cfg.max_iterations = default_max_iterations(type);
  return cfg;
}

void FitConfig::validate() const {
  regularization.validate();
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (!(lipschitz_init > 0.0) || !std::isfinite(lipschitz_init)) {
    throw std::invalid_argument("lipschitz_init must be positive");
  }
  if (!(backtrack_factor > 1.0)) throw std::invalid_argument("backtrack_factor must exceed 1");
  if (!(lipschitz_decay > 0.0 && lipschitz_decay <= 1.0)) {
    throw std::invalid_argument("lipschitz_decay must lie in (0, 1]");
  }
  if (initial_model) initial_model->validate();
}

double next_beta(double beta) { return 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * beta * beta)); }

double soft_threshold(double x, double a) {
  if (a < 0.0) throw std::invalid_argument("soft_threshold: negative threshold");
  if (x > a) return x - a;
  if (x < -a) return x + a;
  return 0.0;
}

double l1_penalty(const IsingModel& model, const RegularizationConfig& reg) {
  double sk = 0.0, sh = 0.0;
  for (double k : model.couplings()) sk += std::abs(k);
  for (double h : model.biases()) sh += std::abs(h);
  return reg.lambda_couplings * sk + reg.lambda_biases * sh;
}

namespace {

void check_gradient_shape(const IsingModel& model, const ObjectiveGradient& grad) {
  if (grad.couplings.size() != model.n_pairs() || grad.biases.size() != model.n_spins()) {
    throw std::invalid_argument("gradient layout does not match model");
  }
}

double max_abs_change(const IsingModel& a, const IsingModel& b) {
  double m = 0.0;
  for (std::size_t p = 0; p < a.n_pairs(); ++p) m = std::max(m, std::abs(a.couplings()[p] - b.couplings()[p]));
  for (std::size_t i = 0; i < a.n_spins(); ++i) m = std::max(m, std::abs(a.biases()[i] - b.biases()[i]));
  return m;
}

/// p + coef * (p - previous)
IsingModel extrapolate(const IsingModel& p, const IsingModel& previous, double coef) {
  IsingModel y = p;
  auto yk = y.couplings();
  auto yh = y.biases();
  for (std::size_t q = 0; q < yk.size(); ++q) yk[q] += coef * (p.couplings()[q] - previous.couplings()[q]);
  for (std::size_t i = 0; i < yh.size(); ++i) yh[i] += coef * (p.biases()[i] - previous.biases()[i]);
  return y;
}

}  // namespace

IsingModel ista_step(const IsingModel& model, const ObjectiveGradient& grad, double lipschitz_couplings,
                     double lipschitz_biases, const RegularizationConfig& reg) {
  if (!(lipschitz_couplings > 0.0) || !(lipschitz_biases > 0.0)) {
    throw std::invalid_argument("Lipschitz constants must be positive");
  }
  check_gradient_shape(model, grad);
  IsingModel next = model;
  auto k = next.couplings();
  auto h = next.biases();
  const double ak = reg.lambda_couplings / lipschitz_couplings;
  const double ah = reg.lambda_biases / lipschitz_biases;
  for (std::size_t p = 0; p < k.size(); ++p) k[p] = soft_threshold(k[p] - grad.couplings[p] / lipschitz_couplings, ak);
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = soft_threshold(h[i] - grad.biases[i] / lipschitz_biases, ah);
  return next;
}

double majorizer_value(double anchor_value, const ObjectiveGradient& grad, const IsingModel& anchor,
                       const IsingModel& candidate, double lipschitz_couplings, double lipschitz_biases) {
  check_gradient_shape(anchor, grad);
  double linear = 0.0, quad_k = 0.0, quad_h = 0.0;
  for (std::size_t p = 0; p < anchor.n_pairs(); ++p) {
    const double d = candidate.couplings()[p] - anchor.couplings()[p];
    linear += grad.couplings[p] * d;
    quad_k += d * d;
  }
  for (std::size_t i = 0; i < anchor.n_spins(); ++i) {
    const double d = candidate.biases()[i] - anchor.biases()[i];
    linear += grad.biases[i] * d;
    quad_h += d * d;
  }
  return anchor_value + linear + 0.5 * lipschitz_couplings * quad_k + 0.5 * lipschitz_biases * quad_h;
}

BacktrackResult backtrack(const SmoothObjective& objective, const IsingModel& anchor, double anchor_value,
                          const ObjectiveGradient& grad, double lipschitz_couplings,
                          double lipschitz_biases, const RegularizationConfig& reg, double factor) {
  if (!(factor > 1.0)) throw std::invalid_argument("backtrack factor must exceed 1");
  const double slack = kMajorizerSlack * std::max(1.0, std::abs(anchor_value));
  BacktrackResult r;
  r.lipschitz_couplings = lipschitz_couplings;
  r.lipschitz_biases = lipschitz_biases;
  for (;;) {
    if (r.lipschitz_couplings > kMaxLipschitz || r.lipschitz_biases > kMaxLipschitz) {
      throw NonConvergenceError("backtracking exceeded Lipschitz bound " + std::to_string(kMaxLipschitz) +
                                " (objective or gradient is inconsistent)");
    }
    ++r.trials;
    r.candidate = ista_step(anchor, grad, r.lipschitz_couplings, r.lipschitz_biases, reg);
    r.candidate_value = objective.value(r.candidate);
    r.majorizer = majorizer_value(anchor_value, grad, anchor, r.candidate, r.lipschitz_couplings,
                                  r.lipschitz_biases);
    if (std::isfinite(r.candidate_value) && r.candidate_value <= r.majorizer + slack) return r;
    r.lipschitz_couplings *= factor;
    r.lipschitz_biases *= factor;
  }
}

FitResult fit(const SmoothObjective& objective, const FitConfig& cfg) {
  cfg.validate();
  const std::size_t n = objective.n_spins();
  IsingModel start = cfg.initial_model.value_or(IsingModel(n));
  if (start.n_spins() != n) {
    throw std::invalid_argument("initial model has " + std::to_string(start.n_spins()) +
                                " spins, data has " + std::to_string(n));
  }
  const auto& reg = cfg.regularization;
  const std::size_t overflow_before = objective.overflow_warnings();

  FitResult result;
  ObjectiveEvaluation anchor_eval = objective.evaluate(start);
  result.initial_objective = anchor_eval.value + l1_penalty(start, reg);

  double lk = cfg.lipschitz_init;
  double lh = cfg.lipschitz_init;
  AccelState accel{1.0, start};
  IsingModel anchor = std::move(start);

  for (std::size_t t = 0; t < cfg.max_iterations; ++t) {
    if (t > 0) {
      lk *= cfg.lipschitz_decay;
      lh *= cfg.lipschitz_decay;
    }
    BacktrackResult step = backtrack(objective, anchor, anchor_eval.value, anchor_eval.gradient, lk, lh,
                                     reg, cfg.backtrack_factor);
    lk = step.lipschitz_couplings;
    lh = step.lipschitz_biases;

    IterationRecord rec;
    rec.max_change = max_abs_change(step.candidate, accel.previous_prox_point);
    rec.objective = step.candidate_value + l1_penalty(step.candidate, reg);
    rec.lipschitz_couplings = lk;
    rec.lipschitz_biases = lh;
    rec.smooth = step.candidate_value;
    rec.majorizer = step.majorizer;
    rec.smooth_at_anchor = anchor_eval.value;
    result.trace.push_back(rec);

    if (cfg.accelerated) {
      const double beta_next = next_beta(accel.beta);
      anchor = extrapolate(step.candidate, accel.previous_prox_point, (accel.beta - 1.0) / beta_next);
      accel.beta = beta_next;
    } else {
      anchor = step.candidate;
    }
    accel.previous_prox_point = std::move(step.candidate);

    if (rec.max_change < cfg.tolerance) {
      result.converged = true;
      break;
    }
    if (t + 1 < cfg.max_iterations) anchor_eval = objective.evaluate(anchor);
  }

  result.iterations_run = result.trace.size();
  result.model = std::move(accel.previous_prox_point);
  result.overflow_warnings = objective.overflow_warnings() - overflow_before;
  return result;
}

FitResult fit(const ObjectiveKind& kind, const SpinDataset& data, const FitConfig& cfg) {
  if (data.empty()) throw std::invalid_argument("fit needs a nonempty dataset");
  if (cfg.initial_model && cfg.initial_model->n_spins() != data.n_spins()) {
    throw std::invalid_argument("initial model and data sizes differ");
  }
  Objective objective(kind, data, cfg.reduction);
  return fit(objective, cfg);
}

}  // namespace ising
