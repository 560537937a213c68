#include "ising/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <string_view>
#include <thread>
#include <unordered_set>

namespace ising {

std::string to_string(ObjectiveType type) {
  return type == ObjectiveType::PseudoLikelihood ? "pl" : "mpf";
}

ObjectiveType objective_type_from_string(const std::string& name) {
  if (name == "pl" || name == "pseudo-likelihood") return ObjectiveType::PseudoLikelihood;
  if (name == "mpf" || name == "minimum-probability-flow") return ObjectiveType::MinimumProbabilityFlow;
  throw std::invalid_argument("unknown objective '" + name + "' (expected pl or mpf)");
}

double ObjectiveGradient::max_abs() const {
  double m = 0.0;
  for (double g : couplings) m = std::max(m, std::abs(g));
  for (double g : biases) m = std::max(m, std::abs(g));
  return m;
}

double ObjectiveGradient::norm() const {
  double s = 0.0;
  for (double g : couplings) s += g * g;
  for (double g : biases) s += g * g;
  return std::sqrt(s);
}

namespace {

constexpr std::size_t kBlockRows = 256;

/// log(2 cosh t) without overflow.
double log_2cosh(double t) {
  const double a = std::abs(t);
  return a + std::log1p(std::exp(-2.0 * a));
}

}  // namespace

struct Objective::Partial {
  double value = 0.0;
  std::vector<double> grad_k;
  std::vector<double> grad_h;
  std::size_t overflow = 0;

  void init(std::size_t n, bool with_gradient) {
    if (with_gradient) {
      grad_k.assign(IsingModel::pair_count(n), 0.0);
      grad_h.assign(n, 0.0);
    }
  }

  void merge(const Partial& other) {
    value += other.value;
    for (std::size_t p = 0; p < grad_k.size(); ++p) grad_k[p] += other.grad_k[p];
    for (std::size_t i = 0; i < grad_h.size(); ++i) grad_h[i] += other.grad_h[i];
    overflow += other.overflow;
  }
};

Objective::Objective(ObjectiveKind kind, SpinDataset data, ReductionConfig reduction)
    : kind_(kind), data_(std::move(data)), reduction_(reduction) {
  if (data_.empty()) throw std::invalid_argument("objective needs at least one configuration");
  if (reduction_.threads == 0) reduction_.threads = 1;
  if (kind_.type == ObjectiveType::MinimumProbabilityFlow && kind_.mpf_exclude_data_neighbors) {
    const std::size_t n = data_.n_spins();
    auto key = [](SpinView x) {
      return std::string(reinterpret_cast<const char*>(x.data()), x.size());
    };
    std::unordered_set<std::string> present;
    for (std::size_t k = 0; k < data_.size(); ++k) present.insert(key(data_[k]));
    skip_.assign(data_.size() * n, 0);
    for (std::size_t k = 0; k < data_.size(); ++k) {
      std::string probe = key(data_[k]);
      for (std::size_t i = 0; i < n; ++i) {
        probe[i] = static_cast<char>(-probe[i]);
        skip_[k * n + i] = present.contains(probe) ? 1 : 0;
        probe[i] = static_cast<char>(-probe[i]);
      }
    }
  }
}

void Objective::accumulate(const IsingModel& model, std::size_t begin, std::size_t end,
                           bool with_gradient, Partial& out) const {
  const std::size_t n = data_.n_spins();
  std::vector<double> theta(n), x(n), r(n);
  const bool pl = kind_.type == ObjectiveType::PseudoLikelihood;

  for (std::size_t k = begin; k < end; ++k) {
    const SpinView row = data_[k];
    local_field_row(model, row, theta);
    for (std::size_t i = 0; i < n; ++i) x[i] = row[i];

    if (pl) {
      for (std::size_t i = 0; i < n; ++i) {
        out.value += log_2cosh(theta[i]) - x[i] * theta[i];
        r[i] = std::tanh(theta[i]) - x[i];
      }
    } else {
      // r_i holds the MPF weight w_i = exp(-x_i theta_i).
      const unsigned char* skip = skip_.empty() ? nullptr : skip_.data() + k * n;
      for (std::size_t i = 0; i < n; ++i) {
        if (skip && skip[i]) {
          r[i] = 0.0;
          continue;
        }
        double e = -x[i] * theta[i];
        if (std::abs(e) > kMpfExponentClamp) {
          e = std::clamp(e, -kMpfExponentClamp, kMpfExponentClamp);
          ++out.overflow;
        }
        r[i] = std::exp(e);
        out.value += r[i];
      }
    }

    if (!with_gradient) continue;
    if (pl) {
      // d/dK_ij = x_j r_i + x_i r_j with r_i = tanh(theta_i) - x_i.
      std::size_t p = 0;
      for (std::size_t i = 0; i < n; ++i) {
        out.grad_h[i] += r[i];
        for (std::size_t j = i + 1; j < n; ++j, ++p) out.grad_k[p] += x[j] * r[i] + x[i] * r[j];
      }
    } else {
      // d/dh_i = -x_i w_i, d/dK_ij = -x_i x_j (w_i + w_j).
      std::size_t p = 0;
      for (std::size_t i = 0; i < n; ++i) {
        out.grad_h[i] -= x[i] * r[i];
        for (std::size_t j = i + 1; j < n; ++j, ++p) out.grad_k[p] -= x[i] * x[j] * (r[i] + r[j]);
      }
    }
  }
}

Objective::Evaluation Objective::run(const IsingModel& model, bool with_gradient) const {
  if (model.n_spins() != data_.n_spins()) {
    throw std::invalid_argument("model has " + std::to_string(model.n_spins()) +
                                " spins but data has " + std::to_string(data_.n_spins()));
  }
  const std::size_t n = data_.n_spins();
  const std::size_t rows = data_.size();
  Partial total;
  total.init(n, with_gradient);

  if (reduction_.deterministic) {
    const std::size_t n_blocks = (rows + kBlockRows - 1) / kBlockRows;
    std::vector<Partial> blocks(n_blocks);
    auto work = [&](std::size_t first, std::size_t stride) {
      for (std::size_t b = first; b < n_blocks; b += stride) {
        blocks[b].init(n, with_gradient);
        accumulate(model, b * kBlockRows, std::min(rows, (b + 1) * kBlockRows), with_gradient,
                   blocks[b]);
      }
    };
    const std::size_t workers = std::min<std::size_t>(reduction_.threads, n_blocks);
    if (workers <= 1) {
      work(0, 1);
    } else {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
    }
    for (const auto& b : blocks) total.merge(b);
  } else {
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(reduction_.threads, rows));
    if (workers == 1) {
      accumulate(model, 0, rows, with_gradient, total);
    } else {
      std::mutex mu;
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          Partial local;
          local.init(n, with_gradient);
          accumulate(model, rows * w / workers, rows * (w + 1) / workers, with_gradient, local);
          std::lock_guard lock(mu);
          total.merge(local);
        });
      }
    }
  }

  overflow_ += total.overflow;
  const double scale = 1.0 / static_cast<double>(rows);
  Evaluation result;
  result.value = total.value * scale;
  if (with_gradient) {
    for (double& g : total.grad_k) g *= scale;
    for (double& g : total.grad_h) g *= scale;
    result.gradient.couplings = std::move(total.grad_k);
    result.gradient.biases = std::move(total.grad_h);
  }
  return result;
}

double Objective::value(const IsingModel& model) const { return run(model, false).value; }

ObjectiveGradient Objective::gradient(const IsingModel& model) const {
  return run(model, true).gradient;
}

Objective::Evaluation Objective::evaluate(const IsingModel& model) const {
  return run(model, true);
}

double pl_value(const IsingModel& model, const SpinDataset& data) {
  return Objective({ObjectiveType::PseudoLikelihood}, data).value(model);
}

ObjectiveGradient pl_gradient(const IsingModel& model, const SpinDataset& data) {
  return Objective({ObjectiveType::PseudoLikelihood}, data).gradient(model);
}

double mpf_value(const IsingModel& model, const SpinDataset& data, const ObjectiveKind& opts) {
  ObjectiveKind kind = opts;
  kind.type = ObjectiveType::MinimumProbabilityFlow;
  return Objective(kind, data).value(model);
}

ObjectiveGradient mpf_gradient(const IsingModel& model, const SpinDataset& data,
                               const ObjectiveKind& opts) {
  ObjectiveKind kind = opts;
  kind.type = ObjectiveType::MinimumProbabilityFlow;
  return Objective(kind, data).gradient(model);
}

}  // namespace ising
