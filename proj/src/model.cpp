#include "ising/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ising {

namespace {

void check_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument(std::string("non-finite ") + what);
  }
}

void check_length(const IsingModel& model, SpinView x) {
  if (x.size() != model.n_spins()) {
    throw std::invalid_argument("configuration length " + std::to_string(x.size()) +
                                " does not match model size " +
                                std::to_string(model.n_spins()));
  }
}

}  // namespace

IsingModel::IsingModel(std::size_t n_spins)
    : n_(n_spins), couplings_(pair_count(n_spins), 0.0), biases_(n_spins, 0.0) {}

IsingModel::IsingModel(std::size_t n_spins, std::vector<double> couplings,
                       std::vector<double> biases)
    : n_(n_spins), couplings_(std::move(couplings)), biases_(std::move(biases)) {
  if (couplings_.size() != pair_count(n_)) {
    throw std::invalid_argument("expected " + std::to_string(pair_count(n_)) +
                                " couplings, got " + std::to_string(couplings_.size()));
  }
  if (biases_.size() != n_) {
    throw std::invalid_argument("expected " + std::to_string(n_) + " biases, got " +
                                std::to_string(biases_.size()));
  }
  validate();
}

std::size_t IsingModel::pair_index(std::size_t i, std::size_t j, std::size_t n) {
  if (i == j || i >= n || j >= n) {
    throw std::out_of_range("invalid pair (" + std::to_string(i) + ", " + std::to_string(j) +
                            ") for " + std::to_string(n) + " spins");
  }
  if (i > j) std::swap(i, j);
  return i * n - i * (i + 1) / 2 + (j - i - 1);
}

double IsingModel::coupling(std::size_t i, std::size_t j) const {
  if (i == j) {
    if (i >= n_) throw std::out_of_range("spin index out of range");
    return 0.0;
  }
  return couplings_[pair_index(i, j, n_)];
}

void IsingModel::set_coupling(std::size_t i, std::size_t j, double value) {
  if (!std::isfinite(value)) throw std::invalid_argument("non-finite coupling");
  couplings_[pair_index(i, j, n_)] = value;
}

void IsingModel::set_bias(std::size_t i, double value) {
  if (!std::isfinite(value)) throw std::invalid_argument("non-finite bias");
  biases_.at(i) = value;
}

std::vector<double> IsingModel::dense_couplings() const {
  std::vector<double> dense(n_ * n_, 0.0);
  std::size_t p = 0;
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j, ++p) {
      dense[i * n_ + j] = couplings_[p];
      dense[j * n_ + i] = couplings_[p];
    }
  }
  return dense;
}

void IsingModel::validate() const {
  check_finite(couplings_, "coupling");
  check_finite(biases_, "bias");
}

void validate_spins(SpinView spins) {
  for (Spin s : spins) {
    if (s != 1 && s != -1) throw std::invalid_argument("spin values must be -1 or +1");
  }
}

SpinDataset::SpinDataset(std::size_t n_spins, std::vector<Spin> spins)
    : n_(n_spins), spins_(std::move(spins)) {
  if (n_ == 0 && !spins_.empty()) throw std::invalid_argument("dataset with zero spins");
  if (n_ != 0 && spins_.size() % n_ != 0) {
    throw std::invalid_argument("dataset size is not a multiple of n_spins");
  }
  validate_spins(spins_);
}

void SpinDataset::push_back(SpinView config) {
  if (config.size() != n_) throw std::invalid_argument("configuration length mismatch");
  validate_spins(config);
  spins_.insert(spins_.end(), config.begin(), config.end());
}

SpinDataset SpinDataset::prefix(std::size_t d) const {
  if (d > size()) throw std::out_of_range("prefix longer than dataset");
  return SpinDataset(n_, std::vector<Spin>(spins_.begin(), spins_.begin() + d * n_));
}

double energy(const IsingModel& model, SpinView x) {
  check_length(model, x);
  const std::size_t n = model.n_spins();
  const auto k = model.couplings();
  const auto h = model.biases();
  double e = 0.0;
  std::size_t p = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = i + 1; j < n; ++j, ++p) row += k[p] * x[j];
    e -= x[i] * (row + h[i]);
  }
  return e;
}

void local_field_row(const IsingModel& model, SpinView x, std::span<double> out) {
  check_length(model, x);
  const std::size_t n = model.n_spins();
  const auto k = model.couplings();
  const auto h = model.biases();
  for (std::size_t i = 0; i < n; ++i) out[i] = h[i];
  std::size_t p = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = x[i];
    double acc = 0.0;
    for (std::size_t j = i + 1; j < n; ++j, ++p) {
      acc += k[p] * x[j];
      out[j] += k[p] * xi;
    }
    out[i] += acc;
  }
}

LocalFieldTable local_fields(const IsingModel& model, const SpinDataset& data) {
  if (data.n_spins() != model.n_spins()) {
    throw std::invalid_argument("dataset and model sizes differ");
  }
  LocalFieldTable table(data.size(), model.n_spins());
  std::vector<double> row(model.n_spins());
  for (std::size_t k = 0; k < data.size(); ++k) {
    local_field_row(model, data[k], row);
    for (std::size_t i = 0; i < row.size(); ++i) table(k, i) = row[i];
  }
  return table;
}

double flip_energy_delta(const IsingModel& model, SpinView x, std::size_t i) {
  check_length(model, x);
  if (i >= model.n_spins()) throw std::out_of_range("spin index out of range");
  const std::size_t n = model.n_spins();
  double theta = model.bias(i);
  for (std::size_t j = 0; j < n; ++j) {
    if (j != i) theta += model.coupling(i, j) * x[j];
  }
  return 2.0 * x[i] * theta;
}

std::vector<Spin> flipped(SpinView x, std::size_t i) {
  if (i >= x.size()) throw std::out_of_range("spin index out of range");
  std::vector<Spin> y(x.begin(), x.end());
  y[i] = static_cast<Spin>(-y[i]);
  return y;
}

}  // namespace ising
