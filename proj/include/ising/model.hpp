#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ising {

using Spin = std::int8_t;
using SpinView = std::span<const Spin>;

/// Pairwise Ising model with one coupling per unordered pair (i < j) and one
/// bias per spin. Energy counts each pair once:
///
///   E(x) = - sum_{i<j} K_ij x_i x_j - sum_i h_i x_i
///
/// Couplings are stored densely in upper-triangular row-major order:
/// (0,1), (0,2), ..., (0,N-1), (1,2), ..., (N-2,N-1).
class IsingModel {
 public:
  IsingModel() = default;
  /// All-zero model on n spins.
  explicit IsingModel(std::size_t n_spins);
  /// Throws std::invalid_argument on size mismatch or non-finite values.
  IsingModel(std::size_t n_spins, std::vector<double> couplings, std::vector<double> biases);

  std::size_t n_spins() const noexcept { return n_; }
  std::size_t n_pairs() const noexcept { return couplings_.size(); }
  std::size_t n_parameters() const noexcept { return couplings_.size() + biases_.size(); }

  static constexpr std::size_t pair_count(std::size_t n) noexcept { return n * (n - (n > 0)) / 2; }
  /// Flat index of the unordered pair {i, j}; requires i != j.
  static std::size_t pair_index(std::size_t i, std::size_t j, std::size_t n);

  /// Symmetric access; i == j returns 0 (no self-coupling).
  double coupling(std::size_t i, std::size_t j) const;
  void set_coupling(std::size_t i, std::size_t j, double value);

  double bias(std::size_t i) const { return biases_.at(i); }
  void set_bias(std::size_t i, double value);

  std::span<const double> couplings() const noexcept { return couplings_; }
  std::span<double> couplings() noexcept { return couplings_; }
  std::span<const double> biases() const noexcept { return biases_; }
  std::span<double> biases() noexcept { return biases_; }

  /// Full symmetric N x N coupling matrix, zero diagonal, row-major.
  std::vector<double> dense_couplings() const;

  /// Throws if any stored value is non-finite.
  void validate() const;

  friend bool operator==(const IsingModel&, const IsingModel&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> couplings_;
  std::vector<double> biases_;
};

/// Throws std::invalid_argument unless every entry is exactly -1 or +1.
void validate_spins(SpinView spins);

/// D configurations of N spins, stored row-major.
class SpinDataset {
 public:
  SpinDataset() = default;
  explicit SpinDataset(std::size_t n_spins) : n_(n_spins) {}
  /// `spins` has size D * n_spins; every entry must be +-1.
  SpinDataset(std::size_t n_spins, std::vector<Spin> spins);

  std::size_t n_spins() const noexcept { return n_; }
  std::size_t size() const noexcept { return n_ == 0 ? 0 : spins_.size() / n_; }
  bool empty() const noexcept { return spins_.empty(); }

  SpinView row(std::size_t k) const { return SpinView(spins_).subspan(k * n_, n_); }
  SpinView operator[](std::size_t k) const { return row(k); }
  std::span<const Spin> flat() const noexcept { return spins_; }

  void push_back(SpinView config);
  /// First `d` configurations.
  SpinDataset prefix(std::size_t d) const;

  friend bool operator==(const SpinDataset&, const SpinDataset&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<Spin> spins_;
};

/// theta[k][i] = sum_{j != i} K_ij x_j^(k) + h_i.
class LocalFieldTable {
 public:
  LocalFieldTable(std::size_t rows, std::size_t n_spins)
      : rows_(rows), n_(n_spins), theta_(rows * n_spins, 0.0) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t n_spins() const noexcept { return n_; }
  double operator()(std::size_t k, std::size_t i) const { return theta_[k * n_ + i]; }
  double& operator()(std::size_t k, std::size_t i) { return theta_[k * n_ + i]; }
  std::span<const double> row(std::size_t k) const {
    return std::span<const double>(theta_).subspan(k * n_, n_);
  }

 private:
  std::size_t rows_;
  std::size_t n_;
  std::vector<double> theta_;
};

double energy(const IsingModel& model, SpinView x);

/// Writes theta_i for one configuration into `out` (size N).
void local_field_row(const IsingModel& model, SpinView x, std::span<double> out);
LocalFieldTable local_fields(const IsingModel& model, const SpinDataset& data);

/// E(x with spin i flipped) - E(x) = 2 x_i theta_i.
double flip_energy_delta(const IsingModel& model, SpinView x, std::size_t i);

/// Copy of x with spin i flipped.
std::vector<Spin> flipped(SpinView x, std::size_t i);

}  // namespace ising
