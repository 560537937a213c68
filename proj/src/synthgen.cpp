#include "ising/synthgen.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ising/rng.hpp"

namespace ising {

void GroundTruthSpec::validate() const {
  switch (kind) {
    case TruthKind::RandomSparse:
      if (n_spins < 2) throw std::invalid_argument("random-sparse truth needs n_spins >= 2");
      if (!(density > 0.0 && density <= 1.0)) {
        throw std::invalid_argument("density must lie in (0, 1]");
      }
      break;
    case TruthKind::SquareLattice:
      if (linear_size < 2) throw std::invalid_argument("linear_size must be >= 2");
      break;
  }
}

std::size_t GroundTruthSpec::resolved_n_spins() const {
  return kind == TruthKind::SquareLattice ? linear_size * linear_size : n_spins;
}

std::string to_string(TruthKind kind) {
  return kind == TruthKind::RandomSparse ? "random-sparse" : "square-lattice";
}

TruthKind truth_kind_from_string(const std::string& name) {
  if (name == "random-sparse") return TruthKind::RandomSparse;
  if (name == "square-lattice") return TruthKind::SquareLattice;
  throw std::invalid_argument("unknown truth kind '" + name +
                              "' (expected random-sparse or square-lattice)");
}

IsingModel generate_random_sparse(const GroundTruthSpec& spec) {
  if (spec.kind != TruthKind::RandomSparse) throw std::invalid_argument("spec kind is not random-sparse");
  spec.validate();
  const std::size_t n = spec.n_spins;
  const std::size_t n_pairs = IsingModel::pair_count(n);
  const auto n_active = static_cast<std::size_t>(std::llround(spec.density * static_cast<double>(n_pairs)));
  if (n_active == 0) throw std::invalid_argument("density selects zero pairs");

  Rng rng(spec.seed);
  // Partial Fisher-Yates: the first n_active slots are a uniform subset.
  std::vector<std::size_t> order(n_pairs);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t s = 0; s < n_active; ++s) {
    const auto pick = s + rng.uniform_index(n_pairs - s);
    std::swap(order[s], order[pick]);
  }
  std::vector<double> couplings(n_pairs, 0.0);
  for (std::size_t s = 0; s < n_active; ++s) couplings[order[s]] = rng.normal();
  std::vector<double> biases(n);
  for (auto& b : biases) b = rng.normal();
  return IsingModel(n, std::move(couplings), std::move(biases));
}

IsingModel generate_square_lattice(const GroundTruthSpec& spec) {
  if (spec.kind != TruthKind::SquareLattice) throw std::invalid_argument("spec kind is not square-lattice");
  spec.validate();
  const std::size_t side = spec.linear_size;
  const std::size_t n = side * side;
  Rng rng(spec.seed);
  IsingModel model(n);
  auto add_edge = [&](std::size_t a, std::size_t b) {
    model.set_coupling(a, b, model.coupling(a, b) + rng.normal());
  };
  for (std::size_t r = 0; r < side; ++r) {
    for (std::size_t c = 0; c < side; ++c) {
      const std::size_t site = r * side + c;
      add_edge(site, r * side + (c + 1) % side);
      add_edge(site, ((r + 1) % side) * side + c);
    }
  }
  for (std::size_t i = 0; i < n; ++i) model.set_bias(i, rng.normal());
  return model;
}

IsingModel generate_truth(const GroundTruthSpec& spec) {
  return spec.kind == TruthKind::RandomSparse ? generate_random_sparse(spec)
                                              : generate_square_lattice(spec);
}

std::string to_string(UpdateRule rule) {
  return rule == UpdateRule::HeatBath ? "heat-bath" : "metropolis";
}

UpdateRule update_rule_from_string(const std::string& name) {
  if (name == "heat-bath" || name == "heatbath") return UpdateRule::HeatBath;
  if (name == "metropolis") return UpdateRule::Metropolis;
  throw std::invalid_argument("unknown update rule '" + name +
                              "' (expected heat-bath or metropolis)");
}

void SamplerConfig::validate() const {
  if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
  if (thinning_sweeps < 1) throw std::invalid_argument("thinning_sweeps must be >= 1");
}

namespace {

class Chain {
 public:
  Chain(const IsingModel& model, const SamplerConfig& cfg)
      : n_(model.n_spins()),
        coupling_(model.dense_couplings()),
        bias_(model.biases().begin(), model.biases().end()),
        rule_(cfg.update_rule),
        rng_(cfg.seed),
        state_(n_) {
    for (auto& s : state_) s = static_cast<Spin>(rng_.sign());
  }

  void sweep() {
    for (std::size_t i = 0; i < n_; ++i) {
      const double* row = coupling_.data() + i * n_;
      double theta = bias_[i];
      for (std::size_t j = 0; j < n_; ++j) theta += row[j] * state_[j];
      if (rule_ == UpdateRule::HeatBath) {
        const double p_up = 0.5 * (1.0 + std::tanh(theta));
        state_[i] = rng_.uniform() < p_up ? Spin{1} : Spin{-1};
      } else {
        const double delta = 2.0 * state_[i] * theta;
        if (delta <= 0.0 || rng_.uniform() < std::exp(-delta)) {
          state_[i] = static_cast<Spin>(-state_[i]);
        }
      }
    }
  }

  SpinView state() const { return state_; }

 private:
  std::size_t n_;
  std::vector<double> coupling_;
  std::vector<double> bias_;
  UpdateRule rule_;
  Rng rng_;
  std::vector<Spin> state_;
};

}  // namespace

SpinDataset sample(const IsingModel& model, const SamplerConfig& cfg) {
  cfg.validate();
  model.validate();
  if (model.n_spins() == 0) throw std::invalid_argument("cannot sample an empty model");
  Chain chain(model, cfg);
  for (std::size_t s = 0; s < cfg.burn_in_sweeps; ++s) chain.sweep();
  SpinDataset data(model.n_spins());
  for (std::size_t k = 0; k < cfg.n_samples; ++k) {
    for (std::size_t s = 0; s < cfg.thinning_sweeps; ++s) chain.sweep();
    data.push_back(chain.state());
  }
  return data;
}

}  // namespace ising
