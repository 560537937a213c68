#include <doctest.h>

#include <cmath>

#include "ising/objectives.hpp"
#include "support/oracles.hpp"

using namespace ising;
using ising::testing::finite_difference_gradient;
using ising::testing::random_data;
using ising::testing::random_model;
using ising::testing::relative_gradient_error;

namespace {

const ObjectiveKind kPl{ObjectiveType::PseudoLikelihood};
const ObjectiveKind kMpf{ObjectiveType::MinimumProbabilityFlow};

}  // namespace

TEST_CASE("objective values at the zero model") {
  Rng rng(1);
  const SpinDataset data = random_data(6, 30, rng);
  const IsingModel zero(6);
  CHECK(pl_value(zero, data) == doctest::Approx(6.0 * std::log(2.0)).epsilon(1e-14));
  CHECK(mpf_value(zero, data) == doctest::Approx(6.0).epsilon(1e-14));
}

TEST_CASE("single spin examples") {
  const SpinDataset up(1, {1, 1, 1, 1});
  const IsingModel m(1, {}, {0.4});
  CHECK(pl_value(m, up) == doctest::Approx(std::log(2.0 * std::cosh(0.4)) - 0.4));
  CHECK(pl_gradient(m, up).biases[0] == doctest::Approx(std::tanh(0.4) - 1.0));
  CHECK(mpf_value(m, up) == doctest::Approx(std::exp(-0.4)));
  CHECK(mpf_gradient(m, up).biases[0] == doctest::Approx(-std::exp(-0.4)));
}

TEST_CASE("two spin PL value by hand") {
  const SpinDataset data(2, {1, 1, 1, -1});
  const IsingModel m(2, {0.5}, {0.1, -0.2});
  // Row 1: theta = (0.5 + 0.1, 0.5 - 0.2); row 2: theta = (-0.5 + 0.1, 0.5 - 0.2).
  auto term = [](double t, double x) { return std::log(2.0 * std::cosh(t)) - x * t; };
  const double expected = 0.5 * (term(0.6, 1) + term(0.3, 1) + term(-0.4, 1) + term(0.3, -1));
  CHECK(pl_value(m, data) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("analytic gradients match central finite differences") {
  Rng rng(123);
  for (const auto& kind : {kPl, kMpf}) {
    for (int trial = 0; trial < 20; ++trial) {
      const IsingModel m = random_model(8, rng);
      const SpinDataset data = random_data(8, 20, rng);
      const Objective obj(kind, data);
      const auto fd = finite_difference_gradient([&](const IsingModel& p) { return obj.value(p); }, m);
      CHECK(relative_gradient_error(obj.gradient(m), fd) < 1e-6);
    }
  }
}

TEST_CASE("excluded MPF gradient matches finite differences") {
  Rng rng(5);
  const ObjectiveKind kind{ObjectiveType::MinimumProbabilityFlow, true};
  const IsingModel m = random_model(4, rng);
  const SpinDataset data = random_data(4, 40, rng);
  const Objective obj(kind, data);
  const auto fd = finite_difference_gradient([&](const IsingModel& p) { return obj.value(p); }, m);
  CHECK(relative_gradient_error(obj.gradient(m), fd) < 1e-6);
}

TEST_CASE("MPF exclusion skips flips that land on data points") {
  // Both points are one flip of spin 1 away from each other.
  const SpinDataset data(2, {1, 1, 1, -1});
  const IsingModel zero(2);
  CHECK(mpf_value(zero, data) == doctest::Approx(2.0));
  const ObjectiveKind excl{ObjectiveType::MinimumProbabilityFlow, true};
  CHECK(mpf_value(zero, data, excl) == doctest::Approx(1.0));
  const auto g = mpf_gradient(zero, data, excl);
  CHECK(g.biases[0] == doctest::Approx(-1.0));
  CHECK(g.biases[1] == doctest::Approx(0.0));
}

TEST_CASE("evaluate agrees with value and gradient") {
  Rng rng(8);
  const IsingModel m = random_model(7, rng);
  const SpinDataset data = random_data(7, 300, rng);
  for (const auto& kind : {kPl, kMpf}) {
    const Objective obj(kind, data);
    const auto ev = obj.evaluate(m);
    CHECK(ev.value == obj.value(m));
    CHECK(ev.gradient.couplings == obj.gradient(m).couplings);
    CHECK(ev.gradient.biases == obj.gradient(m).biases);
    const double free_fn = kind.type == ObjectiveType::PseudoLikelihood ? pl_value(m, data) : mpf_value(m, data);
    CHECK(ev.value == doctest::Approx(free_fn).epsilon(1e-13));
  }
}

TEST_CASE("deterministic reduction is independent of thread count") {
  Rng rng(42);
  const IsingModel m = random_model(10, rng);
  const SpinDataset data = random_data(10, 2000, rng);
  for (const auto& kind : {kPl, kMpf}) {
    const auto base = Objective(kind, data, {true, 1}).evaluate(m);
    for (unsigned threads : {2u, 3u, 8u}) {
      const auto other = Objective(kind, data, {true, threads}).evaluate(m);
      CHECK(other.value == base.value);
      CHECK(other.gradient.couplings == base.gradient.couplings);
      CHECK(other.gradient.biases == base.gradient.biases);
    }
    const auto loose = Objective(kind, data, {false, 4}).evaluate(m);
    CHECK(loose.value == doctest::Approx(base.value).epsilon(1e-12));
  }
}

TEST_CASE("symmetric data and zero biases give zero bias gradient") {
  Rng rng(6);
  const SpinDataset data = ising::testing::balanced_data(5, 50, rng);
  IsingModel m = random_model(5, rng);
  for (auto& h : m.biases()) h = 0.0;
  for (const auto& g : {pl_gradient(m, data), mpf_gradient(m, data)})
    for (double v : g.biases) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("MPF clamps huge exponents and counts them") {
  const SpinDataset data(2, {1, -1});
  const IsingModel m(2, {1000.0}, {0.0, 0.0});
  const Objective obj(kMpf, data);
  const double v = obj.value(m);
  CHECK(std::isfinite(v));
  CHECK(v == doctest::Approx(2.0 * std::exp(kMpfExponentClamp)));
  CHECK(obj.overflow_warnings() == 2);
  CHECK(std::isfinite(Objective(kPl, data).value(m)));
}

TEST_CASE("objectives reject mismatched models and empty data") {
  const SpinDataset data(2, {1, 1});
  CHECK_THROWS_AS(pl_value(IsingModel(3), data), std::invalid_argument);
  CHECK_THROWS_AS(Objective(kPl, SpinDataset(2)), std::invalid_argument);
  CHECK(objective_type_from_string("pl") == ObjectiveType::PseudoLikelihood);
  CHECK(objective_type_from_string("mpf") == ObjectiveType::MinimumProbabilityFlow);
  CHECK_THROWS(objective_type_from_string("ml"));
}

TEST_CASE("objectives are convex along random segments") {
  Rng rng(17);
  for (const auto& kind : {kPl, kMpf}) {
    for (int trial = 0; trial < 20; ++trial) {
      const SpinDataset data = random_data(6, 40, rng);
      const Objective obj(kind, data);
      const IsingModel a = random_model(6, rng, 0.5, 0.5), b = random_model(6, rng, 0.5, 0.5);
      for (double t : {0.25, 0.5, 0.75}) {
        IsingModel mix(6);
        for (std::size_t p = 0; p < mix.n_pairs(); ++p) mix.couplings()[p] = t * a.couplings()[p] + (1 - t) * b.couplings()[p];
        for (std::size_t i = 0; i < 6; ++i) mix.biases()[i] = t * a.biases()[i] + (1 - t) * b.biases()[i];
        CHECK(obj.value(mix) <= t * obj.value(a) + (1 - t) * obj.value(b) + 1e-10);
      }
    }
  }
}
