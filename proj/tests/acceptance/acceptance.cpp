// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.
//
//   acceptance [--cli PATH] [--only N]

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <limits>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "ising/harness.hpp"
#include "ising/io.hpp"
#include "ising/objectives.hpp"
#include "ising/prox.hpp"
#include "ising/synthgen.hpp"
#include "support/oracles.hpp"

using namespace ising;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

// ---------------------------------------------------------------------------

Outcome gradient_exactness() {
  const auto start = Clock::now();
  Rng rng(20240601);
  double worst[2] = {0.0, 0.0};
  const ObjectiveType types[2] = {ObjectiveType::PseudoLikelihood, ObjectiveType::MinimumProbabilityFlow};
  for (int o = 0; o < 2; ++o) {
    for (int trial = 0; trial < 50; ++trial) {
      const IsingModel m = testing::random_model(8, rng);
      const SpinDataset data = testing::random_data(8, 20, rng);
      const Objective obj({types[o]}, data);
      const auto fd = testing::finite_difference_gradient([&](const IsingModel& p) { return obj.value(p); }, m);
      worst[o] = std::max(worst[o], testing::relative_gradient_error(obj.gradient(m), fd));
    }
  }
  const double secs = seconds_since(start);
  const bool pass = worst[0] < 1e-6 && worst[1] < 1e-6 && secs < 10.0;
  return {pass, "max relative error pl=" + fmt(worst[0]) + " mpf=" + fmt(worst[1]) + " in " + fmt(secs, 3) + " s"};
}

// ---------------------------------------------------------------------------

Outcome prox_correctness() {
  Rng rng(7);
  const double step = 1e-4;
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const double v = 6.0 * rng.uniform() - 3.0;
    const double a = 2.0 * rng.uniform();
    double best_z = 0.0, best = 0.5 * v * v;
    for (long g = -40000; g <= 40000; ++g) {
      const double z = g * step;
      const double f = 0.5 * (z - v) * (z - v) + a * std::abs(z);
      if (f < best) {
        best = f;
        best_z = z;
      }
    }
    worst = std::max(worst, std::abs(soft_threshold(v, a) - best_z));
  }
  return {worst <= step, "max |soft_threshold - grid argmin| = " + fmt(worst) + " over 1000 pairs"};
}

// ---------------------------------------------------------------------------

SpinDataset lattice_sample(std::size_t side, std::size_t d, std::uint64_t seed, IsingModel* truth_out = nullptr) {
  GroundTruthSpec g;
  g.kind = TruthKind::SquareLattice;
  g.linear_size = side;
  g.seed = derive_seed(seed, stream::kTruth);
  const IsingModel truth = generate_truth(g);
  SamplerConfig s;
  s.n_samples = d;
  s.seed = derive_seed(seed, stream::kSampler);
  if (truth_out) *truth_out = truth;
  return sample(truth, s);
}

Outcome monotone_descent() {
  const SpinDataset data = lattice_sample(5, 1000, 31);
  std::string detail;
  bool pass = true;
  for (auto [type, lambda] : {std::pair{ObjectiveType::PseudoLikelihood, 0.1},
                              std::pair{ObjectiveType::MinimumProbabilityFlow, 0.018}}) {
    FitConfig cfg = FitConfig::defaults_for(type);
    cfg.regularization = RegularizationConfig::uniform(lambda);
    cfg.tolerance = std::numeric_limits<double>::min();
    const FitResult r = fit({type}, data, cfg);
    double prev = r.initial_objective, worst_rise = 0.0;
    for (const auto& rec : r.trace) {
      worst_rise = std::max(worst_rise, rec.objective - prev);
      prev = rec.objective;
    }
    const bool ok = r.trace.size() == cfg.max_iterations && worst_rise <= 1e-10;
    pass = pass && ok;
    detail += to_string(type) + ": " + std::to_string(r.trace.size()) + " iterations, largest rise " +
              fmt(worst_rise) + "; ";
  }
  detail.resize(detail.size() - 2);
  return {pass, detail};
}

// ---------------------------------------------------------------------------

Outcome closed_form_recoveries() {
  const auto start = Clock::now();
  const SpinDataset up(1, std::vector<Spin>(10, 1));
  FitConfig cfg;
  cfg.max_iterations = 100000;
  cfg.tolerance = 1e-12;
  cfg.regularization = {0.0, 0.5};
  const double h_pl = fit({ObjectiveType::PseudoLikelihood}, up, cfg).model.bias(0);
  cfg.regularization = {0.0, 0.1};
  const double h_mpf = fit({ObjectiveType::MinimumProbabilityFlow}, up, cfg).model.bias(0);
  const double secs = seconds_since(start);
  const double e_pl = std::abs(h_pl - std::atanh(0.5));
  const double e_mpf = std::abs(h_mpf - std::log(10.0));
  return {e_pl <= 1e-4 && e_mpf <= 1e-3 && secs < 1.0,
          "pl h=" + fmt(h_pl, 8) + " (|err| " + fmt(e_pl) + "), mpf h=" + fmt(h_mpf, 8) + " (|err| " + fmt(e_mpf) +
              ") in " + fmt(secs, 3) + " s"};
}

// ---------------------------------------------------------------------------

/// Data whose empirical distribution is the Boltzmann distribution rounded to
/// multiples of 1/D (largest remainder rounding).
SpinDataset enumeration_weighted(const IsingModel& m, std::size_t d) {
  const auto p = boltzmann_probabilities(m);
  std::vector<std::size_t> count(p.size());
  std::vector<std::pair<double, std::size_t>> remainder;
  std::size_t used = 0;
  for (std::size_t s = 0; s < p.size(); ++s) {
    const double exact = p[s] * static_cast<double>(d);
    count[s] = static_cast<std::size_t>(std::floor(exact));
    used += count[s];
    remainder.emplace_back(exact - std::floor(exact), s);
  }
  std::sort(remainder.begin(), remainder.end(), std::greater<>());
  for (std::size_t k = 0; used < d; ++k, ++used) ++count[remainder[k].second];
  SpinDataset data(m.n_spins());
  for (std::size_t s = 0; s < p.size(); ++s) {
    const auto x = configuration_from_index(s, m.n_spins());
    for (std::size_t c = 0; c < count[s]; ++c) data.push_back(x);
  }
  return data;
}

Outcome oracle_equivalence() {
  const auto start = Clock::now();
  const IsingModel truth(3, {0.6, -0.4, 0.3}, {0.2, -0.1, 0.35});
  const SpinDataset data = enumeration_weighted(truth, 100000);

  FitConfig cfg;
  cfg.max_iterations = 20000;
  cfg.tolerance = 1e-10;
  const IsingModel pl = fit({ObjectiveType::PseudoLikelihood}, data, cfg).model;
  const IsingModel mle = exact_mle_oracle(data);
  double diff = 0.0;
  for (std::size_t p = 0; p < pl.n_pairs(); ++p) diff = std::max(diff, std::abs(pl.couplings()[p] - mle.couplings()[p]));
  for (std::size_t i = 0; i < pl.n_spins(); ++i) diff = std::max(diff, std::abs(pl.biases()[i] - mle.biases()[i]));

  const double mpf_norm = mpf_gradient(truth, data).norm();
  const double secs = seconds_since(start);
  return {diff < 0.05 && mpf_norm < 0.05 && secs < 60.0,
          "max |PL - MLE| = " + fmt(diff) + ", MPF gradient norm at truth = " + fmt(mpf_norm) + " in " +
              fmt(secs, 3) + " s"};
}

// ---------------------------------------------------------------------------

struct ProtocolRun {
  SweepSpec spec;
  SweepTable table;
  double seconds = 0.0;
  std::size_t convergence_iterations[2] = {0, 0};
  bool converged[2] = {false, false};
  double convergence_seconds = 0.0;
};

SweepSpec protocol_spec() {
  SweepSpec spec;
  spec.truth.kind = TruthKind::SquareLattice;
  spec.truth.linear_size = 5;
  spec.data_sizes = {100, 500, 1000, 2000, 3000, 5000};
  spec.n_repeats = 10;
  spec.seed = 2012;
  for (auto [type, lambda] : {std::pair{ObjectiveType::PseudoLikelihood, 0.1},
                              std::pair{ObjectiveType::MinimumProbabilityFlow, 0.018}}) {
    SweepArm arm;
    arm.objective = {type};
    arm.lambdas = {lambda};
    arm.fit = FitConfig::defaults_for(type);
    spec.arms.push_back(arm);
  }
  return spec;
}

const ProtocolRun& protocol_run() {
  static const ProtocolRun run = [] {
    ProtocolRun r;
    r.spec = protocol_spec();
    auto start = Clock::now();
    r.table = run_sweep(r.spec);
    r.seconds = seconds_since(start);

    // Iterations each objective needs to converge, on repeat 0's D = 5000 data.
    start = Clock::now();
    const auto seeds = repeat_seeds(r.spec.seed, 0);
    GroundTruthSpec g = r.spec.truth;
    g.seed = seeds.truth;
    SamplerConfig s = r.spec.sampler;
    s.n_samples = 5000;
    s.seed = seeds.sampler;
    const SpinDataset data = sample(generate_truth(g), s);
    for (std::size_t a = 0; a < 2; ++a) {
      FitConfig cfg = r.spec.arms[a].fit;
      cfg.regularization = RegularizationConfig::uniform(r.spec.arms[a].lambdas[0]);
      cfg.max_iterations = 5000;
      const FitResult fr = fit(r.spec.arms[a].objective, data, cfg);
      r.convergence_iterations[a] = fr.iterations_run;
      r.converged[a] = fr.converged;
    }
    r.convergence_seconds = seconds_since(start);
    return r;
  }();
  return run;
}

Outcome protocol_reproduction() {
  const ProtocolRun& r = protocol_run();
  bool decreasing = true;
  std::string detail;
  for (std::size_t a = 0; a < 2; ++a) {
    detail += to_string(r.spec.arms[a].objective.type) + " mean err_total:";
    double prev = INFINITY;
    for (const auto& agg : r.table.aggregates) {
      if (agg.arm != a) continue;
      detail += " " + fmt(agg.err_total.mean);
      if (!(agg.err_total.mean < prev)) decreasing = false;
      prev = agg.err_total.mean;
    }
    detail += "; ";
  }
  const auto its = [&](std::size_t a) {
    return (r.converged[a] ? "" : ">") + std::to_string(r.convergence_iterations[a]);
  };
  const bool speed = r.converged[1] && r.convergence_iterations[1] <= 50 &&
                     (!r.converged[0] || r.convergence_iterations[0] > 50);
  const double total = r.seconds + r.convergence_seconds;
  detail += "iterations to converge at D=5000: pl " + its(0) + ", mpf " + its(1) + "; " + fmt(total, 4) + " s";
  return {decreasing && speed && total < 900.0, detail};
}

Outcome support_recovery() {
  const ProtocolRun& r = protocol_run();
  bool pass = true;
  std::string detail = "mean recall at D=5000 (|K| > 0.05):";
  for (const auto& agg : r.table.aggregates) {
    if (agg.d != 5000) continue;
    detail += " " + to_string(agg.objective) + " " + fmt(agg.support_recall.mean) + " (precision " +
              fmt(agg.support_precision.mean) + ")";
    pass = pass && agg.support_recall.mean >= 0.8;
  }
  return {pass, detail};
}

// ---------------------------------------------------------------------------

int run_command(const std::string& cmd) {
  const int raw = std::system((cmd + " > /dev/null 2>&1").c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

Outcome determinism(const std::string& cli) {
  SweepSpec spec = protocol_spec();
  spec.truth.linear_size = 4;
  spec.data_sizes = {100, 400};
  spec.n_repeats = 3;
  const std::string lib1 = run_sweep(spec, {1, false}).to_csv();
  const std::string lib8 = run_sweep(spec, {8, false}).to_csv();
  bool pass = lib1 == lib8;
  std::string detail = std::string("library sweep jobs 1 vs 8 ") + (pass ? "identical" : "differ");
  if (cli.empty()) return {pass, detail + "; CLI not given"};

  const fs::path dir = fs::temp_directory_path() / ("sparse_ising_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  auto p = [&](const char* name) { return (dir / name).string(); };
  write_text_file(p("spec.json"), R"({
  "truth": {"kind": "square-lattice", "linear_size": 4},
  "data_sizes": [100, 400],
  "arms": [{"objective": "pl", "lambdas": [0.1]}, {"objective": "mpf", "lambdas": [0.018]}],
  "n_repeats": 3,
  "seed": 2012
})");
  bool ran = run_command(cli + " sweep --spec " + p("spec.json") + " --jobs 1 --out " + p("a.csv")) == 0 &&
             run_command(cli + " sweep --spec " + p("spec.json") + " --jobs 8 --out " + p("b.csv")) == 0;
  for (const char* name : {"m1.json", "m2.json"})
    ran = ran && run_command(cli + " gen-model --kind random-sparse --n-spins 12 --density 0.2 --seed 5 --out " + p(name)) == 0;
  for (const char* name : {"d1.txt", "d2.txt"})
    ran = ran && run_command(cli + " sample --model " + p("m1.json") + " --num 300 --seed 6 --out " + p(name)) == 0;
  for (const char* name : {"e1.json", "e2.json"})
    ran = ran && run_command(cli + " fit --data " + p("d1.txt") + " --objective mpf --lambda 0.02 --out " + p(name)) == 0;
  const bool same = ran && read_text_file(p("a.csv")) == read_text_file(p("b.csv")) &&
                    read_text_file(p("a.csv")) == lib1 &&
                    read_text_file(p("m1.json")) == read_text_file(p("m2.json")) &&
                    read_text_file(p("d1.txt")) == read_text_file(p("d2.txt")) &&
                    read_text_file(p("e1.json")) == read_text_file(p("e2.json"));
  fs::remove_all(dir);
  pass = pass && same;
  detail += std::string("; CLI sweep jobs 1 vs 8 and repeated gen-model/sample/fit ") + (same ? "identical" : "differ");
  return {pass, detail};
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli;
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--cli" && i + 1 < argc) {
      cli = argv[++i];
    } else if (arg == "--only" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::cerr << "usage: acceptance [--cli PATH] [--only N]\n";
      return 1;
    }
  }

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"gradient exactness", gradient_exactness},
      {"prox correctness", prox_correctness},
      {"monotone descent", monotone_descent},
      {"closed-form 1D recoveries", closed_form_recoveries},
      {"oracle equivalence", oracle_equivalence},
      {"protocol reproduction", protocol_reproduction},
      {"support recovery", support_recovery},
      {"determinism", [&] { return determinism(cli); }},
  };

  int failed = 0;
  for (std::size_t c = 0; c < criteria.size(); ++c) {
    if (only != 0 && static_cast<std::size_t>(only) != c + 1) continue;
    Outcome o;
    try {
      o = criteria[c].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c + 1 << " (" << criteria[c].first << "): " << o.detail
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
