// sparse-ising: generate Ising ground truths, sample them, fit sparse
// estimates and score recoveries.
//
// Exit codes: 0 success, 1 usage error, 2 runtime failure.

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ising/harness.hpp"
#include "ising/io.hpp"
#include "ising/objectives.hpp"
#include "ising/prox.hpp"
#include "ising/synthgen.hpp"

namespace {

using namespace ising;

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

/// Bad flag values or inconsistent inputs; maps to exit code 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GenModelArgs {
  std::string kind;
  std::optional<std::size_t> n_linear;
  std::optional<std::size_t> n_spins;
  std::optional<double> density;
  std::uint64_t seed = 0;
  std::string out;
  bool dense = false;
};

struct SampleArgs {
  std::string model;
  std::size_t num = 0;
  std::size_t burn_in = 1000;
  std::size_t thin = 10;
  std::string rule = "heat-bath";
  std::uint64_t seed = 0;
  std::string out;
};

struct FitArgs {
  std::string data;
  std::string objective;
  std::optional<double> lambda;
  std::optional<double> lambda_j;
  std::optional<double> lambda_h;
  std::optional<std::size_t> max_iter;
  double tol = 1e-6;
  std::string fista = "off";
  bool deterministic = false;
  unsigned threads = 1;
  bool exclude_data_neighbors = false;
  double lipschitz_init = 1.0;
  double backtrack_factor = 2.0;
  std::string init;
  std::string out;
  std::string trace_out;
  bool dense = false;
};

struct EvalArgs {
  std::string truth;
  std::string estimate;
  double threshold = kDefaultSupportThreshold;
  std::string csv;
};

struct SweepArgs {
  std::string spec;
  std::string out;
  unsigned jobs = 1;
  bool timing = false;
};

int run_gen_model(const GenModelArgs& a) {
  GroundTruthSpec spec;
  try {
    spec.kind = truth_kind_from_string(a.kind);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  spec.seed = a.seed;
  if (spec.kind == TruthKind::SquareLattice) {
    if (!a.n_linear) throw UsageError("--kind square-lattice requires --n-linear");
    if (a.n_spins || a.density) throw UsageError("--n-spins/--density apply to random-sparse only");
    spec.linear_size = *a.n_linear;
  } else {
    if (!a.n_spins || !a.density) throw UsageError("--kind random-sparse requires --n-spins and --density");
    if (a.n_linear) throw UsageError("--n-linear applies to square-lattice only");
    spec.n_spins = *a.n_spins;
    spec.density = *a.density;
  }
  IsingModel model;
  try {
    model = generate_truth(spec);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  write_model(a.out, model, a.dense ? CouplingListing::Dense : CouplingListing::Sparse);
  std::size_t nonzero = 0;
  for (double k : model.couplings()) nonzero += k != 0.0;
  std::cout << "n_spins=" << model.n_spins() << " couplings=" << nonzero << " wrote " << a.out << "\n";
  return 0;
}

int run_sample(const SampleArgs& a) {
  const IsingModel model = read_model(a.model);
  SamplerConfig cfg;
  cfg.n_samples = a.num;
  cfg.burn_in_sweeps = a.burn_in;
  cfg.thinning_sweeps = a.thin;
  cfg.seed = a.seed;
  try {
    cfg.update_rule = update_rule_from_string(a.rule);
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const SpinDataset data = sample(model, cfg);
  write_dataset(a.out, data, a.seed);
  std::cout << "n_spins=" << data.n_spins() << " d=" << data.size() << " wrote " << a.out << "\n";
  return 0;
}

int run_fit(const FitArgs& a) {
  ObjectiveKind kind;
  try {
    kind.type = objective_type_from_string(a.objective);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  kind.mpf_exclude_data_neighbors = a.exclude_data_neighbors;
  if (a.exclude_data_neighbors && kind.type != ObjectiveType::MinimumProbabilityFlow) {
    throw UsageError("--exclude-data-neighbors applies to --objective mpf only");
  }

  FitConfig cfg = FitConfig::defaults_for(kind.type);
  const double lambda = a.lambda.value_or(0.0);
  cfg.regularization = {a.lambda_j.value_or(lambda), a.lambda_h.value_or(lambda)};
  if (a.max_iter) cfg.max_iterations = *a.max_iter;
  cfg.tolerance = a.tol;
  cfg.accelerated = a.fista == "on";
  cfg.lipschitz_init = a.lipschitz_init;
  cfg.backtrack_factor = a.backtrack_factor;
  cfg.reduction = {a.deterministic || a.threads <= 1, a.threads};
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  const DatasetFile df = read_dataset(a.data);
  if (!a.init.empty()) {
    IsingModel init = read_model(a.init);
    if (init.n_spins() != df.data.n_spins()) throw UsageError("--init model size differs from the data");
    cfg.initial_model = std::move(init);
  }

  const FitResult result = fit(kind, df.data, cfg);
  write_model(a.out, result.model, a.dense ? CouplingListing::Dense : CouplingListing::Sparse);
  if (!a.trace_out.empty()) {
    std::string csv = "iteration,objective,lipschitz_couplings,lipschitz_biases,max_change\n";
    for (std::size_t t = 0; t < result.trace.size(); ++t) {
      const auto& r = result.trace[t];
      csv += std::to_string(t + 1) + ',' + format_number(r.objective) + ',' + format_number(r.lipschitz_couplings) +
             ',' + format_number(r.lipschitz_biases) + ',' + format_number(r.max_change) + '\n';
    }
    write_text_file(a.trace_out, csv);
  }
  std::cout << "objective=" << to_string(kind.type) << " lambda_j=" << format_number(cfg.regularization.lambda_couplings)
            << " lambda_h=" << format_number(cfg.regularization.lambda_biases) << "\n"
            << "final_objective=" << format_number(result.final_objective()) << "\n"
            << "iterations=" << result.iterations_run << "\n"
            << "converged=" << (result.converged ? "true" : "false") << "\n";
  if (result.overflow_warnings > 0) {
    std::cerr << "warning: " << result.overflow_warnings << " MPF exponents were clamped\n";
  }
  return 0;
}

int run_eval(const EvalArgs& a) {
  const IsingModel truth = read_model(a.truth);
  const IsingModel estimate = read_model(a.estimate);
  if (truth.n_spins() != estimate.n_spins()) {
    throw UsageError("truth has " + std::to_string(truth.n_spins()) + " spins, estimate has " +
                     std::to_string(estimate.n_spins()));
  }
  if (!(a.threshold >= 0.0)) throw UsageError("--threshold must be >= 0");
  const RecoveryReport r = recovery_report(truth, estimate, a.threshold);
  auto num = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string("NA"); };
  const std::string row = num(r.err_couplings) + ',' + num(r.err_biases) + ',' + num(r.err_total()) + ',' +
                          format_number(r.support_precision) + ',' + format_number(r.support_recall) + ',' +
                          format_number(r.support_threshold);
  std::cout << "err_j=" << num(r.err_couplings) << "\n"
            << "err_h=" << num(r.err_biases) << "\n"
            << "err_total=" << num(r.err_total()) << "\n"
            << "support_precision=" << format_number(r.support_precision) << "\n"
            << "support_recall=" << format_number(r.support_recall) << "\n";
  if (!a.csv.empty()) {
    write_text_file(a.csv, "err_j,err_h,err_total,support_precision,support_recall,support_threshold\n" + row + "\n");
  }
  return 0;
}

int run_sweep_command(const SweepArgs& a) {
  SweepSpec spec;
  try {
    spec = sweep_spec_from_json(read_text_file(a.spec));
  } catch (const FormatError& e) {
    throw UsageError(e.what());
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (a.jobs == 0) throw UsageError("--jobs must be >= 1");
  const SweepTable table = run_sweep(spec, {a.jobs, a.timing});
  write_text_file(a.out, table.to_csv());

  std::size_t failed = 0;
  for (const auto& r : table.rows) failed += r.failed();
  std::cout << "# lambda applied as lambda_J = lambda_h; one sample per repeat, fits use its prefixes\n";
  for (const auto& g : table.aggregates) {
    std::cout << to_string(g.objective) << " d=" << g.d << " lambda=" << format_number(g.lambda)
              << " err_total=" << (g.err_total.count ? format_number(g.err_total.mean) : "NA")
              << " +- " << format_number(g.err_total.stderr_) << " (n=" << g.err_total.count << ")\n";
  }
  if (failed > 0) std::cerr << "warning: " << failed << " fits failed (marked in the table)\n";
  std::cout << "wrote " << a.out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse Ising model recovery: L1-regularized pseudo-likelihood and minimum probability flow"};
  app.require_subcommand(1);

  GenModelArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-model", "Generate a ground-truth model");
  gen_cmd->add_option("--kind", gen.kind, "square-lattice or random-sparse")->required();
  gen_cmd->add_option("--n-linear", gen.n_linear, "Lattice side length (square-lattice)");
  gen_cmd->add_option("--n-spins", gen.n_spins, "Number of spins (random-sparse)");
  gen_cmd->add_option("--density", gen.density, "Fraction of pairs coupled (random-sparse)");
  gen_cmd->add_option("--seed", gen.seed, "Random seed")->required();
  gen_cmd->add_option("--out", gen.out, "Output model file")->required();
  gen_cmd->add_flag("--dense", gen.dense, "List zero couplings too");

  SampleArgs smp;
  auto* smp_cmd = app.add_subcommand("sample", "Draw configurations by MCMC");
  smp_cmd->add_option("--model", smp.model, "Model file")->required();
  smp_cmd->add_option("--num", smp.num, "Number of configurations")->required()->check(CLI::PositiveNumber);
  smp_cmd->add_option("--burn-in", smp.burn_in, "Sweeps discarded before recording")->capture_default_str();
  smp_cmd->add_option("--thin", smp.thin, "Sweeps between recorded configurations")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  smp_cmd->add_option("--rule", smp.rule, "heat-bath or metropolis")->capture_default_str();
  smp_cmd->add_option("--seed", smp.seed, "Random seed")->required();
  smp_cmd->add_option("--out", smp.out, "Output dataset file")->required();

  FitArgs ft;
  auto* fit_cmd = app.add_subcommand("fit", "Fit an L1-regularized estimate");
  fit_cmd->add_option("--data", ft.data, "Dataset file")->required();
  fit_cmd->add_option("--objective", ft.objective, "pl or mpf")->required();
  fit_cmd->add_option("--lambda", ft.lambda, "Sets both lambda_J and lambda_h")->check(CLI::NonNegativeNumber);
  fit_cmd->add_option("--lambda-j", ft.lambda_j, "Coupling penalty (overrides --lambda)")->check(CLI::NonNegativeNumber);
  fit_cmd->add_option("--lambda-h", ft.lambda_h, "Bias penalty (overrides --lambda)")->check(CLI::NonNegativeNumber);
  fit_cmd->add_option("--max-iter", ft.max_iter, "Iteration cap (default 200 pl, 50 mpf)")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--tol", ft.tol, "Stop when max parameter change is below this")->capture_default_str();
  fit_cmd->add_option("--fista", ft.fista, "Accelerated updates: on or off")
      ->capture_default_str()
      ->check(CLI::IsMember({"on", "off"}));
  fit_cmd->add_flag("--deterministic", ft.deterministic, "Fixed-order reduction for any --threads");
  fit_cmd->add_option("--threads", ft.threads, "Worker threads for objective evaluation")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  fit_cmd->add_flag("--exclude-data-neighbors", ft.exclude_data_neighbors,
                    "MPF: skip flip neighbours that occur in the data");
  fit_cmd->add_option("--lipschitz-init", ft.lipschitz_init, "Initial Lipschitz guess")->capture_default_str();
  fit_cmd->add_option("--backtrack-factor", ft.backtrack_factor, "Lipschitz growth factor")->capture_default_str();
  fit_cmd->add_option("--init", ft.init, "Warm-start model file");
  fit_cmd->add_option("--out", ft.out, "Output estimate file")->required();
  fit_cmd->add_option("--trace-out", ft.trace_out, "Convergence trace CSV");
  fit_cmd->add_flag("--dense", ft.dense, "List zero couplings too");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Score an estimate against the truth");
  eval_cmd->add_option("--truth", ev.truth, "True model file")->required();
  eval_cmd->add_option("--estimate", ev.estimate, "Estimated model file")->required();
  eval_cmd->add_option("--threshold", ev.threshold, "Support threshold on |K|")->capture_default_str();
  eval_cmd->add_option("--csv", ev.csv, "Also write the report as a CSV row");

  SweepArgs sw;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a recovery sweep over data sizes and lambdas");
  sweep_cmd->add_option("--spec", sw.spec, "Sweep spec JSON")->required();
  sweep_cmd->add_option("--out", sw.out, "Output CSV")->required();
  sweep_cmd->add_option("--jobs", sw.jobs, "Concurrent fits")->capture_default_str()->check(CLI::PositiveNumber);
  sweep_cmd->add_flag("--timing", sw.timing, "Record wall-clock seconds (output then varies run to run)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*gen_cmd) return run_gen_model(gen);
    if (*smp_cmd) return run_sample(smp);
    if (*fit_cmd) return run_fit(ft);
    if (*eval_cmd) return run_eval(ev);
    if (*sweep_cmd) return run_sweep_command(sw);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NonConvergenceError& e) {
    std::cerr << "error: fit did not converge: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
