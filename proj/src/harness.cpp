#include "ising/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>
#include <stdexcept>
#include <thread>

#include "ising/io.hpp"
#include "ising/rng.hpp"

namespace ising {

// ---------------------------------------------------------------------------
// Recovery metrics

std::optional<double> RecoveryReport::err_total() const {
  if (!err_couplings || !err_biases) return std::nullopt;
  return *err_couplings + *err_biases;
}

namespace {

std::optional<double> relative_error(std::span<const double> truth, std::span<const double> estimate) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double d = estimate[i] - truth[i];
    num += d * d;
    den += truth[i] * truth[i];
  }
  if (den == 0.0) return std::nullopt;
  return std::sqrt(num / den);
}

}  // namespace

RecoveryReport recovery_report(const IsingModel& truth, const IsingModel& estimate,
                               double support_threshold) {
  if (truth.n_spins() != estimate.n_spins()) {
    throw std::invalid_argument("truth has " + std::to_string(truth.n_spins()) +
                                " spins, estimate has " + std::to_string(estimate.n_spins()));
  }
  if (!(support_threshold >= 0.0)) throw std::invalid_argument("support threshold must be >= 0");
  RecoveryReport r;
  r.support_threshold = support_threshold;
  r.err_couplings = relative_error(truth.couplings(), estimate.couplings());
  r.err_biases = relative_error(truth.biases(), estimate.biases());

  std::size_t predicted = 0, actual = 0, hit = 0;
  for (std::size_t p = 0; p < truth.n_pairs(); ++p) {
    const bool pred = std::abs(estimate.couplings()[p]) > support_threshold;
    const bool real = truth.couplings()[p] != 0.0;
    predicted += pred;
    actual += real;
    hit += pred && real;
  }
  r.support_precision = predicted == 0 ? 1.0 : static_cast<double>(hit) / static_cast<double>(predicted);
  r.support_recall = actual == 0 ? 1.0 : static_cast<double>(hit) / static_cast<double>(actual);
  return r;
}

// ---------------------------------------------------------------------------
// Exact enumeration

namespace {

void check_enumerable(std::size_t n, std::size_t limit) {
  if (n == 0 || n > limit) {
    throw std::invalid_argument("exact enumeration supports 1.." + std::to_string(limit) +
                                " spins, got " + std::to_string(n));
  }
}

}  // namespace

std::vector<Spin> configuration_from_index(std::uint64_t index, std::size_t n_spins) {
  std::vector<Spin> x(n_spins);
  for (std::size_t i = 0; i < n_spins; ++i) x[i] = ((index >> i) & 1U) ? Spin{1} : Spin{-1};
  return x;
}

std::vector<double> boltzmann_probabilities(const IsingModel& model) {
  const std::size_t n = model.n_spins();
  check_enumerable(n, kMaxEnumerationSpins);
  const std::uint64_t states = std::uint64_t{1} << n;
  std::vector<double> log_w(states);
  for (std::uint64_t s = 0; s < states; ++s) log_w[s] = -energy(model, configuration_from_index(s, n));
  const double top = *std::max_element(log_w.begin(), log_w.end());
  double z = 0.0;
  for (double& w : log_w) {
    w = std::exp(w - top);
    z += w;
  }
  for (double& w : log_w) w /= z;
  return log_w;
}

SpinDataset sample_exact(const IsingModel& model, std::size_t n_samples, std::uint64_t seed) {
  const auto probs = boltzmann_probabilities(model);
  std::vector<double> cdf(probs.size());
  std::partial_sum(probs.begin(), probs.end(), cdf.begin());
  Rng rng(seed);
  SpinDataset data(model.n_spins());
  for (std::size_t k = 0; k < n_samples; ++k) {
    const double u = rng.uniform() * cdf.back();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    data.push_back(configuration_from_index(static_cast<std::uint64_t>(it - cdf.begin()), model.n_spins()));
  }
  return data;
}

Moments empirical_moments(const SpinDataset& data) {
  if (data.empty()) throw std::invalid_argument("moments of an empty dataset");
  const std::size_t n = data.n_spins();
  Moments m{std::vector<double>(IsingModel::pair_count(n), 0.0), std::vector<double>(n, 0.0)};
  for (std::size_t k = 0; k < data.size(); ++k) {
    const auto x = data[k];
    std::size_t p = 0;
    for (std::size_t i = 0; i < n; ++i) {
      m.single[i] += x[i];
      for (std::size_t j = i + 1; j < n; ++j, ++p) m.pair[p] += x[i] * x[j];
    }
  }
  const double inv = 1.0 / static_cast<double>(data.size());
  for (double& v : m.pair) v *= inv;
  for (double& v : m.single) v *= inv;
  return m;
}

Moments model_moments(const IsingModel& model) {
  const std::size_t n = model.n_spins();
  const auto probs = boltzmann_probabilities(model);
  Moments m{std::vector<double>(IsingModel::pair_count(n), 0.0), std::vector<double>(n, 0.0)};
  for (std::uint64_t s = 0; s < probs.size(); ++s) {
    const auto x = configuration_from_index(s, n);
    std::size_t p = 0;
    for (std::size_t i = 0; i < n; ++i) {
      m.single[i] += probs[s] * x[i];
      for (std::size_t j = i + 1; j < n; ++j, ++p) m.pair[p] += probs[s] * x[i] * x[j];
    }
  }
  return m;
}

namespace {

/// Sufficient statistics phi(x) = (x_i x_j for i<j, x_i), as in IsingModel layout.
std::vector<double> statistics(SpinView x) {
  const std::size_t n = x.size();
  std::vector<double> phi;
  phi.reserve(IsingModel::pair_count(n) + n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) phi.push_back(x[i] * x[j]);
  for (std::size_t i = 0; i < n; ++i) phi.push_back(x[i]);
  return phi;
}

IsingModel model_from_parameters(std::size_t n, const std::vector<double>& theta) {
  const std::size_t pairs = IsingModel::pair_count(n);
  return IsingModel(n, std::vector<double>(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(pairs)),
                    std::vector<double>(theta.begin() + static_cast<std::ptrdiff_t>(pairs), theta.end()));
}

struct LogLikelihood {
  double value;                 // mean log-likelihood
  std::vector<double> grad;     // empirical - model statistics
  std::vector<double> cov;      // model covariance of statistics (P x P)
};

LogLikelihood log_likelihood(std::size_t n, const std::vector<double>& theta,
                             const std::vector<double>& empirical, bool with_curvature) {
  const std::size_t dim = theta.size();
  const std::uint64_t states = std::uint64_t{1} << n;
  std::vector<std::vector<double>> phis(states);
  std::vector<double> score(states);
  for (std::uint64_t s = 0; s < states; ++s) {
    phis[s] = statistics(configuration_from_index(s, n));
    score[s] = std::inner_product(theta.begin(), theta.end(), phis[s].begin(), 0.0);
  }
  const double top = *std::max_element(score.begin(), score.end());
  double z = 0.0;
  for (double& w : score) {
    w = std::exp(w - top);
    z += w;
  }
  LogLikelihood ll;
  ll.value = std::inner_product(theta.begin(), theta.end(), empirical.begin(), 0.0) - (top + std::log(z));
  std::vector<double> mean(dim, 0.0);
  for (std::uint64_t s = 0; s < states; ++s)
    for (std::size_t a = 0; a < dim; ++a) mean[a] += score[s] / z * phis[s][a];
  ll.grad.resize(dim);
  for (std::size_t a = 0; a < dim; ++a) ll.grad[a] = empirical[a] - mean[a];
  if (with_curvature) {
    ll.cov.assign(dim * dim, 0.0);
    for (std::uint64_t s = 0; s < states; ++s) {
      const double p = score[s] / z;
      for (std::size_t a = 0; a < dim; ++a)
        for (std::size_t b = 0; b < dim; ++b)
          ll.cov[a * dim + b] += p * (phis[s][a] - mean[a]) * (phis[s][b] - mean[b]);
    }
  }
  return ll;
}

/// Solves (A + damping I) x = b by Cholesky; false if not positive definite.
bool cholesky_solve(std::vector<double> a, std::size_t dim, double damping, const std::vector<double>& b,
                    std::vector<double>& x) {
  for (std::size_t i = 0; i < dim; ++i) a[i * dim + i] += damping;
  for (std::size_t j = 0; j < dim; ++j) {
    double d = a[j * dim + j];
    for (std::size_t k = 0; k < j; ++k) d -= a[j * dim + k] * a[j * dim + k];
    if (!(d > 0.0)) return false;
    d = std::sqrt(d);
    a[j * dim + j] = d;
    for (std::size_t i = j + 1; i < dim; ++i) {
      double s = a[i * dim + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * dim + k] * a[j * dim + k];
      a[i * dim + j] = s / d;
    }
  }
  x = b;
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t k = 0; k < i; ++k) x[i] -= a[i * dim + k] * x[k];
    x[i] /= a[i * dim + i];
  }
  for (std::size_t i = dim; i-- > 0;) {
    for (std::size_t k = i + 1; k < dim; ++k) x[i] -= a[k * dim + i] * x[k];
    x[i] /= a[i * dim + i];
  }
  return true;
}

double norm2(const std::vector<double>& v) {
  return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

}  // namespace

IsingModel exact_mle_oracle(const SpinDataset& data, double gradient_tolerance) {
  const std::size_t n = data.n_spins();
  check_enumerable(n, kMaxMleSpins);
  if (data.empty()) throw std::invalid_argument("MLE of an empty dataset");
  const Moments m = empirical_moments(data);
  std::vector<double> empirical = m.pair;
  empirical.insert(empirical.end(), m.single.begin(), m.single.end());
  const std::size_t dim = empirical.size();

  std::vector<double> theta(dim, 0.0);
  constexpr int kMaxIterations = 500;
  for (int it = 0; it < kMaxIterations; ++it) {
    const LogLikelihood ll = log_likelihood(n, theta, empirical, true);
    if (norm2(ll.grad) < gradient_tolerance) return model_from_parameters(n, theta);

    std::vector<double> step;
    double damping = 0.0;
    while (!cholesky_solve(ll.cov, dim, damping, ll.grad, step)) damping = damping == 0.0 ? 1e-10 : damping * 10.0;

    // Backtracking on the (concave) log-likelihood.
    const double slope = std::inner_product(step.begin(), step.end(), ll.grad.begin(), 0.0);
    double alpha = 1.0;
    std::vector<double> trial(dim);
    for (;;) {
      for (std::size_t a = 0; a < dim; ++a) trial[a] = theta[a] + alpha * step[a];
      const double v = log_likelihood(n, trial, empirical, false).value;
      if (v >= ll.value + 1e-4 * alpha * slope || alpha < 1e-12) break;
      alpha *= 0.5;
    }
    if (alpha < 1e-12) break;
    theta = trial;
  }
  const LogLikelihood ll = log_likelihood(n, theta, empirical, false);
  if (norm2(ll.grad) < gradient_tolerance) return model_from_parameters(n, theta);
  throw std::runtime_error("exact MLE did not reach gradient norm " + std::to_string(gradient_tolerance) +
                           " (data may lie on the boundary of the moment polytope)");
}

// ---------------------------------------------------------------------------
// Sweeps

void SweepSpec::validate() const {
  truth.validate();
  if (data_sizes.empty()) throw std::invalid_argument("sweep needs at least one data size");
  for (auto d : data_sizes)
    if (d == 0) throw std::invalid_argument("data sizes must be positive");
  if (arms.empty()) throw std::invalid_argument("sweep needs at least one objective");
  for (const auto& arm : arms) {
    if (arm.lambdas.empty()) throw std::invalid_argument("sweep needs at least one lambda per objective");
    for (double l : arm.lambdas)
      if (!(std::isfinite(l) && l >= 0.0)) throw std::invalid_argument("lambdas must be finite and >= 0");
    arm.fit.validate();
    if (arm.fit.initial_model) throw std::invalid_argument("sweep fits always start from zero");
  }
  if (n_repeats < 1) throw std::invalid_argument("n_repeats must be >= 1");
  if (sampler.thinning_sweeps < 1) throw std::invalid_argument("thinning_sweeps must be >= 1");
  if (!(support_threshold >= 0.0)) throw std::invalid_argument("support_threshold must be >= 0");
}

RepeatSeeds repeat_seeds(std::uint64_t sweep_seed, std::size_t repeat) {
  const std::uint64_t base = derive_seed(sweep_seed, repeat);
  return {derive_seed(base, stream::kTruth), derive_seed(base, stream::kSampler)};
}

namespace {

/// Runs body(0..count-1) on up to `jobs` threads. Each index is claimed once.
void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(jobs, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) body(i);
    });
  }
}

Summary summarize(const std::vector<double>& values) {
  Summary s;
  s.count = values.size();
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stderr_ = std::sqrt(ss / static_cast<double>(values.size() - 1) / static_cast<double>(values.size()));
  }
  return s;
}

struct RepeatData {
  IsingModel truth;
  SpinDataset data;
};

}  // namespace

SweepTable run_sweep(const SweepSpec& spec, const SweepOptions& options) {
  spec.validate();
  const std::size_t max_d = *std::max_element(spec.data_sizes.begin(), spec.data_sizes.end());

  std::vector<RepeatData> repeats(spec.n_repeats);
  parallel_for(spec.n_repeats, options.jobs, [&](std::size_t r) {
    const RepeatSeeds seeds = repeat_seeds(spec.seed, r);
    GroundTruthSpec truth_spec = spec.truth;
    truth_spec.seed = seeds.truth;
    SamplerConfig sampler = spec.sampler;
    sampler.n_samples = max_d;
    sampler.seed = seeds.sampler;
    repeats[r].truth = generate_truth(truth_spec);
    repeats[r].data = sample(repeats[r].truth, sampler);
  });

  SweepTable table;
  for (std::size_t r = 0; r < spec.n_repeats; ++r)
    for (std::size_t a = 0; a < spec.arms.size(); ++a)
      for (std::size_t d : spec.data_sizes)
        for (double lambda : spec.arms[a].lambdas) {
          SweepRow row;
          row.repeat = r;
          row.arm = a;
          row.objective = spec.arms[a].objective.type;
          row.truth_kind = spec.truth.kind;
          row.n_spins = repeats[r].truth.n_spins();
          row.d = d;
          row.lambda = lambda;
          table.rows.push_back(row);
        }

  parallel_for(table.rows.size(), options.jobs, [&](std::size_t idx) {
    SweepRow& row = table.rows[idx];
    const auto& arm = spec.arms[row.arm];
    const auto& rep = repeats[row.repeat];
    FitConfig cfg = arm.fit;
    cfg.regularization = RegularizationConfig::uniform(row.lambda);
    cfg.reduction = {true, 1};
    const auto start = std::chrono::steady_clock::now();
    try {
      const FitResult fr = fit(arm.objective, rep.data.prefix(row.d), cfg);
      row.report = recovery_report(rep.truth, fr.model, spec.support_threshold);
      row.iterations = fr.iterations_run;
      row.converged = fr.converged;
      row.final_objective = fr.final_objective();
      row.overflow_warnings = fr.overflow_warnings;
      row.estimate_l1 = l1_penalty(fr.model, RegularizationConfig::uniform(1.0));
      double se = 0.0, st = 0.0;
      std::size_t support = 0;
      for (std::size_t p = 0; p < rep.truth.n_pairs(); ++p) {
        if (rep.truth.couplings()[p] == 0.0) continue;
        se += std::abs(fr.model.couplings()[p]);
        st += std::abs(rep.truth.couplings()[p]);
        ++support;
      }
      if (support > 0) {
        row.mean_abs_on_support_estimate = se / static_cast<double>(support);
        row.mean_abs_on_support_truth = st / static_cast<double>(support);
      }
    } catch (const std::exception& e) {
      row.error = e.what();
      if (row.error.empty()) row.error = "fit failed";
    }
    if (options.record_timing) {
      row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
  });

  for (std::size_t a = 0; a < spec.arms.size(); ++a)
    for (std::size_t d : spec.data_sizes)
      for (double lambda : spec.arms[a].lambdas) {
        SweepAggregate agg;
        agg.arm = a;
        agg.objective = spec.arms[a].objective.type;
        agg.truth_kind = spec.truth.kind;
        agg.n_spins = spec.truth.resolved_n_spins();
        agg.d = d;
        agg.lambda = lambda;
        std::vector<double> ej, eh, et, pr, rc, it, cv, fo, sec;
        for (const auto& row : table.rows) {
          if (row.arm != a || row.d != d || row.lambda != lambda) continue;
          if (row.failed()) {
            ++agg.n_failed;
            continue;
          }
          if (row.report.err_couplings) ej.push_back(*row.report.err_couplings);
          if (row.report.err_biases) eh.push_back(*row.report.err_biases);
          if (auto t = row.report.err_total()) et.push_back(*t);
          pr.push_back(row.report.support_precision);
          rc.push_back(row.report.support_recall);
          it.push_back(static_cast<double>(row.iterations));
          cv.push_back(row.converged ? 1.0 : 0.0);
          fo.push_back(row.final_objective);
          if (row.seconds) sec.push_back(*row.seconds);
        }
        agg.err_j = summarize(ej);
        agg.err_h = summarize(eh);
        agg.err_total = summarize(et);
        agg.support_precision = summarize(pr);
        agg.support_recall = summarize(rc);
        agg.iterations = summarize(it);
        agg.converged = summarize(cv);
        agg.final_objective = summarize(fo);
        agg.seconds = summarize(sec);
        table.aggregates.push_back(agg);
      }
  return table;
}

namespace {

std::string csv_number(const std::optional<double>& v) { return v ? format_number(*v) : "NA"; }
std::string csv_summary(const Summary& s) { return s.count ? format_number(s.mean) : "NA"; }

}  // namespace

std::string SweepTable::to_csv() const {
  std::string out(kSweepCsvHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += std::to_string(r.repeat) + ',' + to_string(r.objective) + ',' + to_string(r.truth_kind) + ',' +
           std::to_string(r.n_spins) + ',' + std::to_string(r.d) + ',' + format_number(r.lambda) + ',';
    if (r.failed()) {
      out += "NA,NA,NA,NA,NA,NA,failed,NA," + csv_number(r.seconds) + '\n';
      continue;
    }
    out += csv_number(r.report.err_couplings) + ',' + csv_number(r.report.err_biases) + ',' +
           csv_number(r.report.err_total()) + ',' + format_number(r.report.support_precision) + ',' +
           format_number(r.report.support_recall) + ',' + std::to_string(r.iterations) + ',' +
           (r.converged ? "1" : "0") + ',' + format_number(r.final_objective) + ',' + csv_number(r.seconds) +
           '\n';
  }
  for (const auto& a : aggregates) {
    out += "mean," + to_string(a.objective) + ',' + to_string(a.truth_kind) + ',' + std::to_string(a.n_spins) +
           ',' + std::to_string(a.d) + ',' + format_number(a.lambda) + ',' + csv_summary(a.err_j) + ',' +
           csv_summary(a.err_h) + ',' + csv_summary(a.err_total) + ',' + csv_summary(a.support_precision) +
           ',' + csv_summary(a.support_recall) + ',' + csv_summary(a.iterations) + ',' +
           csv_summary(a.converged) + ',' + csv_summary(a.final_objective) + ',' + csv_summary(a.seconds) +
           '\n';
  }
  return out;
}

}  // namespace ising
