#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ising/harness.hpp"
#include "ising/io.hpp"
#include "ising/model.hpp"
#include "ising/objectives.hpp"
#include "ising/prox.hpp"
#include "ising/synthgen.hpp"

namespace py = pybind11;
using namespace py::literals;
using namespace ising;

namespace {

py::array_t<double> to_numpy(std::span<const double> v) {
  py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

std::vector<double> from_numpy(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 1) throw std::invalid_argument("expected a 1-D array");
  return std::vector<double>(a.data(), a.data() + a.size());
}

SpinDataset dataset_from_numpy(const py::array_t<std::int8_t, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2) throw std::invalid_argument("expected a 2-D array of shape (D, N)");
  const auto n = static_cast<std::size_t>(a.shape(1));
  return SpinDataset(n, std::vector<Spin>(a.data(), a.data() + a.size()));
}

py::array_t<std::int8_t> dataset_to_numpy(const SpinDataset& d) {
  py::array_t<std::int8_t> out({static_cast<py::ssize_t>(d.size()), static_cast<py::ssize_t>(d.n_spins())});
  std::copy(d.flat().begin(), d.flat().end(), out.mutable_data());
  return out;
}

std::vector<Spin> spins_from(const py::array_t<std::int8_t, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 1) throw std::invalid_argument("expected a 1-D spin array");
  std::vector<Spin> x(a.data(), a.data() + a.size());
  validate_spins(x);
  return x;
}

py::tuple gradient_tuple(const ObjectiveGradient& g) {
  return py::make_tuple(to_numpy(g.couplings), to_numpy(g.biases));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Sparse Ising model recovery (C++ core)";

  py::class_<IsingModel>(m, "IsingModel")
      .def(py::init<std::size_t>(), "n_spins"_a)
      .def(py::init([](std::size_t n, const py::array_t<double, py::array::c_style | py::array::forcecast>& k,
                       const py::array_t<double, py::array::c_style | py::array::forcecast>& h) {
             return IsingModel(n, from_numpy(k), from_numpy(h));
           }),
           "n_spins"_a, "couplings"_a, "biases"_a)
      .def_property_readonly("n_spins", &IsingModel::n_spins)
      .def_property_readonly("n_pairs", &IsingModel::n_pairs)
      .def_property_readonly("couplings", [](const IsingModel& mdl) { return to_numpy(mdl.couplings()); })
      .def_property_readonly("biases", [](const IsingModel& mdl) { return to_numpy(mdl.biases()); })
      .def("coupling", &IsingModel::coupling, "i"_a, "j"_a)
      .def("set_coupling", &IsingModel::set_coupling, "i"_a, "j"_a, "value"_a)
      .def("set_bias", &IsingModel::set_bias, "i"_a, "value"_a)
      .def("dense_couplings",
           [](const IsingModel& mdl) {
             auto flat = mdl.dense_couplings();
             py::array_t<double> out({static_cast<py::ssize_t>(mdl.n_spins()), static_cast<py::ssize_t>(mdl.n_spins())});
             std::copy(flat.begin(), flat.end(), out.mutable_data());
             return out;
           })
      .def_static("pair_index", &IsingModel::pair_index, "i"_a, "j"_a, "n_spins"_a)
      .def("to_json", [](const IsingModel& mdl, bool dense) {
             return model_to_json(mdl, dense ? CouplingListing::Dense : CouplingListing::Sparse);
           }, "dense"_a = false)
      .def_static("from_json", [](const std::string& s) { return model_from_json(s); })
      .def(py::self == py::self)
      .def("__repr__", [](const IsingModel& mdl) {
        return "<IsingModel n_spins=" + std::to_string(mdl.n_spins()) + ">";
      });

  py::class_<SpinDataset>(m, "SpinDataset")
      .def(py::init(&dataset_from_numpy), "spins"_a)
      .def_property_readonly("n_spins", &SpinDataset::n_spins)
      .def("__len__", &SpinDataset::size)
      .def("to_numpy", &dataset_to_numpy)
      .def("prefix", &SpinDataset::prefix, "d"_a)
      .def("to_text", [](const SpinDataset& d, std::uint64_t seed) { return dataset_to_text(d, seed); }, "seed"_a = 0)
      .def_static("from_text", [](const std::string& s) { return dataset_from_text(s).data; });

  m.def("energy", [](const IsingModel& mdl, const py::array_t<std::int8_t, py::array::c_style | py::array::forcecast>& x) {
    return energy(mdl, spins_from(x));
  }, "model"_a, "x"_a);
  m.def("flip_energy_delta",
        [](const IsingModel& mdl, const py::array_t<std::int8_t, py::array::c_style | py::array::forcecast>& x,
           std::size_t i) { return flip_energy_delta(mdl, spins_from(x), i); },
        "model"_a, "x"_a, "i"_a);
  m.def("local_fields", [](const IsingModel& mdl, const SpinDataset& d) {
    const auto t = local_fields(mdl, d);
    py::array_t<double> out({static_cast<py::ssize_t>(t.rows()), static_cast<py::ssize_t>(t.n_spins())});
    for (std::size_t k = 0; k < t.rows(); ++k)
      for (std::size_t i = 0; i < t.n_spins(); ++i) out.mutable_at(k, i) = t(k, i);
    return out;
  }, "model"_a, "data"_a);

  py::enum_<TruthKind>(m, "TruthKind")
      .value("RandomSparse", TruthKind::RandomSparse)
      .value("SquareLattice", TruthKind::SquareLattice);
  py::class_<GroundTruthSpec>(m, "GroundTruthSpec")
      .def(py::init<>())
      .def_readwrite("kind", &GroundTruthSpec::kind)
      .def_readwrite("linear_size", &GroundTruthSpec::linear_size)
      .def_readwrite("n_spins", &GroundTruthSpec::n_spins)
      .def_readwrite("density", &GroundTruthSpec::density)
      .def_readwrite("seed", &GroundTruthSpec::seed);
  m.def("generate_random_sparse", &generate_random_sparse, "spec"_a);
  m.def("generate_square_lattice", &generate_square_lattice, "spec"_a);
  m.def("generate_truth", &generate_truth, "spec"_a);

  py::enum_<UpdateRule>(m, "UpdateRule")
      .value("HeatBath", UpdateRule::HeatBath)
      .value("Metropolis", UpdateRule::Metropolis);
  py::class_<SamplerConfig>(m, "SamplerConfig")
      .def(py::init<>())
      .def_readwrite("n_samples", &SamplerConfig::n_samples)
      .def_readwrite("burn_in_sweeps", &SamplerConfig::burn_in_sweeps)
      .def_readwrite("thinning_sweeps", &SamplerConfig::thinning_sweeps)
      .def_readwrite("seed", &SamplerConfig::seed)
      .def_readwrite("update_rule", &SamplerConfig::update_rule);
  m.def("sample", &sample, "model"_a, "config"_a, py::call_guard<py::gil_scoped_release>());

  py::enum_<ObjectiveType>(m, "ObjectiveType")
      .value("PseudoLikelihood", ObjectiveType::PseudoLikelihood)
      .value("MinimumProbabilityFlow", ObjectiveType::MinimumProbabilityFlow);
  py::class_<ObjectiveKind>(m, "ObjectiveKind")
      .def(py::init([](ObjectiveType t, bool exclude) { return ObjectiveKind{t, exclude}; }),
           "type"_a = ObjectiveType::PseudoLikelihood, "mpf_exclude_data_neighbors"_a = false)
      .def_readwrite("type", &ObjectiveKind::type)
      .def_readwrite("mpf_exclude_data_neighbors", &ObjectiveKind::mpf_exclude_data_neighbors);

  m.def("pl_value", &pl_value, "model"_a, "data"_a);
  m.def("pl_gradient", [](const IsingModel& mdl, const SpinDataset& d) { return gradient_tuple(pl_gradient(mdl, d)); },
        "model"_a, "data"_a);
  m.def("mpf_value", [](const IsingModel& mdl, const SpinDataset& d, bool exclude) {
    return mpf_value(mdl, d, {ObjectiveType::MinimumProbabilityFlow, exclude});
  }, "model"_a, "data"_a, "exclude_data_neighbors"_a = false);
  m.def("mpf_gradient", [](const IsingModel& mdl, const SpinDataset& d, bool exclude) {
    return gradient_tuple(mpf_gradient(mdl, d, {ObjectiveType::MinimumProbabilityFlow, exclude}));
  }, "model"_a, "data"_a, "exclude_data_neighbors"_a = false);

  m.def("soft_threshold", &soft_threshold, "x"_a, "a"_a);
  m.def("next_beta", &next_beta, "beta"_a);

  py::class_<FitConfig>(m, "FitConfig")
      .def(py::init<>())
      .def_static("defaults_for", &FitConfig::defaults_for, "objective"_a)
      .def_property("lambda_couplings", [](const FitConfig& c) { return c.regularization.lambda_couplings; },
                    [](FitConfig& c, double v) { c.regularization.lambda_couplings = v; })
      .def_property("lambda_biases", [](const FitConfig& c) { return c.regularization.lambda_biases; },
                    [](FitConfig& c, double v) { c.regularization.lambda_biases = v; })
      .def_readwrite("max_iterations", &FitConfig::max_iterations)
      .def_readwrite("tolerance", &FitConfig::tolerance)
      .def_readwrite("accelerated", &FitConfig::accelerated)
      .def_readwrite("lipschitz_init", &FitConfig::lipschitz_init)
      .def_readwrite("backtrack_factor", &FitConfig::backtrack_factor)
      .def_readwrite("lipschitz_decay", &FitConfig::lipschitz_decay)
      .def_readwrite("initial_model", &FitConfig::initial_model);

  py::class_<FitResult>(m, "FitResult")
      .def_readonly("model", &FitResult::model)
      .def_readonly("iterations_run", &FitResult::iterations_run)
      .def_readonly("converged", &FitResult::converged)
      .def_readonly("overflow_warnings", &FitResult::overflow_warnings)
      .def_readonly("initial_objective", &FitResult::initial_objective)
      .def_property_readonly("final_objective", &FitResult::final_objective)
      .def_property_readonly("objective_trace", [](const FitResult& r) {
        std::vector<double> v;
        for (const auto& t : r.trace) v.push_back(t.objective);
        return to_numpy(v);
      });

  py::register_exception<NonConvergenceError>(m, "NonConvergenceError", PyExc_RuntimeError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);

  m.def("fit", [](const ObjectiveKind& kind, const SpinDataset& data, const FitConfig& cfg) {
    return fit(kind, data, cfg);
  }, "objective"_a, "data"_a, "config"_a, py::call_guard<py::gil_scoped_release>());

  py::class_<RecoveryReport>(m, "RecoveryReport")
      .def_readonly("err_couplings", &RecoveryReport::err_couplings)
      .def_readonly("err_biases", &RecoveryReport::err_biases)
      .def_property_readonly("err_total", &RecoveryReport::err_total)
      .def_readonly("support_precision", &RecoveryReport::support_precision)
      .def_readonly("support_recall", &RecoveryReport::support_recall)
      .def_readonly("support_threshold", &RecoveryReport::support_threshold);
  m.def("recovery_report", &recovery_report, "truth"_a, "estimate"_a, "support_threshold"_a = kDefaultSupportThreshold);

  m.def("exact_mle_oracle", &exact_mle_oracle, "data"_a, "gradient_tolerance"_a = 1e-8);
  m.def("sample_exact", &sample_exact, "model"_a, "n_samples"_a, "seed"_a);
  m.def("run_sweep_json", [](const std::string& spec_json, unsigned jobs) {
    const SweepSpec spec = sweep_spec_from_json(spec_json);
    py::gil_scoped_release release;
    return run_sweep(spec, {jobs, false}).to_csv();
  }, "spec_json"_a, "jobs"_a = 1, "Run a sweep described by JSON text and return the CSV table.");
}
