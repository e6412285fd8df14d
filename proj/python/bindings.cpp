#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/iostream.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "ssmprune/certificates.hpp"
#include "ssmprune/cli.hpp"
#include "ssmprune/energy.hpp"
#include "ssmprune/io.hpp"
#include "ssmprune/synth.hpp"

namespace py = pybind11;
using namespace ssmprune;

namespace {

std::vector<CMatrix> impulse_matrices(const DiagonalLayer& layer, int horizon, Direction dir) {
  std::vector<CMatrix> out;
  for (auto& s : impulse_response(layer, horizon, dir)) out.push_back(std::move(s.H));
  return out;
}

py::tuple cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  std::vector<std::string> full{"ssmprune"};
  full.insert(full.end(), args.begin(), args.end());
  const int code = run_cli(full, out, err);
  return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Energy-based state pruning for diagonal state-space models";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  py::enum_<TimeDomain>(m, "TimeDomain")
      .value("continuous", TimeDomain::continuous)
      .value("discrete", TimeDomain::discrete);
  py::enum_<Direction>(m, "Direction").value("forward", Direction::forward).value("backward", Direction::backward);
  py::enum_<Method>(m, "Method")
      .value("random", Method::random)
      .value("magnitude", Method::magnitude)
      .value("lamp", Method::lamp)
      .value("hinf", Method::hinf)
      .value("last", Method::last)
      .value("aire", Method::aire);
  py::enum_<Scope>(m, "Scope").value("uniform", Scope::uniform).value("global_", Scope::global).value("prefix", Scope::prefix);
  py::enum_<Policy>(m, "Policy")
      .value("uniform_ratio", Policy::uniform_ratio)
      .value("global_raw", Policy::global_raw)
      .value("global_prefix", Policy::global_prefix);
  py::enum_<Structure>(m, "Structure").value("mimo", Structure::mimo).value("multi_siso", Structure::multi_siso);

  py::class_<DiagonalLayer>(m, "DiagonalLayer")
      .def(py::init<>())
      .def_readwrite("name", &DiagonalLayer::name)
      .def_readwrite("lam", &DiagonalLayer::lambda)
      .def_readwrite("B", &DiagonalLayer::B)
      .def_readwrite("C", &DiagonalLayer::C)
      .def_readwrite("C_bwd", &DiagonalLayer::C_bwd)
      .def_readwrite("delta", &DiagonalLayer::delta)
      .def_readwrite("D", &DiagonalLayer::D)
      .def_readwrite("time_domain", &DiagonalLayer::time_domain)
      .def_readwrite("conjugate_pairs", &DiagonalLayer::conjugate_pairs)
      .def_property_readonly("n", &DiagonalLayer::n)
      .def_property_readonly("h", &DiagonalLayer::h)
      .def_property_readonly("bidirectional", &DiagonalLayer::bidirectional);

  py::class_<ModelStack>(m, "ModelStack")
      .def(py::init<>())
      .def_readwrite("layers", &ModelStack::layers)
      .def_readwrite("format_version", &ModelStack::format_version)
      .def_readwrite("approximate", &ModelStack::approximate)
      .def_property_readonly("total_modes", &ModelStack::total_modes);

  py::class_<ModeEnergy>(m, "ModeEnergy")
      .def_readonly("layer", &ModeEnergy::layer)
      .def_readonly("index", &ModeEnergy::index)
      .def_readonly("E", &ModeEnergy::E)
      .def_readonly("alpha", &ModeEnergy::alpha)
      .def_readonly("pole_mag", &ModeEnergy::pole_mag)
      .def_readonly("multiplicity", &ModeEnergy::multiplicity);

  py::class_<PowerEstimate>(m, "PowerEstimate")
      .def_readonly("mean", &PowerEstimate::mean)
      .def_readonly("std_error", &PowerEstimate::std_error)
      .def_readonly("burn_in", &PowerEstimate::burn_in);

  py::class_<LayerScores>(m, "LayerScores")
      .def_readonly("layer", &LayerScores::layer)
      .def_readonly("n", &LayerScores::n)
      .def_readonly("raw", &LayerScores::raw)
      .def_readonly("energy", &LayerScores::energy)
      .def_readonly("order", &LayerScores::order)
      .def_readonly("prefix_sums", &LayerScores::prefix_sums)
      .def_readonly("normalized", &LayerScores::normalized);

  py::class_<ScoreTable>(m, "ScoreTable")
      .def_readonly("method", &ScoreTable::method)
      .def_readonly("scope", &ScoreTable::scope)
      .def_readonly("epsilon", &ScoreTable::epsilon)
      .def_readonly("layers", &ScoreTable::layers);

  py::class_<LayerDecision>(m, "LayerDecision")
      .def_readonly("layer", &LayerDecision::layer)
      .def_readonly("n", &LayerDecision::n)
      .def_readonly("kept", &LayerDecision::kept)
      .def_readonly("pruned", &LayerDecision::pruned);

  py::class_<PruneDecision>(m, "PruneDecision")
      .def_readonly("policy", &PruneDecision::policy)
      .def_readonly("tau", &PruneDecision::tau)
      .def_readonly("achieved_ratio", &PruneDecision::achieved_ratio)
      .def_readonly("layers", &PruneDecision::layers)
      .def_property_readonly("kept_modes", &PruneDecision::kept_modes)
      .def_property_readonly("total_modes", &PruneDecision::total_modes);

  py::class_<CertificateReport>(m, "CertificateReport")
      .def_readonly("layer", &CertificateReport::layer)
      .def_readonly("pruned_members", &CertificateReport::pruned_members)
      .def_readonly("energy_tail", &CertificateReport::energy_tail)
      .def_readonly("rho", &CertificateReport::rho)
      .def_readonly("kappa", &CertificateReport::kappa)
      .def_readonly("bound_sum_roots", &CertificateReport::bound_sum_roots)
      .def_readonly("bound_root_sum", &CertificateReport::bound_root_sum)
      .def_readonly("bound", &CertificateReport::bound)
      .def_readonly("last_style_bound", &CertificateReport::last_style_bound)
      .def_readonly("empirical_hinf", &CertificateReport::empirical_hinf);

  py::class_<LayerDistortion>(m, "LayerDistortion")
      .def_readonly("layer", &LayerDistortion::layer)
      .def_readonly("modal_drop", &LayerDistortion::modal_drop)
      .def_readonly("exact_h2", &LayerDistortion::exact_h2)
      .def_readonly("impulse_rmse", &LayerDistortion::impulse_rmse)
      .def_readonly("empirical_hinf", &LayerDistortion::empirical_hinf);

  py::class_<SweepRow>(m, "SweepRow")
      .def_readonly("ratio", &SweepRow::ratio)
      .def_readonly("achieved_ratio", &SweepRow::achieved_ratio)
      .def_readonly("modal_drop", &SweepRow::modal_drop)
      .def_readonly("exact_h2", &SweepRow::exact_h2)
      .def_readonly("empirical_hinf", &SweepRow::empirical_hinf)
      .def_readonly("bound", &SweepRow::bound)
      .def_readonly("kept_fraction", &SweepRow::kept_fraction);

  // model core
  m.def("validate_layer", &validate_layer);
  m.def("discretize_zoh", py::overload_cast<const DiagonalLayer&>(&discretize_zoh));
  m.def("expand_conjugate_pairs", &expand_conjugate_pairs);
  m.def("impulse_response", &impulse_matrices, py::arg("layer"), py::arg("horizon"),
        py::arg("direction") = Direction::forward);
  m.def(
      "frequency_response",
      [](const DiagonalLayer& layer, const std::vector<double>& omegas, Direction dir) {
        return frequency_response(layer, omegas, dir);
      },
      py::arg("layer"), py::arg("omegas"), py::arg("direction") = Direction::forward);
  m.def("simulate", &simulate, py::arg("layer"), py::arg("u"), py::arg("x0") = std::nullopt,
        py::arg("direction") = Direction::forward);

  // energy
  m.def("mode_energy", &mode_energy);
  m.def("mode_energy_finite", &mode_energy_finite);
  m.def("layer_energy_modal", &layer_energy_modal);
  m.def("layer_energy_exact", py::overload_cast<const DiagonalLayer&>(&layer_energy_exact));
  m.def("white_noise_power", &white_noise_power, py::arg("layer"), py::arg("num_steps"),
        py::arg("num_trials"), py::arg("seed") = 0);

  // scoring and selection
  m.def("magnitude_score", &magnitude_score);
  m.def("hinf_score", &hinf_score);
  m.def("lamp_score", &lamp_score, py::arg("layer"), py::arg("epsilon") = kDefaultEpsilon);
  m.def("last_score", &last_score, py::arg("layer"), py::arg("epsilon") = kDefaultEpsilon);
  m.def("score_table", &score_table, py::arg("stack"), py::arg("method") = Method::aire,
        py::arg("scope") = Scope::prefix, py::arg("epsilon") = kDefaultEpsilon, py::arg("seed") = 0);
  m.def(
      "select",
      [](const ScoreTable& table, std::optional<double> ratio, std::optional<double> threshold,
         int layer_floor) {
        SelectionOptions opts;
        opts.ratio = ratio;
        opts.threshold = threshold;
        opts.layer_floor = layer_floor;
        return select(table, opts);
      },
      py::arg("table"), py::arg("ratio") = std::nullopt, py::arg("threshold") = std::nullopt,
      py::arg("layer_floor") = 0);
  m.def("materialize", &materialize, py::arg("decision"), py::arg("stack"));

  // certificates and evaluation
  m.def("kappa", &kappa);
  m.def(
      "certify",
      [](const ModelStack& stack, const PruneDecision& d, int grid_points) {
        CertifyOptions o;
        o.grid_points = grid_points;
        return certify(stack, d, o);
      },
      py::arg("stack"), py::arg("decision"), py::arg("grid_points") = 0);
  m.def(
      "distortion",
      [](const ModelStack& full, const PruneDecision& d, int horizon, int grid_points) {
        DistortionOptions o;
        o.horizon = horizon;
        o.grid_points = grid_points;
        return distortion(full, d, o);
      },
      py::arg("full"), py::arg("decision"), py::arg("horizon") = 256, py::arg("grid_points") = 0);
  m.def(
      "sweep",
      [](const ModelStack& stack, Method method, Scope scope, const std::vector<double>& ratios,
         std::uint64_t seed) {
        SweepOptions o;
        o.seed = seed;
        return sweep(stack, method, scope, ratios, o);
      },
      py::arg("stack"), py::arg("method"), py::arg("scope"), py::arg("ratios"), py::arg("seed") = 0);

  // io
  m.def(
      "synth",
      [](std::uint64_t seed, int layers, std::vector<int> modes, int channels, double radius_min,
         double radius_max, Structure structure, bool conjugate_pairs, bool bidirectional,
         double coupling_spread) {
        SynthOptions o;
        o.seed = seed;
        o.num_layers = layers;
        o.modes = std::move(modes);
        o.channels = channels;
        o.radius_min = radius_min;
        o.radius_max = radius_max;
        o.structure = structure;
        o.conjugate_pairs = conjugate_pairs;
        o.bidirectional = bidirectional;
        o.coupling_spread = coupling_spread;
        return synth(o);
      },
      py::arg("seed") = 0, py::arg("layers") = 2, py::arg("modes") = std::vector<int>{8},
      py::arg("channels") = 2, py::arg("radius_min") = 0.5, py::arg("radius_max") = 0.95,
      py::arg("structure") = Structure::mimo, py::arg("conjugate_pairs") = false,
      py::arg("bidirectional") = false, py::arg("coupling_spread") = 0.0);
  m.def(
      "load_model",
      [](const fs::path& path, bool discretize) {
        LoadOptions o;
        o.discretize = discretize;
        return load_model(path, o);
      },
      py::arg("path"), py::arg("discretize") = true);
  m.def("save_model", &save_model, py::arg("stack"), py::arg("path"), py::arg("inline_arrays") = false);
  m.def("run_cli", &cli, py::arg("args"),
        "Runs the command-line tool in-process; returns (exit_code, stdout, stderr).");
}
