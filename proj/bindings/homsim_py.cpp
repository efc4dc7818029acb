// Python bindings for the homsim core: wavepacket and coincidence densities,
// Gaussian mode overlaps, trap dynamics, the event-level experiment
// simulator, and the parameter fits.

#include <pybind11/pybind11.h>
#include <pybind11/complex.h>
#include <pybind11/stl.h>

#include "homsim/coincidence_model.hpp"
#include "homsim/constants.hpp"
#include "homsim/experiment_sim.hpp"
#include "homsim/inference.hpp"
#include "homsim/photon_field.hpp"
#include "homsim/spatial_mode.hpp"
#include "homsim/trap_dynamics.hpp"

namespace py = pybind11;
using namespace homsim;

namespace {

py::dict fit_to_dict(const FitResult& fit) {
  py::dict params;
  for (const auto& [key, value] : fit.params) params[key.c_str()] = value;
  py::dict sigmas;
  for (const auto& [key, value] : fit.sigmas) sigmas[key.c_str()] = value;
  py::dict out;
  out["params"] = params;
  out["sigmas"] = sigmas;
  out["chi2"] = fit.chi_squared;
  out["dof"] = fit.degrees_of_freedom;
  out["converged"] = fit.converged;
  out["at_boundary"] = fit.at_boundary;
  return out;
}

std::vector<PeakSample> samples_from_lists(const std::vector<double>& tau,
                                           const std::vector<double>& value,
                                           const std::vector<double>& sigma) {
  if (tau.size() != value.size() || tau.size() != sigma.size()) {
    throw std::invalid_argument("tau, value and sigma must match in length");
  }
  std::vector<PeakSample> samples(tau.size());
  for (std::size_t i = 0; i < tau.size(); ++i) {
    samples[i] = {tau[i], value[i], sigma[i]};
  }
  return samples;
}

} // namespace

PYBIND11_MODULE(_homsim, m) {
  m.doc() = "Two-photon coincidence simulator for independently trapped atoms";

  m.attr("HBAR") = constants::hbar;
  m.attr("K_BOLTZMANN") = constants::k_boltzmann;
  m.attr("NATURAL_DECAY_RATE") = constants::natural_decay_rate;

  // photon field -----------------------------------------------------------
  py::class_<PhotonWavepacket>(m, "PhotonWavepacket")
      .def(py::init([](double decay_rate, double carrier_offset,
                       double emission_time) {
             return PhotonWavepacket{decay_rate, carrier_offset, emission_time};
           }),
           py::arg("decay_rate") = constants::natural_decay_rate,
           py::arg("carrier_offset") = 0.0, py::arg("emission_time") = 0.0)
      .def_readwrite("decay_rate", &PhotonWavepacket::decay_rate)
      .def_readwrite("carrier_offset", &PhotonWavepacket::carrier_offset)
      .def_readwrite("emission_time", &PhotonWavepacket::emission_time)
      .def("squared_norm", &PhotonWavepacket::squared_norm);

  m.def("wavepacket_amplitude", &wavepacket_amplitude, py::arg("wavepacket"),
        py::arg("t"));
  m.def("coincidence_density_closed", &coincidence_density_closed,
        py::arg("tau"), py::arg("k"), py::arg("delta_omega"),
        py::arg("decay_rate") = constants::natural_decay_rate);
  m.def(
      "coincidence_density_integral",
      [](const PhotonWavepacket& a, const PhotonWavepacket& b, double k,
         double tau) { return coincidence_density_integral(a, b, k, tau); },
      py::arg("wp1"), py::arg("wp2"), py::arg("k"), py::arg("tau"));

  // spatial modes -----------------------------------------------------------
  py::class_<GaussianMode>(m, "GaussianMode")
      .def(py::init([](double waist, std::array<double, 3> focus,
                       std::array<double, 3> axis, double wavelength) {
             return GaussianMode{waist, focus, axis, wavelength};
           }),
           py::arg("waist") = 90e-6,
           py::arg("focus") = std::array<double, 3>{0.0, 0.0, 0.0},
           py::arg("axis") = std::array<double, 3>{0.0, 0.0, 1.0},
           py::arg("wavelength") = constants::d2_wavelength)
      .def_readwrite("waist", &GaussianMode::waist)
      .def_readwrite("focus", &GaussianMode::focus)
      .def_readwrite("axis", &GaussianMode::axis)
      .def_readwrite("wavelength", &GaussianMode::wavelength)
      .def("rayleigh_range", &GaussianMode::rayleigh_range)
      .def("divergence", &GaussianMode::divergence);

  m.def("overlap", &overlap, py::arg("mode1"), py::arg("mode2"));
  m.def("scan_ratio", &scan_ratio, py::arg("k_max"), py::arg("waist"),
        py::arg("center"), py::arg("displacement"));

  py::enum_<AlignmentKind>(m, "AlignmentKind")
      .value("WAIST_MISMATCH", AlignmentKind::WaistMismatch)
      .value("TRANSVERSE_OFFSET", AlignmentKind::TransverseOffset)
      .value("FOCAL_SHIFT", AlignmentKind::FocalShift)
      .value("AXIS_TILT", AlignmentKind::AxisTilt);

  m.def(
      "alignment_budget",
      [](const GaussianMode& reference,
         const std::vector<std::pair<AlignmentKind, double>>& errors) {
        std::vector<AlignmentError> list;
        for (const auto& [kind, magnitude] : errors) {
          list.push_back({kind, magnitude});
        }
        const AlignmentBudget budget = alignment_budget(reference, list);
        py::dict out;
        out["factors"] = budget.factors;
        out["product"] = budget.product;
        out["exact"] = budget.exact;
        out["discrepancy"] = budget.discrepancy;
        return out;
      },
      py::arg("reference"), py::arg("errors"));

  m.def(
      "displacement_scan",
      [](const GaussianMode& m1, const GaussianMode& m2,
         const std::vector<double>& offsets) {
        std::vector<std::pair<double, double>> out;
        for (const auto& p : displacement_scan(m1, m2, offsets)) {
          out.emplace_back(p.displacement, p.ratio);
        }
        return out;
      },
      py::arg("mode1"), py::arg("mode2"), py::arg("offsets"));

  // coincidence model -------------------------------------------------------
  m.def(
      "averaged_interference_factor",
      [](double tau, double temperature, double eta, double decay_rate) {
        return averaged_interference_factor(
            tau, BroadeningParams{temperature, eta, decay_rate});
      },
      py::arg("tau"), py::arg("temperature"), py::arg("eta") = 1.0,
      py::arg("decay_rate") = constants::natural_decay_rate);
  m.def(
      "broadened_signal",
      [](double tau, double k, double temperature, double eta,
         double decay_rate) {
        return broadened_signal(
            tau, k, BroadeningParams{temperature, eta, decay_rate});
      },
      py::arg("tau"), py::arg("k"), py::arg("temperature"),
      py::arg("eta") = 1.0,
      py::arg("decay_rate") = constants::natural_decay_rate);
  m.def("peak_ratio", &peak_ratio, py::arg("k"));

  // trap dynamics -----------------------------------------------------------
  py::class_<TrapConfig>(m, "TrapConfig")
      .def(py::init<>())
      .def_readwrite("depth", &TrapConfig::depth)
      .def_readwrite("waist", &TrapConfig::waist)
      .def_readwrite("rayleigh_range", &TrapConfig::rayleigh_range)
      .def("radial_frequency",
           [](const TrapConfig& t, double mass) {
             return t.radial_angular_frequency(mass) / constants::two_pi;
           })
      .def("axial_frequency", [](const TrapConfig& t, double mass) {
        return t.axial_angular_frequency(mass) / constants::two_pi;
      });

  py::class_<EmitterConstants>(m, "EmitterConstants")
      .def(py::init<>())
      .def_readwrite("mass", &EmitterConstants::mass)
      .def_readwrite("photon_wavelength", &EmitterConstants::photon_wavelength)
      .def_readwrite("excitation_probability",
                     &EmitterConstants::excitation_probability)
      .def_readwrite("lifetime", &EmitterConstants::lifetime)
      .def("recoil_energy", &EmitterConstants::recoil_energy);

  py::class_<SequenceConfig>(m, "SequenceConfig")
      .def(py::init<>())
      .def_readwrite("pulse_period", &SequenceConfig::pulse_period)
      .def_readwrite("pulses_per_burst", &SequenceConfig::pulses_per_burst)
      .def_readwrite("cooling_duration", &SequenceConfig::cooling_duration)
      .def_readwrite("bursts_per_load", &SequenceConfig::bursts_per_load)
      .def_readwrite("reload_delay_mean", &SequenceConfig::reload_delay_mean)
      .def_readwrite("retention_after_bursts",
                     &SequenceConfig::retention_after_bursts);

  m.def(
      "lightshift",
      [](const std::array<double, 3>& position, const TrapConfig& trap) {
        return lightshift(position, trap);
      },
      py::arg("position"), py::arg("trap"));

  m.def(
      "lightshift_distribution",
      [](const TrapConfig& trap, const EmitterConstants& emitter,
         const SequenceConfig& seq, double temperature, std::size_t n_atoms,
         std::uint64_t seed, int parallelism) {
        const LightshiftDistribution dist = lightshift_distribution(
            trap, emitter, seq, temperature, n_atoms, seed, parallelism);
        py::dict out;
        out["effective_temperature"] = dist.fit.effective_temperature;
        out["fit_converged"] = dist.fit.converged;
        out["initial_temperature"] = dist.measured_initial_temperature;
        out["final_temperature"] = dist.final_temperature;
        out["escaped"] = dist.escaped;
        out["samples"] = dist.deficits.size();
        return out;
      },
      py::arg("trap"), py::arg("emitter"), py::arg("sequence"),
      py::arg("temperature"), py::arg("n_atoms"), py::arg("seed"),
      py::arg("parallelism") = 1);

  // experiment --------------------------------------------------------------
  py::enum_<BeamConfiguration>(m, "BeamConfiguration")
      .value("MIXER", BeamConfiguration::Mixer5050)
      .value("SEPARATOR", BeamConfiguration::Separator);

  py::class_<DetectionConfig>(m, "DetectionConfig")
      .def(py::init<>())
      .def_readwrite("efficiency", &DetectionConfig::efficiency)
      .def_readwrite("bin_width", &DetectionConfig::bin_width)
      .def_readwrite("rebin_factor", &DetectionConfig::rebin_factor)
      .def_readwrite("histogram_range", &DetectionConfig::histogram_range)
      .def_readwrite("background_rate", &DetectionConfig::background_rate)
      .def_readwrite("jitter_sigma", &DetectionConfig::jitter_sigma)
      .def_readwrite("configuration", &DetectionConfig::configuration);

  py::class_<PhysicsModel> physics(m, "PhysicsModel");
  py::enum_<PhysicsModel::Kind>(physics, "Kind")
      .value("ANALYTIC", PhysicsModel::Kind::Analytic)
      .value("TRAP_MONTE_CARLO", PhysicsModel::Kind::TrapMonteCarlo);
  physics.def(py::init<>())
      .def_readwrite("kind", &PhysicsModel::kind)
      .def_readwrite("overlap_k", &PhysicsModel::overlap_k)
      .def_readwrite("temperature", &PhysicsModel::temperature)
      .def_readwrite("shift_factor", &PhysicsModel::shift_factor)
      .def_readwrite("emitter", &PhysicsModel::emitter)
      .def_readwrite("trap", &PhysicsModel::trap);

  py::class_<ExperimentTallies>(m, "ExperimentTallies")
      .def_readonly("pulses", &ExperimentTallies::pulses)
      .def_readonly("emitted", &ExperimentTallies::emitted)
      .def_readonly("detected", &ExperimentTallies::detected)
      .def_readonly("zero_window_pairs", &ExperimentTallies::zero_window_pairs)
      .def_readonly("coincidences", &ExperimentTallies::coincidences)
      .def_readonly("dark_counts", &ExperimentTallies::dark_counts)
      .def_readonly("atom_bursts_lost", &ExperimentTallies::atom_bursts_lost)
      .def_readonly("escapes", &ExperimentTallies::escapes);

  py::class_<CoincidenceHistogram>(m, "CoincidenceHistogram")
      .def_readonly("bin_width", &CoincidenceHistogram::bin_width)
      .def_readonly("start", &CoincidenceHistogram::start)
      .def_readonly("counts", &CoincidenceHistogram::counts)
      .def_readonly("configuration", &CoincidenceHistogram::configuration)
      .def_readonly("total_pulse_cycles",
                    &CoincidenceHistogram::total_pulse_cycles)
      .def_readonly("seed", &CoincidenceHistogram::seed)
      .def_readonly("tallies", &CoincidenceHistogram::tallies)
      .def("bin_centers", [](const CoincidenceHistogram& h) {
        std::vector<double> centers(h.counts.size());
        for (std::size_t i = 0; i < centers.size(); ++i) {
          centers[i] = h.bin_center(i);
        }
        return centers;
      });

  m.def("run_experiment", &run_experiment, py::arg("sequence"),
        py::arg("detection"), py::arg("physics"), py::arg("n_loads"),
        py::arg("seed"), py::arg("parallelism") = 1,
        py::call_guard<py::gil_scoped_release>());
  m.def("rebin", &rebin, py::arg("histogram"), py::arg("factor"));

  py::class_<NormalizedSignal>(m, "NormalizedSignal")
      .def_readonly("tau", &NormalizedSignal::tau)
      .def_readonly("value", &NormalizedSignal::value)
      .def_readonly("sigma", &NormalizedSignal::sigma)
      .def_readonly("reference_height", &NormalizedSignal::reference_height);

  m.def(
      "normalize",
      [](const CoincidenceHistogram& mixer,
         const CoincidenceHistogram& separator, double period,
         double decay_rate, const std::string& reference, double window,
         std::uint32_t pulses_per_burst) {
        return normalize(mixer, separator, period, decay_rate,
                         reference == "height" ? PeakMode::Height
                                               : PeakMode::Area,
                         window, pulses_per_burst);
      },
      py::arg("mixer"), py::arg("separator"), py::arg("period") = 200e-9,
      py::arg("decay_rate") = constants::natural_decay_rate,
      py::arg("reference") = "area", py::arg("window") = 60e-9,
      py::arg("pulses_per_burst") = 575);
  m.def(
      "peak_ratio_estimate",
      [](const CoincidenceHistogram& mixer,
         const CoincidenceHistogram& separator, const std::string& mode,
         double period, double window) {
        const RatioEstimate est = peak_ratio_estimate(
            mixer, separator,
            mode == "height" ? PeakMode::Height : PeakMode::Area, period,
            window);
        return std::make_pair(est.value, est.sigma);
      },
      py::arg("mixer"), py::arg("separator"), py::arg("mode") = "area",
      py::arg("period") = 200e-9, py::arg("window") = 60e-9);
  m.def(
      "extract_zero_peak",
      [](const NormalizedSignal& signal, double window, double decay_rate,
         double period, py::object known_background) {
        std::optional<double> known;
        if (!known_background.is_none()) {
          known = known_background.cast<double>();
        }
        std::vector<std::tuple<double, double, double>> out;
        for (const auto& s : extract_zero_peak(signal, window, decay_rate,
                                               period, known)) {
          out.emplace_back(s.tau, s.value, s.sigma);
        }
        return out;
      },
      py::arg("signal"), py::arg("window") = 100e-9,
      py::arg("decay_rate") = constants::natural_decay_rate,
      py::arg("period") = 200e-9, py::arg("known_background") = py::none());

  // fits ----------------------------------------------------------------
  m.def(
      "fit_zero_peak",
      [](const std::vector<double>& tau, const std::vector<double>& value,
         const std::vector<double>& sigma, double decay_rate, double eta,
         py::object amplitude, double bin_width) {
        std::optional<double> fixed = 0.5;
        if (amplitude.is_none()) {
          fixed.reset();
        } else {
          fixed = amplitude.cast<double>();
        }
        return fit_to_dict(fit_zero_peak(samples_from_lists(tau, value, sigma),
                                         decay_rate, eta, fixed, bin_width));
      },
      py::arg("tau"), py::arg("value"), py::arg("sigma"),
      py::arg("decay_rate") = constants::natural_decay_rate,
      py::arg("eta") = 1.0, py::arg("amplitude") = py::float_(0.5),
      py::arg("bin_width") = 0.0);
  m.def(
      "fit_displacement_scan",
      [](const std::vector<double>& displacement,
         const std::vector<double>& ratio, const std::vector<double>& sigma,
         double waist) {
        if (displacement.size() != ratio.size() ||
            displacement.size() != sigma.size()) {
          throw std::invalid_argument("lists must match in length");
        }
        std::vector<RatioPoint> points(displacement.size());
        for (std::size_t i = 0; i < points.size(); ++i) {
          points[i] = {displacement[i], ratio[i], sigma[i]};
        }
        return fit_to_dict(fit_displacement_scan(points, waist));
      },
      py::arg("displacement"), py::arg("ratio"), py::arg("sigma"),
      py::arg("waist"));
}
