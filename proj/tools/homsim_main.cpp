// homsim command-line interface: simulate the two-atom coincidence
// experiment, compute mode overlaps, fit histograms, and run displacement
// scans. All primary outputs are deterministic functions of (config, seed);
// timestamps are confined to the run manifest.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "homsim/config.hpp"
#include "homsim/errors.hpp"
#include "homsim/experiment_sim.hpp"
#include "homsim/inference.hpp"
#include "homsim/io.hpp"
#include "homsim/spatial_mode.hpp"
#include "homsim/trap_dynamics.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kSeparatorSeedSalt = 0x9E3779B97F4A7C15ull;

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  std::int64_t seed = -1;
  int parallelism = 0;
};

homsim::RunConfig load_config(const CommonOptions& opts) {
  homsim::RunConfig config;
  if (!opts.config_path.empty()) {
    json doc;
    try {
      doc = json::parse(homsim::read_text_file(opts.config_path));
    } catch (const json::exception& e) {
      throw homsim::config_error(std::string("config parse: ") + e.what());
    }
    config = homsim::run_config_from_json(doc);
  }
  if (opts.seed >= 0) {
    config.seed = static_cast<std::uint64_t>(opts.seed);
    config.seed_set = true;
  }
  if (opts.parallelism > 0) config.parallelism = opts.parallelism;
  if (!opts.out_dir.empty()) config.out_dir = opts.out_dir;
  return config;
}

int effective_parallelism(const homsim::RunConfig& config) {
  if (config.parallelism > 0) return config.parallelism;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

void write_manifest(const fs::path& path, const std::string& command,
                    const homsim::RunConfig& config,
                    const std::vector<std::string>& outputs) {
  json manifest;
  manifest["command"] = command;
  manifest["seed"] = config.seed;
  const json echo = homsim::run_config_to_json(config);
  char hash_hex[32];
  std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                static_cast<unsigned long long>(homsim::run_config_hash(config)));
  manifest["config_hash"] = hash_hex;
  manifest["config"] = echo;
  manifest["outputs"] = outputs;
  manifest["created_unix_ms"] =
      std::chrono::duration_cast<std::chrono::milliseconds>(
          std::chrono::system_clock::now().time_since_epoch())
          .count();
  homsim::atomic_write(path, manifest.dump(2) + "\n");
}

json fit_result_json(const homsim::FitResult& fit, bool scan) {
  json out;
  if (scan) {
    out["params"]["K_max"] = fit.params.at("K_max");
    out["params"]["center_um"] = fit.params.at("center") * 1e6;
    out["sigmas"]["K_max"] = fit.sigmas.at("K_max");
    out["sigmas"]["center_um"] = fit.sigmas.at("center") * 1e6;
  } else {
    out["params"]["K"] = fit.params.at("K");
    out["params"]["T_uK"] = fit.params.at("T") * 1e6;
    out["params"]["amplitude"] = fit.params.at("amplitude");
    out["sigmas"]["K"] = fit.sigmas.at("K");
    out["sigmas"]["T_uK"] = fit.sigmas.at("T") * 1e6;
  }
  out["chi2"] = fit.chi_squared;
  out["dof"] = fit.degrees_of_freedom;
  out["converged"] = fit.converged;
  out["at_boundary"] = fit.at_boundary;
  return out;
}

// --- simulate ------------------------------------------------------------

int cmd_simulate(const CommonOptions& common, const std::string& configuration,
                 double k_override, const std::string& temperature_override,
                 double efficiency_override, std::int64_t loads_override,
                 const std::string& mode_override,
                 bool dump_lightshifts, int dump_atoms) {
  homsim::RunConfig config = load_config(common);
  if (!config.seed_set) {
    throw homsim::config_error("simulate requires a seed (--seed or config)");
  }
  if (k_override >= 0.0) config.physics.overlap_k = k_override;
  if (!temperature_override.empty()) {
    config.physics.temperature =
        homsim::parse_quantity(temperature_override, homsim::Unit::Temperature);
  }
  if (efficiency_override >= 0.0) {
    config.detection.efficiency = efficiency_override;
  }
  if (loads_override >= 0) {
    config.n_loads = static_cast<std::uint64_t>(loads_override);
  }
  if (!mode_override.empty()) {
    if (mode_override == "analytic") {
      config.physics.kind = homsim::PhysicsModel::Kind::Analytic;
    } else if (mode_override == "trap_mc") {
      config.physics.kind = homsim::PhysicsModel::Kind::TrapMonteCarlo;
    } else {
      throw homsim::config_error("--mode: expected analytic or trap_mc");
    }
  }
  config.physics.validate();
  config.detection.validate();
  if (config.detection.efficiency == 0.0) {
    std::cerr << "warning: zero detection efficiency, histograms will be empty\n";
  }

  const bool run_mixer = configuration == "mixer" || configuration == "both";
  const bool run_separator =
      configuration == "separator" || configuration == "both";
  if (!run_mixer && !run_separator) {
    throw homsim::config_error("--configuration: expected mixer, separator or both");
  }

  const json echo = homsim::run_config_to_json(config);
  const std::uint64_t hash = homsim::run_config_hash(config);
  const int workers = effective_parallelism(config);
  const fs::path dir = config.out_dir;
  std::vector<std::string> outputs;
  json summary;
  summary["seed"] = config.seed;
  char hash_hex[32];
  std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                static_cast<unsigned long long>(hash));
  summary["config_hash"] = hash_hex;

  homsim::CoincidenceHistogram mixer;
  homsim::CoincidenceHistogram separator;
  if (run_mixer) {
    homsim::DetectionConfig det = config.detection;
    det.configuration = homsim::BeamConfiguration::Mixer5050;
    mixer = homsim::run_experiment(config.sequence, det, config.physics,
                                   config.n_loads, config.seed, workers);
    mixer.config_hash = hash;
    homsim::write_histogram_csv(dir / "mixer.csv", mixer);
    outputs.push_back((dir / "mixer.csv").string());
    summary["mixer"]["zero_window_pairs"] = mixer.tallies.zero_window_pairs;
    summary["mixer"]["coincidences"] = mixer.tallies.coincidences;
  }
  if (run_separator) {
    homsim::DetectionConfig det = config.detection;
    det.configuration = homsim::BeamConfiguration::Separator;
    separator = homsim::run_experiment(config.sequence, det, config.physics,
                                       config.n_loads,
                                       config.seed ^ kSeparatorSeedSalt,
                                       workers);
    separator.config_hash = hash;
    homsim::write_histogram_csv(dir / "separator.csv", separator);
    outputs.push_back((dir / "separator.csv").string());
    summary["separator"]["zero_window_pairs"] =
        separator.tallies.zero_window_pairs;
    summary["separator"]["coincidences"] = separator.tallies.coincidences;
  }
  if (run_mixer && run_separator && separator.total_counts() > 0) {
    const auto mixer_rebinned =
        homsim::rebin(mixer, config.detection.rebin_factor);
    const auto separator_rebinned =
        homsim::rebin(separator, config.detection.rebin_factor);
    const homsim::NormalizedSignal signal = homsim::normalize(
        mixer_rebinned, separator_rebinned, config.sequence.pulse_period,
        1.0 / config.physics.emitter.lifetime, homsim::PeakMode::Area, 60e-9,
        config.sequence.pulses_per_burst);
    homsim::write_normalized_csv(dir / "normalized.csv", signal);
    outputs.push_back((dir / "normalized.csv").string());
    const homsim::RatioEstimate ratio = homsim::peak_ratio_estimate(
        mixer, separator, homsim::PeakMode::Area,
        config.sequence.pulse_period);
    summary["zero_delay_ratio"]["value"] = ratio.value;
    summary["zero_delay_ratio"]["sigma"] = ratio.sigma;
  }

  if (dump_lightshifts) {
    // Debug dump: per-pulse lightshift and position records for a few
    // trajectories (pulse_index, U_over_kB_uK, x, y, z).
    std::string csv = "pulse_index,U_over_kB_uK,x,y,z\n";
    char line[160];
    for (int atom = 0; atom < dump_atoms; ++atom) {
      homsim::Rng rng(config.seed, 0xD00D + atom);
      const homsim::AtomState start = homsim::sample_thermal_state(
          config.physics.trap, config.physics.emitter,
          config.physics.temperature, rng);
      homsim::PulseTrainOptions opts = config.physics.pulse_options;
      opts.record_trajectory = true;
      const homsim::PulseTrainResult res = homsim::simulate_pulse_train(
          start, config.physics.trap, config.physics.emitter, config.sequence,
          rng, opts);
      for (const auto& rec : res.lightshifts) {
        const auto& s = res.trajectory[rec.pulse_index];
        std::snprintf(line, sizeof(line), "%u,%.6g,%.6g,%.6g,%.6g\n",
                      rec.pulse_index,
                      rec.lightshift / homsim::constants::k_boltzmann * 1e6,
                      s.position[0], s.position[1], s.position[2]);
        csv += line;
      }
    }
    homsim::atomic_write(dir / "lightshifts.csv", csv);
    outputs.push_back((dir / "lightshifts.csv").string());
  }

  write_manifest(dir / "run_manifest.json", "simulate", config, outputs);
  summary["outputs"] = outputs;
  std::cout << summary.dump(2) << "\n";
  return 0;
}

// --- overlap -------------------------------------------------------------

int cmd_overlap(double waist, double waist2, double wavelength, double offset,
                double focal_shift, double tilt,
                const std::vector<double>& budget) {
  homsim::GaussianMode reference;
  reference.waist = waist;
  reference.wavelength = wavelength;

  json out;
  if (!budget.empty()) {
    if (budget.size() != 4) {
      throw homsim::config_error(
          "--budget expects 4 fractional magnitudes: waist, offset, focus, tilt");
    }
    const std::vector<homsim::AlignmentError> errors = {
        {homsim::AlignmentKind::WaistMismatch, budget[0]},
        {homsim::AlignmentKind::TransverseOffset, budget[1]},
        {homsim::AlignmentKind::FocalShift, budget[2]},
        {homsim::AlignmentKind::AxisTilt, budget[3]}};
    const homsim::AlignmentBudget result =
        homsim::alignment_budget(reference, errors);
    out["budget"]["waist_mismatch"] = result.factors[0];
    out["budget"]["transverse_offset"] = result.factors[1];
    out["budget"]["focal_shift"] = result.factors[2];
    out["budget"]["axis_tilt"] = result.factors[3];
    out["product"] = result.product;
    out["K"] = result.exact;
    out["product_vs_exact"] = result.discrepancy;
  } else {
    homsim::GaussianMode other = reference;
    other.waist = waist2 > 0.0 ? waist2 : waist;
    other.focus = {offset, 0.0, focal_shift};
    if (tilt != 0.0) {
      other.axis = homsim::normalized({std::sin(tilt), 0.0, std::cos(tilt)});
    }
    out["K"] = homsim::overlap(reference, other);
  }
  out["convention"] =
      "field-amplitude overlap in the mid-plane, curvature and Gouy phase included";
  std::cout << out.dump(2) << "\n";
  return 0;
}

// --- fit -----------------------------------------------------------------

int cmd_fit(const std::string& normalized_path, const std::string& mixer_path,
            const std::string& separator_path, const std::string& scan_path,
            double window, double lifetime, double eta,
            const std::string& amplitude, int rebin_factor, double beam_waist,
            double period, const std::string& bin_width_opt,
            const std::string& out_path, const std::string& curve_path) {
  const double decay_rate = 1.0 / lifetime;
  json out;

  if (!scan_path.empty()) {
    const auto points = homsim::read_scan_csv(scan_path);
    const homsim::FitResult fit =
        homsim::fit_displacement_scan(points, beam_waist);
    out = fit_result_json(fit, true);
  } else {
    homsim::NormalizedSignal signal;
    if (!normalized_path.empty()) {
      signal = homsim::read_normalized_csv(normalized_path);
    } else if (!mixer_path.empty() && !separator_path.empty()) {
      const auto mixer =
          homsim::rebin(homsim::read_histogram_csv(mixer_path), rebin_factor);
      const auto separator = homsim::rebin(
          homsim::read_histogram_csv(separator_path), rebin_factor);
      signal = homsim::normalize(mixer, separator, period);
    } else {
      throw homsim::config_error(
          "fit needs --normalized, --mixer with --separator, or --scan");
    }

    // Inputs wider than the window pass through peak extraction; an
    // already-extracted window is fitted directly.
    std::vector<homsim::PeakSample> samples;
    double max_tau = 0.0;
    for (double tau : signal.tau) max_tau = std::max(max_tau, std::abs(tau));
    if (max_tau > 1.01 * window) {
      samples = homsim::extract_zero_peak(signal, window, decay_rate, period);
    } else {
      for (std::size_t i = 0; i < signal.tau.size(); ++i) {
        samples.push_back({signal.tau[i], signal.value[i], signal.sigma[i]});
      }
    }

    std::optional<double> fixed = 0.5;
    if (amplitude == "free") {
      fixed.reset();
    } else if (!amplitude.empty()) {
      fixed = std::stod(amplitude);
    }
    // Histogram inputs are bin averages: the model must be averaged the
    // same way. "auto" reads the width off the tau grid.
    double bin_width = 0.0;
    if (bin_width_opt == "auto") {
      if (signal.tau.size() >= 2) bin_width = signal.tau[1] - signal.tau[0];
    } else if (!bin_width_opt.empty()) {
      bin_width = homsim::parse_quantity(bin_width_opt, homsim::Unit::Time);
    }
    const homsim::FitResult fit =
        homsim::fit_zero_peak(samples, decay_rate, eta, fixed, bin_width);
    out = fit_result_json(fit, false);

    if (!curve_path.empty()) {
      std::vector<double> tau_ns;
      std::vector<double> value;
      homsim::BroadeningParams params{fit.params.at("T"), eta, decay_rate};
      for (double tau = -window; tau <= window; tau += 0.4e-9) {
        tau_ns.push_back(tau * 1e9);
        value.push_back(fit.params.at("amplitude") *
                        homsim::broadened_signal(tau, fit.params.at("K"),
                                                 params));
      }
      homsim::atomic_write(curve_path, homsim::curve_to_csv(tau_ns, value));
    }
  }

  const std::string text = out.dump(2);
  if (!out_path.empty()) homsim::atomic_write(out_path, text + "\n");
  std::cout << text << "\n";
  return out["converged"].get<bool>() ? 0 : 3;
}

// --- scan ----------------------------------------------------------------

int cmd_scan(const CommonOptions& common, const std::string& displacements,
             double k_max, double center, double beam_waist, bool simulate,
             double sigma_analytic, std::int64_t loads_override,
             double efficiency_override, const std::string& peak_mode) {
  std::vector<double> offsets;
  {
    std::stringstream ss(displacements);
    std::string item;
    while (std::getline(ss, item, ',')) {
      // Bare numbers are micrometers; unit suffixes are honored.
      const bool has_unit = std::any_of(item.begin(), item.end(), [](char c) {
        return std::isalpha(static_cast<unsigned char>(c));
      });
      offsets.push_back(has_unit
                            ? homsim::parse_quantity(item, homsim::Unit::Length)
                            : std::stod(item) * 1e-6);
    }
  }
  if (offsets.size() < 2) {
    throw homsim::config_error("scan needs at least 2 displacements");
  }

  homsim::RunConfig config = load_config(common);
  std::vector<homsim::RatioPoint> points;

  if (!simulate) {
    for (double d : offsets) {
      points.push_back(
          {d, homsim::scan_ratio(k_max, beam_waist, center, d), sigma_analytic});
    }
  } else {
    if (!config.seed_set) {
      throw homsim::config_error("scan --simulate requires a seed");
    }
    if (loads_override >= 0) {
      config.n_loads = static_cast<std::uint64_t>(loads_override);
    }
    if (efficiency_override >= 0.0) {
      config.detection.efficiency = efficiency_override;
    }
    const int workers = effective_parallelism(config);

    homsim::GaussianMode reference;
    reference.waist = beam_waist;
    homsim::DetectionConfig sep_det = config.detection;
    sep_det.configuration = homsim::BeamConfiguration::Separator;
    const auto separator = homsim::run_experiment(
        config.sequence, sep_det, config.physics, config.n_loads,
        config.seed ^ kSeparatorSeedSalt, workers);

    // The scan reproduces the reported normalized HEIGHT of the zero-delay
    // peak, which follows (1 - K^2)/2 at any temperature (the broadening
    // factor is 1 at the peak center); windowed areas fold the broadening
    // average in and are offered behind the flag.
    const homsim::PeakMode mode = peak_mode == "area"
                                      ? homsim::PeakMode::Area
                                      : homsim::PeakMode::Height;
    const auto mixer_rebin = config.detection.rebin_factor;
    for (std::size_t i = 0; i < offsets.size(); ++i) {
      homsim::GaussianMode displaced = reference;
      displaced.focus = {offsets[i] - center, 0.0, 0.0};
      const double k_geo = homsim::overlap(reference, displaced);
      homsim::PhysicsModel physics = config.physics;
      physics.overlap_k = std::clamp(k_max * k_geo, 0.0, 1.0);
      homsim::DetectionConfig det = config.detection;
      det.configuration = homsim::BeamConfiguration::Mixer5050;
      const auto mixer = homsim::run_experiment(
          config.sequence, det, physics, config.n_loads,
          config.seed + 1000 * (i + 1), workers);
      const homsim::RatioEstimate r =
          mode == homsim::PeakMode::Height
              ? homsim::peak_ratio_estimate(
                    homsim::rebin(mixer, mixer_rebin),
                    homsim::rebin(separator, mixer_rebin), mode,
                    config.sequence.pulse_period)
              : homsim::peak_ratio_estimate(mixer, separator, mode,
                                            config.sequence.pulse_period);
      points.push_back({offsets[i], r.value, std::max(r.sigma, 1e-6)});
    }
  }

  const fs::path dir = config.out_dir;
  homsim::write_scan_csv(dir / "scan.csv", points);
  const homsim::FitResult fit =
      homsim::fit_displacement_scan(points, beam_waist);
  json out = fit_result_json(fit, true);
  out["scan_csv"] = (dir / "scan.csv").string();
  write_manifest(dir / "scan_manifest.json", "scan", config,
                 {(dir / "scan.csv").string()});
  std::cout << out.dump(2) << "\n";
  return fit.converged ? 0 : 3;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-photon coincidence simulator for independently trapped atoms"};
  app.require_subcommand(1);

  CommonOptions common;

  // simulate
  auto* simulate = app.add_subcommand(
      "simulate", "Run the experiment and write coincidence histograms");
  std::string configuration = "both";
  double k_override = -1.0;
  std::string temperature_override;
  double efficiency_override = -1.0;
  std::int64_t loads_override = -1;
  std::string mode_override;
  int dump_atoms = 10;
  simulate->add_option("--config", common.config_path, "JSON config file");
  simulate->add_option("--seed", common.seed, "Master seed (required)");
  simulate->add_option("--parallelism", common.parallelism,
                       "Worker threads (0 = hardware)");
  simulate->add_option("--out", common.out_dir, "Output directory");
  simulate->add_option("--configuration", configuration,
                       "mixer, separator or both");
  simulate->add_option("--k", k_override, "Spatial overlap K override");
  simulate->add_option("--temperature", temperature_override,
                       "Atom temperature override, e.g. '180 uK'");
  simulate->add_option("--efficiency", efficiency_override,
                       "Detection efficiency override");
  simulate->add_option("--n-loads", loads_override, "Atom-pair loads");
  simulate->add_option("--mode", mode_override, "analytic or trap_mc");
  bool dump_lightshifts = false;
  simulate->add_flag("--debug-lightshifts", dump_lightshifts,
                     "Dump per-pulse lightshift trajectories (debug)");
  simulate->add_option("--debug-atoms", dump_atoms,
                       "Trajectories in the debug dump");

  // overlap
  auto* overlap_cmd =
      app.add_subcommand("overlap", "Gaussian mode overlap K and error budget");
  std::string waist_str = "90 um";
  std::string waist2_str;
  std::string wavelength_str = "780 nm";
  std::string offset_str = "0 um";
  std::string focal_str = "0 um";
  double tilt = 0.0;
  std::vector<double> budget;
  overlap_cmd->add_option("--waist", waist_str, "Beam waist, e.g. '90 um'");
  overlap_cmd->add_option("--waist2", waist2_str, "Second beam waist");
  overlap_cmd->add_option("--wavelength", wavelength_str, "Wavelength");
  overlap_cmd->add_option("--offset", offset_str, "Transverse offset");
  overlap_cmd->add_option("--focal-shift", focal_str, "Focus shift along z");
  overlap_cmd->add_option("--tilt", tilt, "Axis tilt in rad");
  overlap_cmd->add_option("--budget", budget,
                          "Four fractional errors: waist,offset,focus,tilt");

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "Fit histograms or scan data");
  std::string normalized_path;
  std::string mixer_path;
  std::string separator_path;
  std::string scan_path;
  std::string window_str = "100 ns";
  std::string lifetime_str = "26 ns";
  double eta = 1.0;
  std::string amplitude;
  int rebin_factor = 3;
  std::string beam_waist_str = "90 um";
  std::string period_str = "200 ns";
  std::string fit_out;
  std::string curve_path;
  fit_cmd->add_option("--normalized", normalized_path,
                      "Normalized signal CSV (tau_ns,value,sigma)");
  fit_cmd->add_option("--mixer", mixer_path, "Mixer histogram CSV");
  fit_cmd->add_option("--separator", separator_path, "Separator histogram CSV");
  fit_cmd->add_option("--scan", scan_path, "Displacement scan CSV (d_um,R,sigma)");
  fit_cmd->add_option("--window", window_str, "Zero-peak window");
  fit_cmd->add_option("--lifetime", lifetime_str, "Excited-state lifetime");
  fit_cmd->add_option("--eta", eta, "Differential lightshift factor");
  fit_cmd->add_option("--amplitude", amplitude,
                      "Fixed model amplitude, or 'free' to profile");
  fit_cmd->add_option("--rebin", rebin_factor, "Histogram rebin factor");
  fit_cmd->add_option("--beam-waist", beam_waist_str, "Scan fit beam size");
  fit_cmd->add_option("--period", period_str, "Pulse period");
  std::string bin_width_opt = "auto";
  fit_cmd->add_option("--bin-width", bin_width_opt,
                      "Histogram bin width ('auto' from the grid, '0' for "
                      "point samples)");
  fit_cmd->add_option("--out", fit_out, "Write the fit JSON here too");
  fit_cmd->add_option("--curve", curve_path, "Write the fitted model curve CSV");

  // scan
  auto* scan_cmd =
      app.add_subcommand("scan", "Displacement scan: R(d) curve plus fit");
  std::string displacements = "0,30,60,90,120,150,180,210,240";
  double k_max = 0.78;
  std::string center_str = "0 um";
  std::string scan_waist_str = "90 um";
  bool scan_simulate = false;
  double sigma_analytic = 0.01;
  std::int64_t scan_loads = -1;
  double scan_efficiency = -1.0;
  scan_cmd->add_option("--config", common.config_path, "JSON config file");
  scan_cmd->add_option("--seed", common.seed, "Master seed (simulate mode)");
  scan_cmd->add_option("--parallelism", common.parallelism, "Worker threads");
  scan_cmd->add_option("--out", common.out_dir, "Output directory");
  scan_cmd->add_option("--displacements", displacements,
                       "Comma list of displacements (um or unit strings)");
  scan_cmd->add_option("--kmax", k_max, "Maximum wavefront overlap");
  scan_cmd->add_option("--center", center_str, "Scan center");
  scan_cmd->add_option("--beam-waist", scan_waist_str, "Beam size in the scan plane");
  scan_cmd->add_flag("--simulate", scan_simulate,
                     "Event-level simulation instead of the analytic curve");
  scan_cmd->add_option("--sigma", sigma_analytic,
                       "Per-point sigma in analytic mode");
  scan_cmd->add_option("--n-loads", scan_loads, "Loads per scan point");
  scan_cmd->add_option("--efficiency", scan_efficiency,
                       "Detection efficiency override");
  std::string scan_peak_mode = "height";
  scan_cmd->add_option("--peak-mode", scan_peak_mode,
                       "Zero-peak estimator: height (as published) or area");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      return cmd_simulate(common, configuration, k_override,
                          temperature_override, efficiency_override,
                          loads_override, mode_override, dump_lightshifts,
                          dump_atoms);
    }
    if (overlap_cmd->parsed()) {
      const double waist = homsim::parse_quantity(waist_str, homsim::Unit::Length);
      const double waist2 =
          waist2_str.empty()
              ? -1.0
              : homsim::parse_quantity(waist2_str, homsim::Unit::Length);
      return cmd_overlap(
          waist, waist2,
          homsim::parse_quantity(wavelength_str, homsim::Unit::Length),
          homsim::parse_quantity(offset_str, homsim::Unit::Length),
          homsim::parse_quantity(focal_str, homsim::Unit::Length), tilt,
          budget);
    }
    if (fit_cmd->parsed()) {
      return cmd_fit(normalized_path, mixer_path, separator_path, scan_path,
                     homsim::parse_quantity(window_str, homsim::Unit::Time),
                     homsim::parse_quantity(lifetime_str, homsim::Unit::Time),
                     eta, amplitude, rebin_factor,
                     homsim::parse_quantity(beam_waist_str, homsim::Unit::Length),
                     homsim::parse_quantity(period_str, homsim::Unit::Time),
                     bin_width_opt, fit_out, curve_path);
    }
    if (scan_cmd->parsed()) {
      return cmd_scan(common, displacements, k_max,
                      homsim::parse_quantity(center_str, homsim::Unit::Length),
                      homsim::parse_quantity(scan_waist_str, homsim::Unit::Length),
                      scan_simulate, sigma_analytic, scan_loads,
                      scan_efficiency, scan_peak_mode);
    }
  } catch (const homsim::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const homsim::numerical_error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const homsim::io_error& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
