#include "homsim/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <sstream>

#include "homsim/errors.hpp"

namespace homsim {

namespace {

const std::map<std::string, double> kTimeUnits = {
    {"s", 1.0},    {"ms", 1e-3}, {"us", 1e-6},
    {"µs", 1e-6},  {"ns", 1e-9}, {"ps", 1e-12}};
const std::map<std::string, double> kLengthUnits = {
    {"m", 1.0},   {"cm", 1e-2}, {"mm", 1e-3},
    {"um", 1e-6}, {"µm", 1e-6}, {"nm", 1e-9}};
const std::map<std::string, double> kTemperatureUnits = {
    {"K", 1.0}, {"mK", 1e-3}, {"uK", 1e-6}, {"µK", 1e-6}, {"nK", 1e-9}};
const std::map<std::string, double> kFrequencyUnits = {
    {"Hz", 1.0}, {"kHz", 1e3}, {"MHz", 1e6}, {"GHz", 1e9}};
const std::map<std::string, double> kRateUnits = {
    {"/s", 1.0}, {"1/s", 1.0}, {"Hz", 1.0}, {"/ms", 1e3}, {"kHz", 1e3}};

const std::map<std::string, double>& unit_table(Unit unit) {
  switch (unit) {
    case Unit::Time: return kTimeUnits;
    case Unit::Length: return kLengthUnits;
    case Unit::Temperature: return kTemperatureUnits;
    case Unit::Frequency: return kFrequencyUnits;
    case Unit::Rate: return kRateUnits;
    default: {
      static const std::map<std::string, double> none;
      return none;
    }
  }
}

} // namespace

double parse_quantity(const std::string& text, Unit unit) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    throw config_error("cannot parse quantity '" + text + "'");
  }
  std::string suffix = text.substr(used);
  suffix.erase(std::remove_if(suffix.begin(), suffix.end(),
                              [](unsigned char c) { return std::isspace(c); }),
               suffix.end());
  if (suffix.empty()) return value; // plain SI
  const auto& table = unit_table(unit);
  const auto it = table.find(suffix);
  if (it == table.end()) {
    throw config_error("unknown unit '" + suffix + "' in '" + text + "'");
  }
  return value * it->second;
}

double quantity_from_json(const nlohmann::json& value, Unit unit,
                          const std::string& field) {
  try {
    if (value.is_number()) return value.get<double>();
    if (value.is_string()) return parse_quantity(value.get<std::string>(), unit);
  } catch (const config_error& e) {
    throw config_error(field + ": " + e.what());
  }
  throw config_error(field + ": expected a number or unit string");
}

namespace {

double get_quantity(const nlohmann::json& obj, const std::string& key,
                    Unit unit, double fallback, const std::string& scope) {
  if (!obj.contains(key)) return fallback;
  return quantity_from_json(obj.at(key), unit, scope + "." + key);
}

template <typename T>
T get_value(const nlohmann::json& obj, const std::string& key, T fallback,
            const std::string& scope) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw config_error(scope + "." + key + ": " + e.what());
  }
}

} // namespace

RunConfig run_config_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw config_error("config root must be an object");
  RunConfig config;

  if (doc.contains("physics")) {
    const auto& phys = doc.at("physics");
    const std::string mode =
        get_value<std::string>(phys, "mode", "analytic", "physics");
    if (mode == "analytic") {
      config.physics.kind = PhysicsModel::Kind::Analytic;
    } else if (mode == "trap_mc") {
      config.physics.kind = PhysicsModel::Kind::TrapMonteCarlo;
    } else {
      throw config_error("physics.mode: expected 'analytic' or 'trap_mc'");
    }
    config.physics.overlap_k =
        get_value<double>(phys, "overlap_k", config.physics.overlap_k, "physics");
    config.physics.temperature =
        get_quantity(phys, "temperature", Unit::Temperature,
                     config.physics.temperature, "physics");
    config.physics.shift_factor = get_value<double>(
        phys, "shift_factor", config.physics.shift_factor, "physics");

    if (phys.contains("emitter")) {
      const auto& em = phys.at("emitter");
      auto& e = config.physics.emitter;
      e.mass = get_quantity(em, "mass", Unit::None, e.mass, "physics.emitter");
      e.photon_wavelength =
          get_quantity(em, "wavelength", Unit::Length, e.photon_wavelength,
                       "physics.emitter");
      e.excitation_probability =
          get_value<double>(em, "excitation_probability",
                            e.excitation_probability, "physics.emitter");
      e.lifetime = get_quantity(em, "lifetime", Unit::Time, e.lifetime,
                                "physics.emitter");
    }
    if (phys.contains("trap")) {
      const auto& tr = phys.at("trap");
      auto& t = config.physics.trap;
      if (tr.contains("depth")) {
        // Depth given as a temperature (kB x value) or in joules.
        const auto& d = tr.at("depth");
        if (d.is_string()) {
          t.depth = constants::k_boltzmann *
                    parse_quantity(d.get<std::string>(), Unit::Temperature);
        } else {
          t.depth = d.get<double>();
        }
      }
      t.waist =
          get_quantity(tr, "waist", Unit::Length, t.waist, "physics.trap");
      t.rayleigh_range = get_quantity(tr, "rayleigh_range", Unit::Length,
                                      t.rayleigh_range, "physics.trap");
    }
    if (phys.contains("pulse_options")) {
      const auto& po = phys.at("pulse_options");
      auto& o = config.physics.pulse_options;
      o.time_step = get_quantity(po, "time_step", Unit::Time, o.time_step,
                                 "physics.pulse_options");
      const std::string recoil = get_value<std::string>(
          po, "recoil", "two_kick", "physics.pulse_options");
      if (recoil == "two_kick") {
        o.recoil = RecoilModel::TwoKick;
      } else if (recoil == "one_kick") {
        o.recoil = RecoilModel::OneKick;
      } else if (recoil == "none") {
        o.recoil = RecoilModel::None;
      } else {
        throw config_error(
            "physics.pulse_options.recoil: expected two_kick, one_kick or none");
      }
    }
  }

  if (doc.contains("sequence")) {
    const auto& seq = doc.at("sequence");
    auto& s = config.sequence;
    s.pulse_period = get_quantity(seq, "pulse_period", Unit::Time,
                                  s.pulse_period, "sequence");
    s.pulses_per_burst = get_value<std::uint32_t>(
        seq, "pulses_per_burst", s.pulses_per_burst, "sequence");
    s.cooling_duration = get_quantity(seq, "cooling_duration", Unit::Time,
                                      s.cooling_duration, "sequence");
    s.bursts_per_load = get_value<std::uint32_t>(
        seq, "bursts_per_load", s.bursts_per_load, "sequence");
    s.reload_delay_mean = get_quantity(seq, "reload_delay_mean", Unit::Time,
                                       s.reload_delay_mean, "sequence");
    s.retention_after_bursts = get_value<double>(
        seq, "retention", s.retention_after_bursts, "sequence");
  }

  if (doc.contains("detection")) {
    const auto& det = doc.at("detection");
    auto& d = config.detection;
    d.efficiency =
        get_value<double>(det, "efficiency", d.efficiency, "detection");
    d.bin_width =
        get_quantity(det, "bin_width", Unit::Time, d.bin_width, "detection");
    d.rebin_factor =
        get_value<int>(det, "rebin_factor", d.rebin_factor, "detection");
    d.histogram_range = get_quantity(det, "histogram_range", Unit::Time,
                                     d.histogram_range, "detection");
    d.background_rate = get_quantity(det, "background_rate", Unit::Rate,
                                     d.background_rate, "detection");
    d.jitter_sigma = get_quantity(det, "jitter_sigma", Unit::Time,
                                  d.jitter_sigma, "detection");
    if (det.contains("configuration")) {
      try {
        d.configuration = beam_configuration_from_string(
            det.at("configuration").get<std::string>());
      } catch (const std::exception& e) {
        throw config_error(std::string("detection.configuration: ") + e.what());
      }
    }
  }

  if (doc.contains("beam")) {
    const auto& beam = doc.at("beam");
    config.beam.waist =
        get_quantity(beam, "waist", Unit::Length, config.beam.waist, "beam");
    config.beam.wavelength = get_quantity(beam, "wavelength", Unit::Length,
                                          config.beam.wavelength, "beam");
  }

  if (doc.contains("simulation")) {
    const auto& sim = doc.at("simulation");
    config.n_loads =
        get_value<std::uint64_t>(sim, "n_loads", config.n_loads, "simulation");
    if (sim.contains("seed")) {
      config.seed = get_value<std::uint64_t>(sim, "seed", 0, "simulation");
      config.seed_set = true;
    }
    config.parallelism =
        get_value<int>(sim, "parallelism", config.parallelism, "simulation");
  }
  if (doc.contains("output")) {
    config.out_dir = get_value<std::string>(doc.at("output"), "dir",
                                            config.out_dir, "output");
  }

  // Surface invariant violations as config errors with their source.
  try {
    config.sequence.validate();
    config.detection.validate();
    config.physics.validate();
    config.beam.validate();
  } catch (const std::domain_error& e) {
    throw config_error(e.what());
  }
  return config;
}

nlohmann::json run_config_to_json(const RunConfig& config) {
  nlohmann::json doc;
  auto& phys = doc["physics"];
  phys["mode"] = config.physics.kind == PhysicsModel::Kind::Analytic
                     ? "analytic"
                     : "trap_mc";
  phys["overlap_k"] = config.physics.overlap_k;
  phys["temperature"] = config.physics.temperature;
  phys["shift_factor"] = config.physics.shift_factor;
  phys["emitter"] = {
      {"mass", config.physics.emitter.mass},
      {"wavelength", config.physics.emitter.photon_wavelength},
      {"excitation_probability",
       config.physics.emitter.excitation_probability},
      {"lifetime", config.physics.emitter.lifetime}};
  phys["trap"] = {{"depth", config.physics.trap.depth},
                  {"waist", config.physics.trap.waist},
                  {"rayleigh_range", config.physics.trap.rayleigh_range}};
  const char* recoil = "two_kick";
  if (config.physics.pulse_options.recoil == RecoilModel::OneKick) {
    recoil = "one_kick";
  } else if (config.physics.pulse_options.recoil == RecoilModel::None) {
    recoil = "none";
  }
  phys["pulse_options"] = {
      {"time_step", config.physics.pulse_options.time_step},
      {"recoil", recoil}};

  doc["sequence"] = {
      {"pulse_period", config.sequence.pulse_period},
      {"pulses_per_burst", config.sequence.pulses_per_burst},
      {"cooling_duration", config.sequence.cooling_duration},
      {"bursts_per_load", config.sequence.bursts_per_load},
      {"reload_delay_mean", config.sequence.reload_delay_mean},
      {"retention", config.sequence.retention_after_bursts}};
  doc["detection"] = {
      {"efficiency", config.detection.efficiency},
      {"bin_width", config.detection.bin_width},
      {"rebin_factor", config.detection.rebin_factor},
      {"histogram_range", config.detection.histogram_range},
      {"background_rate", config.detection.background_rate},
      {"jitter_sigma", config.detection.jitter_sigma},
      {"configuration", to_string(config.detection.configuration)}};
  doc["beam"] = {{"waist", config.beam.waist},
                 {"wavelength", config.beam.wavelength}};
  doc["simulation"] = {{"n_loads", config.n_loads},
                       {"parallelism", config.parallelism}};
  if (config.seed_set) doc["simulation"]["seed"] = config.seed;
  doc["output"] = {{"dir", config.out_dir}};
  return doc;
}

std::uint64_t config_hash(const nlohmann::json& doc) {
  const std::string text = doc.dump();
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  return hash;
}

std::uint64_t run_config_hash(const RunConfig& config) {
  nlohmann::json doc = run_config_to_json(config);
  doc["simulation"].erase("parallelism");
  doc.erase("output");
  return config_hash(doc);
}

std::string fit_result_to_json_string(const FitResult& fit) {
  nlohmann::json doc;
  doc["params"] = fit.params;
  doc["sigmas"] = fit.sigmas;
  doc["chi2"] = fit.chi_squared;
  doc["dof"] = fit.degrees_of_freedom;
  doc["converged"] = fit.converged;
  doc["at_boundary"] = fit.at_boundary;
  return doc.dump(2);
}

} // namespace homsim
