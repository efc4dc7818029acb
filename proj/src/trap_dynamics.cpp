#include "homsim/trap_dynamics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace homsim {

namespace {

constexpr Vec3 kPulsedBeamAxis = {1.0, 0.0, 0.0};

struct BeamFactors {
  double f; // 1 / (1 + (z/zR)^2)
  double g; // exp(-2 rho^2 f / w0^2)
};

BeamFactors beam_factors(const Vec3& r, const TrapConfig& trap) {
  const double u = r[2] / trap.rayleigh_range;
  const double f = 1.0 / (1.0 + u * u);
  const double rho_sq = r[0] * r[0] + r[1] * r[1];
  const double g = std::exp(-2.0 * rho_sq * f / (trap.waist * trap.waist));
  return {f, g};
}

} // namespace

void TrapConfig::validate() const {
  if (!(depth > 0.0) || !std::isfinite(depth)) {
    throw std::domain_error("TrapConfig: depth must be positive");
  }
  if (!(waist > 0.0) || !(rayleigh_range > 0.0)) {
    throw std::domain_error("TrapConfig: waist and Rayleigh range must be positive");
  }
}

double TrapConfig::radial_angular_frequency(double mass) const {
  return std::sqrt(4.0 * depth / (mass * waist * waist));
}

double TrapConfig::axial_angular_frequency(double mass) const {
  return std::sqrt(2.0 * depth / (mass * rayleigh_range * rayleigh_range));
}

void EmitterConstants::validate() const {
  if (!(mass > 0.0) || !(photon_wavelength > 0.0) || !(lifetime > 0.0)) {
    throw std::domain_error("EmitterConstants: mass, wavelength, lifetime must be positive");
  }
  if (!(excitation_probability > 0.0 && excitation_probability <= 1.0)) {
    throw std::domain_error("EmitterConstants: excitation probability must lie in (0, 1]");
  }
}

double lightshift(const Vec3& position, const TrapConfig& trap) {
  for (double c : position) {
    if (!std::isfinite(c)) {
      throw std::domain_error("lightshift: position must be finite");
    }
  }
  const auto [f, g] = beam_factors(position, trap);
  return trap.depth * f * g;
}

Vec3 trap_force(const Vec3& position, const TrapConfig& trap) {
  const auto [f, g] = beam_factors(position, trap);
  const double w0_sq = trap.waist * trap.waist;
  const double zr = trap.rayleigh_range;
  const double u = position[2] / zr;
  const double rho_sq = position[0] * position[0] + position[1] * position[1];
  const double radial = -4.0 * trap.depth * f * f * g / w0_sq;
  const double axial = (2.0 * trap.depth * u * f * f * g / zr) *
                       (2.0 * rho_sq * f / w0_sq - 1.0);
  return {radial * position[0], radial * position[1], axial};
}

double mechanical_energy(const AtomState& state, const TrapConfig& trap,
                         double mass) {
  const double kinetic = 0.5 * mass * norm_squared(state.velocity);
  return kinetic + trap.depth - lightshift(state.position, trap);
}

AtomState sample_thermal_state(const TrapConfig& trap,
                               const EmitterConstants& constants,
                               double temperature, Rng& rng) {
  trap.validate();
  constants.validate();
  if (!(temperature >= 0.0) || !std::isfinite(temperature)) {
    throw std::domain_error("sample_thermal_state: temperature must be >= 0");
  }
  if (temperature == 0.0) return AtomState{};
  const double kt = constants::k_boltzmann * temperature;
  const double v_sigma = std::sqrt(kt / constants.mass);
  const double omega_r = trap.radial_angular_frequency(constants.mass);
  const double omega_z = trap.axial_angular_frequency(constants.mass);
  AtomState state;
  state.position = {v_sigma / omega_r * rng.normal(),
                    v_sigma / omega_r * rng.normal(),
                    v_sigma / omega_z * rng.normal()};
  state.velocity = {v_sigma * rng.normal(), v_sigma * rng.normal(),
                    v_sigma * rng.normal()};
  return state;
}

AtomState cooling_reset(const AtomState& /*state*/, const TrapConfig& trap,
                        const EmitterConstants& constants, double temperature,
                        Rng& rng) {
  return sample_thermal_state(trap, constants, temperature, rng);
}

PulseTrainResult simulate_pulse_train(const AtomState& initial,
                                      const TrapConfig& trap,
                                      const EmitterConstants& constants,
                                      const SequenceConfig& seq, Rng& rng,
                                      const PulseTrainOptions& options) {
  trap.validate();
  constants.validate();
  seq.validate();
  if (!(options.time_step > 0.0)) {
    throw std::domain_error("PulseTrainOptions: time step must be positive");
  }

  const int steps = std::max<int>(
      1, static_cast<int>(std::ceil(seq.pulse_period / options.time_step)));
  const double dt = seq.pulse_period / steps;
  const double inv_mass = 1.0 / constants.mass;
  const double kick_speed = constants.recoil_momentum() * inv_mass;

  PulseTrainResult result;
  result.lightshifts.reserve(seq.pulses_per_burst);
  AtomState s = initial;
  Vec3 force = trap_force(s.position, trap);

  for (std::uint32_t pulse = 0; pulse < seq.pulses_per_burst; ++pulse) {
    if (rng.bernoulli(constants.excitation_probability)) {
      switch (options.recoil) {
        case RecoilModel::TwoKick:
          // Absorption recoil along the pulsed-beam axis. The sign is
          // randomized: a strictly same-sign periodic kick train only drives
          // a bounded coherent oscillation of the trapped atom and returns
          // its recoil energy to the drive, while the observed heating
          // budget is one full recoil per kick.
          s.velocity += (rng.bernoulli(0.5) ? kick_speed : -kick_speed) *
                        kPulsedBeamAxis;
          s.velocity += kick_speed * rng.isotropic_direction();
          break;
        case RecoilModel::OneKick:
          s.velocity += kick_speed * rng.isotropic_direction();
          break;
        case RecoilModel::None:
          break;
      }
      result.lightshifts.push_back({lightshift(s.position, trap), pulse});
      force = trap_force(s.position, trap);
    }

    // Velocity Verlet to the next pulse.
    for (int i = 0; i < steps; ++i) {
      s.velocity += (0.5 * dt * inv_mass) * force;
      s.position += dt * s.velocity;
      force = trap_force(s.position, trap);
      s.velocity += (0.5 * dt * inv_mass) * force;
    }

    if (options.record_trajectory) result.trajectory.push_back(s);

    if (mechanical_energy(s, trap, constants.mass) >= trap.depth) {
      result.escaped = true;
      result.escape_pulse = pulse;
      break;
    }
  }
  result.final_state = s;
  return result;
}

GammaFormFit fit_lightshift_form(std::span<const double> deficits) {
  GammaFormFit fit;
  if (deficits.size() < 16) return fit;

  // Histogram over the bulk of the sample.
  double max_value = 0.0;
  for (double d : deficits) max_value = std::max(max_value, d);
  const int n_bins = 120;
  const double width = max_value / n_bins;
  if (!(width > 0.0)) return fit;
  std::vector<double> counts(n_bins, 0.0);
  for (double d : deficits) {
    const int bin = std::min(n_bins - 1, static_cast<int>(d / width));
    counts[bin] += 1.0;
  }

  const auto chi_squared = [&](double temperature) {
    const double scale = 2.0 / (constants::k_boltzmann * temperature);
    double sum_cg = 0.0;
    double sum_gg = 0.0;
    for (int i = 0; i < n_bins; ++i) {
      const double center = (i + 0.5) * width;
      const double g = center * center * std::exp(-scale * center);
      const double w = 1.0 / std::max(counts[i], 1.0);
      sum_cg += counts[i] * g * w;
      sum_gg += g * g * w;
    }
    const double amplitude = sum_cg / sum_gg;
    double chi2 = 0.0;
    for (int i = 0; i < n_bins; ++i) {
      const double center = (i + 0.5) * width;
      const double g = center * center * std::exp(-scale * center);
      const double r = counts[i] - amplitude * g;
      chi2 += r * r / std::max(counts[i], 1.0);
    }
    return chi2;
  };

  // Golden-section search on T_eff.
  const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
  double lo = 1e-6;
  double hi = 5e-3;
  double x1 = hi - golden * (hi - lo);
  double x2 = lo + golden * (hi - lo);
  double f1 = chi_squared(x1);
  double f2 = chi_squared(x2);
  for (int i = 0; i < 200 && (hi - lo) > 1e-9; ++i) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - golden * (hi - lo);
      f1 = chi_squared(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + golden * (hi - lo);
      f2 = chi_squared(x2);
    }
  }
  fit.effective_temperature = 0.5 * (lo + hi);
  fit.chi_squared = chi_squared(fit.effective_temperature);
  fit.degrees_of_freedom = n_bins - 2;
  fit.converged = true;
  return fit;
}

LightshiftDistribution lightshift_distribution(
    const TrapConfig& trap, const EmitterConstants& constants,
    const SequenceConfig& seq, double temperature, std::size_t n_atoms,
    std::uint64_t seed, int parallelism, const PulseTrainOptions& options) {
  if (n_atoms == 0) {
    throw std::domain_error("lightshift_distribution: need at least one atom");
  }

  struct AtomOutcome {
    std::vector<double> deficits;
    AtomState initial_state;
    AtomState final_state;
    bool escaped = false;
  };
  std::vector<AtomOutcome> outcomes(n_atoms);

  const auto run_atom = [&](std::size_t i) {
    Rng rng(seed, i);
    const AtomState start =
        sample_thermal_state(trap, constants, temperature, rng);
    const PulseTrainResult res =
        simulate_pulse_train(start, trap, constants, seq, rng, options);
    AtomOutcome& out = outcomes[i];
    out.deficits.reserve(res.lightshifts.size());
    for (const auto& rec : res.lightshifts) {
      out.deficits.push_back(trap.depth - rec.lightshift);
    }
    out.initial_state = start;
    out.final_state = res.final_state;
    out.escaped = res.escaped;
  };

  const int workers = std::max(1, parallelism);
  if (workers == 1) {
    for (std::size_t i = 0; i < n_atoms; ++i) run_atom(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < n_atoms;
             i = next.fetch_add(1)) {
          run_atom(i);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  LightshiftDistribution dist;
  dist.atoms = n_atoms;
  dist.initial_temperature = temperature;
  std::vector<AtomState> initials;
  std::vector<AtomState> survivors;
  for (const auto& out : outcomes) {
    dist.deficits.insert(dist.deficits.end(), out.deficits.begin(),
                         out.deficits.end());
    initials.push_back(out.initial_state);
    if (out.escaped) {
      ++dist.escaped;
    } else {
      survivors.push_back(out.final_state);
    }
  }
  dist.measured_initial_temperature =
      ensemble_temperature(initials, trap, constants.mass);
  dist.final_temperature =
      survivors.empty()
          ? 0.0
          : ensemble_temperature(survivors, trap, constants.mass);
  dist.fit = fit_lightshift_form(dist.deficits);
  return dist;
}

double ensemble_temperature(std::span<const AtomState> states,
                            const TrapConfig& trap, double mass) {
  if (states.empty()) return 0.0;
  double energy = 0.0;
  for (const auto& s : states) energy += mechanical_energy(s, trap, mass);
  return energy / (3.0 * constants::k_boltzmann * states.size());
}

} // namespace homsim
