#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "homsim/constants.hpp"
#include "homsim/rng.hpp"
#include "homsim/sequence.hpp"
#include "homsim/vec.hpp"

namespace homsim {

// Gaussian-beam dipole trap. The beam propagates along z with its focus at
// the origin; the pulsed excitation beam runs along x (a radial direction),
// so the quoted trap frequency along the pulsed-beam axis is the radial one.
// Harmonic frequencies are derived from the potential curvature at the
// bottom, so they stay consistent with depth, waist and Rayleigh range by
// construction.
struct TrapConfig {
  double depth = 1.5e-3 * constants::k_boltzmann; // J (kB x 1.5 mK)
  double waist = 1.0e-6;                          // m
  // The trap laser wavelength is not part of the published parameters; the
  // default Rayleigh range assumes an 810 nm beam.
  double rayleigh_range = constants::pi * 1.0e-12 / 810e-9; // m

  double radial_angular_frequency(double mass) const; // pulsed-beam axis (x, y)
  double axial_angular_frequency(double mass) const;  // trap beam axis (z)

  void validate() const;
};

// Emitter properties entering the recoil and excitation model.
struct EmitterConstants {
  double mass = constants::rb87_mass;              // kg
  double photon_wavelength = constants::d2_wavelength; // m
  double excitation_probability = 0.98;            // per pulse
  double lifetime = constants::excited_lifetime;   // s

  double recoil_momentum() const {
    return constants::two_pi * constants::hbar / photon_wavelength;
  }
  double recoil_energy() const {
    const double p = recoil_momentum();
    return p * p / (2.0 * mass);
  }
  double decay_rate() const { return 1.0 / lifetime; }

  void validate() const;
};

struct AtomState {
  Vec3 position = {0.0, 0.0, 0.0}; // m, relative to the trap focus
  Vec3 velocity = {0.0, 0.0, 0.0}; // m/s
};

struct LightshiftRecord {
  double lightshift = 0.0;  // J, local trap depth experienced (0..U0)
  std::uint32_t pulse_index = 0;
};

// Local optical potential depth at a position: U0 at the focus, decaying
// with the Gaussian beam intensity profile. Always in [0, U0].
double lightshift(const Vec3& position, const TrapConfig& trap);

// Conservative force of the trap on the atom.
Vec3 trap_force(const Vec3& position, const TrapConfig& trap);

// Total mechanical energy measured from the trap bottom.
double mechanical_energy(const AtomState& state, const TrapConfig& trap,
                         double mass);

// Boltzmann sample in the harmonic approximation of the trap bottom.
// T = 0 gives the trap bottom at rest.
AtomState sample_thermal_state(const TrapConfig& trap,
                               const EmitterConstants& constants,
                               double temperature, Rng& rng);

// Models the molasses period as full rethermalization at T0.
AtomState cooling_reset(const AtomState& state, const TrapConfig& trap,
                        const EmitterConstants& constants, double temperature,
                        Rng& rng);

enum class RecoilModel {
  TwoKick,  // absorption kick along the pulsed beam + isotropic emission kick
  OneKick,  // single isotropic kick per cycle
  None      // no recoil (diagnostics)
};

struct PulseTrainOptions {
  double time_step = 2e-9;      // s, Verlet step between pulses
  RecoilModel recoil = RecoilModel::TwoKick;
  bool record_trajectory = false;
};

struct PulseTrainResult {
  std::vector<LightshiftRecord> lightshifts; // one per excitation
  AtomState final_state;
  bool escaped = false;
  std::uint32_t escape_pulse = 0;            // valid when escaped
  std::vector<AtomState> trajectory;         // per pulse, when recorded
};

// One excitation burst for a single atom: time-reversible second-order
// integration of the classical motion in the full Gaussian potential between
// pulses; at each pulse, excitation with the configured probability applies
// the recoil kicks and records the local lightshift. Escaped atoms
// (mechanical energy above the depth) stop contributing.
PulseTrainResult simulate_pulse_train(const AtomState& initial,
                                      const TrapConfig& trap,
                                      const EmitterConstants& constants,
                                      const SequenceConfig& seq, Rng& rng,
                                      const PulseTrainOptions& options = {});

struct GammaFormFit {
  double effective_temperature = 0.0; // K
  double chi_squared = 0.0;
  int degrees_of_freedom = 0;
  bool converged = false;
};

// Weighted least-squares fit of pooled lightshift deficits to the analytic
// U^2 exp(-2U / kB T_eff) form.
GammaFormFit fit_lightshift_form(std::span<const double> deficits);

struct LightshiftDistribution {
  std::vector<double> deficits;   // pooled U0 - U samples, J
  GammaFormFit fit;
  std::size_t atoms = 0;
  std::size_t escaped = 0;
  double initial_temperature = 0.0;          // K, requested
  double measured_initial_temperature = 0.0; // K, same estimator as final
  double final_temperature = 0.0;            // K, over survivors
};

// Pools per-emission lightshifts over an ensemble of single-burst
// trajectories started from a thermal sample at `temperature`, and fits the
// deficit distribution to the analytic form. Parallel over atoms with
// per-atom seeding; results are identical for a fixed seed regardless of
// scheduling.
LightshiftDistribution lightshift_distribution(
    const TrapConfig& trap, const EmitterConstants& constants,
    const SequenceConfig& seq, double temperature, std::size_t n_atoms,
    std::uint64_t seed, int parallelism = 1,
    const PulseTrainOptions& options = {});

// Ensemble temperature from the mean total mechanical energy (3 kB T per
// atom in the harmonic regime).
double ensemble_temperature(std::span<const AtomState> states,
                            const TrapConfig& trap, double mass);

} // namespace homsim
