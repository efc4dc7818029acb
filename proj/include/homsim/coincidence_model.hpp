#pragma once

#include "homsim/constants.hpp"
#include "homsim/rng.hpp"

namespace homsim {

// Parameters of the temperature-broadened coincidence signal. The lightshift
// difference between the two atoms maps to a photon frequency difference
// delta_omega = shift_factor * delta_U / hbar; shift_factor is the
// differential-lightshift proportionality, kept explicit with default 1 (a
// fitted temperature absorbs it).
struct BroadeningParams {
  double temperature = 180e-6;                        // K
  double shift_factor = 1.0;                          // eta, unitless
  double decay_rate = constants::natural_decay_rate;  // Gamma, 1/s

  // Frequency scale b of the interference factor C(tau) = (1+(b tau)^2)^-3.
  double frequency_scale() const {
    return shift_factor * constants::k_boltzmann * temperature /
           (2.0 * constants::hbar);
  }

  void validate() const; // throws std::domain_error
};

// Normalized zero-delay peak ratio R = (1 - K^2) / 2.
double peak_ratio(double K);

// E[cos(delta_omega tau)] over the distribution of frequency differences
// between the two atoms. Each atom's lightshift (measured down from the trap
// bottom) follows the shape-3 gamma form U^2 exp(-2U / kB T); the difference
// of two independent draws has characteristic function
//
//   C(tau) = (1 + (eta kB T tau / (2 hbar))^2)^-3.
//
// C(0) = 1, C is even, and C -> 0 as |tau| -> infinity for T > 0.
double averaged_interference_factor(double tau, const BroadeningParams& params);

// Temperature-broadened coincidence density
//   e^(-Gamma |tau|) (1 - K^2 C(tau)),
// normalized like coincidence_density_closed (K = 0, tau = 0 gives 1).
double broadened_signal(double tau, double K, const BroadeningParams& params);

// One draw of the lightshift measured as trap-depth reduction, following the
// analytic U^2 exp(-2U / kB T) form (gamma, shape 3, scale kB T / 2).
double sample_lightshift_deficit(Rng& rng, double temperature);

// Full width at half maximum of the residual zero-delay peak
// e^(-Gamma|tau|)(1 - K^2 C(tau)), found numerically. Widens with
// temperature for fixed K < 1.
double residual_peak_fwhm(double K, const BroadeningParams& params);

// Half-width of the K = 1 dip: the delay at which the suppressed contrast
// 1 - C(tau) recovers to one half. Shrinks as 1/T.
double dip_half_width(const BroadeningParams& params);

} // namespace homsim
