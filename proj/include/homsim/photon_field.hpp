#pragma once

#include <complex>
#include <cstddef>

#include "homsim/constants.hpp"

namespace homsim {

// Temporal wavepacket of a spontaneously emitted photon: a step function at
// the emission trigger followed by exponential decay of the field envelope
// at half the population decay rate, with a carrier frequency offset
// relative to the unshifted atomic line.
struct PhotonWavepacket {
  double decay_rate = constants::natural_decay_rate; // Gamma, 1/s
  double carrier_offset = 0.0;                       // rad/s
  double emission_time = 0.0;                        // s

  // Integral of |amplitude|^2 over all times (= 1/Gamma).
  double squared_norm() const { return 1.0 / decay_rate; }

  void validate() const; // throws std::domain_error
};

// Field amplitude at time t: H(t-t0) exp(-Gamma (t-t0)/2) exp(i w (t-t0)).
// Unit magnitude at the emission time.
std::complex<double> wavepacket_amplitude(const PhotonWavepacket& wp, double t);

// Two-photon coincidence density behind a 50/50 beam splitter for equal-rate
// exponential wavepackets with carrier difference delta_omega and spatial
// field overlap K:
//
//   e^(-Gamma |tau|) (1 - K^2 cos(delta_omega tau))
//
// normalized so the K = 0, tau = 0 value is 1. Only ratios of this density
// are physical; the normalization matches the beam-separator convention.
double coincidence_density_closed(double tau, double K, double delta_omega,
                                  double decay_rate);

struct QuadratureDiagnostics {
  double error_estimate = 0.0;
  std::size_t evaluations = 0;
  bool converged = true;
};

// Direct numerical evaluation of the two-path interference integral
//
//   integral |f1 f2 E1(t+tau) E2(t) - f2 f1 E2(t+tau) E1(t)|^2 dt
//
// with the spatial factors collapsed into the scalar overlap K, normalized
// by its own K = 0, tau = 0 value. Agrees with the closed form when both
// wavepackets share the decay rate. Throws numerical_error when the adaptive
// quadrature cannot reach tolerance.
double coincidence_density_integral(const PhotonWavepacket& wp1,
                                    const PhotonWavepacket& wp2, double K,
                                    double tau,
                                    QuadratureDiagnostics* diag = nullptr);

} // namespace homsim
