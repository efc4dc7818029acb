#pragma once

// Physical constants (SI) and Rb-87 D2-line values used as defaults
// throughout the simulator.

namespace homsim::constants {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;

inline constexpr double hbar = 1.054571817e-34;     // J s
inline constexpr double k_boltzmann = 1.380649e-23; // J / K

// Rb-87
inline constexpr double rb87_mass = 1.4431609e-25;    // kg
inline constexpr double d2_wavelength = 780.241e-9;   // m
inline constexpr double excited_lifetime = 26.0e-9;   // s
inline constexpr double natural_decay_rate = 1.0 / excited_lifetime; // 1/s

} // namespace homsim::constants
