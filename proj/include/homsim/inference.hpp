#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "homsim/experiment_sim.hpp"

namespace homsim {

struct FitResult {
  std::map<std::string, double> params;
  std::map<std::string, double> sigmas; // one-sigma, from the chi^2 curvature
  double chi_squared = 0.0;
  int degrees_of_freedom = 0;
  bool converged = false;
  bool at_boundary = false; // a parameter pinned at its bound
  std::vector<double> residuals;
};

// Weighted least-squares fit of the background-subtracted zero-delay peak to
//
//   A e^(-Gamma |tau|) (1 - K^2 C(tau; T, eta))
//
// Returns K in [0, 1] and T >= 0 (keys "K" and "T") with curvature
// uncertainties. Only K and T are fitted: for data normalized to the
// separator reference the amplitude is tied to 0.5 — the distinguishable
// value — which carries the height information (the dip depth alone leaves
// K and the amplitude nearly degenerate). Pass nullopt to profile the
// amplitude out analytically instead, for inputs with arbitrary scale.
// The decay rate and the differential-shift factor eta are fixed inputs;
// eta and T enter only as a product, so the fitted T scales as 1/eta.
// Multi-start Nelder-Mead on the bounded two-parameter problem, with one
// expected-count reweighting pass (observed-count weights bias low-count
// fits); throws numerical_error when no start converges.
//
// Histogram data are bin averages normalized by the reference peak's tallest
// bin, which flattens the exponential cusp; pass the bin width so the model
// is averaged the same way. bin_width = 0 treats the samples as point values.
FitResult fit_zero_peak(std::span<const PeakSample> data, double decay_rate,
                        double shift_factor,
                        std::optional<double> fixed_amplitude = 0.5,
                        double bin_width = 0.0);

struct RatioPoint {
  double displacement = 0.0; // m
  double ratio = 0.0;        // normalized zero-delay ratio
  double sigma = 1.0;
};

// Fit of the displacement scan to
//
//   R(d) = (1 - K_max^2 exp(-(d - center)^2 / w^2)) / 2
//
// with the beam size w fixed from the measured value. Returns keys "K_max"
// and "center".
FitResult fit_displacement_scan(std::span<const RatioPoint> points,
                                double waist);

} // namespace homsim
