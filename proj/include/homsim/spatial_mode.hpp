#pragma once

#include <span>
#include <vector>

#include "homsim/constants.hpp"
#include "homsim/vec.hpp"

namespace homsim {

// Fundamental Gaussian mode of one atom's collected fluorescence beam.
// The waist is the 1/e^2 intensity radius at the focus.
struct GaussianMode {
  double waist = 90e-6;                   // m, in the cut-mirror plane
  Vec3 focus = {0.0, 0.0, 0.0};           // m
  Vec3 axis = {0.0, 0.0, 1.0};            // unit propagation direction
  double wavelength = constants::d2_wavelength; // m

  double rayleigh_range() const {
    return constants::pi * waist * waist / wavelength;
  }
  double divergence() const {
    return wavelength / (constants::pi * waist);
  }
  double wavenumber() const { return constants::two_pi / wavelength; }

  void validate() const; // throws std::domain_error
};

// Field-amplitude overlap K = |<f1|f2>| / sqrt(<f1|f1><f2|f2>) of the two
// modes, evaluated paraxially in the plane halfway between the foci, with
// curvature and Gouy phase for mismatched foci and tilts as linear phase
// ramps. K is in [0, 1]; identical modes give exactly 1. Throws on
// non-paraxial tilt (mutual angle > 0.1 rad).
double overlap(const GaussianMode& m1, const GaussianMode& m2);

enum class AlignmentKind {
  WaistMismatch,    // fractional waist difference, w2 = w1 (1 + m)
  TransverseOffset, // displacement as a fraction of the waist
  FocalShift,       // focus displacement as a fraction of the Rayleigh range
  AxisTilt          // tilt as a fraction of the beam divergence angle
};

// One alignment imperfection, with magnitude expressed as a fraction of the
// mode's natural scale for that degree of freedom (waist, Rayleigh range,
// divergence). "4% error" on every entry then means 0.04 on each.
struct AlignmentError {
  AlignmentKind kind;
  double magnitude = 0.0;
};

// Returns a copy of the mode with one alignment error applied (offsets along
// x, tilts in the x-z plane).
GaussianMode apply_alignment_error(const GaussianMode& mode,
                                   const AlignmentError& error);

struct AlignmentBudget {
  std::vector<double> factors; // per-error overlap against the reference
  double product = 1.0;        // independent-error estimate
  double exact = 1.0;          // single overlap with all errors applied
  double discrepancy = 0.0;    // |product - exact|
};

// Overlap budget for a list of independent alignment errors applied to a
// copy of the reference mode: per-error K factors, their product, and the
// exact K with all errors applied at once.
AlignmentBudget alignment_budget(const GaussianMode& reference,
                                 std::span<const AlignmentError> errors);

struct ScanPoint {
  double displacement = 0.0; // m
  double ratio = 0.5;        // normalized zero-delay ratio R
};

// Predicted normalized zero-delay ratio R = (1 - K(d)^2)/2 for each
// transverse displacement d of the second mode, via the full overlap.
std::vector<ScanPoint> displacement_scan(const GaussianMode& m1,
                                         const GaussianMode& m2,
                                         std::span<const double> offsets);

// Analytic scan curve R(d) = (1 - K_max^2 exp(-(d - center)^2 / w^2)) / 2.
double scan_ratio(double k_max, double waist, double center,
                  double displacement);

} // namespace homsim
