#include "homsim/spatial_mode.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace homsim {

namespace {

constexpr double kMaxParaxialTilt = 0.1; // rad

using Complex = std::complex<double>;

// Complex transverse exponent of a fundamental Gaussian at axial distance z
// from its waist: field ~ exp(-alpha rho^2) with
// alpha = 1/w(z)^2 - i k / (2 R(z)).
Complex transverse_exponent(const GaussianMode& m, double z) {
  const double zr = m.rayleigh_range();
  const double w0 = m.waist;
  const double w_sq = w0 * w0 * (1.0 + (z / zr) * (z / zr));
  const double inv_r = z / (z * z + zr * zr); // 1/R, zero at the waist
  return {1.0 / w_sq, -0.5 * m.wavenumber() * inv_r};
}

// One-dimensional complex Gaussian integral
//   integral exp(-A x^2 + B x - C) dx = sqrt(pi / A) exp(B^2 / (4A) - C).
Complex gauss_integral_1d(Complex a, Complex b, Complex c) {
  return std::sqrt(constants::pi / a) * std::exp(b * b / (4.0 * a) - c);
}

struct PlaneBeam {
  Complex alpha;   // transverse exponent in the common plane
  double cx, cy;   // axis intersection with the plane
  double kx, ky;   // tilt phase-ramp wavevector components
};

// Projects the mode into the common plane through `origin` with orthonormal
// basis (ex, ey, en). Amplitude and constant-phase factors (Gouy, on-axis
// propagation phase) cancel in the normalized overlap and are dropped.
PlaneBeam project(const GaussianMode& m, const Vec3& origin, const Vec3& ex,
                  const Vec3& ey, const Vec3& en) {
  const double along = dot(m.axis, en);
  // Axis-plane intersection.
  const double s = dot(origin - m.focus, en) / along;
  const Vec3 hit = m.focus + s * m.axis - origin;
  PlaneBeam b;
  b.alpha = transverse_exponent(m, s);
  b.cx = dot(hit, ex);
  b.cy = dot(hit, ey);
  b.kx = m.wavenumber() * dot(m.axis, ex);
  b.ky = m.wavenumber() * dot(m.axis, ey);
  return b;
}

// |integral f1* f2| over the plane, per the separable 1-D integrals.
double cross_integral_magnitude(const PlaneBeam& p, const PlaneBeam& q) {
  const Complex a = std::conj(p.alpha) + q.alpha;
  const Complex bx = 2.0 * std::conj(p.alpha) * p.cx + 2.0 * q.alpha * q.cx +
                     Complex(0.0, q.kx - p.kx);
  const Complex by = 2.0 * std::conj(p.alpha) * p.cy + 2.0 * q.alpha * q.cy +
                     Complex(0.0, q.ky - p.ky);
  const Complex cx = std::conj(p.alpha) * p.cx * p.cx + q.alpha * q.cx * q.cx;
  const Complex cy = std::conj(p.alpha) * p.cy * p.cy + q.alpha * q.cy * q.cy;
  return std::abs(gauss_integral_1d(a, bx, cx) * gauss_integral_1d(a, by, cy));
}

double self_integral(const PlaneBeam& p) {
  const double re = 2.0 * p.alpha.real();
  return constants::pi / re;
}

} // namespace

void GaussianMode::validate() const {
  if (!(waist > 0.0) || !std::isfinite(waist)) {
    throw std::domain_error("GaussianMode: waist must be positive");
  }
  if (!(wavelength > 0.0) || !std::isfinite(wavelength)) {
    throw std::domain_error("GaussianMode: wavelength must be positive");
  }
  if (std::abs(norm(axis) - 1.0) > 1e-12) {
    throw std::domain_error("GaussianMode: axis must be a unit vector");
  }
  for (double c : focus) {
    if (!std::isfinite(c)) {
      throw std::domain_error("GaussianMode: focus must be finite");
    }
  }
}

double overlap(const GaussianMode& m1, const GaussianMode& m2) {
  m1.validate();
  m2.validate();
  const double mutual = std::acos(std::clamp(dot(m1.axis, m2.axis), -1.0, 1.0));
  if (mutual > kMaxParaxialTilt) {
    throw std::domain_error("overlap: mutual tilt exceeds the paraxial limit");
  }

  // Common plane: through the midpoint of the foci, normal to the mean axis.
  const Vec3 en = normalized(m1.axis + m2.axis);
  Vec3 seed = std::abs(en[0]) < 0.9 ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 1.0, 0.0};
  const Vec3 ex = normalized(cross(seed, en));
  const Vec3 ey = cross(en, ex);
  const Vec3 origin = 0.5 * (m1.focus + m2.focus);

  const PlaneBeam p = project(m1, origin, ex, ey, en);
  const PlaneBeam q = project(m2, origin, ex, ey, en);

  const double num = cross_integral_magnitude(p, q);
  const double den = std::sqrt(self_integral(p) * self_integral(q));
  return std::clamp(num / den, 0.0, 1.0);
}

GaussianMode apply_alignment_error(const GaussianMode& mode,
                                   const AlignmentError& error) {
  if (!(error.magnitude >= 0.0) || !std::isfinite(error.magnitude)) {
    throw std::domain_error("AlignmentError: magnitude must be nonnegative");
  }
  GaussianMode out = mode;
  switch (error.kind) {
    case AlignmentKind::WaistMismatch:
      out.waist = mode.waist * (1.0 + error.magnitude);
      break;
    case AlignmentKind::TransverseOffset: {
      // Transverse = perpendicular to the axis; offsets applied along x.
      const Vec3 ex = normalized(cross(Vec3{0.0, 1.0, 0.0}, mode.axis));
      out.focus = mode.focus + (error.magnitude * mode.waist) * ex;
      break;
    }
    case AlignmentKind::FocalShift:
      out.focus =
          mode.focus + (error.magnitude * mode.rayleigh_range()) * mode.axis;
      break;
    case AlignmentKind::AxisTilt: {
      const double theta = error.magnitude * mode.divergence();
      const Vec3 ex = normalized(cross(Vec3{0.0, 1.0, 0.0}, mode.axis));
      out.axis = normalized(std::cos(theta) * mode.axis +
                            std::sin(theta) * ex);
      break;
    }
  }
  return out;
}

AlignmentBudget alignment_budget(const GaussianMode& reference,
                                 std::span<const AlignmentError> errors) {
  AlignmentBudget budget;
  GaussianMode all = reference;
  for (const auto& error : errors) {
    budget.factors.push_back(
        overlap(reference, apply_alignment_error(reference, error)));
    budget.product *= budget.factors.back();
    all = apply_alignment_error(all, error);
  }
  budget.exact = overlap(reference, all);
  budget.discrepancy = std::abs(budget.product - budget.exact);
  return budget;
}

std::vector<ScanPoint> displacement_scan(const GaussianMode& m1,
                                         const GaussianMode& m2,
                                         std::span<const double> offsets) {
  std::vector<ScanPoint> points;
  points.reserve(offsets.size());
  const Vec3 ex = normalized(cross(Vec3{0.0, 1.0, 0.0}, m2.axis));
  for (double d : offsets) {
    if (!std::isfinite(d)) {
      throw std::domain_error("displacement_scan: offsets must be finite");
    }
    GaussianMode moved = m2;
    moved.focus = m2.focus + d * ex;
    const double k = overlap(m1, moved);
    points.push_back({d, 0.5 * (1.0 - k * k)});
  }
  return points;
}

double scan_ratio(double k_max, double waist, double center,
                  double displacement) {
  if (!(k_max >= 0.0 && k_max <= 1.0)) {
    throw std::domain_error("scan_ratio: K_max must lie in [0, 1]");
  }
  if (!(waist > 0.0)) {
    throw std::domain_error("scan_ratio: waist must be positive");
  }
  const double u = (displacement - center) / waist;
  return 0.5 * (1.0 - k_max * k_max * std::exp(-u * u));
}

} // namespace homsim
