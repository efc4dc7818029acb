#pragma once

// Test-only oracles, kept independent of the production code paths they
// check: a brute-force plane quadrature for Gaussian mode overlaps, a
// two-sample Kolmogorov-Smirnov test, and small statistics helpers.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

#include "homsim/spatial_mode.hpp"
#include "homsim/vec.hpp"

namespace homsim::oracle {

// Exact paraxial Gaussian beam field at a lab-frame point, evaluated in the
// beam's own frame (no frozen-plane approximation).
inline std::complex<double> beam_field(const GaussianMode& m, const Vec3& r,
                                       double amplitude_scale = 1.0) {
  const Vec3 rel = r - m.focus;
  const double z = dot(rel, m.axis);
  const double rho_sq = norm_squared(rel) - z * z;
  const double zr = m.rayleigh_range();
  const double k = m.wavenumber();
  const double w_sq = m.waist * m.waist * (1.0 + (z / zr) * (z / zr));
  const double inv_r = z / (z * z + zr * zr);
  const double gouy = std::atan(z / zr);
  const double amp =
      amplitude_scale * (m.waist / std::sqrt(w_sq)) * std::exp(-rho_sq / w_sq);
  const double phase = k * z + 0.5 * k * rho_sq * inv_r - gouy;
  return std::polar(amp, phase);
}

// Overlap |<f1|f2>| / sqrt(<f1|f1><f2|f2>) by midpoint quadrature on the
// plane through the midpoint of the foci, extent +-5 of the larger projected
// waist plus the center separation.
inline double overlap_quadrature(const GaussianMode& m1,
                                 const GaussianMode& m2, int n = 512,
                                 double scale1 = 1.0, double scale2 = 1.0) {
  const Vec3 en = normalized(m1.axis + m2.axis);
  Vec3 seed = std::abs(en[0]) < 0.9 ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 1.0, 0.0};
  const Vec3 ex = normalized(cross(seed, en));
  const Vec3 ey = cross(en, ex);
  const Vec3 origin = 0.5 * (m1.focus + m2.focus);

  const auto projected_waist = [&](const GaussianMode& m) {
    const double z = dot(origin - m.focus, m.axis);
    const double zr = m.rayleigh_range();
    return m.waist * std::sqrt(1.0 + (z / zr) * (z / zr));
  };
  // Transverse center separation only; axial offsets do not widen the grid.
  const Vec3 dsep = m1.focus - m2.focus;
  const double sep = std::hypot(dot(dsep, ex), dot(dsep, ey));
  const double half =
      5.0 * std::max(projected_waist(m1), projected_waist(m2)) + sep;
  const double step = 2.0 * half / n;

  std::complex<double> cross_sum = 0.0;
  double self1 = 0.0;
  double self2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = -half + (i + 0.5) * step;
    for (int j = 0; j < n; ++j) {
      const double y = -half + (j + 0.5) * step;
      const Vec3 point = origin + x * ex + y * ey;
      const std::complex<double> f1 = beam_field(m1, point, scale1);
      const std::complex<double> f2 = beam_field(m2, point, scale2);
      cross_sum += std::conj(f1) * f2;
      self1 += std::norm(f1);
      self2 += std::norm(f2);
    }
  }
  return std::abs(cross_sum) / std::sqrt(self1 * self2);
}

// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j]) {
      ++i;
    } else {
      ++j;
    }
    const double fa = static_cast<double>(i) / a.size();
    const double fb = static_cast<double>(j) / b.size();
    d = std::max(d, std::abs(fa - fb));
  }
  return d;
}

// Critical value at significance alpha = 0.01.
inline double ks_critical_01(std::size_t n, std::size_t m) {
  const double c = 1.628; // c(alpha = 0.01)
  return c * std::sqrt((static_cast<double>(n) + m) /
                       (static_cast<double>(n) * m));
}

inline double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

inline double variance(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / (v.size() - 1);
}

// Simpson integration helper for test-side checks.
template <typename F>
double simpson(F f, double a, double b, int n) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

} // namespace homsim::oracle
