#include "homsim/photon_field.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <vector>

#include "homsim/errors.hpp"

namespace homsim {

namespace {

constexpr double kAbsTolerance = 1e-9;  // on the dimensionless integral
constexpr int kMaxDepth = 32;
constexpr double kTailCut = 20.0;       // integrate to 20/Gamma; tail < e^-20

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw std::domain_error(std::string(what) + " must be finite");
  }
}

// Adaptive Simpson on [a, b]. Accumulates an error estimate and the
// evaluation count into diag; flags non-convergence instead of throwing so
// the caller can attach context.
class AdaptiveSimpson {
public:
  AdaptiveSimpson(std::function<double(double)> f, QuadratureDiagnostics& diag)
      : f_(std::move(f)), diag_(diag) {}

  double integrate(double a, double b, double tol) {
    const double fa = eval(a);
    const double fb = eval(b);
    const double m = 0.5 * (a + b);
    const double fm = eval(m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return recurse(a, b, fa, fm, fb, whole, tol, kMaxDepth);
  }

private:
  double eval(double x) {
    ++diag_.evaluations;
    return f_(x);
  }

  double recurse(double a, double b, double fa, double fm, double fb,
                 double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = eval(lm);
    const double frm = eval(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol || depth == 0) {
      diag_.error_estimate += std::abs(delta) / 15.0;
      return left + right + delta / 15.0;
    }
    return recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
  }

  std::function<double(double)> f_;
  QuadratureDiagnostics& diag_;
};

// Integrates f over [a, b] split at interior kinks (step-function edges).
double integrate_piecewise(const std::function<double(double)>& f, double a,
                           double b, std::vector<double> breaks,
                           QuadratureDiagnostics& diag) {
  breaks.push_back(a);
  breaks.push_back(b);
  std::sort(breaks.begin(), breaks.end());
  double total = 0.0;
  AdaptiveSimpson simpson(f, diag);
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double lo = std::clamp(breaks[i], a, b);
    const double hi = std::clamp(breaks[i + 1], a, b);
    if (hi - lo < 1e-300) continue;
    total += simpson.integrate(lo, hi, kAbsTolerance);
  }
  return total;
}

} // namespace

void PhotonWavepacket::validate() const {
  if (!(decay_rate > 0.0) || !std::isfinite(decay_rate)) {
    throw std::domain_error("PhotonWavepacket: decay rate must be positive");
  }
  check_finite(carrier_offset, "PhotonWavepacket: carrier offset");
  check_finite(emission_time, "PhotonWavepacket: emission time");
}

std::complex<double> wavepacket_amplitude(const PhotonWavepacket& wp,
                                          double t) {
  wp.validate();
  check_finite(t, "wavepacket_amplitude: t");
  const double dt = t - wp.emission_time;
  if (dt < 0.0) return {0.0, 0.0};
  const double envelope = std::exp(-0.5 * wp.decay_rate * dt);
  return std::polar(envelope, wp.carrier_offset * dt);
}

double coincidence_density_closed(double tau, double K, double delta_omega,
                                  double decay_rate) {
  if (!(decay_rate > 0.0) || !std::isfinite(decay_rate)) {
    throw std::domain_error("coincidence_density_closed: decay rate must be positive");
  }
  if (!(K >= 0.0 && K <= 1.0)) {
    throw std::domain_error("coincidence_density_closed: K must lie in [0, 1]");
  }
  check_finite(tau, "coincidence_density_closed: tau");
  check_finite(delta_omega, "coincidence_density_closed: delta_omega");
  return std::exp(-decay_rate * std::abs(tau)) *
         (1.0 - K * K * std::cos(delta_omega * tau));
}

double coincidence_density_integral(const PhotonWavepacket& wp1,
                                    const PhotonWavepacket& wp2, double K,
                                    double tau,
                                    QuadratureDiagnostics* diag) {
  wp1.validate();
  wp2.validate();
  if (!(K >= 0.0 && K <= 1.0)) {
    throw std::domain_error("coincidence_density_integral: K must lie in [0, 1]");
  }
  check_finite(tau, "coincidence_density_integral: tau");

  const double gamma_slow = std::min(wp1.decay_rate, wp2.decay_rate);
  const double k_sq = K * K;

  // Work in units of the slower decay so the integrand is O(1) over a
  // fixed-length window and the absolute tolerance is meaningful.
  const auto density = [&](double shift, double ksq,
                           QuadratureDiagnostics& d) {
    const auto integrand = [&](double s) {
      const double t = s / gamma_slow;
      const std::complex<double> a1 = wavepacket_amplitude(wp1, t + shift);
      const std::complex<double> a2 = wavepacket_amplitude(wp2, t);
      const std::complex<double> b1 = wavepacket_amplitude(wp2, t + shift);
      const std::complex<double> b2 = wavepacket_amplitude(wp1, t);
      const double direct = std::norm(a1 * a2) + std::norm(b1 * b2);
      const double cross =
          2.0 * ksq * std::real(a1 * a2 * std::conj(b1 * b2));
      return direct - cross;
    };
    // Supports start where each step function turns on.
    const double t_on = std::min({wp1.emission_time - shift,
                                  wp2.emission_time - shift,
                                  wp1.emission_time, wp2.emission_time});
    const double s_lo = gamma_slow * t_on;
    const double s_hi = s_lo + kTailCut;
    std::vector<double> breaks;
    for (double edge : {wp1.emission_time - shift, wp2.emission_time - shift,
                        wp1.emission_time, wp2.emission_time}) {
      breaks.push_back(gamma_slow * edge);
    }
    return integrate_piecewise(integrand, s_lo, s_hi, std::move(breaks), d);
  };

  QuadratureDiagnostics local;
  QuadratureDiagnostics& d = diag ? *diag : local;
  d = QuadratureDiagnostics{};

  const double raw = density(tau, k_sq, d);
  const double reference = density(0.0, 0.0, d);
  // Convergence is judged on the accumulated error estimate across all
  // pieces; per-interval tolerances bottom out at rounding noise.
  d.converged = d.error_estimate <= 50.0 * kAbsTolerance;
  if (!d.converged) {
    std::ostringstream msg;
    msg << "coincidence_density_integral: quadrature did not converge"
        << " (tau=" << tau << ", K=" << K
        << ", error estimate=" << d.error_estimate
        << ", evaluations=" << d.evaluations << ")";
    throw numerical_error(msg.str());
  }
  return std::max(0.0, raw / reference);
}

} // namespace homsim
