#include "homsim/coincidence_model.hpp"

#include <cmath>
#include <stdexcept>

namespace homsim {

void BroadeningParams::validate() const {
  if (!(temperature >= 0.0) || !std::isfinite(temperature)) {
    throw std::domain_error("BroadeningParams: temperature must be >= 0");
  }
  if (!(shift_factor >= 0.0) || !std::isfinite(shift_factor)) {
    throw std::domain_error("BroadeningParams: shift factor must be >= 0");
  }
  if (!(decay_rate > 0.0) || !std::isfinite(decay_rate)) {
    throw std::domain_error("BroadeningParams: decay rate must be positive");
  }
}

double peak_ratio(double K) {
  if (!(K >= 0.0 && K <= 1.0)) {
    throw std::domain_error("peak_ratio: K must lie in [0, 1]");
  }
  return 0.5 * (1.0 - K * K);
}

double averaged_interference_factor(double tau,
                                    const BroadeningParams& params) {
  params.validate();
  const double x = params.frequency_scale() * tau;
  const double base = 1.0 + x * x;
  return 1.0 / (base * base * base);
}

double broadened_signal(double tau, double K, const BroadeningParams& params) {
  if (!(K >= 0.0 && K <= 1.0)) {
    throw std::domain_error("broadened_signal: K must lie in [0, 1]");
  }
  params.validate();
  return std::exp(-params.decay_rate * std::abs(tau)) *
         (1.0 - K * K * averaged_interference_factor(tau, params));
}

double sample_lightshift_deficit(Rng& rng, double temperature) {
  if (!(temperature >= 0.0)) {
    throw std::domain_error("sample_lightshift_deficit: temperature must be >= 0");
  }
  return rng.gamma3(0.5 * constants::k_boltzmann * temperature);
}

double residual_peak_fwhm(double K, const BroadeningParams& params) {
  const auto signal = [&](double tau) {
    return broadened_signal(tau, K, params);
  };
  // Scan outward for the maximum (it sits at tau = 0 unless the dip
  // dominates), then bisect for the half-height crossing on each side.
  const double step = 0.05 / params.decay_rate;
  double peak = signal(0.0);
  double peak_tau = 0.0;
  for (int i = 1; i <= 400; ++i) {
    const double v = signal(i * step);
    if (v > peak) {
      peak = v;
      peak_tau = i * step;
    }
  }
  const double half = 0.5 * peak;
  const auto crossing = [&](double sign) {
    double lo = sign * peak_tau;
    double hi = lo + sign * step;
    while (signal(hi) > half) hi += sign * step;
    for (int i = 0; i < 80; ++i) {
      const double mid = 0.5 * (lo + hi);
      (signal(mid) > half ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };
  return crossing(1.0) - crossing(-1.0);
}

double dip_half_width(const BroadeningParams& params) {
  params.validate();
  if (params.frequency_scale() <= 0.0) {
    throw std::domain_error("dip_half_width: requires T > 0 and eta > 0");
  }
  // Bisect C(tau) = 1/2.
  double lo = 0.0;
  double hi = 1.0 / params.frequency_scale();
  while (averaged_interference_factor(hi, params) > 0.5) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (averaged_interference_factor(mid, params) > 0.5 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

} // namespace homsim
