#include <doctest.h>

#include <cmath>

#include "homsim/coincidence_model.hpp"
#include "homsim/photon_field.hpp"
#include "oracles.hpp"

using namespace homsim;

namespace {
constexpr double kGamma26 = 1.0 / 26e-9;

BroadeningParams at(double temperature, double eta = 1.0) {
  return {temperature, eta, kGamma26};
}
} // namespace

TEST_CASE("peak ratio anchors") {
  CHECK(peak_ratio(0.0) == doctest::Approx(0.5));
  CHECK(peak_ratio(1.0) == doctest::Approx(0.0));
  CHECK(peak_ratio(0.78) == doctest::Approx(0.1958).epsilon(1e-12));
  CHECK_THROWS_AS(peak_ratio(-0.1), std::domain_error);
  CHECK_THROWS_AS(peak_ratio(1.1), std::domain_error);
}

TEST_CASE("interference factor: closed-form anchors") {
  CHECK(averaged_interference_factor(0.0, at(180e-6)) == doctest::Approx(1.0));
  // Zero temperature: no broadening at any delay.
  for (double tau : {1e-9, 50e-9, 1e-6}) {
    CHECK(averaged_interference_factor(tau, at(0.0)) == doctest::Approx(1.0));
  }
  // At tau = 2 hbar / (eta kB T) the factor is exactly 2^-3.
  const double tau_star =
      2.0 * constants::hbar / (constants::k_boltzmann * 180e-6);
  CHECK(averaged_interference_factor(tau_star, at(180e-6)) ==
        doctest::Approx(0.125).epsilon(1e-12));
  // Even in tau, in (0, 1].
  for (double tau : {-80e-9, -10e-9, 5e-9, 120e-9}) {
    const double c = averaged_interference_factor(tau, at(180e-6));
    CHECK(c > 0.0);
    CHECK(c <= 1.0);
    CHECK(c == doctest::Approx(averaged_interference_factor(-tau, at(180e-6)))
                   .epsilon(1e-14));
  }
}

TEST_CASE("interference factor: Monte-Carlo oracle over lightshift pairs") {
  const double temperature = 180e-6;
  const BroadeningParams params = at(temperature);
  Rng rng(7);
  const int n_pairs = 200000;
  std::vector<double> delta(n_pairs);
  for (auto& d : delta) {
    d = (sample_lightshift_deficit(rng, temperature) -
         sample_lightshift_deficit(rng, temperature)) /
        constants::hbar;
  }
  for (int i = 0; i < 25; ++i) {
    const double tau = -120e-9 + i * 10e-9;
    double sum = 0.0;
    for (double d : delta) sum += std::cos(d * tau);
    const double mc = sum / n_pairs;
    CHECK(std::abs(mc - averaged_interference_factor(tau, params)) <= 0.01);
  }
}

TEST_CASE("broadened signal: anchors and consistency with the closed form") {
  SUBCASE("zero temperature reduces to flat contrast") {
    for (double tau : {-60e-9, -7e-9, 0.0, 13e-9, 90e-9}) {
      for (double k : {0.0, 0.5, 0.9}) {
        CHECK(broadened_signal(tau, k, at(0.0)) ==
              doctest::Approx(coincidence_density_closed(tau, k, 0.0,
                                                         kGamma26))
                  .epsilon(1e-14));
      }
    }
  }

  SUBCASE("perfect overlap dips to zero at zero delay, any temperature") {
    for (double t : {0.0, 100e-6, 200e-6}) {
      CHECK(broadened_signal(0.0, 1.0, at(t)) == doctest::Approx(0.0));
    }
  }

  SUBCASE("finite temperature widens the residual peak everywhere") {
    for (double tau : {-90e-9, -30e-9, -5e-9, 5e-9, 30e-9, 90e-9}) {
      CHECK(broadened_signal(tau, 0.7, at(180e-6)) >
            broadened_signal(tau, 0.7, at(0.0)));
    }
  }

  SUBCASE("full-signal Monte-Carlo oracle") {
    // Average the sharp-frequency closed form over sampled lightshift
    // differences and compare pointwise.
    const double temperature = 180e-6;
    Rng rng(21);
    const int n_pairs = 200000;
    std::vector<double> delta(n_pairs);
    for (auto& d : delta) {
      d = (sample_lightshift_deficit(rng, temperature) -
           sample_lightshift_deficit(rng, temperature)) /
          constants::hbar;
    }
    for (int i = 0; i <= 40; ++i) {
      const double tau = -100e-9 + i * 5e-9;
      double sum = 0.0;
      for (double d : delta) {
        sum += coincidence_density_closed(tau, 0.7, d, kGamma26);
      }
      const double mc = sum / n_pairs;
      CHECK(std::abs(mc - broadened_signal(tau, 0.7, at(temperature))) <=
            0.01);
    }
  }
}

TEST_CASE("residual peak: integrated coincidences grow with temperature") {
  const double k = 0.7;
  double previous = 0.0;
  for (double t : {0.0, 60e-6, 120e-6, 180e-6, 240e-6}) {
    const double integral = oracle::simpson(
        [&](double tau) { return broadened_signal(tau, k, at(t)); }, -26e-9,
        26e-9, 400);
    CHECK(integral > previous);
    previous = integral;
  }
}

TEST_CASE("residual peak width grows, dip width shrinks, with temperature") {
  double previous_fwhm = 0.0;
  for (double t : {0.0, 60e-6, 120e-6, 180e-6, 240e-6}) {
    const double fwhm = residual_peak_fwhm(0.7, at(t));
    CHECK(fwhm > previous_fwhm);
    previous_fwhm = fwhm;
  }
  // Zero temperature: plain exponential peak, FWHM = 2 ln2 / Gamma.
  CHECK(residual_peak_fwhm(0.7, at(0.0)) ==
        doctest::Approx(2.0 * std::log(2.0) * 26e-9).epsilon(1e-3));

  double previous_dip = 1.0;
  for (double t : {100e-6, 150e-6, 200e-6, 250e-6}) {
    const double width = dip_half_width(at(t));
    CHECK(width < previous_dip);
    previous_dip = width;
  }
  // Closed form: C(tau) = 1/2 at tau = sqrt(2^(1/3) - 1) / b.
  const BroadeningParams p = at(200e-6);
  CHECK(dip_half_width(p) ==
        doctest::Approx(std::sqrt(std::cbrt(2.0) - 1.0) / p.frequency_scale())
            .epsilon(1e-9));
}

TEST_CASE("broadening parameter validation") {
  CHECK_THROWS_AS(broadened_signal(0.0, 1.2, at(100e-6)), std::domain_error);
  CHECK_THROWS_AS(averaged_interference_factor(0.0, at(-1e-6)),
                  std::domain_error);
  BroadeningParams bad{100e-6, -1.0, kGamma26};
  CHECK_THROWS_AS(bad.validate(), std::domain_error);
}
