#include <doctest.h>

#include <cmath>
#include <vector>

#include "homsim/coincidence_model.hpp"
#include "homsim/inference.hpp"
#include "homsim/rng.hpp"
#include "homsim/spatial_mode.hpp"

using namespace homsim;

namespace {

constexpr double kGamma26 = 1.0 / 26e-9;

std::vector<PeakSample> model_samples(double k, double temperature,
                                      double amplitude = 1.0,
                                      double eta = 1.0,
                                      double sigma = 0.01) {
  BroadeningParams params{temperature, eta, kGamma26};
  std::vector<PeakSample> data;
  for (double tau = -100.0e-9; tau <= 100.0e-9; tau += 3.6e-9) {
    data.push_back({tau, amplitude * broadened_signal(tau, k, params), sigma});
  }
  return data;
}

} // namespace

TEST_CASE("zero-peak fit: noiseless self-consistency, tied amplitude") {
  const auto data = model_samples(0.7, 180e-6, 0.5);
  const FitResult fit = fit_zero_peak(data, kGamma26, 1.0);
  CHECK(fit.converged);
  CHECK(!fit.at_boundary);
  CHECK(std::abs(fit.params.at("K") - 0.7) <= 1e-6);
  CHECK(std::abs(fit.params.at("T") - 180e-6) <= 1e-9);
  CHECK(fit.params.at("amplitude") == doctest::Approx(0.5));
  CHECK(fit.chi_squared <= 1e-10);
  for (double r : fit.residuals) CHECK(std::abs(r) <= 1e-6);
  CHECK(fit.degrees_of_freedom == static_cast<int>(data.size()) - 2);
}

TEST_CASE("zero-peak fit: profiled amplitude recovers arbitrary scales") {
  const auto data = model_samples(0.7, 180e-6, 0.97);
  const FitResult fit = fit_zero_peak(data, kGamma26, 1.0, std::nullopt);
  CHECK(fit.converged);
  CHECK(std::abs(fit.params.at("K") - 0.7) <= 1e-5);
  CHECK(std::abs(fit.params.at("T") - 180e-6) <= 1e-8);
  CHECK(fit.params.at("amplitude") == doctest::Approx(0.97).epsilon(1e-5));
  CHECK(fit.degrees_of_freedom == static_cast<int>(data.size()) - 3);
}

TEST_CASE("zero-peak fit: zero-temperature data pins T at the bound") {
  const auto data = model_samples(0.82, 0.0, 0.5);
  const FitResult fit = fit_zero_peak(data, kGamma26, 1.0);
  CHECK(fit.params.at("K") == doctest::Approx(0.82).epsilon(1e-4));
  // Flat contrast: the fitted temperature collapses toward zero and is
  // reported as pinned.
  CHECK(fit.params.at("T") <= 2e-6);
  CHECK(fit.at_boundary);
}

TEST_CASE("zero-peak fit: eta and T enter only as a product") {
  const auto data = model_samples(0.65, 160e-6, 0.5, 1.0);
  const FitResult one = fit_zero_peak(data, kGamma26, 1.0);
  const FitResult two = fit_zero_peak(data, kGamma26, 2.0);
  CHECK(two.params.at("T") ==
        doctest::Approx(0.5 * one.params.at("T")).epsilon(1e-3));
  CHECK(two.params.at("K") ==
        doctest::Approx(one.params.at("K")).epsilon(1e-4));
}

TEST_CASE("zero-peak fit: hotter truth widens the fitted peak") {
  double previous_width = 0.0;
  for (double t : {60e-6, 120e-6, 180e-6, 240e-6}) {
    const auto data = model_samples(0.7, t, 0.5);
    const FitResult fit = fit_zero_peak(data, kGamma26, 1.0);
    BroadeningParams fitted{fit.params.at("T"), 1.0, kGamma26};
    const double width = residual_peak_fwhm(fit.params.at("K"), fitted);
    CHECK(width > previous_width);
    previous_width = width;
  }
}

TEST_CASE("zero-peak fit: Poisson trials recover K and T with honest sigmas") {
  // Parametric quick check at roughly experiment-scale counts; the 500-trial
  // ensemble runs in the acceptance suite.
  Rng rng(99);
  const double k_true = 0.7;
  const double t_true = 180e-6;
  const double counts_scale = 140.0; // counts per bin at unit model value
  int covered_k = 0;
  int k_in_band = 0;
  int t_in_band = 0;
  double t_mean = 0.0;
  const int trials = 40;
  for (int trial = 0; trial < trials; ++trial) {
    BroadeningParams params{t_true, 1.0, kGamma26};
    std::vector<PeakSample> data;
    for (double tau = -100.0e-9; tau <= 100.0e-9; tau += 3.6e-9) {
      const double mean =
          counts_scale * 0.5 * broadened_signal(tau, k_true, params);
      // Poisson draw via exponential gaps.
      const double n = static_cast<double>(rng.poisson(mean));
      data.push_back({tau, n / counts_scale,
                      std::sqrt(std::max(n, 1.0)) / counts_scale});
    }
    const FitResult fit = fit_zero_peak(data, kGamma26, 1.0);
    CHECK(fit.converged);
    if (std::abs(fit.params.at("K") - k_true) <= fit.sigmas.at("K")) {
      ++covered_k;
    }
    if (std::abs(fit.params.at("K") - k_true) <= 0.1) ++k_in_band;
    if (std::abs(fit.params.at("T") - t_true) <= 60e-6) ++t_in_band;
    t_mean += fit.params.at("T");
  }
  t_mean /= trials;
  // Unbiased recovery at roughly 600 counts per trial (sigma_T ~ 35 uK).
  CHECK(std::abs(t_mean - t_true) <= 20e-6);
  CHECK(k_in_band == trials);
  CHECK(t_in_band >= trials * 3 / 4);
  // 68% nominal coverage, loose binomial window for 40 trials.
  CHECK(covered_k >= 18);
  CHECK(covered_k <= 39);
}

TEST_CASE("zero-peak fit: contract violations") {
  std::vector<PeakSample> tiny = {{0.0, 1.0, 0.1}, {1e-9, 0.9, 0.1}};
  CHECK_THROWS_AS(fit_zero_peak(tiny, kGamma26, 1.0), std::domain_error);

  auto bad_sigma = model_samples(0.7, 100e-6);
  bad_sigma[3].sigma = 0.0;
  CHECK_THROWS_AS(fit_zero_peak(bad_sigma, kGamma26, 1.0), std::domain_error);

  // Samples that never come near the peak cannot constrain it.
  std::vector<PeakSample> far;
  for (int i = 0; i < 12; ++i) {
    far.push_back({200e-9 + i * 3.6e-9, 0.1, 0.01});
  }
  CHECK_THROWS_AS(fit_zero_peak(far, kGamma26, 1.0), std::domain_error);
}

TEST_CASE("scan fit: noiseless recovery and the 0.5 asymptote") {
  const double w = 90e-6;
  std::vector<RatioPoint> points;
  for (double d = 0.0; d <= 260e-6; d += 20e-6) {
    points.push_back({d, scan_ratio(0.78, w, 12e-6, d), 0.01});
  }
  const FitResult fit = fit_displacement_scan(points, w);
  CHECK(fit.converged);
  CHECK(std::abs(fit.params.at("K_max") - 0.78) <= 1e-6);
  CHECK(std::abs(fit.params.at("center") - 12e-6) <= 1e-10);
  // Structure of the fitted curve: distinguishable photons far away.
  CHECK(scan_ratio(fit.params.at("K_max"), w, fit.params.at("center"), 1.0) ==
        doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("scan fit: noisy experiment-like scan brackets K_max") {
  Rng rng(123);
  const double w = 90e-6;
  std::vector<RatioPoint> points;
  for (double d = 0.0; d <= 240e-6; d += 30e-6) {
    const double sigma = 0.015;
    const double r = scan_ratio(0.78, w, 0.0, d) + sigma * rng.normal();
    points.push_back({d, r, sigma});
  }
  const FitResult fit = fit_displacement_scan(points, w);
  CHECK(std::abs(fit.params.at("K_max") - 0.78) <= 3.0 * 0.03);
  CHECK(fit.sigmas.at("K_max") > 0.0);
  CHECK(fit.sigmas.at("K_max") < 0.1);
}

TEST_CASE("scan fit: contract violations") {
  const double w = 90e-6;
  std::vector<RatioPoint> few = {{0.0, 0.2, 0.01}, {1e-5, 0.25, 0.01},
                                 {2e-5, 0.3, 0.01}};
  CHECK_THROWS_AS(fit_displacement_scan(few, w), std::domain_error);

  std::vector<RatioPoint> degenerate(6, RatioPoint{50e-6, 0.3, 0.01});
  CHECK_THROWS_AS(fit_displacement_scan(degenerate, w), std::domain_error);

  std::vector<RatioPoint> ok;
  for (double d = 0.0; d <= 100e-6; d += 20e-6) {
    ok.push_back({d, scan_ratio(0.6, w, 0.0, d), 0.01});
  }
  CHECK_THROWS_AS(fit_displacement_scan(ok, -w), std::domain_error);
}
