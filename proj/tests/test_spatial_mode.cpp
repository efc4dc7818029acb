#include <doctest.h>

#include <cmath>
#include <vector>

#include "homsim/spatial_mode.hpp"
#include "oracles.hpp"

using namespace homsim;

namespace {

GaussianMode reference_mode() {
  GaussianMode m;
  m.waist = 90e-6;
  m.wavelength = constants::d2_wavelength;
  return m;
}

} // namespace

TEST_CASE("overlap: identical modes give K = 1") {
  const GaussianMode m = reference_mode();
  CHECK(overlap(m, m) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("overlap: transverse offset closed form exp(-d^2/2w^2)") {
  const GaussianMode m1 = reference_mode();
  GaussianMode m2 = reference_mode();
  m2.focus = {90e-6, 0.0, 0.0}; // one waist
  const double k = overlap(m1, m2);
  CHECK(k == doctest::Approx(0.6065306597126334).epsilon(1e-9));
  CHECK(k == doctest::Approx(oracle::overlap_quadrature(m1, m2)).epsilon(1e-6));

  // Non-increasing in the offset magnitude.
  double previous = 1.0;
  for (double d : {10e-6, 30e-6, 60e-6, 120e-6, 250e-6}) {
    GaussianMode moved = reference_mode();
    moved.focus = {d, 0.0, 0.0};
    const double value = overlap(m1, moved);
    CHECK(value < previous);
    CHECK(value == doctest::Approx(std::exp(-d * d / (2.0 * 90e-6 * 90e-6)))
                       .epsilon(1e-9));
    previous = value;
  }
}

TEST_CASE("overlap: 16% waist mismatch lands near the reported 0.97 factor") {
  const GaussianMode m1 = reference_mode();
  GaussianMode m2 = reference_mode();
  m2.waist = 90e-6 * 1.16;
  const double k = overlap(m1, m2);
  // Closed form 2 w1 w2 / (w1^2 + w2^2) under the plane-overlap convention.
  CHECK(k == doctest::Approx(2.0 * 1.16 / (1.0 + 1.16 * 1.16)).epsilon(1e-9));
  CHECK(std::abs(k - 0.97) <= 0.02);
  CHECK(k == doctest::Approx(oracle::overlap_quadrature(m1, m2)).epsilon(1e-6));
}

TEST_CASE("overlap: focal shift matches the textbook coupling") {
  const double zr = reference_mode().rayleigh_range();
  GaussianMode m1 = reference_mode();
  GaussianMode m2 = reference_mode();
  m2.focus = {0.0, 0.0, zr};
  const double k = overlap(m1, m2);
  CHECK(k == doctest::Approx(1.0 / std::sqrt(1.0 + 0.25)).epsilon(1e-9));
  CHECK(k == doctest::Approx(oracle::overlap_quadrature(m1, m2, 768))
                 .epsilon(2e-5));
}

TEST_CASE("overlap: tilt as a phase ramp, e^(-theta^2/2theta0^2) at focus") {
  const GaussianMode m1 = reference_mode();
  const double theta0 = m1.divergence();
  GaussianMode m2 = reference_mode();
  m2.axis = normalized({std::sin(theta0), 0.0, std::cos(theta0)});
  const double k = overlap(m1, m2);
  CHECK(k == doctest::Approx(std::exp(-0.5)).epsilon(1e-4));
  CHECK(k == doctest::Approx(oracle::overlap_quadrature(m1, m2)).epsilon(1e-4));

  GaussianMode steep = reference_mode();
  steep.axis = normalized({std::sin(0.2), 0.0, std::cos(0.2)});
  CHECK_THROWS_AS(overlap(m1, steep), std::domain_error);
}

TEST_CASE("overlap: symmetric in its arguments and amplitude-scale free") {
  GaussianMode m1 = reference_mode();
  GaussianMode m2 = reference_mode();
  m2.waist = 80e-6;
  m2.focus = {40e-6, -20e-6, 5e-3};
  CHECK(overlap(m1, m2) == doctest::Approx(overlap(m2, m1)).epsilon(1e-14));
  // K is defined on normalized fields: scaling amplitudes in the quadrature
  // oracle cannot move it.
  const double plain = oracle::overlap_quadrature(m1, m2);
  const double scaled = oracle::overlap_quadrature(m1, m2, 512, 3.7, 0.4);
  CHECK(plain == doctest::Approx(scaled).epsilon(1e-12));
  CHECK(overlap(m1, m2) == doctest::Approx(plain).epsilon(1e-4));
}

TEST_CASE("alignment budget: empty list, single factor, 4% budget") {
  const GaussianMode m = reference_mode();

  SUBCASE("no errors: K = 1") {
    const AlignmentBudget budget = alignment_budget(m, {});
    CHECK(budget.product == doctest::Approx(1.0));
    CHECK(budget.exact == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("single error: the product is the exact overlap") {
    const std::vector<AlignmentError> errors = {
        {AlignmentKind::TransverseOffset, 0.7}};
    const AlignmentBudget budget = alignment_budget(m, errors);
    REQUIRE(budget.factors.size() == 1);
    CHECK(budget.discrepancy <= 1e-12);
    CHECK(budget.product ==
          doctest::Approx(std::exp(-0.7 * 0.7 / 2.0)).epsilon(1e-9));
  }

  SUBCASE("four simultaneous 4% errors keep K at or above 0.8") {
    const std::vector<AlignmentError> errors = {
        {AlignmentKind::WaistMismatch, 0.04},
        {AlignmentKind::TransverseOffset, 0.04},
        {AlignmentKind::FocalShift, 0.04},
        {AlignmentKind::AxisTilt, 0.04}};
    const AlignmentBudget budget = alignment_budget(m, errors);
    CHECK(budget.exact >= 0.8);
    CHECK(budget.product >= 0.8);
    // Independent small errors: the product approximation stays close.
    CHECK(budget.discrepancy <= 0.01);
  }
}

TEST_CASE("displacement scan: ratio curve and asymptote") {
  const GaussianMode m = reference_mode();
  const std::vector<double> offsets = {0.0, 45e-6, 90e-6, 180e-6, 600e-6};
  const auto points = displacement_scan(m, m, offsets);
  REQUIRE(points.size() == offsets.size());
  const double w = 90e-6;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double k = std::exp(-offsets[i] * offsets[i] / (2.0 * w * w));
    CHECK(points[i].ratio ==
          doctest::Approx(0.5 * (1.0 - k * k)).epsilon(1e-9));
  }
  // Fully distinguishable limit.
  CHECK(points.back().ratio == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("analytic scan curve anchors") {
  const double w = 90e-6;
  CHECK(scan_ratio(0.78, w, 0.0, 0.0) == doctest::Approx(0.1958).epsilon(1e-12));
  CHECK(scan_ratio(0.78, w, 0.0, w) ==
        doctest::Approx(0.38809107399564723).epsilon(1e-12));
  CHECK(scan_ratio(0.78, w, 0.0, 1.0) == doctest::Approx(0.5).epsilon(1e-12));

  // The same number through the geometric pipeline: offset modes with a
  // residual 0.78 factor folded in as K = 0.78 exp(-d^2 / 2w^2).
  GaussianMode m1 = reference_mode();
  GaussianMode m2 = reference_mode();
  m2.focus = {w, 0.0, 0.0};
  const double k_geo = 0.78 * overlap(m1, m2);
  CHECK(0.5 * (1.0 - k_geo * k_geo) ==
        doctest::Approx(scan_ratio(0.78, w, 0.0, w)).epsilon(1e-9));

  CHECK_THROWS_AS(scan_ratio(1.5, w, 0.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(scan_ratio(0.5, -1.0, 0.0, 0.0), std::domain_error);
}

TEST_CASE("mode validation") {
  GaussianMode bad = reference_mode();
  bad.axis = {0.0, 0.0, 2.0};
  CHECK_THROWS_AS(bad.validate(), std::domain_error);
  bad = reference_mode();
  bad.waist = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::domain_error);
}
