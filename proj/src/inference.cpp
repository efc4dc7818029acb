#include "homsim/inference.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "homsim/coincidence_model.hpp"
#include "homsim/errors.hpp"
#include "homsim/spatial_mode.hpp"

namespace homsim {

namespace {

using Point = std::array<double, 2>;
using Objective = std::function<double(const Point&)>;

struct Bounds {
  Point lo;
  Point hi;

  Point clamp(Point p) const {
    for (int i = 0; i < 2; ++i) p[i] = std::clamp(p[i], lo[i], hi[i]);
    return p;
  }
};

struct MinimizeOutcome {
  Point best{};
  double value = std::numeric_limits<double>::infinity();
  bool converged = false;
  int iterations = 0;
};

// Nelder-Mead on two bounded parameters; evaluations are clamped to the box.
MinimizeOutcome nelder_mead(const Objective& f, const Bounds& bounds,
                            Point start, int max_iterations = 3000) {
  const auto eval = [&](const Point& p) { return f(bounds.clamp(p)); };
  std::array<Point, 3> simplex;
  simplex[0] = bounds.clamp(start);
  for (int i = 0; i < 2; ++i) {
    Point p = simplex[0];
    const double span = bounds.hi[i] - bounds.lo[i];
    p[i] = bounds.clamp({p[0] + (i == 0 ? 0.1 * span : 0.0),
                         p[1] + (i == 1 ? 0.1 * span : 0.0)})[i];
    if (p[i] == simplex[0][i]) p[i] -= 0.1 * span;
    simplex[i + 1] = bounds.clamp(p);
  }
  std::array<double, 3> value{eval(simplex[0]), eval(simplex[1]),
                              eval(simplex[2])};

  MinimizeOutcome out;
  double last_improved_value = std::numeric_limits<double>::infinity();
  int stagnant = 0;
  for (int iter = 0; iter < max_iterations; ++iter) {
    // Order best..worst.
    std::array<int, 3> idx{0, 1, 2};
    std::sort(idx.begin(), idx.end(),
              [&](int a, int b) { return value[a] < value[b]; });
    const Point& best = simplex[idx[0]];
    const Point& worst = simplex[idx[2]];
    out.best = best;
    out.value = value[idx[0]];
    out.iterations = iter;

    // Box-normalized simplex size.
    double size = 0.0;
    for (int i = 0; i < 2; ++i) {
      const double scale = bounds.hi[i] - bounds.lo[i];
      size = std::max(size, std::abs(simplex[idx[1]][i] - best[i]) / scale);
      size = std::max(size, std::abs(worst[i] - best[i]) / scale);
    }
    const double spread = value[idx[2]] - value[idx[0]];
    if (out.value < last_improved_value - 1e-11 * (1.0 + std::abs(out.value))) {
      last_improved_value = out.value;
      stagnant = 0;
    } else {
      ++stagnant;
    }
    if (size < 1e-10 || spread < 1e-13 * (1.0 + std::abs(out.value)) ||
        stagnant > 150) {
      out.converged = true;
      return out;
    }

    const Point centroid{0.5 * (simplex[idx[0]][0] + simplex[idx[1]][0]),
                         0.5 * (simplex[idx[0]][1] + simplex[idx[1]][1])};
    const auto along = [&](double t) {
      return bounds.clamp({centroid[0] + t * (centroid[0] - worst[0]),
                           centroid[1] + t * (centroid[1] - worst[1])});
    };
    const Point reflected = along(1.0);
    const double fr = eval(reflected);
    if (fr < value[idx[0]]) {
      const Point expanded = along(2.0);
      const double fe = eval(expanded);
      simplex[idx[2]] = fe < fr ? expanded : reflected;
      value[idx[2]] = std::min(fe, fr);
    } else if (fr < value[idx[1]]) {
      simplex[idx[2]] = reflected;
      value[idx[2]] = fr;
    } else {
      const Point contracted = along(-0.5);
      const double fc = eval(contracted);
      if (fc < value[idx[2]]) {
        simplex[idx[2]] = contracted;
        value[idx[2]] = fc;
      } else {
        for (int j : {idx[1], idx[2]}) {
          for (int i = 0; i < 2; ++i) {
            simplex[j][i] = 0.5 * (simplex[j][i] + simplex[idx[0]][i]);
          }
          value[j] = eval(simplex[j]);
        }
      }
    }
  }
  return out;
}

// One-sigma uncertainties from the chi^2 curvature: cov = 2 H^-1.
std::array<double, 2> curvature_sigmas(const Objective& f, const Bounds& b,
                                       const Point& p) {
  std::array<double, 2> h{};
  for (int i = 0; i < 2; ++i) {
    h[i] = std::max(1e-3 * std::abs(p[i]), 1e-4 * (b.hi[i] - b.lo[i]));
  }
  const auto at = [&](double d0, double d1) {
    return f(b.clamp({p[0] + d0, p[1] + d1}));
  };
  const double f0 = at(0, 0);
  double h00 = (at(h[0], 0) - 2 * f0 + at(-h[0], 0)) / (h[0] * h[0]);
  double h11 = (at(0, h[1]) - 2 * f0 + at(0, -h[1])) / (h[1] * h[1]);
  double h01 = (at(h[0], h[1]) - at(h[0], -h[1]) - at(-h[0], h[1]) +
                at(-h[0], -h[1])) /
               (4 * h[0] * h[1]);
  const double det = h00 * h11 - h01 * h01;
  std::array<double, 2> sigma{0.0, 0.0};
  if (det > 0.0 && h00 > 0.0 && h11 > 0.0) {
    sigma[0] = std::sqrt(2.0 * h11 / det);
    sigma[1] = std::sqrt(2.0 * h00 / det);
  } else {
    if (h00 > 0.0) sigma[0] = std::sqrt(2.0 / h00);
    if (h11 > 0.0) sigma[1] = std::sqrt(2.0 / h11);
  }
  return sigma;
}

MinimizeOutcome multistart(const Objective& f, const Bounds& bounds,
                           std::span<const Point> starts) {
  MinimizeOutcome best;
  for (const auto& start : starts) {
    const MinimizeOutcome out = nelder_mead(f, bounds, start);
    if (out.converged && out.value < best.value) best = out;
  }
  if (!best.converged) {
    std::ostringstream msg;
    msg << "fit did not converge from any of " << starts.size()
        << " starts; best chi2=" << best.value << " at (" << best.best[0]
        << ", " << best.best[1] << ") after " << best.iterations
        << " iterations";
    throw numerical_error(msg.str());
  }
  return best;
}

} // namespace

namespace {

// Average of the broadened signal over a bin, split at the tau = 0 kink.
double bin_averaged_signal(double center, double width, double k,
                           const BroadeningParams& params) {
  const auto simpson3 = [&](double a, double b) {
    return (b - a) / 6.0 *
           (broadened_signal(a, k, params) +
            4.0 * broadened_signal(0.5 * (a + b), k, params) +
            broadened_signal(b, k, params));
  };
  const double lo = center - 0.5 * width;
  const double hi = center + 0.5 * width;
  double integral = 0.0;
  if (lo < 0.0 && hi > 0.0) {
    integral = simpson3(lo, 0.0) + simpson3(0.0, hi);
  } else {
    integral = simpson3(lo, hi);
  }
  return integral / width;
}

} // namespace

FitResult fit_zero_peak(std::span<const PeakSample> data, double decay_rate,
                        double shift_factor,
                        std::optional<double> fixed_amplitude,
                        double bin_width) {
  if (data.size() < 8) {
    throw std::domain_error("fit_zero_peak: need at least 8 samples");
  }
  if (!(decay_rate > 0.0) || !(shift_factor > 0.0)) {
    throw std::domain_error("fit_zero_peak: decay rate and eta must be positive");
  }
  if (bin_width < 0.0) {
    throw std::domain_error("fit_zero_peak: bin width must be >= 0");
  }
  if (fixed_amplitude && !(*fixed_amplitude > 0.0)) {
    throw std::domain_error("fit_zero_peak: fixed amplitude must be positive");
  }
  double closest = std::numeric_limits<double>::infinity();
  for (const auto& s : data) {
    if (!(s.sigma > 0.0)) {
      throw std::domain_error("fit_zero_peak: sigmas must be positive");
    }
    closest = std::min(closest, std::abs(s.tau));
  }
  if (closest > 1.0 / decay_rate) {
    throw std::domain_error("fit_zero_peak: samples do not cover the peak");
  }

  // Histogram data carry the bin flattening of the exponential cusp, both in
  // each bin average and through the reference-height normalization.
  const double flatten =
      bin_width > 0.0
          ? bin_averaged_signal(0.0, bin_width, 0.0,
                                BroadeningParams{0.0, shift_factor, decay_rate})
          : 1.0;
  const auto model_value = [&](double tau, double k,
                               const BroadeningParams& broadening) {
    if (bin_width <= 0.0) return broadened_signal(tau, k, broadening);
    return bin_averaged_signal(tau, bin_width, k, broadening) / flatten;
  };

  // Working copy of the weights. Counting-noise sigmas estimated from the
  // observed bin contents bias low-count fits (low-fluctuating bins get the
  // highest weight), so after a first pass the sigmas are replaced by their
  // expectation under the fitted model and the fit repeats.
  std::vector<double> sigma(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) sigma[i] = data[i].sigma;

  const auto amplitude_for = [&](const Point& p) {
    if (fixed_amplitude) return *fixed_amplitude;
    BroadeningParams broadening{p[1], shift_factor, decay_rate};
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double g = model_value(data[i].tau, p[0], broadening);
      const double w = 1.0 / (sigma[i] * sigma[i]);
      num += data[i].value * g * w;
      den += g * g * w;
    }
    return den > 0.0 ? std::max(num / den, 0.0) : 0.0;
  };

  const auto chi2 = [&](const Point& p) {
    BroadeningParams broadening{p[1], shift_factor, decay_rate};
    const double amplitude = amplitude_for(p);
    double total = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double g = model_value(data[i].tau, p[0], broadening);
      const double r = (data[i].value - amplitude * g) / sigma[i];
      total += r * r;
    }
    return total;
  };

  const Bounds bounds{{0.0, 0.0}, {1.0, 5e-3}};
  std::vector<Point> starts;
  for (double k : {0.2, 0.5, 0.8}) {
    for (double t : {3e-5, 1.2e-4, 3e-4}) starts.push_back({k, t});
  }
  MinimizeOutcome best = multistart(chi2, bounds, starts);

  // Expected-count reweighting. The per-bin counts scale follows from the
  // supplied sigmas themselves (n = (value/sigma)^2 at value > 0).
  {
    std::vector<double> scales;
    for (const auto& s : data) {
      if (s.value > 0.0) scales.push_back(s.value / (s.sigma * s.sigma));
    }
    if (scales.size() >= data.size() / 2) {
      std::nth_element(scales.begin(), scales.begin() + scales.size() / 2,
                       scales.end());
      const double counts_per_unit = scales[scales.size() / 2];
      if (counts_per_unit > 0.0 && std::isfinite(counts_per_unit)) {
        BroadeningParams broadening{best.best[1], shift_factor, decay_rate};
        const double amplitude = amplitude_for(best.best);
        for (std::size_t i = 0; i < data.size(); ++i) {
          const double expected =
              amplitude * model_value(data[i].tau, best.best[0], broadening) *
              counts_per_unit;
          sigma[i] = std::sqrt(std::max(expected, 1.0)) / counts_per_unit;
        }
        best = multistart(chi2, bounds, starts);
      }
    }
  }

  FitResult result;
  result.params["K"] = best.best[0];
  result.params["T"] = best.best[1];
  const auto curvature = curvature_sigmas(chi2, bounds, best.best);
  result.sigmas["K"] = curvature[0];
  result.sigmas["T"] = curvature[1];
  result.chi_squared = best.value;
  result.degrees_of_freedom =
      static_cast<int>(data.size()) - (fixed_amplitude ? 2 : 3);
  result.converged = true;
  result.at_boundary = best.best[0] <= bounds.lo[0] + 1e-9 ||
                       best.best[0] >= bounds.hi[0] - 1e-9 ||
                       best.best[1] <= bounds.lo[1] + 1e-12 ||
                       best.best[1] >= bounds.hi[1] - 1e-9;

  BroadeningParams broadening{best.best[1], shift_factor, decay_rate};
  const double amplitude = amplitude_for(best.best);
  result.params["amplitude"] = amplitude;
  for (const auto& s : data) {
    const double g = model_value(s.tau, best.best[0], broadening);
    result.residuals.push_back(s.value - amplitude * g);
  }
  return result;
}

FitResult fit_displacement_scan(std::span<const RatioPoint> points,
                                double waist) {
  if (points.size() < 4) {
    throw std::domain_error("fit_displacement_scan: need at least 4 points");
  }
  if (!(waist > 0.0)) {
    throw std::domain_error("fit_displacement_scan: waist must be positive");
  }
  double d_min = points[0].displacement;
  double d_max = points[0].displacement;
  for (const auto& p : points) {
    if (!(p.sigma > 0.0)) {
      throw std::domain_error("fit_displacement_scan: sigmas must be positive");
    }
    d_min = std::min(d_min, p.displacement);
    d_max = std::max(d_max, p.displacement);
  }
  if (d_max - d_min < 1e-12) {
    throw std::domain_error("fit_displacement_scan: degenerate scan");
  }

  const auto chi2 = [&](const Point& p) {
    double total = 0.0;
    for (const auto& pt : points) {
      const double model = scan_ratio(p[0], waist, p[1], pt.displacement);
      const double r = (pt.ratio - model) / pt.sigma;
      total += r * r;
    }
    return total;
  };

  const Bounds bounds{{0.0, d_min - waist}, {1.0, d_max + waist}};
  std::vector<Point> starts;
  for (double k : {0.3, 0.6, 0.9}) {
    for (double c : {d_min, 0.5 * (d_min + d_max), d_max}) {
      starts.push_back({k, c});
    }
  }
  const MinimizeOutcome best = multistart(chi2, bounds, starts);

  FitResult result;
  result.params["K_max"] = best.best[0];
  result.params["center"] = best.best[1];
  const auto sigma = curvature_sigmas(chi2, bounds, best.best);
  result.sigmas["K_max"] = sigma[0];
  result.sigmas["center"] = sigma[1];
  result.chi_squared = best.value;
  result.degrees_of_freedom = static_cast<int>(points.size()) - 2;
  result.converged = true;
  result.at_boundary = best.best[0] <= 1e-9 || best.best[0] >= 1.0 - 1e-9;
  for (const auto& pt : points) {
    result.residuals.push_back(
        pt.ratio - scan_ratio(best.best[0], waist, best.best[1],
                              pt.displacement));
  }
  return result;
}

} // namespace homsim
