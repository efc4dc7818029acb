#include "homsim/experiment_sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <thread>

#include "homsim/errors.hpp"

namespace homsim {

namespace {

struct Event {
  double time;
  int detector; // 0 = A (start), 1 = B (stop)
};

struct Grid {
  double start = 0.0;
  double width = 1.0;
  std::size_t bins = 0;

  static Grid centered(double range, double width) {
    Grid g;
    const auto half = static_cast<std::size_t>(std::llround(range / width));
    g.width = width;
    g.bins = 2 * half + 1;
    g.start = -(static_cast<double>(half) + 0.5) * width;
    return g;
  }

  int index(double t) const {
    const double x = (t - start) / width;
    if (x < 0.0 || x >= static_cast<double>(bins)) return -1;
    return static_cast<int>(x);
  }
};

struct Accumulator {
  std::vector<std::uint64_t> counts;
  ExperimentTallies tallies;

  explicit Accumulator(std::size_t bins) : counts(bins, 0) {}

  void merge(const Accumulator& other) {
    for (std::size_t i = 0; i < counts.size(); ++i) {
      counts[i] += other.counts[i];
    }
    auto& t = tallies;
    const auto& o = other.tallies;
    t.pulses += o.pulses;
    t.emitted += o.emitted;
    t.detected += o.detected;
    t.zero_window_pairs += o.zero_window_pairs;
    t.coincidences += o.coincidences;
    t.dark_counts += o.dark_counts;
    t.atom_bursts_lost += o.atom_bursts_lost;
    t.escapes += o.escapes;
  }
};

// Per-pulse emission outcome of one atom within a burst.
struct Emission {
  bool emitted = false;
  double deficit = 0.0; // lightshift deficit at the pulse, J
};

class LoadSimulator {
public:
  LoadSimulator(const SequenceConfig& seq, const DetectionConfig& det,
                const PhysicsModel& physics, const Grid& grid,
                Accumulator& accum, Rng& rng)
      : seq_(seq), det_(det), physics_(physics), grid_(grid), accum_(accum),
        rng_(rng) {}

  void run() {
    const double burst_len = seq_.burst_duration();
    const double load_period = burst_len + seq_.cooling_duration;
    const double survival = seq_.burst_survival();
    const double gamma = physics_.emitter.decay_rate();
    const double excitation = physics_.emitter.excitation_probability;

    bool present[2] = {true, true};
    for (std::uint32_t burst = 0; burst < seq_.bursts_per_load; ++burst) {
      const double t0 = burst * load_period;
      for (int k = 0; k < 2; ++k) {
        if (present[k] && !rng_.bernoulli(survival)) {
          present[k] = false;
        }
        if (!present[k]) ++accum_.tallies.atom_bursts_lost;
      }
      add_dark_counts(t0, burst_len);

      // Per-pulse emission tables for this burst.
      std::optional<std::vector<Emission>> table[2];
      if (physics_.kind == PhysicsModel::Kind::TrapMonteCarlo) {
        for (int k = 0; k < 2; ++k) {
          if (present[k]) {
            table[k] = trajectory_emissions(present[k]);
          }
        }
      }

      for (std::uint32_t pulse = 0; pulse < seq_.pulses_per_burst; ++pulse) {
        ++accum_.tallies.pulses;
        const double tp = t0 + pulse * seq_.pulse_period;

        bool detected[2] = {false, false};
        double time[2] = {0.0, 0.0};
        double deficit[2] = {0.0, 0.0};
        bool have_deficit[2] = {false, false};

        for (int k = 0; k < 2; ++k) {
          bool emitted = false;
          if (physics_.kind == PhysicsModel::Kind::Analytic) {
            emitted = present[k] && rng_.bernoulli(excitation);
          } else if (table[k]) {
            emitted = (*table[k])[pulse].emitted;
            if (emitted) {
              deficit[k] = (*table[k])[pulse].deficit;
              have_deficit[k] = true;
            }
          }
          if (!emitted) continue;
          ++accum_.tallies.emitted;
          if (!rng_.bernoulli(det_.efficiency)) continue;
          detected[k] = true;
          ++accum_.tallies.detected;
          time[k] = tp + rng_.exponential(gamma);
        }

        route_pulse(detected, time, deficit, have_deficit);
      }
    }

    histogram_pairs();
  }

private:
  // Lightshift deficits along one simulated burst trajectory.
  std::vector<Emission> trajectory_emissions(bool& still_present) {
    const AtomState start = sample_thermal_state(
        physics_.trap, physics_.emitter, physics_.temperature, rng_);
    const PulseTrainResult res =
        simulate_pulse_train(start, physics_.trap, physics_.emitter, seq_,
                             rng_, physics_.pulse_options);
    std::vector<Emission> table(seq_.pulses_per_burst);
    for (const auto& rec : res.lightshifts) {
      table[rec.pulse_index] = {true, physics_.trap.depth - rec.lightshift};
    }
    if (res.escaped) {
      ++accum_.tallies.escapes;
      still_present = false;
    }
    return table;
  }

  void route_pulse(const bool detected[2], const double time[2],
                   double deficit[2], const bool have_deficit[2]) {
    if (detected[0] && detected[1]) {
      ++accum_.tallies.zero_window_pairs;
      if (det_.configuration == BeamConfiguration::Separator) {
        push(time[0], 0);
        push(time[1], 1);
        return;
      }
      for (int k = 0; k < 2; ++k) {
        if (!have_deficit[k]) {
          deficit[k] =
              sample_lightshift_deficit(rng_, physics_.temperature);
        }
      }
      const double delta_omega =
          physics_.shift_factor * (deficit[0] - deficit[1]) / constants::hbar;
      const double dt = time[0] - time[1];
      const double k2 = physics_.overlap_k * physics_.overlap_k;
      const double p_split = 0.5 * (1.0 - k2 * std::cos(delta_omega * dt));
      if (rng_.bernoulli(p_split)) {
        const int first = rng_.bernoulli(0.5) ? 0 : 1;
        push(time[0], first);
        push(time[1], 1 - first);
      } else {
        const int port = rng_.bernoulli(0.5) ? 0 : 1;
        push(time[0], port);
        push(time[1], port);
      }
      return;
    }
    for (int k = 0; k < 2; ++k) {
      if (!detected[k]) continue;
      if (det_.configuration == BeamConfiguration::Separator) {
        push(time[k], k);
      } else {
        push(time[k], rng_.bernoulli(0.5) ? 0 : 1);
      }
    }
  }

  void push(double t, int detector) {
    if (det_.jitter_sigma > 0.0) t += rng_.normal(0.0, det_.jitter_sigma);
    events_[detector].push_back({t, detector});
  }

  void add_dark_counts(double t0, double burst_len) {
    if (det_.background_rate <= 0.0) return;
    const double lo = t0 - det_.histogram_range;
    const double span = burst_len + 2.0 * det_.histogram_range;
    for (int k = 0; k < 2; ++k) {
      const std::uint64_t n = rng_.poisson(det_.background_rate * span);
      accum_.tallies.dark_counts += n;
      for (std::uint64_t i = 0; i < n; ++i) {
        events_[k].push_back({lo + span * rng_.uniform(), k});
      }
    }
  }

  void histogram_pairs() {
    auto by_time = [](const Event& a, const Event& b) {
      return a.time < b.time;
    };
    std::sort(events_[0].begin(), events_[0].end(), by_time);
    std::sort(events_[1].begin(), events_[1].end(), by_time);
    const auto& starts = events_[0];
    const auto& stops = events_[1];
    const double range = det_.histogram_range;
    std::size_t lo = 0;
    for (const auto& a : starts) {
      while (lo < stops.size() && stops[lo].time < a.time - range) ++lo;
      for (std::size_t j = lo; j < stops.size() && stops[j].time <= a.time + range;
           ++j) {
        const int bin = grid_.index(stops[j].time - a.time);
        if (bin >= 0) {
          ++accum_.counts[bin];
          ++accum_.tallies.coincidences;
        }
      }
    }
  }

  const SequenceConfig& seq_;
  const DetectionConfig& det_;
  const PhysicsModel& physics_;
  const Grid& grid_;
  Accumulator& accum_;
  Rng& rng_;
  std::vector<Event> events_[2];
};

} // namespace

std::string to_string(BeamConfiguration c) {
  return c == BeamConfiguration::Mixer5050 ? "mixer" : "separator";
}

BeamConfiguration beam_configuration_from_string(const std::string& s) {
  if (s == "mixer" || s == "mixer5050" || s == "50/50") {
    return BeamConfiguration::Mixer5050;
  }
  if (s == "separator") return BeamConfiguration::Separator;
  throw std::domain_error("unknown beam configuration: " + s);
}

void DetectionConfig::validate() const {
  if (!(efficiency >= 0.0 && efficiency <= 1.0)) {
    throw std::domain_error("DetectionConfig: efficiency must lie in [0, 1]");
  }
  if (!(bin_width > 0.0) || !(histogram_range > bin_width)) {
    throw std::domain_error("DetectionConfig: invalid binning");
  }
  if (rebin_factor < 1) {
    throw std::domain_error("DetectionConfig: rebin factor must be >= 1");
  }
  if (!(background_rate >= 0.0) || !(jitter_sigma >= 0.0)) {
    throw std::domain_error("DetectionConfig: negative rate or jitter");
  }
}

void PhysicsModel::validate() const {
  if (!(overlap_k >= 0.0 && overlap_k <= 1.0)) {
    throw std::domain_error("PhysicsModel: overlap K must lie in [0, 1]");
  }
  if (!(temperature >= 0.0) || !(shift_factor >= 0.0)) {
    throw std::domain_error("PhysicsModel: temperature and shift factor must be >= 0");
  }
  emitter.validate();
  if (kind == Kind::TrapMonteCarlo) trap.validate();
}

std::uint64_t CoincidenceHistogram::total_counts() const {
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  return total;
}

CoincidenceHistogram run_experiment(const SequenceConfig& seq,
                                    const DetectionConfig& det,
                                    const PhysicsModel& physics,
                                    std::uint64_t n_loads, std::uint64_t seed,
                                    int parallelism) {
  seq.validate();
  det.validate();
  physics.validate();

  const Grid grid = Grid::centered(det.histogram_range, det.bin_width);
  const int workers =
      std::max(1, std::min<int>(parallelism, static_cast<int>(
                                                 std::max<std::uint64_t>(
                                                     n_loads, 1))));

  std::vector<Accumulator> partials(workers, Accumulator(grid.bins));
  std::atomic<std::uint64_t> next{0};
  auto work = [&](int w) {
    for (std::uint64_t load = next.fetch_add(1); load < n_loads;
         load = next.fetch_add(1)) {
      Rng rng(seed, load);
      LoadSimulator sim(seq, det, physics, grid, partials[w], rng);
      sim.run();
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (int w = 1; w < workers; ++w) partials[0].merge(partials[w]);

  CoincidenceHistogram hist;
  hist.bin_width = grid.width;
  hist.start = grid.start;
  hist.counts = std::move(partials[0].counts);
  hist.configuration = det.configuration;
  hist.total_pulse_cycles =
      n_loads * seq.bursts_per_load * seq.pulses_per_burst;
  hist.seed = seed;
  hist.tallies = partials[0].tallies;
  return hist;
}

CoincidenceHistogram rebin(const CoincidenceHistogram& hist, int factor) {
  if (factor < 1) throw std::domain_error("rebin: factor must be >= 1");
  if (factor == 1) return hist;
  // Keep the bin containing tau = 0 at the center of its group.
  const auto center =
      static_cast<std::size_t>((0.0 - hist.start) / hist.bin_width);
  const std::size_t mid = (factor - 1) / 2;
  std::size_t shift = (center + factor - mid) % factor;
  CoincidenceHistogram out = hist;
  out.bin_width = hist.bin_width * factor;
  out.start = hist.start + shift * hist.bin_width;
  out.counts.clear();
  for (std::size_t i = shift; i + factor <= hist.counts.size(); i += factor) {
    std::uint64_t sum = 0;
    for (int j = 0; j < factor; ++j) sum += hist.counts[i + j];
    out.counts.push_back(sum);
  }
  return out;
}

std::vector<Peak> peak_heights(const CoincidenceHistogram& hist, double period,
                               double window) {
  if (hist.counts.empty() || hist.total_counts() == 0) {
    throw numerical_error("peak_heights: histogram is empty");
  }
  if (!(window > 0.0) || !(period > 2.0 * window)) {
    throw std::domain_error("peak_heights: need 0 < window < period/2");
  }
  const double t_min = hist.start;
  const double t_max = hist.start + hist.counts.size() * hist.bin_width;
  std::vector<Peak> peaks;
  const auto m_lo = static_cast<long>(std::ceil((t_min + window) / period));
  const auto m_hi = static_cast<long>(std::floor((t_max - window) / period));
  for (long m = m_lo; m <= m_hi; ++m) {
    Peak p;
    p.center = m * period;
    for (std::size_t i = 0; i < hist.counts.size(); ++i) {
      const double d = std::abs(hist.bin_center(i) - p.center);
      if (d <= window) {
        p.area += static_cast<double>(hist.counts[i]);
        p.height = std::max(p.height, static_cast<double>(hist.counts[i]));
      }
    }
    peaks.push_back(p);
  }
  if (peaks.empty()) {
    throw numerical_error("peak_heights: no peak window fits the histogram");
  }
  return peaks;
}

RatioEstimate peak_ratio_estimate(const CoincidenceHistogram& mixer,
                                  const CoincidenceHistogram& separator,
                                  PeakMode mode, double period,
                                  double window) {
  const auto mixer_peaks = peak_heights(mixer, period, window);
  const auto sep_peaks = peak_heights(separator, period, window);
  const auto value_of = [&](const Peak& p) {
    return mode == PeakMode::Area ? p.area : p.height;
  };

  const Peak* zero = nullptr;
  for (const auto& p : mixer_peaks) {
    if (std::abs(p.center) < 0.5 * period) zero = &p;
  }
  if (zero == nullptr) {
    throw numerical_error("peak_ratio_estimate: no zero-delay peak in range");
  }
  double ref_sum = 0.0;
  int ref_n = 0;
  for (const auto& p : sep_peaks) {
    if (std::abs(p.center) >= 0.5 * period) {
      ref_sum += value_of(p);
      ++ref_n;
    }
  }
  if (ref_n == 0 || ref_sum <= 0.0) {
    throw numerical_error(
        "peak_ratio_estimate: separator histogram has no nonzero-delay peaks");
  }
  const double cycle_scale =
      static_cast<double>(separator.total_pulse_cycles) /
      static_cast<double>(mixer.total_pulse_cycles);
  const double ref_mean = ref_sum / ref_n;
  RatioEstimate est;
  est.value = cycle_scale * value_of(*zero) / ref_mean;
  const double n0 = std::max(value_of(*zero), 1.0);
  est.sigma = cycle_scale * n0 / ref_mean *
              std::sqrt(1.0 / n0 + 1.0 / ref_sum);
  return est;
}

NormalizedSignal normalize(const CoincidenceHistogram& mixer,
                           const CoincidenceHistogram& separator,
                           double period, double decay_rate,
                           PeakMode reference_mode, double window,
                           std::uint32_t pulses_per_burst) {
  if (mixer.counts.size() != separator.counts.size() ||
      std::abs(mixer.bin_width - separator.bin_width) > 1e-15 ||
      std::abs(mixer.start - separator.start) > 1e-15) {
    throw std::domain_error("normalize: histograms must share their binning");
  }
  const auto sep_peaks = peak_heights(separator, period, window);
  // Converts a windowed exponential-peak area to the count expected in the
  // center bin: area x (1 - e^(-G d/2)) / (1 - e^(-G W)).
  const double area_to_height =
      (1.0 - std::exp(-0.5 * decay_rate * separator.bin_width)) /
      (1.0 - std::exp(-decay_rate * window));
  double height_sum = 0.0;
  int n = 0;
  for (const auto& p : sep_peaks) {
    if (std::abs(p.center) >= 0.5 * period) {
      double value = reference_mode == PeakMode::Area ? p.area * area_to_height
                                                      : p.height;
      if (pulses_per_burst > 0) {
        // Undo the burst-edge pair deficit of the delay-n peak.
        const double n_periods = std::abs(p.center) / period;
        const double kept = 1.0 - n_periods / pulses_per_burst;
        if (kept > 0.0) value /= kept;
      }
      height_sum += value;
      ++n;
    }
  }
  if (n == 0 || height_sum <= 0.0) {
    throw numerical_error("normalize: separator histogram has no peaks");
  }
  const double reference = height_sum / n;
  const double scale = reference *
                       static_cast<double>(mixer.total_pulse_cycles) /
                       static_cast<double>(separator.total_pulse_cycles);

  NormalizedSignal out;
  out.reference_height = reference;
  out.tau.reserve(mixer.counts.size());
  for (std::size_t i = 0; i < mixer.counts.size(); ++i) {
    out.tau.push_back(mixer.bin_center(i));
    const double c = static_cast<double>(mixer.counts[i]);
    out.value.push_back(c / scale);
    out.sigma.push_back(std::sqrt(std::max(c, 1.0)) / scale);
  }
  return out;
}

std::vector<PeakSample> extract_zero_peak(
    const NormalizedSignal& signal, double window, double decay_rate,
    double period, std::optional<double> known_background) {
  if (!(window > 0.0) || window > 0.5 * period) {
    throw std::domain_error(
        "extract_zero_peak: window must stay clear of the neighbor peaks");
  }
  if (signal.tau.empty()) {
    throw std::domain_error("extract_zero_peak: empty signal");
  }
  const double bin = signal.tau.size() >= 2
                         ? signal.tau[1] - signal.tau[0]
                         : 1.2e-9;

  // Integral of e^(-G|s - c|) over a bin, split at the cusp.
  const auto peak_bin_integral = [&](double center, double lo, double hi) {
    const auto one_sided = [&](double a, double b) {
      return (std::exp(-decay_rate * a) - std::exp(-decay_rate * b)) /
             decay_rate;
    };
    const double a = lo - center;
    const double b = hi - center;
    if (a >= 0.0) return one_sided(a, b);
    if (b <= 0.0) return one_sided(-b, -a);
    return one_sided(0.0, -a) + one_sided(0.0, b);
  };
  const double center_bin_integral =
      peak_bin_integral(0.0, -0.5 * bin, 0.5 * bin);

  // Joint weighted linear fit over the out-of-window bins of three
  // components: the flat background, one common height for all nonzero-delay
  // peaks (they share the same pair statistics, so they are equal up to
  // percent-level burst-edge effects), and the zero-delay peak's own
  // exponential wing. The wing coefficient keeps the fit honest where the
  // interference suppression has recovered toward the envelope; it is not
  // subtracted from the window.
  const auto m_lo = static_cast<long>(
      std::floor(signal.tau.front() / period));
  const auto m_hi = static_cast<long>(std::ceil(signal.tau.back() / period));
  const int n_peaks = static_cast<int>(m_hi - m_lo + 1);
  const int n_basis = 3;

  const auto basis_at = [&](double tau, std::vector<double>& basis) {
    basis[0] = 1.0;
    basis[1] = 0.0;
    basis[2] = 0.0;
    for (int p = 0; p < n_peaks; ++p) {
      const double center = (m_lo + p) * period;
      const double shape = peak_bin_integral(center, tau - 0.5 * bin,
                                             tau + 0.5 * bin) /
                           center_bin_integral;
      if (std::abs(center) < 0.5 * period) {
        basis[2] += shape;
      } else {
        basis[1] += shape;
      }
    }
  };

  // Gaussian elimination with partial pivoting.
  const auto solve = [&](std::vector<double> m, std::vector<double> x) {
    for (int col = 0; col < n_basis; ++col) {
      int pivot = col;
      for (int row = col + 1; row < n_basis; ++row) {
        if (std::abs(m[row * n_basis + col]) >
            std::abs(m[pivot * n_basis + col])) {
          pivot = row;
        }
      }
      if (std::abs(m[pivot * n_basis + col]) < 1e-300) {
        x[col] = 0.0;
        continue;
      }
      if (pivot != col) {
        for (int k = 0; k < n_basis; ++k) {
          std::swap(m[col * n_basis + k], m[pivot * n_basis + k]);
        }
        std::swap(x[col], x[pivot]);
      }
      for (int row = col + 1; row < n_basis; ++row) {
        const double f = m[row * n_basis + col] / m[col * n_basis + col];
        for (int k = col; k < n_basis; ++k) {
          m[row * n_basis + k] -= f * m[col * n_basis + k];
        }
        x[row] -= f * x[col];
      }
    }
    for (int row = n_basis - 1; row >= 0; --row) {
      for (int k = row + 1; k < n_basis; ++k) {
        x[row] -= m[row * n_basis + k] * x[k];
      }
      const double d = m[row * n_basis + row];
      x[row] = std::abs(d) < 1e-300 ? 0.0 : x[row] / d;
    }
    return x;
  };

  // Two passes: unweighted first (weights taken from the observed counts
  // would favor downward-fluctuating bins and bias the background low), then
  // reweighted by the expected values of the first solution. A calibrated
  // background is held fixed instead of fitted.
  const bool estimate_background = !known_background.has_value();
  const double fixed_background = known_background.value_or(0.0);
  std::vector<double> x(n_basis, 0.0);
  std::vector<double> basis(n_basis, 0.0);
  for (int pass = 0; pass < 2; ++pass) {
    std::vector<double> normal(n_basis * n_basis, 0.0);
    std::vector<double> rhs(n_basis, 0.0);
    for (std::size_t i = 0; i < signal.tau.size(); ++i) {
      const double tau = signal.tau[i];
      if (std::abs(tau) <= window) continue;
      basis_at(tau, basis);
      if (!estimate_background) basis[0] = 0.0;
      double w = 1.0;
      if (pass > 0) {
        double expected = fixed_background;
        for (int a = 0; a < n_basis; ++a) expected += x[a] * basis[a];
        w = 1.0 / std::max(expected, 1e-6);
      }
      const double value = signal.value[i] - fixed_background;
      for (int a = 0; a < n_basis; ++a) {
        rhs[a] += w * basis[a] * value;
        for (int b = 0; b <= a; ++b) {
          normal[a * n_basis + b] += w * basis[a] * basis[b];
        }
      }
    }
    for (int a = 0; a < n_basis; ++a) {
      for (int b = a + 1; b < n_basis; ++b) {
        normal[a * n_basis + b] = normal[b * n_basis + a];
      }
    }
    x = solve(std::move(normal), std::move(rhs));
  }
  const double background = estimate_background ? x[0] : fixed_background;
  const double nonzero_height = std::max(x[1], 0.0);

  std::vector<PeakSample> samples;
  for (std::size_t i = 0; i < signal.tau.size(); ++i) {
    const double tau = signal.tau[i];
    if (std::abs(tau) > window) continue;
    double neighbor_tails = 0.0;
    for (int p = 0; p < n_peaks; ++p) {
      const double center = (m_lo + p) * period;
      if (std::abs(center) < 0.5 * period) continue; // not the zero peak
      neighbor_tails +=
          nonzero_height * std::exp(-decay_rate * std::abs(tau - center));
    }
    PeakSample s;
    s.tau = tau;
    s.value = signal.value[i] - background - neighbor_tails;
    s.sigma = signal.sigma[i];
    samples.push_back(s);
  }
  return samples;
}

} // namespace homsim
