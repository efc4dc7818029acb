#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "homsim/coincidence_model.hpp"
#include "homsim/sequence.hpp"
#include "homsim/trap_dynamics.hpp"

namespace homsim {

enum class BeamConfiguration {
  Mixer5050,  // each detector sees both atoms; interference occurs
  Separator   // each detector sees one atom; normalization reference
};

std::string to_string(BeamConfiguration c);
BeamConfiguration beam_configuration_from_string(const std::string& s);

struct DetectionConfig {
  double efficiency = 0.006;        // per photon, per output path
  double bin_width = 1.2e-9;        // s, raw histogram resolution
  int rebin_factor = 3;             // presentation-stage rebinning
  double histogram_range = 1.0e-6;  // s, histogram spans +-range
  double background_rate = 100.0;   // dark counts per second per detector
  double jitter_sigma = 0.0;        // s, per-detection Gaussian jitter
  BeamConfiguration configuration = BeamConfiguration::Mixer5050;

  void validate() const;
};

// Physics driving the emitted photons' frequency offsets and the overlap.
struct PhysicsModel {
  enum class Kind {
    Analytic,       // per-pulse lightshift deficits from the gamma form
    TrapMonteCarlo  // deficits from full trap-dynamics trajectories
  };
  Kind kind = Kind::Analytic;
  double overlap_k = 0.78;            // spatial field overlap at the splitter
  double temperature = 180e-6;        // K (analytic and thermal loading)
  double shift_factor = 1.0;          // eta
  EmitterConstants emitter{};         // excitation, lifetime, recoil
  // Trap Monte-Carlo mode only:
  TrapConfig trap{};
  PulseTrainOptions pulse_options{};

  void validate() const;
};

struct ExperimentTallies {
  std::uint64_t pulses = 0;
  std::uint64_t emitted = 0;
  std::uint64_t detected = 0;
  std::uint64_t zero_window_pairs = 0;  // same-pulse, both photons detected
  std::uint64_t coincidences = 0;       // A-B pairs inside the histogram
  std::uint64_t dark_counts = 0;
  std::uint64_t atom_bursts_lost = 0;   // bursts missed to retention loss
  std::uint64_t escapes = 0;            // trap escapes (Monte-Carlo mode)
};

// Start-stop delay histogram: uniform bins, tau = 0 at the center bin.
struct CoincidenceHistogram {
  double bin_width = 1.2e-9;
  double start = 0.0;  // left edge of bin 0
  std::vector<std::uint64_t> counts;
  BeamConfiguration configuration = BeamConfiguration::Mixer5050;
  std::uint64_t total_pulse_cycles = 0;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  ExperimentTallies tallies;

  double bin_center(std::size_t i) const {
    return start + (static_cast<double>(i) + 0.5) * bin_width;
  }
  std::uint64_t total_counts() const;
};

// Simulates n_loads atom-pair episodes and accumulates the start-stop delay
// histogram between the two detectors. Loads are independent tasks with
// per-load seeds derived from the master seed; the result is bit-identical
// for a fixed seed regardless of the parallelism degree.
CoincidenceHistogram run_experiment(const SequenceConfig& seq,
                                    const DetectionConfig& det,
                                    const PhysicsModel& physics,
                                    std::uint64_t n_loads, std::uint64_t seed,
                                    int parallelism = 1);

// Groups bins by `factor`, keeping tau = 0 centered in its group.
CoincidenceHistogram rebin(const CoincidenceHistogram& hist, int factor);

struct Peak {
  double center = 0.0;  // s, on the pulse-period grid
  double height = 0.0;  // counts in the tallest bin of the window
  double area = 0.0;    // counts within +-window
};

// Locates the peaks on the pulse-period grid. Throws when the histogram is
// empty or holds no identifiable peaks.
std::vector<Peak> peak_heights(const CoincidenceHistogram& hist,
                               double period = 200e-9,
                               double window = 60e-9);

enum class PeakMode { Area, Height };

struct RatioEstimate {
  double value = 0.0;
  double sigma = 0.0;
};

// Normalized zero-delay ratio: the mixer zero-delay peak divided by the mean
// nonzero-delay separator peak, cycle-count scaled. Windowed areas by
// default; peak maxima with PeakMode::Height. The sigma covers counting
// statistics only; the two runs' atom-pair exposures must be long enough to
// self-average (retention losses make them fluctuate load to load).
RatioEstimate peak_ratio_estimate(const CoincidenceHistogram& mixer,
                                  const CoincidenceHistogram& separator,
                                  PeakMode mode = PeakMode::Area,
                                  double period = 200e-9,
                                  double window = 60e-9);

struct NormalizedSignal {
  std::vector<double> tau;    // s, bin centers (rebinned)
  std::vector<double> value;  // counts / reference peak height
  std::vector<double> sigma;  // Poisson, floor of one raw count
  double reference_height = 0.0;
};

// Divides the (rebinned) mixer histogram by the average nonzero-delay peak
// height of the separator histogram, scaled by the cycle counts. The result
// is independent of detection efficiency and run duration. The reference
// height is derived from the windowed peak areas through the known
// exponential shape by default (PeakMode::Area, a low-noise estimator of the
// same height); PeakMode::Height reads the tallest bin directly. The peak at
// delay n periods collects (pulses - n) pulse pairs per burst instead of
// pulses; passing pulses_per_burst corrects the reference for that known
// burst-edge deficit (0 skips the correction).
NormalizedSignal normalize(const CoincidenceHistogram& mixer,
                           const CoincidenceHistogram& separator,
                           double period = 200e-9,
                           double decay_rate = constants::natural_decay_rate,
                           PeakMode reference = PeakMode::Area,
                           double window = 60e-9,
                           std::uint32_t pulses_per_burst = 575);

struct PeakSample {
  double tau = 0.0;
  double value = 0.0;
  double sigma = 1.0;
};

// Zero-delay peak samples after subtracting the flat background (estimated
// from inter-peak regions) and the exponential tails of the neighboring
// peaks. `window` must not reach the neighboring peak centers. When the
// flat background level is known from an independent calibration (dark
// rates are measured with the light off), pass it to skip the estimate and
// its noise.
std::vector<PeakSample> extract_zero_peak(
    const NormalizedSignal& signal, double window, double decay_rate,
    double period = 200e-9,
    std::optional<double> known_background = std::nullopt);

} // namespace homsim
