#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace homsim {

// Timing of one atom-pair episode: bursts of pulsed excitation alternating
// with molasses cooling, repeated until the pair is dropped and reloaded.
struct SequenceConfig {
  double pulse_period = 200e-9;        // s
  std::uint32_t pulses_per_burst = 575;
  double cooling_duration = 885e-6;    // s
  std::uint32_t bursts_per_load = 15;
  double reload_delay_mean = 0.3;      // s
  double retention_after_bursts = 0.65; // pair-member survival over a load

  double burst_duration() const { return pulses_per_burst * pulse_period; }

  // Per-burst survival probability consistent with the retention figure.
  double burst_survival() const {
    if (retention_after_bursts >= 1.0) return 1.0;
    return std::pow(retention_after_bursts, 1.0 / bursts_per_load);
  }

  void validate() const {
    if (!(pulse_period > 0.0) || pulses_per_burst == 0 ||
        !(cooling_duration >= 0.0) || bursts_per_load == 0 ||
        !(reload_delay_mean >= 0.0)) {
      throw std::domain_error("SequenceConfig: all durations and counts must be positive");
    }
    if (!(retention_after_bursts > 0.0 && retention_after_bursts <= 1.0)) {
      throw std::domain_error("SequenceConfig: retention must lie in (0, 1]");
    }
  }
};

} // namespace homsim
