#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "homsim/experiment_sim.hpp"
#include "homsim/inference.hpp"

namespace homsim {

// Writes content to path atomically (temp file in the same directory, then
// rename). Throws io_error on failure.
void atomic_write(const std::filesystem::path& path,
                  const std::string& content);

// Histogram CSV: '#'-prefixed metadata lines (seed, config hash,
// configuration, cycles), then bin_start_ns,bin_end_ns,counts rows.
std::string histogram_to_csv(const CoincidenceHistogram& hist);
CoincidenceHistogram histogram_from_csv(const std::string& text);
void write_histogram_csv(const std::filesystem::path& path,
                         const CoincidenceHistogram& hist);
CoincidenceHistogram read_histogram_csv(const std::filesystem::path& path);

// Normalized signal CSV: tau_ns,value,sigma.
std::string normalized_to_csv(const NormalizedSignal& signal);
NormalizedSignal normalized_from_csv(const std::string& text);
void write_normalized_csv(const std::filesystem::path& path,
                          const NormalizedSignal& signal);
NormalizedSignal read_normalized_csv(const std::filesystem::path& path);

// Displacement scan CSV: d_um,R,sigma.
std::string scan_to_csv(const std::vector<RatioPoint>& points);
std::vector<RatioPoint> scan_from_csv(const std::string& text);
void write_scan_csv(const std::filesystem::path& path,
                    const std::vector<RatioPoint>& points);
std::vector<RatioPoint> read_scan_csv(const std::filesystem::path& path);

// Model-curve CSV for plot overlays: tau_ns,value.
std::string curve_to_csv(const std::vector<double>& tau_ns,
                         const std::vector<double>& value);

std::string read_text_file(const std::filesystem::path& path);

} // namespace homsim
