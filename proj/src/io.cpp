#include "homsim/io.hpp"

#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "homsim/errors.hpp"

namespace homsim {

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = line.find(sep, pos);
    if (next == std::string::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, next - pos));
    pos = next + 1;
  }
}

double parse_double(const std::string& field, std::size_t row) {
  try {
    std::size_t used = 0;
    const double v = std::stod(field, &used);
    if (used == 0) throw std::invalid_argument(field);
    return v;
  } catch (const std::exception&) {
    throw io_error("row " + std::to_string(row) + ": cannot parse number '" +
                   field + "'");
  }
}

std::uint64_t parse_u64(const std::string& field, std::size_t row) {
  std::uint64_t v = 0;
  const auto* begin = field.data();
  const auto* end = begin + field.size();
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw io_error("row " + std::to_string(row) + ": cannot parse count '" +
                   field + "'");
  }
  return v;
}

} // namespace

void atomic_write(const std::filesystem::path& path,
                  const std::string& content) {
  namespace fs = std::filesystem;
  std::error_code ec;
  const fs::path dir = path.has_parent_path() ? path.parent_path() : ".";
  fs::create_directories(dir, ec);
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open " + tmp.string() + " for writing");
    out << content;
    if (!out) throw io_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) throw io_error("cannot move " + tmp.string() + " to " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string histogram_to_csv(const CoincidenceHistogram& hist) {
  std::ostringstream out;
  char line[128];
  std::snprintf(line, sizeof(line), "# seed=%" PRIu64 "\n", hist.seed);
  out << line;
  std::snprintf(line, sizeof(line), "# config=%016" PRIx64 "\n",
                hist.config_hash);
  out << line;
  out << "# configuration=" << to_string(hist.configuration) << "\n";
  std::snprintf(line, sizeof(line), "# total_pulse_cycles=%" PRIu64 "\n",
                hist.total_pulse_cycles);
  out << line;
  std::snprintf(line, sizeof(line), "# zero_window_pairs=%" PRIu64 "\n",
                hist.tallies.zero_window_pairs);
  out << line;
  out << "bin_start_ns,bin_end_ns,counts\n";
  for (std::size_t i = 0; i < hist.counts.size(); ++i) {
    const double lo = (hist.start + i * hist.bin_width) * 1e9;
    const double hi = lo + hist.bin_width * 1e9;
    out << format_double(lo) << ',' << format_double(hi) << ','
        << hist.counts[i] << "\n";
  }
  return out.str();
}

CoincidenceHistogram histogram_from_csv(const std::string& text) {
  CoincidenceHistogram hist;
  hist.counts.clear();
  std::istringstream in(text);
  std::string line;
  std::size_t row = 0;
  bool saw_header = false;
  std::vector<double> starts;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = line.substr(2, eq - 2);
      const std::string value = line.substr(eq + 1);
      if (key == "seed") hist.seed = parse_u64(value, row);
      if (key == "config") hist.config_hash = std::stoull(value, nullptr, 16);
      if (key == "configuration") {
        hist.configuration = beam_configuration_from_string(value);
      }
      if (key == "total_pulse_cycles") {
        hist.total_pulse_cycles = parse_u64(value, row);
      }
      if (key == "zero_window_pairs") {
        hist.tallies.zero_window_pairs = parse_u64(value, row);
      }
      continue;
    }
    if (!saw_header) {
      saw_header = true; // column names
      continue;
    }
    const auto fields = split(line, ',');
    if (fields.size() != 3) {
      throw io_error("row " + std::to_string(row) +
                     ": expected 3 columns, got " +
                     std::to_string(fields.size()));
    }
    starts.push_back(parse_double(fields[0], row) * 1e-9);
    const double end_ns = parse_double(fields[1], row);
    hist.counts.push_back(parse_u64(fields[2], row));
    if (hist.counts.size() == 1) {
      hist.start = starts[0];
      hist.bin_width = end_ns * 1e-9 - starts[0];
    }
  }
  if (hist.counts.empty()) throw io_error("histogram CSV holds no bins");
  return hist;
}

void write_histogram_csv(const std::filesystem::path& path,
                         const CoincidenceHistogram& hist) {
  atomic_write(path, histogram_to_csv(hist));
}

CoincidenceHistogram read_histogram_csv(const std::filesystem::path& path) {
  return histogram_from_csv(read_text_file(path));
}

std::string normalized_to_csv(const NormalizedSignal& signal) {
  std::ostringstream out;
  out << "tau_ns,value,sigma\n";
  for (std::size_t i = 0; i < signal.tau.size(); ++i) {
    out << format_double(signal.tau[i] * 1e9) << ','
        << format_double(signal.value[i]) << ','
        << format_double(signal.sigma[i]) << "\n";
  }
  return out.str();
}

NormalizedSignal normalized_from_csv(const std::string& text) {
  NormalizedSignal signal;
  std::istringstream in(text);
  std::string line;
  std::size_t row = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line[0] == '#') continue;
    if (!saw_header) {
      saw_header = true;
      continue;
    }
    const auto fields = split(line, ',');
    if (fields.size() != 3) {
      throw io_error("row " + std::to_string(row) +
                     ": expected tau_ns,value,sigma");
    }
    signal.tau.push_back(parse_double(fields[0], row) * 1e-9);
    signal.value.push_back(parse_double(fields[1], row));
    signal.sigma.push_back(parse_double(fields[2], row));
  }
  if (signal.tau.empty()) throw io_error("normalized CSV holds no rows");
  return signal;
}

void write_normalized_csv(const std::filesystem::path& path,
                          const NormalizedSignal& signal) {
  atomic_write(path, normalized_to_csv(signal));
}

NormalizedSignal read_normalized_csv(const std::filesystem::path& path) {
  return normalized_from_csv(read_text_file(path));
}

std::string scan_to_csv(const std::vector<RatioPoint>& points) {
  std::ostringstream out;
  out << "d_um,R,sigma\n";
  for (const auto& p : points) {
    out << format_double(p.displacement * 1e6) << ','
        << format_double(p.ratio) << ',' << format_double(p.sigma) << "\n";
  }
  return out.str();
}

std::vector<RatioPoint> scan_from_csv(const std::string& text) {
  std::vector<RatioPoint> points;
  std::istringstream in(text);
  std::string line;
  std::size_t row = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line[0] == '#') continue;
    if (!saw_header) {
      saw_header = true;
      continue;
    }
    const auto fields = split(line, ',');
    if (fields.size() != 3) {
      throw io_error("row " + std::to_string(row) + ": expected d_um,R,sigma");
    }
    RatioPoint p;
    p.displacement = parse_double(fields[0], row) * 1e-6;
    p.ratio = parse_double(fields[1], row);
    p.sigma = parse_double(fields[2], row);
    points.push_back(p);
  }
  if (points.empty()) throw io_error("scan CSV holds no rows");
  return points;
}

void write_scan_csv(const std::filesystem::path& path,
                    const std::vector<RatioPoint>& points) {
  atomic_write(path, scan_to_csv(points));
}

std::vector<RatioPoint> read_scan_csv(const std::filesystem::path& path) {
  return scan_from_csv(read_text_file(path));
}

std::string curve_to_csv(const std::vector<double>& tau_ns,
                         const std::vector<double>& value) {
  std::ostringstream out;
  out << "tau_ns,value\n";
  for (std::size_t i = 0; i < tau_ns.size(); ++i) {
    out << format_double(tau_ns[i]) << ',' << format_double(value[i]) << "\n";
  }
  return out.str();
}

} // namespace homsim
