#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ckmopt/core.hpp"
#include "ckmopt/dfo.hpp"
#include "ckmopt/truth.hpp"

namespace ckmopt {

/// Malformed input file; the message carries "<source>:<line>: ".
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : std::runtime_error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Locale-independent shortest round-trip representation.
std::string format_double(double v);
/// Locale-independent fixed notation with `decimals` digits.
std::string format_fixed(double v, int decimals);
double parse_double(std::string_view text, const std::string& source, std::size_t line);

// Grid file:
//   # ckm v1
//   x0 y0 spacing nx ny
//   ny rows of nx values (6 decimals), row j = 0 first.
void write_grid(std::ostream& out, const GainGrid& grid);
GainGrid read_grid(std::istream& in, const std::string& source = "<grid>");
void save_grid(const std::filesystem::path& path, const GainGrid& grid);
GainGrid load_grid(const std::filesystem::path& path);

/// CSV with header x,y,gain_db.
void write_samples(std::ostream& out, std::span<const ChannelSample> samples);
std::vector<ChannelSample> read_samples(std::istream& in, const std::string& source = "<samples>");
void save_samples(const std::filesystem::path& path, std::span<const ChannelSample> samples);
std::vector<ChannelSample> load_samples(const std::filesystem::path& path);

/// CSV with header x_min,x_max,y_min,y_max,height.
void save_layout(const std::filesystem::path& path, const BuildingLayout& layout);
BuildingLayout load_layout(const std::filesystem::path& path);

struct HeatmapRange {
  double min_db = -140.0;
  double max_db = -40.0;
};

/// Linear dB-to-gray map, clamped at the range ends, rounding half up.
std::uint8_t gray_level(double value_db, const HeatmapRange& range);

/// Binary PGM (P5), nx wide and ny tall; the top image row is the largest y.
void write_pgm(std::ostream& out, const GainGrid& grid, const HeatmapRange& range = {});
void save_pgm(const std::filesystem::path& path, const GainGrid& grid,
              const HeatmapRange& range = {});

/// Trace CSV with header iter,delta,f_trial,accepted,f_best.
void write_trace_csv(std::ostream& out, const OptTrace& trace);

/// Opens a file for writing or throws std::runtime_error naming the path.
std::ofstream open_output(const std::filesystem::path& path, bool binary = false);

}  // namespace ckmopt
