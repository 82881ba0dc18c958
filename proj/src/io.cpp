#include "ckmopt/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace ckmopt {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_fixed(double v, int decimals) {
  char buf[512];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, decimals);
  std::string s(buf, res.ptr);
  if (s.starts_with("-")) {
    // Avoid "-0.000000".
    const bool all_zero =
        std::all_of(s.begin() + 1, s.end(), [](char c) { return c == '0' || c == '.'; });
    if (all_zero) s.erase(0, 1);
  }
  return s;
}

double parse_double(std::string_view text, const std::string& source, std::size_t line) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ParseError(source, line, "invalid number '" + std::string(text) + "'");
  }
  if (!std::isfinite(v)) throw ParseError(source, line, "non-finite number");
  return v;
}

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  if (sep == ' ') {
    std::size_t pos = 0;
    while (pos < line.size()) {
      while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
      if (pos >= line.size()) break;
      std::size_t end = pos;
      while (end < line.size() && line[end] != ' ' && line[end] != '\t') ++end;
      out.push_back(line.substr(pos, end - pos));
      pos = end;
    }
    return out;
  }
  std::size_t start = 0;
  while (true) {
    const std::size_t end = line.find(sep, start);
    std::string_view field = line.substr(start, end == std::string_view::npos ? line.npos : end - start);
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.remove_suffix(1);
    out.push_back(field);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

std::string_view chomp(const std::string& line) {
  std::string_view v(line);
  if (!v.empty() && v.back() == '\r') v.remove_suffix(1);
  return v;
}

std::size_t parse_count(std::string_view text, const std::string& source, std::size_t line) {
  std::size_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ParseError(source, line, "invalid count '" + std::string(text) + "'");
  }
  return v;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

void check_header(std::istream& in, const std::string& source, std::string_view expected) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(source, 1, "missing header");
  if (chomp(line) != expected) {
    throw ParseError(source, 1, "expected header '" + std::string(expected) + "'");
  }
}

}  // namespace

std::ofstream open_output(const std::filesystem::path& path, bool binary) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out | std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void write_grid(std::ostream& out, const GainGrid& grid) {
  const GridSpec& s = grid.spec();
  out << "# ckm v1\n";
  out << format_double(s.origin_x) << ' ' << format_double(s.origin_y) << ' '
      << format_double(s.spacing) << ' ' << s.nx << ' ' << s.ny << '\n';
  for (std::size_t j = 0; j < s.ny; ++j) {
    for (std::size_t i = 0; i < s.nx; ++i) {
      if (i) out << ' ';
      out << format_fixed(grid.at(i, j), 6);
    }
    out << '\n';
  }
}

GainGrid read_grid(std::istream& in, const std::string& source) {
  check_header(in, source, "# ckm v1");
  std::string line;
  if (!std::getline(in, line)) throw ParseError(source, 2, "missing grid geometry line");
  const auto geo = split(chomp(line), ' ');
  if (geo.size() != 5) throw ParseError(source, 2, "expected 'x0 y0 spacing nx ny'");
  GridSpec spec{parse_double(geo[0], source, 2), parse_double(geo[1], source, 2),
                parse_double(geo[2], source, 2), parse_count(geo[3], source, 2),
                parse_count(geo[4], source, 2)};
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(source, 2, e.what());
  }
  std::vector<double> values;
  values.reserve(spec.size());
  for (std::size_t j = 0; j < spec.ny; ++j) {
    const std::size_t lineno = j + 3;
    if (!std::getline(in, line)) throw ParseError(source, lineno, "missing grid row");
    const auto fields = split(chomp(line), ' ');
    if (fields.size() != spec.nx) {
      throw ParseError(source, lineno, "expected " + std::to_string(spec.nx) + " values, got " +
                                           std::to_string(fields.size()));
    }
    for (auto f : fields) values.push_back(parse_double(f, source, lineno));
  }
  std::size_t lineno = spec.ny + 3;
  while (std::getline(in, line)) {
    if (!chomp(line).empty()) throw ParseError(source, lineno, "unexpected trailing data");
    ++lineno;
  }
  return GainGrid(spec, std::move(values));
}

void save_grid(const std::filesystem::path& path, const GainGrid& grid) {
  auto out = open_output(path);
  write_grid(out, grid);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

GainGrid load_grid(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_grid(in, path.string());
}

void write_samples(std::ostream& out, std::span<const ChannelSample> samples) {
  out << "x,y,gain_db\n";
  for (const auto& s : samples) {
    out << format_double(s.position.x) << ',' << format_double(s.position.y) << ','
        << format_double(s.gain_db) << '\n';
  }
}

std::vector<ChannelSample> read_samples(std::istream& in, const std::string& source) {
  check_header(in, source, "x,y,gain_db");
  std::vector<ChannelSample> out;
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto text = chomp(line);
    if (text.empty()) continue;
    const auto f = split(text, ',');
    if (f.size() != 3) throw ParseError(source, lineno, "expected 3 fields");
    out.push_back({{parse_double(f[0], source, lineno), parse_double(f[1], source, lineno)},
                   parse_double(f[2], source, lineno)});
  }
  return out;
}

void save_samples(const std::filesystem::path& path, std::span<const ChannelSample> samples) {
  auto out = open_output(path);
  write_samples(out, samples);
}

std::vector<ChannelSample> load_samples(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_samples(in, path.string());
}

void save_layout(const std::filesystem::path& path, const BuildingLayout& layout) {
  auto out = open_output(path);
  out << "x_min,x_max,y_min,y_max,height\n";
  for (const auto& b : layout) {
    out << format_double(b.footprint.x_min) << ',' << format_double(b.footprint.x_max) << ','
        << format_double(b.footprint.y_min) << ',' << format_double(b.footprint.y_max) << ','
        << format_double(b.height) << '\n';
  }
}

BuildingLayout load_layout(const std::filesystem::path& path) {
  auto in = open_input(path);
  const std::string source = path.string();
  check_header(in, source, "x_min,x_max,y_min,y_max,height");
  BuildingLayout out;
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto text = chomp(line);
    if (text.empty()) continue;
    const auto f = split(text, ',');
    if (f.size() != 5) throw ParseError(source, lineno, "expected 5 fields");
    Building b{{parse_double(f[0], source, lineno), parse_double(f[1], source, lineno),
                parse_double(f[2], source, lineno), parse_double(f[3], source, lineno)},
               parse_double(f[4], source, lineno)};
    if (!(b.footprint.x_min < b.footprint.x_max) || !(b.footprint.y_min < b.footprint.y_max) ||
        !(b.height > 0.0)) {
      throw ParseError(source, lineno, "invalid building box");
    }
    out.push_back(b);
  }
  return out;
}

std::uint8_t gray_level(double value_db, const HeatmapRange& range) {
  if (!(range.max_db > range.min_db)) throw std::invalid_argument("heatmap: max_db must exceed min_db");
  const double t = (value_db - range.min_db) / (range.max_db - range.min_db);
  const double level = std::floor(std::clamp(t, 0.0, 1.0) * 255.0 + 0.5);
  return static_cast<std::uint8_t>(std::min(level, 255.0));
}

void write_pgm(std::ostream& out, const GainGrid& grid, const HeatmapRange& range) {
  const GridSpec& s = grid.spec();
  out << "P5\n" << s.nx << ' ' << s.ny << "\n255\n";
  std::vector<char> row(s.nx);
  for (std::size_t r = 0; r < s.ny; ++r) {
    const std::size_t j = s.ny - 1 - r;
    for (std::size_t i = 0; i < s.nx; ++i) row[i] = static_cast<char>(gray_level(grid.at(i, j), range));
    out.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
}

void save_pgm(const std::filesystem::path& path, const GainGrid& grid, const HeatmapRange& range) {
  auto out = open_output(path, true);
  write_pgm(out, grid, range);
}

void write_trace_csv(std::ostream& out, const OptTrace& trace) {
  out << "iter,delta,f_trial,accepted,f_best\n";
  for (const auto& r : trace.records) {
    out << r.iteration << ',' << format_double(r.delta) << ',' << format_double(r.f_trial) << ','
        << (r.accepted ? 1 : 0) << ',' << format_double(r.f_best) << '\n';
  }
}

}  // namespace ckmopt
