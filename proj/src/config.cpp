#include "ckmopt/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>

namespace ckmopt {

const char* to_string(MethodKind m) {
  switch (m) {
    case MethodKind::kKrigingExponential: return "kriging-exponential";
    case MethodKind::kKrigingSpherical: return "kriging-spherical";
    case MethodKind::kKnn: return "knn";
    case MethodKind::kLos: return "los";
  }
  return "?";
}

MethodKind parse_method(const std::string& name) {
  if (name == "kriging-exponential" || name == "kriging") return MethodKind::kKrigingExponential;
  if (name == "kriging-spherical") return MethodKind::kKrigingSpherical;
  if (name == "knn") return MethodKind::kKnn;
  if (name == "los") return MethodKind::kLos;
  throw std::invalid_argument("unknown method '" + name +
                              "' (kriging-exponential, kriging-spherical, knn, los)");
}

void ExperimentConfig::validate() const {
  make_scenario(*this).validate();
  make_grid(*this);
  truth.validate();
  dfo.validate();
  if (stride_x < 1 || stride_y < 1 || plan_stride_x < 1 || plan_stride_y < 1) {
    throw std::invalid_argument("config: sampling strides must be >= 1");
  }
  if (sample_count < 1) throw std::invalid_argument("config: sample_count must be >= 1");
  if (knn_k < 1) throw std::invalid_argument("config: knn_k must be >= 1");
  if (exhaustive_stride < 1) throw std::invalid_argument("config: exhaustive_stride must be >= 1");
  if (sweep_powers_dbm.empty()) throw std::invalid_argument("config: sweep_powers_dbm is empty");
  if (seeds.empty()) throw std::invalid_argument("config: seeds is empty");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw std::invalid_argument("config: seeds must be distinct");
  }
  if (mae_sample_counts.empty()) throw std::invalid_argument("config: mae_sample_counts is empty");
  if (!(heatmap.max_db > heatmap.min_db)) {
    throw std::invalid_argument("config: heatmap_max_db must exceed heatmap_min_db");
  }
  if (layout.min_side <= 0.0 || layout.max_side < layout.min_side || layout.min_height <= 0.0 ||
      layout.max_height < layout.min_height) {
    throw std::invalid_argument("config: invalid building size or height range");
  }
}

Scenario make_scenario(const ExperimentConfig& c) {
  const std::size_t k = c.gbs_positions.size();
  Scenario s;
  s.gbs_positions = c.gbs_positions;
  s.gbs_height = c.gbs_height;
  s.uav_altitude = c.uav_altitude;
  s.tx_power_dbm.assign(k, c.tx_power_dbm);
  s.noise_power_dbm.assign(k, c.noise_power_dbm);
  s.rate_weights = c.rate_weights.empty() ? std::vector<double>(k, 1.0) : c.rate_weights;
  s.region = c.region;
  return s;
}

GridSpec make_grid(const ExperimentConfig& c) { return grid_for_region(c.region, c.grid_spacing); }

namespace {

std::string trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return std::string(s);
}

std::vector<std::string> split_list(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = s.find(sep, start);
    out.push_back(trim(std::string_view(s).substr(start, end == std::string::npos ? std::string::npos
                                                                                  : end - start)));
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return out;
}

struct Ctx {
  const std::string& source;
  std::size_t line;
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(source, line, msg); }
};

double num(const std::string& v, const Ctx& ctx) { return parse_double(v, ctx.source, ctx.line); }

std::uint64_t unsigned_num(const std::string& v, const Ctx& ctx) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    ctx.fail("expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

std::vector<double> num_list(const std::string& v, const Ctx& ctx) {
  std::vector<double> out;
  for (const auto& item : split_list(v, ',')) out.push_back(num(item, ctx));
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const Ctx&)>;

template <class T>
Setter real(T ExperimentConfig::*member) {
  return [member](ExperimentConfig& c, const std::string& v, const Ctx& ctx) { c.*member = num(v, ctx); };
}

template <class T>
Setter count(T ExperimentConfig::*member) {
  return [member](ExperimentConfig& c, const std::string& v, const Ctx& ctx) {
    c.*member = static_cast<T>(unsigned_num(v, ctx));
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"gbs_positions",
       [](ExperimentConfig& c, const std::string& v, const Ctx& ctx) {
         c.gbs_positions.clear();
         for (const auto& pair : split_list(v, ';')) {
           const auto xy = num_list(pair, ctx);
           if (xy.size() != 2) ctx.fail("gbs_positions expects 'x, y; x, y; ...'");
           c.gbs_positions.push_back({xy[0], xy[1]});
         }
       }},
      {"gbs_height", real(&ExperimentConfig::gbs_height)},
      {"uav_altitude", real(&ExperimentConfig::uav_altitude)},
      {"tx_power_dbm", real(&ExperimentConfig::tx_power_dbm)},
      {"noise_power_dbm", real(&ExperimentConfig::noise_power_dbm)},
      {"rate_weights",
       [](ExperimentConfig& c, const std::string& v, const Ctx& ctx) { c.rate_weights = num_list(v, ctx); }},
      {"region",
       [](ExperimentConfig& c, const std::string& v, const Ctx& ctx) {
         const auto r = num_list(v, ctx);
         if (r.size() != 4) ctx.fail("region expects 'x_min, x_max, y_min, y_max'");
         c.region = {r[0], r[1], r[2], r[3]};
       }},
      {"grid_spacing", real(&ExperimentConfig::grid_spacing)},
      {"beta0_db", [](ExperimentConfig& c, const std::string& v, const Ctx& ctx) { c.truth.beta0_db = num(v, ctx); }},
      {"n_los", [](ExperimentConfig& c, const std::string& v, const Ctx& ctx) { c.truth.n_los = num(v, ctx); }},
      {"n_nlos", [](ExperimentConfig& c, const std::string& v, const Ctx& ctx) { c.truth.n_nlos = num(v, ctx); }},
      {"nlos_penalty_db",
       [](ExperimentConfig& c, const std::string& v, const Ctx& ctx) { c.truth.nlos_penalty_db = num(v, ctx); }},
      {"shadow_std_db",
       [](ExperimentConfig& c, const std::string& v, const Ctx& ctx) { c.truth.shadow_std_db = num(v, ctx); }},
      {"shadow_corr_len",
       [](ExperimentConfig& c, const std::string& v, const Ctx& ctx) { c.truth.shadow_corr_len = num(v, ctx); }},
      {"n_buildings", count(&ExperimentConfig::n_buildings)},
      {"building_min_side",
       [](ExperimentConfig& c, const std::string& v, const Ctx& ctx) { c.layout.min_side = num(v, ctx); }},
      {"building_max_side",
       [](ExperimentConfig& c, const std::string& v, const Ctx& ctx) { c.layout.max_side = num(v, ctx); }},
      {"building_min_height",
       [](ExperimentConfig& c, const std::string& v, const Ctx& ctx) { c.layout.min_height = num(v, ctx); }},
      {"building_max_height",
       [](ExperimentConfig& c, const std::string& v, const Ctx& ctx) { c.layout.max_height = num(v, ctx); }},
      {"sampling",
       [](ExperimentConfig& c, const std::string& v, const Ctx& ctx) {
         if (v == "stride") c.sampling = SamplingMode::kStride;
         else if (v == "random") c.sampling = SamplingMode::kRandom;
         else ctx.fail("sampling must be 'stride' or 'random'");
       }},
      {"stride_x", count(&ExperimentConfig::stride_x)},
      {"stride_y", count(&ExperimentConfig::stride_y)},
      {"sample_count", count(&ExperimentConfig::sample_count)},
      {"plan_stride_x", count(&ExperimentConfig::plan_stride_x)},
      {"plan_stride_y", count(&ExperimentConfig::plan_stride_y)},
      {"method",
       [](ExperimentConfig& c, const std::string& v, const Ctx& ctx) {
         try {
           c.method = parse_method(v);
         } catch (const std::invalid_argument& e) {
           ctx.fail(e.what());
         }
       }},
      {"knn_k", count(&ExperimentConfig::knn_k)},
      {"kriging_neighborhood", count(&ExperimentConfig::kriging_neighborhood)},
      {"mae_sample_counts",
       [](ExperimentConfig& c, const std::string& v, const Ctx& ctx) {
         c.mae_sample_counts.clear();
         for (const auto& item : split_list(v, ',')) c.mae_sample_counts.push_back(unsigned_num(item, ctx));
       }},
      {"mae_methods",
       [](ExperimentConfig& c, const std::string& v, const Ctx& ctx) {
         c.mae_methods.clear();
         for (const auto& item : split_list(v, ',')) {
           try {
             c.mae_methods.push_back(parse_method(item));
           } catch (const std::invalid_argument& e) {
             ctx.fail(e.what());
           }
         }
       }},
      {"delta0", [](ExperimentConfig& c, const std::string& v, const Ctx& ctx) { c.dfo.delta0 = num(v, ctx); }},
      {"beta", [](ExperimentConfig& c, const std::string& v, const Ctx& ctx) { c.dfo.beta = num(v, ctx); }},
      {"epsilon", [](ExperimentConfig& c, const std::string& v, const Ctx& ctx) { c.dfo.epsilon = num(v, ctx); }},
      {"max_iter",
       [](ExperimentConfig& c, const std::string& v, const Ctx& ctx) { c.dfo.max_iter = unsigned_num(v, ctx); }},
      {"lookup",
       [](ExperimentConfig& c, const std::string& v, const Ctx& ctx) {
         if (v == "nearest") c.lookup = LookupMode::kNearest;
         else if (v == "bilinear") c.lookup = LookupMode::kBilinear;
         else ctx.fail("lookup must be 'nearest' or 'bilinear'");
       }},
      {"exhaustive_stride", count(&ExperimentConfig::exhaustive_stride)},
      {"sweep_powers_dbm",
       [](ExperimentConfig& c, const std::string& v, const Ctx& ctx) { c.sweep_powers_dbm = num_list(v, ctx); }},
      {"seed", [](ExperimentConfig& c, const std::string& v, const Ctx& ctx) { c.seed = unsigned_num(v, ctx); }},
      {"seeds",
       [](ExperimentConfig& c, const std::string& v, const Ctx& ctx) {
         c.seeds.clear();
         for (const auto& item : split_list(v, ',')) c.seeds.push_back(unsigned_num(item, ctx));
       }},
      {"heatmap_min_db",
       [](ExperimentConfig& c, const std::string& v, const Ctx& ctx) { c.heatmap.min_db = num(v, ctx); }},
      {"heatmap_max_db",
       [](ExperimentConfig& c, const std::string& v, const Ctx& ctx) { c.heatmap.max_db = num(v, ctx); }},
      {"out_dir", [](ExperimentConfig& c, const std::string& v, const Ctx&) { c.out_dir = v; }},
  };
  return table;
}

}  // namespace

ExperimentConfig parse_config(std::istream& in, const std::string& source, ExperimentConfig base) {
  std::string raw;
  std::size_t lineno = 0;
  std::set<std::string> seen;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::size_t hash = raw.find('#');
    const std::string line = trim(std::string_view(raw).substr(0, hash));
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(source, lineno, "expected 'key = value'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ParseError(source, lineno, "unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ParseError(source, lineno, "duplicate key '" + key + "'");
    if (value.empty()) throw ParseError(source, lineno, "missing value for '" + key + "'");
    it->second(base, value, Ctx{source, lineno});
  }
  return base;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  return parse_config(in, path.string());
}

}  // namespace ckmopt
