#include "ckmopt/experiments.hpp"

#include <chrono>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "ckmopt/io.hpp"

namespace ckmopt {

namespace fs = std::filesystem;

GaussianFieldSampler make_shadowing_sampler(const ExperimentConfig& config) {
  return GaussianFieldSampler(make_grid(config), config.truth.shadow_std_db,
                              config.truth.shadow_corr_len);
}

TruthWorld generate_world(const ExperimentConfig& config, std::uint64_t seed,
                          const GaussianFieldSampler* shadowing) {
  const GridSpec spec = make_grid(config);
  std::optional<GaussianFieldSampler> own;
  if (!shadowing) shadowing = &own.emplace(make_shadowing_sampler(config));
  if (!(shadowing->spec() == spec)) {
    throw std::invalid_argument("generate_world: shadowing sampler grid differs from the config grid");
  }

  TruthWorld world;
  LayoutOptions layout = config.layout;
  layout.keep_clear.insert(layout.keep_clear.end(), config.gbs_positions.begin(),
                           config.gbs_positions.end());
  SeededRng layout_rng(seed, Stream::kLayout);
  world.layout = generate_layout(config.region, config.n_buildings, layout_rng, layout);

  const LinkGeometry geometry{config.gbs_height, config.uav_altitude};
  const SeededRng shadow_root(seed, Stream::kShadowing);
  for (std::size_t k = 0; k < config.gbs_positions.size(); ++k) {
    SeededRng rng = shadow_root.fork(k);
    world.ckms.push_back(generate_truth_ckm(world.layout, config.gbs_positions[k], geometry,
                                            config.truth, *shadowing, rng));
  }
  return world;
}

std::vector<ChannelSample> random_samples(const GainGrid& truth, std::size_t n, std::size_t gbs,
                                          std::uint64_t seed) {
  SeededRng rng = SeededRng(seed, Stream::kSampling).fork(gbs).fork(n);
  return sample_random(truth, n, rng);
}

std::vector<ChannelSample> plan_samples(const ExperimentConfig& config, const GainGrid& truth,
                                        std::size_t gbs, std::uint64_t seed) {
  if (config.sampling == SamplingMode::kStride) {
    return sample_measurements(truth, config.stride_x, config.stride_y);
  }
  return random_samples(truth, config.sample_count, gbs, seed);
}

GainGrid construct_with(const ExperimentConfig& config, MethodKind method,
                        std::span<const ChannelSample> samples, const GridSpec& spec,
                        std::size_t gbs, SemivariogramParams* fitted) {
  switch (method) {
    case MethodKind::kKrigingExponential:
    case MethodKind::kKrigingSpherical: {
      const VariogramModel kind = method == MethodKind::kKrigingExponential
                                      ? VariogramModel::kExponential
                                      : VariogramModel::kSpherical;
      const VariogramBinning bins = default_binning(spec);
      const SemivariogramParams params =
          fit_semivariogram(empirical_semivariogram(samples, bins.bin_width, bins.max_lag), kind);
      if (fitted) *fitted = params;
      KrigingMethod m{params, std::nullopt};
      if (config.kriging_neighborhood > 0) m.neighborhood = config.kriging_neighborhood;
      return construct_ckm(samples, spec, m);
    }
    case MethodKind::kKnn:
      return construct_ckm(samples, spec, KnnMethod{config.knn_k});
    case MethodKind::kLos:
      if (gbs >= config.gbs_positions.size()) {
        throw std::invalid_argument("los construction: no GBS position for map " +
                                    std::to_string(gbs + 1));
      }
      return construct_ckm(samples, spec,
                           LosMethod{config.gbs_positions[gbs], config.truth.beta0_db,
                                     config.uav_altitude, config.gbs_height});
  }
  throw std::logic_error("construct_with: unknown method");
}

std::vector<MaeRow> mae_sweep(const ExperimentConfig& config, std::span<const GainGrid> truths,
                              std::span<const std::uint64_t> seeds) {
  std::vector<MaeRow> rows;
  for (std::size_t g = 0; g < truths.size(); ++g) {
    for (const std::size_t n : config.mae_sample_counts) {
      for (const std::uint64_t seed : seeds) {
        const auto samples = random_samples(truths[g], n, g, seed);
        for (const MethodKind method : config.mae_methods) {
          const GainGrid est = construct_with(config, method, samples, truths[g].spec(), g);
          rows.push_back({g + 1, method, n, seed, mae(est, truths[g])});
        }
      }
    }
  }
  return rows;
}

void write_mae_csv(std::ostream& out, std::span<const MaeRow> rows) {
  out << "gbs,method,n,seed,mae\n";
  for (const auto& r : rows) {
    out << r.gbs << ',' << to_string(r.method) << ',' << r.n << ',' << r.seed << ','
        << format_double(r.mae) << '\n';
  }
}

PlacementOutcome run_placement(const ExperimentConfig& config, std::span<const GainGrid> planning,
                               std::span<const GainGrid> truth, std::uint64_t seed) {
  const Scenario scenario = make_scenario(config);
  if (!truth.empty() && truth.size() != planning.size()) {
    throw std::invalid_argument("optimize: got " + std::to_string(planning.size()) +
                                " planning maps but " + std::to_string(truth.size()) + " truth maps");
  }
  SeededRng rng(seed, Stream::kDfoInit);
  PlacementOutcome out;
  out.trace = optimize_placement(scenario, planning, config.dfo, rng, config.lookup);
  out.placement = PlacementVector(out.trace.best_point);
  out.planning = evaluate_placement(scenario, planning, out.placement, config.lookup);
  if (!truth.empty()) out.truth = evaluate_placement(scenario, truth, out.placement, config.lookup);
  return out;
}

void write_summary_json(std::ostream& out, const ExperimentConfig& config,
                        const PlacementOutcome& outcome) {
  nlohmann::ordered_json j;
  j["seed"] = config.seed;
  j["num_uavs"] = outcome.placement.num_uavs();
  j["termination"] = to_string(outcome.trace.termination);
  j["iterations"] = outcome.trace.iterations;
  j["evaluations"] = outcome.trace.evaluations;
  j["resample_evaluations"] = outcome.trace.resample_evaluations;
  j["planning_objective"] = outcome.planning.weighted_sum;
  if (outcome.truth) j["truth_objective"] = outcome.truth->weighted_sum;
  nlohmann::ordered_json uavs = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < outcome.placement.num_uavs(); ++k) {
    const Position2D q = outcome.placement.uav(k);
    nlohmann::ordered_json u;
    u["x"] = q.x;
    u["y"] = q.y;
    u["planning_rate"] = outcome.planning.rate[k];
    if (outcome.truth) u["truth_rate"] = outcome.truth->rate[k];
    uavs.push_back(std::move(u));
  }
  j["uavs"] = std::move(uavs);
  out << j.dump(2) << '\n';
}

const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::kDfoTruth: return "dfo-truth";
    case Scheme::kDfoKriging: return "dfo-kriging";
    case Scheme::kDfoKnn: return "dfo-knn";
    case Scheme::kHovering: return "hovering";
    case Scheme::kLosDesign: return "los-design";
  }
  return "?";
}

std::vector<SweepRow> sweep_power(const ExperimentConfig& config,
                                  const GaussianFieldSampler* shadowing) {
  config.validate();
  std::optional<GaussianFieldSampler> own;
  if (!shadowing) shadowing = &own.emplace(make_shadowing_sampler(config));
  const GridSpec spec = make_grid(config);
  const std::size_t k_links = config.gbs_positions.size();

  std::vector<SweepRow> rows;
  for (const std::uint64_t seed : config.seeds) {
    const TruthWorld world = generate_world(config, seed, shadowing);
    std::vector<GainGrid> kriging;
    std::vector<GainGrid> knn;
    for (std::size_t g = 0; g < k_links; ++g) {
      const auto samples = sample_measurements(world.ckms[g], config.plan_stride_x, config.plan_stride_y);
      kriging.push_back(construct_with(config, MethodKind::kKrigingExponential, samples, spec, g));
      knn.push_back(construct_with(config, MethodKind::kKnn, samples, spec, g));
    }

    for (std::size_t p = 0; p < config.sweep_powers_dbm.size(); ++p) {
      ExperimentConfig at_power = config;
      at_power.tx_power_dbm = config.sweep_powers_dbm[p];
      const Scenario scenario = make_scenario(at_power);
      for (const Scheme scheme : kAllSchemes) {
        SeededRng rng = SeededRng(seed, Stream::kDfoInit).fork(static_cast<std::uint64_t>(scheme) * 1024 + p);
        PlacementVector q;
        switch (scheme) {
          case Scheme::kDfoTruth:
            q = PlacementVector(optimize_placement(scenario, world.ckms, config.dfo, rng, config.lookup).best_point);
            break;
          case Scheme::kDfoKriging:
            q = PlacementVector(optimize_placement(scenario, kriging, config.dfo, rng, config.lookup).best_point);
            break;
          case Scheme::kDfoKnn:
            q = PlacementVector(optimize_placement(scenario, knn, config.dfo, rng, config.lookup).best_point);
            break;
          case Scheme::kHovering:
            q = hovering_baseline(scenario);
            break;
          case Scheme::kLosDesign:
            q = los_design(scenario, config.truth.beta0_db, config.dfo, rng);
            break;
        }
        rows.push_back({config.sweep_powers_dbm[p], scheme, seed,
                        weighted_sum_rate(scenario, world.ckms, q, config.lookup)});
      }
    }
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "power_dbm,scheme,seed,sum_rate\n";
  for (const auto& r : rows) {
    out << format_double(r.power_dbm) << ',' << to_string(r.scheme) << ',' << r.seed << ','
        << format_double(r.sum_rate) << '\n';
  }
}

namespace {

fs::path prepare_out_dir(const ExperimentConfig& config) {
  std::error_code ec;
  fs::create_directories(config.out_dir, ec);
  if (ec) throw std::runtime_error("cannot create " + config.out_dir.string() + ": " + ec.message());
  return config.out_dir;
}

std::vector<GainGrid> load_grids(const Paths& files) {
  std::vector<GainGrid> out;
  for (const auto& f : files) out.push_back(load_grid(f));
  return out;
}

void require_links(const ExperimentConfig& config, std::size_t n, const char* what) {
  if (n != config.gbs_positions.size()) {
    throw std::invalid_argument(std::string(what) + ": got " + std::to_string(n) +
                                " maps for " + std::to_string(config.gbs_positions.size()) +
                                " GBSs");
  }
}

std::string numbered(const char* prefix, std::size_t k, const std::string& suffix) {
  return prefix + std::to_string(k + 1) + suffix;
}

template <class Writer>
void write_file(const fs::path& path, Writer&& write) {
  auto out = open_output(path);
  write(out);
  out.flush();
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace

void cmd_gen_truth(const ExperimentConfig& config, std::ostream& log) {
  config.validate();
  const fs::path dir = prepare_out_dir(config);
  const TruthWorld world = generate_world(config, config.seed);
  for (std::size_t k = 0; k < world.ckms.size(); ++k) {
    const fs::path p = dir / numbered("truth_gbs", k, ".ckm");
    save_grid(p, world.ckms[k]);
    log << "wrote " << p.string() << '\n';
  }
  save_layout(dir / "layout.csv", world.layout);
  log << "wrote " << (dir / "layout.csv").string() << " (" << world.layout.size() << " buildings)\n";
}

void cmd_sample(const ExperimentConfig& config, const Paths& truth_files, std::ostream& log) {
  config.validate();
  if (truth_files.empty()) throw std::invalid_argument("sample: no truth files given");
  const fs::path dir = prepare_out_dir(config);
  for (std::size_t k = 0; k < truth_files.size(); ++k) {
    const GainGrid truth = load_grid(truth_files[k]);
    const auto samples = plan_samples(config, truth, k, config.seed);
    const fs::path p = dir / numbered("samples_gbs", k, ".csv");
    save_samples(p, samples);
    log << "wrote " << p.string() << " (" << samples.size() << " samples)\n";
  }
}

void cmd_construct(const ExperimentConfig& config, const Paths& truth_files,
                   const Paths& sample_files, bool sweep, std::ostream& log) {
  config.validate();
  const fs::path dir = prepare_out_dir(config);
  const std::vector<GainGrid> truths = load_grids(truth_files);

  if (sweep) {
    if (truths.empty()) throw std::invalid_argument("construct --sweep needs truth files");
    const auto rows = mae_sweep(config, truths, config.seeds);
    write_file(dir / "mae_sweep.csv", [&](std::ostream& out) { write_mae_csv(out, rows); });
    log << "wrote " << (dir / "mae_sweep.csv").string() << " (" << rows.size() << " rows)\n";
    return;
  }

  if (!sample_files.empty() && !truths.empty() && sample_files.size() != truths.size()) {
    throw std::invalid_argument("construct: sample and truth file counts differ");
  }
  const std::size_t maps = truths.empty() ? sample_files.size() : truths.size();
  if (maps == 0) throw std::invalid_argument("construct: give truth files, sample files, or both");

  std::vector<MaeRow> rows;
  for (std::size_t k = 0; k < maps; ++k) {
    const auto samples = sample_files.empty() ? plan_samples(config, truths[k], k, config.seed)
                                              : load_samples(sample_files[k]);
    const GridSpec spec = truths.empty() ? make_grid(config) : truths[k].spec();
    const GainGrid est = construct_with(config, config.method, samples, spec, k);
    const fs::path p = dir / numbered("ckm_gbs", k, std::string("_") + to_string(config.method) + ".ckm");
    save_grid(p, est);
    log << "wrote " << p.string() << '\n';
    if (!truths.empty()) rows.push_back({k + 1, config.method, samples.size(), config.seed, mae(est, truths[k])});
  }
  if (!rows.empty()) {
    write_file(dir / "construct_mae.csv", [&](std::ostream& out) { write_mae_csv(out, rows); });
    for (const auto& r : rows) log << "gbs " << r.gbs << " mae " << format_fixed(r.mae, 3) << " dB\n";
  }
}

void cmd_eval_mae(const ExperimentConfig& config, const Paths& estimate_files,
                  const Paths& truth_files, std::ostream& log) {
  if (estimate_files.empty() || estimate_files.size() != truth_files.size()) {
    throw std::invalid_argument("eval-mae: need matching, non-empty estimate and truth lists");
  }
  const fs::path dir = prepare_out_dir(config);
  write_file(dir / "eval_mae.csv", [&](std::ostream& out) {
    out << "estimate,truth,mae\n";
    for (std::size_t k = 0; k < estimate_files.size(); ++k) {
      const double e = mae(load_grid(estimate_files[k]), load_grid(truth_files[k]));
      out << estimate_files[k].filename().string() << ',' << truth_files[k].filename().string() << ','
          << format_double(e) << '\n';
      log << estimate_files[k].filename().string() << " mae " << format_fixed(e, 3) << " dB\n";
    }
  });
}

void cmd_optimize(const ExperimentConfig& config, const Paths& ckm_files, const Paths& truth_files,
                  std::ostream& log) {
  config.validate();
  require_links(config, ckm_files.size(), "optimize");
  if (!truth_files.empty()) require_links(config, truth_files.size(), "optimize --truth");
  const fs::path dir = prepare_out_dir(config);
  const auto planning = load_grids(ckm_files);
  const auto truth = load_grids(truth_files);
  const PlacementOutcome outcome = run_placement(config, planning, truth, config.seed);
  write_file(dir / "trace.csv", [&](std::ostream& out) { write_trace_csv(out, outcome.trace); });
  write_file(dir / "summary.json", [&](std::ostream& out) { write_summary_json(out, config, outcome); });
  log << to_string(outcome.trace.termination) << " after " << outcome.trace.iterations
      << " iterations, " << outcome.trace.evaluations << " evaluations, "
      << format_fixed(outcome.trace.wall_time_s * 1e3, 1) << " ms\n";
  log << "planning objective " << format_fixed(outcome.planning.weighted_sum, 3) << " bps/Hz\n";
  if (outcome.truth) log << "truth objective " << format_fixed(outcome.truth->weighted_sum, 3) << " bps/Hz\n";
}

void cmd_exhaustive(const ExperimentConfig& config, const Paths& ckm_files, std::ostream& log) {
  config.validate();
  require_links(config, ckm_files.size(), "exhaustive");
  const fs::path dir = prepare_out_dir(config);
  const auto ckms = load_grids(ckm_files);
  const Scenario scenario = make_scenario(config);
  const auto t0 = std::chrono::steady_clock::now();
  const SearchResult res = exhaustive_search(scenario, ckms, {config.exhaustive_stride});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const RateReport report = evaluate_placement(scenario, ckms, res.placement);

  nlohmann::ordered_json j;
  j["stride"] = config.exhaustive_stride;
  j["evaluations"] = res.evaluations;
  j["objective"] = res.objective;
  nlohmann::ordered_json uavs = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < res.placement.num_uavs(); ++k) {
    const Position2D q = res.placement.uav(k);
    uavs.push_back({{"x", q.x}, {"y", q.y}, {"rate", report.rate[k]}});
  }
  j["uavs"] = std::move(uavs);
  write_file(dir / "exhaustive.json", [&](std::ostream& out) { out << j.dump(2) << '\n'; });
  log << res.evaluations << " evaluations in " << format_fixed(secs, 2) << " s, objective "
      << format_fixed(res.objective, 3) << " bps/Hz\n";
}

void cmd_sweep_power(const ExperimentConfig& config, std::ostream& log) {
  const fs::path dir = prepare_out_dir(config);
  const auto rows = sweep_power(config);
  write_file(dir / "sweep_power.csv", [&](std::ostream& out) { write_sweep_csv(out, rows); });
  log << "wrote " << (dir / "sweep_power.csv").string() << " (" << rows.size() << " rows)\n";
}

void cmd_export_heatmap(const ExperimentConfig& config, const Paths& grid_files, std::ostream& log) {
  if (grid_files.empty()) throw std::invalid_argument("export-heatmap: no grid files given");
  const fs::path dir = prepare_out_dir(config);
  for (const auto& f : grid_files) {
    const fs::path p = dir / f.filename().replace_extension(".pgm");
    save_pgm(p, load_grid(f), config.heatmap);
    log << "wrote " << p.string() << '\n';
  }
}

}  // namespace ckmopt
