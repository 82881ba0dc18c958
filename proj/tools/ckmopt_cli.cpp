// ckmopt: CKM construction and UAV placement experiments.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "ckmopt/config.hpp"
#include "ckmopt/experiments.hpp"

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "key = value configuration file");
  cmd->add_option("--seed", c.seed, "overrides the config seed");
  cmd->add_option("--out-dir", c.out_dir, "output directory");
}

ckmopt::ExperimentConfig resolve(const Common& c) {
  ckmopt::ExperimentConfig cfg = c.config_path.empty() ? ckmopt::ExperimentConfig{}
                                                       : ckmopt::load_config(c.config_path);
  if (c.seed) cfg.seed = *c.seed;
  if (c.out_dir) cfg.out_dir = *c.out_dir;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CKM construction and multi-UAV placement"};
  app.require_subcommand(1);

  Common common;
  ckmopt::Paths truth, ckms, samples, estimates, grids;
  bool sweep = false;

  auto* gen = app.add_subcommand("gen-truth", "synthesize a city and its truth CKMs");
  auto* sample = app.add_subcommand("sample", "draw measurements from truth CKMs");
  sample->add_option("--truth", truth, "truth grid files, one per GBS")->required();
  auto* construct = app.add_subcommand("construct", "build CKMs from measurements");
  construct->add_option("--truth", truth, "truth grid files (sampled per plan, used for MAE)");
  construct->add_option("--samples", samples, "sample CSV files instead of the sampling plan");
  construct->add_flag("--sweep", sweep, "MAE sweep over sample counts and seeds");
  auto* eval = app.add_subcommand("eval-mae", "mean absolute error of estimated grids");
  eval->add_option("--estimate", estimates, "estimated grid files")->required();
  eval->add_option("--truth", truth, "truth grid files")->required();
  auto* opt = app.add_subcommand("optimize", "trust-region placement on CKMs");
  opt->add_option("--ckm", ckms, "planning grid files, one per GBS")->required();
  opt->add_option("--truth", truth, "truth grid files for evaluation");
  auto* exh = app.add_subcommand("exhaustive", "exhaustive placement search");
  exh->add_option("--ckm", ckms, "grid files, one per GBS")->required();
  auto* sweep_cmd = app.add_subcommand("sweep-power", "sum rate versus transmit power per scheme");
  auto* heat = app.add_subcommand("export-heatmap", "render grids as PGM images");
  heat->add_option("--grid", grids, "grid files")->required();

  for (auto* cmd : {gen, sample, construct, eval, opt, exh, sweep_cmd, heat}) add_common(cmd, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const ckmopt::ExperimentConfig cfg = resolve(common);
    std::ostream& log = std::cout;
    if (gen->parsed()) ckmopt::cmd_gen_truth(cfg, log);
    else if (sample->parsed()) ckmopt::cmd_sample(cfg, truth, log);
    else if (construct->parsed()) ckmopt::cmd_construct(cfg, truth, samples, sweep, log);
    else if (eval->parsed()) ckmopt::cmd_eval_mae(cfg, estimates, truth, log);
    else if (opt->parsed()) ckmopt::cmd_optimize(cfg, ckms, truth, log);
    else if (exh->parsed()) ckmopt::cmd_exhaustive(cfg, ckms, log);
    else if (sweep_cmd->parsed()) ckmopt::cmd_sweep_power(cfg, log);
    else if (heat->parsed()) ckmopt::cmd_export_heatmap(cfg, grids, log);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "ckmopt: error: %s\n", e.what());
    return 1;
  }
  return 0;
}
