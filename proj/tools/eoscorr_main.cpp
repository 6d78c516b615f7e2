#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "eoscorr/config.hpp"
#include "eoscorr/errors.hpp"
#include "eoscorr/photon_budget.hpp"
#include "eoscorr/runner.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

struct GlobalArgs {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;  // 0 = hardware concurrency
};

eoscorr::ExperimentConfig load_config(const GlobalArgs& g, bool required) {
  eoscorr::ExperimentConfig cfg;
  if (!g.config_path.empty())
    cfg = eoscorr::parse_config_file(g.config_path);
  else if (required)
    throw eoscorr::ConfigError("this subcommand needs --config PATH");
  if (g.seed_set) cfg.master_seed = g.seed;
  if (!g.out_dir.empty()) cfg.output.directory = g.out_dir;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"eoscorr: sub-cycle THz photon-correlation testbed"};
  app.require_subcommand(1);

  GlobalArgs g;
  app.add_option("--config", g.config_path, "experiment config file");
  app.add_option("--out", g.out_dir, "output directory (overrides [output] directory)");
  auto* seed_opt = app.add_option("--seed", g.seed, "master seed (overrides config)");
  app.add_option("--threads", g.threads, "worker threads (default: hardware)");

  auto* cmd_simulate =
      app.add_subcommand("simulate", "run the modal laser model, export the trajectory CSV");
  auto* cmd_correlate =
      app.add_subcommand("correlate", "delay-scan correlation experiment (or re-estimate "
                                      "from recorded EOSC files)");
  std::vector<std::string> eosc_files;
  double eosc_nu0_thz = 2.3;
  cmd_correlate->add_option("--eosc", eosc_files,
                            "pre-recorded EOSC pulse streams, one file per tau");
  cmd_correlate->add_option("--nu0-thz", eosc_nu0_thz,
                            "center frequency for the envelope when using --eosc");
  auto* cmd_sweep = app.add_subcommand("sweep", "threshold sweep (L-I curve and g2 vs gain)");
  auto* cmd_spectrum = app.add_subcommand("spectrum", "g1/g2 spectra from a correlation CSV");
  std::string spectrum_input;
  cmd_spectrum->add_option("input", spectrum_input, "correlation CSV")->required();
  auto* cmd_budget = app.add_subcommand("budget", "photon-budget conversion table");
  double budget_field = 90.0;
  double budget_nu_thz = 2.3;
  double budget_window_fs = 146.0;
  bool budget_json_out = false;
  cmd_budget->add_option("--field-v-per-m", budget_field, "detected field amplitude");
  cmd_budget->add_option("--nu-thz", budget_nu_thz, "center frequency");
  cmd_budget->add_option("--window-fs", budget_window_fs, "detection window");
  cmd_budget->add_flag("--json", budget_json_out, "emit JSON instead of the table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }
  g.seed_set = seed_opt->count() > 0;

  try {
    if (cmd_budget->parsed()) {
      eoscorr::BudgetParams p;
      p.nu_hz = budget_nu_thz * 1e12;
      p.delta_t_s = budget_window_fs * 1e-15;
      eoscorr::mb::MBParams mb;  // paper-default dipole and lifetimes
      if (!g.config_path.empty()) {
        const auto cfg = eoscorr::parse_config_file(g.config_path);
        mb = cfg.source.mb;
        p.nu_hz = cfg.source.nu0_hz;
      }
      if (budget_json_out)
        std::cout << eoscorr::budget_json(budget_field, p, mb.z12_m, mb.tau_up_s, mb.tau_coh_s)
                  << "\n";
      else
        eoscorr::print_budget_table(std::cout, budget_field, p, mb.z12_m, mb.tau_up_s,
                                    mb.tau_coh_s);
      return kExitOk;
    }

    if (cmd_simulate->parsed()) {
      const auto cfg = load_config(g, true);
      const auto path = eoscorr::run_simulate(cfg, cfg.output.directory);
      std::cout << "trajectory written to " << path << "\n";
      return kExitOk;
    }

    if (cmd_correlate->parsed()) {
      if (!eosc_files.empty()) {
        const auto cfg = load_config(g, false);
        const auto trace = eoscorr::correlate_from_eosc(
            eosc_files, cfg.correlator.variance_floor_eps, cfg.correlator.envelope_cycles,
            eosc_nu0_thz * 1e12);
        std::vector<std::string> hdr = {"correlation estimates from recorded EOSC streams"};
        eoscorr::write_correlation_csv(std::cout, trace, hdr);
        return kExitOk;
      }
      const auto cfg = load_config(g, true);
      const auto art = eoscorr::run_correlation_experiment(cfg, cfg.output.directory, g.threads);
      std::cout << "trace written to " << art.trace_csv_path << "\n"
                << "spectra written to " << art.g1_spectrum_path << ", "
                << art.g2_spectrum_path << "\n";
      return kExitOk;
    }

    if (cmd_sweep->parsed()) {
      const auto cfg = load_config(g, true);
      const auto report = eoscorr::run_threshold_sweep(cfg, cfg.output.directory, g.threads);
      std::cout << "sweep written to " << report.csv_path << " and " << report.json_path << "\n";
      for (const auto& row : report.rows)
        if (row.status.rfind("failed", 0) == 0)
          std::cerr << "point G/Gth = " << row.gain_over_threshold << ": " << row.status << "\n";
      return kExitOk;
    }

    if (cmd_spectrum->parsed()) {
      const auto cfg = load_config(g, false);
      const std::string out = !cfg.output.directory.empty() ? cfg.output.directory : ".";
      const auto art = eoscorr::run_spectrum_from_csv(spectrum_input, out);
      std::cout << "spectra written to " << art.g1_spectrum_path << ", "
                << art.g2_spectrum_path << "\n";
      return kExitOk;
    }
  } catch (const eoscorr::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const eoscorr::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const eoscorr::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}
