#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "eoscorr/config.hpp"
#include "eoscorr/correlator.hpp"

namespace eoscorr {

// Builds the configured source. For the mb kind this runs the modal
// simulation and wraps the reconstructed field in the free-running slot
// adapter (which needs the detector repetition rate and the maximum |tau|
// that will be probed).
std::unique_ptr<FieldTrace> build_source(const ExperimentConfig& config,
                                         double max_abs_tau_s);

struct CorrelationArtifacts {
  CorrelationTrace trace;
  std::string trace_csv_path;
  std::string g1_spectrum_path;
  std::string g2_spectrum_path;
};

// Full delay-scan experiment: correlation_scan + few-cycle envelope + spectra,
// all results written under out_dir (correlation.csv, g1_spectrum.csv,
// g2_spectrum.csv, config_echo.cfg, optionally one EOSC file per tau).
CorrelationArtifacts run_correlation_experiment(const ExperimentConfig& config,
                                                const std::string& out_dir, int threads);

struct SweepRow {
  double gain_over_threshold = 0.0;
  double gain_per_s = 0.0;
  double current_ma = 0.0;
  double power_esat2 = 0.0;
  double field_vpm = 0.0;        // detected peak-equivalent amplitude
  double photons_window = 0.0;
  double g2_modal = 0.0;
  double g2_modal_err = 0.0;
  std::optional<double> g2_pipeline;
  std::optional<double> g2_pipeline_err;
  std::string status;            // "ok", "pipeline_skipped: ...", "failed: ..."
};

struct SweepReport {
  std::vector<SweepRow> rows;
  std::string csv_path;
  std::string json_path;
};

// Threshold sweep: per gain point one modal simulation, modal g2(0), total
// power, and (optionally) the full detection-pipeline g2(0) envelope at tau=0.
// Individual point failures are recorded in the row status; the sweep
// continues.
SweepReport run_threshold_sweep(const ExperimentConfig& config, const std::string& out_dir,
                                int threads);

// Modal trajectory export (source kind must be mb): trajectory.csv.
std::string run_simulate(const ExperimentConfig& config, const std::string& out_dir);

// g1/g2 spectra from an existing correlation CSV.
struct SpectrumArtifacts {
  std::string g1_spectrum_path;
  std::string g2_spectrum_path;
};
SpectrumArtifacts run_spectrum_from_csv(const std::string& correlation_csv,
                                        const std::string& out_dir);

// Estimates from pre-recorded EOSC pulse streams, one file per tau.
CorrelationTrace correlate_from_eosc(const std::vector<std::string>& paths,
                                     double variance_floor_eps, double envelope_cycles,
                                     double nu0_hz);

// Reads back the tau/g1/g2 columns of a correlation CSV.
struct CorrelationCsv {
  std::vector<double> taus_s, g1, g2_raw, g2_env;
};
CorrelationCsv read_correlation_csv(const std::string& path);

}  // namespace eoscorr
