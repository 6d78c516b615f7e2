#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eoscorr/eos_frontend.hpp"
#include "eoscorr/mb_laser.hpp"

namespace eoscorr {

// Sectioned key=value experiment description. Unknown keys, missing required
// keys and out-of-range values are rejected with the offending line number.
// The full key set is documented in the README.

struct SourceConfig {
  std::string kind = "coherent";  // coherent | thermal | multimode | mb
  double nu0_hz = 2.3e12;
  double amplitude_vpm = 6000.0;
  double bandwidth_hz = 0.1e12;     // thermal
  int n_components = 501;           // thermal
  std::vector<double> mode_amplitudes_vpm;  // multimode (explicit amplitudes)
  int n_equal_modes = 0;                    // multimode shortcut: n equal modes
  double mode_spacing_hz = 250e9;           // multimode
  // mb source
  mb::MBParams mb;
  double gain_over_threshold = 1.05;
  double field_scale_vpm = 300.0;  // detected V/m per E_sat unit
  double duration_s = 200e-9;
  double transient_s = 20e-9;
  double record_dt_s = 1e-12;
  double dt_s = 0.25e-12;
};

struct CorrelatorConfig {
  double tau_min_s = -2e-12;
  double tau_max_s = 2e-12;
  double tau_step_s = 20e-15;
  std::uint64_t n_pulses_per_tau = 1000000;
  double envelope_cycles = 2.0;
  double variance_floor_eps = 0.01;

  std::vector<double> tau_grid() const;
};

struct SweepConfig {
  std::vector<double> gains_over_threshold;  // default 20-point grid, set by parser
  double i_threshold_ma = 495.0;
  double duration_s = 200e-9;
  double transient_s = 20e-9;
  double record_dt_s = 1e-12;
  double dt_s = 0.25e-12;
  bool pipeline = true;
  double pipeline_nef_vpm = 0.0;
  std::uint64_t pipeline_n_pulses = 200000;
  double pipeline_tau_span_s = 0.6e-12;
  double pipeline_tau_step_s = 50e-15;
  // 1-cycle window: still kills the 2 nu0 oscillation but passes the ~200 GHz
  // mode beats, keeping the pipeline g2(0) comparable to the modal route.
  double pipeline_envelope_cycles = 1.0;
  double field_scale_vpm = 300.0;
};

struct OutputConfig {
  std::string directory = "out";
  bool write_eosc = false;
};

struct ExperimentConfig {
  std::uint64_t master_seed = 1;
  SourceConfig source;
  DetectorParams detector;
  CorrelatorConfig correlator;
  SweepConfig sweep;
  OutputConfig output;
  bool has_source = false;
  bool has_sweep = false;
};

// The 20-point default sweep grid in G/G_th.
std::vector<double> default_sweep_grid();

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

// Canonical config text with every effective value filled in; parses back to
// an identical configuration.
std::string echo_config(const ExperimentConfig& config);

}  // namespace eoscorr
