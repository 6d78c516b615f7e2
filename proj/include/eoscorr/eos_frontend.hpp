#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eoscorr/field_trace.hpp"
#include "eoscorr/random.hpp"

namespace eoscorr {

// Virtual two-probe electro-optic sampling detector: Gaussian probe window,
// dual-channel acquisition at the repetition rate, independent additive
// Gaussian noise per channel, source modulation gating by pulse index.
struct DetectorParams {
  double probe_fwhm_s = 146e-15;
  double f_rep_hz = 90e6;
  double nef_vpm = 600.0;          // per-pulse noise equivalent field per channel
  std::uint32_t mod_period_pulses = 18000;  // 90 MHz / 5 kHz
  std::uint32_t duty_on_pulses = 9000;      // 50% duty, period starts ON at i = 0

  double probe_sigma_s() const { return probe_fwhm_s / 2.354820045030949; }
  void validate() const;
};

// Per-pulse two-channel samples (x_i at t_i, y_i at t_i + tau). The ON/OFF
// partition is deterministic from the pulse index alone.
struct PulseSampleStream {
  double tau_s = 0.0;
  DetectorParams detector;
  std::vector<double> x;  // V/m
  std::vector<double> y;  // V/m
  std::uint64_t seed = 0;
  std::string stream_label;

  std::uint64_t n_pulses() const { return x.size(); }
  bool on(std::uint64_t i) const {
    return (i % detector.mod_period_pulses) < detector.duty_on_pulses;
  }
};

// One (x, y) pair already resolved into its modulation class and jackknife
// block; the shape the correlator consumes. Produced from plain streams and
// from asynchronous-offset pairing.
struct PairedPulse {
  double x;
  double y;
  std::uint64_t block;
  bool on;
};

struct PairedSamples {
  double tau_s = 0.0;
  double nef_vpm = 0.0;
  std::vector<PairedPulse> pulses;
};

bool modulation_state(std::uint64_t pulse_index, const DetectorParams& p);

// Gaussian-window average of the trace around t_center, numerical quadrature
// (step sigma/8, +-4 sigma). The pipeline takes the analytic equivalent via
// FieldTrace::filtered; this is the reference implementation they are tested
// against.
double probe_response(const FieldTrace& trace, double t_center, double probe_fwhm_s);

PulseSampleStream sample_pulse_stream(const FieldTrace& source, double tau_s,
                                      std::uint64_t n_pulses, const DetectorParams& params,
                                      std::uint64_t seed,
                                      const StreamId& noise_id = {"eos/noise", 0, 0, 0});

// View of a stream as correlator input, block = one modulation period.
PairedSamples to_paired(const PulseSampleStream& stream);

// Pairs x_i with y_{i+n_offset}, effective delay tau + n_offset/f_rep. Pairs
// whose two indices fall in different modulation classes are discarded; throws
// NumericalError if nothing survives.
PairedSamples pair_with_offset(const PulseSampleStream& stream, std::int64_t n_offset);

}  // namespace eoscorr
