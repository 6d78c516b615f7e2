#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "eoscorr/eos_frontend.hpp"

namespace eoscorr {

// Neumaier-compensated running sum; keeps fourth-moment sums exact enough over
// 1e8+ samples that merge order never matters at the 1e-10 level.
struct CompensatedSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      comp += (sum - t) + v;
    else
      comp += (v - t) + sum;
    sum = t;
  }
  void merge(const CompensatedSum& o) {
    add(o.sum);
    comp += o.comp;
  }
  double value() const { return sum + comp; }
};

struct MomentSums {
  std::uint64_t count = 0;
  CompensatedSum sx, sy, sxy, sxx, syy, sxxyy, sx4, sy4;

  void add(double x, double y) {
    ++count;
    const double xx = x * x, yy = y * y;
    sx.add(x);
    sy.add(y);
    sxy.add(x * y);
    sxx.add(xx);
    syy.add(yy);
    sxxyy.add(xx * yy);
    sx4.add(xx * xx);
    sy4.add(yy * yy);
  }
  void merge(const MomentSums& o);
};

struct BlockSums {
  MomentSums on, off;
  void merge(const BlockSums& o) {
    on.merge(o.on);
    off.merge(o.off);
  }
};

// Mergeable sufficient statistics for the g1/g2 estimators, kept per jackknife
// block (one modulation period, keyed by absolute block index so merging
// arbitrary chunkings of one stream reassembles identical totals).
class SufficientStats {
 public:
  void add(std::uint64_t block, bool on, double x, double y);
  void merge(const SufficientStats& o);

  MomentSums totals_on() const;
  MomentSums totals_off() const;
  std::uint64_t total_pulses() const;
  const std::map<std::uint64_t, BlockSums>& blocks() const { return blocks_; }

 private:
  std::map<std::uint64_t, BlockSums> blocks_;
  BlockSums* cursor_ = nullptr;
  std::uint64_t cursor_key_ = ~0ULL;
};

SufficientStats accumulate(const PulseSampleStream& stream);
SufficientStats accumulate(const PairedSamples& samples);

struct Estimate {
  double value = 0.0;
  double err = 0.0;  // NaN when fewer than 2 jackknife blocks
  std::size_t n_blocks = 0;
};

// g1 = C_xy / sqrt(Vx Vy) with C, Vx, Vy the ON-minus-OFF lock-in-corrected
// moments. Throws InsufficientSignal when a corrected variance is <= the floor
// (pass eps * nef^2; 0 disables the floor but still rejects V <= 0).
Estimate estimate_g1(const SufficientStats& stats, double variance_floor = 0.0);

// Noise-corrected g2: Q / (Vx Vy) with
// Q = <x2y2>_ON - <x2>_OFF Vy - <y2>_OFF Vx - <x2y2>_OFF.
Estimate estimate_g2(const SufficientStats& stats, double variance_floor = 0.0);

// Fourth moment left uncorrected (numerator <x2y2>_ON), variances still
// corrected; the biased comparator for the noise-correction property test.
Estimate estimate_g2_uncorrected(const SufficientStats& stats, double variance_floor = 0.0);

// Gaussian smoothing of g2(tau) over a window of FWHM n_cycles / nu0,
// renormalized at the edges; removes the 2 nu0 oscillation of the real-field
// estimator. Returns smoothed values and propagated errors. The tau grid must
// be uniform with step < 1/(4 nu0).
struct EnvelopeResult {
  std::vector<double> value;
  std::vector<double> err;
};
EnvelopeResult few_cycle_envelope(const std::vector<double>& taus_s,
                                  const std::vector<double>& g2_values,
                                  const std::vector<double>& g2_errors,
                                  double nu0_hz, double n_cycles = 2.0);

struct CorrelationTrace {
  std::vector<double> taus_s;
  std::vector<Estimate> g1;
  std::vector<Estimate> g2_raw;
  std::vector<double> g2_env;
  std::vector<double> g2_env_err;
  std::uint64_t n_pulses_per_tau = 0;
  double nef_vpm = 0.0;
  double nu0_hz = 0.0;
};

struct ScanOptions {
  double variance_floor_eps = 0.01;  // floor = eps * nef^2
  double envelope_cycles = 2.0;
  int threads = 1;
  bool enforce_tau_range = true;  // |tau| <= 140 ps unless long-delay pairing
  // Invoked with each generated stream (e.g. to persist EOSC files); called
  // from worker threads, one call per tau index.
  std::function<void(const PulseSampleStream&, std::size_t)> stream_sink;
};

// One full delay scan: per tau sample_pulse_stream -> accumulate -> estimates,
// tau points independent and run concurrently, then the few-cycle envelope.
CorrelationTrace correlation_scan(const FieldTrace& source, const std::vector<double>& taus_s,
                                  std::uint64_t n_pulses_per_tau, const DetectorParams& det,
                                  std::uint64_t master_seed, const ScanOptions& opt = {});

// CSV per the documented trace format: '#' comment header lines, then
// tau_fs, g1, g1_err, g2_raw, g2_raw_err, g2_env, g2_env_err.
void write_correlation_csv(std::ostream& os, const CorrelationTrace& trace,
                           const std::vector<std::string>& header_comments);

}  // namespace eoscorr
