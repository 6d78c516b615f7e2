#pragma once

#include <memory>
#include <string>
#include <vector>

#include "eoscorr/field_trace.hpp"
#include "eoscorr/random.hpp"

namespace eoscorr {

enum class SourceKind { kCoherent, kThermal, kMultimode };

// Reference sources with analytically known coherence, used as oracles for the
// detection/estimation chain. All three are sums of fixed-amplitude tones with
// phases redrawn once per modulation period ("block"), emulating a free-running
// source that is uncorrelated with the probe laser.
struct SourceSpec {
  SourceKind kind = SourceKind::kCoherent;
  double nu0_hz = 2.3e12;
  double amplitude_vpm = 0.0;     // coherent: peak amplitude; thermal: rms field
  double bandwidth_hz = 1e11;     // thermal only: FWHM of the Gaussian power spectrum
  int n_components = 501;         // thermal only
  std::vector<double> mode_amplitudes_vpm;  // multimode only, one per mode
  double mode_spacing_hz = 2.5e11;          // multimode only
  // One block = one modulation period of the detector; phases refresh per block.
  double block_period_s = 18000.0 / 90e6;

  void validate() const;
};

// Shared implementation: E(t) = sum_k A_k cos(2 pi nu_k t + phi_{k,b}), with
// phi_{k,b} uniform per block b = floor(t / block_period), derived statelessly
// from (seed, k, b). filtered() multiplies each tone by the Gaussian window
// transform, exact for tone sums.
class ToneSumTrace final : public FieldTrace {
 public:
  ToneSumTrace(std::vector<double> freqs_hz, std::vector<double> amplitudes_vpm,
               double block_period_s, std::uint64_t seed, std::string phase_label,
               Descriptor d);

  double eval(double t) const override;
  double filtered(double t, double sigma) const override;
  std::unique_ptr<PulseSampler> make_pulse_sampler(double f_rep_hz, double tau_s,
                                                   double sigma_s) const override;

  std::size_t n_tones() const { return freqs_.size(); }
  double tone_frequency(std::size_t k) const { return freqs_[k]; }
  double tone_amplitude(std::size_t k) const { return amps_[k]; }
  double phase(std::size_t k, std::int64_t block) const;
  std::int64_t block_of(double t) const;

 private:
  std::vector<double> freqs_;
  std::vector<double> amps_;
  double block_period_s_;
  std::uint64_t seed_;
  std::string phase_label_;
};

std::unique_ptr<FieldTrace> coherent_source(const SourceSpec& spec, std::uint64_t seed);
std::unique_ptr<FieldTrace> thermal_source(const SourceSpec& spec, std::uint64_t seed);
std::unique_ptr<FieldTrace> multimode_source(const SourceSpec& spec, std::uint64_t seed);

// Dispatch on spec.kind.
std::unique_ptr<FieldTrace> make_source(const SourceSpec& spec, std::uint64_t seed);

}  // namespace eoscorr
