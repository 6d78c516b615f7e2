#include "eoscorr/synth_sources.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include "eoscorr/errors.hpp"

namespace eoscorr {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

void SourceSpec::validate() const {
  if (nu0_hz <= 0.0) throw ConfigError("source: nu0 must be positive");
  if (amplitude_vpm < 0.0) throw ConfigError("source: amplitude must be >= 0");
  if (block_period_s <= 0.0) throw ConfigError("source: block period must be positive");
  if (kind == SourceKind::kThermal) {
    if (bandwidth_hz <= 0.0) throw ConfigError("source: thermal bandwidth must be positive");
    if (n_components < 500)
      throw ConfigError("source: thermal model requires >= 500 spectral components");
  }
  if (kind == SourceKind::kMultimode) {
    if (mode_amplitudes_vpm.empty())
      throw ConfigError("source: multimode needs at least one mode amplitude");
    if (mode_spacing_hz <= 0.0) throw ConfigError("source: mode spacing must be positive");
    for (double a : mode_amplitudes_vpm)
      if (a < 0.0) throw ConfigError("source: mode amplitudes must be >= 0");
  }
}

ToneSumTrace::ToneSumTrace(std::vector<double> freqs_hz, std::vector<double> amplitudes_vpm,
                           double block_period_s, std::uint64_t seed,
                           std::string phase_label, Descriptor d)
    : FieldTrace(-std::numeric_limits<double>::infinity(),
                 std::numeric_limits<double>::infinity(), d),
      freqs_(std::move(freqs_hz)),
      amps_(std::move(amplitudes_vpm)),
      block_period_s_(block_period_s),
      seed_(seed),
      phase_label_(std::move(phase_label)) {
  if (freqs_.size() != amps_.size() || freqs_.empty())
    throw NumericalError("ToneSumTrace: bad tone table");
}

std::int64_t ToneSumTrace::block_of(double t) const {
  return static_cast<std::int64_t>(std::floor(t / block_period_s_));
}

double ToneSumTrace::phase(std::size_t k, std::int64_t block) const {
  return kTwoPi * unit_hash(seed_, phase_label_, static_cast<std::uint64_t>(k),
                            static_cast<std::uint64_t>(block), 0);
}

double ToneSumTrace::eval(double t) const {
  const std::int64_t b = block_of(t);
  double e = 0.0;
  for (std::size_t k = 0; k < freqs_.size(); ++k)
    e += amps_[k] * std::cos(kTwoPi * freqs_[k] * t + phase(k, b));
  return e;
}

double ToneSumTrace::filtered(double t, double sigma) const {
  const std::int64_t b = block_of(t);
  double e = 0.0;
  for (std::size_t k = 0; k < freqs_.size(); ++k)
    e += amps_[k] * gaussian_filter_gain(freqs_[k], sigma) *
         std::cos(kTwoPi * freqs_[k] * t + phase(k, b));
  return e;
}

namespace {

// Incremental tone sampler: one complex rotor per tone per channel, advanced by
// a fixed per-pulse phase step; rotors are rebuilt from scratch on block
// changes and non-contiguous pulse jumps, which also bounds drift.
class ToneRotorSampler final : public PulseSampler {
 public:
  ToneRotorSampler(const ToneSumTrace& trace, double f_rep_hz, double tau_s,
                   double sigma_s)
      : trace_(trace), dt_rep_(1.0 / f_rep_hz), tau_(tau_s) {
    const std::size_t n = trace.n_tones();
    gain_.resize(n);
    step_.resize(n);
    rot_x_.resize(n);
    rot_y_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      gain_[k] = trace.tone_amplitude(k) * gaussian_filter_gain(trace.tone_frequency(k), sigma_s);
      const double dphi = kTwoPi * trace.tone_frequency(k) * dt_rep_;
      step_[k] = {std::cos(dphi), std::sin(dphi)};
    }
  }

  std::pair<double, double> sample(std::uint64_t i) override {
    const double t = static_cast<double>(i) * dt_rep_;
    const std::int64_t bx = trace_.block_of(t);
    const std::int64_t by = trace_.block_of(t + tau_);
    const bool contiguous = (last_index_ != kNone) && (i == last_index_ + 1);
    if (!contiguous || bx != block_x_) rebuild(rot_x_, t, bx), block_x_ = bx;
    else advance(rot_x_);
    if (!contiguous || by != block_y_) rebuild(rot_y_, t + tau_, by), block_y_ = by;
    else advance(rot_y_);
    last_index_ = i;
    double ex = 0.0, ey = 0.0;
    for (std::size_t k = 0; k < rot_x_.size(); ++k) {
      ex += rot_x_[k].real();
      ey += rot_y_[k].real();
    }
    return {ex, ey};
  }

 private:
  static constexpr std::uint64_t kNone = ~0ULL;

  void rebuild(std::vector<std::complex<double>>& rot, double t, std::int64_t block) {
    for (std::size_t k = 0; k < rot.size(); ++k) {
      const double ph = kTwoPi * trace_.tone_frequency(k) * t + trace_.phase(k, block);
      rot[k] = gain_[k] * std::complex<double>(std::cos(ph), std::sin(ph));
    }
  }

  void advance(std::vector<std::complex<double>>& rot) {
    for (std::size_t k = 0; k < rot.size(); ++k) rot[k] *= step_[k];
  }

  const ToneSumTrace& trace_;
  double dt_rep_, tau_;
  std::vector<double> gain_;
  std::vector<std::complex<double>> step_;
  std::vector<std::complex<double>> rot_x_, rot_y_;
  std::int64_t block_x_ = -(1LL << 62), block_y_ = -(1LL << 62);
  std::uint64_t last_index_ = kNone;
};

}  // namespace

std::unique_ptr<PulseSampler> ToneSumTrace::make_pulse_sampler(double f_rep_hz,
                                                               double tau_s,
                                                               double sigma_s) const {
  return std::make_unique<ToneRotorSampler>(*this, f_rep_hz, tau_s, sigma_s);
}

std::unique_ptr<FieldTrace> coherent_source(const SourceSpec& spec, std::uint64_t seed) {
  spec.validate();
  if (spec.kind != SourceKind::kCoherent) throw ConfigError("coherent_source: wrong kind");
  FieldTrace::Descriptor d{spec.nu0_hz, spec.amplitude_vpm};
  return std::make_unique<ToneSumTrace>(std::vector<double>{spec.nu0_hz},
                                        std::vector<double>{spec.amplitude_vpm},
                                        spec.block_period_s, seed, "src/coherent", d);
}

std::unique_ptr<FieldTrace> thermal_source(const SourceSpec& spec, std::uint64_t seed) {
  spec.validate();
  if (spec.kind != SourceKind::kThermal) throw ConfigError("thermal_source: wrong kind");
  const int n = spec.n_components;
  const double sigma_nu = spec.bandwidth_hz / 2.354820045030949;  // FWHM -> std of the PSD
  const double span = 8.0 * sigma_nu;                             // +-4 sigma
  std::vector<double> freqs(n), amps(n);
  double p = 0.0;
  for (int k = 0; k < n; ++k) {
    const double nu = spec.nu0_hz - 0.5 * span + span * k / (n - 1);
    freqs[k] = nu;
    const double dnu = nu - spec.nu0_hz;
    amps[k] = std::exp(-dnu * dnu / (4.0 * sigma_nu * sigma_nu));
    p += 0.5 * amps[k] * amps[k];
  }
  // Time-averaged <E^2> = sum A_k^2 / 2 = rms^2 by construction.
  const double scale = spec.amplitude_vpm / std::sqrt(p);
  for (double& a : amps) a *= scale;
  FieldTrace::Descriptor d{spec.nu0_hz, spec.amplitude_vpm};
  return std::make_unique<ToneSumTrace>(std::move(freqs), std::move(amps),
                                        spec.block_period_s, seed, "src/thermal", d);
}

std::unique_ptr<FieldTrace> multimode_source(const SourceSpec& spec, std::uint64_t seed) {
  spec.validate();
  if (spec.kind != SourceKind::kMultimode) throw ConfigError("multimode_source: wrong kind");
  const int m = static_cast<int>(spec.mode_amplitudes_vpm.size());
  std::vector<double> freqs(m);
  for (int k = 0; k < m; ++k)
    freqs[k] = spec.nu0_hz + (k - 0.5 * (m - 1)) * spec.mode_spacing_hz;
  double p2 = 0.0;
  for (double a : spec.mode_amplitudes_vpm) p2 += a * a;
  FieldTrace::Descriptor d{spec.nu0_hz, std::sqrt(p2)};
  return std::make_unique<ToneSumTrace>(std::move(freqs), spec.mode_amplitudes_vpm,
                                        spec.block_period_s, seed, "src/multimode", d);
}

std::unique_ptr<FieldTrace> make_source(const SourceSpec& spec, std::uint64_t seed) {
  switch (spec.kind) {
    case SourceKind::kCoherent: return coherent_source(spec, seed);
    case SourceKind::kThermal: return thermal_source(spec, seed);
    case SourceKind::kMultimode: return multimode_source(spec, seed);
  }
  throw ConfigError("make_source: unknown source kind");
}

}  // namespace eoscorr
