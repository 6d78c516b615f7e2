#include "eoscorr/eos_frontend.hpp"

#include <cmath>

#include "eoscorr/errors.hpp"

namespace eoscorr {

void DetectorParams::validate() const {
  if (probe_fwhm_s <= 0.0) throw ConfigError("detector: probe_fwhm must be positive");
  if (f_rep_hz <= 0.0) throw ConfigError("detector: f_rep must be positive");
  if (nef_vpm < 0.0) throw ConfigError("detector: nef must be >= 0");
  if (duty_on_pulses == 0 || duty_on_pulses > mod_period_pulses)
    throw ConfigError("detector: need 0 < duty_on_pulses <= mod_period_pulses");
}

bool modulation_state(std::uint64_t i, const DetectorParams& p) {
  return (i % p.mod_period_pulses) < p.duty_on_pulses;
}

double probe_response(const FieldTrace& trace, double t_center, double probe_fwhm_s) {
  const double sigma = probe_fwhm_s / 2.354820045030949;
  if (t_center - 4.0 * sigma < trace.t_start() || t_center + 4.0 * sigma > trace.t_end())
    throw NumericalError("probe_response: probe window outside trace span");
  constexpr int kHalf = 32;
  const double h = sigma / 8.0;
  double wsum = 0.0, acc = 0.0;
  for (int j = -kHalf; j <= kHalf; ++j) {
    const double x = static_cast<double>(j) * h;
    const double w = std::exp(-0.5 * x * x / (sigma * sigma));
    wsum += w;
    acc += w * trace.eval(t_center + x);
  }
  return acc / wsum;
}

PulseSampleStream sample_pulse_stream(const FieldTrace& source, double tau_s,
                                      std::uint64_t n_pulses, const DetectorParams& params,
                                      std::uint64_t seed, const StreamId& noise_id) {
  params.validate();
  if (n_pulses == 0) throw NumericalError("sample_pulse_stream: need n_pulses >= 1");

  PulseSampleStream out;
  out.tau_s = tau_s;
  out.detector = params;
  out.seed = seed;
  out.stream_label = noise_id.module;
  out.x.resize(n_pulses);
  out.y.resize(n_pulses);

  auto sampler = source.make_pulse_sampler(params.f_rep_hz, tau_s, params.probe_sigma_s());
  const bool noisy = params.nef_vpm > 0.0;
  RandomStream noise = derive_stream(seed, noise_id);

  for (std::uint64_t i = 0; i < n_pulses; ++i) {
    double nx = 0.0, ny = 0.0;
    if (noisy) {
      auto [a, b] = noise.normal_pair();
      nx = params.nef_vpm * a;
      ny = params.nef_vpm * b;
    }
    if (modulation_state(i, params)) {
      auto [sx, sy] = sampler->sample(i);
      out.x[i] = sx + nx;
      out.y[i] = sy + ny;
    } else {
      // Modulation gates the source (THz beam blocked); detectors keep running.
      out.x[i] = nx;
      out.y[i] = ny;
    }
  }
  return out;
}

PairedSamples to_paired(const PulseSampleStream& s) {
  PairedSamples out;
  out.tau_s = s.tau_s;
  out.nef_vpm = s.detector.nef_vpm;
  out.pulses.resize(s.n_pulses());
  const std::uint64_t period = s.detector.mod_period_pulses;
  for (std::uint64_t i = 0; i < s.n_pulses(); ++i)
    out.pulses[i] = {s.x[i], s.y[i], i / period, s.on(i)};
  return out;
}

PairedSamples pair_with_offset(const PulseSampleStream& s, std::int64_t n_offset) {
  const std::int64_t n = static_cast<std::int64_t>(s.n_pulses());
  if (n_offset <= -n || n_offset >= n)
    throw NumericalError("pair_with_offset: |n_offset| must be < n_pulses");

  PairedSamples out;
  out.tau_s = s.tau_s + static_cast<double>(n_offset) / s.detector.f_rep_hz;
  out.nef_vpm = s.detector.nef_vpm;
  const std::uint64_t period = s.detector.mod_period_pulses;
  const std::int64_t lo = std::max<std::int64_t>(0, -n_offset);
  const std::int64_t hi = std::min<std::int64_t>(n, n - n_offset);
  for (std::int64_t i = lo; i < hi; ++i) {
    const auto ui = static_cast<std::uint64_t>(i);
    const auto uj = static_cast<std::uint64_t>(i + n_offset);
    if (s.on(ui) != s.on(uj)) continue;  // mixed ON/OFF pair, discard
    out.pulses.push_back({s.x[ui], s.y[uj], ui / period, s.on(ui)});
  }
  if (out.pulses.empty())
    throw NumericalError("pair_with_offset: all pairs mix ON and OFF classes");
  return out;
}

}  // namespace eoscorr
