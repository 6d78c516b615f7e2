#include "eoscorr/correlator.hpp"

#include <cmath>
#include <functional>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>

#include "eoscorr/errors.hpp"
#include "eoscorr/parallel.hpp"

namespace eoscorr {

namespace {
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
}

void MomentSums::merge(const MomentSums& o) {
  count += o.count;
  sx.merge(o.sx);
  sy.merge(o.sy);
  sxy.merge(o.sxy);
  sxx.merge(o.sxx);
  syy.merge(o.syy);
  sxxyy.merge(o.sxxyy);
  sx4.merge(o.sx4);
  sy4.merge(o.sy4);
}

void SufficientStats::add(std::uint64_t block, bool on, double x, double y) {
  if (cursor_ == nullptr || block != cursor_key_) {
    cursor_ = &blocks_[block];
    cursor_key_ = block;
  }
  (on ? cursor_->on : cursor_->off).add(x, y);
}

void SufficientStats::merge(const SufficientStats& o) {
  for (const auto& [key, sums] : o.blocks_) blocks_[key].merge(sums);
  cursor_ = nullptr;
  cursor_key_ = ~0ULL;
}

MomentSums SufficientStats::totals_on() const {
  MomentSums t;
  for (const auto& [key, sums] : blocks_) t.merge(sums.on);
  return t;
}

MomentSums SufficientStats::totals_off() const {
  MomentSums t;
  for (const auto& [key, sums] : blocks_) t.merge(sums.off);
  return t;
}

std::uint64_t SufficientStats::total_pulses() const {
  std::uint64_t n = 0;
  for (const auto& [key, sums] : blocks_) n += sums.on.count + sums.off.count;
  return n;
}

SufficientStats accumulate(const PulseSampleStream& s) {
  if (s.n_pulses() == 0) throw NumericalError("accumulate: empty stream");
  SufficientStats stats;
  const std::uint64_t period = s.detector.mod_period_pulses;
  const std::uint64_t duty = s.detector.duty_on_pulses;
  const std::uint64_t n = s.n_pulses();
  const double* x = s.x.data();
  const double* y = s.y.data();
  std::uint64_t i = 0;
  std::uint64_t block = 0;
  while (i < n) {
    // handle one modulation period at a time; keeps the hot loop branch-light
    const std::uint64_t base = block * period;
    const std::uint64_t on_end = std::min(n, base + duty);
    const std::uint64_t period_end = std::min(n, base + period);
    for (; i < on_end; ++i) stats.add(block, true, x[i], y[i]);
    for (; i < period_end; ++i) stats.add(block, false, x[i], y[i]);
    ++block;
  }
  return stats;
}

SufficientStats accumulate(const PairedSamples& samples) {
  if (samples.pulses.empty()) throw NumericalError("accumulate: empty stream");
  SufficientStats stats;
  for (const auto& p : samples.pulses) stats.add(p.block, p.on, p.x, p.y);
  return stats;
}

namespace {

// Removing one block from merged totals. Plain subtraction of the compensated
// values is accurate to ~1e-16 relative here, far below jackknife resolution.
void subtract_one(CompensatedSum& a, const CompensatedSum& b) {
  a = CompensatedSum{a.value() - b.value(), 0.0};
}

void subtract(MomentSums& a, const MomentSums& b) {
  a.count -= b.count;
  subtract_one(a.sx, b.sx);
  subtract_one(a.sy, b.sy);
  subtract_one(a.sxy, b.sxy);
  subtract_one(a.sxx, b.sxx);
  subtract_one(a.syy, b.syy);
  subtract_one(a.sxxyy, b.sxxyy);
  subtract_one(a.sx4, b.sx4);
  subtract_one(a.sy4, b.sy4);
}

struct Corrected {
  double c_xy, v_x, v_y, q, q_unc;
};

struct RawMeans {
  double n_on = 0, n_off = 0;
  double xy_on = 0, xx_on = 0, yy_on = 0, xxyy_on = 0;
  double xy_off = 0, xx_off = 0, yy_off = 0, xxyy_off = 0;
};

RawMeans means_of(const MomentSums& on, const MomentSums& off) {
  RawMeans m;
  m.n_on = static_cast<double>(on.count);
  m.n_off = static_cast<double>(off.count);
  if (on.count > 0) {
    m.xy_on = on.sxy.value() / m.n_on;
    m.xx_on = on.sxx.value() / m.n_on;
    m.yy_on = on.syy.value() / m.n_on;
    m.xxyy_on = on.sxxyy.value() / m.n_on;
  }
  // A stream with no OFF pulses is treated as noise-free: OFF moments vanish.
  if (off.count > 0) {
    m.xy_off = off.sxy.value() / m.n_off;
    m.xx_off = off.sxx.value() / m.n_off;
    m.yy_off = off.syy.value() / m.n_off;
    m.xxyy_off = off.sxxyy.value() / m.n_off;
  }
  return m;
}

Corrected corrected_of(const RawMeans& m) {
  Corrected c;
  c.c_xy = m.xy_on - m.xy_off;
  c.v_x = m.xx_on - m.xx_off;
  c.v_y = m.yy_on - m.yy_off;
  // With independent zero-mean channel noise,
  // <(E+n)^2 (E'+n')^2> = <E^2 E'^2> + s^2 <E'^2> + s'^2 <E^2> + <n^2 n'^2>,
  // and the OFF class measures the pure-noise moments.
  c.q = m.xxyy_on - m.xx_off * c.v_y - m.yy_off * c.v_x - m.xxyy_off;
  c.q_unc = m.xxyy_on;
  return c;
}

enum class Kind { kG1, kG2, kG2Uncorrected };

double point_estimate(const RawMeans& m, Kind kind, double floor) {
  const Corrected c = corrected_of(m);
  if (m.n_on <= 0) throw InsufficientSignal("estimator: no ON pulses");
  if (!(c.v_x > floor) || !(c.v_y > floor))
    throw InsufficientSignal("estimator: corrected variance at or below the floor (insufficient signal)");
  switch (kind) {
    case Kind::kG1: return c.c_xy / std::sqrt(c.v_x * c.v_y);
    case Kind::kG2: return c.q / (c.v_x * c.v_y);
    case Kind::kG2Uncorrected: return c.q_unc / (c.v_x * c.v_y);
  }
  return kNan;
}

Estimate estimate(const SufficientStats& stats, Kind kind, double floor) {
  const RawMeans total = means_of(stats.totals_on(), stats.totals_off());
  Estimate est;
  est.value = point_estimate(total, kind, floor);
  est.n_blocks = stats.blocks().size();

  // Delete-one-block jackknife over modulation periods.
  if (est.n_blocks < 2) {
    est.err = kNan;
    return est;
  }
  std::vector<double> loo;
  loo.reserve(est.n_blocks);
  const MomentSums ton = stats.totals_on();
  const MomentSums toff = stats.totals_off();
  for (const auto& [key, b] : stats.blocks()) {
    MomentSums on = ton, off = toff;
    subtract(on, b.on);
    subtract(off, b.off);
    try {
      loo.push_back(point_estimate(means_of(on, off), kind, floor));
    } catch (const InsufficientSignal&) {
      // A block whose removal degenerates the estimator carries no usable
      // leave-one-out value; skip it.
    }
  }
  if (loo.size() < 2) {
    est.err = kNan;
    return est;
  }
  double mean = 0.0;
  for (double v : loo) mean += v;
  mean /= static_cast<double>(loo.size());
  double ss = 0.0;
  for (double v : loo) ss += (v - mean) * (v - mean);
  const double b = static_cast<double>(loo.size());
  est.err = std::sqrt((b - 1.0) / b * ss);
  return est;
}

}  // namespace

Estimate estimate_g1(const SufficientStats& stats, double floor) {
  return estimate(stats, Kind::kG1, floor);
}

Estimate estimate_g2(const SufficientStats& stats, double floor) {
  return estimate(stats, Kind::kG2, floor);
}

Estimate estimate_g2_uncorrected(const SufficientStats& stats, double floor) {
  return estimate(stats, Kind::kG2Uncorrected, floor);
}

EnvelopeResult few_cycle_envelope(const std::vector<double>& taus,
                                  const std::vector<double>& values,
                                  const std::vector<double>& errors,
                                  double nu0_hz, double n_cycles) {
  const std::size_t n = taus.size();
  if (n < 2 || values.size() != n)
    throw NumericalError("few_cycle_envelope: need >= 2 points and matching arrays");
  const double step = taus[1] - taus[0];
  for (std::size_t i = 1; i < n; ++i)
    if (std::abs((taus[i] - taus[i - 1]) - step) > 1e-6 * std::abs(step))
      throw NumericalError("few_cycle_envelope: non-uniform tau grid");
  if (!(step > 0.0) || step >= 1.0 / (4.0 * nu0_hz))
    throw NumericalError("few_cycle_envelope: tau grid too coarse to resolve the 2*nu0 oscillation");

  const double fwhm = n_cycles / nu0_hz;
  const double sigma = fwhm / 2.354820045030949;
  const int half = static_cast<int>(std::ceil(5.0 * sigma / step));

  EnvelopeResult out;
  out.value.resize(n);
  out.err.resize(n);
  const bool have_err = errors.size() == n;
  for (std::size_t i = 0; i < n; ++i) {
    double wsum = 0.0, acc = 0.0, var = 0.0;
    const int lo = std::max<int>(0, static_cast<int>(i) - half);
    const int hi = std::min<int>(static_cast<int>(n) - 1, static_cast<int>(i) + half);
    for (int j = lo; j <= hi; ++j) {
      const double d = (taus[j] - taus[i]) / sigma;
      const double w = std::exp(-0.5 * d * d);
      wsum += w;
      acc += w * values[j];
      if (have_err) var += w * w * errors[j] * errors[j];
    }
    out.value[i] = acc / wsum;  // edge correction: renormalize by in-range weight
    out.err[i] = have_err ? std::sqrt(var) / wsum : kNan;
  }
  return out;
}

CorrelationTrace correlation_scan(const FieldTrace& source, const std::vector<double>& taus,
                                  std::uint64_t n_pulses_per_tau, const DetectorParams& det,
                                  std::uint64_t master_seed, const ScanOptions& opt) {
  if (taus.size() < 2) throw NumericalError("correlation_scan: need >= 2 tau points");
  const double step = taus[1] - taus[0];
  for (std::size_t i = 1; i < taus.size(); ++i)
    if (std::abs((taus[i] - taus[i - 1]) - step) > 1e-6 * std::abs(step))
      throw NumericalError("correlation_scan: non-uniform tau grid");
  if (opt.enforce_tau_range)
    for (double t : taus)
      if (std::abs(t) > 140e-12)
        throw NumericalError("correlation_scan: |tau| > 140 ps needs asynchronous-pulse pairing");

  CorrelationTrace trace;
  trace.taus_s = taus;
  trace.g1.resize(taus.size());
  trace.g2_raw.resize(taus.size());
  trace.n_pulses_per_tau = n_pulses_per_tau;
  trace.nef_vpm = det.nef_vpm;
  trace.nu0_hz = source.descriptor().nu0_hz;

  const double floor = opt.variance_floor_eps * det.nef_vpm * det.nef_vpm;
  parallel_for(taus.size(), opt.threads, [&](std::size_t k) {
    const auto stream = sample_pulse_stream(source, taus[k], n_pulses_per_tau, det,
                                            master_seed, StreamId{"scan/noise", 0, k, 0});
    if (opt.stream_sink) opt.stream_sink(stream, k);
    const auto stats = accumulate(stream);
    trace.g1[k] = estimate_g1(stats, floor);
    trace.g2_raw[k] = estimate_g2(stats, floor);
  });

  std::vector<double> g2v(taus.size()), g2e(taus.size());
  for (std::size_t k = 0; k < taus.size(); ++k) {
    g2v[k] = trace.g2_raw[k].value;
    g2e[k] = trace.g2_raw[k].err;
  }
  const auto env = few_cycle_envelope(taus, g2v, g2e, trace.nu0_hz, opt.envelope_cycles);
  trace.g2_env = env.value;
  trace.g2_env_err = env.err;
  return trace;
}

void write_correlation_csv(std::ostream& os, const CorrelationTrace& t,
                           const std::vector<std::string>& header_comments) {
  for (const auto& line : header_comments) os << "# " << line << "\n";
  os << "# n_pulses_per_tau = " << t.n_pulses_per_tau << ", nef_v_per_m = " << t.nef_vpm
     << ", nu0_hz = " << t.nu0_hz << "\n";
  os << "tau_fs,g1,g1_err,g2_raw,g2_raw_err,g2_env,g2_env_err\n";
  char buf[256];
  for (std::size_t k = 0; k < t.taus_s.size(); ++k) {
    std::snprintf(buf, sizeof(buf), "%.9g,%.12g,%.6g,%.12g,%.6g,%.12g,%.6g\n",
                  t.taus_s[k] * 1e15, t.g1[k].value, t.g1[k].err, t.g2_raw[k].value,
                  t.g2_raw[k].err, t.g2_env[k], t.g2_env_err[k]);
    os << buf;
  }
}

}  // namespace eoscorr
