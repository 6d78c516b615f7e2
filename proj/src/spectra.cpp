#include "eoscorr/spectra.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>
#include <ostream>

#include "eoscorr/errors.hpp"

namespace eoscorr {

Spectrum correlation_spectrum(const std::vector<double>& taus,
                              const std::vector<double>& values,
                              SpectrumWindow window, bool remove_mean) {
  const std::size_t n = taus.size();
  if (n < 16 || values.size() != n)
    throw NumericalError("spectrum: need >= 16 uniformly spaced points");
  const double step = taus[1] - taus[0];
  if (!(step > 0.0)) throw NumericalError("spectrum: tau grid must be increasing");
  for (std::size_t i = 1; i < n; ++i)
    if (std::abs((taus[i] - taus[i - 1]) - step) > 1e-6 * step)
      throw NumericalError("spectrum: non-uniform tau grid rejected");

  std::vector<double> x = values;
  if (remove_mean) {
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    for (double& v : x) v -= mean;
  }
  if (window == SpectrumWindow::kHann) {
    for (std::size_t i = 0; i < n; ++i)
      x[i] *= 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                    static_cast<double>(n - 1)));
  }

  // Direct DFT; traces are at most a few hundred points.
  Spectrum out;
  out.window = window;
  const std::size_t n_half = n / 2;
  out.freq_hz.resize(n_half + 1);
  out.magnitude.resize(n_half + 1);
  for (std::size_t k = 0; k <= n_half; ++k) {
    std::complex<double> acc = 0.0;
    const double w = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j)
      acc += x[j] * std::complex<double>(std::cos(w * static_cast<double>(j)),
                                         std::sin(w * static_cast<double>(j)));
    out.freq_hz[k] = static_cast<double>(k) / (static_cast<double>(n) * step);
    out.magnitude[k] = std::abs(acc);
  }
  return out;
}

double peak_frequency(const Spectrum& spec, double f_lo_hz, double f_hi_hz) {
  if (spec.freq_hz.empty() || f_lo_hz > f_hi_hz || f_hi_hz < spec.freq_hz.front() ||
      f_lo_hz > spec.freq_hz.back())
    throw NumericalError("peak_frequency: empty band");
  std::size_t best = spec.freq_hz.size();
  double best_mag = -1.0;
  for (std::size_t k = 0; k < spec.freq_hz.size(); ++k) {
    if (spec.freq_hz[k] < f_lo_hz || spec.freq_hz[k] > f_hi_hz) continue;
    if (spec.magnitude[k] > best_mag) {
      best_mag = spec.magnitude[k];
      best = k;
    }
  }
  if (best == spec.freq_hz.size()) throw NumericalError("peak_frequency: empty band");

  // Parabolic refinement over the three bins around the maximum.
  if (best == 0 || best + 1 >= spec.magnitude.size()) return spec.freq_hz[best];
  const double ym = spec.magnitude[best - 1];
  const double y0 = spec.magnitude[best];
  const double yp = spec.magnitude[best + 1];
  const double denom = ym - 2.0 * y0 + yp;
  double delta = 0.0;
  if (std::abs(denom) > 1e-300) delta = 0.5 * (ym - yp) / denom;
  if (delta > 0.5) delta = 0.5;
  if (delta < -0.5) delta = -0.5;
  const double bin = spec.freq_hz[1] - spec.freq_hz[0];
  return spec.freq_hz[best] + delta * bin;
}

void write_spectrum_csv(std::ostream& os, const Spectrum& spec,
                        const std::vector<std::string>& header_comments) {
  for (const auto& line : header_comments) os << "# " << line << "\n";
  os << "freq_THz,magnitude\n";
  char buf[96];
  for (std::size_t k = 0; k < spec.freq_hz.size(); ++k) {
    std::snprintf(buf, sizeof(buf), "%.9g,%.12g\n", spec.freq_hz[k] * 1e-12,
                  spec.magnitude[k]);
    os << buf;
  }
}

}  // namespace eoscorr
