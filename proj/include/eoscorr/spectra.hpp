#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace eoscorr {

enum class SpectrumWindow { kNone, kHann };

// One-sided magnitude spectrum of a uniformly sampled correlation trace,
// bins k / (N * dtau) for k = 0 .. floor(N/2).
struct Spectrum {
  std::vector<double> freq_hz;
  std::vector<double> magnitude;
  SpectrumWindow window = SpectrumWindow::kNone;
};

// Magnitude DFT of the (optionally Hann-windowed, optionally de-meaned)
// trace. g2 traces are de-meaned before transforming so the DC term does not
// bury the 2*nu0 component; g1 traces are transformed as-is. Rejects
// non-uniform grids and traces shorter than 16 points.
Spectrum correlation_spectrum(const std::vector<double>& taus_s,
                              const std::vector<double>& values,
                              SpectrumWindow window = SpectrumWindow::kHann,
                              bool remove_mean = false);

// Frequency of the largest magnitude inside [f_lo, f_hi], refined by a
// parabolic fit through the three bins around the maximum.
double peak_frequency(const Spectrum& spec, double f_lo_hz, double f_hi_hz);

// CSV: freq_THz, magnitude.
void write_spectrum_csv(std::ostream& os, const Spectrum& spec,
                        const std::vector<std::string>& header_comments);

}  // namespace eoscorr
