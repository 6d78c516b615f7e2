#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <utility>

namespace eoscorr {

// Amplitude transmission of the Gaussian probe window (std sigma, unit area)
// for a tone at frequency nu: the Fourier transform exp(-2 (pi nu sigma)^2).
inline double gaussian_filter_gain(double nu_hz, double sigma_s) {
  const double x = std::numbers::pi * nu_hz * sigma_s;
  return std::exp(-2.0 * x * x);
}

class PulseSampler;

// A deterministic continuous-time electric field E(t) in V/m. Sources derive
// any per-block randomness from (seed, block index), so repeated evaluation at
// the same t always returns the identical value and instances are safe to
// share across threads.
class FieldTrace {
 public:
  struct Descriptor {
    double nu0_hz = 0.0;             // center frequency
    double nominal_amplitude_vpm = 0.0;
  };

  virtual ~FieldTrace() = default;

  virtual double eval(double t) const = 0;

  // Field seen through a unit-area Gaussian window of std sigma centered at t.
  // Base implementation integrates eval() numerically (step sigma/8, +-4
  // sigma); sources override with their analytic transform where available.
  virtual double filtered(double t, double sigma) const;

  // Incremental per-pulse sampler for uniformly spaced probe pairs
  // (t_i, t_i + tau), t_i = i / f_rep. The returned object is single-threaded
  // and must be queried with strictly increasing pulse indices.
  virtual std::unique_ptr<PulseSampler> make_pulse_sampler(double f_rep_hz,
                                                           double tau_s,
                                                           double sigma_s) const;

  double t_start() const { return t_start_; }
  double t_end() const { return t_end_; }
  const Descriptor& descriptor() const { return descriptor_; }

 protected:
  FieldTrace(double t_start, double t_end, Descriptor d)
      : t_start_(t_start), t_end_(t_end), descriptor_(d) {}

  double t_start_ = -std::numeric_limits<double>::infinity();
  double t_end_ = std::numeric_limits<double>::infinity();
  Descriptor descriptor_{};
};

class PulseSampler {
 public:
  virtual ~PulseSampler() = default;
  // Filtered field at the two probe instants of pulse i.
  virtual std::pair<double, double> sample(std::uint64_t pulse_index) = 0;
};

}  // namespace eoscorr
