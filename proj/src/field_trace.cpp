#include "eoscorr/field_trace.hpp"

#include <vector>

namespace eoscorr {

namespace {

// Wraps filtered() for sources without an incremental fast path.
class GenericPulseSampler final : public PulseSampler {
 public:
  GenericPulseSampler(const FieldTrace& trace, double f_rep_hz, double tau_s,
                      double sigma_s)
      : trace_(trace), dt_rep_(1.0 / f_rep_hz), tau_(tau_s), sigma_(sigma_s) {}

  std::pair<double, double> sample(std::uint64_t i) override {
    const double t = static_cast<double>(i) * dt_rep_;
    return {trace_.filtered(t, sigma_), trace_.filtered(t + tau_, sigma_)};
  }

 private:
  const FieldTrace& trace_;
  double dt_rep_, tau_, sigma_;
};

}  // namespace

double FieldTrace::filtered(double t, double sigma) const {
  // Midpoint quadrature of the unit-area Gaussian window, step sigma/8 over
  // +-4 sigma; weights normalized so a constant field passes unchanged.
  constexpr int kHalf = 32;  // 4 sigma / (sigma/8)
  const double h = sigma / 8.0;
  double wsum = 0.0, acc = 0.0;
  for (int j = -kHalf; j <= kHalf; ++j) {
    const double x = static_cast<double>(j) * h;
    const double w = std::exp(-0.5 * x * x / (sigma * sigma));
    wsum += w;
    acc += w * eval(t + x);
  }
  return acc / wsum;
}

std::unique_ptr<PulseSampler> FieldTrace::make_pulse_sampler(double f_rep_hz,
                                                             double tau_s,
                                                             double sigma_s) const {
  return std::make_unique<GenericPulseSampler>(*this, f_rep_hz, tau_s, sigma_s);
}

}  // namespace eoscorr
