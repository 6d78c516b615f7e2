#include "eoscorr/mb_laser.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

#include "eoscorr/errors.hpp"
#include "eoscorr/parallel.hpp"

namespace eoscorr::mb {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kAmplitudeCap = 1e3;  // E_sat units; beyond this the integrator blew up
}  // namespace

void MBParams::validate() const {
  if (tau_coh_s <= 0 || tau_up_s <= 0 || tau_photon_s <= 0 || t_roundtrip_s <= 0)
    throw ConfigError("mb: all characteristic times must be positive");
  if (n_modes < 1 || n_modes % 2 == 0)
    throw ConfigError("mb: n_modes must be odd and >= 1");
  if (sp_ratio <= 0) throw ConfigError("mb: sp_ratio must be positive");
  if (nu0_hz <= 0) throw ConfigError("mb: nu0 must be positive");
  if (gain_per_s < 0) throw ConfigError("mb: gain must be >= 0");
  if (xsat_overlap < 0 || xsat_overlap > 1)
    throw ConfigError("mb: xsat_overlap must be in [0, 1]");
}

double lorentzian_gain(double gain_per_s, double nu_m_hz, const MBParams& p) {
  const double x = kTwoPi * (nu_m_hz - p.nu0_hz) * p.tau_coh_s;
  return gain_per_s / (1.0 + x * x);
}

double gvd_detuning(int m, const MBParams& p) {
  const double gdd_rt = p.gvd_s2_per_m * p.dispersive_length_per_rt_m;
  const double f = static_cast<double>(m) * p.fsr_hz();
  return -gdd_rt * std::numbers::pi * f * f / p.t_roundtrip_s;
}

double mode_frequency(int m, const MBParams& p) {
  return p.nu0_hz + static_cast<double>(m) * p.fsr_hz() + gvd_detuning(m, p);
}

void ModalTrajectory::push_back(const std::vector<std::complex<double>>& a) {
  data_.insert(data_.end(), a.begin(), a.end());
}

ModalState ModalTrajectory::state_at(std::size_t k) const {
  ModalState s;
  s.t = time_at(k);
  s.a.assign(data_.begin() + static_cast<std::ptrdiff_t>(k * params_.n_modes),
             data_.begin() + static_cast<std::ptrdiff_t>((k + 1) * params_.n_modes));
  return s;
}

Stepper::Stepper(const MBParams& p, double dt_s) : p_(p), dt_(dt_s) {
  p.validate();
  if (!(dt_s > 0.0) || dt_s > p.t_roundtrip_s)
    throw NumericalError("mb: need 0 < dt <= t_roundtrip");
  const int n = p.n_modes;
  const int mmax = p.max_mode();
  const double kappa = p.kappa_per_s();

  gain_.resize(n);
  lin_.resize(n);
  std::vector<double> nu(n);
  for (int i = 0; i < n; ++i) {
    const int m = i - mmax;
    nu[i] = mode_frequency(m, p);
    gain_[i] = lorentzian_gain(p.gain_per_s, nu[i], p);
    const std::complex<double> mu(0.5 * (gain_[i] - kappa), kTwoPi * gvd_detuning(m, p));
    lin_[i] = std::exp(mu * dt_s);
  }

  beta_.resize(static_cast<std::size_t>(n) * n);
  for (int ip = 0; ip < n; ++ip)
    for (int iq = 0; iq < n; ++iq)
      beta_[static_cast<std::size_t>(ip) * n + iq] =
          1.0 / std::complex<double>(1.0, kTwoPi * (nu[ip] - nu[iq]) * p.tau_up_s);

  // <F_m F_n*> = 2 D delta_mn delta(t - t'), D = kappa sp^2 / 2: the empty
  // cavity relaxes to <|a_m|^2> = sp^2, one photon-equivalent per mode.
  const double diffusion = kappa * p.sp_ratio * p.sp_ratio / 2.0;
  noise_amp_ = std::sqrt(diffusion * dt_s);

  pulse_.resize(2 * n - 1);
  sat_.resize(n);
}

void Stepper::step(ModalState& state, RandomStream* noise) const {
  const int n = p_.n_modes;
  auto& a = state.a;
  if (static_cast<int>(a.size()) != n)
    throw NumericalError("mb: state size does not match n_modes");

  // Population response P_s at beat index s = p - q, then the saturation term
  // C_m = sum_s P_s a_{m-s}: O(n^2) instead of the naive triple sum.
  for (int s = -(n - 1); s <= n - 1; ++s) {
    std::complex<double> acc = 0.0;
    const int qlo = std::max(0, -s);
    const int qhi = std::min(n, n - s);
    for (int q = qlo; q < qhi; ++q)
      acc += beta_[static_cast<std::size_t>(q + s) * n + q] * a[q + s] * std::conj(a[q]);
    pulse_[s + n - 1] = acc;
  }
  for (int m = 0; m < n; ++m) {
    std::complex<double> acc = 0.0;
    for (int s = m - n + 1; s <= m; ++s) acc += pulse_[s + n - 1] * a[m - s];
    sat_[m] = acc;
  }

  const double w = p_.xsat_overlap;
  for (int m = 0; m < n; ++m) {
    // Non-degenerate pathways carry the spatial overlap weight; the pure self
    // term |a_m|^2 a_m keeps weight 1.
    const std::complex<double> cw = w * sat_[m] + (1.0 - w) * std::norm(a[m]) * a[m];
    std::complex<double> next = a[m] * lin_[m] - dt_ * 0.5 * gain_[m] * cw;
    if (noise != nullptr) {
      const auto [n1, n2] = noise->normal_pair();
      next += noise_amp_ * std::complex<double>(n1, n2);
    }
    a[m] = next;
    if (!std::isfinite(next.real()) || !std::isfinite(next.imag()))
      throw NumericalError("mb: NaN in modal amplitudes at t = " + std::to_string(state.t));
    if (std::norm(next) > kAmplitudeCap * kAmplitudeCap)
      throw NumericalError("mb: amplitude blow-up (|a| > 1e3 E_sat) at t = " +
                           std::to_string(state.t) + ", mode index " + std::to_string(m));
  }
  state.t += dt_;
}

ModalState step_modes(const ModalState& state, double dt_s, const MBParams& p,
                      RandomStream& noise) {
  Stepper stepper(p, dt_s);
  ModalState next = state;
  stepper.step(next, &noise);
  return next;
}

ModalTrajectory simulate(const MBParams& p, double duration_s, double transient_s,
                         double record_dt_s, std::uint64_t seed, const SimulateOptions& opt) {
  p.validate();
  if (!(duration_s > transient_s) || transient_s < 0)
    throw NumericalError("mb: need duration > transient >= 0");
  if (!(record_dt_s > 0)) throw NumericalError("mb: record_dt must be positive");

  // Internal dt shrunk to divide the record grid exactly.
  const int per_record = std::max(1, static_cast<int>(std::ceil(record_dt_s / opt.dt_s - 1e-9)));
  const double dt = record_dt_s / per_record;
  Stepper stepper(p, dt);

  ModalState state;
  if (opt.initial != nullptr)
    state = *opt.initial;
  else
    state.a.assign(p.n_modes, {0.0, 0.0});
  state.t = 0.0;

  const auto n_steps = static_cast<std::uint64_t>(std::llround(duration_s / dt));
  const auto n_trans = static_cast<std::uint64_t>(std::llround(transient_s / dt));

  ModalTrajectory traj(p, transient_s, dt * per_record, seed);
  RandomStream noise = derive_stream(seed, StreamId{"mb/noise", 0, 0, 0});
  RandomStream* noise_ptr = opt.noise ? &noise : nullptr;

  for (std::uint64_t i = 0; i <= n_steps; ++i) {
    if (i >= n_trans && (i - n_trans) % static_cast<std::uint64_t>(per_record) == 0)
      traj.push_back(state.a);
    if (i < n_steps) stepper.step(state, noise_ptr);
  }
  if (traj.n_records() < 2) throw NumericalError("mb: trajectory too short");
  return traj;
}

double g2_modal(const ModalTrajectory& traj) {
  const double span = traj.t_end() - traj.t_begin();
  if (span < 100.0 * traj.params().tau_photon_s)
    throw NumericalError("mb: g2_modal needs a trajectory longer than 100 photon lifetimes");
  double s1 = 0.0, s2 = 0.0;
  const std::size_t n = traj.n_records();
  const int mmax = traj.params().max_mode();
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> sum = 0.0;
    for (int m = -mmax; m <= mmax; ++m) sum += traj.amplitude(k, m);
    const double intensity = std::norm(sum);
    s1 += intensity;
    s2 += intensity * intensity;
  }
  const double mean = s1 / static_cast<double>(n);
  if (!(mean > 0.0)) throw NumericalError("mb: g2_modal has no field (all modes empty)");
  return (s2 / static_cast<double>(n)) / (mean * mean);
}

G2Stats g2_modal_stats(const ModalTrajectory& traj, std::size_t n_blocks) {
  const std::size_t n = traj.n_records();
  n_blocks = std::min(n_blocks, n);
  const int mmax = traj.params().max_mode();
  std::vector<double> b1(n_blocks, 0.0), b2(n_blocks, 0.0), bn(n_blocks, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> sum = 0.0;
    for (int m = -mmax; m <= mmax; ++m) sum += traj.amplitude(k, m);
    const double intensity = std::norm(sum);
    const std::size_t b = std::min(n_blocks - 1, k * n_blocks / n);
    b1[b] += intensity;
    b2[b] += intensity * intensity;
    bn[b] += 1.0;
  }
  double t1 = 0.0, t2 = 0.0, tn = 0.0;
  for (std::size_t b = 0; b < n_blocks; ++b) t1 += b1[b], t2 += b2[b], tn += bn[b];
  if (!(t1 > 0.0)) throw NumericalError("mb: g2_modal has no field (all modes empty)");
  const double g2 = (t2 / tn) / ((t1 / tn) * (t1 / tn));

  std::vector<double> loo;
  loo.reserve(n_blocks);
  for (std::size_t b = 0; b < n_blocks; ++b) {
    const double m1 = (t1 - b1[b]) / (tn - bn[b]);
    const double m2 = (t2 - b2[b]) / (tn - bn[b]);
    if (m1 > 0.0) loo.push_back(m2 / (m1 * m1));
  }
  double mean = 0.0;
  for (double v : loo) mean += v;
  mean /= static_cast<double>(loo.size());
  double ss = 0.0;
  for (double v : loo) ss += (v - mean) * (v - mean);
  const double nb = static_cast<double>(loo.size());
  return {g2, std::sqrt((nb - 1.0) / nb * ss)};
}

std::vector<LiPoint> li_sweep(const MBParams& base, const std::vector<double>& gains,
                              std::uint64_t seed, double duration_s, double transient_s,
                              double record_dt_s, int threads) {
  for (std::size_t i = 1; i < gains.size(); ++i)
    if (gains[i] < gains[i - 1]) throw NumericalError("li_sweep: gains must be sorted ascending");

  std::vector<LiPoint> out(gains.size());
  parallel_for(gains.size(), threads, [&](std::size_t k) {
    MBParams p = base;
    p.gain_per_s = gains[k];
    const std::uint64_t sub_seed = derive_stream(seed, StreamId{"li/point", k, 0, 0}).next_u64();
    const auto traj = simulate(p, duration_s, transient_s, record_dt_s, sub_seed);
    double power = 0.0;
    const int mmax = p.max_mode();
    for (std::size_t r = 0; r < traj.n_records(); ++r)
      for (int m = -mmax; m <= mmax; ++m) power += std::norm(traj.amplitude(r, m));
    power /= static_cast<double>(traj.n_records());
    out[k] = {gains[k], power, g2_modal(traj)};
  });
  return out;
}

double map_gain_to_current(double gain_per_s, double i_threshold_ma, double g_threshold_per_s) {
  if (!(g_threshold_per_s > 0)) throw NumericalError("map_gain_to_current: G_th must be positive");
  return i_threshold_ma * gain_per_s / g_threshold_per_s;
}

namespace {

class TrajectoryTrace final : public FieldTrace {
 public:
  TrajectoryTrace(std::shared_ptr<const ModalTrajectory> traj, double scale)
      : FieldTrace(traj->t_begin(), traj->t_end(),
                   Descriptor{traj->params().nu0_hz, scale}),
        traj_(std::move(traj)),
        scale_(scale) {
    const auto& p = traj_->params();
    const int mmax = p.max_mode();
    for (int m = -mmax; m <= mmax; ++m) {
      carrier_hz_.push_back(p.nu0_hz + m * p.fsr_hz());
      pulled_hz_.push_back(mode_frequency(m, p));
    }
  }

  double eval(double t) const override { return field(t, nullptr); }

  double filtered(double t, double sigma) const override { return field(t, &sigma); }

 private:
  double field(double t, const double* sigma) const {
    const double rel = (t - traj_->t_begin()) / traj_->record_dt();
    const auto n = traj_->n_records();
    if (rel < 0.0 || rel > static_cast<double>(n - 1) + 1e-9)
      throw NumericalError("reconstructed field: t outside trajectory span");
    std::size_t k = std::min(static_cast<std::size_t>(rel), n - 2);
    const double alpha = rel - static_cast<double>(k);
    const auto& p = traj_->params();
    const int mmax = p.max_mode();
    double e = 0.0;
    for (int m = -mmax; m <= mmax; ++m) {
      const std::complex<double> a =
          (1.0 - alpha) * traj_->amplitude(k, m) + alpha * traj_->amplitude(k + 1, m);
      const std::size_t idx = static_cast<std::size_t>(m + mmax);
      const double phase = kTwoPi * carrier_hz_[idx] * t;
      const double gain = sigma ? gaussian_filter_gain(pulled_hz_[idx], *sigma) : 1.0;
      e += gain * (a.real() * std::cos(phase) - a.imag() * std::sin(phase));
    }
    return scale_ * e;
  }

  std::shared_ptr<const ModalTrajectory> traj_;
  double scale_;
  std::vector<double> carrier_hz_, pulled_hz_;
};

class ErgodicTrace final : public FieldTrace {
 public:
  ErgodicTrace(std::shared_ptr<const ModalTrajectory> traj, double scale, double f_rep_hz,
               double max_abs_tau_s, std::uint64_t seed)
      : FieldTrace(-std::numeric_limits<double>::infinity(),
                   std::numeric_limits<double>::infinity(),
                   Descriptor{traj->params().nu0_hz, scale}),
        inner_(std::move(traj), scale),
        f_rep_hz_(f_rep_hz),
        seed_(seed) {
    const double guard = max_abs_tau_s + 2e-12;
    u_lo_ = inner_.t_start() + guard;
    const double u_hi = inner_.t_end() - guard;
    width_ = u_hi - u_lo_;
    if (!(width_ > 0.0))
      throw NumericalError("ergodic field: trajectory too short for the requested tau range");
  }

  double eval(double t) const override {
    const auto [u, off] = locate(t);
    return inner_.eval(u + off);
  }

  double filtered(double t, double sigma) const override {
    const auto [u, off] = locate(t);
    return inner_.filtered(u + off, sigma);
  }

 private:
  std::pair<double, double> locate(double t) const {
    const auto slot = static_cast<std::int64_t>(std::llround(t * f_rep_hz_));
    const double u = u_lo_ + width_ * unit_hash(seed_, "mb/slot",
                                                static_cast<std::uint64_t>(slot), 0, 0);
    return {u, t - static_cast<double>(slot) / f_rep_hz_};
  }

  TrajectoryTrace inner_;
  double f_rep_hz_;
  std::uint64_t seed_;
  double u_lo_ = 0.0, width_ = 0.0;
};

}  // namespace

std::unique_ptr<FieldTrace> reconstruct_field(std::shared_ptr<const ModalTrajectory> traj,
                                              double field_scale_vpm) {
  return std::make_unique<TrajectoryTrace>(std::move(traj), field_scale_vpm);
}

std::unique_ptr<FieldTrace> ergodic_field(std::shared_ptr<const ModalTrajectory> traj,
                                          double field_scale_vpm, double f_rep_hz,
                                          double max_abs_tau_s, std::uint64_t seed) {
  return std::make_unique<ErgodicTrace>(std::move(traj), field_scale_vpm, f_rep_hz,
                                        max_abs_tau_s, seed);
}

void write_trajectory_csv(std::ostream& os, const ModalTrajectory& traj) {
  const int mmax = traj.params().max_mode();
  os << "# t_s";
  for (int m = -mmax; m <= mmax; ++m) os << ", re_a_" << m << ", im_a_" << m;
  os << "\n";
  char buf[64];
  for (std::size_t k = 0; k < traj.n_records(); ++k) {
    std::snprintf(buf, sizeof(buf), "%.12g", traj.time_at(k));
    os << buf;
    for (int m = -mmax; m <= mmax; ++m) {
      const auto a = traj.amplitude(k, m);
      std::snprintf(buf, sizeof(buf), ",%.17g,%.17g", a.real(), a.imag());
      os << buf;
    }
    os << "\n";
  }
}

}  // namespace eoscorr::mb
