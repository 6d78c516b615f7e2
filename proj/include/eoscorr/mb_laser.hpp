#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <vector>

#include "eoscorr/field_trace.hpp"
#include "eoscorr/random.hpp"

namespace eoscorr::mb {

// Stochastic multimode modal laser model: third-order expansion with
// adiabatically eliminated polarization, population-pulsation cross coupling
// beta_pq = 1 / (1 + i 2 pi (nu_p - nu_q) tau_up), Lorentzian gain, quadratic
// GVD mode pulling, and spontaneous-emission Langevin noise scaled so the
// empty cavity holds one photon-equivalent per mode. Amplitudes are in units
// of the saturation field, so the saturation denominator is 1.
struct MBParams {
  double tau_coh_s = 0.5e-12;     // dephasing time (2.6 meV bandwidth)
  double tau_up_s = 5e-12;        // upper-state lifetime
  double tau_photon_s = 35e-12;   // cavity photon lifetime
  double t_roundtrip_s = 4e-12;   // fixes the 250 GHz mode spacing
  double gvd_s2_per_m = 6.24e-22; // 6.24e5 fs^2/mm
  double dispersive_length_per_rt_m = 2e-3;  // cavity traversed twice per round trip
  double z12_m = 7e-9;            // dipole length
  double sp_ratio = 4e-5;         // single-photon field / saturation field
  double nu0_hz = 2.3e12;
  int n_modes = 7;                // 2M+1, odd
  double gain_per_s = 0.0;        // pump parameter G
  // Spatial overlap weight of all non-degenerate saturation pathways relative
  // to each mode's self-saturation; 2/3 is the standing-wave Fabry-Perot
  // value, 1 turns cross- and self-saturation equal (always single-mode).
  double xsat_overlap = 2.0 / 3.0;

  double fsr_hz() const { return 1.0 / t_roundtrip_s; }
  double kappa_per_s() const { return 1.0 / tau_photon_s; }
  // Threshold of the central mode sitting at the gain peak.
  double threshold_gain_per_s() const { return kappa_per_s(); }
  int max_mode() const { return (n_modes - 1) / 2; }
  void validate() const;
};

struct ModalState {
  std::vector<std::complex<double>> a;  // index 0 <-> mode -M
  double t = 0.0;
};

class ModalTrajectory {
 public:
  ModalTrajectory(MBParams params, double t0, double record_dt, std::uint64_t seed)
      : params_(params), t0_(t0), record_dt_(record_dt), seed_(seed) {}

  void push_back(const std::vector<std::complex<double>>& a);

  std::size_t n_records() const { return data_.size() / params_.n_modes; }
  double time_at(std::size_t k) const { return t0_ + static_cast<double>(k) * record_dt_; }
  double record_dt() const { return record_dt_; }
  double t_begin() const { return t0_; }
  double t_end() const { return time_at(n_records() - 1); }
  std::complex<double> amplitude(std::size_t k, int mode_index) const {
    return data_[k * params_.n_modes + (mode_index + params_.max_mode())];
  }
  ModalState state_at(std::size_t k) const;
  const MBParams& params() const { return params_; }
  std::uint64_t seed() const { return seed_; }

 private:
  MBParams params_;
  double t0_;
  double record_dt_;
  std::uint64_t seed_;
  std::vector<std::complex<double>> data_;
};

// Lorentzian gain profile, HWHM 1/(2 pi tau_coh).
double lorentzian_gain(double gain_per_s, double nu_m_hz, const MBParams& p);

// GVD pulling of mode m from the equidistant comb:
// delta_nu_m = -GDD_rt * pi * (m FSR)^2 / t_rt, GDD_rt = gvd * dispersive length.
double gvd_detuning(int m, const MBParams& p);

// Optical frequency of mode m including the GVD pulling.
double mode_frequency(int m, const MBParams& p);

// Precomputed per-step tables. step() advances one dt: the diagonal linear
// part (gain/loss + detuning) is applied as an exact exponential factor, the
// saturation sum and the Langevin noise as an Euler-Maruyama increment.
class Stepper {
 public:
  Stepper(const MBParams& p, double dt_s);

  void step(ModalState& state, RandomStream* noise) const;
  double dt() const { return dt_; }

 private:
  MBParams p_;
  double dt_;
  double noise_amp_;
  std::vector<double> gain_;                       // g_m
  std::vector<std::complex<double>> lin_;          // exp((g_m - kappa)/2 + i 2 pi dnu_m) dt
  std::vector<std::complex<double>> beta_;         // beta[p][q], row-major
  mutable std::vector<std::complex<double>> pulse_, sat_;  // workspaces
};

// Single exposed step (constructs the tables each call; simulations reuse a
// Stepper internally).
ModalState step_modes(const ModalState& state, double dt_s, const MBParams& p,
                      RandomStream& noise);

struct SimulateOptions {
  double dt_s = 0.25e-12;
  const ModalState* initial = nullptr;  // default: empty cavity
  bool noise = true;
};

ModalTrajectory simulate(const MBParams& p, double duration_s, double transient_s,
                         double record_dt_s, std::uint64_t seed,
                         const SimulateOptions& opt = {});

// Envelope intensity I = |sum_m a_m|^2 over the recorded states; returns
// <I^2> / <I>^2, the few-cycle-averaged g2(0) of the modal model.
double g2_modal(const ModalTrajectory& traj);

// Same ratio with a stderr from delete-one jackknife over n_blocks contiguous
// time blocks.
struct G2Stats {
  double value;
  double err;
};
G2Stats g2_modal_stats(const ModalTrajectory& traj, std::size_t n_blocks = 20);

struct LiPoint {
  double gain_per_s;
  double power_esat2;  // sum_m <|a_m|^2>
  double g2_zero;
};

std::vector<LiPoint> li_sweep(const MBParams& base, const std::vector<double>& gains_per_s,
                              std::uint64_t seed, double duration_s = 200e-9,
                              double transient_s = 20e-9, double record_dt_s = 1e-12,
                              int threads = 1);

// Affine current axis: I = I_th * (G / G_th); plotting aid only.
double map_gain_to_current(double gain_per_s, double i_threshold_ma, double g_threshold_per_s);

// Field reconstruction E(t) = scale * Re sum_m a_m(t) exp(i 2 pi (nu0 + m FSR) t),
// linear interpolation of the slow amplitudes; a_m carries its GVD rotation, so
// mode m radiates at nu0 + m FSR + dnu_m. filtered() applies the Gaussian
// window gain at each mode's pulled frequency (slow-envelope approximation).
std::unique_ptr<FieldTrace> reconstruct_field(std::shared_ptr<const ModalTrajectory> traj,
                                              double field_scale_vpm);

// Free-running-source adapter for pulse sampling: every repetition slot
// k = round(t * f_rep) deterministically draws a segment start inside the
// trajectory, so both probe instants of one pulse see the same segment while
// distinct pulses see independent ones.
std::unique_ptr<FieldTrace> ergodic_field(std::shared_ptr<const ModalTrajectory> traj,
                                          double field_scale_vpm, double f_rep_hz,
                                          double max_abs_tau_s, std::uint64_t seed);

// Trajectory CSV: "# t_s, re_a_-M, im_a_-M, ..." header then one row per record.
void write_trajectory_csv(std::ostream& os, const ModalTrajectory& traj);

}  // namespace eoscorr::mb
