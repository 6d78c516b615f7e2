#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "eoscorr/correlator.hpp"
#include "eoscorr/eos_frontend.hpp"
#include "eoscorr/errors.hpp"
#include "eoscorr/mb_laser.hpp"

using namespace eoscorr;
using namespace eoscorr::mb;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

MBParams defaults_with_gain(double gain_over_th) {
  MBParams p;
  p.gain_per_s = gain_over_th * p.threshold_gain_per_s();
  return p;
}

double mode_power(const ModalTrajectory& traj, int m) {
  double s = 0.0;
  for (std::size_t k = 0; k < traj.n_records(); ++k) s += std::norm(traj.amplitude(k, m));
  return s / static_cast<double>(traj.n_records());
}

// Frozen-phase trajectory: every record is an independent draw of M equal
// modes with uniform phases.
ModalTrajectory frozen_phase_trajectory(int n_modes_active, std::size_t records,
                                        std::uint64_t seed) {
  MBParams p;
  p.n_modes = 2 * ((n_modes_active + 1) / 2) + 1;
  ModalTrajectory traj(p, 0.0, 1e-12, seed);
  auto rng = derive_stream(seed, {"test/frozen", 0, 0, 0});
  std::vector<std::complex<double>> a(p.n_modes);
  for (std::size_t r = 0; r < records; ++r) {
    for (auto& v : a) v = 0.0;
    for (int k = 0; k < n_modes_active; ++k) {
      const double phi = kTwoPi * rng.uniform();
      a[k] = std::complex<double>(std::cos(phi), std::sin(phi));
    }
    traj.push_back(a);
  }
  return traj;
}

}  // namespace

TEST_CASE("lorentzian gain profile") {
  MBParams p;
  const double g = 1e11;
  CHECK(lorentzian_gain(g, p.nu0_hz, p) == g);
  // HWHM detuning 1/(2 pi tau_coh) = 318.31 GHz
  const double hwhm = 1.0 / (kTwoPi * p.tau_coh_s);
  CHECK(hwhm == doctest::Approx(318.31e9).epsilon(1e-4));
  CHECK(lorentzian_gain(g, p.nu0_hz + hwhm, p) == doctest::Approx(g / 2).epsilon(1e-12));
  CHECK(lorentzian_gain(g, p.nu0_hz - hwhm, p) == doctest::Approx(g / 2).epsilon(1e-12));
  CHECK(lorentzian_gain(g, p.nu0_hz + 1e15, p) < 1e-4 * g);
}

TEST_CASE("GVD mode pulling") {
  MBParams p;
  CHECK(gvd_detuning(0, p) == 0.0);
  // -GDD_rt * pi * FSR^2 / t_rt with GDD_rt = 1.248e6 fs^2, FSR = 250 GHz
  CHECK(gvd_detuning(1, p) == doctest::Approx(-6.1261e10).epsilon(1e-3));
  for (int m = 1; m <= 3; ++m) CHECK(gvd_detuning(m, p) == gvd_detuning(-m, p));
  CHECK(p.fsr_hz() == doctest::Approx(250e9).epsilon(1e-12));
}

TEST_CASE("pure cavity decay is exact for the exponential integrator") {
  MBParams p = defaults_with_gain(0.0);
  p.n_modes = 1;
  ModalState s;
  s.a = {{1.0, 0.0}};
  auto rng = derive_stream(1, {"test/decay", 0, 0, 0});
  const double dt = 0.25e-12;
  for (int i = 0; i < 28; ++i) {
    Stepper stepper(p, dt);
    stepper.step(s, nullptr);
    (void)rng;
  }
  const double t = 28 * dt;
  CHECK(std::abs(s.a[0]) ==
        doctest::Approx(std::exp(-t / (2.0 * p.tau_photon_s))).epsilon(1e-12));
}

TEST_CASE("single-mode saturation: |a|^2 -> 1 - kappa/G at G = 2 kappa") {
  MBParams p = defaults_with_gain(2.0);
  p.n_modes = 1;
  ModalState s;
  s.a = {{0.1, 0.0}};
  Stepper stepper(p, 0.25e-12);
  for (int i = 0; i < 12000; ++i) stepper.step(s, nullptr);  // 3 ns
  CHECK(std::norm(s.a[0]) == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("empty-cavity noise floor: <|a_m|^2> = sp_ratio^2") {
  MBParams p = defaults_with_gain(0.0);
  const auto traj = simulate(p, 100e-9, 5e-9, 1e-12, 77);
  for (int m = -p.max_mode(); m <= p.max_mode(); ++m)
    CHECK(mode_power(traj, m) ==
          doctest::Approx(p.sp_ratio * p.sp_ratio).epsilon(0.2));
}

TEST_CASE("saturation term: convolution form equals the direct triple sum") {
  MBParams p = defaults_with_gain(1.7);
  const int n = p.n_modes;
  const int mmax = p.max_mode();
  ModalState s;
  auto rng = derive_stream(5, {"test/conv", 0, 0, 0});
  for (int i = 0; i < n; ++i) {
    auto [re, im] = rng.normal_pair();
    s.a.push_back({0.3 * re, 0.3 * im});
  }
  const ModalState before = s;

  // recover the saturation term from one noise-free step
  const double dt = 1e-15;
  Stepper stepper(p, dt);
  ModalState after = before;
  stepper.step(after, nullptr);

  std::vector<double> nu(n), g(n);
  for (int i = 0; i < n; ++i) {
    nu[i] = mode_frequency(i - mmax, p);
    g[i] = lorentzian_gain(p.gain_per_s, nu[i], p);
  }
  for (int m = 0; m < n; ++m) {
    // direct triple sum with the spatial overlap weights
    std::complex<double> direct = 0.0;
    for (int ip = 0; ip < n; ++ip)
      for (int iq = 0; iq < n; ++iq) {
        const int ir = m - ip + iq;
        if (ir < 0 || ir >= n) continue;
        const std::complex<double> beta =
            1.0 / std::complex<double>(1.0, kTwoPi * (nu[ip] - nu[iq]) * p.tau_up_s);
        const double w = (ip == m && iq == m) ? 1.0 : p.xsat_overlap;
        direct += w * beta * before.a[ip] * std::conj(before.a[iq]) * before.a[ir];
      }
    const std::complex<double> mu(0.5 * (g[m] - p.kappa_per_s()),
                                  kTwoPi * gvd_detuning(m - mmax, p));
    const std::complex<double> recovered =
        (before.a[m] * std::exp(mu * dt) - after.a[m]) / (dt * 0.5 * g[m]);
    CHECK(std::abs(recovered - direct) < 1e-9 * (1.0 + std::abs(direct)));
  }
}

TEST_CASE("below threshold all modes stay near the spontaneous floor") {
  MBParams p = defaults_with_gain(0.5);
  const auto traj = simulate(p, 100e-9, 5e-9, 1e-12, 3);
  const double sp2 = p.sp_ratio * p.sp_ratio;
  for (int m = -p.max_mode(); m <= p.max_mode(); ++m) CHECK(mode_power(traj, m) < 10.0 * sp2);
  // center mode relaxes at (kappa - g0)/2: OU variance 2 sp^2
  CHECK(mode_power(traj, 0) == doctest::Approx(2.0 * sp2).epsilon(0.3));
}

TEST_CASE("just above threshold the center mode dominates") {
  MBParams p = defaults_with_gain(1.05);
  const auto traj = simulate(p, 120e-9, 20e-9, 1e-12, 5);
  double side = 0.0;
  for (int m = -p.max_mode(); m <= p.max_mode(); ++m)
    if (m != 0) side += mode_power(traj, m);
  CHECK(side / mode_power(traj, 0) < 0.05);
  CHECK(mode_power(traj, 0) == doctest::Approx(1.0 - 1.0 / 1.05).epsilon(0.05));
}

TEST_CASE("identical seeds give identical trajectories") {
  MBParams p = defaults_with_gain(1.1);
  const auto a = simulate(p, 30e-9, 5e-9, 1e-12, 11);
  const auto b = simulate(p, 30e-9, 5e-9, 1e-12, 11);
  REQUIRE(a.n_records() == b.n_records());
  for (std::size_t k = 0; k < a.n_records(); k += 97)
    for (int m = -p.max_mode(); m <= p.max_mode(); ++m)
      CHECK(a.amplitude(k, m) == b.amplitude(k, m));
}

TEST_CASE("noise off below threshold: total energy strictly decreases") {
  MBParams p = defaults_with_gain(0.5);
  ModalState s;
  auto rng = derive_stream(13, {"test/decrease", 0, 0, 0});
  for (int i = 0; i < p.n_modes; ++i) {
    auto [re, im] = rng.normal_pair();
    s.a.push_back({0.1 * re, 0.1 * im});
  }
  Stepper stepper(p, 0.25e-12);
  double prev = 0.0;
  for (const auto& v : s.a) prev += std::norm(v);
  for (int i = 0; i < 200; ++i) {
    stepper.step(s, nullptr);
    double now = 0.0;
    for (const auto& v : s.a) now += std::norm(v);
    CHECK(now < prev);
    prev = now;
  }
}

TEST_CASE("halving dt changes the mean power by < 2%") {
  MBParams p = defaults_with_gain(1.1);
  const auto coarse = simulate(p, 60e-9, 10e-9, 1e-12, 21, {0.25e-12, nullptr, true});
  const auto fine = simulate(p, 60e-9, 10e-9, 1e-12, 21, {0.125e-12, nullptr, true});
  double pc = 0.0, pf = 0.0;
  for (int m = -p.max_mode(); m <= p.max_mode(); ++m) {
    pc += mode_power(coarse, m);
    pf += mode_power(fine, m);
  }
  CHECK(pc == doctest::Approx(pf).epsilon(0.02));
}

TEST_CASE("global phase rotation leaves |a_m(t)| unchanged (noise off)") {
  MBParams p = defaults_with_gain(1.4);
  ModalState s1;
  auto rng = derive_stream(17, {"test/phase", 0, 0, 0});
  for (int i = 0; i < p.n_modes; ++i) {
    auto [re, im] = rng.normal_pair();
    s1.a.push_back({0.2 * re, 0.2 * im});
  }
  ModalState s2 = s1;
  const std::complex<double> rot = std::polar(1.0, 1.234);
  for (auto& v : s2.a) v *= rot;

  Stepper stepper(p, 0.25e-12);
  for (int i = 0; i < 400; ++i) {
    stepper.step(s1, nullptr);
    stepper.step(s2, nullptr);
  }
  for (int i = 0; i < p.n_modes; ++i)
    CHECK(std::abs(s1.a[i]) == doctest::Approx(std::abs(s2.a[i])).epsilon(1e-11));
}

TEST_CASE("phase-rotated initial state gives the same power statistics with noise") {
  MBParams p = defaults_with_gain(1.2);
  ModalState init;
  init.a.assign(p.n_modes, {0.0, 0.0});
  init.a[p.max_mode()] = {0.3, 0.0};
  ModalState rotated = init;
  for (auto& v : rotated.a) v *= std::polar(1.0, 2.1);

  SimulateOptions o1{0.25e-12, &init, true};
  SimulateOptions o2{0.25e-12, &rotated, true};
  const auto t1 = simulate(p, 80e-9, 20e-9, 1e-12, 31, o1);
  const auto t2 = simulate(p, 80e-9, 20e-9, 1e-12, 31, o2);
  CHECK(mode_power(t1, 0) == doctest::Approx(mode_power(t2, 0)).epsilon(0.05));
}

TEST_CASE("integrator guards") {
  MBParams p = defaults_with_gain(1.0);
  CHECK_THROWS_AS(Stepper(p, 5e-12), NumericalError);  // dt > t_roundtrip

  ModalState s;
  s.a.assign(p.n_modes, {2000.0, 0.0});  // beyond the amplitude cap
  auto rng = derive_stream(1, {"t", 0, 0, 0});
  CHECK_THROWS_AS(step_modes(s, 0.25e-12, p, rng), NumericalError);

  ModalState nan_state;
  nan_state.a.assign(p.n_modes, {std::nan(""), 0.0});
  CHECK_THROWS_AS(step_modes(nan_state, 0.25e-12, p, rng), NumericalError);
}

TEST_CASE("parameter validation") {
  MBParams p;
  p.n_modes = 4;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = MBParams{};
  p.tau_coh_s = -1.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = MBParams{};
  p.gain_per_s = 1.0;
  p.validate();
  CHECK(p.threshold_gain_per_s() == doctest::Approx(1.0 / 35e-12));
}

TEST_CASE("reconstructed field: constant single mode is a pure carrier") {
  MBParams p;
  p.n_modes = 1;
  auto traj = std::make_shared<ModalTrajectory>(p, 0.0, 0.5e-12, 0);
  for (int k = 0; k < 40; ++k) traj->push_back({{1.0, 0.0}});
  const double fs = 123.0;
  const auto field = reconstruct_field(traj, fs);
  for (const double t : {0.1e-12, 3.7e-12, 11.03e-12})
    CHECK(field->eval(t) == doctest::Approx(fs * std::cos(kTwoPi * p.nu0_hz * t)).epsilon(1e-9));
  CHECK_THROWS_AS(field->eval(25e-12), NumericalError);
  CHECK_THROWS_AS(field->eval(-1e-12), NumericalError);
}

TEST_CASE("reconstructed field: two equal modes beat at the FSR") {
  MBParams p;
  p.n_modes = 3;
  auto traj = std::make_shared<ModalTrajectory>(p, 0.0, 0.5e-12, 0);
  for (int k = 0; k < 60; ++k) traj->push_back({{0.0, 0.0}, {1.0, 0.0}, {1.0, 0.0}});
  const auto field = reconstruct_field(traj, 1.0);
  for (const double t : {0.3e-12, 5.1e-12, 17.8e-12}) {
    const double expected =
        std::cos(kTwoPi * p.nu0_hz * t) + std::cos(kTwoPi * (p.nu0_hz + p.fsr_hz()) * t);
    CHECK(field->eval(t) == doctest::Approx(expected).epsilon(1e-9).scale(1.0));
  }
  // full beat modulation: envelope maximum 2, minimum 0
  const double beat = 1.0 / p.fsr_hz();
  double emax = 0.0;
  for (double t = 10e-12; t < 10e-12 + beat; t += 5e-15)
    emax = std::max(emax, std::abs(field->eval(t)));
  CHECK(emax == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("reconstructed field satisfies Parseval") {
  MBParams p;
  p.n_modes = 5;
  auto traj = std::make_shared<ModalTrajectory>(p, 0.0, 0.5e-12, 0);
  const std::vector<std::complex<double>> amps = {
      {0.3, 0.1}, {-0.2, 0.5}, {0.8, 0.0}, {0.1, -0.4}, {0.05, 0.02}};
  for (int k = 0; k < 300; ++k) traj->push_back(amps);
  const double fs = 2.0;
  const auto field = reconstruct_field(traj, fs);
  double p2 = 0.0;
  for (double a2 : {0.0}) (void)a2;
  double expected = 0.0;
  for (const auto& a : amps) expected += std::norm(a);
  expected *= fs * fs / 2.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double e = field->eval(1e-12 + (140e-12 * i) / n);
    p2 += e * e;
  }
  CHECK(p2 / n == doctest::Approx(expected).epsilon(0.01));
}

TEST_CASE("g2_modal of a constant single-mode trajectory is exactly 1") {
  MBParams p;
  p.n_modes = 1;
  ModalTrajectory traj(p, 0.0, 1e-12, 0);
  for (int k = 0; k < 5000; ++k) traj.push_back({{0.7, 0.2}});
  CHECK(g2_modal(traj) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("g2_modal of frozen random phases matches 2 - 1/M") {
  for (const int m : {2, 3, 5}) {
    const auto traj = frozen_phase_trajectory(m, 30000, 40 + m);
    CHECK(g2_modal(traj) == doctest::Approx(2.0 - 1.0 / m).epsilon(0.05));
  }
}

TEST_CASE("g2_modal below threshold is thermal") {
  MBParams p = defaults_with_gain(0.5);
  const auto traj = simulate(p, 400e-9, 20e-9, 1e-12, 7);
  CHECK(g2_modal(traj) == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("g2_modal guards") {
  MBParams p;
  ModalTrajectory empty_field(p, 0.0, 1e-12, 0);
  for (int k = 0; k < 5000; ++k) empty_field.push_back(
      std::vector<std::complex<double>>(p.n_modes, {0.0, 0.0}));
  CHECK_THROWS_AS(g2_modal(empty_field), NumericalError);

  ModalTrajectory too_short(p, 0.0, 1e-12, 0);
  for (int k = 0; k < 100; ++k) too_short.push_back(
      std::vector<std::complex<double>>(p.n_modes, {0.1, 0.0}));
  CHECK_THROWS_AS(g2_modal(too_short), NumericalError);
}

TEST_CASE("li_sweep: five-decade power drop, coherent window, multimode bunching") {
  MBParams base;
  const double kappa = base.threshold_gain_per_s();
  const std::vector<double> gains = {0.2 * kappa, 1.05 * kappa, 1.2 * kappa, 2.4 * kappa};
  const auto points = li_sweep(base, gains, 99, 150e-9, 15e-9, 1e-12, 1);
  REQUIRE(points.size() == 4);
  CHECK(points[2].power_esat2 / points[0].power_esat2 > 1e5);
  CHECK(points[1].g2_zero == doctest::Approx(1.0).epsilon(0.05));
  CHECK(points[3].g2_zero > 1.2);

  CHECK_THROWS_AS(li_sweep(base, {2.0, 1.0}, 1, 10e-9, 1e-9, 1e-12, 1), NumericalError);
}

TEST_CASE("gain-to-current map") {
  const double g_th = 1.0 / 35e-12;
  CHECK(map_gain_to_current(g_th, 495.0, g_th) == doctest::Approx(495.0));
  CHECK(map_gain_to_current(0.0, 495.0, g_th) == 0.0);
  CHECK(map_gain_to_current(1.02 * g_th, 495.0, g_th) == doctest::Approx(504.9));
  CHECK_THROWS_AS(map_gain_to_current(1.0, 495.0, 0.0), NumericalError);
}

TEST_CASE("ergodic field: co-slot correlation, cross-slot independence") {
  MBParams p;
  p.n_modes = 1;
  auto traj = std::make_shared<ModalTrajectory>(p, 0.0, 1e-12, 0);
  for (int k = 0; k < 1000; ++k) traj->push_back({{1.0, 0.0}});

  DetectorParams det;
  det.nef_vpm = 0.0;
  const auto field = ergodic_field(traj, 100.0, det.f_rep_hz, 1e-12, 55);
  CHECK(field->eval(3.0 / det.f_rep_hz) == field->eval(3.0 / det.f_rep_hz));

  // same pulse slot keeps the carrier correlation: g1(0) = 1
  const auto s0 = sample_pulse_stream(*field, 0.0, 60000, det, 1);
  CHECK(estimate_g1(accumulate(s0)).value == doctest::Approx(1.0).epsilon(1e-12));

  // quarter-period delay inside the slot: g1 ~ 0
  const auto sq =
      sample_pulse_stream(*field, 1.0 / (4.0 * p.nu0_hz), 60000, det, 1);
  CHECK(std::abs(estimate_g1(accumulate(sq)).value) < 0.03);

  // asynchronous pulses land in independent segments: g1 ~ 0
  const auto paired = pair_with_offset(s0, 18000);
  CHECK(std::abs(estimate_g1(accumulate(paired)).value) < 0.03);

  // a trajectory shorter than the guard band cannot back this adapter
  auto tiny = std::make_shared<ModalTrajectory>(p, 0.0, 1e-12, 0);
  for (int k = 0; k < 3; ++k) tiny->push_back({{1.0, 0.0}});
  CHECK_THROWS_AS(ergodic_field(tiny, 1.0, det.f_rep_hz, 140e-12, 1), NumericalError);
}

TEST_CASE("trajectory CSV header lists per-mode columns") {
  MBParams p;
  p.n_modes = 3;
  ModalTrajectory traj(p, 0.0, 1e-12, 0);
  traj.push_back({{1.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}});
  traj.push_back({{0.5, 0.0}, {0.0, 0.0}, {0.0, 0.0}});
  std::ostringstream os;
  write_trajectory_csv(os, traj);
  CHECK(os.str().rfind("# t_s, re_a_-1, im_a_-1, re_a_0, im_a_0, re_a_1, im_a_1\n", 0) == 0);
}
