#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "eoscorr/correlator.hpp"
#include "eoscorr/errors.hpp"
#include "eoscorr/synth_sources.hpp"

using namespace eoscorr;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

SourceSpec coherent_spec(double amp, double nu0 = 2.3e12) {
  SourceSpec s;
  s.kind = SourceKind::kCoherent;
  s.nu0_hz = nu0;
  s.amplitude_vpm = amp;
  return s;
}

// Small stream with a custom toy layout: period 2, duty 1.
PulseSampleStream toy_stream() {
  PulseSampleStream s;
  s.tau_s = 0.0;
  s.detector.mod_period_pulses = 2;
  s.detector.duty_on_pulses = 1;
  s.detector.nef_vpm = 1.0;
  s.x = {1.0, 0.5, 2.0, -1.0};
  s.y = {2.0, -0.5, 1.0, 0.25};
  return s;
}

}  // namespace

TEST_CASE("toy fixture with hand-computed moments") {
  // ON pulses (1,2),(2,1); OFF pulses (0.5,-0.5),(-1,0.25):
  //   Vx = 2.5 - 0.625 = 1.875, Vy = 2.5 - 0.15625 = 2.34375
  //   C  = 2 - (-0.25) = 2.25
  //   Q  = 4 - 0.625*2.34375 - 0.15625*1.875 - 0.0625 = 2.1796875
  //   g1 = 2.25 / sqrt(1.875*2.34375) = sqrt(1.152), g2 = 0.496 exactly
  const auto stats = accumulate(toy_stream());
  const auto on = stats.totals_on();
  const auto off = stats.totals_off();
  CHECK(on.count == 2);
  CHECK(off.count == 2);
  CHECK(on.sxy.value() == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(on.sxx.value() == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(on.sxxyy.value() == doctest::Approx(8.0).epsilon(1e-15));
  CHECK(on.sx4.value() == doctest::Approx(17.0).epsilon(1e-15));
  CHECK(off.sxx.value() == doctest::Approx(1.25).epsilon(1e-15));
  CHECK(off.syy.value() == doctest::Approx(0.3125).epsilon(1e-15));
  CHECK(off.sxxyy.value() == doctest::Approx(0.125).epsilon(1e-15));

  CHECK(estimate_g1(stats).value == doctest::Approx(std::sqrt(1.152)).epsilon(1e-12));
  CHECK(estimate_g2(stats).value == doctest::Approx(0.496).epsilon(1e-12));
}

TEST_CASE("all-zero stream accumulates zero sums with correct counts") {
  PulseSampleStream s;
  s.detector.mod_period_pulses = 4;
  s.detector.duty_on_pulses = 2;
  s.x.assign(10, 0.0);
  s.y.assign(10, 0.0);
  const auto stats = accumulate(s);
  CHECK(stats.totals_on().count == 6);  // pulses 0,1,4,5,8,9
  CHECK(stats.totals_off().count == 4);
  CHECK(stats.totals_on().sxx.value() == 0.0);
  CHECK(stats.total_pulses() == 10);
}

TEST_CASE("merge of halves equals the whole stream") {
  DetectorParams det;
  const auto trace = make_source(coherent_spec(5000.0), 3);
  const auto full = sample_pulse_stream(*trace, 30e-15, 90000, det, 9);

  const auto paired = to_paired(full);
  PairedSamples first{full.tau_s, det.nef_vpm, {}}, second{full.tau_s, det.nef_vpm, {}};
  first.pulses.assign(paired.pulses.begin(), paired.pulses.begin() + 40000);
  second.pulses.assign(paired.pulses.begin() + 40000, paired.pulses.end());

  auto merged = accumulate(first);
  merged.merge(accumulate(second));
  const auto whole = accumulate(full);

  CHECK(merged.total_pulses() == whole.total_pulses());
  CHECK(merged.totals_on().sxxyy.value() ==
        doctest::Approx(whole.totals_on().sxxyy.value()).epsilon(1e-10));
  CHECK(estimate_g2(merged).value == doctest::Approx(estimate_g2(whole).value).epsilon(1e-10));
}

TEST_CASE("merge is associative across arbitrary chunkings") {
  DetectorParams det;
  const auto trace = make_source(coherent_spec(5000.0), 3);
  const auto full = sample_pulse_stream(*trace, 0.0, 120000, det, 21);
  const auto paired = to_paired(full);

  const std::vector<std::size_t> cuts = {0, 17321, 36000, 54001, 90000, 120000};
  std::vector<SufficientStats> parts;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    PairedSamples seg{full.tau_s, det.nef_vpm, {}};
    seg.pulses.assign(paired.pulses.begin() + cuts[c], paired.pulses.begin() + cuts[c + 1]);
    parts.push_back(accumulate(seg));
  }
  // left fold
  SufficientStats left = parts[0];
  for (std::size_t i = 1; i < parts.size(); ++i) left.merge(parts[i]);
  // right fold
  SufficientStats right = parts.back();
  for (std::size_t i = parts.size() - 1; i-- > 0;) {
    SufficientStats tmp = parts[i];
    tmp.merge(right);
    right = tmp;
  }
  CHECK(left.totals_on().sxxyy.value() ==
        doctest::Approx(right.totals_on().sxxyy.value()).epsilon(1e-12));
  CHECK(estimate_g2(left).value == doctest::Approx(estimate_g2(right).value).epsilon(1e-12));
}

TEST_CASE("coherent source, tau = 0, no noise: g1 = 1 and g2_raw = 1.5") {
  DetectorParams det;
  det.nef_vpm = 0.0;
  const auto trace = make_source(coherent_spec(100.0), 3);
  const auto stats = accumulate(sample_pulse_stream(*trace, 0.0, 180000, det, 3));
  CHECK(estimate_g1(stats).value == doctest::Approx(1.0).epsilon(1e-14));
  // real-field fourth moment of a sinusoid: <cos^4>/<cos^2>^2 = 3/2
  CHECK(estimate_g2(stats).value == doctest::Approx(1.5).epsilon(1e-9));
}

TEST_CASE("coherent source at the quarter period: g1 = 0 within error") {
  DetectorParams det;
  const auto trace = make_source(coherent_spec(6000.0), 3);
  const double tau = 1.0 / (4.0 * 2.3e12);
  const auto stats = accumulate(sample_pulse_stream(*trace, tau, 360000, det, 5));
  const auto g1 = estimate_g1(stats, 0.01 * 600 * 600);
  CHECK(g1.err > 0.0);
  CHECK(std::abs(g1.value) < 4.0 * g1.err + 0.01);
}

TEST_CASE("coherent with noise: g2_raw(tau) = 1 + cos(4 pi nu0 tau)/2") {
  DetectorParams det;
  const auto trace = make_source(coherent_spec(6000.0), 3);
  const double period = 1.0 / 2.3e12;
  for (const double frac : {0.0, 0.25, 0.37}) {
    const double tau = frac * period;
    const auto stats = accumulate(sample_pulse_stream(*trace, tau, 360000, det, 11));
    const auto g2 = estimate_g2(stats, 0.01 * 600 * 600);
    const double expected = 1.0 + 0.5 * std::cos(2.0 * kTwoPi * 2.3e12 * tau);
    CHECK(g2.value == doctest::Approx(expected).epsilon(0.03));
  }
}

TEST_CASE("noise-free thermal source obeys the Isserlis identity") {
  DetectorParams det;
  det.nef_vpm = 0.0;
  SourceSpec th;
  th.kind = SourceKind::kThermal;
  th.nu0_hz = 2.3e12;
  th.amplitude_vpm = 50.0;
  th.bandwidth_hz = 0.1e12;
  const auto trace = make_source(th, 29);

  int ok = 0, total = 0;
  for (const double tau : {-0.8e-12, -0.3e-12, 0.0, 0.21e-12, 0.64e-12}) {
    const auto stats = accumulate(sample_pulse_stream(*trace, tau, 200000, det, 31));
    const auto g1 = estimate_g1(stats);
    const auto g2 = estimate_g2(stats);
    const double expected = 1.0 + 2.0 * g1.value * g1.value;
    const double sigma =
        std::sqrt(g2.err * g2.err + std::pow(4.0 * g1.value * g1.err, 2)) + 1e-9;
    ++total;
    if (std::abs(g2.value - expected) < 3.0 * sigma) ++ok;
  }
  CHECK(ok >= total - 1);
}

TEST_CASE("pure-noise stream raises insufficient signal") {
  DetectorParams det;  // nef = 600
  const auto trace = make_source(coherent_spec(0.0), 3);
  const auto stats = accumulate(sample_pulse_stream(*trace, 0.0, 72000, det, 13));
  CHECK_THROWS_AS(estimate_g1(stats, 0.01 * 600 * 600), InsufficientSignal);
  CHECK_THROWS_AS(estimate_g2(stats, 0.01 * 600 * 600), InsufficientSignal);
}

TEST_CASE("uncorrected estimator is biased by (1 + sigma^2/V)^2 at tau=0") {
  DetectorParams det;  // nef = 600
  // filtered amplitude = nef: per-pulse SNR 1, V = nef^2/2
  const double amp = 600.0 / 0.66940;
  const auto trace = make_source(coherent_spec(amp), 3);
  const auto stats = accumulate(sample_pulse_stream(*trace, 0.0, 720000, det, 17));
  const auto corrected = estimate_g2(stats, 0.0);
  const auto biased = estimate_g2_uncorrected(stats, 0.0);
  CHECK(corrected.value == doctest::Approx(1.5).epsilon(0.1));
  // numerator picks up sigma^2(Vx+Vy) + sigma^4 = 8 V^2 on top of <s^2 s'^2>
  CHECK(biased.value == doctest::Approx(1.5 + 8.0).epsilon(0.08));
}

TEST_CASE("scale invariance of the estimators") {
  DetectorParams det;
  det.nef_vpm = 0.0;
  const auto trace = make_source(coherent_spec(100.0), 3);
  const auto s = sample_pulse_stream(*trace, 40e-15, 90000, det, 19);
  PulseSampleStream scaled = s;
  for (auto& v : scaled.x) v *= 3.7;
  for (auto& v : scaled.y) v *= 3.7;
  const auto a = accumulate(s);
  const auto b = accumulate(scaled);
  CHECK(estimate_g1(b).value == doctest::Approx(estimate_g1(a).value).epsilon(1e-12));
  CHECK(estimate_g2(b).value == doctest::Approx(estimate_g2(a).value).epsilon(1e-12));
}

TEST_CASE("few_cycle_envelope: constant trace is unchanged") {
  std::vector<double> taus, values, errs;
  for (int i = -40; i <= 40; ++i) {
    taus.push_back(i * 20e-15);
    values.push_back(1.2345);
    errs.push_back(0.01);
  }
  const auto env = few_cycle_envelope(taus, values, errs, 2.3e12, 2.0);
  for (double v : env.value) CHECK(v == doctest::Approx(1.2345).epsilon(1e-12));
}

TEST_CASE("few_cycle_envelope: suppresses the 2 nu0 oscillation") {
  std::vector<double> taus, values, errs;
  for (int i = -100; i <= 100; ++i) {
    const double tau = i * 20e-15;
    taus.push_back(tau);
    values.push_back(1.0 + 0.5 * std::cos(2.0 * kTwoPi * 2.3e12 * tau));
    errs.push_back(0.0);
  }
  const auto env = few_cycle_envelope(taus, values, errs, 2.3e12, 2.0);
  for (std::size_t i = 0; i < taus.size(); ++i)
    if (std::abs(taus[i]) < 0.8e-12)  // away from the truncated-window edges
      CHECK(env.value[i] == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("few_cycle_envelope rejects a grid coarser than 1/(4 nu0)") {
  std::vector<double> taus, values;
  for (int i = 0; i < 32; ++i) {
    taus.push_back(i * 150e-15);  // 150 fs > 108.7 fs
    values.push_back(1.0);
  }
  CHECK_THROWS_AS(few_cycle_envelope(taus, values, {}, 2.3e12, 2.0), NumericalError);
}

TEST_CASE("correlation_scan: flat coherent envelope, threads do not change results") {
  DetectorParams det;
  const auto trace = make_source(coherent_spec(6000.0), 3);
  std::vector<double> taus;
  for (int i = -10; i <= 10; ++i) taus.push_back(i * 45e-15);

  ScanOptions opt1;
  opt1.threads = 1;
  const auto t1 = correlation_scan(*trace, taus, 100000, det, 42, opt1);
  ScanOptions opt3;
  opt3.threads = 3;
  const auto t3 = correlation_scan(*trace, taus, 100000, det, 42, opt3);

  for (std::size_t k = 0; k < taus.size(); ++k) {
    CHECK(t1.g2_raw[k].value == t3.g2_raw[k].value);
    CHECK(t1.g1[k].value == t3.g1[k].value);
  }
  // mean envelope near 1
  double mean = 0.0;
  for (double v : t1.g2_env) mean += v;
  mean /= static_cast<double>(t1.g2_env.size());
  CHECK(mean == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("correlation_scan rejects out-of-range delays and non-uniform grids") {
  DetectorParams det;
  const auto trace = make_source(coherent_spec(6000.0), 3);
  CHECK_THROWS_AS(correlation_scan(*trace, {0.0, 150e-12}, 1000, det, 1, {}), NumericalError);
  CHECK_THROWS_AS(correlation_scan(*trace, {0.0, 1e-15, 3e-15}, 1000, det, 1, {}),
                  NumericalError);
}

TEST_CASE("symmetry: stationary source gives g(tau) = g(-tau) within errors") {
  DetectorParams det;
  const auto trace = make_source(coherent_spec(6000.0), 3);
  const double tau = 0.37 / 2.3e12;
  const auto sp = accumulate(sample_pulse_stream(*trace, tau, 360000, det, 23));
  const auto sm = accumulate(sample_pulse_stream(*trace, -tau, 360000, det, 24));
  const auto gp = estimate_g2(sp, 0.01 * 600 * 600);
  const auto gm = estimate_g2(sm, 0.01 * 600 * 600);
  CHECK(std::abs(gp.value - gm.value) <
        4.0 * std::sqrt(gp.err * gp.err + gm.err * gm.err) + 0.01);
}

TEST_CASE("jackknife needs at least two complete blocks") {
  DetectorParams det;
  const auto trace = make_source(coherent_spec(6000.0), 3);
  const auto stats = accumulate(sample_pulse_stream(*trace, 0.0, 10000, det, 3));
  const auto g2 = estimate_g2(stats, 0.0);
  CHECK(g2.n_blocks == 1);
  CHECK(std::isnan(g2.err));
}

TEST_CASE("jackknife error agrees with the spread over independent seeds") {
  DetectorParams det;
  const auto trace = make_source(coherent_spec(6000.0), 3);
  std::vector<double> values;
  double jk = 0.0;
  for (std::uint64_t seed = 0; seed < 24; ++seed) {
    const auto stats = accumulate(sample_pulse_stream(*trace, 0.0, 180000, det, 100 + seed));
    const auto g2 = estimate_g2(stats, 0.0);
    values.push_back(g2.value);
    jk += g2.err;
  }
  jk /= static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double sd = 0.0;
  for (double v : values) sd += (v - mean) * (v - mean);
  sd = std::sqrt(sd / (static_cast<double>(values.size()) - 1.0));
  CHECK(jk / sd > 0.5);
  CHECK(jk / sd < 2.0);
}

TEST_CASE("correlation CSV writer emits the documented layout") {
  DetectorParams det;
  const auto trace = make_source(coherent_spec(6000.0), 3);
  std::vector<double> taus;
  for (int i = -8; i <= 8; ++i) taus.push_back(i * 45e-15);
  const auto t = correlation_scan(*trace, taus, 40000, det, 42, {});
  std::ostringstream os;
  write_correlation_csv(os, t, {"fixture"});
  const std::string s = os.str();
  CHECK(s.find("# fixture\n") != std::string::npos);
  CHECK(s.find("tau_fs,g1,g1_err,g2_raw,g2_raw_err,g2_env,g2_env_err\n") != std::string::npos);
}
