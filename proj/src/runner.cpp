#include "eoscorr/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "eoscorr/eosc_io.hpp"
#include "eoscorr/errors.hpp"
#include "eoscorr/parallel.hpp"
#include "eoscorr/photon_budget.hpp"
#include "eoscorr/spectra.hpp"
#include "eoscorr/synth_sources.hpp"

namespace fs = std::filesystem;

namespace eoscorr {

namespace {

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);  // binary: byte-identical reruns
  if (!os) throw IoError("cannot open for writing: " + path);
  return os;
}

std::uint64_t sub_seed(std::uint64_t master, const char* label, std::uint64_t channel = 0) {
  return derive_stream(master, StreamId{label, channel, 0, 0}).next_u64();
}

SourceSpec synth_spec(const SourceConfig& src, const DetectorParams& det) {
  SourceSpec spec;
  spec.nu0_hz = src.nu0_hz;
  spec.block_period_s = static_cast<double>(det.mod_period_pulses) / det.f_rep_hz;
  if (src.kind == "coherent") {
    spec.kind = SourceKind::kCoherent;
    spec.amplitude_vpm = src.amplitude_vpm;
  } else if (src.kind == "thermal") {
    spec.kind = SourceKind::kThermal;
    spec.amplitude_vpm = src.amplitude_vpm;
    spec.bandwidth_hz = src.bandwidth_hz;
    spec.n_components = src.n_components;
  } else if (src.kind == "multimode") {
    spec.kind = SourceKind::kMultimode;
    spec.mode_spacing_hz = src.mode_spacing_hz;
    if (src.n_equal_modes > 0)
      spec.mode_amplitudes_vpm.assign(src.n_equal_modes, src.amplitude_vpm);
    else
      spec.mode_amplitudes_vpm = src.mode_amplitudes_vpm;
  } else {
    throw ConfigError("internal: synth_spec called for kind " + src.kind);
  }
  return spec;
}

}  // namespace

std::unique_ptr<FieldTrace> build_source(const ExperimentConfig& config, double max_abs_tau_s) {
  if (!config.has_source) throw ConfigError("config: a [source] section is required");
  const auto& src = config.source;
  if (src.kind == "mb") {
    mb::MBParams p = src.mb;
    p.gain_per_s = src.gain_over_threshold * p.threshold_gain_per_s();
    const auto traj = std::make_shared<mb::ModalTrajectory>(
        mb::simulate(p, src.duration_s, src.transient_s, src.record_dt_s,
                     sub_seed(config.master_seed, "src/mb"), {src.dt_s, nullptr, true}));
    return mb::ergodic_field(traj, src.field_scale_vpm, config.detector.f_rep_hz,
                             max_abs_tau_s, sub_seed(config.master_seed, "src/mb/slots"));
  }
  return make_source(synth_spec(src, config.detector), config.master_seed);
}

CorrelationArtifacts run_correlation_experiment(const ExperimentConfig& config,
                                                const std::string& out_dir, int threads) {
  ensure_dir(out_dir);
  const auto taus = config.correlator.tau_grid();
  double max_abs_tau = 0.0;
  for (double t : taus) max_abs_tau = std::max(max_abs_tau, std::abs(t));
  const auto source = build_source(config, max_abs_tau);

  ScanOptions opt;
  opt.variance_floor_eps = config.correlator.variance_floor_eps;
  opt.envelope_cycles = config.correlator.envelope_cycles;
  opt.threads = threads;
  if (config.output.write_eosc) {
    opt.stream_sink = [&out_dir](const PulseSampleStream& stream, std::size_t k) {
      char name[64];
      std::snprintf(name, sizeof(name), "pulses_tau_%04zu.eosc", k);
      write_eosc((fs::path(out_dir) / name).string(), stream);
    };
  }

  CorrelationArtifacts art;
  art.trace = correlation_scan(*source, taus, config.correlator.n_pulses_per_tau,
                               config.detector, config.master_seed, opt);

  {
    auto os = open_out((fs::path(out_dir) / "config_echo.cfg").string());
    os << echo_config(config);
  }
  art.trace_csv_path = (fs::path(out_dir) / "correlation.csv").string();
  {
    auto os = open_out(art.trace_csv_path);
    std::vector<std::string> hdr = {"correlation experiment, source kind = " + config.source.kind,
                                    "master_seed = " + std::to_string(config.master_seed)};
    write_correlation_csv(os, art.trace, hdr);
  }

  std::vector<double> g1v(taus.size()), g2v(taus.size());
  for (std::size_t k = 0; k < taus.size(); ++k) {
    g1v[k] = art.trace.g1[k].value;
    g2v[k] = art.trace.g2_raw[k].value;
  }
  const auto g1_spec = correlation_spectrum(taus, g1v, SpectrumWindow::kHann, false);
  const auto g2_spec = correlation_spectrum(taus, g2v, SpectrumWindow::kHann, true);
  art.g1_spectrum_path = (fs::path(out_dir) / "g1_spectrum.csv").string();
  art.g2_spectrum_path = (fs::path(out_dir) / "g2_spectrum.csv").string();
  {
    auto os = open_out(art.g1_spectrum_path);
    write_spectrum_csv(os, g1_spec, {"g1 spectrum (Hann window)"});
  }
  {
    auto os = open_out(art.g2_spectrum_path);
    write_spectrum_csv(os, g2_spec, {"g2 spectrum (de-meaned, Hann window)"});
  }
  return art;
}

namespace {

std::string opt_cell(const std::optional<double>& v) {
  if (!v) return "";
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.9g", *v);
  return buf;
}

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows,
                     std::uint64_t seed) {
  auto os = open_out(path);
  os << "# threshold sweep, master_seed = " << seed << "\n";
  os << "gain_over_threshold,gain_per_s,current_ma,power_esat2,field_v_per_m,"
        "photons_window,g2_modal,g2_modal_err,g2_pipeline,g2_pipeline_err,status\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g",
                  r.gain_over_threshold, r.gain_per_s, r.current_ma, r.power_esat2,
                  r.field_vpm, r.photons_window, r.g2_modal, r.g2_modal_err);
    os << buf << "," << opt_cell(r.g2_pipeline) << "," << opt_cell(r.g2_pipeline_err) << ","
       << r.status << "\n";
  }
}

void write_sweep_json(const std::string& path, const std::vector<SweepRow>& rows,
                      std::uint64_t seed) {
  nlohmann::json j;
  j["master_seed"] = seed;
  j["rows"] = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json row;
    row["gain_over_threshold"] = r.gain_over_threshold;
    row["gain_per_s"] = r.gain_per_s;
    row["current_ma"] = r.current_ma;
    row["power_esat2"] = r.power_esat2;
    row["field_v_per_m"] = r.field_vpm;
    row["photons_window"] = r.photons_window;
    row["g2_modal"] = r.g2_modal;
    row["g2_modal_err"] = r.g2_modal_err;
    if (r.g2_pipeline) {
      row["g2_pipeline"] = *r.g2_pipeline;
      row["g2_pipeline_err"] = *r.g2_pipeline_err;
    } else {
      row["g2_pipeline"] = nullptr;
      row["g2_pipeline_err"] = nullptr;
    }
    row["status"] = r.status;
    j["rows"].push_back(row);
  }
  auto os = open_out(path);
  os << j.dump(2) << "\n";
}

}  // namespace

SweepReport run_threshold_sweep(const ExperimentConfig& config, const std::string& out_dir,
                                int threads) {
  ensure_dir(out_dir);
  const auto& sw = config.sweep;
  mb::MBParams base = config.source.mb;  // [source] mb keys set the device, defaults otherwise
  const double g_th = base.threshold_gain_per_s();

  // tau grid of the pipeline route, symmetric around 0
  std::vector<double> ptaus;
  for (double t = -sw.pipeline_tau_span_s; t <= sw.pipeline_tau_span_s + 1e-18;
       t += sw.pipeline_tau_step_s)
    ptaus.push_back(t);

  SweepReport report;
  report.rows.resize(sw.gains_over_threshold.size());

  parallel_for(sw.gains_over_threshold.size(), threads, [&](std::size_t k) {
    SweepRow& row = report.rows[k];
    row.gain_over_threshold = sw.gains_over_threshold[k];
    row.gain_per_s = row.gain_over_threshold * g_th;
    row.current_ma = mb::map_gain_to_current(row.gain_per_s, sw.i_threshold_ma, g_th);
    try {
      mb::MBParams p = base;
      p.gain_per_s = row.gain_per_s;
      const auto traj = std::make_shared<mb::ModalTrajectory>(
          mb::simulate(p, sw.duration_s, sw.transient_s, sw.record_dt_s,
                       sub_seed(config.master_seed, "sweep/sim", k), {sw.dt_s, nullptr, true}));

      double power = 0.0;
      const int mmax = p.max_mode();
      for (std::size_t r = 0; r < traj->n_records(); ++r)
        for (int m = -mmax; m <= mmax; ++m) power += std::norm(traj->amplitude(r, m));
      power /= static_cast<double>(traj->n_records());
      row.power_esat2 = power;
      row.field_vpm = sw.field_scale_vpm * std::sqrt(power);

      BudgetParams bp;
      bp.nu_hz = p.nu0_hz;
      row.photons_window = photons_in_window(row.field_vpm, bp);

      const auto g2m = mb::g2_modal_stats(*traj);
      row.g2_modal = g2m.value;
      row.g2_modal_err = g2m.err;
      row.status = "ok";

      if (sw.pipeline) {
        try {
          const auto field =
              mb::ergodic_field(traj, sw.field_scale_vpm, config.detector.f_rep_hz,
                                sw.pipeline_tau_span_s + sw.pipeline_tau_step_s,
                                sub_seed(config.master_seed, "sweep/slots", k));
          DetectorParams det = config.detector;
          det.nef_vpm = sw.pipeline_nef_vpm;
          ScanOptions opt;
          opt.variance_floor_eps = config.correlator.variance_floor_eps;
          opt.envelope_cycles = sw.pipeline_envelope_cycles;
          opt.threads = 1;  // points already run concurrently
          const auto trace =
              correlation_scan(*field, ptaus, sw.pipeline_n_pulses, det,
                               sub_seed(config.master_seed, "sweep/scan", k), opt);
          std::size_t zero = 0;
          for (std::size_t i = 1; i < ptaus.size(); ++i)
            if (std::abs(ptaus[i]) < std::abs(ptaus[zero])) zero = i;
          row.g2_pipeline = trace.g2_env[zero];
          row.g2_pipeline_err = trace.g2_env_err[zero];
        } catch (const InsufficientSignal& e) {
          row.status = std::string("pipeline_skipped: ") + e.what();
        }
      } else {
        row.status = "pipeline_off";
      }
    } catch (const std::exception& e) {
      row.status = std::string("failed: ") + e.what();
    }
  });

  {
    auto os = open_out((fs::path(out_dir) / "config_echo.cfg").string());
    os << echo_config(config);
  }
  report.csv_path = (fs::path(out_dir) / "sweep.csv").string();
  report.json_path = (fs::path(out_dir) / "sweep.json").string();
  write_sweep_csv(report.csv_path, report.rows, config.master_seed);
  write_sweep_json(report.json_path, report.rows, config.master_seed);
  return report;
}

std::string run_simulate(const ExperimentConfig& config, const std::string& out_dir) {
  if (!config.has_source || config.source.kind != "mb")
    throw ConfigError("simulate: needs a [source] section with kind = mb");
  ensure_dir(out_dir);
  const auto& src = config.source;
  mb::MBParams p = src.mb;
  p.gain_per_s = src.gain_over_threshold * p.threshold_gain_per_s();
  const auto traj = mb::simulate(p, src.duration_s, src.transient_s, src.record_dt_s,
                                 sub_seed(config.master_seed, "src/mb"), {src.dt_s, nullptr, true});
  const std::string path = (fs::path(out_dir) / "trajectory.csv").string();
  {
    auto os = open_out(path);
    mb::write_trajectory_csv(os, traj);
  }
  {
    auto os = open_out((fs::path(out_dir) / "config_echo.cfg").string());
    os << echo_config(config);
  }
  return path;
}

CorrelationCsv read_correlation_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path);
  CorrelationCsv out;
  std::string line;
  bool header_seen = false;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line.rfind("tau_fs,", 0) != 0)
        throw IoError(path + ": not a correlation CSV (unexpected header)");
      header_seen = true;
      continue;
    }
    double tau_fs, g1, g1e, g2, g2e, genv, genve;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf,%lf", &tau_fs, &g1, &g1e, &g2,
                    &g2e, &genv, &genve) != 7)
      throw IoError(path + ": malformed row at line " + std::to_string(line_no));
    out.taus_s.push_back(tau_fs * 1e-15);
    out.g1.push_back(g1);
    out.g2_raw.push_back(g2);
    out.g2_env.push_back(genv);
  }
  if (out.taus_s.size() < 2) throw IoError(path + ": fewer than 2 data rows");
  return out;
}

SpectrumArtifacts run_spectrum_from_csv(const std::string& correlation_csv,
                                        const std::string& out_dir) {
  ensure_dir(out_dir);
  const auto data = read_correlation_csv(correlation_csv);
  const auto g1_spec = correlation_spectrum(data.taus_s, data.g1, SpectrumWindow::kHann, false);
  const auto g2_spec = correlation_spectrum(data.taus_s, data.g2_raw, SpectrumWindow::kHann, true);
  SpectrumArtifacts art;
  art.g1_spectrum_path = (fs::path(out_dir) / "g1_spectrum.csv").string();
  art.g2_spectrum_path = (fs::path(out_dir) / "g2_spectrum.csv").string();
  {
    auto os = open_out(art.g1_spectrum_path);
    write_spectrum_csv(os, g1_spec, {"g1 spectrum of " + correlation_csv});
  }
  {
    auto os = open_out(art.g2_spectrum_path);
    write_spectrum_csv(os, g2_spec, {"g2 spectrum of " + correlation_csv});
  }
  return art;
}

CorrelationTrace correlate_from_eosc(const std::vector<std::string>& paths,
                                     double variance_floor_eps, double envelope_cycles,
                                     double nu0_hz) {
  if (paths.empty()) throw IoError("correlate: no EOSC files given");
  struct Point {
    double tau;
    Estimate g1, g2;
    double nef;
    std::uint64_t n;
  };
  std::vector<Point> points;
  for (const auto& path : paths) {
    const auto stream = read_eosc(path);
    const auto stats = accumulate(stream);
    // nef is not part of the container; the OFF class measures the noise power.
    const auto off = stats.totals_off();
    const double nef2 = off.count > 0 ? off.sxx.value() / static_cast<double>(off.count) : 0.0;
    const double floor = variance_floor_eps * nef2;
    points.push_back({stream.tau_s, estimate_g1(stats, floor), estimate_g2(stats, floor),
                      std::sqrt(std::max(0.0, nef2)), stream.n_pulses()});
  }
  std::sort(points.begin(), points.end(),
            [](const Point& a, const Point& b) { return a.tau < b.tau; });

  CorrelationTrace trace;
  for (const auto& p : points) {
    trace.taus_s.push_back(p.tau);
    trace.g1.push_back(p.g1);
    trace.g2_raw.push_back(p.g2);
  }
  trace.nu0_hz = nu0_hz;
  trace.nef_vpm = points.front().nef;
  trace.n_pulses_per_tau = points.front().n;

  // Envelope only when the tau grid is uniform and dense enough.
  bool uniform = trace.taus_s.size() >= 2;
  const double step = uniform ? trace.taus_s[1] - trace.taus_s[0] : 0.0;
  for (std::size_t i = 1; uniform && i < trace.taus_s.size(); ++i)
    if (std::abs((trace.taus_s[i] - trace.taus_s[i - 1]) - step) > 1e-6 * std::abs(step))
      uniform = false;
  if (uniform && step > 0.0 && step < 1.0 / (4.0 * nu0_hz)) {
    std::vector<double> v(trace.taus_s.size()), e(trace.taus_s.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      v[i] = trace.g2_raw[i].value;
      e[i] = trace.g2_raw[i].err;
    }
    const auto env = few_cycle_envelope(trace.taus_s, v, e, nu0_hz, envelope_cycles);
    trace.g2_env = env.value;
    trace.g2_env_err = env.err;
  } else {
    trace.g2_env.assign(trace.taus_s.size(), std::numeric_limits<double>::quiet_NaN());
    trace.g2_env_err = trace.g2_env;
  }
  return trace;
}

}  // namespace eoscorr
