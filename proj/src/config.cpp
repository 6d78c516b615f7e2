#include "eoscorr/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "eoscorr/errors.hpp"

namespace eoscorr {

std::vector<double> default_sweep_grid() {
  return {0.2,  0.35, 0.5,  0.65, 0.8,  0.9,  0.96, 1.05, 1.1,  1.2,
          1.35, 1.5,  1.65, 1.8,  1.95, 2.05, 2.15, 2.3,  2.45, 2.6};
}

std::vector<double> CorrelatorConfig::tau_grid() const {
  const auto n = static_cast<std::size_t>(
      std::llround((tau_max_s - tau_min_s) / tau_step_s)) + 1;
  std::vector<double> taus(n);
  for (std::size_t k = 0; k < n; ++k)
    taus[k] = tau_min_s + static_cast<double>(k) * tau_step_s;
  return taus;
}

namespace {

[[noreturn]] void fail(int line, const std::string& msg) {
  throw ConfigError("config line " + std::to_string(line) + ": " + msg);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v, int line) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) fail(line, "key '" + key + "': trailing characters in number '" + v + "'");
    return x;
  } catch (const ConfigError&) {
    throw;
  } catch (...) {
    fail(line, "key '" + key + "': cannot parse number '" + v + "'");
  }
}

std::uint64_t to_u64(const std::string& key, const std::string& v, int line) {
  try {
    std::size_t pos = 0;
    if (!v.empty() && v[0] == '-') fail(line, "key '" + key + "': must be non-negative");
    const std::uint64_t x = std::stoull(v, &pos);
    if (pos != v.size()) fail(line, "key '" + key + "': trailing characters in integer '" + v + "'");
    return x;
  } catch (const ConfigError&) {
    throw;
  } catch (...) {
    fail(line, "key '" + key + "': cannot parse integer '" + v + "'");
  }
}

int to_int(const std::string& key, const std::string& v, int line) {
  const double x = to_double(key, v, line);
  const int i = static_cast<int>(std::llround(x));
  if (std::abs(x - i) > 1e-9) fail(line, "key '" + key + "': expected an integer");
  return i;
}

bool to_bool(const std::string& key, const std::string& v, int line) {
  if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "off" || v == "0" || v == "no") return false;
  fail(line, "key '" + key + "': expected a boolean (true/false)");
}

std::vector<double> to_list(const std::string& key, const std::string& v, int line) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) fail(line, "key '" + key + "': empty list element");
    out.push_back(to_double(key, item, line));
  }
  if (out.empty()) fail(line, "key '" + key + "': empty list");
  return out;
}

double positive(const std::string& key, double v, int line) {
  if (!(v > 0)) fail(line, "key '" + key + "': must be strictly positive");
  return v;
}

double non_negative(const std::string& key, double v, int line) {
  if (v < 0) fail(line, "key '" + key + "': must be >= 0");
  return v;
}

struct Entry {
  int line;
  std::string key;
  std::string value;
};

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  cfg.sweep.gains_over_threshold = default_sweep_grid();

  // First pass: split into (section, key, value, line) entries.
  std::map<std::string, std::vector<Entry>> sections;
  std::set<std::string> seen_keys;
  std::istringstream is(text);
  std::string raw;
  std::string section;  // "" = global
  int line_no = 0;
  bool source_kind_seen = false;
  while (std::getline(is, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "malformed section header '" + line + "'");
      section = trim(line.substr(1, line.size() - 2));
      static const std::set<std::string> known = {"source", "detector", "correlator", "sweep",
                                                  "output"};
      if (!known.count(section)) fail(line_no, "unknown section '[" + section + "]'");
      if (section == "source") cfg.has_source = true;
      if (section == "sweep") cfg.has_sweep = true;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(line_no, "expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(line_no, "empty key");
    if (value.empty()) fail(line_no, "key '" + key + "': empty value");
    if (!seen_keys.insert(section + "/" + key).second)
      fail(line_no, "duplicate key '" + key + "' in section [" + section + "]");
    sections[section].push_back({line_no, key, value});
  }

  // Global keys.
  for (const auto& e : sections[""]) {
    if (e.key == "master_seed")
      cfg.master_seed = to_u64(e.key, e.value, e.line);
    else
      fail(e.line, "unknown key '" + e.key + "' (expected a [section] or master_seed)");
  }

  auto& src = cfg.source;
  for (const auto& e : sections["source"]) {
    const auto& k = e.key;
    const auto& v = e.value;
    const int ln = e.line;
    if (k == "kind") {
      if (v != "coherent" && v != "thermal" && v != "multimode" && v != "mb")
        fail(ln, "key 'kind': expected coherent|thermal|multimode|mb, got '" + v + "'");
      src.kind = v;
      source_kind_seen = true;
    } else if (k == "nu0_thz") {
      src.nu0_hz = positive(k, to_double(k, v, ln), ln) * 1e12;
      src.mb.nu0_hz = src.nu0_hz;
    } else if (k == "amplitude_v_per_m") {
      src.amplitude_vpm = non_negative(k, to_double(k, v, ln), ln);
    } else if (k == "bandwidth_thz") {
      src.bandwidth_hz = positive(k, to_double(k, v, ln), ln) * 1e12;
    } else if (k == "n_components") {
      src.n_components = to_int(k, v, ln);
      if (src.n_components < 500) fail(ln, "key 'n_components': thermal model needs >= 500");
    } else if (k == "mode_amplitudes_v_per_m") {
      src.mode_amplitudes_vpm = to_list(k, v, ln);
      for (double a : src.mode_amplitudes_vpm) non_negative(k, a, ln);
    } else if (k == "n_equal_modes") {
      src.n_equal_modes = to_int(k, v, ln);
      if (src.n_equal_modes < 1) fail(ln, "key 'n_equal_modes': must be >= 1");
    } else if (k == "mode_spacing_ghz") {
      src.mode_spacing_hz = positive(k, to_double(k, v, ln), ln) * 1e9;
    } else if (k == "gain_over_threshold") {
      src.gain_over_threshold = positive(k, to_double(k, v, ln), ln);
    } else if (k == "field_scale_v_per_m") {
      src.field_scale_vpm = positive(k, to_double(k, v, ln), ln);
    } else if (k == "duration_ns") {
      src.duration_s = positive(k, to_double(k, v, ln), ln) * 1e-9;
    } else if (k == "transient_ns") {
      src.transient_s = non_negative(k, to_double(k, v, ln), ln) * 1e-9;
    } else if (k == "record_dt_ps") {
      src.record_dt_s = positive(k, to_double(k, v, ln), ln) * 1e-12;
    } else if (k == "dt_ps") {
      src.dt_s = positive(k, to_double(k, v, ln), ln) * 1e-12;
    } else if (k == "tau_coh_ps") {
      src.mb.tau_coh_s = positive(k, to_double(k, v, ln), ln) * 1e-12;
    } else if (k == "tau_up_ps") {
      src.mb.tau_up_s = positive(k, to_double(k, v, ln), ln) * 1e-12;
    } else if (k == "tau_photon_ps") {
      src.mb.tau_photon_s = positive(k, to_double(k, v, ln), ln) * 1e-12;
    } else if (k == "t_roundtrip_ps") {
      src.mb.t_roundtrip_s = positive(k, to_double(k, v, ln), ln) * 1e-12;
    } else if (k == "gvd_fs2_per_mm") {
      src.mb.gvd_s2_per_m = to_double(k, v, ln) * 1e-30 / 1e-3;
    } else if (k == "dispersive_length_mm") {
      src.mb.dispersive_length_per_rt_m = positive(k, to_double(k, v, ln), ln) * 1e-3;
    } else if (k == "z12_nm") {
      src.mb.z12_m = positive(k, to_double(k, v, ln), ln) * 1e-9;
    } else if (k == "sp_ratio") {
      src.mb.sp_ratio = positive(k, to_double(k, v, ln), ln);
    } else if (k == "n_modes") {
      src.mb.n_modes = to_int(k, v, ln);
      if (src.mb.n_modes < 1 || src.mb.n_modes % 2 == 0)
        fail(ln, "key 'n_modes': must be odd and >= 1");
    } else if (k == "xsat_overlap") {
      src.mb.xsat_overlap = to_double(k, v, ln);
      if (src.mb.xsat_overlap < 0 || src.mb.xsat_overlap > 1)
        fail(ln, "key 'xsat_overlap': must be in [0, 1]");
    } else {
      fail(ln, "unknown key '" + k + "' in section [source]");
    }
  }
  if (cfg.has_source && !source_kind_seen)
    throw ConfigError("config: section [source] is missing the required key 'kind'");
  if (src.kind == "multimode") {
    if (!src.mode_amplitudes_vpm.empty() && src.n_equal_modes > 0)
      throw ConfigError(
          "config: give either mode_amplitudes_v_per_m or n_equal_modes, not both");
    if (src.mode_amplitudes_vpm.empty() && src.n_equal_modes == 0)
      throw ConfigError(
          "config: multimode source needs mode_amplitudes_v_per_m or n_equal_modes");
  }
  if (!(src.duration_s > src.transient_s))
    throw ConfigError("config: source duration_ns must exceed transient_ns");

  for (const auto& e : sections["detector"]) {
    const auto& k = e.key;
    const auto& v = e.value;
    const int ln = e.line;
    if (k == "probe_fwhm_fs")
      cfg.detector.probe_fwhm_s = positive(k, to_double(k, v, ln), ln) * 1e-15;
    else if (k == "f_rep_mhz")
      cfg.detector.f_rep_hz = positive(k, to_double(k, v, ln), ln) * 1e6;
    else if (k == "nef_v_per_m")
      cfg.detector.nef_vpm = non_negative(k, to_double(k, v, ln), ln);
    else if (k == "mod_period_pulses")
      cfg.detector.mod_period_pulses = static_cast<std::uint32_t>(to_u64(k, v, ln));
    else if (k == "duty_on_pulses")
      cfg.detector.duty_on_pulses = static_cast<std::uint32_t>(to_u64(k, v, ln));
    else
      fail(ln, "unknown key '" + k + "' in section [detector]");
  }
  try {
    cfg.detector.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  for (const auto& e : sections["correlator"]) {
    const auto& k = e.key;
    const auto& v = e.value;
    const int ln = e.line;
    if (k == "tau_min_fs")
      cfg.correlator.tau_min_s = to_double(k, v, ln) * 1e-15;
    else if (k == "tau_max_fs")
      cfg.correlator.tau_max_s = to_double(k, v, ln) * 1e-15;
    else if (k == "tau_step_fs")
      cfg.correlator.tau_step_s = positive(k, to_double(k, v, ln), ln) * 1e-15;
    else if (k == "n_pulses_per_tau") {
      cfg.correlator.n_pulses_per_tau = to_u64(k, v, ln);
      if (cfg.correlator.n_pulses_per_tau == 0)
        fail(ln, "key 'n_pulses_per_tau': must be >= 1");
    } else if (k == "envelope_cycles")
      cfg.correlator.envelope_cycles = positive(k, to_double(k, v, ln), ln);
    else if (k == "variance_floor_eps")
      cfg.correlator.variance_floor_eps = non_negative(k, to_double(k, v, ln), ln);
    else
      fail(ln, "unknown key '" + k + "' in section [correlator]");
  }
  if (!(cfg.correlator.tau_max_s > cfg.correlator.tau_min_s))
    throw ConfigError("config: tau_max_fs must exceed tau_min_fs");

  for (const auto& e : sections["sweep"]) {
    const auto& k = e.key;
    const auto& v = e.value;
    const int ln = e.line;
    if (k == "gains_over_threshold") {
      cfg.sweep.gains_over_threshold = to_list(k, v, ln);
      for (double g : cfg.sweep.gains_over_threshold) positive(k, g, ln);
      if (!std::is_sorted(cfg.sweep.gains_over_threshold.begin(),
                          cfg.sweep.gains_over_threshold.end()))
        fail(ln, "key 'gains_over_threshold': must be sorted ascending");
    } else if (k == "i_threshold_ma")
      cfg.sweep.i_threshold_ma = positive(k, to_double(k, v, ln), ln);
    else if (k == "duration_ns")
      cfg.sweep.duration_s = positive(k, to_double(k, v, ln), ln) * 1e-9;
    else if (k == "transient_ns")
      cfg.sweep.transient_s = non_negative(k, to_double(k, v, ln), ln) * 1e-9;
    else if (k == "record_dt_ps")
      cfg.sweep.record_dt_s = positive(k, to_double(k, v, ln), ln) * 1e-12;
    else if (k == "dt_ps")
      cfg.sweep.dt_s = positive(k, to_double(k, v, ln), ln) * 1e-12;
    else if (k == "pipeline")
      cfg.sweep.pipeline = to_bool(k, v, ln);
    else if (k == "pipeline_nef_v_per_m")
      cfg.sweep.pipeline_nef_vpm = non_negative(k, to_double(k, v, ln), ln);
    else if (k == "pipeline_n_pulses") {
      cfg.sweep.pipeline_n_pulses = to_u64(k, v, ln);
      if (cfg.sweep.pipeline_n_pulses == 0) fail(ln, "key 'pipeline_n_pulses': must be >= 1");
    } else if (k == "pipeline_tau_span_fs")
      cfg.sweep.pipeline_tau_span_s = positive(k, to_double(k, v, ln), ln) * 1e-15;
    else if (k == "pipeline_tau_step_fs")
      cfg.sweep.pipeline_tau_step_s = positive(k, to_double(k, v, ln), ln) * 1e-15;
    else if (k == "field_scale_v_per_m")
      cfg.sweep.field_scale_vpm = positive(k, to_double(k, v, ln), ln);
    else
      fail(ln, "unknown key '" + k + "' in section [sweep]");
  }
  if (!(cfg.sweep.duration_s > cfg.sweep.transient_s))
    throw ConfigError("config: sweep duration_ns must exceed transient_ns");

  for (const auto& e : sections["output"]) {
    const auto& k = e.key;
    if (k == "directory")
      cfg.output.directory = e.value;
    else if (k == "write_eosc")
      cfg.output.write_eosc = to_bool(k, e.value, e.line);
    else
      fail(e.line, "unknown key '" + k + "' in section [output]");
  }

  try {
    cfg.source.mb.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("config: cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

namespace {

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

std::string echo_config(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "master_seed = " << c.master_seed << "\n\n";
  if (c.has_source) {
    const auto& s = c.source;
    os << "[source]\n";
    os << "kind = " << s.kind << "\n";
    os << "nu0_thz = " << fmt(s.nu0_hz * 1e-12) << "\n";
    if (s.kind == "coherent" || s.kind == "thermal")
      os << "amplitude_v_per_m = " << fmt(s.amplitude_vpm) << "\n";
    if (s.kind == "thermal") {
      os << "bandwidth_thz = " << fmt(s.bandwidth_hz * 1e-12) << "\n";
      os << "n_components = " << s.n_components << "\n";
    }
    if (s.kind == "multimode") {
      if (s.n_equal_modes > 0) {
        os << "n_equal_modes = " << s.n_equal_modes << "\n";
        os << "amplitude_v_per_m = " << fmt(s.amplitude_vpm) << "\n";
      } else {
        os << "mode_amplitudes_v_per_m = ";
        for (std::size_t i = 0; i < s.mode_amplitudes_vpm.size(); ++i)
          os << (i ? ", " : "") << fmt(s.mode_amplitudes_vpm[i]);
        os << "\n";
      }
      os << "mode_spacing_ghz = " << fmt(s.mode_spacing_hz * 1e-9) << "\n";
    }
    if (s.kind == "mb") {
      os << "gain_over_threshold = " << fmt(s.gain_over_threshold) << "\n";
      os << "field_scale_v_per_m = " << fmt(s.field_scale_vpm) << "\n";
      os << "duration_ns = " << fmt(s.duration_s * 1e9) << "\n";
      os << "transient_ns = " << fmt(s.transient_s * 1e9) << "\n";
      os << "record_dt_ps = " << fmt(s.record_dt_s * 1e12) << "\n";
      os << "dt_ps = " << fmt(s.dt_s * 1e12) << "\n";
      os << "tau_coh_ps = " << fmt(s.mb.tau_coh_s * 1e12) << "\n";
      os << "tau_up_ps = " << fmt(s.mb.tau_up_s * 1e12) << "\n";
      os << "tau_photon_ps = " << fmt(s.mb.tau_photon_s * 1e12) << "\n";
      os << "t_roundtrip_ps = " << fmt(s.mb.t_roundtrip_s * 1e12) << "\n";
      os << "gvd_fs2_per_mm = " << fmt(s.mb.gvd_s2_per_m * 1e30 * 1e-3) << "\n";
      os << "dispersive_length_mm = " << fmt(s.mb.dispersive_length_per_rt_m * 1e3) << "\n";
      os << "z12_nm = " << fmt(s.mb.z12_m * 1e9) << "\n";
      os << "sp_ratio = " << fmt(s.mb.sp_ratio) << "\n";
      os << "n_modes = " << s.mb.n_modes << "\n";
      os << "xsat_overlap = " << fmt(s.mb.xsat_overlap) << "\n";
    }
    os << "\n";
  }
  os << "[detector]\n";
  os << "probe_fwhm_fs = " << fmt(c.detector.probe_fwhm_s * 1e15) << "\n";
  os << "f_rep_mhz = " << fmt(c.detector.f_rep_hz * 1e-6) << "\n";
  os << "nef_v_per_m = " << fmt(c.detector.nef_vpm) << "\n";
  os << "mod_period_pulses = " << c.detector.mod_period_pulses << "\n";
  os << "duty_on_pulses = " << c.detector.duty_on_pulses << "\n\n";
  os << "[correlator]\n";
  os << "tau_min_fs = " << fmt(c.correlator.tau_min_s * 1e15) << "\n";
  os << "tau_max_fs = " << fmt(c.correlator.tau_max_s * 1e15) << "\n";
  os << "tau_step_fs = " << fmt(c.correlator.tau_step_s * 1e15) << "\n";
  os << "n_pulses_per_tau = " << c.correlator.n_pulses_per_tau << "\n";
  os << "envelope_cycles = " << fmt(c.correlator.envelope_cycles) << "\n";
  os << "variance_floor_eps = " << fmt(c.correlator.variance_floor_eps) << "\n\n";
  if (c.has_sweep) {
    const auto& w = c.sweep;
    os << "[sweep]\n";
    os << "gains_over_threshold = ";
    for (std::size_t i = 0; i < w.gains_over_threshold.size(); ++i)
      os << (i ? ", " : "") << fmt(w.gains_over_threshold[i]);
    os << "\n";
    os << "i_threshold_ma = " << fmt(w.i_threshold_ma) << "\n";
    os << "duration_ns = " << fmt(w.duration_s * 1e9) << "\n";
    os << "transient_ns = " << fmt(w.transient_s * 1e9) << "\n";
    os << "record_dt_ps = " << fmt(w.record_dt_s * 1e12) << "\n";
    os << "dt_ps = " << fmt(w.dt_s * 1e12) << "\n";
    os << "pipeline = " << (w.pipeline ? "true" : "false") << "\n";
    os << "pipeline_nef_v_per_m = " << fmt(w.pipeline_nef_vpm) << "\n";
    os << "pipeline_n_pulses = " << w.pipeline_n_pulses << "\n";
    os << "pipeline_tau_span_fs = " << fmt(w.pipeline_tau_span_s * 1e15) << "\n";
    os << "pipeline_tau_step_fs = " << fmt(w.pipeline_tau_step_s * 1e15) << "\n";
    os << "pipeline_envelope_cycles = " << fmt(w.pipeline_envelope_cycles) << "\n";
    os << "field_scale_v_per_m = " << fmt(w.field_scale_vpm) << "\n\n";
  }
  os << "[output]\n";
  os << "directory = " << c.output.directory << "\n";
  os << "write_eosc = " << (c.output.write_eosc ? "true" : "false") << "\n";
  return os.str();
}

}  // namespace eoscorr
