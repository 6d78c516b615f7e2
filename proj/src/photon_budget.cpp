#include "eoscorr/photon_budget.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include <json.hpp>

#include "eoscorr/constants.hpp"
#include "eoscorr/errors.hpp"

namespace eoscorr {

void BudgetParams::validate() const {
  if (nu_hz <= 0 || delta_t_s <= 0 || mode_area_m2 <= 0 || refr_index <= 0 || eps_r <= 0 ||
      cavity_volume_m3 <= 0)
    throw ConfigError("budget: all parameters must be strictly positive");
}

double photons_in_window(double e_amp_vpm, const BudgetParams& p) {
  p.validate();
  if (e_amp_vpm < 0) throw NumericalError("photons_in_window: field must be >= 0");
  // E_amp is the sinusoid peak amplitude, hence the factor 1/2 in intensity.
  const double intensity = 0.5 * kConst.c * kConst.eps0 * p.refr_index * e_amp_vpm * e_amp_vpm;
  return intensity * p.mode_area_m2 * p.delta_t_s / (kConst.h * p.nu_hz);
}

double cw_power_w(double n_photons, double nu_hz, double delta_t_s) {
  if (n_photons < 0) throw NumericalError("cw_power: photon number must be >= 0");
  return n_photons * kConst.h * nu_hz / delta_t_s;
}

double single_photon_field_vpm(double nu_hz, const BudgetParams& p) {
  p.validate();
  return std::sqrt(kConst.h * nu_hz / (2.0 * kConst.eps0 * p.eps_r * p.cavity_volume_m3));
}

double saturation_field_vpm(double z12_m, double tau_up_s, double tau_coh_s) {
  if (z12_m <= 0 || tau_up_s <= 0 || tau_coh_s <= 0)
    throw NumericalError("saturation_field: arguments must be positive");
  return kConst.hbar / (kConst.e_charge * z12_m * std::sqrt(tau_up_s * tau_coh_s));
}

namespace {

struct BudgetRows {
  double n_photons, p_cw_w, a_sp, e_sat, ratio;
};

BudgetRows compute(double e_amp_vpm, const BudgetParams& p, double z12_m, double tau_up_s,
                   double tau_coh_s) {
  BudgetRows r{};
  r.n_photons = photons_in_window(e_amp_vpm, p);
  r.p_cw_w = cw_power_w(r.n_photons, p.nu_hz, p.delta_t_s);
  r.a_sp = single_photon_field_vpm(p.nu_hz, p);
  r.e_sat = saturation_field_vpm(z12_m, tau_up_s, tau_coh_s);
  r.ratio = r.a_sp / r.e_sat;
  return r;
}

}  // namespace

void print_budget_table(std::ostream& os, double e_amp_vpm, const BudgetParams& p,
                        double z12_m, double tau_up_s, double tau_coh_s) {
  const BudgetRows r = compute(e_amp_vpm, p, z12_m, tau_up_s, tau_coh_s);
  char buf[128];
  auto row = [&](const char* label, double value, const char* unit) {
    std::snprintf(buf, sizeof(buf), "  %-34s %14.6g %s\n", label, value, unit);
    os << buf;
  };
  os << "photon budget\n";
  row("center frequency", p.nu_hz * 1e-12, "THz");
  row("detection window", p.delta_t_s * 1e15, "fs");
  row("detected field amplitude", e_amp_vpm, "V/m");
  row("photons in window", r.n_photons, "");
  row("equivalent CW power", r.p_cw_w * 1e6, "uW");
  row("single-photon cavity field", r.a_sp, "V/m");
  row("saturation field", r.e_sat, "V/m");
  row("single-photon / saturation ratio", r.ratio, "");
}

std::string budget_json(double e_amp_vpm, const BudgetParams& p, double z12_m,
                        double tau_up_s, double tau_coh_s) {
  const BudgetRows r = compute(e_amp_vpm, p, z12_m, tau_up_s, tau_coh_s);
  nlohmann::json j;
  j["nu_thz"] = p.nu_hz * 1e-12;
  j["delta_t_fs"] = p.delta_t_s * 1e15;
  j["mode_area_m2"] = p.mode_area_m2;
  j["refr_index"] = p.refr_index;
  j["eps_r"] = p.eps_r;
  j["cavity_volume_m3"] = p.cavity_volume_m3;
  j["field_v_per_m"] = e_amp_vpm;
  j["photons_in_window"] = r.n_photons;
  j["cw_power_uw"] = r.p_cw_w * 1e6;
  j["single_photon_field_v_per_m"] = r.a_sp;
  j["saturation_field_v_per_m"] = r.e_sat;
  j["sp_to_sat_ratio"] = r.ratio;
  return j.dump(2);
}

}  // namespace eoscorr
