#pragma once

#include <iosfwd>
#include <string>

namespace eoscorr {

// Conversions between detected field amplitude, photon number in the probe
// window, CW power, and the cavity field scales of the modal model.
struct BudgetParams {
  double nu_hz = 2.3e12;
  double delta_t_s = 146e-15;       // detection window
  double mode_area_m2 = 4.6e-7;     // calibrated so 90 V/m <-> ~1500 photons
  double refr_index = 3.17;
  double eps_r = 12.9;
  double cavity_volume_m3 = 150e-6 * 1000e-6 * 16.6e-6;  // ridge dimensions

  void validate() const;
};

// Photons in the detection window for a sinusoid of peak amplitude E_amp:
// N = c eps0 n E^2 A dt / (2 h nu)  (propagating energy flux / photon energy).
double photons_in_window(double e_amp_vpm, const BudgetParams& p);

// Equivalent CW power P = N h nu / delta_t.
double cw_power_w(double n_photons, double nu_hz, double delta_t_s);

// RMS field of a single photon in the cavity volume:
// A = sqrt(h nu / (2 eps0 eps_r V)).
double single_photon_field_vpm(double nu_hz, const BudgetParams& p);

// Saturation field of the two-level medium: E_sat = hbar / (e z12 sqrt(tau_up tau_coh)).
double saturation_field_vpm(double z12_m, double tau_up_s, double tau_coh_s);

// Labeled table (text) and JSON object of all budget quantities for a given
// detected field amplitude.
void print_budget_table(std::ostream& os, double e_amp_vpm, const BudgetParams& p,
                        double z12_m, double tau_up_s, double tau_coh_s);
std::string budget_json(double e_amp_vpm, const BudgetParams& p, double z12_m,
                        double tau_up_s, double tau_coh_s);

}  // namespace eoscorr
