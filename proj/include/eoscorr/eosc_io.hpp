#pragma once

#include <iosfwd>
#include <string>

#include "eoscorr/eos_frontend.hpp"

namespace eoscorr {

// "EOSC v1" pulse-stream container, little-endian:
//   magic "EOSC" | u32 version = 1 | f64 f_rep_hz | u32 mod_period_pulses |
//   u32 duty_on_pulses | f64 tau_seconds | u64 n_pulses |
//   n_pulses x (f32 x_vpm, f32 y_vpm) interleaved.
// Readers reject unknown versions.

void write_eosc(std::ostream& os, const PulseSampleStream& stream);
void write_eosc(const std::string& path, const PulseSampleStream& stream);

PulseSampleStream read_eosc(std::istream& is, const std::string& name = "<stream>");
PulseSampleStream read_eosc(const std::string& path);

}  // namespace eoscorr
