#include "eoscorr/eosc_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

#include "eoscorr/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "EOSC I/O assumes a little-endian host");

namespace eoscorr {

namespace {

constexpr char kMagic[4] = {'E', 'O', 'S', 'C'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is, const std::string& name) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw IoError("EOSC: truncated file: " + name);
  return v;
}

}  // namespace

void write_eosc(std::ostream& os, const PulseSampleStream& s) {
  os.write(kMagic, 4);
  put<std::uint32_t>(os, kVersion);
  put<double>(os, s.detector.f_rep_hz);
  put<std::uint32_t>(os, s.detector.mod_period_pulses);
  put<std::uint32_t>(os, s.detector.duty_on_pulses);
  put<double>(os, s.tau_s);
  put<std::uint64_t>(os, s.n_pulses());
  std::vector<float> buf(2 * s.n_pulses());
  for (std::uint64_t i = 0; i < s.n_pulses(); ++i) {
    buf[2 * i] = static_cast<float>(s.x[i]);
    buf[2 * i + 1] = static_cast<float>(s.y[i]);
  }
  os.write(reinterpret_cast<const char*>(buf.data()),
           static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!os) throw IoError("EOSC: write failed");
}

void write_eosc(const std::string& path, const PulseSampleStream& s) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("EOSC: cannot open for writing: " + path);
  write_eosc(os, s);
}

PulseSampleStream read_eosc(std::istream& is, const std::string& name) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw IoError("EOSC: bad magic in " + name);
  const auto version = get<std::uint32_t>(is, name);
  if (version != kVersion)
    throw IoError("EOSC: unsupported version " + std::to_string(version) + " in " + name);

  PulseSampleStream s;
  s.detector.f_rep_hz = get<double>(is, name);
  s.detector.mod_period_pulses = get<std::uint32_t>(is, name);
  s.detector.duty_on_pulses = get<std::uint32_t>(is, name);
  s.tau_s = get<double>(is, name);
  const auto n = get<std::uint64_t>(is, name);
  s.detector.validate();
  s.stream_label = name;

  std::vector<float> buf(2 * n);
  is.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!is) throw IoError("EOSC: truncated sample block in " + name);
  s.x.resize(n);
  s.y.resize(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    s.x[i] = buf[2 * i];
    s.y[i] = buf[2 * i + 1];
  }
  return s;
}

PulseSampleStream read_eosc(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("EOSC: cannot open: " + path);
  return read_eosc(is, path);
}

}  // namespace eoscorr
