#pragma once

// Binary profile snapshots.
//
// Layout (little-endian):
//   char[4]  "WKGS"
//   u32      format version (1)
//   u32      dim
//   u64      n
//   f64      L
//   f64      t
//   u64      count = n^dim
//   f64[2 count]  V^wa (re, im interleaved)
//   f64[2 count]  V^kg
//   u32      has_theta (0 or 1)
//   if has_theta:  f64 theta_t, f64 p, f64[count] Theta
//
// Doubles are stored bit-exactly, so a run resumed from a snapshot continues
// from the same state it would have had without the stop.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include "wkg/errors.hpp"
#include "wkg/grid.hpp"
#include "wkg/scattering.hpp"
#include "wkg/system.hpp"

namespace wkg {

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

struct Snapshot {
  int dim = 3;
  std::size_t n = 0;
  double L = 0.0;
  ProfileState state;
  std::optional<ThetaField> theta;
};

namespace detail {

inline constexpr char kSnapshotMagic[4] = {'W', 'K', 'G', 'S'};
inline constexpr std::uint32_t kSnapshotVersion = 1;

template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is, const std::string& path) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw ConfigError("snapshot " + path + " is truncated");
  return v;
}

inline void put_complex(std::ostream& os, const ComplexField& f) {
  os.write(reinterpret_cast<const char*>(f.data()), static_cast<std::streamsize>(f.size() * sizeof(Complex)));
}

inline ComplexField get_complex(std::istream& is, std::size_t count, const std::string& path) {
  ComplexField f(count);
  if (!is.read(reinterpret_cast<char*>(f.data()), static_cast<std::streamsize>(count * sizeof(Complex))))
    throw ConfigError("snapshot " + path + " is truncated");
  return f;
}

}  // namespace detail

inline void write_snapshot(const std::filesystem::path& path, const SpectralGrid& g, const ProfileState& s,
                           const ThetaField* theta = nullptr) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ConfigError("cannot open snapshot file " + path.string() + " for writing");
  os.write(detail::kSnapshotMagic, 4);
  detail::put(os, detail::kSnapshotVersion);
  detail::put(os, static_cast<std::uint32_t>(g.dim()));
  detail::put(os, static_cast<std::uint64_t>(g.n()));
  detail::put(os, g.box_length());
  detail::put(os, s.t);
  detail::put(os, static_cast<std::uint64_t>(g.size()));
  detail::put_complex(os, s.V_wa);
  detail::put_complex(os, s.V_kg);
  detail::put(os, static_cast<std::uint32_t>(theta != nullptr));
  if (theta != nullptr) {
    detail::put(os, theta->t);
    detail::put(os, theta->p);
    os.write(reinterpret_cast<const char*>(theta->theta.data()),
             static_cast<std::streamsize>(theta->theta.size() * sizeof(double)));
  }
  if (!os) throw ConfigError("failed writing snapshot " + path.string());
}

inline Snapshot read_snapshot(const std::filesystem::path& path) {
  const std::string p = path.string();
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open snapshot " + p);
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, detail::kSnapshotMagic, 4) != 0)
    throw ConfigError(p + " is not a wkg snapshot");
  if (detail::get<std::uint32_t>(is, p) != detail::kSnapshotVersion)
    throw ConfigError("snapshot " + p + " has an unsupported format version");
  Snapshot s;
  s.dim = static_cast<int>(detail::get<std::uint32_t>(is, p));
  s.n = detail::get<std::uint64_t>(is, p);
  s.L = detail::get<double>(is, p);
  s.state.t = detail::get<double>(is, p);
  const auto count = detail::get<std::uint64_t>(is, p);
  std::uint64_t expect = 1;
  for (int d = 0; d < s.dim; ++d) expect *= s.n;
  if ((s.dim != 1 && s.dim != 3) || count != expect) throw ConfigError("snapshot " + p + " has an inconsistent header");
  s.state.V_wa = detail::get_complex(is, count, p);
  s.state.V_kg = detail::get_complex(is, count, p);
  const auto has_theta = detail::get<std::uint32_t>(is, p);
  if (has_theta > 1) throw ConfigError("snapshot " + p + " has a corrupt theta flag");
  if (has_theta == 1) {
    ThetaField th;
    th.t = detail::get<double>(is, p);
    th.p = detail::get<double>(is, p);
    th.theta.resize(count);
    if (!is.read(reinterpret_cast<char*>(th.theta.data()), static_cast<std::streamsize>(count * sizeof(double))))
      throw ConfigError("snapshot " + p + " is truncated");
    s.theta = std::move(th);
  }
  is.peek();
  if (!is.eof()) throw ConfigError("snapshot " + p + " has trailing bytes");
  return s;
}

/// Throws unless the snapshot was written on a grid of the same shape.
inline void require_same_grid(const Snapshot& s, const SpectralGrid& g) {
  if (s.dim != g.dim() || s.n != g.n() || s.L != g.box_length())
    throw ConfigError("snapshot grid does not match the configured grid");
}

}  // namespace wkg
