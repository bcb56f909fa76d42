#pragma once

#include <array>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "wkg/errors.hpp"
#include "wkg/grid.hpp"
#include "wkg/littlewood_paley.hpp"
#include "wkg/system.hpp"

namespace wkg {

enum class DataFamily { gaussian, radial_bump, modes };

enum class DataField { u, u_t, v, v_t };

inline DataFamily parse_family(const std::string& s) {
  if (s == "gaussian") return DataFamily::gaussian;
  if (s == "radial_bump" || s == "chi") return DataFamily::radial_bump;
  if (s == "modes") return DataFamily::modes;
  throw ConfigError("unknown initial-data family '" + s + "' (expected gaussian, radial_bump, modes)");
}

inline DataField parse_field(const std::string& s) {
  if (s == "u") return DataField::u;
  if (s == "u_t" || s == "ut") return DataField::u_t;
  if (s == "v") return DataField::v;
  if (s == "v_t" || s == "vt") return DataField::v_t;
  throw ConfigError("unknown data field '" + s + "' (expected u, u_t, v, v_t)");
}

inline const char* to_string(DataFamily f) {
  switch (f) {
    case DataFamily::gaussian: return "gaussian";
    case DataFamily::radial_bump: return "radial_bump";
    default: return "modes";
  }
}

inline const char* to_string(DataField f) {
  switch (f) {
    case DataField::u: return "u";
    case DataField::u_t: return "u_t";
    case DataField::v: return "v";
    default: return "v_t";
  }
}

/// chi(r) = 1 for r <= 1, 0 for r >= 2, smooth and monotone in between.
inline double chi_profile(double r) { return lp::smooth_step(2.0 - std::abs(r)); }

/// One localized bump: amplitude * exp(-|x-c|^2 / (2 width^2)) or amplitude * chi(|x-c| / width).
struct BumpComponent {
  DataField field = DataField::v;
  double amplitude = 1.0;
  Vec3 center{0.0, 0.0, 0.0};
  double width = 1.0;
};

/// amplitude * cos(x . xi_m) + ... as the real part of amplitude * e^{i x . xi_m}.
struct ModeComponent {
  DataField field = DataField::v;
  std::array<int, 3> mode{1, 0, 0};
  Complex amplitude{1.0, 0.0};
};

struct InitialDataSpec {
  DataFamily family = DataFamily::gaussian;
  double eps0 = 1e-3;
  std::vector<BumpComponent> bumps;
  std::vector<ModeComponent> modes;

  /// Radius of the ball that carries the data: |c| + 2 width for bumps.
  double data_radius() const {
    double r = 0.0;
    for (const auto& b : bumps) r = std::max(r, norm3(b.center) + 2.0 * b.width);
    return r;
  }

  void validate() const {
    if (!(eps0 >= 0.0) || !std::isfinite(eps0)) throw ConfigError("eps0 must be a non-negative number");
    if (family == DataFamily::modes) {
      if (modes.empty()) throw ConfigError("mode-list data needs at least one mode");
    } else {
      if (bumps.empty()) throw ConfigError("bump data needs at least one component");
      for (const auto& b : bumps)
        if (!(b.width > 0.0)) throw ConfigError("bump width must be positive");
    }
  }
};

struct InitialData {
  PhysicalState physical;
  ProfileState state;
  double max_boundary_mass = 0.0;
};

/// Physical data and the t = 0 profiles V(0) = U(0), Nyquist plane zeroed. Bump data whose fields reach the outer two cells of
/// the box are rejected; mode lists are periodic by construction and skip the check.
inline InitialData make_initial_data(const SpectralGrid& g, const InitialDataSpec& spec) {
  spec.validate();
  InitialData out;
  PhysicalState& p = out.physical;
  for (RealField* f : {&p.u, &p.u_t, &p.v, &p.v_t}) f->assign(g.size(), 0.0);
  auto target = [&](DataField f) -> RealField& {
    switch (f) {
      case DataField::u: return p.u;
      case DataField::u_t: return p.u_t;
      case DataField::v: return p.v;
      default: return p.v_t;
    }
  };
  if (spec.family == DataFamily::modes) {
    for (const auto& m : spec.modes) {
      Vec3 xi{0.0, 0.0, 0.0};
      for (int d = 0; d < g.dim(); ++d) {
        if (std::abs(m.mode[d]) >= static_cast<int>(g.n() / 2))
          throw ConfigError("data mode lies on or beyond the Nyquist plane");
        xi[d] = g.wavenumber_step() * m.mode[d];
      }
      RealField& f = target(m.field);
      for (std::size_t i = 0; i < g.size(); ++i) {
        const Vec3 x = g.position(i);
        const double arg = x[0] * xi[0] + x[1] * xi[1] + x[2] * xi[2];
        f[i] += spec.eps0 * (m.amplitude * Complex(std::cos(arg), std::sin(arg))).real();
      }
    }
  } else {
    for (const auto& b : spec.bumps) {
      RealField& f = target(b.field);
      for (std::size_t i = 0; i < g.size(); ++i) {
        const Vec3 x = g.position(i);
        const Vec3 d{x[0] - b.center[0], x[1] - b.center[1], x[2] - b.center[2]};
        const double r = norm3(d);
        const double shape = spec.family == DataFamily::gaussian ? std::exp(-0.5 * r * r / (b.width * b.width))
                                                                 : chi_profile(r / b.width);
        f[i] += spec.eps0 * b.amplitude * shape;
      }
    }
    for (const RealField* f : {&p.u, &p.u_t, &p.v, &p.v_t}) {
      const ComplexField c(f->begin(), f->end());
      const double mass = relative_boundary_mass(g, c);
      out.max_boundary_mass = std::max(out.max_boundary_mass, mass);
      if (mass >= kContainmentTolerance) {
        std::ostringstream msg;
        msg << "initial data reaches within two cells of the box boundary (relative mass " << mass
            << "); enlarge the box or shrink the data";
        throw ConfigError(msg.str());
      }
    }
  }
  auto U = to_normalized(g, p);
  for (std::size_t i = 0; i < g.size(); ++i)
    if (g.nyquist(i)) U.U_wa[i] = U.U_kg[i] = 0.0;
  out.state.V_wa = std::move(U.U_wa);
  out.state.V_kg = std::move(U.U_kg);
  out.state.t = 0.0;
  return out;
}

}  // namespace wkg
