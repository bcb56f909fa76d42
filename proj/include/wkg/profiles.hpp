#pragma once

// Profile calculus: xi-derivatives (multiplication by x on the physical side),
// rotations, the boost identity for normalized variables, and the weighted
// profile norms with their dyadic weights.

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "wkg/errors.hpp"
#include "wkg/grid.hpp"
#include "wkg/integrator.hpp"
#include "wkg/littlewood_paley.hpp"
#include "wkg/params.hpp"
#include "wkg/system.hpp"

namespace wkg {

/// Multiply a physical field by x_l (centered coordinates).
inline ComplexField multiply_by_x(const SpectralGrid& g, const ComplexField& phys, int l) {
  ComplexField out(g.size());
  for (std::size_t idx = 0; idx < g.size(); ++idx) out[idx] = g.position(idx)[l] * phys[idx];
  return out;
}

/// d/dxi_l of a spectral field, computed as F{-i x_l F^{-1} V}. No containment check.
inline ComplexField xi_derivative_unchecked(const SpectralGrid& g, const ComplexField& V_hat, int l) {
  ComplexField phys = g.inverse(V_hat);
  for (std::size_t idx = 0; idx < g.size(); ++idx) phys[idx] *= Complex(0.0, -g.position(idx)[l]);
  g.forward_inplace(phys);
  return phys;
}

/// d/dxi_l with the support-containment precondition enforced.
inline ComplexField xi_derivative(const SpectralGrid& g, const ComplexField& V_hat, int l) {
  if (l < 0 || l >= g.dim()) throw ConfigError("xi-derivative direction out of range");
  const ComplexField phys = g.inverse(V_hat);
  require_contained(g, phys, "xi_derivative");
  ComplexField out(g.size());
  for (std::size_t idx = 0; idx < g.size(); ++idx) out[idx] = Complex(0.0, -g.position(idx)[l]) * phys[idx];
  g.forward_inplace(out);
  return out;
}

/// Omega_{jk} f = x_j d_k f - x_k d_j f on a physical field (3D only).
inline ComplexField rotation_apply_unchecked(const SpectralGrid& g, const ComplexField& phys, int j, int k) {
  const ComplexField f_hat = g.forward(phys);
  const ComplexField dk = g.inverse(spectral_derivative(g, f_hat, k));
  const ComplexField dj = g.inverse(spectral_derivative(g, f_hat, j));
  ComplexField out(g.size());
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    const Vec3 x = g.position(idx);
    out[idx] = x[j] * dk[idx] - x[k] * dj[idx];
  }
  return out;
}

inline ComplexField rotation_apply(const SpectralGrid& g, const ComplexField& phys, int j, int k) {
  if (g.dim() != 3) throw ConfigError("rotations need a 3D grid");
  if (j < 0 || j > 2 || k < 0 || k > 2) throw ConfigError("rotation indices must lie in {0,1,2}");
  require_contained(g, phys, "rotation_apply");
  return rotation_apply_unchecked(g, phys, j, k);
}

/// Omega applied to a profile given spectrally; spectral result.
inline ComplexField rotate_profile(const SpectralGrid& g, const ComplexField& V_hat, int j, int k) {
  return g.forward(rotation_apply(g, g.inverse(V_hat), j, k));
}

// ---- boost identity ------------------------------------------------------

struct ChannelResidual {
  double wa = 0.0;
  double kg = 0.0;
  double wa_boundary_mass = 0.0;  ///< relative boundary mass of U^wa(t); above 1e-8 the wave value is box-limited
  double kg_boundary_mass = 0.0;
  double max() const noexcept { return std::max(wa, kg); }
};

namespace detail {

// Relative L^2 mismatch over the non-Nyquist modes.
inline double relative_l2(const SpectralGrid& g, const ComplexField& lhs, const ComplexField& rhs) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    if (g.nyquist(i)) continue;
    num += std::norm(lhs[i] - rhs[i]);
    den += std::norm(lhs[i]);
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

// Fourier transform of Gamma_l U = x_l d_t U + t d_l U, given U^ and (d_t U)^.
inline ComplexField boost_hat(const SpectralGrid& g, const ComplexField& U_hat, const ComplexField& Ut_hat, int l,
                              double t) {
  ComplexField xut = multiply_by_x(g, g.inverse(Ut_hat), l);
  g.forward_inplace(xut);
  const ComplexField dU = spectral_derivative(g, U_hat, l);
  for (std::size_t i = 0; i < g.size(); ++i) xut[i] += t * dU[i];
  return xut;
}

// i d_xi N^ + e^{-it Lambda} d_xi (Lambda V^).
inline ComplexField boost_rhs(const SpectralGrid& g, const ComplexField& N_hat, const ComplexField& V_hat,
                              Dispersion disp, int l, double t) {
  ComplexField lv(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) lv[i] = g.nyquist(i) ? Complex(0.0) : g.lambda(disp, i) * V_hat[i];
  const ComplexField d_lv = propagate(g, xi_derivative_unchecked(g, lv, l), disp, t);
  ComplexField out = xi_derivative_unchecked(g, N_hat, l);
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = Complex(0.0, 1.0) * out[i] + d_lv[i];
  return out;
}

inline void record_boundary_mass(const SpectralGrid& g, const NormalizedFields& U, ChannelResidual& r) {
  r.wa_boundary_mass = relative_boundary_mass(g, g.inverse(U.U_wa));
  r.kg_boundary_mass = relative_boundary_mass(g, g.inverse(U.U_kg));
}

}  // namespace detail

/// Relative L^2 mismatch of the boost identity for direction l, with d_t U taken
/// from the equation: d_t U = N - i Lambda U.
inline ChannelResidual gamma_identity_residual(const WkgSystem& sys, const ProfileState& s, int l) {
  const SpectralGrid& g = sys.grid();
  const auto U = unprofile(g, s);
  const auto N = sys.nonlinearity(U.U_wa, U.U_kg);
  ChannelResidual r;
  detail::record_boundary_mass(g, U, r);
  auto channel = [&](const ComplexField& Uc, const ComplexField& Nc, const ComplexField& Vc, Dispersion disp) {
    ComplexField Ut(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
      Ut[i] = g.nyquist(i) ? Complex(0.0) : Nc[i] - Complex(0.0, g.lambda(disp, i)) * Uc[i];
    return detail::relative_l2(g, detail::boost_hat(g, Uc, Ut, l, s.t), detail::boost_rhs(g, Nc, Vc, disp, l, s.t));
  };
  r.wa = channel(U.U_wa, N.wa, s.V_wa, Dispersion::wave);
  r.kg = channel(U.U_kg, N.kg, s.V_kg, Dispersion::klein_gordon);
  return r;
}

/// Same identity with d_t U from a fourth-order centered difference of five
/// equally spaced stepped profiles (t - 2h .. t + 2h); the middle one is evaluated.
inline ChannelResidual gamma_identity_residual_fd(const WkgSystem& sys, std::span<const ProfileState> window, int l) {
  if (window.size() != 5) throw ConfigError("finite-difference boost residual needs five profiles");
  const SpectralGrid& g = sys.grid();
  const ProfileState& s = window[2];
  const double h = window[3].t - window[2].t;
  if (!(h > 0.0)) throw ConfigError("profiles must be increasing in time");
  const auto U = unprofile(g, s);
  const auto N = sys.nonlinearity(U.U_wa, U.U_kg);
  auto channel = [&](auto member, const ComplexField& Uc, const ComplexField& Nc, Dispersion disp) {
    const ComplexField& vm2 = window[0].*member;
    const ComplexField& vm1 = window[1].*member;
    const ComplexField& vp1 = window[3].*member;
    const ComplexField& vp2 = window[4].*member;
    const ComplexField& v0 = s.*member;
    ComplexField Vt(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) Vt[i] = (-vp2[i] + 8.0 * vp1[i] - 8.0 * vm1[i] + vm2[i]) / (12.0 * h);
    // d_t U = e^{-it Lambda} (d_t V - i Lambda V)
    for (std::size_t i = 0; i < g.size(); ++i) Vt[i] -= Complex(0.0, g.lambda(disp, i)) * v0[i];
    const ComplexField Ut = propagate(g, Vt, disp, s.t);
    return detail::relative_l2(g, detail::boost_hat(g, Uc, Ut, l, s.t), detail::boost_rhs(g, Nc, v0, disp, l, s.t));
  };
  ChannelResidual r;
  detail::record_boundary_mass(g, U, r);
  r.wa = channel(&ProfileState::V_wa, U.U_wa, N.wa, Dispersion::wave);
  r.kg = channel(&ProfileState::V_kg, U.U_kg, N.kg, Dispersion::klein_gordon);
  return r;
}

// ---- weighted profile norms ----------------------------------------------

struct WeightedProfileEntry {
  int k = 0;
  int n = 0;  ///< vector-field order (0: identity, 1: one rotation)
  int l = 0;  ///< xi-derivative direction
  std::array<int, 2> rotation{-1, -1};  ///< (j, k) of Omega, or (-1, -1)
  double wa = 0.0;
  double kg = 0.0;
};

/// Containment handling: throw, or record the boundary mass and continue.
enum class ContainmentMode { enforce, report };

struct WeightedProfileRecord {
  std::vector<WeightedProfileEntry> entries;
  double wa_boundary_mass = 0.0;  ///< of the physical wave profile; above 1e-8 the wave entries are box-limited
  double kg_boundary_mass = 0.0;

  double sup_wa() const {
    double m = 0.0;
    for (const auto& e : entries) m = std::max(m, e.wa);
    return m;
  }
  double sup_kg() const {
    double m = 0.0;
    for (const auto& e : entries) m = std::max(m, e.kg);
    return m;
  }
};

/// Per shell k and direction l:
///   2^{N(n+1) k+} 2^{k/2} ||phi_k d_xi_l V^wa_L||,  2^{N(n+1) k+} 2^{k+} ||phi_k d_xi_l V^kg_L||
/// with L the identity (n = 0) or each rotation Omega_{23}, Omega_{31}, Omega_{12} (n = 1).
inline WeightedProfileRecord weighted_profile_norms(const SpectralGrid& g, const ProfileState& s,
                                                    const DyadicParams& prm, int n,
                                                    ContainmentMode mode = ContainmentMode::enforce) {
  if (n < 0 || n > prm.N1 - 1) throw ConfigError("weighted profile norms need 0 <= n <= N1 - 1");
  if (n > 1) throw ConfigError("weighted profile norms are implemented for n <= 1");
  if (n == 1 && g.dim() != 3) throw ConfigError("rotation-weighted profile norms need a 3D grid");

  struct Field {
    std::array<int, 2> rot;
    ComplexField wa, kg;
  };
  std::vector<Field> fields;
  // Rotations preserve support, so containment is checked once on the unrotated profiles.
  const ComplexField phys_wa = g.inverse(s.V_wa);
  const ComplexField phys_kg = g.inverse(s.V_kg);
  WeightedProfileRecord rec;
  rec.wa_boundary_mass = relative_boundary_mass(g, phys_wa);
  rec.kg_boundary_mass = relative_boundary_mass(g, phys_kg);
  if (mode == ContainmentMode::enforce) {
    require_contained(g, phys_wa, "weighted profile norms (wave)");
    require_contained(g, phys_kg, "weighted profile norms (kg)");
  }
  if (n == 0) {
    fields.push_back({{-1, -1}, s.V_wa, s.V_kg});
  } else {
    static constexpr std::array<std::array<int, 2>, 3> kRotations{{{1, 2}, {2, 0}, {0, 1}}};
    for (const auto& r : kRotations)
      fields.push_back({r, g.forward(rotation_apply_unchecked(g, phys_wa, r[0], r[1])),
                        g.forward(rotation_apply_unchecked(g, phys_kg, r[0], r[1]))});
  }

  const double Nn = prm.N(n + 1);
  for (const auto& f : fields) {
    for (int l = 0; l < g.dim(); ++l) {
      const ComplexField dwa = xi_derivative_unchecked(g, f.wa, l);
      const ComplexField dkg = xi_derivative_unchecked(g, f.kg, l);
      for (int k = g.k_min(); k <= g.k_max(); ++k) {
        const double kp = positive_part(k);
        const double w_wa = pow2(Nn * kp + 0.5 * k);
        const double w_kg = pow2(Nn * kp + kp);
        WeightedProfileEntry e;
        e.k = k;
        e.n = n;
        e.l = l;
        e.rotation = f.rot;
        e.wa = w_wa * l2_xi(g, lp::project_pk(g, dwa, k));
        e.kg = w_kg * l2_xi(g, lp::project_pk(g, dkg, k));
        rec.entries.push_back(e);
      }
    }
  }
  return rec;
}

}  // namespace wkg
