#pragma once

// Littlewood-Paley cutoffs in frequency and their physical-space analogues.
//
// The base bump is phi(r) = 1 for r <= 5/4, 0 for r >= 8/5, joined by the
// C-infinity transition s(tau) = e(tau) / (e(tau) + e(1 - tau)) with
// e(tau) = exp(-1/tau) for tau > 0 and tau = (8/5 - r) / (8/5 - 5/4).

#include <cmath>
#include <string>

#include "wkg/errors.hpp"
#include "wkg/grid.hpp"

namespace wkg::lp {

inline double smooth_step(double tau) {
  if (tau <= 0.0) return 0.0;
  if (tau >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / tau);
  const double b = std::exp(-1.0 / (1.0 - tau));
  return a / (a + b);
}

inline double bump(double r) {
  r = std::abs(r);
  if (r <= kBumpPlateau) return 1.0;
  if (r >= kBumpSupport) return 0.0;
  return smooth_step((kBumpSupport - r) / (kBumpSupport - kBumpPlateau));
}

/// phi_k(r) = phi(r / 2^k) - phi(r / 2^(k-1)).
inline double phi_k(double r, int k) { return bump(std::ldexp(r, -k)) - bump(std::ldexp(r, 1 - k)); }

/// phi_{<=B} = sum_{m <= B} phi_m, which telescopes to phi(r / 2^B); equals 1 at r = 0.
inline double phi_le(double r, int B) { return bump(std::ldexp(r, -B)); }
/// phi_{>=B} = 1 - phi_{<=B-1}.
inline double phi_ge(double r, int B) { return 1.0 - bump(std::ldexp(r, 1 - B)); }
inline double phi_lt(double r, int B) { return phi_le(r, B - 1); }
inline double phi_gt(double r, int B) { return phi_ge(r, B + 1); }

/// phi^{[a,b]}_j: phi_{<=a} at j = a, phi_{>=b} at j = b, phi_j in between.
inline double phi_interval(double r, int a, int b, int j) {
  if (a >= b || j < a || j > b)
    throw ConfigError("phi^{[a,b]}_j needs a < b and a <= j <= b");
  if (j == a) return phi_le(r, a);
  if (j == b) return phi_ge(r, b);
  return phi_k(r, j);
}

/// (k, j) is admissible iff j >= 0 and k + j >= 0.
inline bool admissible(int k, int j) noexcept { return j >= 0 && k + j >= 0; }

/// Smallest admissible j for shell k.
inline int first_j(int k) noexcept { return k < 0 ? -k : 0; }

/// Physical cutoff tilde-phi^{(k)}_j(|x|) attached to the atom Q_{jk}.
inline double phi_tilde(double r, int k, int j) {
  if (!admissible(k, j))
    throw ConfigError("space-frequency atom (k=" + std::to_string(k) + ", j=" + std::to_string(j) +
                      ") has k + j < 0");
  if (k + j == 0 && k <= 0) return phi_le(r, -k);
  if (j == 0 && k >= 0) return phi_le(r, 0);
  return phi_k(r, j);
}

/// Largest j kept in truncated j-sums: the last j with 2^j <= 4L.
inline int last_j(const SpectralGrid& g) {
  return static_cast<int>(std::floor(std::log2(4.0 * g.box_length())));
}

// ---- projections ---------------------------------------------------------

/// P_k as a Fourier multiplier; spectral in, spectral out.
inline ComplexField project_pk(const SpectralGrid& g, const ComplexField& f_hat, int k) {
  return apply_radial_multiplier(g, f_hat, [k](double r) { return phi_k(r, k); });
}

/// P_{<=B}.
inline ComplexField project_le(const SpectralGrid& g, const ComplexField& f_hat, int B) {
  return apply_radial_multiplier(g, f_hat, [B](double r) { return phi_le(r, B); });
}

/// Multiply a physical field by tilde-phi^{(k)}_j(|x|).
inline ComplexField localize(const SpectralGrid& g, const ComplexField& phys, int k, int j) {
  if (!admissible(k, j))
    throw ConfigError("space-frequency atom (k=" + std::to_string(k) + ", j=" + std::to_string(j) +
                      ") has k + j < 0");
  ComplexField out(g.size());
  for (std::size_t idx = 0; idx < g.size(); ++idx)
    out[idx] = phi_tilde(norm3(g.position(idx)), k, j) * phys[idx];
  return out;
}

/// Q_{jk} f = tilde-phi^{(k)}_j(x) * P_k f(x). Spectral in, physical out.
inline ComplexField project_qjk(const SpectralGrid& g, const ComplexField& f_hat, int j, int k) {
  if (!admissible(k, j))
    throw ConfigError("space-frequency atom (k=" + std::to_string(k) + ", j=" + std::to_string(j) +
                      ") has k + j < 0");
  return localize(g, g.inverse(project_pk(g, f_hat, k)), k, j);
}

/// Physical L^2 norms ||Q_{jk} f|| for j = first_j(k) .. last_j(grid), given P_k f in
/// physical space. Index 0 of the result corresponds to first_j(k).
inline std::vector<double> atom_norms(const SpectralGrid& g, const ComplexField& pk_phys, int k) {
  const int j0 = first_j(k);
  const int j1 = last_j(g);
  std::vector<double> norms;
  if (j1 < j0) return norms;
  std::vector<double> radius(g.size());
  for (std::size_t idx = 0; idx < g.size(); ++idx) radius[idx] = norm3(g.position(idx));
  norms.reserve(static_cast<std::size_t>(j1 - j0 + 1));
  for (int j = j0; j <= j1; ++j) {
    double s = 0.0;
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
      const double w = phi_tilde(radius[idx], k, j);
      if (w != 0.0) s += w * w * std::norm(pk_phys[idx]);
    }
    norms.push_back(std::sqrt(g.cell_volume() * s));
  }
  return norms;
}

}  // namespace wkg::lp
