#pragma once

// Exact linear propagation e^{-it Lambda} of a profile, evaluated either at
// arbitrary points (direct Fourier sum) or on the grid (one inverse FFT; the
// same sum restricted to grid points).

#include <span>
#include <vector>

#include "wkg/grid.hpp"

namespace wkg {

/// e^{-i t Lambda(xi)} f^(xi), spectral.
inline ComplexField propagate(const SpectralGrid& g, const ComplexField& f_hat, Dispersion disp, double t) {
  ComplexField out(g.size());
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    if (g.nyquist(idx)) {
      out[idx] = 0.0;
      continue;
    }
    const double phase = -t * g.lambda(disp, idx);
    out[idx] = Complex(std::cos(phase), std::sin(phase)) * f_hat[idx];
  }
  return out;
}

/// sum_xi exp(i(x.xi - t Lambda(xi))) f^(xi) mode_weight / (2 pi)^dim at each point.
inline std::vector<Complex> free_evolve_eval(const SpectralGrid& g, const ComplexField& profile_hat,
                                             Dispersion disp, double t, std::span<const Vec3> points) {
  // Collect the live modes once; many profiles are sparse.
  struct Mode {
    Vec3 xi;
    Complex coeff;
  };
  std::vector<Mode> live;
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    if (g.nyquist(idx) || profile_hat[idx] == Complex(0.0)) continue;
    const double phase = -t * g.lambda(disp, idx);
    live.push_back({g.wavevector(idx), Complex(std::cos(phase), std::sin(phase)) * profile_hat[idx]});
  }
  const double w = g.inverse_weight();
  std::vector<Complex> out(points.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(points.size()); ++p) {
    const Vec3& x = points[static_cast<std::size_t>(p)];
    Complex acc = 0.0;
    for (const auto& m : live) {
      const double arg = x[0] * m.xi[0] + x[1] * m.xi[1] + x[2] * m.xi[2];
      acc += m.coeff * Complex(std::cos(arg), std::sin(arg));
    }
    out[static_cast<std::size_t>(p)] = w * acc;
  }
  return out;
}

/// The same sum at every grid point, via one inverse transform.
inline ComplexField free_evolve_grid(const SpectralGrid& g, const ComplexField& profile_hat, Dispersion disp,
                                     double t) {
  return g.inverse(propagate(g, profile_hat, disp, t));
}

}  // namespace wkg
