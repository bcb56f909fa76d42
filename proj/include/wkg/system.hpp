#pragma once

// The coupled system
//   u_tt - Lap u     = A^{ab} d_a v d_b v + D v^2
//   v_tt - Lap v + v = u B^{ab} d_a d_b v,       B^{00} = 0,
// in normalized variables U = d_t f - i Lambda f, so that
//   (d_t + i Lambda_wa) U^wa = N^wa,   (d_t + i Lambda_kg) U^kg = N^kg.

#include <array>
#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "wkg/errors.hpp"
#include "wkg/free_evolution.hpp"
#include "wkg/grid.hpp"

namespace wkg {

using Matrix4 = std::array<std::array<double, 4>, 4>;

struct CouplingCoefficients {
  Matrix4 A{};
  Matrix4 B{};
  double D = 0.0;

  /// Box u + |grad_{x,t} v|^2 + v^2 = 0, (-Box + 1) v - u Lap v = 0.
  static CouplingCoefficients radial_model() {
    CouplingCoefficients c;
    for (int a = 0; a < 4; ++a) c.A[a][a] = 1.0;
    for (int j = 1; j < 4; ++j) c.B[j][j] = 1.0;
    c.D = 1.0;
    return c;
  }

  bool is_zero() const {
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        if (A[a][b] != 0.0 || B[a][b] != 0.0) return false;
    return D == 0.0;
  }

  void validate() const {
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        if (!std::isfinite(A[a][b]) || !std::isfinite(B[a][b]))
          throw ConfigError("coupling coefficients must be finite");
        if (A[a][b] != A[b][a]) throw ConfigError("coupling matrix A must be symmetric");
        if (B[a][b] != B[b][a]) throw ConfigError("coupling matrix B must be symmetric");
      }
    if (B[0][0] != 0.0) throw ConfigError("coupling matrix B must have B[0][0] = 0");
    if (!std::isfinite(D)) throw ConfigError("coupling constant D must be finite");
  }

  /// Spectral norm of the spatial block B^{jk}.
  double spatial_b_norm() const {
    // Symmetric 3x3: largest |eigenvalue| by power iteration on B^2.
    std::array<double, 3> x{1.0, 0.7, 0.3};
    double lambda = 0.0;
    for (int it = 0; it < 200; ++it) {
      std::array<double, 3> y{};
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) y[j] += B[j + 1][k + 1] * x[k];
      std::array<double, 3> z{};
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) z[j] += B[j + 1][k + 1] * y[k];
      const double nz = std::sqrt(z[0] * z[0] + z[1] * z[1] + z[2] * z[2]);
      if (nz == 0.0) return 0.0;
      const double nx = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
      lambda = std::sqrt(nz / nx);
      for (int j = 0; j < 3; ++j) x[j] = z[j] / nz;
    }
    return lambda;
  }
};

struct PhysicalState {
  RealField u, u_t, v, v_t;
  double t = 0.0;
};

/// The solver's unknown: Fourier-space profiles V = e^{it Lambda} U.
struct ProfileState {
  ComplexField V_wa, V_kg;
  double t = 0.0;
};

struct NormalizedFields {
  ComplexField U_wa, U_kg;
};

/// Spectral f and d_t f recovered from a normalized variable.
struct HalfWavePair {
  ComplexField f_hat, ft_hat;
};

/// U^ = f_t^ - i Lambda f^.
inline ComplexField normalize(const SpectralGrid& g, const ComplexField& f_hat, const ComplexField& ft_hat,
                              Dispersion disp) {
  ComplexField out(g.size());
  for (std::size_t idx = 0; idx < g.size(); ++idx)
    out[idx] = ft_hat[idx] - Complex(0.0, g.lambda(disp, idx)) * f_hat[idx];
  return out;
}

/// d_t f = (U + conj U)/2 and Lambda f = i (U - conj U)/2, in Fourier space where
/// conj U becomes conj(U^(-xi)). The zero mode of f is 0 when Lambda(0) = 0.
inline HalfWavePair reconstruct(const SpectralGrid& g, const ComplexField& U_hat, Dispersion disp) {
  HalfWavePair out{ComplexField(g.size()), ComplexField(g.size())};
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    if (g.nyquist(idx)) {
      out.f_hat[idx] = 0.0;
      out.ft_hat[idx] = 0.0;
      continue;
    }
    const Complex a = U_hat[idx];
    const Complex b = std::conj(U_hat[g.negated(idx)]);
    out.ft_hat[idx] = 0.5 * (a + b);
    const double lam = g.lambda(disp, idx);
    out.f_hat[idx] = lam > 0.0 ? Complex(0.0, 0.5) * (a - b) / lam : Complex(0.0);
  }
  return out;
}

inline NormalizedFields to_normalized(const SpectralGrid& g, const PhysicalState& s) {
  return {normalize(g, g.forward(s.u), g.forward(s.u_t), Dispersion::wave),
          normalize(g, g.forward(s.v), g.forward(s.v_t), Dispersion::klein_gordon)};
}

inline PhysicalState from_normalized(const SpectralGrid& g, const ComplexField& U_wa, const ComplexField& U_kg,
                                     double t = 0.0) {
  auto wa = reconstruct(g, U_wa, Dispersion::wave);
  auto kg = reconstruct(g, U_kg, Dispersion::klein_gordon);
  PhysicalState s;
  s.u = g.inverse_real(std::move(wa.f_hat));
  s.u_t = g.inverse_real(std::move(wa.ft_hat));
  s.v = g.inverse_real(std::move(kg.f_hat));
  s.v_t = g.inverse_real(std::move(kg.ft_hat));
  s.t = t;
  return s;
}

/// Normalized variables at time t from the profiles.
inline NormalizedFields unprofile(const SpectralGrid& g, const ProfileState& s) {
  return {propagate(g, s.V_wa, Dispersion::wave, s.t), propagate(g, s.V_kg, Dispersion::klein_gordon, s.t)};
}

namespace detail {

// Inverse-transforms a list of real fields given by their spectra, two per FFT.
inline std::vector<RealField> inverse_real_batch(const SpectralGrid& g, const std::vector<const ComplexField*>& in) {
  std::vector<RealField> out(in.size(), RealField(g.size()));
  for (std::size_t i = 0; i < in.size(); i += 2) {
    ComplexField packed(g.size());
    const ComplexField& a = *in[i];
    if (i + 1 < in.size()) {
      const ComplexField& b = *in[i + 1];
      for (std::size_t idx = 0; idx < g.size(); ++idx) packed[idx] = a[idx] + Complex(0.0, 1.0) * b[idx];
    } else {
      packed.assign(a.begin(), a.end());
    }
    g.inverse_inplace(packed);
    for (std::size_t idx = 0; idx < g.size(); ++idx) out[i][idx] = packed[idx].real();
    if (i + 1 < in.size())
      for (std::size_t idx = 0; idx < g.size(); ++idx) out[i + 1][idx] = packed[idx].imag();
  }
  return out;
}

// Forward-transforms two real fields with one FFT.
inline std::pair<ComplexField, ComplexField> forward_real_pair(const SpectralGrid& g, const RealField& a,
                                                               const RealField& b) {
  ComplexField packed(g.size());
  for (std::size_t idx = 0; idx < g.size(); ++idx) packed[idx] = Complex(a[idx], b[idx]);
  g.forward_inplace(packed);
  ComplexField fa(g.size()), fb(g.size());
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    const Complex c = packed[idx];
    const Complex cn = std::conj(packed[g.negated(idx)]);
    fa[idx] = 0.5 * (c + cn);
    fb[idx] = Complex(0.0, -0.5) * (c - cn);
  }
  return {std::move(fa), std::move(fb)};
}

}  // namespace detail

/// Nonlinear terms of the normalized system on a fixed grid.
class WkgSystem {
 public:
  struct Terms {
    ComplexField wa, kg;
  };

  WkgSystem(GridPtr grid, CouplingCoefficients coeffs, bool dealias = true)
      : grid_(std::move(grid)), coeffs_(coeffs), dealias_(dealias) {
    coeffs_.validate();
  }

  const SpectralGrid& grid() const noexcept { return *grid_; }
  const GridPtr& grid_ptr() const noexcept { return grid_; }
  const CouplingCoefficients& coefficients() const noexcept { return coeffs_; }
  bool dealias() const noexcept { return dealias_; }

  /// N^wa and N^kg (spectral) from the normalized variables U^wa, U^kg (spectral).
  Terms nonlinearity(const ComplexField& U_wa, const ComplexField& U_kg) const {
    const SpectralGrid& g = *grid_;
    const int dim = g.dim();
    Terms out{ComplexField(g.size(), 0.0), ComplexField(g.size(), 0.0)};
    if (coeffs_.is_zero()) return out;

    auto wa = reconstruct(g, U_wa, Dispersion::wave);
    auto kg = reconstruct(g, U_kg, Dispersion::klein_gordon);
    truncate(wa.f_hat);
    truncate(kg.f_hat);
    truncate(kg.ft_hat);

    // Spectra of the physical ingredients: v, d_0 v, d_j v, u, and
    // W = B^{jk} d_j d_k v + 2 B^{0k} d_k d_0 v.
    std::vector<ComplexField> dv(dim, ComplexField(g.size()));
    ComplexField w_hat(g.size());
    const auto& B = coeffs_.B;
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
      const Vec3 xi = g.wavevector(idx);
      for (int j = 0; j < dim; ++j) dv[j][idx] = Complex(0.0, xi[j]) * kg.f_hat[idx];
      double second = 0.0;
      Complex mixed = 0.0;
      for (int j = 0; j < dim; ++j) {
        for (int k = 0; k < dim; ++k) second -= B[j + 1][k + 1] * xi[j] * xi[k];
        mixed += 2.0 * B[0][j + 1] * Complex(0.0, xi[j]);
      }
      w_hat[idx] = second * kg.f_hat[idx] + mixed * kg.ft_hat[idx];
    }

    std::vector<const ComplexField*> batch{&kg.f_hat, &kg.ft_hat};
    for (int j = 0; j < dim; ++j) batch.push_back(&dv[j]);
    batch.push_back(&wa.f_hat);
    batch.push_back(&w_hat);
    const auto phys = detail::inverse_real_batch(g, batch);
    // phys: [v, v_t, d_1 v .. d_dim v, u, W]
    const RealField& v = phys[0];
    const RealField& u = phys[2 + dim];
    const RealField& w = phys[3 + dim];

    RealField n_wa(g.size()), n_kg(g.size());
    const auto& A = coeffs_.A;
    const double D = coeffs_.D;
    std::array<double, 4> grad{};
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
      grad[0] = phys[1][idx];
      for (int j = 0; j < dim; ++j) grad[j + 1] = phys[2 + j][idx];
      double q = D * v[idx] * v[idx];
      for (int a = 0; a <= dim; ++a)
        for (int b = 0; b <= dim; ++b) q += A[a][b] * grad[a] * grad[b];
      n_wa[idx] = q;
      n_kg[idx] = u[idx] * w[idx];
    }
    auto [f_wa, f_kg] = detail::forward_real_pair(g, n_wa, n_kg);
    truncate(f_wa);
    truncate(f_kg);
    out.wa = std::move(f_wa);
    out.kg = std::move(f_kg);
    return out;
  }

  ComplexField nonlinearity_wave(const ComplexField& U_wa, const ComplexField& U_kg) const {
    return nonlinearity(U_wa, U_kg).wa;
  }
  ComplexField nonlinearity_kg(const ComplexField& U_wa, const ComplexField& U_kg) const {
    return nonlinearity(U_wa, U_kg).kg;
  }

  Terms nonlinearity(const ProfileState& s) const {
    const auto U = unprofile(*grid_, s);
    return nonlinearity(U.U_wa, U.U_kg);
  }

  /// Zero the Nyquist plane and, when dealiasing, every mode outside the 2/3 cube.
  void truncate(ComplexField& f_hat) const {
    const SpectralGrid& g = *grid_;
    for (std::size_t idx = 0; idx < g.size(); ++idx)
      if (g.nyquist(idx) || (dealias_ && !g.dealias_keep(idx))) f_hat[idx] = 0.0;
  }

 private:
  GridPtr grid_;
  CouplingCoefficients coeffs_;
  bool dealias_;
};

}  // namespace wkg
