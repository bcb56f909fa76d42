#pragma once

// Phase correction for the Klein-Gordon profile: the multipliers q_+-, the
// low-frequency wave field along Klein-Gordon characteristics, the
// accumulated phase Theta, the renormalized profile, window differences, and
// the resonance-phase lower bounds.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <sstream>
#include <vector>

#include "wkg/errors.hpp"
#include "wkg/grid.hpp"
#include "wkg/littlewood_paley.hpp"
#include "wkg/params.hpp"
#include "wkg/system.hpp"

namespace wkg {

/// q_+-(rho) = -+ B^{jk} rho_j rho_k / (2 Lambda_kg(rho)) + B^{0k} rho_k; sign = +1 or -1.
inline double q_pm(const Vec3& rho, const CouplingCoefficients& c, int sign) {
  double quad = 0.0, lin = 0.0;
  for (int j = 0; j < 3; ++j) {
    lin += c.B[0][j + 1] * rho[j];
    for (int k = 0; k < 3; ++k) quad += c.B[j + 1][k + 1] * rho[j] * rho[k];
  }
  return -static_cast<double>(sign) * quad / (2.0 * lambda_kg(rho)) + lin;
}

inline double japanese(double s) { return std::sqrt(1.0 + s * s); }

// ---- u_low ---------------------------------------------------------------

/// Low-mode coefficients of u_low(., s) = F^{-1}[phi_{<=0}(<s>^p rho) u^(rho, s)], stored densely on
/// the cube |m_d| <= M with the Fourier-sum normalization folded in.
class LowModeField {
 public:
  LowModeField(const SpectralGrid& g, const ComplexField& U_wa_hat, double s, double p) : dim_(g.dim()) {
    const double scale = std::pow(japanese(s), p);
    const double cutoff = kBumpSupport / scale;  // phi_{<=0}(scale r) = 0 for r >= cutoff
    const double dk = g.wavenumber_step();
    M_ = std::min<int>(static_cast<int>(std::floor(cutoff / dk)), static_cast<int>(g.n() / 2) - 1);
    if (M_ < 0) M_ = 0;
    dk_ = dk;
    const int side = 2 * M_ + 1;
    const int s1 = dim_ == 3 ? side : 1;
    coeff_.assign(static_cast<std::size_t>(side) * s1 * s1, Complex(0.0));
    const auto wa = reconstruct(g, U_wa_hat, Dispersion::wave);
    const double w = g.inverse_weight();
    const std::size_t n = g.n();
    const int M1 = dim_ == 3 ? M_ : 0;
    for (int a = -M_; a <= M_; ++a)
      for (int b = -M1; b <= M1; ++b)
        for (int c = -M1; c <= M1; ++c) {
          const double r = dk * std::sqrt(double(a * a + b * b + c * c));
          const double phi = lp::bump(scale * r);
          if (phi == 0.0) continue;
          std::array<std::size_t, 3> ii{wrap(a, n), wrap(b, n), wrap(c, n)};
          const Complex v = phi * w * wa.f_hat[g.ravel(ii)];
          if (v != Complex(0.0)) any_ = true;
          at(a, b, c) = v;
        }
  }

  int radius() const noexcept { return M_; }
  bool empty() const noexcept { return !any_; }

  /// Real field value at x, using conjugate symmetry: the m_0 = 0 plane once, m_0 > 0 twice.
  double eval(const Vec3& x, std::vector<Complex>& scratch) const {
    if (!any_) return 0.0;
    const int M = M_;
    const int M1 = dim_ == 3 ? M : 0;
    const int side1 = 2 * M1 + 1;
    scratch.resize(static_cast<std::size_t>(M + 1 + 2 * side1));
    Complex* tx = scratch.data();            // m = 0..M
    Complex* ty = tx + (M + 1);              // m = -M1..M1
    Complex* tz = ty + side1;                // m = -M1..M1
    fill_table(tx, 0, M, x[0]);
    fill_table(ty, -M1, M1, x[1]);
    fill_table(tz, -M1, M1, x[2]);
    Complex plane0 = 0.0, rest = 0.0;
    for (int a = 0; a <= M; ++a) {
      Complex sa = 0.0;
      for (int b = -M1; b <= M1; ++b) {
        const Complex* row = &coeff_[index(a, b, -M1)];
        Complex sb = 0.0;
        for (int c = 0; c < side1; ++c) sb += row[c] * tz[c];
        sa += sb * ty[b + M1];
      }
      if (a == 0)
        plane0 = sa;
      else
        rest += sa * tx[a];
    }
    return plane0.real() + 2.0 * rest.real();
  }

  /// Values at many points by the direct sum.
  std::vector<double> eval_direct(std::span<const Vec3> points) const {
    std::vector<double> out(points.size(), 0.0);
    if (!any_) return out;
#pragma omp parallel
    {
      std::vector<Complex> scratch;
#pragma omp for schedule(static)
      for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(points.size()); ++i)
        out[static_cast<std::size_t>(i)] = eval(points[static_cast<std::size_t>(i)], scratch);
    }
    return out;
  }

  /// Values at many points by Gaussian gridding: deconvolve, inverse FFT on a twice-oversampled
  /// grid, then a (2 kSpread)^3 Gaussian interpolation per point. Agrees with the direct sum to
  /// a few 1e-9 relative. 3D only.
  std::vector<double> eval_gridded(std::span<const Vec3> points) const {
    std::vector<double> out(points.size(), 0.0);
    if (!any_) return out;
    if (dim_ != 3) throw ConfigError("gridded low-mode evaluation needs a 3D grid");
    const int nm = 2 * M_ + 1;
    int mr = 2 * nm;
    mr += mr % 2;
    mr = std::max(mr, 2 * kSpread + 2);
    const double tau = std::numbers::pi * kSpread / (3.0 * nm * nm);
    const std::size_t mrs = static_cast<std::size_t>(mr);
    ComplexField grid(mrs * mrs * mrs, Complex(0.0));
    std::vector<double> deconv(static_cast<std::size_t>(nm));
    for (int m = -M_; m <= M_; ++m) deconv[m + M_] = std::sqrt(std::numbers::pi / tau) * std::exp(m * m * tau);
    for (int a = -M_; a <= M_; ++a)
      for (int b = -M_; b <= M_; ++b)
        for (int c = -M_; c <= M_; ++c) {
          const Complex v = coeff_[index(a, b, c)];
          if (v == Complex(0.0)) continue;
          grid[(wrap(a, mrs) * mrs + wrap(b, mrs)) * mrs + wrap(c, mrs)] =
              v * deconv[a + M_] * deconv[b + M_] * deconv[c + M_];
        }
    {
      const detail::FftPlans plans(3, mrs);
      plans.backward(grid);
    }
    const double hg = 2.0 * std::numbers::pi / mr;
    const double inv_n3 = 1.0 / (static_cast<double>(mr) * mr * mr);
    constexpr int W = 2 * kSpread;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(points.size()); ++i) {
      const Vec3& x = points[static_cast<std::size_t>(i)];
      std::array<std::array<double, W>, 3> w{};
      std::array<std::array<std::size_t, W>, 3> j{};
      for (int d = 0; d < 3; ++d) {
        const double th = dk_ * x[d];
        const long j0 = static_cast<long>(std::floor(th / hg));
        for (int k = 0; k < W; ++k) {
          const long jj = j0 - kSpread + 1 + k;
          const double delta = th - hg * static_cast<double>(jj);
          w[d][k] = std::exp(-delta * delta / (4.0 * tau));
          j[d][k] = static_cast<std::size_t>(((jj % mr) + mr) % mr);
        }
      }
      Complex acc = 0.0;
      for (int a = 0; a < W; ++a) {
        Complex sa = 0.0;
        for (int b = 0; b < W; ++b) {
          const Complex* row = &grid[(j[0][a] * mrs + j[1][b]) * mrs];
          Complex sb = 0.0;
          for (int c = 0; c < W; ++c) sb += w[2][c] * row[j[2][c]];
          sa += w[1][b] * sb;
        }
        acc += w[0][a] * sa;
      }
      out[static_cast<std::size_t>(i)] = inv_n3 * acc.real();
    }
    return out;
  }

  /// Direct sum or gridding, whichever costs fewer operations per point.
  std::vector<double> eval_many(std::span<const Vec3> points) const {
    const double direct = (M_ + 1.0) * (2.0 * M_ + 1.0) * (2.0 * M_ + 1.0);
    const double gridded = 0.5 * std::pow(2.0 * kSpread, 3);
    if (dim_ == 3 && direct > gridded && points.size() > 1000) return eval_gridded(points);
    return eval_direct(points);
  }

  /// Full complex sum over every stored mode (no symmetry assumption).
  Complex eval_complex(const Vec3& x) const {
    const int M1 = dim_ == 3 ? M_ : 0;
    Complex s = 0.0;
    for (int a = -M_; a <= M_; ++a)
      for (int b = -M1; b <= M1; ++b)
        for (int c = -M1; c <= M1; ++c) {
          const double arg = dk_ * (a * x[0] + b * x[1] + c * x[2]);
          s += coeff_[index(a, b, c)] * Complex(std::cos(arg), std::sin(arg));
        }
    return s;
  }

 private:
  static constexpr int kSpread = 8;

  static std::size_t wrap(int m, std::size_t n) {
    return static_cast<std::size_t>((m % static_cast<long>(n) + static_cast<long>(n)) % static_cast<long>(n));
  }
  std::size_t index(int a, int b, int c) const {
    const int M1 = dim_ == 3 ? M_ : 0;
    const int side1 = 2 * M1 + 1;
    return (static_cast<std::size_t>(a + M_) * side1 + static_cast<std::size_t>(b + M1)) * side1 +
           static_cast<std::size_t>(c + M1);
  }
  Complex& at(int a, int b, int c) { return coeff_[index(a, b, c)]; }

  // e^{i x dk m} for m = lo..hi by recurrence from both ends of m = 0.
  void fill_table(Complex* t, int lo, int hi, double x) const {
    const Complex step(std::cos(dk_ * x), std::sin(dk_ * x));
    Complex cur = 1.0;
    for (int m = 0; m <= hi; ++m) {
      if (m >= lo) t[m - lo] = cur;
      cur *= step;
      if (m % 16 == 15) cur = std::polar(1.0, dk_ * x * (m + 1));
    }
    cur = std::conj(step);
    for (int m = -1; m >= lo; --m) {
      t[m - lo] = cur;
      cur *= std::conj(step);
      if ((-m) % 16 == 15) cur = std::polar(1.0, dk_ * x * (m - 1));
    }
  }

  int dim_;
  int M_ = 0;
  double dk_ = 0.0;
  bool any_ = false;
  std::vector<Complex> coeff_;
};

/// u_low(x, s) at arbitrary points.
inline std::vector<double> u_low_eval(const SpectralGrid& g, const ComplexField& U_wa_hat, double s,
                                      std::span<const Vec3> points, double p) {
  return LowModeField(g, U_wa_hat, s, p).eval_many(points);
}

/// Complex values of the same sum, without the symmetry shortcut.
inline std::vector<Complex> u_low_eval_complex(const SpectralGrid& g, const ComplexField& U_wa_hat, double s,
                                               std::span<const Vec3> points, double p) {
  const LowModeField low(g, U_wa_hat, s, p);
  std::vector<Complex> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) out[i] = low.eval_complex(points[i]);
  return out;
}

// ---- Theta -----------------------------------------------------------------

struct ThetaField {
  std::vector<double> theta;  ///< one value per grid mode
  double t = 0.0;
  double p = 0.68;
  std::vector<double> u_end;  ///< u_low at the characteristic points at time t, if known
};

/// Trapezoid accumulation of Theta(xi, t) = q_+(xi) int_0^t u_low(s xi / Lambda_kg(xi), s) ds.
class ThetaAccumulator {
 public:
  ThetaAccumulator(GridPtr grid, const CouplingCoefficients& c, double p) : grid_(std::move(grid)), p_(p) {
    if (!(p > 0.0)) throw ConfigError("cutoff exponent p must be positive");
    const SpectralGrid& g = *grid_;
    q_.assign(g.size(), 0.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g.nyquist(i) || i == 0) continue;
      const Vec3 xi = g.wavevector(i);
      const double q = q_pm(xi, c, +1);
      if (q == 0.0) continue;
      q_[i] = q;
      active_.push_back(i);
      const double lam = lambda_kg(xi);
      dir_.push_back({xi[0] / lam, xi[1] / lam, xi[2] / lam});
    }
  }

  const SpectralGrid& grid() const noexcept { return *grid_; }
  double p() const noexcept { return p_; }
  const std::vector<double>& q_plus() const noexcept { return q_; }
  std::size_t active_modes() const noexcept { return active_.size(); }

  ThetaField start(double t0 = 0.0) const {
    ThetaField th;
    th.theta.assign(grid_->size(), 0.0);
    th.t = t0;
    th.p = p_;
    return th;
  }

  /// Characteristic points s xi / Lambda_kg(xi) of the active modes.
  std::vector<Vec3> characteristic_points(double s) const {
    std::vector<Vec3> pts(dir_.size());
    for (std::size_t i = 0; i < dir_.size(); ++i) pts[i] = {s * dir_[i][0], s * dir_[i][1], s * dir_[i][2]};
    return pts;
  }

  /// u_low at the characteristic points of every active mode.
  std::vector<double> characteristic_values(const ComplexField& U_wa_hat, double s) const {
    const auto pts = characteristic_points(s);
    return u_low_eval(*grid_, U_wa_hat, s, pts, p_);
  }

  /// One step [theta.t, theta.t + dt] with u_low from U^wa at both ends.
  void accumulate(ThetaField& th, const ComplexField& U_wa_before, const ComplexField& U_wa_after, double s,
                  double dt) const {
    check_time(th, s);
    std::vector<double> a = th.u_end.empty() ? characteristic_values(U_wa_before, s) : th.u_end;
    std::vector<double> b = characteristic_values(U_wa_after, s + dt);
    accumulate_values(th, a, std::move(b), s, dt);
  }

  /// Same update with caller-supplied u_low values at the characteristic points (active-mode order).
  void accumulate_values(ThetaField& th, const std::vector<double>& u_start, std::vector<double> u_stop, double s,
                         double dt) const {
    check_time(th, s);
    if (u_start.size() != active_.size() || u_stop.size() != active_.size())
      throw ConfigError("u_low values do not match the active mode set");
    const double h = 0.5 * dt;
    for (std::size_t i = 0; i < active_.size(); ++i) th.theta[active_[i]] += q_[active_[i]] * h * (u_start[i] + u_stop[i]);
    th.t = s + dt;
    th.u_end = std::move(u_stop);
  }

  /// u_low(t xi / Lambda_kg(xi), t) expanded to a full per-mode array (0 where inactive).
  std::vector<double> characteristic_field(const ComplexField& U_wa_hat, double t) const {
    const auto v = characteristic_values(U_wa_hat, t);
    std::vector<double> out(grid_->size(), 0.0);
    for (std::size_t i = 0; i < active_.size(); ++i) out[active_[i]] = v[i];
    return out;
  }

 private:
  static void check_time(const ThetaField& th, double s) {
    if (std::abs(th.t - s) > 1e-12 * std::max(1.0, std::abs(s))) {
      std::ostringstream msg;
      msg << "phase accumulation time mismatch: field at t = " << th.t << ", step starts at " << s;
      throw NumericalError(msg.str());
    }
  }

  GridPtr grid_;
  double p_;
  std::vector<double> q_;
  std::vector<std::size_t> active_;
  std::vector<Vec3> dir_;
};

/// V*^ = e^{-i Theta} V^kg.
inline ComplexField renormalize_profile(const ComplexField& V_kg_hat, const ThetaField& th) {
  if (V_kg_hat.size() != th.theta.size()) throw ConfigError("profile and phase live on different grids");
  ComplexField out(V_kg_hat.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::polar(1.0, -th.theta[i]) * V_kg_hat[i];
  return out;
}

/// e^{-i Theta} (d_t V^kg - i q_+ u_low(t xi / Lambda_kg, t) V^kg).
inline ComplexField renormalized_rhs(const ComplexField& Vt_kg_hat, const ComplexField& V_kg_hat,
                                     const ThetaField& th, const std::vector<double>& q_plus,
                                     const std::vector<double>& u_char) {
  ComplexField out(V_kg_hat.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = std::polar(1.0, -th.theta[i]) *
             (Vt_kg_hat[i] - Complex(0.0, q_plus[i] * u_char[i]) * V_kg_hat[i]);
  return out;
}

// ---- window differences ------------------------------------------------------

struct ProfileSnapshot {
  double t = 0.0;
  ComplexField V_wa, V_kg, V_star;
};

struct WindowDifference {
  double t1 = 0.0, t2 = 0.0;
  double star = 0.0;  ///< weighted sup |V*(t2) - V*(t1)|
  double raw = 0.0;   ///< weighted sup |V^kg(t2) - V^kg(t1)|
  double wave = 0.0;  ///< ||V^wa(t2) - V^wa(t1)||_{L^2}
};

/// sup over shells |k| <= 3 of 2^{(N0-d')k+} 2^{k-(1/2-kappa)} |phi_k D^|_inf.
inline double weighted_window_sup(const SpectralGrid& g, const ComplexField& d_hat, const DyadicParams& prm) {
  double m = 0.0;
  for (int k = std::max(-3, g.k_min()); k <= std::min(3, g.k_max()); ++k) {
    const double w = pow2((prm.N0 - prm.d_prime()) * positive_part(k) + negative_part(k) * (0.5 - prm.kappa));
    m = std::max(m, w * sup_abs(lp::project_pk(g, d_hat, k)));
  }
  return m;
}

namespace detail {

inline std::vector<std::size_t> dyadic_chain(std::span<const ProfileSnapshot> snaps) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < snaps.size(); ++i) {
    const double t = snaps[i].t;
    if (!(t > 0.0)) continue;
    const double m = std::log2(t);
    if (std::abs(m - std::round(m)) > 1e-9) continue;
    if (!idx.empty() && std::abs(std::log2(snaps[idx.back()].t) + 1.0 - m) > 1e-9) idx.clear();
    idx.push_back(i);
  }
  return idx;
}

}  // namespace detail

/// Differences over consecutive dyadic windows [2^m, 2^{m+1}]; needs at least three windows.
inline std::vector<WindowDifference> cauchy_windows(const SpectralGrid& g, std::span<const ProfileSnapshot> snaps,
                                                    const DyadicParams& prm) {
  const auto chain = detail::dyadic_chain(snaps);
  if (chain.size() < 4) throw ConfigError("window differences need snapshots at four or more consecutive dyadic times");
  std::vector<WindowDifference> out;
  for (std::size_t w = 0; w + 1 < chain.size(); ++w) {
    const auto& a = snaps[chain[w]];
    const auto& b = snaps[chain[w + 1]];
    WindowDifference d;
    d.t1 = a.t;
    d.t2 = b.t;
    d.star = weighted_window_sup(g, difference(b.V_star, a.V_star), prm);
    d.raw = weighted_window_sup(g, difference(b.V_kg, a.V_kg), prm);
    d.wave = l2_from_spectral(g, difference(b.V_wa, a.V_wa));
    out.push_back(d);
  }
  return out;
}

/// L^2 differences of the wave profile over the same dyadic windows.
inline std::vector<WindowDifference> wave_scattering_residual(const SpectralGrid& g,
                                                              std::span<const ProfileSnapshot> snaps) {
  const auto chain = detail::dyadic_chain(snaps);
  if (chain.size() < 4) throw ConfigError("window differences need snapshots at four or more consecutive dyadic times");
  std::vector<WindowDifference> out;
  for (std::size_t w = 0; w + 1 < chain.size(); ++w) {
    WindowDifference d;
    d.t1 = snaps[chain[w]].t;
    d.t2 = snaps[chain[w + 1]].t;
    d.wave = l2_from_spectral(g, difference(snaps[chain[w + 1]].V_wa, snaps[chain[w]].V_wa));
    out.push_back(d);
  }
  return out;
}

// ---- resonance phases ------------------------------------------------------------

struct PhaseIndex {
  Dispersion kind = Dispersion::wave;
  int sign = +1;
};

inline double signed_lambda(const PhaseIndex& s, const Vec3& xi) { return s.sign * lambda(s.kind, xi); }

/// Lambda_sigma(xi) - Lambda_mu(xi - eta) - Lambda_nu(eta).
inline double phase_phi(const PhaseIndex& sigma, const PhaseIndex& mu, const PhaseIndex& nu, const Vec3& xi,
                        const Vec3& eta) {
  const Vec3 d{xi[0] - eta[0], xi[1] - eta[1], xi[2] - eta[2]};
  return signed_lambda(sigma, xi) - signed_lambda(mu, d) - signed_lambda(nu, eta);
}

struct ResonanceReport {
  std::uint64_t samples = 0;
  std::uint64_t checks = 0;
  std::uint64_t violations_wkk = 0;  ///< (wa, kg, kg): |Phi| >= |xi| / (4 b^2)
  std::uint64_t violations_kkw = 0;  ///< (kg, kg, wa): |Phi| >= |eta| / (4 b^2)
  std::uint64_t violations_scalar = 0;
  std::uint64_t total() const noexcept { return violations_wkk + violations_kkw + violations_scalar; }
};

struct DefaultPhase {
  double operator()(const PhaseIndex& s, const PhaseIndex& m, const PhaseIndex& n, const Vec3& xi,
                    const Vec3& eta) const {
    return phase_phi(s, m, n, xi, eta);
  }
};

/// Random sampling of the lower bounds on |Phi| for all sign triples, and of the two scalar
/// inequalities behind them on x, y, x + y in [0, b]. The phase is injectable for mutation tests.
template <class Phase = DefaultPhase>
ResonanceReport check_resonance_bounds(double b, std::uint64_t n_samples, std::uint64_t seed, Phase phi = {}) {
  if (!(b >= 1.0)) throw ConfigError("resonance check needs b >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> cube(-b, b);
  std::uniform_real_distribution<double> unit(0.0, b);
  auto ball = [&]() {
    for (;;) {
      Vec3 v{cube(rng), cube(rng), cube(rng)};
      if (norm3(v) <= b) return v;
    }
  };
  const double inv = 1.0 / (4.0 * b * b);
  ResonanceReport rep;
  for (std::uint64_t s = 0; s < n_samples; ++s) {
    Vec3 xi, eta;
    for (;;) {
      xi = ball();
      eta = ball();
      const Vec3 d{xi[0] - eta[0], xi[1] - eta[1], xi[2] - eta[2]};
      if (norm3(d) <= b) break;
    }
    const double nxi = norm3(xi), neta = norm3(eta);
    for (int i0 : {+1, -1})
      for (int i1 : {+1, -1})
        for (int i2 : {+1, -1}) {
          const PhaseIndex wa0{Dispersion::wave, i0}, kg0{Dispersion::klein_gordon, i0};
          const PhaseIndex kg1{Dispersion::klein_gordon, i1};
          const PhaseIndex kg2{Dispersion::klein_gordon, i2}, wa2{Dispersion::wave, i2};
          if (std::abs(phi(wa0, kg1, kg2, xi, eta)) < nxi * inv) ++rep.violations_wkk;
          if (std::abs(phi(kg0, kg1, wa2, xi, eta)) < neta * inv) ++rep.violations_kkw;
          rep.checks += 2;
        }
    double x, y;
    do {
      x = unit(rng);
      y = unit(rng);
    } while (x + y > b);
    if (std::sqrt(1.0 + x * x) + std::sqrt(1.0 + y * y) - (x + y) < 1.0 / (2.0 * b)) ++rep.violations_scalar;
    if (x + std::sqrt(1.0 + y * y) - std::sqrt(1.0 + (x + y) * (x + y)) < x * inv) ++rep.violations_scalar;
    rep.checks += 2;
    ++rep.samples;
  }
  return rep;
}

}  // namespace wkg
