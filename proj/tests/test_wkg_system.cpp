#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "wkg/integrator.hpp"
#include "wkg/system.hpp"

using namespace wkg;
using Catch::Approx;

namespace {

double gauss(const Vec3& x, const Vec3& c, double s) {
  const double r2 = (x[0] - c[0]) * (x[0] - c[0]) + (x[1] - c[1]) * (x[1] - c[1]) + (x[2] - c[2]) * (x[2] - c[2]);
  return std::exp(-r2 / (2.0 * s * s));
}

RealField sample_real(const SpectralGrid& g, auto&& f) {
  RealField out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = f(g.position(i));
  return out;
}

PhysicalState smooth_state(const SpectralGrid& g, double amp) {
  PhysicalState s;
  s.u = sample_real(g, [&](const Vec3& x) { return amp * gauss(x, {0.5, -0.3, 0.2}, 1.6); });
  s.u_t = sample_real(g, [&](const Vec3& x) { return amp * 0.4 * gauss(x, {-0.4, 0.1, 0.0}, 1.8); });
  s.v = sample_real(g, [&](const Vec3& x) { return amp * gauss(x, {0.0, 0.6, -0.5}, 1.5) * (1.0 + 0.3 * x[0]); });
  s.v_t = sample_real(g, [&](const Vec3& x) { return amp * 0.7 * gauss(x, {0.3, 0.0, 0.4}, 1.7); });
  // The wave channel carries no zero mode.
  double mean = 0.0;
  for (double x : s.u) mean += x;
  mean /= static_cast<double>(s.u.size());
  for (double& x : s.u) x -= mean;
  return s;
}

double max_diff(const RealField& a, const RealField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Fourth-order centered difference along axis l on the periodic grid.
RealField fd_derivative(const SpectralGrid& g, const RealField& f, int l) {
  RealField out(g.size());
  const std::size_t n = g.n();
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    auto ii = g.unravel(idx);
    auto at = [&](long off) {
      auto jj = ii;
      jj[l] = static_cast<std::size_t>((static_cast<long>(ii[l]) + off + static_cast<long>(n)) % static_cast<long>(n));
      return f[g.ravel(jj)];
    };
    out[idx] = (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) / (12.0 * g.spacing());
  }
  return out;
}

CouplingCoefficients generic_coefficients() {
  CouplingCoefficients c;
  const double a[4][4] = {{0.7, 0.1, -0.2, 0.05}, {0.1, -0.3, 0.4, 0.0}, {-0.2, 0.4, 0.9, 0.15}, {0.05, 0.0, 0.15, 0.2}};
  const double b[4][4] = {{0.0, 0.3, -0.1, 0.2}, {0.3, 1.0, 0.2, -0.1}, {-0.1, 0.2, 0.6, 0.05}, {0.2, -0.1, 0.05, 0.8}};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      c.A[i][j] = a[i][j];
      c.B[i][j] = b[i][j];
    }
  c.D = 0.6;
  return c;
}

}  // namespace

TEST_CASE("coupling coefficient validation", "[system]") {
  CouplingCoefficients c = generic_coefficients();
  CHECK_NOTHROW(c.validate());
  c.B[0][0] = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = generic_coefficients();
  c.A[1][2] = 5.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = generic_coefficients();
  c.B[3][1] = 5.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK(CouplingCoefficients::radial_model().spatial_b_norm() == Approx(1.0));
}

TEST_CASE("normalized variables", "[system]") {
  const auto g = build_grid(3, 16, 12.0);

  SECTION("zero state") {
    PhysicalState z{RealField(g->size(), 0.0), RealField(g->size(), 0.0), RealField(g->size(), 0.0),
                    RealField(g->size(), 0.0)};
    const auto U = to_normalized(*g, z);
    CHECK(sup_abs(U.U_wa) == 0.0);
    CHECK(sup_abs(U.U_kg) == 0.0);
  }
  SECTION("u = 0, u_t = g gives U_wa = g^") {
    PhysicalState s = smooth_state(*g, 1.0);
    s.u.assign(g->size(), 0.0);
    const auto U = to_normalized(*g, s);
    const ComplexField gh = g->forward(s.u_t);
    for (std::size_t i = 0; i < g->size(); ++i) CHECK(std::abs(U.U_wa[i] - gh[i]) < 1e-14);
  }
  SECTION("single-mode v by hand") {
    // v = cos(x . xi0), v_t = 0: v^ = (L^3/2)(delta_{xi0} + delta_{-xi0}) up to the centering phase.
    const std::size_t m = g->ravel({1, 2, 0});
    const Vec3 xi0 = g->wavevector(m);
    PhysicalState s = smooth_state(*g, 0.0);
    s.v = sample_real(*g, [&](const Vec3& x) { return std::cos(x[0] * xi0[0] + x[1] * xi0[1] + x[2] * xi0[2]); });
    const auto U = to_normalized(*g, s);
    const double L3 = std::pow(g->box_length(), 3);
    const Complex expected = Complex(0.0, -lambda_kg(xi0)) * (0.5 * L3);
    CHECK(std::abs(U.U_kg[m] - expected) < 1e-9);
    CHECK(std::abs(U.U_kg[g->negated(m)] - expected) < 1e-9);
    double rest = 0.0;
    for (std::size_t i = 0; i < g->size(); ++i)
      if (i != m && i != g->negated(m)) rest = std::max(rest, std::abs(U.U_kg[i]));
    CHECK(rest < 1e-9);
  }
  SECTION("round trip on random real data") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd;
    PhysicalState s;
    for (RealField* f : {&s.u, &s.u_t, &s.v, &s.v_t}) {
      f->resize(g->size());
      for (auto& x : *f) x = nd(rng);
      // remove Nyquist content and, for u, the mean
      ComplexField fh = g->forward(*f);
      for (std::size_t i = 0; i < g->size(); ++i)
        if (g->nyquist(i) || (f == &s.u && i == 0)) fh[i] = 0.0;
      *f = g->inverse_real(fh);
    }
    const auto U = to_normalized(*g, s);
    const PhysicalState b = from_normalized(*g, U.U_wa, U.U_kg);
    CHECK(max_diff(b.u, s.u) < 1e-12);
    CHECK(max_diff(b.u_t, s.u_t) < 1e-12);
    CHECK(max_diff(b.v, s.v) < 1e-12);
    CHECK(max_diff(b.v_t, s.v_t) < 1e-12);
  }
  SECTION("real U_wa carries no u beyond the mean") {
    // U real in physical space: Lambda u = i(U - conj U)/2 = 0.
    ComplexField Uphys(g->size());
    for (std::size_t i = 0; i < g->size(); ++i) Uphys[i] = gauss(g->position(i), {0, 0, 0}, 1.5);
    const ComplexField Uh = g->forward(Uphys);
    const auto pair = reconstruct(*g, Uh, Dispersion::wave);
    CHECK(sup_abs(pair.f_hat) < 1e-12);
  }
  SECTION("conjugating U flips the sign of u") {
    const PhysicalState s = smooth_state(*g, 1.0);
    const auto U = to_normalized(*g, s);
    ComplexField Ubar(g->size());
    for (std::size_t i = 0; i < g->size(); ++i) Ubar[i] = std::conj(U.U_wa[g->negated(i)]);
    const auto a = reconstruct(*g, U.U_wa, Dispersion::wave);
    const auto b = reconstruct(*g, Ubar, Dispersion::wave);
    for (std::size_t i = 0; i < g->size(); ++i) {
      CHECK(std::abs(a.f_hat[i] + b.f_hat[i]) < 1e-12);
      CHECK(std::abs(a.ft_hat[i] - b.ft_hat[i]) < 1e-12);
    }
  }
}

TEST_CASE("nonlinearities", "[system]") {
  const auto g = build_grid(3, 32, 20.0);
  const WkgSystem sys(g, generic_coefficients(), /*dealias=*/false);
  const PhysicalState s = smooth_state(*g, 1.0);
  const auto U = to_normalized(*g, s);

  SECTION("v = 0 gives N_wa = 0, u = 0 gives N_kg = 0") {
    PhysicalState z = s;
    z.v.assign(g->size(), 0.0);
    z.v_t.assign(g->size(), 0.0);
    const auto Uz = to_normalized(*g, z);
    CHECK(sup_abs(sys.nonlinearity_wave(Uz.U_wa, Uz.U_kg)) == 0.0);
    PhysicalState y = s;
    y.u.assign(g->size(), 0.0);
    y.u_t.assign(g->size(), 0.0);
    const auto Uy = to_normalized(*g, y);
    CHECK(sup_abs(sys.nonlinearity_kg(Uy.U_wa, Uy.U_kg)) < 1e-14);
  }
  SECTION("A = 0, D = 1, constant v") {
    CouplingCoefficients c;
    c.D = 1.0;
    const WkgSystem d(g, c, false);
    PhysicalState z = smooth_state(*g, 0.0);
    z.v.assign(g->size(), 0.37);
    const auto Uz = to_normalized(*g, z);
    const RealField n = g->inverse_real(d.nonlinearity_wave(Uz.U_wa, Uz.U_kg));
    for (double x : n) CHECK(x == Approx(0.37 * 0.37).epsilon(1e-12));
  }
  SECTION("spatial-identity B on a single mode") {
    CouplingCoefficients c;
    for (int j = 1; j < 4; ++j) c.B[j][j] = 1.0;
    const WkgSystem d(g, c, false);
    const std::size_t m = g->ravel({2, 1, 31});
    const Vec3 xi0 = g->wavevector(m);
    PhysicalState z = s;
    z.v = sample_real(*g, [&](const Vec3& x) { return std::cos(x[0] * xi0[0] + x[1] * xi0[1] + x[2] * xi0[2]); });
    z.v_t.assign(g->size(), 0.0);
    const auto Uz = to_normalized(*g, z);
    const RealField n = g->inverse_real(d.nonlinearity_kg(Uz.U_wa, Uz.U_kg));
    const double k2 = xi0[0] * xi0[0] + xi0[1] * xi0[1] + xi0[2] * xi0[2];
    RealField expected(g->size());
    for (std::size_t i = 0; i < g->size(); ++i) expected[i] = -k2 * z.u[i] * z.v[i];
    CHECK(max_diff(n, expected) < 1e-7);
  }
  SECTION("finite-difference oracle") {
    const auto c = generic_coefficients();
    // Errors of the spectral nonlinearities against a 4th-order stencil evaluation.
    auto mismatch = [&](std::size_t n) {
      const auto gg = build_grid(3, n, 20.0);
      const WkgSystem ss(gg, c, false);
      const PhysicalState st = smooth_state(*gg, 1.0);
      const auto Ut = to_normalized(*gg, st);
      std::array<RealField, 4> dv;
      dv[0] = st.v_t;
      for (int j = 0; j < 3; ++j) dv[j + 1] = fd_derivative(*gg, st.v, j);
      std::array<RealField, 3> dvt;
      for (int j = 0; j < 3; ++j) dvt[j] = fd_derivative(*gg, st.v_t, j);
      std::array<std::array<RealField, 3>, 3> dd;
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) dd[j][k] = fd_derivative(*gg, dv[k + 1], j);
      RealField n_wa(gg->size()), n_kg(gg->size());
      for (std::size_t i = 0; i < gg->size(); ++i) {
        double q = c.D * st.v[i] * st.v[i];
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b) q += c.A[a][b] * dv[a][i] * dv[b][i];
        n_wa[i] = q;
        double w = 0.0;
        for (int j = 0; j < 3; ++j) {
          for (int k = 0; k < 3; ++k) w += c.B[j + 1][k + 1] * dd[j][k][i];
          w += 2.0 * c.B[0][j + 1] * dvt[j][i];
        }
        n_kg[i] = st.u[i] * w;
      }
      const RealField a = gg->inverse_real(ss.nonlinearity_wave(Ut.U_wa, Ut.U_kg));
      const RealField b = gg->inverse_real(ss.nonlinearity_kg(Ut.U_wa, Ut.U_kg));
      return std::array<double, 2>{max_diff(a, n_wa) / sup_abs(n_wa), max_diff(b, n_kg) / sup_abs(n_kg)};
    };
    const auto coarse = mismatch(32);
    const auto fine = mismatch(64);
    CHECK(fine[0] < 1e-3);
    CHECK(fine[1] < 5e-3);  // nested stencil for second derivatives
    // O(h^4): halving h shrinks the mismatch by roughly 16.
    CHECK(coarse[0] / fine[0] > 10.0);
    CHECK(coarse[1] / fine[1] > 10.0);
  }
}

TEST_CASE("profile integrator", "[integrator]") {
  const auto g = build_grid(3, 16, 16.0);
  const PhysicalState s0 = smooth_state(*g, 0.3);
  const auto U = to_normalized(*g, s0);
  ProfileState p0{U.U_wa, U.U_kg, 0.0};

  SECTION("zero coefficients: bit-stable") {
    const WkgSystem lin(g, CouplingCoefficients{});
    const ProfileIntegrator rk(lin);
    ProfileState p = p0;
    for (int i = 0; i < 100; ++i) p = rk.step(p, 0.1);
    double m = 0.0;
    for (std::size_t i = 0; i < g->size(); ++i)
      m = std::max({m, std::abs(p.V_wa[i] - p0.V_wa[i]), std::abs(p.V_kg[i] - p0.V_kg[i])});
    CHECK(m < 1e-13);
    CHECK(p.t == Approx(10.0));
  }
  SECTION("step size rules") {
    const WkgSystem sys(g, CouplingCoefficients::radial_model());
    const ProfileIntegrator rk(sys, 0.25);
    CHECK_THROWS_AS(rk.step(p0, 0.0), ConfigError);
    CHECK_THROWS_AS(rk.step(p0, 0.3), ConfigError);
  }
  SECTION("non-finite stage aborts with the time") {
    const WkgSystem sys(g, CouplingCoefficients::radial_model());
    const ProfileIntegrator rk(sys);
    ProfileState bad = p0;
    bad.V_kg[5] = Complex(NAN, 0.0);
    bad.t = 1.5;
    try {
      (void)rk.step(bad, 0.1);
      FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
      CHECK(std::string(e.what()).find("1.5") != std::string::npos);
    }
  }
  SECTION("fourth-order self-convergence and reality") {
    const WkgSystem sys(g, generic_coefficients());
    const ProfileIntegrator rk(sys);
    auto run = [&](double dt) {
      ProfileState p = p0;
      const int steps = static_cast<int>(std::lround(2.0 / dt));
      for (int i = 0; i < steps; ++i) p = rk.step(p, dt);
      return p;
    };
    const ProfileState a = run(0.2), b = run(0.1), c = run(0.05);
    double e1 = 0.0, e2 = 0.0;
    for (std::size_t i = 0; i < g->size(); ++i) {
      e1 = std::max(e1, std::abs(a.V_kg[i] - b.V_kg[i]) + std::abs(a.V_wa[i] - b.V_wa[i]));
      e2 = std::max(e2, std::abs(b.V_kg[i] - c.V_kg[i]) + std::abs(b.V_wa[i] - c.V_wa[i]));
    }
    CHECK(e1 / e2 > 12.0);
    CHECK(e1 / e2 < 20.0);

    // Reconstructed physical fields stay real.
    const auto Uc = unprofile(*g, c);
    for (auto disp : {Dispersion::wave, Dispersion::klein_gordon}) {
      const auto pair = reconstruct(*g, disp == Dispersion::wave ? Uc.U_wa : Uc.U_kg, disp);
      for (const ComplexField* f : {&pair.f_hat, &pair.ft_hat}) {
        const ComplexField phys = g->inverse(*f);
        double im = 0.0, re = 0.0;
        for (const auto& z : phys) {
          im = std::max(im, std::abs(z.imag()));
          re = std::max(re, std::abs(z.real()));
        }
        CHECK(im <= 1e-10 * re);
      }
    }
  }
}
