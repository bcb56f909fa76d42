#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "wkg/diagnostics.hpp"
#include "wkg/initial_data.hpp"
#include "wkg/integrator.hpp"

using namespace wkg;
using Catch::Approx;

namespace {

ComplexField gaussian_phys(const SpectralGrid& g, double sigma, const Vec3& c = {0.0, 0.0, 0.0}) {
  ComplexField f(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec3 x = g.position(i);
    const double r2 = (x[0] - c[0]) * (x[0] - c[0]) + (x[1] - c[1]) * (x[1] - c[1]) + (x[2] - c[2]) * (x[2] - c[2]);
    f[i] = std::exp(-0.5 * r2 / (sigma * sigma));
  }
  return f;
}

// Random smooth, contained physical field: a few Gaussians with random centres, widths and phases.
ComplexField random_blob(const SpectralGrid& g, std::mt19937_64& rng, bool real = true) {
  std::uniform_real_distribution<double> c(-1.5, 1.5), w(1.2, 1.8), a(-1.0, 1.0);
  ComplexField f(g.size(), 0.0);
  for (int b = 0; b < 3; ++b) {
    const Vec3 centre{c(rng), c(rng), c(rng)};
    const double width = w(rng);
    const Complex amp(a(rng), real ? 0.0 : a(rng));
    const ComplexField gb = gaussian_phys(g, width, centre);
    for (std::size_t i = 0; i < g.size(); ++i) f[i] += amp * gb[i];
  }
  return f;
}

ComplexField sum(const ComplexField& a, const ComplexField& b) {
  ComplexField out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

// Shell-0 synthetic profile: phi_0(|xi|) times a modulation, no other content.
ComplexField shell_profile(const SpectralGrid& g, const Vec3& shift) {
  ComplexField f(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec3 xi = g.wavevector(i);
    f[i] = g.nyquist(i) ? Complex(0.0)
                        : lp::phi_k(norm3(xi), 0) * std::polar(1.0, -(xi[0] * shift[0] + xi[1] * shift[1] + xi[2] * shift[2]));
  }
  return f;
}

// Independent assembly of both Z-norm weights by explicit loops.
struct ZOracle {
  double wa = 0.0, kg = 0.0;
};

ZOracle z_oracle(const SpectralGrid& g, const ComplexField& V, const DyadicParams& prm) {
  ZOracle out;
  for (int k = g.k_min(); k <= g.k_max(); ++k) {
    ComplexField pk(g.size());
    double sup = 0.0, l2 = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double r = norm3(g.wavevector(i));
      pk[i] = g.nyquist(i) ? Complex(0.0) : lp::phi_k(r, k) * V[i];
      sup = std::max(sup, std::abs(pk[i]));
      l2 += std::norm(pk[i]);
    }
    l2 = std::sqrt(l2 / std::pow(g.box_length(), 3));
    const ComplexField phys = g.inverse(pk);
    double jsum = 0.0;
    for (int j = std::max(-k, 0); std::ldexp(1.0, j) <= 4.0 * g.box_length(); ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double w = lp::phi_tilde(norm3(g.position(i)), k, j);
        s += w * w * std::norm(phys[i]);
      }
      jsum += std::ldexp(std::sqrt(s * g.cell_volume()), j);
    }
    const double kp = std::max(k, 0), km = std::min(k, 0);
    const double base = std::exp2((prm.N0 - 1.5 * prm.d) * kp);
    out.wa = std::max(out.wa, base * (std::exp2(km * (1 + 4 * prm.delta)) * sup +
                                      std::exp2(km * (0.5 + 4 * prm.delta)) * jsum));
    out.kg = std::max(out.kg, base * std::exp2(km * (0.5 - prm.kappa)) * sup +
                                  std::exp2((prm.N0 + 3 * prm.d - 1) * kp - km * (1 + prm.kappa)) * l2);
  }
  return out;
}

}  // namespace

TEST_CASE("Z-norms: zero, homogeneity, triangle inequality", "[diagnostics]") {
  auto g = build_grid(3, 32, 24.0);
  const DyadicParams prm;
  const ComplexField zero(g->size(), 0.0);
  CHECK(z_norm_wave(*g, zero, prm) == 0.0);
  CHECK(z_norm_kg(*g, zero, prm) == 0.0);

  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 3; ++trial) {
    const ComplexField f = g->forward(random_blob(*g, rng, false));
    const ComplexField h = g->forward(random_blob(*g, rng, false));
    const Complex c(-1.7, 0.4);
    CHECK(z_norm_wave(*g, scaled(f, c), prm) == Approx(std::abs(c) * z_norm_wave(*g, f, prm)).epsilon(1e-12));
    CHECK(z_norm_kg(*g, scaled(f, c), prm) == Approx(std::abs(c) * z_norm_kg(*g, f, prm)).epsilon(1e-12));
    CHECK(z_norm_wave(*g, sum(f, h), prm) <= z_norm_wave(*g, f, prm) + z_norm_wave(*g, h, prm) + 1e-9);
    CHECK(z_norm_kg(*g, sum(f, h), prm) <= z_norm_kg(*g, f, prm) + z_norm_kg(*g, h, prm) + 1e-9);
  }
}

TEST_CASE("Z-norms on a single-shell profile match a direct summation", "[diagnostics]") {
  auto g = build_grid(3, 32, 24.0);
  const DyadicParams prm;
  for (const Vec3& shift : {Vec3{0.0, 0.0, 0.0}, Vec3{1.5, -0.75, 0.0}}) {
    const ComplexField V = shell_profile(*g, shift);
    const ZOracle o = z_oracle(*g, V, prm);
    CHECK(z_norm_wave(*g, V, prm) == Approx(o.wa).epsilon(1e-10));
    CHECK(z_norm_kg(*g, V, prm) == Approx(o.kg).epsilon(1e-10));
  }
}

TEST_CASE("Z-norm j-truncation is monotone in the cap", "[diagnostics]") {
  auto g = build_grid(3, 32, 24.0);
  const DyadicParams prm;
  const ComplexField V = shell_profile(*g, {2.0, 0.0, 0.0});
  const double full = z_norm_wave(*g, V, prm);
  CHECK(lp::last_j(*g) == static_cast<int>(std::floor(std::log2(4.0 * 24.0))));
  double prev = 0.0;
  for (int cap = 0; cap <= lp::last_j(*g); ++cap) {
    const double v = z_norm_wave(*g, V, prm, cap);
    CHECK(v >= prev);
    prev = v;
  }
  CHECK(prev == full);
}

TEST_CASE("wave energy", "[diagnostics]") {
  const DyadicParams prm;
  SECTION("zero state") {
    auto g = build_grid(3, 16, 8.0);
    CHECK(energy_wave(*g, ComplexField(g->size(), 0.0), prm) == 0.0);
  }
  SECTION("single mode with |xi| = 1") {
    // L = 8 pi gives a wavenumber step of 1/4; mode 4 along x has |xi| = 1.
    auto g = build_grid(3, 16, 8.0 * std::numbers::pi);
    const Complex a(0.6, -0.2);
    ComplexField ut(g->size(), 0.0), u(g->size(), 0.0);
    for (std::size_t i = 0; i < g->size(); ++i) {
      const auto m = g->modes(i);
      if (m[1] == 0 && m[2] == 0 && m[0] == 4) ut[i] = a;
      if (m[1] == 0 && m[2] == 0 && m[0] == -4) ut[i] = std::conj(a);
    }
    const ComplexField U = normalize(*g, u, ut, Dispersion::wave);
    const double expected = 2.0 * std::pow(2.0, prm.N(0)) * std::norm(a) / std::pow(g->box_length(), 3);
    CHECK(energy_wave(*g, U, prm) == Approx(expected).epsilon(1e-13));
    CHECK(energy_wave_physical(*g, u, ut, prm) == Approx(expected).epsilon(1e-13));
  }
  SECTION("Fourier formula equals the half-wave norm on real data") {
    auto g = build_grid(3, 32, 24.0);
    std::mt19937_64 rng(5);
    ComplexField u = random_blob(*g, rng), ut = random_blob(*g, rng);
    const ComplexField u_hat = g->forward(u), ut_hat = g->forward(ut);
    const ComplexField U = normalize(*g, u_hat, ut_hat, Dispersion::wave);
    CHECK(energy_wave(*g, U, prm) == Approx(energy_wave_physical(*g, u_hat, ut_hat, prm)).epsilon(1e-10));
  }
  SECTION("linear evolution leaves it unchanged") {
    auto g = build_grid(3, 32, 24.0);
    std::mt19937_64 rng(6);
    const ComplexField V = normalize(*g, g->forward(random_blob(*g, rng)), g->forward(random_blob(*g, rng)),
                                     Dispersion::wave);
    const double e0 = energy_wave(*g, propagate(*g, V, Dispersion::wave, 0.0), prm);
    for (double t : {1.0, 7.5, 30.0})
      CHECK(energy_wave(*g, propagate(*g, V, Dispersion::wave, t), prm) == Approx(e0).epsilon(1e-10));
  }
}

TEST_CASE("Klein-Gordon energy", "[diagnostics]") {
  const DyadicParams prm;
  auto g = build_grid(3, 32, 24.0);
  std::mt19937_64 rng(7);
  const ComplexField Ukg = normalize(*g, g->forward(random_blob(*g, rng)), g->forward(random_blob(*g, rng)),
                                     Dispersion::klein_gordon);
  const ComplexField zero(g->size(), 0.0);
  CouplingCoefficients c = CouplingCoefficients::radial_model();
  c.B[1][2] = c.B[2][1] = 0.3;
  c.B[3][3] = -0.5;

  SECTION("zero state") {
    const auto e = energy_kg(*g, zero, zero, c, prm);
    CHECK(e.total == 0.0);
    CHECK_FALSE(e.degraded);
  }
  SECTION("u = 0 gives the flat energy, constant under linear flow") {
    const auto e0 = energy_kg(*g, zero, Ukg, c, prm);
    CHECK(e0.correction == 0.0);
    CHECK(e0.total == e0.flat);
    for (double t : {2.0, 9.0}) {
      const auto e = energy_kg(*g, zero, propagate(*g, Ukg, Dispersion::klein_gordon, t), c, prm);
      CHECK(e.total == Approx(e0.total).epsilon(1e-10));
    }
  }
  SECTION("the correction is bounded by |u|_inf |B| times the flat energy") {
    const ComplexField u = scaled(random_blob(*g, rng), 0.05);
    const ComplexField Uwa = normalize(*g, g->forward(u), zero, Dispersion::wave);
    const auto e = energy_kg(*g, Uwa, Ukg, c, prm);
    const double u_inf = sup_abs(g->inverse_real(reconstruct(*g, Uwa, Dispersion::wave).f_hat));
    CHECK(e.correction != 0.0);
    CHECK(std::abs(e.total - e.flat) <= (1.0 + 1e-9) * u_inf * c.spatial_b_norm() * e.gradient);
    CHECK(e.gradient <= e.flat);
    CHECK_FALSE(e.degraded);
  }
  SECTION("large u flags the energy as degraded") {
    const ComplexField u = scaled(random_blob(*g, rng), 40.0);
    const ComplexField Uwa = normalize(*g, g->forward(u), zero, Dispersion::wave);
    CHECK(energy_kg(*g, Uwa, Ukg, c, prm).degraded);
  }
}

TEST_CASE("weighted Sobolev norms", "[diagnostics]") {
  auto g = build_grid(3, 64, 24.0);

  SECTION("b = 0 is the plain H^a norm") {
    std::mt19937_64 rng(3);
    const ComplexField f = random_blob(*g, rng);
    const double plain = std::sqrt(sobolev_sq(*g, g->forward(f), 1.5));
    for (auto fl : {SobolevFlavor::wa, SobolevFlavor::kg, SobolevFlavor::omega})
      CHECK(sobolev_weighted_norm(*g, f, 1.5, 0, fl).value == Approx(plain).epsilon(1e-12));
  }
  SECTION("Gaussian moments for a = 0, b = 1") {
    const double s = 1.6;
    const ComplexField f = gaussian_phys(*g, s);
    const double n0 = std::pow(std::numbers::pi * s * s, 0.75);
    const double wa = n0 * (1.0 + 3.0 / (std::sqrt(2.0) * s) + 3.0 + 1.5 * std::sqrt(3.0));
    const double kg = wa + n0 * 3.0 * s / std::sqrt(2.0);
    CHECK(sobolev_weighted_norm(*g, f, 0.0, 1, SobolevFlavor::wa).value == Approx(wa).epsilon(1e-9));
    CHECK(sobolev_weighted_norm(*g, f, 0.0, 1, SobolevFlavor::kg).value == Approx(kg).epsilon(1e-9));
    CHECK(sobolev_weighted_norm(*g, f, 0.0, 1, SobolevFlavor::omega).value == Approx(n0).epsilon(1e-9));
  }
  SECTION("embedding chain on random samples") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 10; ++trial) {
      const ComplexField f = random_blob(*g, rng);
      const double a = 0.5 * trial / 3.0;
      const double plain = std::sqrt(sobolev_sq(*g, g->forward(f), a));
      for (int b : {1, 2}) {
        const double kg = sobolev_weighted_norm(*g, f, a, b, SobolevFlavor::kg).value;
        const double wa = sobolev_weighted_norm(*g, f, a, b, SobolevFlavor::wa).value;
        const double om = sobolev_weighted_norm(*g, f, a, b, SobolevFlavor::omega).value;
        CHECK(kg >= wa);
        CHECK(wa >= om);
        CHECK(om >= plain);
      }
    }
  }
  SECTION("homogeneity and triangle inequality") {
    std::mt19937_64 rng(4);
    const ComplexField f = random_blob(*g, rng), h = random_blob(*g, rng);
    for (auto fl : {SobolevFlavor::wa, SobolevFlavor::kg, SobolevFlavor::omega}) {
      const double nf = sobolev_weighted_norm(*g, f, 1.0, 1, fl).value;
      const double nh = sobolev_weighted_norm(*g, h, 1.0, 1, fl).value;
      CHECK(sobolev_weighted_norm(*g, scaled(f, -3.0), 1.0, 1, fl).value == Approx(3.0 * nf).epsilon(1e-12));
      CHECK(sobolev_weighted_norm(*g, sum(f, h), 1.0, 1, fl).value <= nf + nh + 1e-9);
    }
  }
  SECTION("containment and order limits") {
    const ComplexField edge = gaussian_phys(*g, 1.0, {11.0, 0.0, 0.0});
    CHECK_THROWS_AS(sobolev_weighted_norm(*g, edge, 0.0, 1, SobolevFlavor::wa), ContainmentError);
    const auto rep = sobolev_weighted_norm(*g, edge, 0.0, 1, SobolevFlavor::wa, ContainmentMode::report);
    CHECK(rep.boundary_mass >= kContainmentTolerance);
    CHECK_THROWS_AS(sobolev_weighted_norm(*g, edge, 0.0, 3, SobolevFlavor::wa), ConfigError);
  }
}

TEST_CASE("smallness norms scale linearly in eps0", "[diagnostics]") {
  auto g = build_grid(3, 32, 32.0);
  const DyadicParams prm;
  std::vector<double> totals;
  for (double eps : {1e-3, 2e-3, 8e-3}) {
    InitialDataSpec spec;
    spec.eps0 = eps;
    spec.bumps.push_back({DataField::v, 1.0, {0.0, 0.0, 0.0}, 2.0});
    spec.bumps.push_back({DataField::u, 0.5, {1.0, 0.0, 0.0}, 2.0});
    const auto d = make_initial_data(*g, spec);
    totals.push_back(smallness_norms(*g, d.state.V_wa, d.state.V_kg, prm, 1).total);
  }
  CHECK(totals[1] == Approx(2.0 * totals[0]).epsilon(1e-10));
  CHECK(totals[2] == Approx(8.0 * totals[0]).epsilon(1e-10));
}

TEST_CASE("Hardy shell quantities", "[diagnostics]") {
  auto g = build_grid(3, 32, 24.0);
  const ComplexField zero(g->size(), 0.0);
  const auto h0 = hardy_quantities(*g, zero, 0);
  CHECK(h0.A == 0.0);
  CHECK(h0.B == 0.0);
  std::mt19937_64 rng(9);
  const ComplexField f = g->forward(random_blob(*g, rng, false));
  for (int k = g->k_min(); k <= g->k_max(); ++k) {
    const auto a = hardy_quantities(*g, f, k);
    const auto b = hardy_quantities(*g, scaled(f, Complex(0.0, 2.0)), k);
    CHECK(b.A == Approx(2.0 * a.A).epsilon(1e-12).margin(1e-300));
    CHECK(b.B == Approx(2.0 * a.B).epsilon(1e-12).margin(1e-300));
    const double cmp = hardy_comparison(*g, f, k);
    if (cmp > 1e-12 * hardy_comparison(*g, f, 0)) {
      CHECK(a.B <= 8.0 * cmp);
      CHECK(cmp <= 8.0 * a.B);
    }
  }
}

TEST_CASE("sup-norm record", "[diagnostics]") {
  auto g = build_grid(3, 32, 24.0);
  const ComplexField zero(g->size(), 0.0);

  SECTION("zero state") {
    WkgSystem sys(g, CouplingCoefficients::radial_model());
    const auto rec = sup_norm_record(sys, zero, zero);
    CHECK(rec.sum_u == 0.0);
    CHECK(rec.sum_v == 0.0);
    CHECK(rec.entries.size() == 2 * 15);
  }
  SECTION("linear single mode keeps a constant amplitude") {
    WkgSystem sys(g, CouplingCoefficients{});
    ComplexField V(g->size(), 0.0);
    for (std::size_t i = 0; i < g->size(); ++i) {
      const auto m = g->modes(i);
      if (m == std::array<int, 3>{2, 1, 0}) V[i] = 3.0;
      if (m == std::array<int, 3>{-2, -1, 0}) V[i] = 3.0;
    }
    // U(x, t) = (6 / L^3) e^{-it Lambda} cos(x . xi) = v_t - i Lambda v, so at x = 0 the sups of v and v_t
    // are the two quadrature components of a fixed amplitude.
    const double lam = std::sqrt(1.0 + 5.0 * std::pow(g->wavenumber_step(), 2));
    const double amp = 6.0 / std::pow(g->box_length(), 3);
    auto entry = [](const SupNormRecord& r, int a0) {
      for (const auto& e : r.entries)
        if (e.field == 'v' && e.alpha0 == a0 && e.alpha == std::array<int, 3>{0, 0, 0}) return e.value;
      return -1.0;
    };
    for (double t : {0.0, 0.3, 5.0, 17.0}) {
      const auto r = sup_norm_record(sys, zero, propagate(*g, V, Dispersion::klein_gordon, t));
      CHECK(std::hypot(lam * entry(r, 0), entry(r, 1)) == Approx(amp).epsilon(1e-12));
      CHECK(entry(r, 2) == Approx(lam * lam * entry(r, 0)).epsilon(1e-12).margin(1e-15 * amp));
      CHECK(r.sum_u == 0.0);
    }
  }
  SECTION("nonlinear state matches a direct grid scan") {
    WkgSystem sys(g, CouplingCoefficients::radial_model());
    InitialDataSpec spec;
    spec.eps0 = 1e-2;
    spec.bumps.push_back({DataField::v, 1.0, {0.0, 0.0, 0.0}, 2.0});
    spec.bumps.push_back({DataField::u, 1.0, {0.5, 0.0, 0.0}, 2.0});
    ProfileState s = make_initial_data(*g, spec).state;
    ProfileIntegrator step(sys);
    for (int i = 0; i < 4; ++i) s = step.step(s, 0.25);
    const auto U = unprofile(*g, s);
    const auto rec = sup_norm_record(sys, U.U_wa, U.U_kg);
    const PhysicalState p = from_normalized(*g, U.U_wa, U.U_kg, s.t);
    auto scan = [&](const RealField& f) {
      double m = 0.0;
      for (double x : f) m = std::max(m, std::abs(x));
      return m;
    };
    auto dx = [&](const RealField& f, int l) { return g->inverse_real(spectral_derivative(*g, g->forward(f), l)); };
    for (const auto& e : rec.entries) {
      if (e.alpha0 == 2) continue;
      RealField f = e.field == 'u' ? (e.alpha0 == 0 ? p.u : p.u_t) : (e.alpha0 == 0 ? p.v : p.v_t);
      for (int l = 0; l < 3; ++l)
        for (int r = 0; r < e.alpha[l]; ++r) f = dx(f, l);
      CHECK(e.value == Approx(scan(f)).epsilon(1e-9).margin(1e-15));
    }
    // d_0^2 v from the equation: Lap v - v + N^kg.
    const auto N = sys.nonlinearity(U.U_wa, U.U_kg);
    RealField lap(g->size(), 0.0);
    for (int l = 0; l < 3; ++l) {
      const RealField d2 = dx(dx(p.v, l), l);
      for (std::size_t i = 0; i < g->size(); ++i) lap[i] += d2[i];
    }
    const RealField nkg = g->inverse_real(N.kg);
    RealField vtt(g->size());
    for (std::size_t i = 0; i < g->size(); ++i) vtt[i] = lap[i] - p.v[i] + nkg[i];
    for (const auto& e : rec.entries)
      if (e.field == 'v' && e.alpha0 == 2) CHECK(e.value == Approx(scan(vtt)).epsilon(1e-9));
  }
}

TEST_CASE("decay fit", "[diagnostics]") {
  std::vector<double> t{5, 8, 12, 18, 27, 40};
  SECTION("exact power law") {
    std::vector<double> v;
    for (double x : t) v.push_back(3.0 * std::pow(x, -1.5));
    const auto fit = decay_fit(t, v, 5.0, 40.0);
    CHECK(fit.exponent == Approx(-1.5).margin(1e-12));
    CHECK(fit.stderr_ < 1e-12);
    CHECK(fit.samples == 6);
    CHECK(fit.t_lo == 5.0);
    CHECK(fit.t_hi == 40.0);
  }
  SECTION("constant series") {
    const auto fit = decay_fit(t, std::vector<double>(6, 0.25), 0.0, 100.0);
    CHECK(fit.exponent == Approx(0.0).margin(1e-14));
  }
  SECTION("preconditions") {
    std::vector<double> v(6, 1.0);
    CHECK_THROWS_AS(decay_fit(t, v, 8.0, 40.0), ConfigError);  // five samples
    std::vector<double> tt{10, 11, 12, 13, 14, 15};
    CHECK_THROWS_AS(decay_fit(tt, v, 0.0, 100.0), ConfigError);  // span below 4
    v[3] = 0.0;
    CHECK_THROWS_AS(decay_fit(t, v, 0.0, 100.0), NumericalError);
    v[3] = -1.0;
    CHECK_THROWS_AS(decay_fit(t, v, 0.0, 100.0), NumericalError);
  }
}

TEST_CASE("diagnostics series: ordering, CSV and JSON", "[diagnostics]") {
  DiagnosticsSeries s;
  s.append(0.0, {{"a", 1.0}, {"b,c", 2.5}});
  s.append(0.5, {{"a", 0.1}, {"b,c", 1e-300}});
  CHECK_THROWS_AS(s.append(0.5, {{"a", 1.0}, {"b,c", 1.0}}), NumericalError);
  CHECK_THROWS_AS(s.append(1.0, {{"b,c", 1.0}, {"a", 1.0}}), NumericalError);
  CHECK_THROWS_AS(s.append(1.0, {{"a", 1.0}}), NumericalError);
  CHECK_THROWS_AS(s.append(1.0, {{"a", std::nan("")}, {"b,c", 1.0}}), NumericalError);
  CHECK(s.size() == 2);
  CHECK(s.column("a") == std::vector<double>{1.0, 0.1});
  CHECK_THROWS_AS(s.column("zzz"), ConfigError);

  ::setenv("SOURCE_DATE_EPOCH", "86400", 1);
  std::ostringstream os;
  s.write_csv(os);
  ::unsetenv("SOURCE_DATE_EPOCH");
  const std::string csv = os.str();
  CHECK(csv.rfind("# wkg diagnostics, generated 1970-01-02T00:00:00Z\r\n", 0) == 0);
  CHECK(csv.find("t,a,\"b,c\"\r\n") != std::string::npos);
  // Data rows round-trip exactly.
  const auto last = csv.rfind("0.5,");
  REQUIRE(last != std::string::npos);
  std::istringstream row(csv.substr(last));
  std::string cell;
  std::vector<double> parsed;
  while (std::getline(row, cell, ',')) parsed.push_back(std::stod(cell));
  CHECK(parsed == std::vector<double>{0.5, 0.1, 1e-300});
  CHECK(csv.substr(csv.size() - 2) == "\r\n");

  const auto j = s.to_json();
  CHECK(j["times"][1].get<double>() == 0.5);
  CHECK(j["columns"]["b,c"][0].get<double>() == 2.5);
}

TEST_CASE("sampled diagnostics row", "[diagnostics]") {
  auto g = build_grid(3, 32, 32.0);
  WkgSystem sys(g, CouplingCoefficients::radial_model());
  InitialDataSpec spec;
  spec.eps0 = 1e-3;
  spec.bumps.push_back({DataField::v, 1.0, {0.0, 0.0, 0.0}, 2.0});
  const auto d = make_initial_data(*g, spec);
  DiagnosticToggles on;
  on.sobolev = true;
  const auto row = sample_diagnostics(sys, d.state, DyadicParams{}, on);
  std::vector<std::string> names;
  for (const auto& [n, v] : row) {
    names.push_back(n);
    CHECK(std::isfinite(v));
    CHECK(v >= 0.0);
  }
  CHECK(names == std::vector<std::string>{"z_wa", "z_kg", "e_wa", "e_kg", "e_kg_flat", "e_kg_degraded", "sup_u",
                                          "sup_v", "sup_u0", "sup_v0", "wp_wa", "wp_kg", "wp_wa_boundary_mass", "sobolev_s1"});
  DiagnosticsSeries series;
  series.append(0.0, row);
  CHECK(series.columns().size() == names.size());
}
