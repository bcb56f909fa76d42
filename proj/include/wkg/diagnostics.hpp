#pragma once

// Norms and functionals evaluated on profile snapshots: Z-norms, energies,
// weighted Sobolev norms, Hardy-type shell quantities, sup-norm records,
// power-law fits, and the time series that collects them.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <locale>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "wkg/errors.hpp"
#include "wkg/grid.hpp"
#include "wkg/littlewood_paley.hpp"
#include "wkg/params.hpp"
#include "wkg/profiles.hpp"
#include "wkg/system.hpp"

namespace wkg {

// ---- Z-norms ---------------------------------------------------------------

struct ZShell {
  int k = 0;
  double linf = 0.0;  ///< weighted sup |P_k f^|
  double l2 = 0.0;    ///< weighted atom sum (wa) or weighted ||P_k f|| (kg)
  double total() const noexcept { return linf + l2; }
};

struct ZNorm {
  double value = 0.0;
  std::vector<ZShell> shells;
};

namespace detail {

inline double spectral_sup(const ComplexField& f_hat) { return sup_abs(f_hat); }

inline int checked_j_cap(const SpectralGrid& g, int j_cap) { return j_cap < 0 ? lp::last_j(g) : j_cap; }

}  // namespace detail

/// sup_k 2^{(N0-d')k+} [2^{k-(1+4 delta)} |P_k f^|_inf + 2^{k-(1/2+4 delta)} sum_j 2^j ||Q_jk f||],
/// with the j-sum cut at j_cap (default: last j with 2^j <= 4L).
inline ZNorm z_norm_wave_detail(const SpectralGrid& g, const ComplexField& V_hat, const DyadicParams& prm,
                                int j_cap = -1) {
  ZNorm out;
  const int jmax = detail::checked_j_cap(g, j_cap);
  for (int k = g.k_min(); k <= g.k_max(); ++k) {
    const double kp = positive_part(k), km = negative_part(k);
    const ComplexField pk_hat = lp::project_pk(g, V_hat, k);
    ZShell s;
    s.k = k;
    s.linf = pow2((prm.N0 - prm.d_prime()) * kp + km * (1.0 + 4.0 * prm.delta)) * detail::spectral_sup(pk_hat);
    const ComplexField pk = g.inverse(pk_hat);
    const auto norms = lp::atom_norms(g, pk, k);
    double sum = 0.0;
    for (std::size_t t = 0; t < norms.size(); ++t) {
      const int j = lp::first_j(k) + static_cast<int>(t);
      if (j > jmax) break;
      sum += std::ldexp(norms[t], j);
    }
    s.l2 = pow2((prm.N0 - prm.d_prime()) * kp + km * (0.5 + 4.0 * prm.delta)) * sum;
    out.value = std::max(out.value, s.total());
    out.shells.push_back(s);
  }
  return out;
}

inline double z_norm_wave(const SpectralGrid& g, const ComplexField& V_hat, const DyadicParams& prm,
                          int j_cap = -1) {
  return z_norm_wave_detail(g, V_hat, prm, j_cap).value;
}

/// sup_k 2^{(N0-d')k+} 2^{k-(1/2-kappa)} |P_k f^|_inf + 2^{(N0+3d-1)k+} 2^{-k-(1+kappa)} ||P_k f||.
inline ZNorm z_norm_kg_detail(const SpectralGrid& g, const ComplexField& V_hat, const DyadicParams& prm) {
  ZNorm out;
  for (int k = g.k_min(); k <= g.k_max(); ++k) {
    const double kp = positive_part(k), km = negative_part(k);
    const ComplexField pk_hat = lp::project_pk(g, V_hat, k);
    ZShell s;
    s.k = k;
    s.linf = pow2((prm.N0 - prm.d_prime()) * kp + km * (0.5 - prm.kappa)) * detail::spectral_sup(pk_hat);
    s.l2 = pow2((prm.N0 + 3.0 * prm.d - 1.0) * kp - km * (1.0 + prm.kappa)) * l2_from_spectral(g, pk_hat);
    out.value = std::max(out.value, s.total());
    out.shells.push_back(s);
  }
  return out;
}

inline double z_norm_kg(const SpectralGrid& g, const ComplexField& V_hat, const DyadicParams& prm) {
  return z_norm_kg_detail(g, V_hat, prm).value;
}

// ---- energies ----------------------------------------------------------------

namespace detail {

// <xi>^{2a} assembled in log space.
inline double japanese_pow(double xi2, double two_a) { return std::exp(0.5 * two_a * std::log1p(xi2)); }

}  // namespace detail

/// ||<nabla>^a f||^2 of the field whose transform is f_hat.
inline double sobolev_sq(const SpectralGrid& g, const ComplexField& f_hat, double a) {
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.nyquist(i)) continue;
    const double r = g.xi_norm(i);
    s += detail::japanese_pow(r * r, 2.0 * a) * std::norm(f_hat[i]);
  }
  return g.inverse_weight() * s;
}

/// Wave energy with P = |nabla|^{-1/2} <nabla>^{N(0)}, from U^wa:
/// (2 pi)^{-3} int |xi|^{-1} <xi>^{2N(0)} |U^|^2, the zero mode dropped.
inline double energy_wave(const SpectralGrid& g, const ComplexField& U_wa_hat, const DyadicParams& prm) {
  const double N = prm.N(0);
  double s = 0.0;
  for (std::size_t i = 1; i < g.size(); ++i) {
    if (g.nyquist(i)) continue;
    const double r = g.xi_norm(i);
    s += detail::japanese_pow(r * r, 2.0 * N) / r * std::norm(U_wa_hat[i]);
  }
  return g.inverse_weight() * s;
}

/// The same functional from u^ and u_t^: sum |xi|^{-1} <xi>^{2N(0)} (|u_t^|^2 + |xi|^2 |u^|^2).
inline double energy_wave_physical(const SpectralGrid& g, const ComplexField& u_hat, const ComplexField& ut_hat,
                                   const DyadicParams& prm) {
  const double N = prm.N(0);
  double s = 0.0;
  for (std::size_t i = 1; i < g.size(); ++i) {
    if (g.nyquist(i)) continue;
    const double r = g.xi_norm(i);
    s += detail::japanese_pow(r * r, 2.0 * N) / r * (std::norm(ut_hat[i]) + r * r * std::norm(u_hat[i]));
  }
  return g.inverse_weight() * s;
}

struct KgEnergy {
  double total = 0.0;
  double flat = 0.0;        ///< int (P d_0 v)^2 + (P v)^2 + sum_j (P d_j v)^2
  double correction = 0.0;  ///< int u B^{ij} P d_i v P d_j v
  double gradient = 0.0;    ///< int sum_j (P d_j v)^2
  bool degraded = false;    ///< |correction| > flat / 2
};

/// Klein-Gordon energy with P = <nabla>^{N0 + 3d} and the quasilinear correction.
inline KgEnergy energy_kg(const SpectralGrid& g, const ComplexField& U_wa_hat, const ComplexField& U_kg_hat,
                          const CouplingCoefficients& c, const DyadicParams& prm) {
  const double N = prm.N0 + 3.0 * prm.d;
  const auto kg = reconstruct(g, U_kg_hat, Dispersion::klein_gordon);
  KgEnergy e;
  double flat = 0.0, grad = 0.0;
  ComplexField pv(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.nyquist(i)) {
      pv[i] = 0.0;
      continue;
    }
    const double r = g.xi_norm(i);
    const double w = detail::japanese_pow(r * r, 2.0 * N);
    flat += w * (std::norm(kg.ft_hat[i]) + (1.0 + r * r) * std::norm(kg.f_hat[i]));
    grad += w * r * r * std::norm(kg.f_hat[i]);
    pv[i] = std::sqrt(w) * kg.f_hat[i];
  }
  e.flat = g.inverse_weight() * flat;
  e.gradient = g.inverse_weight() * grad;

  bool has_b = false;
  for (int j = 1; j <= g.dim(); ++j)
    for (int k = 1; k <= g.dim(); ++k) has_b = has_b || c.B[j][k] != 0.0;
  if (has_b) {
    const RealField u = g.inverse_real(reconstruct(g, U_wa_hat, Dispersion::wave).f_hat);
    std::vector<RealField> dpv;
    for (int j = 0; j < g.dim(); ++j) dpv.push_back(g.inverse_real(spectral_derivative(g, pv, j)));
    double corr = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      double q = 0.0;
      for (int j = 0; j < g.dim(); ++j)
        for (int k = 0; k < g.dim(); ++k) q += c.B[j + 1][k + 1] * dpv[j][i] * dpv[k][i];
      corr += u[i] * q;
    }
    e.correction = g.cell_volume() * corr;
  }
  e.total = e.flat + e.correction;
  e.degraded = std::abs(e.correction) > 0.5 * e.flat;
  return e;
}

// ---- weighted Sobolev norms ---------------------------------------------------

enum class SobolevFlavor { wa, kg, omega };

struct WeightedNorm {
  double value = 0.0;
  double boundary_mass = 0.0;
};

namespace detail {

using MultiIndex = std::array<int, 3>;

inline std::vector<MultiIndex> multi_indices(int dim, int max_order) {
  std::vector<MultiIndex> out;
  for (int a = 0; a <= max_order; ++a)
    for (int b = 0; b <= (dim == 3 ? max_order : 0); ++b)
      for (int c = 0; c <= (dim == 3 ? max_order : 0); ++c)
        if (a + b + c <= max_order) out.push_back({a, b, c});
  return out;
}

inline int order(const MultiIndex& m) { return m[0] + m[1] + m[2]; }

inline ComplexField x_power(const SpectralGrid& g, const ComplexField& phys, const MultiIndex& p) {
  ComplexField out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec3 x = g.position(i);
    out[i] = std::pow(x[0], p[0]) * std::pow(x[1], p[1]) * std::pow(x[2], p[2]) * phys[i];
  }
  return out;
}

inline ComplexField derivative_power(const SpectralGrid& g, const ComplexField& f_hat, const MultiIndex& p) {
  return apply_multiplier(g, f_hat, [&](const Vec3& xi) {
    Complex m = 1.0;
    for (int d = 0; d < 3; ++d)
      for (int r = 0; r < p[d]; ++r) m *= Complex(0.0, xi[d]);
    return m;
  });
}

}  // namespace detail

/// Sum over the flavor's index set of ||x^{beta'} d^beta f||_{H^a}, f given physically:
///   wa: |beta'| <= |beta| <= b;  kg: |beta|, |beta'| <= b;  omega: ||Omega^alpha f||_{H^a}, |alpha| <= b.
inline WeightedNorm sobolev_weighted_norm(const SpectralGrid& g, const ComplexField& phys, double a, int b,
                                          SobolevFlavor flavor, ContainmentMode mode = ContainmentMode::enforce) {
  if (b < 0 || b > 2) throw ConfigError("weighted Sobolev norms support 0 <= b <= 2");
  if (flavor == SobolevFlavor::omega && g.dim() != 3) throw ConfigError("rotation norms need a 3D grid");
  WeightedNorm out;
  out.boundary_mass = relative_boundary_mass(g, phys);
  if (b > 0 && mode == ContainmentMode::enforce && out.boundary_mass >= kContainmentTolerance)
    throw ContainmentError("sobolev_weighted_norm: field reaches the periodic boundary", out.boundary_mass);

  const ComplexField f_hat = g.forward(phys);
  const auto idx = detail::multi_indices(g.dim(), b);
  if (flavor == SobolevFlavor::omega) {
    // Omega^alpha = Omega_23^{a1} Omega_31^{a2} Omega_12^{a3}, applied right to left.
    static constexpr std::array<std::array<int, 2>, 3> kRot{{{1, 2}, {2, 0}, {0, 1}}};
    for (const auto& alpha : idx) {
      ComplexField cur = phys;
      for (int r = 2; r >= 0; --r)
        for (int e = 0; e < alpha[r]; ++e) cur = rotation_apply_unchecked(g, cur, kRot[r][0], kRot[r][1]);
      out.value += std::sqrt(sobolev_sq(g, g.forward(cur), a));
    }
    return out;
  }
  for (const auto& beta : idx) {
    const ComplexField d_phys = g.inverse(detail::derivative_power(g, f_hat, beta));
    for (const auto& beta_p : idx) {
      if (flavor == SobolevFlavor::wa && detail::order(beta_p) > detail::order(beta)) continue;
      out.value += std::sqrt(sobolev_sq(g, g.forward(detail::x_power(g, d_phys, beta_p)), a));
    }
  }
  return out;
}

/// Smallness functional of the data:
/// sum_{n <= N1} ||  |nabla|^{-1/2} U^wa ||_{H^{N(n), n}_{S,wa}} + || U^kg ||_{H^{N(n), n}_{S,kg}}.
struct SmallnessReport {
  double total = 0.0;
  std::vector<double> wave_terms, kg_terms;
  double boundary_mass = 0.0;
};

inline SmallnessReport smallness_norms(const SpectralGrid& g, const ComplexField& U_wa_hat,
                                       const ComplexField& U_kg_hat, const DyadicParams& prm, int max_order = 2) {
  SmallnessReport rep;
  const ComplexField half =
      g.inverse(apply_radial_multiplier(g, U_wa_hat, [](double r) { return 1.0 / std::sqrt(r); }));
  const ComplexField kg = g.inverse(U_kg_hat);
  const int top = std::min(prm.N1, max_order);
  for (int n = 0; n <= top; ++n) {
    const auto w = sobolev_weighted_norm(g, half, prm.N(n), n, SobolevFlavor::wa, ContainmentMode::report);
    const auto k = sobolev_weighted_norm(g, kg, prm.N(n), n, SobolevFlavor::kg, ContainmentMode::report);
    rep.wave_terms.push_back(w.value);
    rep.kg_terms.push_back(k.value);
    rep.total += w.value + k.value;
    rep.boundary_mass = std::max({rep.boundary_mass, w.boundary_mass, k.boundary_mass});
  }
  return rep;
}

// ---- Hardy-type shell quantities ------------------------------------------------

struct HardyPair {
  double A = 0.0;
  double B = 0.0;
};

/// A_k = ||P_k f|| + sum_l ||phi_k d_xi_l f^||, B_k = (sum_j 2^{2j} ||Q_jk f||^2)^{1/2}.
/// Fourier-side norms carry the Plancherel factor so every term is a physical L^2 norm.
inline HardyPair hardy_quantities(const SpectralGrid& g, const ComplexField& f_hat, int k) {
  HardyPair h;
  const ComplexField pk_hat = lp::project_pk(g, f_hat, k);
  h.A = l2_from_spectral(g, pk_hat);
  for (int l = 0; l < g.dim(); ++l)
    h.A += l2_from_spectral(g, lp::project_pk(g, xi_derivative_unchecked(g, f_hat, l), k));
  const auto norms = lp::atom_norms(g, g.inverse(pk_hat), k);
  double s = 0.0;
  for (std::size_t t = 0; t < norms.size(); ++t) {
    const int j = lp::first_j(k) + static_cast<int>(t);
    s += std::ldexp(norms[t] * norms[t], 2 * j);
  }
  h.B = std::sqrt(s);
  return h;
}

/// 2^{max(-k,0)} ||P_k f|| + || |x| P_k f ||.
inline double hardy_comparison(const SpectralGrid& g, const ComplexField& f_hat, int k) {
  const ComplexField pk_hat = lp::project_pk(g, f_hat, k);
  const ComplexField pk = g.inverse(pk_hat);
  ComplexField weighted(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) weighted[i] = norm3(g.position(i)) * pk[i];
  return std::ldexp(l2_from_spectral(g, pk_hat), std::max(-k, 0)) + l2_physical(g, weighted);
}

// ---- sup norms --------------------------------------------------------------

struct SupEntry {
  char field = 'u';
  int alpha0 = 0;
  std::array<int, 3> alpha{0, 0, 0};
  double value = 0.0;
};

struct SupNormRecord {
  std::vector<SupEntry> entries;
  double sum_u = 0.0, sum_v = 0.0;
};

/// ||d^alpha d_0^{alpha0} u||_inf and the same for v, |alpha| + alpha0 <= 2; second time
/// derivatives come from the equations u_tt = Lap u + N^wa, v_tt = Lap v - v + N^kg.
inline SupNormRecord sup_norm_record(const WkgSystem& sys, const ComplexField& U_wa_hat, const ComplexField& U_kg_hat) {
  const SpectralGrid& g = sys.grid();
  const auto wa = reconstruct(g, U_wa_hat, Dispersion::wave);
  const auto kg = reconstruct(g, U_kg_hat, Dispersion::klein_gordon);
  const auto N = sys.nonlinearity(U_wa_hat, U_kg_hat);
  ComplexField utt(g.size()), vtt(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double r2 = g.xi_norm(i) * g.xi_norm(i);
    utt[i] = g.nyquist(i) ? Complex(0.0) : -r2 * wa.f_hat[i] + N.wa[i];
    vtt[i] = g.nyquist(i) ? Complex(0.0) : -(1.0 + r2) * kg.f_hat[i] + N.kg[i];
  }
  SupNormRecord rec;
  const auto idx = detail::multi_indices(g.dim(), 2);
  auto scan = [&](char name, const std::array<const ComplexField*, 3>& time_derivs, double& sum) {
    for (int a0 = 0; a0 <= 2; ++a0)
      for (const auto& alpha : idx) {
        if (a0 + detail::order(alpha) > 2) continue;
        SupEntry e;
        e.field = name;
        e.alpha0 = a0;
        e.alpha = alpha;
        e.value = sup_abs(g.inverse_real(detail::derivative_power(g, *time_derivs[a0], alpha)));
        sum += e.value;
        rec.entries.push_back(e);
      }
  };
  scan('u', {&wa.f_hat, &wa.ft_hat, &utt}, rec.sum_u);
  scan('v', {&kg.f_hat, &kg.ft_hat, &vtt}, rec.sum_v);
  return rec;
}

// ---- power-law fits -----------------------------------------------------------

struct DecayFit {
  double exponent = 0.0;
  double stderr_ = 0.0;
  double t_lo = 0.0, t_hi = 0.0;
  std::size_t samples = 0;
};

/// Least-squares slope of log(value) against log(t) over samples with t in [t_lo, t_hi].
inline DecayFit decay_fit(const std::vector<double>& times, const std::vector<double>& values, double t_lo,
                          double t_hi) {
  if (times.size() != values.size()) throw ConfigError("decay fit: times and values differ in length");
  std::vector<double> lx, ly;
  double lo = 0.0, hi = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < t_lo || times[i] > t_hi) continue;
    if (!(times[i] > 0.0)) throw ConfigError("decay fit: window times must be positive");
    if (!(values[i] > 0.0) || !std::isfinite(values[i])) {
      std::ostringstream msg;
      msg << "decay fit: non-positive value " << values[i] << " at t = " << times[i];
      throw NumericalError(msg.str());
    }
    lo = lx.empty() ? times[i] : std::min(lo, times[i]);
    hi = std::max(hi, times[i]);
    lx.push_back(std::log(times[i]));
    ly.push_back(std::log(values[i]));
  }
  if (lx.size() < 6) throw ConfigError("decay fit needs at least 6 samples in the window");
  if (hi < 4.0 * lo) throw ConfigError("decay fit window must span a factor of at least 4 in t");
  const double n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  DecayFit fit;
  fit.exponent = sxy / sxx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - (my + fit.exponent * (lx[i] - mx));
    ssr += r * r;
  }
  fit.stderr_ = std::sqrt(ssr / (n - 2.0) / sxx);
  fit.t_lo = lo;
  fit.t_hi = hi;
  fit.samples = lx.size();
  return fit;
}

// ---- time series ---------------------------------------------------------------

/// UTC timestamp, pinned by SOURCE_DATE_EPOCH when set.
inline std::string utc_stamp() {
  std::time_t now = std::time(nullptr);
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) now = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::string format_double(double x) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(17) << x;
  return os.str();
}

/// Rows of named diagnostics keyed by strictly increasing time.
class DiagnosticsSeries {
 public:
  using Row = std::vector<std::pair<std::string, double>>;

  void append(double t, const Row& row) {
    if (!times_.empty() && !(t > times_.back()))
      throw NumericalError("diagnostics times must be strictly increasing");
    if (columns_.empty()) {
      for (const auto& [name, v] : row) columns_.push_back(name);
    } else if (row.size() != columns_.size()) {
      throw NumericalError("diagnostics row has a different column set");
    }
    std::vector<double> values;
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (row[i].first != columns_[i]) throw NumericalError("diagnostics column order changed: " + row[i].first);
      if (!std::isfinite(row[i].second)) throw NumericalError("non-finite diagnostic " + row[i].first);
      values.push_back(row[i].second);
    }
    times_.push_back(t);
    rows_.push_back(std::move(values));
  }

  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<std::string>& columns() const noexcept { return columns_; }
  std::size_t size() const noexcept { return times_.size(); }
  bool empty() const noexcept { return times_.empty(); }

  std::vector<double> column(const std::string& name) const {
    const auto it = std::find(columns_.begin(), columns_.end(), name);
    if (it == columns_.end()) throw ConfigError("unknown diagnostic column " + name);
    const auto c = static_cast<std::size_t>(it - columns_.begin());
    std::vector<double> out;
    for (const auto& r : rows_) out.push_back(r[c]);
    return out;
  }

  /// RFC-4180 CSV: a '#' comment with the UTC stamp, a header row, one row per time.
  void write_csv(std::ostream& os) const {
    os << "# wkg diagnostics, generated " << utc_stamp() << "\r\n";
    os << "t";
    for (const auto& c : columns_) os << ',' << quote(c);
    os << "\r\n";
    for (std::size_t i = 0; i < times_.size(); ++i) {
      os << format_double(times_[i]);
      for (double v : rows_[i]) os << ',' << format_double(v);
      os << "\r\n";
    }
  }

  void write_csv(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + path);
    write_csv(f);
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["times"] = times_;
    nlohmann::ordered_json cols = nlohmann::ordered_json::object();
    for (std::size_t c = 0; c < columns_.size(); ++c) cols[columns_[c]] = column(columns_[c]);
    j["columns"] = cols;
    return j;
  }

 private:
  static std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
      if (ch == '"') out += '"';
      out += ch;
    }
    return out + "\"";
  }

  std::vector<double> times_;
  std::vector<std::string> columns_;
  std::vector<std::vector<double>> rows_;
};

// ---- one-shot sample -------------------------------------------------------------

struct DiagnosticToggles {
  bool z_norms = true;
  bool energies = true;
  bool sup_norms = true;
  bool weighted_profiles = true;
  bool sobolev = false;
};

/// Every enabled diagnostic at the state's time, as an ordered row.
inline DiagnosticsSeries::Row sample_diagnostics(const WkgSystem& sys, const ProfileState& s, const DyadicParams& prm,
                                                 const DiagnosticToggles& on) {
  const SpectralGrid& g = sys.grid();
  const auto U = unprofile(g, s);
  DiagnosticsSeries::Row row;
  if (on.z_norms) {
    row.emplace_back("z_wa", z_norm_wave(g, s.V_wa, prm));
    row.emplace_back("z_kg", z_norm_kg(g, s.V_kg, prm));
  }
  if (on.energies) {
    row.emplace_back("e_wa", energy_wave(g, U.U_wa, prm));
    const auto ek = energy_kg(g, U.U_wa, U.U_kg, sys.coefficients(), prm);
    row.emplace_back("e_kg", ek.total);
    row.emplace_back("e_kg_flat", ek.flat);
    row.emplace_back("e_kg_degraded", ek.degraded ? 1.0 : 0.0);
  }
  if (on.sup_norms) {
    const auto sn = sup_norm_record(sys, U.U_wa, U.U_kg);
    row.emplace_back("sup_u", sn.sum_u);
    row.emplace_back("sup_v", sn.sum_v);
    row.emplace_back("sup_u0", sup_abs(g.inverse_real(reconstruct(g, U.U_wa, Dispersion::wave).f_hat)));
    row.emplace_back("sup_v0", sup_abs(g.inverse_real(reconstruct(g, U.U_kg, Dispersion::klein_gordon).f_hat)));
  }
  if (on.weighted_profiles && prm.N1 >= 1) {
    const auto w = weighted_profile_norms(g, s, prm, 0, ContainmentMode::report);
    row.emplace_back("wp_wa", w.sup_wa());
    row.emplace_back("wp_kg", w.sup_kg());
    row.emplace_back("wp_wa_boundary_mass", w.wa_boundary_mass);
  }
  if (on.sobolev) {
    const auto sm = smallness_norms(g, U.U_wa, U.U_kg, prm, 1);
    row.emplace_back("sobolev_s1", sm.total);
  }
  return row;
}

}  // namespace wkg
