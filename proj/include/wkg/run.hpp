#pragma once

// Run drivers behind the command-line subcommands: the 3D simulation with
// online phase accumulation and snapshots, the radial model, linear decay
// fits, the resonance sweep, and the report over a finished run.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <locale>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wkg/config.hpp"
#include "wkg/diagnostics.hpp"
#include "wkg/free_evolution.hpp"
#include "wkg/initial_data.hpp"
#include "wkg/integrator.hpp"
#include "wkg/profiles.hpp"
#include "wkg/radial.hpp"
#include "wkg/scattering.hpp"
#include "wkg/snapshot.hpp"

namespace wkg {

namespace fs = std::filesystem;

// ---- fits --------------------------------------------------------------------

/// Least squares y = a + c log t; residual = sqrt(1 - R^2).
struct LogFit {
  double c = 0.0;
  double intercept = 0.0;
  double residual = 0.0;
  std::size_t samples = 0;
};

inline LogFit log_fit(const std::vector<double>& t, const std::vector<double>& y) {
  if (t.size() != y.size() || t.size() < 3) throw ConfigError("log fit needs at least 3 samples");
  const double n = static_cast<double>(t.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(t[i] > 0.0)) throw ConfigError("log fit needs positive times");
    sx += std::log(t[i]);
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double dx = std::log(t[i]) - mx, dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  LogFit f;
  f.samples = t.size();
  f.c = sxy / sxx;
  f.intercept = my - f.c * mx;
  const double r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  f.residual = std::sqrt(std::max(0.0, 1.0 - r2));
  return f;
}

/// Adds multiples of 2 pi so consecutive entries differ by at most pi.
inline std::vector<double> unwrap_phase(const std::vector<double>& p) {
  std::vector<double> out(p.size());
  double shift = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i > 0) {
      const double d = p[i] + shift - out[i - 1];
      shift -= 2.0 * std::numbers::pi * std::round(d / (2.0 * std::numbers::pi));
    }
    out[i] = p[i] + shift;
  }
  return out;
}

// ---- simulation ----------------------------------------------------------------

struct TrackedMode {
  std::size_t index = 0;
  std::array<int, 3> mode{0, 0, 0};
  double q_plus = 0.0;
};

/// Mode maximizing |q_+(xi) V^kg(xi)| over the active phase modes.
inline TrackedMode dominant_mode(const SpectralGrid& g, const ComplexField& V_kg, const ThetaAccumulator& acc) {
  TrackedMode m;
  double best = -1.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double v = std::abs(acc.q_plus()[i] * V_kg[i]);
    if (v > best) {
      best = v;
      m.index = i;
    }
  }
  m.mode = g.modes(m.index);
  m.q_plus = acc.q_plus()[m.index];
  return m;
}

struct SimulationResult {
  DiagnosticsSeries series;
  std::vector<ProfileSnapshot> snapshots;
  std::optional<TrackedMode> tracked;
  double max_modulus_mismatch = 0.0;  ///< max over samples of sup | |V*| - |V^kg| |
  ProfileState final_state;
  std::optional<ThetaField> final_theta;
};

struct SimulationOptions {
  fs::path out_dir;               ///< empty: keep everything in memory
  std::optional<fs::path> resume;  ///< continue from this snapshot
};

namespace detail {

inline std::string snapshot_name(double t) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << "snapshot_t" << std::setprecision(17) << t << ".wkgs";
  return os.str();
}

inline nlohmann::json window_json(const std::vector<WindowDifference>& w) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& d : w) a.push_back({{"t1", d.t1}, {"t2", d.t2}, {"star", d.star}, {"raw", d.raw}, {"wave", d.wave}});
  return a;
}

inline void write_text(const fs::path& p, const std::string& s) {
  std::ofstream os(p, std::ios::binary | std::ios::trunc);
  if (!os) throw ConfigError("cannot write " + p.string());
  os << s;
  if (!os) throw ConfigError("failed writing " + p.string());
}

}  // namespace detail

/// Phase-drift summary of a finished run: fits of the unwrapped tracked phases against log t for t >= t_lo.
inline nlohmann::json phase_drift_json(const DiagnosticsSeries& s, double t_lo) {
  if (s.empty() || std::find(s.columns().begin(), s.columns().end(), "phase_raw") == s.columns().end())
    return nullptr;
  std::vector<double> t, raw, star;
  const auto pr = unwrap_phase(s.column("phase_raw"));
  const auto ps = unwrap_phase(s.column("phase_star"));
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s.times()[i] >= t_lo) {
      t.push_back(s.times()[i]);
      raw.push_back(pr[i]);
      star.push_back(ps[i]);
    }
  if (t.size() < 3) return nullptr;
  const auto fr = log_fit(t, raw), fs_ = log_fit(t, star);
  return {{"t_lo", t_lo},          {"samples", t.size()},        {"c_raw", fr.c},
          {"residual_raw", fr.residual}, {"c_star", fs_.c}, {"residual_star", fs_.residual}};
}

inline SimulationResult run_simulation(const RunConfig& cfg, const SimulationOptions& opt = {}) {
  cfg.validate();
  auto grid = build_grid(cfg.dim, cfg.n, cfg.L);
  const SpectralGrid& g = *grid;
  const WkgSystem sys(grid, cfg.coeffs);
  const ProfileIntegrator integ(sys);

  const InitialData init = make_initial_data(g, cfg.data);
  ProfileState state = init.state;
  std::optional<ThetaAccumulator> acc;
  ThetaField th;
  if (cfg.theta) {
    acc.emplace(grid, cfg.coeffs, cfg.params.p);
    th = acc->start(0.0);
  }
  if (opt.resume) {
    Snapshot snap = read_snapshot(*opt.resume);
    require_same_grid(snap, g);
    state = std::move(snap.state);
    if (cfg.theta) {
      if (!snap.theta) throw ConfigError("resume snapshot carries no phase, but the run accumulates one");
      th = std::move(*snap.theta);
      if (th.t != state.t) throw ConfigError("resume snapshot phase and profile times differ");
    }
  }

  SimulationResult res;
  if (acc) res.tracked = dominant_mode(g, init.state.V_kg, *acc);
  if (!opt.out_dir.empty()) fs::create_directories(opt.out_dir);

  const long k_end = cfg.steps_for(cfg.t_max, "t_max");
  const long k_sample = cfg.steps_for(cfg.sample_every, "sample_every");
  std::vector<long> k_snap;
  for (double t : cfg.snapshot_schedule()) k_snap.push_back(cfg.steps_for(t, "snapshot time"));
  long k = cfg.steps_for(state.t, "resume time");
  if (k > k_end) throw ConfigError("resume snapshot lies beyond t_max");

  auto record = [&]() {
    DiagnosticsSeries::Row row = sample_diagnostics(sys, state, cfg.params, cfg.diag);
    if (cfg.gamma_identity) {
      double wa = 0.0, kg = 0.0;
      for (int l = 0; l < g.dim(); ++l) {
        const auto r = gamma_identity_residual(sys, state, l);
        wa = std::max(wa, r.wa);
        kg = std::max(kg, r.kg);
      }
      row.emplace_back("gamma_wa", wa);
      row.emplace_back("gamma_kg", kg);
    }
    if (acc) {
      const ComplexField star = renormalize_profile(state.V_kg, th);
      double mism = 0.0, theta_max = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) {
        mism = std::max(mism, std::abs(std::abs(star[i]) - std::abs(state.V_kg[i])));
        theta_max = std::max(theta_max, std::abs(th.theta[i]));
      }
      res.max_modulus_mismatch = std::max(res.max_modulus_mismatch, mism);
      const std::size_t idx = res.tracked->index;
      row.emplace_back("theta_max", theta_max);
      row.emplace_back("phase_raw", std::arg(state.V_kg[idx]));
      row.emplace_back("phase_star", std::arg(star[idx]));
      row.emplace_back("abs_tracked", std::abs(state.V_kg[idx]));
    }
    res.series.append(state.t, row);
  };
  auto snapshot = [&]() {
    ProfileSnapshot ps{state.t, state.V_wa, state.V_kg, acc ? renormalize_profile(state.V_kg, th) : state.V_kg};
    if (!opt.out_dir.empty()) write_snapshot(opt.out_dir / detail::snapshot_name(state.t), g, state, acc ? &th : nullptr);
    res.snapshots.push_back(std::move(ps));
  };

  for (;; ++k) {
    if (k % k_sample == 0 || k == k_end) record();
    if (std::find(k_snap.begin(), k_snap.end(), k) != k_snap.end()) snapshot();
    if (k == k_end) break;
    ProfileState next = integ.step(state, cfg.dt);
    if (!all_finite(next.V_wa) || !all_finite(next.V_kg)) {
      std::ostringstream msg;
      msg << "solution became non-finite at t = " << next.t;
      throw NumericalError(msg.str());
    }
    next.t = static_cast<double>(k + 1) * cfg.dt;
    if (acc) {
      acc->accumulate(th, unprofile(g, state).U_wa, unprofile(g, next).U_wa, state.t, cfg.dt);
      th.t = next.t;
    }
    state = std::move(next);
  }
  res.final_state = state;
  if (acc) res.final_theta = th;

  if (!opt.out_dir.empty()) {
    res.series.write_csv(opt.out_dir / "diagnostics.csv");
    nlohmann::json j;
    if (res.tracked)
      j["tracked_mode"] = {{"index", res.tracked->index}, {"mode", res.tracked->mode}, {"q_plus", res.tracked->q_plus}};
    j["max_modulus_mismatch"] = res.max_modulus_mismatch;
    j["snapshot_times"] = nlohmann::json::array();
    for (const auto& s : res.snapshots) j["snapshot_times"].push_back(s.t);
    try {
      j["windows"] = detail::window_json(cauchy_windows(g, res.snapshots, cfg.params));
    } catch (const ConfigError& e) {
      j["windows"] = nullptr;
      j["windows_note"] = e.what();
    }
    j["phase_drift"] = phase_drift_json(res.series, 2.0);
    detail::write_text(opt.out_dir / "scattering.json", j.dump(2) + "\n");
    std::ostringstream conf;
    print_config(conf, cfg);
    detail::write_text(opt.out_dir / "config.ini", conf.str());
  }
  return res;
}

// ---- radial ------------------------------------------------------------------------

struct RadialResult {
  DiagnosticsSeries series;
  double lc_min = 0.0, lc_max = 0.0;  ///< over t in [5, t_max]
  double energy_drift = 0.0;          ///< max |E(t) - E(0)| / E(0)
};

inline RadialResult run_radial(const RadialConfig& rc, const fs::path& out_dir = {}) {
  RadialModel m(rc);
  RadialResult r;
  r.series = m.run();
  const auto lc = r.series.column("light_cone_min");
  const auto e = r.series.column("kg_energy");
  r.lc_min = std::numeric_limits<double>::infinity();
  r.lc_max = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < lc.size(); ++i) {
    if (r.series.times()[i] >= 5.0) {
      r.lc_min = std::min(r.lc_min, lc[i]);
      r.lc_max = std::max(r.lc_max, lc[i]);
    }
    if (m.initial_energy() > 0.0)
      r.energy_drift = std::max(r.energy_drift, std::abs(e[i] - m.initial_energy()) / m.initial_energy());
  }
  if (!(rc.t_max >= 5.0)) r.lc_min = r.lc_max = 0.0;
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    r.series.write_csv(out_dir / "radial.csv");
    const nlohmann::json j{{"light_cone_min_t5", r.lc_min},
                           {"light_cone_max_t5", r.lc_max},
                           {"kg_energy_drift", r.energy_drift},
                           {"couple_u", rc.couple_u},
                           {"eps", rc.eps}};
    detail::write_text(out_dir / "radial.json", j.dump(2) + "\n");
  }
  return r;
}

// ---- linear decay ------------------------------------------------------------------

struct DecayChannel {
  std::vector<double> values;
  DecayFit fit;
};

struct DecayResult {
  DecayChannel kg, wa;
};

/// sup over the sampled grid points of |e^{-it Lambda} f| for the configured profile.
inline DecayResult run_decay_linear(const DecayConfig& dc, const fs::path& out_dir = {}) {
  if (dc.stride < 1) throw ConfigError("rule decay.stride >= 1 violated");
  if (dc.times.size() < 6) throw ConfigError("rule decay.times has at least 6 entries violated");
  auto grid = build_grid(3, dc.n, dc.L);
  const SpectralGrid& g = *grid;
  ComplexField prof(g.size(), 0.0);
  if (dc.family == "gaussian") {
    if (!(dc.width > 0.0)) throw ConfigError("rule decay.width > 0 violated");
    ComplexField phys(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double r = norm3(g.position(i));
      phys[i] = std::exp(-0.5 * r * r / (dc.width * dc.width));
    }
    prof = g.forward(phys);
  } else if (dc.family == "mode") {
    for (int d = 0; d < 3; ++d)
      if (std::abs(dc.mode[d]) >= static_cast<int>(dc.n / 2)) throw ConfigError("decay mode lies on or beyond the Nyquist plane");
    for (std::size_t i = 0; i < g.size(); ++i)
      if (g.modes(i) == dc.mode) prof[i] = std::pow(g.box_length(), 3);
  } else {
    throw ConfigError("decay.family: expected gaussian or mode");
  }
  const std::size_t n = g.n(), st = static_cast<std::size_t>(dc.stride);
  auto sup_sampled = [&](const ComplexField& f) {
    double m = 0.0;
    for (std::size_t a = 0; a < n; a += st)
      for (std::size_t b = 0; b < n; b += st)
        for (std::size_t c = 0; c < n; c += st) m = std::max(m, std::abs(f[g.ravel({a, b, c})]));
    return m;
  };
  DecayResult r;
  for (double t : dc.times) {
    r.kg.values.push_back(sup_sampled(free_evolve_grid(g, prof, Dispersion::klein_gordon, t)));
    r.wa.values.push_back(sup_sampled(free_evolve_grid(g, prof, Dispersion::wave, t)));
  }
  const double lo = *std::min_element(dc.times.begin(), dc.times.end());
  const double hi = *std::max_element(dc.times.begin(), dc.times.end());
  r.kg.fit = decay_fit(dc.times, r.kg.values, lo, hi);
  r.wa.fit = decay_fit(dc.times, r.wa.values, lo, hi);
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    auto ch = [&](const DecayChannel& c) {
      return nlohmann::json{{"exponent", c.fit.exponent},
                            {"stderr", c.fit.stderr_},
                            {"window", {c.fit.t_lo, c.fit.t_hi}},
                            {"samples", c.fit.samples},
                            {"values", c.values}};
    };
    const nlohmann::json j{{"family", dc.family}, {"times", dc.times}, {"kg", ch(r.kg)}, {"wa", ch(r.wa)}};
    detail::write_text(out_dir / "decay.json", j.dump(2) + "\n");
  }
  return r;
}

// ---- resonance -----------------------------------------------------------------------

struct ResonanceSweep {
  std::vector<double> b;
  std::vector<ResonanceReport> reports;
  std::uint64_t total_violations() const {
    std::uint64_t v = 0;
    for (const auto& r : reports) v += r.total();
    return v;
  }
};

inline ResonanceSweep run_resonance(const ResonanceConfig& rc, std::uint64_t seed, const fs::path& out_dir = {}) {
  ResonanceSweep s;
  nlohmann::json arr = nlohmann::json::array();
  for (std::size_t i = 0; i < rc.b.size(); ++i) {
    const auto rep = check_resonance_bounds(rc.b[i], rc.samples, seed + 0x9E3779B97F4A7C15ULL * i);
    s.b.push_back(rc.b[i]);
    s.reports.push_back(rep);
    arr.push_back({{"b", rc.b[i]},
                   {"samples", rep.samples},
                   {"checks", rep.checks},
                   {"violations_wkk", rep.violations_wkk},
                   {"violations_kkw", rep.violations_kkw},
                   {"violations_scalar", rep.violations_scalar}});
  }
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    const nlohmann::json j{{"seed", seed}, {"sweep", arr}, {"violations", s.total_violations()}};
    detail::write_text(out_dir / "resonance.json", j.dump(2) + "\n");
  }
  return s;
}

// ---- report ----------------------------------------------------------------------------

/// Reads a diagnostics CSV written by DiagnosticsSeries::write_csv.
inline DiagnosticsSeries read_diagnostics_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  auto cells = [](std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (quoted) {
        if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else if (c == '"') {
          quoted = false;
        } else {
          cur += c;
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        out.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    out.push_back(cur);
    return out;
  };
  std::string line;
  std::vector<std::string> header;
  DiagnosticsSeries s;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto c = cells(line);
    if (header.empty()) {
      if (c.empty() || c[0] != "t") throw ConfigError(path.string() + ": missing 't' header");
      header = c;
      continue;
    }
    if (c.size() != header.size()) throw ConfigError(path.string() + ": ragged row");
    DiagnosticsSeries::Row row;
    for (std::size_t i = 1; i < c.size(); ++i) row.emplace_back(header[i], detail::parse_double(header[i], c[i]));
    s.append(detail::parse_double("t", c[0]), row);
  }
  if (header.empty()) throw ConfigError(path.string() + ": no data");
  return s;
}

struct ReportEntry {
  std::string column;
  DecayFit fit;
};

inline std::vector<ReportEntry> run_report(const ReportConfig& rc, const fs::path& out_dir) {
  const DiagnosticsSeries s = read_diagnostics_csv(out_dir / "diagnostics.csv");
  std::vector<ReportEntry> out;
  nlohmann::json fits = nlohmann::json::object();
  for (const auto& col : rc.columns) {
    ReportEntry e{col, decay_fit(s.times(), s.column(col), rc.t_lo, rc.t_hi)};
    fits[col] = {{"exponent", e.fit.exponent},
                 {"stderr", e.fit.stderr_},
                 {"window", {e.fit.t_lo, e.fit.t_hi}},
                 {"samples", e.fit.samples}};
    out.push_back(e);
  }
  nlohmann::json j{{"fits", fits}, {"phase_drift", phase_drift_json(s, 2.0)}};
  detail::write_text(out_dir / "report.json", j.dump(2) + "\n");
  return out;
}

}  // namespace wkg
