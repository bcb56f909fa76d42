#pragma once

// Radial reduction of
//   u_tt - Lap u = v_t^2 + |grad v|^2 + v^2,   v_tt - Lap v + v = u Lap v
// in the variables w = r u, z = r v on [0, R] with w = z = 0 at both ends:
//   w_tt - w_rr = r (v_t^2 + v_r^2 + v^2),   z_tt - z_rr + z = u z_rr.
// Three-level leapfrog in time, second-order centered differences in r.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "wkg/diagnostics.hpp"
#include "wkg/errors.hpp"
#include "wkg/initial_data.hpp"

namespace wkg {

struct RadialConfig {
  double R = 160.0;
  int n_r = 3200;
  double dt = 0.025;
  double t_max = 30.0;
  double eps = 0.05;
  double chi_scale = 1.0;  ///< v(0) = eps chi(r / chi_scale)
  bool couple_u = true;    ///< false: v solves the linear Klein-Gordon equation
  double sample_every = 0.25;

  double dr() const noexcept { return R / n_r; }

  void validate() const {
    if (!(R > 0.0) || n_r < 16) throw ConfigError("radial grid needs R > 0 and n_r >= 16");
    if (!(dt > 0.0) || !(t_max > 0.0)) throw ConfigError("radial run needs dt > 0 and t_max > 0");
    if (dt >= dr()) throw ConfigError("radial CFL violated: dt must be smaller than dr = " + std::to_string(dr()));
    if (!(R > t_max + 4.0)) throw ConfigError("radial domain must satisfy R > t_max + 4");
    if (!(eps >= 0.0)) throw ConfigError("radial eps must be non-negative");
    if (!(chi_scale > 0.0)) throw ConfigError("radial chi_scale must be positive");
    if (!(sample_every > 0.0)) throw ConfigError("radial sample_every must be positive");
  }
};

struct RadialSnapshot {
  double t = 0.0;
  double dr = 0.0;
  std::vector<double> w, z;  ///< r u and r v at r_i = i dr

  double u_at(std::size_t i) const { return i == 0 ? w[1] / dr : w[i] / (static_cast<double>(i) * dr); }
  double v_at(std::size_t i) const { return i == 0 ? z[1] / dr : z[i] / (static_cast<double>(i) * dr); }
};

/// min over r <= t/4 of <t> u(r, t) / eps^2.
inline double light_cone_min(const RadialSnapshot& s, double eps) {
  if (s.t < 4.0 * s.dr) throw ConfigError("light-cone minimum needs t >= 4 dr");
  if (eps == 0.0) return 0.0;
  const double jt = std::sqrt(1.0 + s.t * s.t);
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < s.w.size() && static_cast<double>(i) * s.dr <= 0.25 * s.t; ++i)
    m = std::min(m, jt * s.u_at(i) / (eps * eps));
  return m;
}

class RadialModel {
 public:
  explicit RadialModel(RadialConfig cfg) : cfg_(cfg) {
    cfg_.validate();
    dr_ = cfg_.dr();
    const std::size_t n = static_cast<std::size_t>(cfg_.n_r) + 1;
    w_.assign(n, 0.0);
    z_.assign(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double r = static_cast<double>(i) * dr_;
      z_[i] = r * cfg_.eps * chi_profile(r / cfg_.chi_scale);
    }
    // First step from zero velocities: Taylor to second order.
    const std::vector<double> zt0(n, 0.0);
    std::vector<double> aw(n), az(n);
    accelerations(w_, z_, zt0, aw, az);
    w_prev_ = w_;
    z_prev_ = z_;
    zt_ = zt0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      w_[i] = w_prev_[i] + 0.5 * cfg_.dt * cfg_.dt * aw[i];
      z_[i] = z_prev_[i] + 0.5 * cfg_.dt * cfg_.dt * az[i];
    }
    steps_ = 1;
    energy0_ = kg_energy();
  }

  const RadialConfig& config() const noexcept { return cfg_; }
  double time() const noexcept { return steps_ * cfg_.dt; }

  RadialSnapshot snapshot() const { return {time(), dr_, w_, z_}; }

  void step() {
    const std::size_t n = w_.size();
    const double dt2 = cfg_.dt * cfg_.dt;
    // z first: its update needs only u and z at the current level.
    std::vector<double> z_next(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double zrr = (z_[i + 1] - 2.0 * z_[i] + z_[i - 1]) / (dr_ * dr_);
      const double u = cfg_.couple_u ? w_[i] / (static_cast<double>(i) * dr_) : 0.0;
      z_next[i] = 2.0 * z_[i] - z_prev_[i] + dt2 * ((1.0 + u) * zrr - z_[i]);
    }
    // Centered z_t at the current level, then w.
    for (std::size_t i = 0; i < n; ++i) zt_[i] = (z_next[i] - z_prev_[i]) / (2.0 * cfg_.dt);
    std::vector<double> w_next(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double wrr = (w_[i + 1] - 2.0 * w_[i] + w_[i - 1]) / (dr_ * dr_);
      w_next[i] = 2.0 * w_[i] - w_prev_[i] + dt2 * (wrr + source(z_, zt_, i));
    }
    const double t_next = time() + cfg_.dt;
    for (std::size_t i = 0; i < n; ++i)
      if (!std::isfinite(w_next[i]) || !std::isfinite(z_next[i])) {
        std::ostringstream msg;
        msg << "radial model became non-finite at t = " << t_next;
        throw NumericalError(msg.str());
      }
    w_prev_ = std::move(w_);
    z_prev_ = std::move(z_);
    w_ = std::move(w_next);
    z_ = std::move(z_next);
    ++steps_;
  }

  /// Discrete int (z_t^2 + z_r^2 + z^2) dr = int (v_t^2 + v_r^2 + v^2) r^2 dr on the staggered
  /// level between the previous and current steps (conserved exactly by the linear scheme).
  double kg_energy() const {
    double e = 0.0;
    const std::size_t n = w_.size();
    for (std::size_t i = 0; i < n; ++i) {
      const double zt = (z_[i] - z_prev_[i]) / cfg_.dt;
      e += zt * zt + z_[i] * z_prev_[i];
    }
    double grad = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i)
      grad += (z_[i + 1] - z_[i]) * (z_prev_[i + 1] - z_prev_[i]) / (dr_ * dr_);
    return (e + grad) * dr_;
  }

  double initial_energy() const noexcept { return energy0_; }

  /// Runs to t_max, sampling the light-cone minimum, u(0, t) and the KG energy.
  DiagnosticsSeries run() {
    DiagnosticsSeries series;
    const long total = std::lround(cfg_.t_max / cfg_.dt);
    const long every = std::max(1L, std::lround(cfg_.sample_every / cfg_.dt));
    auto record = [&]() {
      const RadialSnapshot s = snapshot();
      DiagnosticsSeries::Row row;
      row.emplace_back("light_cone_min", s.t >= 4.0 * dr_ ? light_cone_min(s, cfg_.eps) : 0.0);
      row.emplace_back("u_origin", s.u_at(0));
      row.emplace_back("v_origin", s.v_at(0));
      row.emplace_back("kg_energy", kg_energy());
      series.append(s.t, row);
    };
    record();
    while (steps_ < total) {
      step();
      if (steps_ % every == 0 || steps_ == total) record();
    }
    return series;
  }

 private:
  double source(const std::vector<double>& z, const std::vector<double>& zt, std::size_t i) const {
    const double r = static_cast<double>(i) * dr_;
    const double v = z[i] / r;
    const double vt = zt[i] / r;
    // v_r = (z_r - v) / r with a centered z_r.
    const double zr = (z[i + 1] - z[i - 1]) / (2.0 * dr_);
    const double vr = (zr - v) / r;
    return r * (vt * vt + vr * vr + v * v);
  }

  void accelerations(const std::vector<double>& w, const std::vector<double>& z, const std::vector<double>& zt,
                     std::vector<double>& aw, std::vector<double>& az) const {
    const std::size_t n = w.size();
    std::fill(aw.begin(), aw.end(), 0.0);
    std::fill(az.begin(), az.end(), 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double r = static_cast<double>(i) * dr_;
      const double zrr = (z[i + 1] - 2.0 * z[i] + z[i - 1]) / (dr_ * dr_);
      const double wrr = (w[i + 1] - 2.0 * w[i] + w[i - 1]) / (dr_ * dr_);
      const double u = cfg_.couple_u ? w[i] / r : 0.0;
      az[i] = (1.0 + u) * zrr - z[i];
      aw[i] = wrr + source(z, zt, i);
    }
  }

  RadialConfig cfg_;
  double dr_ = 0.0;
  std::vector<double> w_, z_, w_prev_, z_prev_, zt_;
  long steps_ = 0;
  double energy0_ = 0.0;
};

}  // namespace wkg
