#pragma once

// Classical RK4 on the profile equation
//   d/dt V = e^{it Lambda} N(e^{-it Lambda} V),
// so the linear flow is carried exactly by the phases and never stepped.

#include <cmath>
#include <sstream>
#include <utility>

#include "wkg/errors.hpp"
#include "wkg/system.hpp"

namespace wkg {

class ProfileIntegrator {
 public:
  explicit ProfileIntegrator(const WkgSystem& system, double dt_max = 0.5) : sys_(system), dt_max_(dt_max) {}

  double dt_max() const noexcept { return dt_max_; }

  /// One RK4 step of size dt; throws NumericalError on a non-finite stage.
  ProfileState step(const ProfileState& s, double dt) const {
    if (!(dt > 0.0)) throw ConfigError("time step must be positive");
    if (dt > dt_max_) {
      std::ostringstream msg;
      msg << "time step " << dt << " exceeds dt_max " << dt_max_;
      throw ConfigError(msg.str());
    }
    const SpectralGrid& g = sys_.grid();
    if (sys_.coefficients().is_zero()) {
      ProfileState out = s;
      out.t = s.t + dt;
      return out;
    }

    const Phases p0(g, s.t), ph(g, s.t + 0.5 * dt), p1(g, s.t + dt);
    auto rhs = [&](const Phases& p, const ComplexField& V_wa, const ComplexField& V_kg, double t) {
      const ComplexField U_wa = p.to_u(V_wa, p.wa);
      const ComplexField U_kg = p.to_u(V_kg, p.kg);
      auto n = sys_.nonlinearity(U_wa, U_kg);
      Phases::to_v_inplace(n.wa, p.wa);
      Phases::to_v_inplace(n.kg, p.kg);
      if (!all_finite(n.wa) || !all_finite(n.kg)) {
        std::ostringstream msg;
        msg << "non-finite nonlinearity at t = " << t;
        throw NumericalError(msg.str());
      }
      return n;
    };

    const std::size_t size = g.size();
    ComplexField a_wa(size), a_kg(size);
    auto stage_input = [&](const WkgSystem::Terms& k, double h) {
      for (std::size_t i = 0; i < size; ++i) {
        a_wa[i] = s.V_wa[i] + h * k.wa[i];
        a_kg[i] = s.V_kg[i] + h * k.kg[i];
      }
    };

    const auto k1 = rhs(p0, s.V_wa, s.V_kg, s.t);
    stage_input(k1, 0.5 * dt);
    const auto k2 = rhs(ph, a_wa, a_kg, s.t + 0.5 * dt);
    stage_input(k2, 0.5 * dt);
    const auto k3 = rhs(ph, a_wa, a_kg, s.t + 0.5 * dt);
    stage_input(k3, dt);
    const auto k4 = rhs(p1, a_wa, a_kg, s.t + dt);

    ProfileState out;
    out.t = s.t + dt;
    out.V_wa.resize(size);
    out.V_kg.resize(size);
    const double w = dt / 6.0;
    for (std::size_t i = 0; i < size; ++i) {
      out.V_wa[i] = s.V_wa[i] + w * (k1.wa[i] + 2.0 * k2.wa[i] + 2.0 * k3.wa[i] + k4.wa[i]);
      out.V_kg[i] = s.V_kg[i] + w * (k1.kg[i] + 2.0 * k2.kg[i] + 2.0 * k3.kg[i] + k4.kg[i]);
    }
    if (!all_finite(out.V_wa) || !all_finite(out.V_kg)) {
      std::ostringstream msg;
      msg << "non-finite profile after step to t = " << out.t;
      throw NumericalError(msg.str());
    }
    return out;
  }

  /// Profile right-hand side e^{it Lambda} N at the state's own time.
  WkgSystem::Terms profile_rhs(const ProfileState& s) const {
    const Phases p(sys_.grid(), s.t);
    auto n = sys_.nonlinearity(p.to_u(s.V_wa, p.wa), p.to_u(s.V_kg, p.kg));
    Phases::to_v_inplace(n.wa, p.wa);
    Phases::to_v_inplace(n.kg, p.kg);
    return n;
  }

 private:
  // e^{-it Lambda} for both channels at one time.
  struct Phases {
    ComplexField wa, kg;
    Phases(const SpectralGrid& g, double t) : wa(g.size()), kg(g.size()) {
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (g.nyquist(i)) {
          wa[i] = kg[i] = 0.0;
          continue;
        }
        const double a = -t * g.lambda(Dispersion::wave, i);
        const double b = -t * g.lambda(Dispersion::klein_gordon, i);
        wa[i] = Complex(std::cos(a), std::sin(a));
        kg[i] = Complex(std::cos(b), std::sin(b));
      }
    }
    static ComplexField to_u(const ComplexField& V, const ComplexField& e) {
      ComplexField U(V.size());
      for (std::size_t i = 0; i < V.size(); ++i) U[i] = e[i] * V[i];
      return U;
    }
    static void to_v_inplace(ComplexField& N, const ComplexField& e) {
      for (std::size_t i = 0; i < N.size(); ++i) N[i] *= std::conj(e[i]);
    }
  };

  const WkgSystem& sys_;
  double dt_max_;
};

}  // namespace wkg
