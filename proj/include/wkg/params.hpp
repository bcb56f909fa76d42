#pragma once

#include <cmath>
#include <string>

#include "wkg/errors.hpp"

namespace wkg {

/// Norm parameters and the derived regularity/growth ladders N(n), H(n), H'(n).
struct DyadicParams {
  double N0 = 3.0;
  int N1 = 2;
  double d = 1.0;
  double kappa = 0.01;
  double delta = 1e-10;
  double beta = 1e-3;
  double p = 0.68;

  /// Values used by the global regularity theorem.
  static DyadicParams continuum() {
    DyadicParams prm;
    prm.N0 = 40.0;
    prm.N1 = 3;
    prm.d = 10.0;
    return prm;
  }
  /// Desk-scale ladder: same structure, regularity indices small enough that
  /// the weights do not drown a 64^3 grid in its highest modes.
  static DyadicParams desk() { return DyadicParams{}; }

  double d_prime() const noexcept { return 1.5 * d; }

  /// N(0) = N0 + 3d, N(n) = N0 - d n for n >= 1.
  double N(int n) const noexcept { return n == 0 ? N0 + 3.0 * d : N0 - d * n; }
  /// H(0) = 1, H(n) = 81 n - 80 for n >= 1.
  static int H(int n) noexcept { return n == 0 ? 1 : 81 * n - 80; }
  /// H'(0) = 6, H'(n) = H(n + 1) for n >= 1.
  static int H_prime(int n) noexcept { return n == 0 ? 6 : H(n + 1); }

  void validate() const {
    if (!(N0 > 0.0) || !(d > 0.0)) throw ConfigError("dyadic params: N0 and d must be positive");
    if (N1 < 0) throw ConfigError("dyadic params: N1 must be non-negative");
    if (N(N1) < 0.0) throw ConfigError("dyadic params: N(N1) = N0 - d*N1 must be non-negative");
    if (!(kappa >= 0.0) || !(delta >= 0.0) || !(beta >= 0.0))
      throw ConfigError("dyadic params: kappa, delta, beta must be non-negative");
    if (!(p > 0.0) || !(p < 1.0)) throw ConfigError("dyadic params: cutoff exponent p must lie in (0,1)");
  }
};

inline int positive_part(int k) noexcept { return k > 0 ? k : 0; }
inline int negative_part(int k) noexcept { return k < 0 ? k : 0; }

/// 2^exponent, with the exponent assembled in log2 space by the caller.
inline double pow2(double exponent) { return std::exp2(exponent); }

}  // namespace wkg
