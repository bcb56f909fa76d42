#pragma once

// Periodic-box spectral grid, transforms, and Fourier multipliers.
//
// Transform convention (fixed once, used everywhere):
//   forward   f^(xi) = cell_volume * sum_x f(x) exp(-i x.xi)
//   inverse   f(x)   = mode_weight / (2 pi)^dim * sum_xi f^(xi) exp(i x.xi)
// with centered coordinates x in [-L/2, L/2), so spectral fields approximate
// the continuum Fourier transform and Plancherel holds exactly:
//   cell_volume * sum |f|^2 = mode_weight / (2 pi)^dim * sum |f^|^2.

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <memory>
#include <mutex>
#include <new>
#include <numbers>
#include <string>
#include <vector>

#include "wkg/errors.hpp"

namespace wkg {

using Complex = std::complex<double>;
using Vec3 = std::array<double, 3>;

template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::size_t alignment = 64;

  AlignedAllocator() noexcept = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t count) {
    std::size_t bytes = count * sizeof(T);
    bytes = std::max<std::size_t>(alignment, (bytes + alignment - 1) / alignment * alignment);
    void* p = std::aligned_alloc(alignment, bytes);
    if (p == nullptr) throw std::bad_alloc();
    return static_cast<T*>(p);
  }
  void deallocate(T* p, std::size_t) noexcept { std::free(p); }

  template <class U>
  bool operator==(const AlignedAllocator<U>&) const noexcept {
    return true;
  }
};

using ComplexField = std::vector<Complex, AlignedAllocator<Complex>>;
using RealField = std::vector<double>;

enum class Dispersion { wave, klein_gordon };

inline const char* to_string(Dispersion d) { return d == Dispersion::wave ? "wa" : "kg"; }

inline double norm3(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

/// |xi|
inline double lambda_wave(const Vec3& xi) { return norm3(xi); }
/// sqrt(1 + |xi|^2)
inline double lambda_kg(const Vec3& xi) {
  return std::sqrt(1.0 + xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]);
}
inline double lambda(Dispersion d, const Vec3& xi) {
  return d == Dispersion::wave ? lambda_wave(xi) : lambda_kg(xi);
}

// Littlewood-Paley bump: phi == 1 on [0, 5/4], phi == 0 on [8/5, inf).
inline constexpr double kBumpPlateau = 1.25;
inline constexpr double kBumpSupport = 1.6;

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// In-place complex DFT plans for one grid shape. FFTW_ESTIMATE keeps plan
// selection (and therefore every output bit) independent of timing noise.
class FftPlans {
 public:
  FftPlans(int dim, std::size_t n) : size_(1) {
    std::array<int, 3> dims{};
    for (int d = 0; d < dim; ++d) {
      dims[d] = static_cast<int>(n);
      size_ *= n;
    }
    ComplexField scratch(size_);
    auto* data = reinterpret_cast<fftw_complex*>(scratch.data());
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    forward_ = fftw_plan_dft(dim, dims.data(), data, data, FFTW_FORWARD, FFTW_ESTIMATE);
    backward_ = fftw_plan_dft(dim, dims.data(), data, data, FFTW_BACKWARD, FFTW_ESTIMATE);
    if (forward_ == nullptr || backward_ == nullptr) throw NumericalError("FFTW planning failed");
  }
  FftPlans(const FftPlans&) = delete;
  FftPlans& operator=(const FftPlans&) = delete;
  ~FftPlans() {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }

  void forward(ComplexField& f) const { execute(forward_, f); }
  void backward(ComplexField& f) const { execute(backward_, f); }

 private:
  void execute(fftw_plan plan, ComplexField& f) const {
    if (f.size() != size_) throw NumericalError("FFT size mismatch");
    auto* data = reinterpret_cast<fftw_complex*>(f.data());
    fftw_execute_dft(plan, data, data);
  }

  std::size_t size_;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

}  // namespace detail

/// Periodic box [-L/2, L/2)^dim sampled with n points per axis. Immutable
/// after construction; share it by const reference or shared_ptr.
class SpectralGrid {
 public:
  SpectralGrid(int dim, std::size_t n, double box_length) : dim_(dim), n_(n), length_(box_length) {
    if (dim != 1 && dim != 3) throw ConfigError("grid dimension must be 1 or 3, got " + std::to_string(dim));
    if (n < 8 || (n & (n - 1)) != 0)
      throw ConfigError("grid points per dimension must be a power of two >= 8, got " + std::to_string(n));
    if (!(box_length > 0.0) || !std::isfinite(box_length))
      throw ConfigError("box length must be positive, got " + std::to_string(box_length));

    size_ = 1;
    for (int d = 0; d < dim_; ++d) size_ *= n_;
    spacing_ = length_ / static_cast<double>(n_);
    dk_ = 2.0 * std::numbers::pi / length_;
    cell_volume_ = std::pow(spacing_, dim_);
    mode_weight_ = std::pow(dk_, dim_);

    axis_x_.resize(n_);
    axis_k_.resize(n_);
    axis_m_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      axis_x_[i] = -0.5 * length_ + static_cast<double>(i) * spacing_;
      const long m = i < n_ / 2 ? static_cast<long>(i) : static_cast<long>(i) - static_cast<long>(n_);
      axis_m_[i] = static_cast<int>(m);
      axis_k_[i] = dk_ * static_cast<double>(m);
    }

    kabs_.resize(size_);
    flags_.resize(size_);
    neg_.resize(size_);
    const std::size_t third = n_ / 3;
    double kmin = 0.0, kmax = 0.0;
    for (std::size_t idx = 0; idx < size_; ++idx) {
      const auto ii = unravel(idx);
      std::uint8_t flag = 0;
      bool keep = true;
      std::array<std::size_t, 3> neg{};
      for (int d = 0; d < dim_; ++d) {
        if (ii[d] == n_ / 2) flag |= kNyquist;
        if (static_cast<std::size_t>(std::abs(axis_m_[ii[d]])) > third) keep = false;
        if (ii[d] < 2 || ii[d] + 2 >= n_) flag |= kBoundary;
        neg[d] = (n_ - ii[d]) % n_;
      }
      if (keep) flag |= kDealiasKeep;
      if ((ii[0] + ii[1] + ii[2]) % 2 == 1) flag |= kOddSign;
      flags_[idx] = flag;
      neg_[idx] = ravel(neg);
      const Vec3 xi = wavevector(idx);
      kabs_[idx] = norm3(xi);
      if (!(flag & kNyquist) && idx != 0) {
        kmin = kmin == 0.0 ? kabs_[idx] : std::min(kmin, kabs_[idx]);
        kmax = std::max(kmax, kabs_[idx]);
      }
    }
    xi_min_ = kmin;
    xi_max_ = kmax;
    // Shells k whose cutoff phi_k is nonzero on at least one grid mode:
    // phi_k(xi) > 0 iff (5/8) 2^k < |xi| < (8/5) 2^k.
    k_min_ = static_cast<int>(std::floor(std::log2(kmin / kBumpSupport))) + 1;
    k_max_ = static_cast<int>(std::ceil(std::log2(kmax / (0.5 * kBumpPlateau)))) - 1;

    plans_ = std::make_shared<detail::FftPlans>(dim_, n_);
  }

  int dim() const noexcept { return dim_; }
  std::size_t n() const noexcept { return n_; }
  std::size_t size() const noexcept { return size_; }
  double box_length() const noexcept { return length_; }
  double spacing() const noexcept { return spacing_; }
  double wavenumber_step() const noexcept { return dk_; }
  double cell_volume() const noexcept { return cell_volume_; }
  double mode_weight() const noexcept { return mode_weight_; }
  /// mode_weight / (2 pi)^dim == 1 / L^dim
  double inverse_weight() const noexcept { return 1.0 / std::pow(length_, dim_); }
  double smallest_wavenumber() const noexcept { return xi_min_; }
  double largest_wavenumber() const noexcept { return xi_max_; }
  int k_min() const noexcept { return k_min_; }
  int k_max() const noexcept { return k_max_; }

  const std::vector<double>& axis_coordinates() const noexcept { return axis_x_; }
  const std::vector<double>& axis_wavenumbers() const noexcept { return axis_k_; }
  int axis_mode(std::size_t i) const { return axis_m_[i]; }

  std::array<std::size_t, 3> unravel(std::size_t idx) const noexcept {
    std::array<std::size_t, 3> ii{0, 0, 0};
    for (int d = dim_ - 1; d >= 0; --d) {
      ii[d] = idx % n_;
      idx /= n_;
    }
    return ii;
  }
  std::size_t ravel(const std::array<std::size_t, 3>& ii) const noexcept {
    std::size_t idx = 0;
    for (int d = 0; d < dim_; ++d) idx = idx * n_ + ii[d];
    return idx;
  }
  /// Integer mode numbers (m_0, m_1, m_2), each in [-n/2, n/2).
  std::array<int, 3> modes(std::size_t idx) const noexcept {
    const auto ii = unravel(idx);
    std::array<int, 3> m{0, 0, 0};
    for (int d = 0; d < dim_; ++d) m[d] = axis_m_[ii[d]];
    return m;
  }

  Vec3 wavevector(std::size_t idx) const noexcept {
    const auto ii = unravel(idx);
    Vec3 xi{0.0, 0.0, 0.0};
    for (int d = 0; d < dim_; ++d) xi[d] = axis_k_[ii[d]];
    return xi;
  }
  Vec3 position(std::size_t idx) const noexcept {
    const auto ii = unravel(idx);
    Vec3 x{0.0, 0.0, 0.0};
    for (int d = 0; d < dim_; ++d) x[d] = axis_x_[ii[d]];
    return x;
  }
  double xi_norm(std::size_t idx) const noexcept { return kabs_[idx]; }
  double lambda(Dispersion disp, std::size_t idx) const noexcept {
    return disp == Dispersion::wave ? kabs_[idx] : std::sqrt(1.0 + kabs_[idx] * kabs_[idx]);
  }

  bool nyquist(std::size_t idx) const noexcept { return flags_[idx] & kNyquist; }
  bool dealias_keep(std::size_t idx) const noexcept { return flags_[idx] & kDealiasKeep; }
  bool boundary_cell(std::size_t idx) const noexcept { return flags_[idx] & kBoundary; }
  /// Index of the mode -xi (the Nyquist plane maps to itself).
  std::size_t negated(std::size_t idx) const noexcept { return neg_[idx]; }

  /// Forward transform in place; see the convention at the top of the file.
  void forward_inplace(ComplexField& f) const {
    plans_->forward(f);
    for (std::size_t idx = 0; idx < size_; ++idx) f[idx] *= sign(idx) * cell_volume_;
  }
  void inverse_inplace(ComplexField& f) const {
    const double scale = inverse_weight();
    for (std::size_t idx = 0; idx < size_; ++idx) f[idx] *= sign(idx) * scale;
    plans_->backward(f);
  }
  ComplexField forward(ComplexField f) const {
    forward_inplace(f);
    return f;
  }
  ComplexField forward(const RealField& f) const {
    ComplexField out(f.begin(), f.end());
    forward_inplace(out);
    return out;
  }
  ComplexField inverse(ComplexField f_hat) const {
    inverse_inplace(f_hat);
    return f_hat;
  }
  RealField inverse_real(ComplexField f_hat) const {
    inverse_inplace(f_hat);
    RealField out(size_);
    for (std::size_t i = 0; i < size_; ++i) out[i] = f_hat[i].real();
    return out;
  }

  /// Physical field sampled from a function of position.
  template <class F>
  ComplexField sample(F&& f) const {
    ComplexField out(size_);
    for (std::size_t idx = 0; idx < size_; ++idx) out[idx] = f(position(idx));
    return out;
  }

 private:
  static constexpr std::uint8_t kNyquist = 1;
  static constexpr std::uint8_t kDealiasKeep = 2;
  static constexpr std::uint8_t kBoundary = 4;
  static constexpr std::uint8_t kOddSign = 8;

  // (-1)^(m_0 + m_1 + m_2): the phase of the centered coordinate origin.
  double sign(std::size_t idx) const noexcept { return (flags_[idx] & kOddSign) ? -1.0 : 1.0; }

  int dim_;
  std::size_t n_;
  double length_;
  std::size_t size_ = 0;
  double spacing_ = 0, dk_ = 0, cell_volume_ = 0, mode_weight_ = 0;
  double xi_min_ = 0, xi_max_ = 0;
  int k_min_ = 0, k_max_ = 0;
  std::vector<double> axis_x_, axis_k_;
  std::vector<int> axis_m_;
  std::vector<double> kabs_;
  std::vector<std::uint8_t> flags_;
  std::vector<std::size_t> neg_;
  std::shared_ptr<detail::FftPlans> plans_;
};

using GridPtr = std::shared_ptr<const SpectralGrid>;

inline GridPtr build_grid(int dim, std::size_t n, double box_length) {
  return std::make_shared<const SpectralGrid>(dim, n, box_length);
}

/// Pointwise product with m(xi) over all modes. Nyquist modes are zeroed; a
/// non-finite multiplier at the zero mode is read as 0, anywhere else it aborts.
template <class Multiplier>
ComplexField apply_multiplier(const SpectralGrid& g, const ComplexField& f_hat, Multiplier&& m) {
  ComplexField out(g.size());
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    if (g.nyquist(idx)) {
      out[idx] = 0.0;
      continue;
    }
    const Complex value = m(g.wavevector(idx));
    if (!std::isfinite(value.real()) || !std::isfinite(value.imag())) {
      if (idx == 0) {
        out[idx] = 0.0;
        continue;
      }
      const auto mm = g.modes(idx);
      throw NumericalError("non-finite multiplier at mode (" + std::to_string(mm[0]) + "," +
                           std::to_string(mm[1]) + "," + std::to_string(mm[2]) + ")");
    }
    out[idx] = value * f_hat[idx];
  }
  return out;
}

/// Multiply by a radial multiplier given as a function of |xi|; same rules.
template <class Radial>
ComplexField apply_radial_multiplier(const SpectralGrid& g, const ComplexField& f_hat, Radial&& m) {
  ComplexField out(g.size());
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    if (g.nyquist(idx)) {
      out[idx] = 0.0;
      continue;
    }
    const double value = m(g.xi_norm(idx));
    if (!std::isfinite(value)) {
      if (idx == 0) {
        out[idx] = 0.0;
        continue;
      }
      throw NumericalError("non-finite radial multiplier at |xi|=" + std::to_string(g.xi_norm(idx)));
    }
    out[idx] = value * f_hat[idx];
  }
  return out;
}

/// i xi_l, the symbol of d/dx_l.
inline ComplexField spectral_derivative(const SpectralGrid& g, const ComplexField& f_hat, int l) {
  return apply_multiplier(g, f_hat, [l](const Vec3& xi) { return Complex(0.0, xi[l]); });
}

// ---- norms -------------------------------------------------------------

/// Physical L^2 norm of a physical field.
inline double l2_physical(const SpectralGrid& g, const ComplexField& f) {
  double s = 0.0;
  for (const auto& z : f) s += std::norm(z);
  return std::sqrt(g.cell_volume() * s);
}
inline double l2_physical(const SpectralGrid& g, const RealField& f) {
  double s = 0.0;
  for (double z : f) s += z * z;
  return std::sqrt(g.cell_volume() * s);
}
/// Physical L^2 norm of the field whose transform is f_hat (Plancherel).
inline double l2_from_spectral(const SpectralGrid& g, const ComplexField& f_hat) {
  double s = 0.0;
  for (const auto& z : f_hat) s += std::norm(z);
  return std::sqrt(g.inverse_weight() * s);
}
/// Raw Fourier-side norm (integral of |g(xi)|^2 d xi)^(1/2).
inline double l2_xi(const SpectralGrid& g, const ComplexField& g_hat) {
  double s = 0.0;
  for (const auto& z : g_hat) s += std::norm(z);
  return std::sqrt(g.mode_weight() * s);
}
inline double sup_abs(const ComplexField& f) {
  double m = 0.0;
  for (const auto& z : f) m = std::max(m, std::abs(z));
  return m;
}
inline double sup_abs(const RealField& f) {
  double m = 0.0;
  for (double z : f) m = std::max(m, std::abs(z));
  return m;
}

/// Share of |f|^2 carried by cells within two cells of the box boundary.
inline double relative_boundary_mass(const SpectralGrid& g, const ComplexField& f) {
  double total = 0.0, edge = 0.0;
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    const double w = std::norm(f[idx]);
    total += w;
    if (g.boundary_cell(idx)) edge += w;
  }
  return total > 0.0 ? edge / total : 0.0;
}

/// Containment threshold on relative boundary mass for x-weighted operations.
inline constexpr double kContainmentTolerance = 1e-8;

inline void require_contained(const SpectralGrid& g, const ComplexField& f, const char* what) {
  const double mass = relative_boundary_mass(g, f);
  if (mass >= kContainmentTolerance)
    throw ContainmentError(std::string(what) + ": field reaches the periodic boundary", mass);
}

// ---- field arithmetic ----------------------------------------------------

inline void axpy(ComplexField& y, Complex a, const ComplexField& x) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

inline ComplexField scaled(const ComplexField& x, Complex a) {
  ComplexField out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = a * x[i];
  return out;
}

inline ComplexField difference(const ComplexField& a, const ComplexField& b) {
  ComplexField out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

inline bool all_finite(const ComplexField& f) {
  for (const auto& z : f)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

}  // namespace wkg
