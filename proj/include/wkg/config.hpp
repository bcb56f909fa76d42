#pragma once

// Run configuration: one INI file with sections, every key optional with a
// printed default. Unknown sections and keys are rejected.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <locale>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "wkg/diagnostics.hpp"
#include "wkg/errors.hpp"
#include "wkg/initial_data.hpp"
#include "wkg/params.hpp"
#include "wkg/radial.hpp"
#include "wkg/system.hpp"

namespace wkg {

struct DecayConfig {
  std::string family = "gaussian";  ///< gaussian | mode
  std::size_t n = 128;
  double L = 128.0;
  double width = 1.0;
  std::array<int, 3> mode{3, 1, 0};
  int stride = 2;  ///< sample every stride-th grid point per axis
  std::vector<double> times{5, 8, 12, 18, 27, 40};
};

struct ResonanceConfig {
  std::vector<double> b{1, 2, 4, 8};
  std::uint64_t samples = 1000000;
};

struct ReportConfig {
  double t_lo = 2.0;
  double t_hi = 1e300;
  std::vector<std::string> columns{"sup_u0", "sup_v0"};
};

struct RunConfig {
  // grid
  int dim = 3;
  std::size_t n = 64;
  double L = 96.0;
  double box_factor = 4.0;  ///< required L >= box_factor t_max + 2 (data radius)
  // coupling
  std::string coefficients = "radial_model";  ///< radial_model | zero | custom
  CouplingCoefficients coeffs = CouplingCoefficients::radial_model();
  // norms
  DyadicParams params;
  // data
  InitialDataSpec data = default_data();
  // time
  double dt = 0.25;
  double t_max = 20.0;
  double sample_every = 1.0;
  // snapshots
  bool dyadic_snapshots = true;
  std::vector<double> snapshot_times;
  // diagnostics
  DiagnosticToggles diag;
  bool gamma_identity = true;
  bool theta = true;
  // run
  std::uint64_t seed = 1;
  std::string out = "wkg_out";
  int threads = 0;
  // other subcommands
  RadialConfig radial;
  DecayConfig decay;
  ResonanceConfig resonance;
  ReportConfig report;

  static InitialDataSpec default_data() {
    InitialDataSpec s;
    s.family = DataFamily::gaussian;
    s.eps0 = 1e-3;
    s.bumps.push_back({DataField::u, 1.0, {0.0, 0.0, 0.0}, 4.0});
    s.bumps.push_back({DataField::u_t, 0.5, {0.0, 0.0, 0.0}, 4.0});
    s.bumps.push_back({DataField::v, 1.0, {0.0, 0.0, 0.0}, 4.0});
    s.bumps.push_back({DataField::v_t, 0.5, {0.0, 0.0, 0.0}, 4.0});
    return s;
  }

  /// Times at which snapshots are written: dyadic 1, 2, 4, ... <= t_max, then explicit ones.
  std::vector<double> snapshot_schedule() const {
    std::set<double> ts;
    if (dyadic_snapshots)
      for (double t = 1.0; t <= t_max * (1.0 + 1e-12); t *= 2.0) ts.insert(t);
    for (double t : snapshot_times) ts.insert(t);
    return {ts.begin(), ts.end()};
  }

  /// Number of dt steps in t, or throws if t is not a multiple of dt.
  long steps_for(double t, const char* what) const {
    const double k = t / dt;
    const long r = std::lround(k);
    if (std::abs(k - r) > 1e-9 * std::max(1.0, k)) {
      std::ostringstream msg;
      msg << what << " " << t << " is not a multiple of dt = " << dt;
      throw ConfigError(msg.str());
    }
    return r;
  }

  void validate() const {
    if (dim != 1 && dim != 3) throw ConfigError("rule grid.dim in {1, 3} violated");
    if (n < 8 || n % 2 != 0) throw ConfigError("rule grid.n even and >= 8 violated");
    if (!(L > 0.0)) throw ConfigError("rule grid.L > 0 violated");
    if (!(box_factor >= 1.0)) throw ConfigError("rule grid.box_factor >= 1 violated");
    if (!(dt > 0.0) || !(t_max > 0.0)) throw ConfigError("rule dt > 0 and t_max > 0 violated");
    const double dt_cap = std::min(0.5, L / (4.0 * static_cast<double>(n)));
    if (dt > dt_cap * (1.0 + 1e-12)) {
      std::ostringstream msg;
      msg << "rule dt <= min(0.5, L/(4n)) = " << dt_cap << " violated (dt = " << dt << ")";
      throw ConfigError(msg.str());
    }
    coeffs.validate();
    params.validate();
    data.validate();
    if (dim == 3) {
      const double need = box_factor * t_max + 2.0 * data.data_radius();
      if (L < need * (1.0 - 1e-12)) {
        std::ostringstream msg;
        msg << "rule L >= box_factor*t_max + 2*data_radius = " << need << " violated (L = " << L << ")";
        throw ConfigError(msg.str());
      }
    }
    if (!(sample_every > 0.0)) throw ConfigError("rule time.sample_every > 0 violated");
    steps_for(sample_every, "sample_every");
    steps_for(t_max, "t_max");
    for (double t : snapshot_times) {
      if (!(t > 0.0) || t > t_max) throw ConfigError("rule 0 < snapshot time <= t_max violated");
      steps_for(t, "snapshot time");
    }
    for (double t : snapshot_schedule()) steps_for(t, "snapshot time");
    if (threads < 0) throw ConfigError("rule run.threads >= 0 violated");
  }
};

namespace detail {

inline std::string fmt(double x) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(17) << x;
  return os.str();
}

inline double parse_double(const std::string& key, const std::string& v) {
  std::istringstream is(v);
  is.imbue(std::locale::classic());
  double x = 0.0;
  if (!(is >> x) || !(is >> std::ws).eof()) throw ConfigError("config key " + key + ": '" + v + "' is not a number");
  return x;
}

inline long long parse_int(const std::string& key, const std::string& v) {
  std::istringstream is(v);
  long long x = 0;
  if (!(is >> x) || !(is >> std::ws).eof()) throw ConfigError("config key " + key + ": '" + v + "' is not an integer");
  return x;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config key " + key + ": '" + v + "' is not a boolean");
}

inline std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::istringstream is(v);
  std::string tok;
  while (is >> tok) out.push_back(parse_double(key, tok));
  return out;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

inline std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + fmt(v[i]);
  return s;
}

inline std::string matrix_string(const Matrix4& m) {
  std::vector<double> v;
  for (const auto& row : m)
    for (double x : row) v.push_back(x);
  return join(v);
}

inline Matrix4 parse_matrix(const std::string& key, const std::string& s) {
  const auto v = parse_list(key, s);
  if (v.size() != 16) throw ConfigError("config key " + key + " needs 16 numbers (row-major 4x4)");
  Matrix4 m{};
  for (int i = 0; i < 16; ++i) m[i / 4][i % 4] = v[static_cast<std::size_t>(i)];
  return m;
}

// "field amplitude cx cy cz width" per bump, "field m1 m2 m3 re im" per mode; ';' separated.
inline std::string components_string(const InitialDataSpec& d) {
  std::string s;
  if (d.family == DataFamily::modes) {
    for (std::size_t i = 0; i < d.modes.size(); ++i) {
      const auto& m = d.modes[i];
      s += (i ? "; " : "") + std::string(to_string(m.field)) + " " + std::to_string(m.mode[0]) + " " +
           std::to_string(m.mode[1]) + " " + std::to_string(m.mode[2]) + " " + fmt(m.amplitude.real()) + " " +
           fmt(m.amplitude.imag());
    }
  } else {
    for (std::size_t i = 0; i < d.bumps.size(); ++i) {
      const auto& b = d.bumps[i];
      s += (i ? "; " : "") + std::string(to_string(b.field)) + " " + fmt(b.amplitude) + " " + fmt(b.center[0]) + " " +
           fmt(b.center[1]) + " " + fmt(b.center[2]) + " " + fmt(b.width);
    }
  }
  return s;
}

inline void parse_components(const std::string& key, const std::string& s, InitialDataSpec& d) {
  d.bumps.clear();
  d.modes.clear();
  for (const auto& part : split(s, ';')) {
    const std::string item = trim(part);
    if (item.empty()) continue;
    std::istringstream is(item);
    std::string field;
    is >> field;
    std::vector<double> nums;
    std::string tok;
    while (is >> tok) nums.push_back(parse_double(key, tok));
    if (nums.size() != 5) throw ConfigError("config key " + key + ": component '" + item + "' needs a field and 5 numbers");
    if (d.family == DataFamily::modes) {
      ModeComponent m;
      m.field = parse_field(field);
      for (int k = 0; k < 3; ++k) {
        if (nums[k] != std::round(nums[k])) throw ConfigError("config key " + key + ": mode indices must be integers");
        m.mode[k] = static_cast<int>(nums[k]);
      }
      m.amplitude = Complex(nums[3], nums[4]);
      d.modes.push_back(m);
    } else {
      d.bumps.push_back({parse_field(field), nums[0], {nums[1], nums[2], nums[3]}, nums[4]});
    }
  }
}

}  // namespace detail

/// Reads an INI file on top of the defaults.
inline RunConfig load_config(std::istream& in, const std::string& source = "config") {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(source + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  RunConfig c;
  std::string coeff_A, coeff_B, coeff_D;
  std::string components;
  bool have_components = false;

  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw ConfigError("config key '" + section + "' is outside any section");
    for (const auto& [key, node] : body) {
      const std::string k = section + "." + key;
      const std::string v = node.data();
      auto D = [&] { return detail::parse_double(k, v); };
      auto I = [&] { return detail::parse_int(k, v); };
      auto B = [&] { return detail::parse_bool(k, v); };
      if (section == "grid") {
        if (key == "dim") c.dim = static_cast<int>(I());
        else if (key == "n") c.n = static_cast<std::size_t>(std::max(0LL, I()));
        else if (key == "L") c.L = D();
        else if (key == "box_factor") c.box_factor = D();
        else throw ConfigError("unknown config key " + k);
      } else if (section == "coefficients") {
        if (key == "preset") c.coefficients = v;
        else if (key == "A") coeff_A = v;
        else if (key == "B") coeff_B = v;
        else if (key == "D") coeff_D = v;
        else throw ConfigError("unknown config key " + k);
      } else if (section == "params") {
        if (key == "N0") c.params.N0 = D();
        else if (key == "N1") c.params.N1 = static_cast<int>(I());
        else if (key == "d") c.params.d = D();
        else if (key == "kappa") c.params.kappa = D();
        else if (key == "delta") c.params.delta = D();
        else if (key == "beta") c.params.beta = D();
        else if (key == "p") c.params.p = D();
        else throw ConfigError("unknown config key " + k);
      } else if (section == "data") {
        if (key == "family") c.data.family = parse_family(v);
        else if (key == "eps0") c.data.eps0 = D();
        else if (key == "components") {
          components = v;
          have_components = true;
        } else throw ConfigError("unknown config key " + k);
      } else if (section == "time") {
        if (key == "dt") c.dt = D();
        else if (key == "t_max") c.t_max = D();
        else if (key == "sample_every") c.sample_every = D();
        else throw ConfigError("unknown config key " + k);
      } else if (section == "snapshots") {
        if (key == "dyadic") c.dyadic_snapshots = B();
        else if (key == "times") c.snapshot_times = detail::parse_list(k, v);
        else throw ConfigError("unknown config key " + k);
      } else if (section == "diagnostics") {
        if (key == "z_norms") c.diag.z_norms = B();
        else if (key == "energies") c.diag.energies = B();
        else if (key == "sup_norms") c.diag.sup_norms = B();
        else if (key == "weighted_profiles") c.diag.weighted_profiles = B();
        else if (key == "sobolev") c.diag.sobolev = B();
        else if (key == "gamma_identity") c.gamma_identity = B();
        else if (key == "theta") c.theta = B();
        else throw ConfigError("unknown config key " + k);
      } else if (section == "run") {
        if (key == "seed") c.seed = static_cast<std::uint64_t>(I());
        else if (key == "out") c.out = v;
        else if (key == "threads") c.threads = static_cast<int>(I());
        else throw ConfigError("unknown config key " + k);
      } else if (section == "radial") {
        if (key == "R") c.radial.R = D();
        else if (key == "n_r") c.radial.n_r = static_cast<int>(I());
        else if (key == "dt") c.radial.dt = D();
        else if (key == "t_max") c.radial.t_max = D();
        else if (key == "eps") c.radial.eps = D();
        else if (key == "chi_scale") c.radial.chi_scale = D();
        else if (key == "couple_u") c.radial.couple_u = B();
        else if (key == "sample_every") c.radial.sample_every = D();
        else throw ConfigError("unknown config key " + k);
      } else if (section == "decay") {
        if (key == "family") c.decay.family = v;
        else if (key == "n") c.decay.n = static_cast<std::size_t>(std::max(0LL, I()));
        else if (key == "L") c.decay.L = D();
        else if (key == "width") c.decay.width = D();
        else if (key == "stride") c.decay.stride = static_cast<int>(I());
        else if (key == "times") c.decay.times = detail::parse_list(k, v);
        else if (key == "mode") {
          const auto m = detail::parse_list(k, v);
          if (m.size() != 3) throw ConfigError("config key " + k + " needs 3 integers");
          for (int i = 0; i < 3; ++i) c.decay.mode[i] = static_cast<int>(m[i]);
        } else throw ConfigError("unknown config key " + k);
      } else if (section == "resonance") {
        if (key == "b") c.resonance.b = detail::parse_list(k, v);
        else if (key == "samples") c.resonance.samples = static_cast<std::uint64_t>(std::max(0LL, I()));
        else throw ConfigError("unknown config key " + k);
      } else if (section == "report") {
        if (key == "t_lo") c.report.t_lo = D();
        else if (key == "t_hi") c.report.t_hi = D();
        else if (key == "columns") {
          c.report.columns.clear();
          std::istringstream is(v);
          std::string col;
          while (is >> col) c.report.columns.push_back(col);
        } else throw ConfigError("unknown config key " + k);
      } else {
        throw ConfigError("unknown config section [" + section + "]");
      }
    }
  }

  if (c.coefficients == "radial_model") c.coeffs = CouplingCoefficients::radial_model();
  else if (c.coefficients == "zero" || c.coefficients == "custom") c.coeffs = CouplingCoefficients{};
  else throw ConfigError("config key coefficients.preset: expected radial_model, zero or custom");
  if (!coeff_A.empty()) c.coeffs.A = detail::parse_matrix("coefficients.A", coeff_A);
  if (!coeff_B.empty()) c.coeffs.B = detail::parse_matrix("coefficients.B", coeff_B);
  if (!coeff_D.empty()) c.coeffs.D = detail::parse_double("coefficients.D", coeff_D);
  if (have_components) detail::parse_components("data.components", components, c.data);
  else if (c.data.family == DataFamily::modes) c.data.bumps.clear();
  return c;
}

inline RunConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return load_config(in, path.string());
}

/// Every setting, in a form load_config reads back to the same values.
inline void print_config(std::ostream& os, const RunConfig& c) {
  using detail::fmt;
  auto b = [](bool x) { return x ? "true" : "false"; };
  os << "[grid]\n"
     << "dim = " << c.dim << "\n"
     << "n = " << c.n << "\n"
     << "L = " << fmt(c.L) << "\n"
     << "box_factor = " << fmt(c.box_factor) << "\n\n"
     << "[coefficients]\n"
     << "preset = " << c.coefficients << "\n"
     << "A = " << detail::matrix_string(c.coeffs.A) << "\n"
     << "B = " << detail::matrix_string(c.coeffs.B) << "\n"
     << "D = " << fmt(c.coeffs.D) << "\n\n"
     << "[params]\n"
     << "N0 = " << fmt(c.params.N0) << "\n"
     << "N1 = " << c.params.N1 << "\n"
     << "d = " << fmt(c.params.d) << "\n"
     << "kappa = " << fmt(c.params.kappa) << "\n"
     << "delta = " << fmt(c.params.delta) << "\n"
     << "beta = " << fmt(c.params.beta) << "\n"
     << "p = " << fmt(c.params.p) << "\n\n"
     << "[data]\n"
     << "family = " << to_string(c.data.family) << "\n"
     << "eps0 = " << fmt(c.data.eps0) << "\n"
     << "components = " << detail::components_string(c.data) << "\n\n"
     << "[time]\n"
     << "dt = " << fmt(c.dt) << "\n"
     << "t_max = " << fmt(c.t_max) << "\n"
     << "sample_every = " << fmt(c.sample_every) << "\n\n"
     << "[snapshots]\n"
     << "dyadic = " << b(c.dyadic_snapshots) << "\n"
     << "times = " << detail::join(c.snapshot_times) << "\n\n"
     << "[diagnostics]\n"
     << "z_norms = " << b(c.diag.z_norms) << "\n"
     << "energies = " << b(c.diag.energies) << "\n"
     << "sup_norms = " << b(c.diag.sup_norms) << "\n"
     << "weighted_profiles = " << b(c.diag.weighted_profiles) << "\n"
     << "sobolev = " << b(c.diag.sobolev) << "\n"
     << "gamma_identity = " << b(c.gamma_identity) << "\n"
     << "theta = " << b(c.theta) << "\n\n"
     << "[run]\n"
     << "seed = " << c.seed << "\n"
     << "out = " << c.out << "\n"
     << "threads = " << c.threads << "\n\n"
     << "[radial]\n"
     << "R = " << fmt(c.radial.R) << "\n"
     << "n_r = " << c.radial.n_r << "\n"
     << "dt = " << fmt(c.radial.dt) << "\n"
     << "t_max = " << fmt(c.radial.t_max) << "\n"
     << "eps = " << fmt(c.radial.eps) << "\n"
     << "chi_scale = " << fmt(c.radial.chi_scale) << "\n"
     << "couple_u = " << b(c.radial.couple_u) << "\n"
     << "sample_every = " << fmt(c.radial.sample_every) << "\n\n"
     << "[decay]\n"
     << "family = " << c.decay.family << "\n"
     << "n = " << c.decay.n << "\n"
     << "L = " << fmt(c.decay.L) << "\n"
     << "width = " << fmt(c.decay.width) << "\n"
     << "mode = " << c.decay.mode[0] << " " << c.decay.mode[1] << " " << c.decay.mode[2] << "\n"
     << "stride = " << c.decay.stride << "\n"
     << "times = " << detail::join(c.decay.times) << "\n\n"
     << "[resonance]\n"
     << "b = " << detail::join(c.resonance.b) << "\n"
     << "samples = " << c.resonance.samples << "\n\n"
     << "[report]\n"
     << "t_lo = " << fmt(c.report.t_lo) << "\n"
     << "t_hi = " << fmt(c.report.t_hi) << "\n"
     << "columns =";
  for (const auto& col : c.report.columns) os << " " << col;
  os << "\n";
}

}  // namespace wkg
