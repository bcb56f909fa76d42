#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "wkg/config.hpp"
#include "wkg/run.hpp"
#include "wkg/snapshot.hpp"

#ifndef WKG_CLI_PATH
#error "WKG_CLI_PATH must name the built command-line binary"
#endif

using namespace wkg;
using Catch::Approx;

namespace {

const char* kSmallIni = R"([grid]
n = 16
L = 40
[time]
t_max = 2
dt = 0.25
sample_every = 0.5
[data]
components = v 1 0 0 0 2; u 0.5 1 0 0 2
)";

RunConfig small_config() {
  std::istringstream in(kSmallIni);
  return load_config(in, "small");
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("wkg_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write_file(const fs::path& p, const std::string& s) {
  std::ofstream f(p, std::ios::binary);
  f << s;
}

std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + WKG_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(st));
  return WEXITSTATUS(st);
}

double rel_diff(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

}  // namespace

TEST_CASE("config defaults validate and print round-trips", "[config]") {
  RunConfig c;
  CHECK_NOTHROW(c.validate());
  std::ostringstream a;
  print_config(a, c);
  std::istringstream in(a.str());
  const RunConfig back = load_config(in);
  std::ostringstream b;
  print_config(b, back);
  CHECK(a.str() == b.str());

  const RunConfig s = small_config();
  CHECK(s.n == 16);
  CHECK(s.L == 40.0);
  REQUIRE(s.data.bumps.size() == 2);
  CHECK(s.data.bumps[1].field == DataField::u);
  CHECK(s.data.bumps[1].center[0] == 1.0);
  std::ostringstream c1;
  print_config(c1, s);
  std::istringstream in2(c1.str());
  std::ostringstream c2;
  print_config(c2, load_config(in2));
  CHECK(c1.str() == c2.str());
}

TEST_CASE("config rejects unknown keys and bad values", "[config]") {
  auto load = [](const std::string& text) {
    std::istringstream in(text);
    return load_config(in);
  };
  CHECK_THROWS_AS(load("[grid]\nwidth = 3\n"), ConfigError);
  CHECK_THROWS_AS(load("[gird]\nn = 3\n"), ConfigError);
  CHECK_THROWS_AS(load("[grid]\nn = sixteen\n"), ConfigError);
  CHECK_THROWS_AS(load("[diagnostics]\ntheta = maybe\n"), ConfigError);
  CHECK_THROWS_AS(load("[coefficients]\npreset = other\n"), ConfigError);
  CHECK_THROWS_AS(load("[coefficients]\nA = 1 2 3\n"), ConfigError);
  CHECK_THROWS_AS(load("[data]\ncomponents = q 1 0 0 0 2\n"), ConfigError);
  CHECK_THROWS_WITH(load("[grid]\nwidth = 3\n"), Catch::Matchers::ContainsSubstring("grid.width"));
}

TEST_CASE("config validation rules", "[config]") {
  auto violated = [](RunConfig c, const std::string& needle) {
    CHECK_THROWS_WITH(c.validate(), Catch::Matchers::ContainsSubstring(needle));
  };
  RunConfig c = small_config();
  CHECK_NOTHROW(c.validate());
  RunConfig d = c;
  d.n = 15;
  violated(d, "grid.n");
  d = c;
  d.dt = 1.0;
  violated(d, "dt <= min(0.5, L/(4n))");
  d = c;
  d.t_max = 10.0;
  violated(d, "L >= box_factor*t_max");
  d.box_factor = 1.0;
  CHECK_NOTHROW(d.validate());
  d = c;
  d.sample_every = 0.3;
  violated(d, "not a multiple of dt");
  d = c;
  d.dim = 2;
  violated(d, "grid.dim");
  CHECK(c.snapshot_schedule() == std::vector<double>{1.0, 2.0});
  c.snapshot_times = {1.5};
  CHECK(c.snapshot_schedule() == std::vector<double>{1.0, 1.5, 2.0});
}

TEST_CASE("snapshot files round-trip and reject corruption", "[snapshot]") {
  const fs::path dir = scratch("snap");
  auto g = build_grid(3, 8, 10.0);
  ProfileState s;
  s.t = 1.25;
  s.V_wa.resize(g->size());
  s.V_kg.resize(g->size());
  for (std::size_t i = 0; i < g->size(); ++i) {
    s.V_wa[i] = Complex(std::sin(1.0 + i), 1.0 / (1.0 + i));
    s.V_kg[i] = Complex(std::exp(-0.01 * i), std::cos(3.0 * i));
  }
  ThetaField th;
  th.t = 1.25;
  th.p = 0.3;
  th.theta.resize(g->size());
  for (std::size_t i = 0; i < g->size(); ++i) th.theta[i] = std::sqrt(static_cast<double>(i)) / 7.0;

  const fs::path p = dir / "a.wkgs";
  write_snapshot(p, *g, s, &th);
  const Snapshot r = read_snapshot(p);
  CHECK(r.dim == 3);
  CHECK(r.n == 8);
  CHECK(r.L == 10.0);
  CHECK(r.state.t == 1.25);
  CHECK(r.state.V_wa == s.V_wa);
  CHECK(r.state.V_kg == s.V_kg);
  REQUIRE(r.theta.has_value());
  CHECK(r.theta->theta == th.theta);
  CHECK(r.theta->p == 0.3);
  CHECK_NOTHROW(require_same_grid(r, *g));
  CHECK_THROWS_AS(require_same_grid(r, *build_grid(3, 8, 12.0)), ConfigError);

  const fs::path q = dir / "b.wkgs";
  write_snapshot(q, *g, s);
  CHECK_FALSE(read_snapshot(q).theta.has_value());

  const std::string bytes = read_file(p);
  write_file(dir / "trunc.wkgs", bytes.substr(0, bytes.size() - 9));
  CHECK_THROWS_AS(read_snapshot(dir / "trunc.wkgs"), ConfigError);
  write_file(dir / "tail.wkgs", bytes + "x");
  CHECK_THROWS_AS(read_snapshot(dir / "tail.wkgs"), ConfigError);
  std::string bad = bytes;
  bad[0] = 'X';
  write_file(dir / "magic.wkgs", bad);
  CHECK_THROWS_AS(read_snapshot(dir / "magic.wkgs"), ConfigError);
  bad = bytes;
  bad[4] = 9;
  write_file(dir / "version.wkgs", bad);
  CHECK_THROWS_AS(read_snapshot(dir / "version.wkgs"), ConfigError);
  CHECK_THROWS_AS(read_snapshot(dir / "missing.wkgs"), ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("log fits and phase unwrapping", "[run]") {
  std::vector<double> t, y;
  for (int i = 0; i < 10; ++i) {
    t.push_back(2.0 + i);
    y.push_back(0.7 - 1.3 * std::log(t.back()));
  }
  const LogFit f = log_fit(t, y);
  CHECK(f.c == Approx(-1.3).epsilon(1e-12));
  CHECK(f.intercept == Approx(0.7).epsilon(1e-12));
  CHECK(f.residual < 1e-6);
  CHECK(f.samples == 10);
  CHECK_THROWS_AS(log_fit({1.0, 2.0}, {0.0, 0.0}), ConfigError);
  CHECK_THROWS_AS(log_fit({0.0, 1.0, 2.0}, {0.0, 0.0, 0.0}), ConfigError);

  const double pi = std::numbers::pi;
  std::vector<double> truth, wrapped;
  for (int i = 0; i < 50; ++i) {
    truth.push_back(-0.4 * i + 0.1);
    wrapped.push_back(std::remainder(truth.back(), 2.0 * pi));
  }
  const auto u = unwrap_phase(wrapped);
  for (std::size_t i = 0; i < u.size(); ++i) CHECK(u[i] - u[0] == Approx(truth[i] - truth[0]).margin(1e-12));
}

TEST_CASE("diagnostics CSV reads back", "[run]") {
  const fs::path dir = scratch("csv");
  DiagnosticsSeries s;
  s.append(0.5, {{"a", 1.0 / 3.0}, {"b,c", -2e-300}});
  s.append(1.5, {{"a", 7.0}, {"b,c", 1e300}});
  s.write_csv((dir / "d.csv").string());
  const DiagnosticsSeries r = read_diagnostics_csv(dir / "d.csv");
  CHECK(r.columns() == s.columns());
  CHECK(r.times() == s.times());
  CHECK(r.column("a") == s.column("a"));
  CHECK(r.column("b,c") == s.column("b,c"));
  write_file(dir / "ragged.csv", "t,a\r\n1,2,3\r\n");
  CHECK_THROWS_AS(read_diagnostics_csv(dir / "ragged.csv"), ConfigError);
  write_file(dir / "nohead.csv", "# only a comment\r\n");
  CHECK_THROWS_AS(read_diagnostics_csv(dir / "nohead.csv"), ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("simulation is deterministic and resumable", "[run]") {
  const RunConfig cfg = small_config();
  const fs::path d1 = scratch("run1"), d2 = scratch("run2"), d3 = scratch("run3");
  const auto a = run_simulation(cfg, {d1, std::nullopt});
  const auto b = run_simulation(cfg, {d2, std::nullopt});
  REQUIRE(a.series.size() == 5);
  CHECK(a.series.columns() == b.series.columns());
  for (const auto& col : a.series.columns()) CHECK(a.series.column(col) == b.series.column(col));
  CHECK(a.final_state.V_kg == b.final_state.V_kg);
  CHECK(fs::exists(d1 / "snapshot_t1.wkgs"));
  CHECK(fs::exists(d1 / "scattering.json"));
  CHECK(fs::exists(d1 / "config.ini"));
  const auto j = nlohmann::json::parse(read_file(d1 / "scattering.json"));
  CHECK(j["snapshot_times"].size() == 2);

  const auto c = run_simulation(cfg, {d3, d1 / "snapshot_t1.wkgs"});
  REQUIRE(c.series.size() == 3);
  CHECK(c.series.times().front() == 1.0);
  for (const auto& col : a.series.columns()) {
    const auto full = a.series.column(col), part = c.series.column(col);
    for (std::size_t i = 0; i < part.size(); ++i) CHECK(rel_diff(full[i + 2], part[i]) <= 1e-12);
  }
  for (std::size_t i = 0; i < a.final_state.V_kg.size(); ++i) {
    CHECK(std::abs(a.final_state.V_kg[i] - c.final_state.V_kg[i]) <= 1e-12 * (1.0 + std::abs(a.final_state.V_kg[i])));
  }

  RunConfig other = cfg;
  other.n = 18;
  CHECK_THROWS_AS(run_simulation(other, {d3, d1 / "snapshot_t1.wkgs"}), ConfigError);
  RunConfig no_theta = cfg;
  no_theta.theta = false;
  const fs::path d4 = scratch("run4");
  run_simulation(no_theta, {d4, std::nullopt});
  CHECK_THROWS_AS(run_simulation(cfg, {d3, d4 / "snapshot_t1.wkgs"}), ConfigError);
  for (const auto& d : {d1, d2, d3, d4}) fs::remove_all(d);
}

TEST_CASE("command-line exit codes and outputs", "[cli]") {
  const fs::path dir = scratch("cli");
  write_file(dir / "small.ini", kSmallIni);
  write_file(dir / "bad_key.ini", "[grid]\nwidth = 2\n");
  std::string rule = kSmallIni;
  rule.replace(rule.find("L = 40"), 6, "L = 20");
  write_file(dir / "bad_rule.ini", rule);
  write_file(dir / "reso.ini", "[resonance]\nb = 1 8\nsamples = 2000\n");
  const std::string cfg = "--config \"" + (dir / "small.ini").string() + "\" --out \"" + (dir / "o").string() + "\"";

  CHECK(run_cli("--help") == 0);
  CHECK(run_cli(cfg + " --print-config") == 0);
  CHECK(run_cli("--bogus") == 1);
  CHECK(run_cli("--config \"" + (dir / "bad_key.ini").string() + "\" simulate") == 1);
  CHECK(run_cli("--config \"" + (dir / "bad_rule.ini").string() + "\" simulate") == 1);
  CHECK(run_cli("--config \"" + (dir / "nonexistent.ini").string() + "\" simulate") == 1);

  CHECK(run_cli(cfg + " simulate") == 0);
  CHECK(fs::exists(dir / "o" / "diagnostics.csv"));
  CHECK(run_cli(cfg + " simulate --resume \"" + (dir / "o" / "snapshot_t1.wkgs").string() + "\"") == 0);
  CHECK(run_cli(cfg + " radial") == 0);
  CHECK(fs::exists(dir / "o" / "radial.json"));
  // Too few samples past t_lo for a decay fit.
  CHECK(run_cli(cfg + " report") == 1);
  CHECK(run_cli("--config \"" + (dir / "reso.ini").string() + "\" --seed 7 --out \"" + (dir / "r").string() +
                "\" resonance-check") == 0);
  const auto j = nlohmann::json::parse(read_file(dir / "r" / "resonance.json"));
  CHECK(j["seed"] == 7);
  CHECK(j["sweep"].size() == 2);
  fs::remove_all(dir);
}
