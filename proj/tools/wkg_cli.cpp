// Command-line front end: simulate, radial, decay-linear, resonance-check, report.
//
// Exit codes: 0 success, 1 configuration error, 2 numerical abort or failed check.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <omp.h>

#include <CLI11.hpp>

#include "wkg/config.hpp"
#include "wkg/errors.hpp"
#include "wkg/run.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;

int run(int argc, char** argv) {
  CLI::App app{"wave / Klein-Gordon simulation harness"};
  app.require_subcommand(0, 1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> threads;
  bool print = false;
  app.add_option("--config", config_path, "INI configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "random seed (overrides run.seed)");
  app.add_option("--out", out, "output directory (overrides run.out)");
  app.add_option("--threads", threads, "OpenMP threads, 0 = runtime default (overrides run.threads)");
  app.add_flag("--print-config", print, "print the effective configuration and exit");

  auto* sim = app.add_subcommand("simulate", "3D profile evolution with diagnostics, phase and snapshots");
  std::string resume;
  sim->add_option("--resume", resume, "continue from a snapshot file")->check(CLI::ExistingFile);
  auto* radial = app.add_subcommand("radial", "radial model and light-cone series");
  auto* decay = app.add_subcommand("decay-linear", "linear sup-norm decay exponents");
  auto* reso = app.add_subcommand("resonance-check", "sampled resonance-phase lower bounds");
  auto* report = app.add_subcommand("report", "decay fits over a finished run's diagnostics");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  wkg::RunConfig cfg = config_path.empty() ? wkg::RunConfig{} : wkg::load_config_file(config_path);
  if (seed) cfg.seed = *seed;
  if (!out.empty()) cfg.out = out;
  if (threads) cfg.threads = *threads;
  if (cfg.threads < 0) throw wkg::ConfigError("rule run.threads >= 0 violated");
  if (cfg.threads > 0) omp_set_num_threads(cfg.threads);

  if (print) {
    wkg::print_config(std::cout, cfg);
    return 0;
  }
  const wkg::fs::path dir = cfg.out;

  if (sim->parsed()) {
    wkg::SimulationOptions opt;
    opt.out_dir = dir;
    if (!resume.empty()) opt.resume = resume;
    const auto res = wkg::run_simulation(cfg, opt);
    std::cout << "simulate: " << res.series.size() << " samples to t = " << res.final_state.t << ", "
              << res.snapshots.size() << " snapshots, output in " << dir.string() << "\n";
    return 0;
  }
  if (radial->parsed()) {
    const auto r = wkg::run_radial(cfg.radial, dir);
    std::cout << "radial: light_cone_min over t >= 5 in [" << r.lc_min << ", " << r.lc_max
              << "], kg energy drift " << r.energy_drift << "\n";
    return 0;
  }
  if (decay->parsed()) {
    const auto r = wkg::run_decay_linear(cfg.decay, dir);
    std::cout << "decay-linear: kg exponent " << r.kg.fit.exponent << " +- " << r.kg.fit.stderr_ << ", wave exponent "
              << r.wa.fit.exponent << " +- " << r.wa.fit.stderr_ << "\n";
    return 0;
  }
  if (reso->parsed()) {
    const auto s = wkg::run_resonance(cfg.resonance, cfg.seed, dir);
    for (std::size_t i = 0; i < s.b.size(); ++i)
      std::cout << "resonance-check: b = " << s.b[i] << ", " << s.reports[i].checks << " checks, "
                << s.reports[i].total() << " violations\n";
    return s.total_violations() == 0 ? 0 : kExitNumerical;
  }
  if (report->parsed()) {
    for (const auto& e : wkg::run_report(cfg.report, dir))
      std::cout << "report: " << e.column << " exponent " << e.fit.exponent << " +- " << e.fit.stderr_ << " over ["
                << e.fit.t_lo << ", " << e.fit.t_hi << "], " << e.fit.samples << " samples\n";
    return 0;
  }
  std::cout << app.help();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const wkg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const wkg::NumericalError& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}
