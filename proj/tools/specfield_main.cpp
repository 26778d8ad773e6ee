// Command line front end: simulate synthetic spectral datasets, invert them
// sequentially, report fit/recovery metrics, and run the numerical oracles.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "specfield/filter.hpp"
#include "specfield/invert_setup.hpp"
#include "specfield/oracles.hpp"
#include "specfield/report.hpp"
#include "specfield/simulate.hpp"

namespace fs = std::filesystem;
using namespace specfield;
using harness::ordered_json;

namespace {

ordered_json load_json(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) {
    throw config_error("cannot open config file " + file.string());
  }
  try {
    return ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw config_error("config file " + file.string() +
                       " is not valid JSON: " + e.what());
  }
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 std::optional<std::uint64_t> seed_override) {
  harness::SimConfig cfg = config_path.empty()
                               ? harness::default_scene_config()
                               : harness::sim_config_from_json(
                                     load_json(config_path));
  if (seed_override) {
    cfg.seed = *seed_override;
    cfg.seed_set = true;
  }
  const harness::Dataset ds = harness::simulate(cfg);
  harness::write_dataset(ds, out_dir);
  std::printf("wrote %zu windows x %d channels x %d frequencies to %s\n",
              ds.windows.size(), ds.manifest.layout.channels(),
              static_cast<int>(ds.manifest.freqs_hz.size()),
              out_dir.c_str());
  std::printf("seed %llu, domain %s, ground truth included\n",
              static_cast<unsigned long long>(cfg.seed),
              ds.manifest.domain.kind == field::DomainKind::rectangle
                  ? "rectangle"
                  : "interval");
  return 0;
}

int cmd_invert(const std::string& data_dir, const std::string& config_path,
               const std::string& out_dir, bool paper_literal) {
  const harness::Dataset ds = harness::read_dataset(data_dir);
  ordered_json overrides =
      config_path.empty() ? ordered_json::object() : load_json(config_path);
  if (paper_literal) {
    overrides["paper_literal_prediction"] = true;
  }
  harness::InvertSetup setup = harness::make_invert_setup(ds.manifest,
                                                          overrides);

  const filter::BeliefTrajectory traj =
      filter::run_filter(ds.windows, setup.init, setup.cfg);
  harness::write_results(traj, ds.manifest, setup.echo, out_dir);

  std::printf("%-8s %-12s %-6s %-10s %s\n", "window", "t", "iters", "EV",
              "converged");
  for (std::size_t k = 0; k < traj.windows.size(); ++k) {
    const auto& rec = traj.windows[k];
    std::printf("%-8zu %-12.3f %-6d %-10.6f %s%s\n", k, rec.t,
                rec.report.iterations, rec.report.explained_variance,
                rec.report.converged ? "yes" : "no",
                rec.report.covariance_regularized ? " (regularized)" : "");
  }
  std::printf("results written to %s\n", out_dir.c_str());
  return 0;
}

int cmd_report(const std::string& results_dir, const std::string& data_dir,
               const std::string& out_dir, int grid_nx, int grid_ny) {
  const harness::Dataset ds = harness::read_dataset(data_dir);
  const harness::ResultsBundle bundle = harness::read_results(results_dir);
  const harness::ReportSummary s =
      harness::report(bundle, ds, out_dir, grid_nx, grid_ny);

  std::printf("windows: %d  channels: %d\n", s.windows, s.channels);
  std::printf("total explained variance: %.6f\n",
              s.total_explained_variance);
  if (s.field_correlation) {
    std::printf("field recovery correlation: %.4f\n", *s.field_correlation);
  }
  if (s.hotspot_agreement) {
    std::printf("hotspot agreement: %.2f\n", *s.hotspot_agreement);
  }
  std::printf("summary and maps written to %s\n", out_dir.c_str());
  return 0;
}

int cmd_oracle_heat(const std::string& kase, double dx, double dt, double t,
                    int modes) {
  field::DomainSpec dom;
  dom.kind = field::DomainKind::interval;
  dom.Lx = 1.0;
  dom.alpha = 1.0;

  field::BoundaryDrive drive;
  double tol = 1e-3;
  bool relative = true;
  if (kase == "single-mode") {
    drive.phi0 = [](double) { return 0.0; };
    drive.phi1 = [](double) { return 0.0; };
    drive.f0 = [](double x) { return std::sin(M_PI * x); };
    tol = 1e-4;
    relative = false;
  } else if (kase == "constant") {
    drive.phi0 = [](double) { return 1.0; };
    drive.phi1 = [](double) { return 1.0; };
    drive.f0 = [](double) { return 1.0; };
    tol = 1e-10;
    relative = false;
  } else if (kase == "boundary-driven") {
    drive.phi0 = [](double tt) { return std::sin(tt); };
    drive.phi1 = [](double) { return 0.0; };
    drive.f0 = [](double) { return 0.0; };
  } else {
    throw config_error("unknown heat oracle case '" + kase + "'");
  }

  const auto fd = harness::fd_heat_oracle(dom, drive, dx, dt, t);
  const auto series = field::solve_heat_timedep(
      dom, drive, field::build_basis(dom, modes), t,
      static_cast<int>(fd.x.size()));

  double err = 0.0;
  if (relative) {
    err = (series.u - fd.u).norm() / fd.u.norm();
    std::printf("case %s at t=%g: relative L2 error %.3e (tolerance %.0e)\n",
                kase.c_str(), t, err, tol);
  } else {
    err = (series.u - fd.u).cwiseAbs().maxCoeff();
    std::printf("case %s at t=%g: max abs error %.3e (tolerance %.0e)\n",
                kase.c_str(), t, err, tol);
  }
  if (!(err < tol)) {
    throw numeric_error("heat oracle disagreement above tolerance");
  }
  std::printf("series solution and Crank-Nicolson oracle agree\n");
  return 0;
}

int cmd_oracle_spectrum(double seconds, double dt, double segment,
                        std::uint64_t seed) {
  Vec freqs(60);
  for (int i = 0; i < 60; ++i) {
    freqs[i] = 1.0 + i;
  }
  const auto res = harness::spectrum_oracle(cmc::CmcParams{}, 0.0, freqs,
                                            seconds, dt, segment, seed);
  std::printf("peak at %.0f Hz: analytic %.6e, periodogram %.6e, "
              "rel error %.3f (tolerance 0.10)\n",
              res.peak_freq_hz, res.analytic[0], res.periodogram[0],
              res.peak_rel_error);
  if (!(res.peak_rel_error <= 0.10)) {
    throw numeric_error("spectrum oracle disagreement above tolerance");
  }
  std::printf("analytic transfer spectrum and time-domain periodogram agree\n");
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatiotemporal excitability estimation from windowed power "
               "spectra"};
  app.require_subcommand(1);
  app.fallthrough(); // allow the global --seed after a subcommand name

  std::optional<std::uint64_t> seed;
  app.add_option("--seed", seed, "Override the simulation seed");

  auto* sim = app.add_subcommand("simulate", "Generate a synthetic dataset");
  std::string sim_config, sim_out;
  sim->add_option("--config", sim_config, "Simulation config JSON")
      ->check(CLI::ExistingFile);
  sim->add_option("--out", sim_out, "Output dataset directory")->required();

  auto* inv = app.add_subcommand("invert", "Sequentially invert a dataset");
  std::string inv_data, inv_config, inv_out;
  bool paper_literal = false;
  inv->add_option("--data", inv_data, "Dataset directory")->required();
  inv->add_option("--config", inv_config, "Inversion config JSON")
      ->check(CLI::ExistingFile);
  inv->add_option("--out", inv_out, "Output results directory")->required();
  inv->add_flag("--paper-literal-prediction", paper_literal,
                "Propagate beliefs with the undecayed posterior covariance");

  auto* rep = app.add_subcommand("report", "Summarize results against data");
  std::string rep_results, rep_data, rep_out;
  int grid_nx = 0, grid_ny = 0;
  rep->add_option("--results", rep_results, "Results directory")->required();
  rep->add_option("--data", rep_data, "Dataset directory")->required();
  rep->add_option("--out", rep_out, "Report output directory")->required();
  rep->add_option("--grid-nx", grid_nx, "Field map grid width");
  rep->add_option("--grid-ny", grid_ny, "Field map grid height");

  auto* oracle = app.add_subcommand("oracle", "Run an independent oracle");
  oracle->require_subcommand(1);

  auto* heat = oracle->add_subcommand("heat",
                                      "Series solver vs Crank-Nicolson");
  std::string heat_case = "boundary-driven";
  double heat_dx = 1.0 / 512, heat_dt = 1e-4, heat_t = 2.0;
  int heat_modes = 64;
  heat->add_option("--case", heat_case,
                   "single-mode | constant | boundary-driven");
  heat->add_option("--dx", heat_dx, "Oracle grid spacing");
  heat->add_option("--dt", heat_dt, "Oracle time step");
  heat->add_option("--t", heat_t, "Solve time");
  heat->add_option("--modes", heat_modes, "Series mode count");

  auto* spec = oracle->add_subcommand(
      "spectrum", "Analytic spectrum vs time-domain periodogram");
  double spec_seconds = 400.0, spec_dt = 1e-4, spec_segment = 2.0;
  std::uint64_t spec_seed = 20240811;
  spec->add_option("--seconds", spec_seconds, "Simulation length");
  spec->add_option("--dt", spec_dt, "Euler-Maruyama step");
  spec->add_option("--segment", spec_segment, "Welch segment length");
  spec->add_option("--oracle-seed", spec_seed, "Noise seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (sim->parsed()) {
      return cmd_simulate(sim_config, sim_out, seed);
    }
    if (inv->parsed()) {
      return cmd_invert(inv_data, inv_config, inv_out, paper_literal);
    }
    if (rep->parsed()) {
      return cmd_report(rep_results, rep_data, rep_out, grid_nx, grid_ny);
    }
    if (oracle->parsed()) {
      if (heat->parsed()) {
        return cmd_oracle_heat(heat_case, heat_dx, heat_dt, heat_t,
                               heat_modes);
      }
      return cmd_oracle_spectrum(spec_seconds, spec_dt, spec_segment,
                                 spec_seed);
    }
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return config_error::exit_code;
  } catch (const format_error& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return format_error::exit_code;
  } catch (const numeric_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return numeric_error::exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
