#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "specfield/oracles.hpp"
#include "specfield/report.hpp"
#include "specfield/simulate.hpp"

using namespace specfield;
using namespace specfield::harness;

namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("specfield_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool dirs_equal(const fs::path& a, const fs::path& b) {
  std::vector<fs::path> rel;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (e.is_regular_file()) {
      rel.push_back(fs::relative(e.path(), a));
    }
  }
  std::sort(rel.begin(), rel.end());
  for (const auto& r : rel) {
    if (!fs::exists(b / r)) {
      return false;
    }
    if (slurp(a / r) != slurp(b / r)) {
      return false;
    }
  }
  std::size_t count_b = 0;
  for (const auto& e : fs::recursive_directory_iterator(b)) {
    if (e.is_regular_file()) {
      ++count_b;
    }
  }
  return count_b == rel.size();
}

SimConfig tiny_scene() {
  SimConfig cfg = default_scene_config();
  cfg.rows = 2;
  cfg.cols = 3;
  cfg.n_windows = 3;
  cfg.n_modes_per_axis = 2;
  cfg.f_stop = 12.0; // 12 frequencies
  return cfg;
}

} // namespace

TEST_CASE("simulate: same seed means identical datasets") {
  const auto cfg = tiny_scene();
  const auto a = simulate(cfg);
  const auto b = simulate(cfg);
  REQUIRE(a.windows.size() == b.windows.size());
  for (std::size_t k = 0; k < a.windows.size(); ++k) {
    CHECK((a.windows[k].power - b.windows[k].power).cwiseAbs().maxCoeff() ==
          0.0);
  }
  auto c = cfg;
  c.seed = cfg.seed + 1;
  const auto other = simulate(c);
  CHECK((a.windows[0].power - other.windows[0].power).cwiseAbs().maxCoeff() >
        0.0);
}

TEST_CASE("simulate: deterministic pipeline with all noise off") {
  auto cfg = tiny_scene();
  cfg.obs_log10_sd = 0.0;
  cfg.mode_noise_var = 0.0;
  cfg.g7_white_var = 0.0;

  // constant field: identical coefficient rows
  const auto geo = build_geometry(cfg);
  const auto basis = field::build_basis(geo.domain, cfg.n_modes_per_axis);
  CoeffScenario cs;
  cs.coeffs = Mat::Zero(cfg.n_windows, basis.size());
  cs.coeffs.col(0).setConstant(0.4);
  cfg.scenario = cs;

  const auto ds = simulate(cfg);
  for (std::size_t k = 1; k < ds.windows.size(); ++k) {
    CHECK((ds.windows[k].power - ds.windows[0].power).cwiseAbs().maxCoeff() ==
          0.0);
  }
}

TEST_CASE("simulate: electrodes sit strictly inside the domain") {
  const auto cfg = tiny_scene();
  const auto geo = build_geometry(cfg);
  for (const auto& p : geo.layout.positions) {
    CHECK(p.x > 0.0);
    CHECK(p.x < geo.domain.Lx);
    CHECK(p.y > 0.0);
    CHECK(p.y < geo.domain.Ly);
  }
  // margin is 20% of the bounding box on each side
  CHECK(geo.domain.Lx ==
        doctest::Approx(1.4 * (cfg.cols - 1) * cfg.spacing).epsilon(1e-12));
}

TEST_CASE("simulate: config validation") {
  SimConfig cfg; // seed not set
  CHECK_THROWS_AS(simulate(cfg), config_error);
  auto c2 = tiny_scene();
  c2.rows = 1;
  c2.cols = 1;
  CHECK_THROWS_AS(simulate(c2), config_error);
  auto c3 = tiny_scene();
  c3.f_step = -1.0;
  CHECK_THROWS_AS(simulate(c3), config_error);
  auto c4 = tiny_scene();
  c4.scenario = Boundary1dScenario{};
  CHECK_THROWS_AS(simulate(c4), config_error); // needs a 1D array
}

TEST_CASE("sim config JSON round trip") {
  auto cfg = tiny_scene();
  cfg.alpha = 0.07;
  cfg.obs_log10_sd = 0.03;
  BumpScenario b;
  b.center_rx = 0.4;
  b.amp_peak = 0.9;
  cfg.scenario = b;

  const auto j = sim_config_to_json(cfg);
  const auto back = sim_config_from_json(j);
  CHECK(back.seed == cfg.seed);
  CHECK(back.alpha == cfg.alpha);
  CHECK(back.obs_log10_sd == cfg.obs_log10_sd);
  CHECK(std::get<BumpScenario>(back.scenario).center_rx == 0.4);
  CHECK(std::get<BumpScenario>(back.scenario).amp_peak == 0.9);

  CHECK_THROWS_AS(sim_config_from_json(ordered_json::object()), config_error);
}

TEST_CASE("dataset round trip is byte identical") {
  const auto cfg = tiny_scene();
  const auto ds = simulate(cfg);

  const auto dir1 = fresh_dir("ds1");
  const auto dir2 = fresh_dir("ds2");
  write_dataset(ds, dir1);
  const auto loaded = read_dataset(dir1);
  write_dataset(loaded, dir2);
  CHECK(dirs_equal(dir1, dir2));
  fs::remove_all(dir1);
  fs::remove_all(dir2);
}

TEST_CASE("unknown manifest versions are rejected") {
  const auto cfg = tiny_scene();
  const auto ds = simulate(cfg);
  const auto dir = fresh_dir("dsver");
  write_dataset(ds, dir);

  std::string manifest = slurp(dir / "manifest.json");
  const auto pos = manifest.find("\"format_version\": 1");
  REQUIRE(pos != std::string::npos);
  manifest.replace(pos, std::string("\"format_version\": 1").size(),
                   "\"format_version\": 99");
  std::ofstream(dir / "manifest.json", std::ios::binary) << manifest;

  CHECK_THROWS_AS(read_dataset(dir), format_error);
  fs::remove_all(dir);
}

TEST_CASE("finite-difference heat oracle: constant and single-mode cases") {
  field::DomainSpec dom;
  dom.kind = field::DomainKind::interval;
  dom.Lx = 1.0;
  dom.alpha = 1.0;

  field::BoundaryDrive ones;
  ones.phi0 = [](double) { return 1.0; };
  ones.phi1 = [](double) { return 1.0; };
  ones.f0 = [](double) { return 1.0; };
  const auto flat = fd_heat_oracle(dom, ones, 1.0 / 64, 1e-3, 0.5);
  CHECK((flat.u.array() - 1.0).abs().maxCoeff() < 1e-12);

  field::BoundaryDrive mode;
  mode.phi0 = [](double) { return 0.0; };
  mode.phi1 = [](double) { return 0.0; };
  mode.f0 = [](double x) { return std::sin(M_PI * x); };
  const double t = 0.1;
  const auto sol = fd_heat_oracle(dom, mode, 1.0 / 512, 1e-4, t);
  double max_err = 0.0;
  for (Eigen::Index i = 0; i < sol.x.size(); ++i) {
    const double exact = std::exp(-M_PI * M_PI * t) * std::sin(M_PI * sol.x[i]);
    max_err = std::max(max_err, std::abs(sol.u[i] - exact));
  }
  CHECK(max_err < 1e-5);
}

TEST_CASE("finite-difference oracle agrees with the series solver") {
  field::DomainSpec dom;
  dom.kind = field::DomainKind::interval;
  dom.Lx = 1.0;
  dom.alpha = 1.0;

  field::BoundaryDrive drive;
  drive.phi0 = [](double t) { return std::sin(t); };
  drive.phi1 = [](double) { return 0.0; };
  drive.f0 = [](double) { return 0.0; };

  const double t = 0.5;
  const auto fd = fd_heat_oracle(dom, drive, 1.0 / 256, 2e-4, t);
  const auto basis = field::build_basis(dom, 48);
  const auto series = field::solve_heat_timedep(dom, drive, basis, t,
                                                static_cast<int>(fd.x.size()));
  const double rel = (series.u - fd.u).norm() / fd.u.norm();
  CHECK(rel < 1e-3);
}

TEST_CASE("fd oracle input validation") {
  field::DomainSpec rect;
  rect.kind = field::DomainKind::rectangle;
  rect.Lx = rect.Ly = 1.0;
  field::BoundaryDrive d;
  d.phi0 = [](double) { return 0.0; };
  d.phi1 = [](double) { return 0.0; };
  d.f0 = [](double) { return 0.0; };
  CHECK_THROWS_AS(fd_heat_oracle(rect, d, 0.01, 0.001, 1.0), config_error);
  field::DomainSpec dom;
  dom.Lx = 1.0;
  CHECK_THROWS_AS(fd_heat_oracle(dom, d, -0.01, 0.001, 1.0), config_error);
}

TEST_CASE("report: perfect predictions give explained variance 1") {
  auto cfg = tiny_scene();
  cfg.obs_log10_sd = 0.0;
  cfg.mode_noise_var = 0.0;
  cfg.g7_white_var = 0.0;
  const auto ds = simulate(cfg);
  const auto basis = field::build_basis(ds.manifest.domain,
                                        ds.manifest.n_modes_per_axis);

  // hand-build a results bundle whose predictions are the observations and
  // whose posterior means are the truth coefficients
  filter::BeliefTrajectory traj;
  for (std::size_t k = 0; k < ds.windows.size(); ++k) {
    filter::WindowRecord rec;
    rec.t = ds.windows[k].t;
    rec.prior.mean = Vec::Zero(basis.size() + 1);
    rec.prior.cov = Mat::Identity(basis.size() + 1, basis.size() + 1);
    rec.report.posterior.mean = Vec::Zero(basis.size() + 1);
    rec.report.posterior.mean.head(basis.size()) =
        ds.truth->coeffs.row(static_cast<Eigen::Index>(k)).transpose();
    rec.report.posterior.cov = rec.prior.cov;
    rec.report.predicted_log10 =
        ds.windows[k].power.array().log10().matrix();
    rec.report.explained_variance = 1.0;
    rec.report.converged = true;
    rec.report.fe_trace = {0.0};
    traj.windows.push_back(std::move(rec));
  }

  const auto rdir = fresh_dir("results_perfect");
  write_results(traj, ds.manifest, {}, rdir);
  const auto bundle = read_results(rdir);

  const auto odir = fresh_dir("report_perfect");
  const auto summary = report(bundle, ds, odir);
  CHECK(summary.total_explained_variance == doctest::Approx(1.0).epsilon(1e-12));
  for (const double ev : summary.per_window_ev) {
    CHECK(ev == doctest::Approx(1.0).epsilon(1e-12));
  }
  REQUIRE(summary.field_correlation.has_value());
  CHECK(*summary.field_correlation > 0.999);
  REQUIRE(summary.hotspot_agreement.has_value());
  CHECK(*summary.hotspot_agreement == 1.0);
  CHECK(fs::exists(odir / "summary.json"));
  CHECK(fs::exists(odir / "maps" / "estimate_000.csv"));
  CHECK(fs::exists(odir / "maps" / "estimate_000.svg"));
  CHECK(fs::exists(odir / "maps" / "truth_000.svg"));
  fs::remove_all(rdir);
  fs::remove_all(odir);
}

TEST_CASE("report: missing ground truth omits recovery metrics") {
  auto cfg = tiny_scene();
  auto ds = simulate(cfg);
  ds.truth.reset();
  ds.manifest.has_ground_truth = false;

  const auto basis = field::build_basis(ds.manifest.domain,
                                        ds.manifest.n_modes_per_axis);
  filter::BeliefTrajectory traj;
  for (std::size_t k = 0; k < ds.windows.size(); ++k) {
    filter::WindowRecord rec;
    rec.t = ds.windows[k].t;
    rec.prior.mean = Vec::Zero(basis.size() + 1);
    rec.prior.cov = Mat::Identity(basis.size() + 1, basis.size() + 1);
    rec.report.posterior = rec.prior;
    rec.report.predicted_log10 = ds.windows[k].power.array().log10().matrix();
    rec.report.fe_trace = {0.0};
    traj.windows.push_back(std::move(rec));
  }

  const auto rdir = fresh_dir("results_nt");
  write_results(traj, ds.manifest, {}, rdir);
  const auto odir = fresh_dir("report_nt");
  const auto summary = report(read_results(rdir), ds, odir);
  CHECK_FALSE(summary.field_correlation.has_value());
  CHECK_FALSE(summary.hotspot_agreement.has_value());
  const std::string sj = slurp(odir / "summary.json");
  CHECK(sj.find("field_correlation") == std::string::npos);
  fs::remove_all(rdir);
  fs::remove_all(odir);
}

TEST_CASE("report rejects results from a different dataset") {
  const auto cfg = tiny_scene();
  const auto ds = simulate(cfg);
  auto other_cfg = cfg;
  other_cfg.seed += 17;
  const auto other = simulate(other_cfg);

  const auto basis = field::build_basis(ds.manifest.domain,
                                        ds.manifest.n_modes_per_axis);
  filter::BeliefTrajectory traj;
  for (std::size_t k = 0; k < ds.windows.size(); ++k) {
    filter::WindowRecord rec;
    rec.t = ds.windows[k].t;
    rec.prior.mean = Vec::Zero(basis.size() + 1);
    rec.prior.cov = Mat::Identity(basis.size() + 1, basis.size() + 1);
    rec.report.posterior = rec.prior;
    rec.report.predicted_log10 = ds.windows[k].power.array().log10().matrix();
    rec.report.fe_trace = {0.0};
    traj.windows.push_back(std::move(rec));
  }
  const auto rdir = fresh_dir("results_mismatch");
  write_results(traj, ds.manifest, {}, rdir);
  const auto odir = fresh_dir("report_mismatch");
  CHECK_THROWS_AS(report(read_results(rdir), other, odir), format_error);
  fs::remove_all(rdir);
  fs::remove_all(odir);
}

TEST_CASE("SVG output is deterministic") {
  Mat m(3, 4);
  m << 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12;
  const auto dir = fresh_dir("svg");
  write_heatmap_svg(dir / "a.svg", m, 1.0, 12.0, "map");
  write_heatmap_svg(dir / "b.svg", m, 1.0, 12.0, "map");
  CHECK(slurp(dir / "a.svg") == slurp(dir / "b.svg"));
  CHECK(slurp(dir / "a.svg").find("min=1 max=12") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("boundary-driven 1D scene produces in-model ground truth") {
  SimConfig cfg = default_scene_config();
  cfg.rows = 1;
  cfg.cols = 6;
  cfg.n_windows = 2;
  cfg.n_modes_per_axis = 8;
  cfg.f_stop = 8.0;
  cfg.alpha = 0.3;
  Boundary1dScenario sc;
  sc.phi0.amplitude = 0.5;
  sc.phi0.period = 8.0;
  cfg.scenario = sc;

  const auto ds = simulate(cfg);
  REQUIRE(ds.truth.has_value());
  CHECK(ds.truth->coeffs.size() == 0); // no coefficient truth for this scene
  CHECK(ds.truth->field_at_electrodes.rows() == 2);
  CHECK(ds.truth->field_at_electrodes.allFinite());
  CHECK(ds.manifest.domain.kind == field::DomainKind::interval);
}
