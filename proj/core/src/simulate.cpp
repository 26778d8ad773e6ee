#include "specfield/simulate.hpp"

#include <cmath>

#include "specfield/rng.hpp"

namespace specfield::harness {

double SinusoidBoundary::operator()(double t) const {
  return offset + amplitude * std::sin(2.0 * M_PI * t / period + phase);
}

void SimConfig::validate() const {
  if (!seed_set) {
    throw config_error("simulation seed is mandatory");
  }
  if (rows < 1 || cols < 1 || rows * cols < 2) {
    throw config_error("electrode grid needs at least two channels");
  }
  if (!(spacing > 0.0)) {
    throw config_error("electrode spacing must be > 0");
  }
  if (!(margin_factor > 0.0)) {
    throw config_error("margin factor must be > 0");
  }
  if (alpha < 0.0) {
    throw config_error("alpha must be >= 0");
  }
  if (n_modes_per_axis < 1) {
    throw config_error("need at least one mode per axis");
  }
  if (n_windows < 1 || !(dt_window > 0.0)) {
    throw config_error("need at least one window with positive spacing");
  }
  if (!(f_start > 0.0) || f_stop < f_start || !(f_step > 0.0)) {
    throw config_error("invalid frequency grid");
  }
  if (obs_log10_sd < 0.0 || mode_noise_var < 0.0 || g7_white_var < 0.0) {
    throw config_error("noise levels must be >= 0");
  }
  if (spectral_averages < 1) {
    throw config_error("spectral_averages must be >= 1");
  }
  cmc_params.validate();
  if (const auto* c = std::get_if<CoeffScenario>(&scenario)) {
    if (c->coeffs.rows() != n_windows) {
      throw config_error("coefficient scenario rows must equal window count");
    }
  }
  if (const auto* b = std::get_if<BumpScenario>(&scenario)) {
    if (!(b->width_rel > 0.0) || b->rise_fraction <= 0.0 ||
        b->rise_fraction >= 1.0) {
      throw config_error("bump scenario width/rise_fraction out of range");
    }
  }
  if (std::holds_alternative<Boundary1dScenario>(scenario) && rows != 1 &&
      cols != 1) {
    throw config_error("boundary-driven scenario needs a 1D electrode array");
  }
}

SimConfig default_scene_config() {
  SimConfig cfg;
  cfg.seed = 424242;
  cfg.seed_set = true;
  return cfg;
}

SceneGeometry build_geometry(const SimConfig& cfg) {
  SceneGeometry geo;
  // Normalize single-row/column arrays to an interval along x.
  const bool is_1d = cfg.rows == 1 || cfg.cols == 1;
  const int nx = is_1d ? std::max(cfg.rows, cfg.cols) : cfg.cols;
  const int ny = is_1d ? 1 : cfg.rows;

  const double bbox_x = (nx - 1) * cfg.spacing;
  const double bbox_y = (ny - 1) * cfg.spacing;
  const double margin_x = cfg.margin_factor * std::max(bbox_x, cfg.spacing);
  const double margin_y = cfg.margin_factor * std::max(bbox_y, cfg.spacing);

  geo.domain.alpha = cfg.alpha;
  geo.domain.Lx = bbox_x + 2.0 * margin_x;
  if (is_1d) {
    geo.domain.kind = field::DomainKind::interval;
    geo.domain.Ly = 1.0;
  } else {
    geo.domain.kind = field::DomainKind::rectangle;
    geo.domain.Ly = bbox_y + 2.0 * margin_y;
  }

  geo.layout.rows = ny;
  geo.layout.cols = nx;
  geo.layout.spacing = cfg.spacing;
  for (int r = 0; r < ny; ++r) {
    for (int c = 0; c < nx; ++c) {
      field::Point p;
      p.x = margin_x + c * cfg.spacing;
      p.y = is_1d ? 0.0 : margin_y + r * cfg.spacing;
      geo.layout.positions.push_back(p);
    }
  }
  return geo;
}

namespace {

Vec amplitude_schedule(const BumpScenario& b, int n_windows) {
  Vec a(n_windows);
  if (n_windows == 1) {
    a[0] = b.amp_peak;
    return a;
  }
  const int k_peak = std::max(
      1, std::min(n_windows - 1,
                  static_cast<int>(std::lround(b.rise_fraction *
                                               (n_windows - 1)))));
  for (int k = 0; k < n_windows; ++k) {
    if (k <= k_peak) {
      a[k] = b.amp_floor +
             (b.amp_peak - b.amp_floor) * static_cast<double>(k) / k_peak;
    } else {
      a[k] = b.amp_peak + (b.amp_end - b.amp_peak) *
                              static_cast<double>(k - k_peak) /
                              (n_windows - 1 - k_peak);
    }
  }
  return a;
}

} // namespace

Dataset simulate(const SimConfig& cfg) {
  cfg.validate();

  const SceneGeometry geo = build_geometry(cfg);
  const field::EigenBasis basis =
      field::build_basis(geo.domain, cfg.n_modes_per_axis);
  const int n_modes = basis.size();
  const int n_channels = geo.layout.channels();
  const int K = cfg.n_windows;

  Vec freqs(static_cast<Eigen::Index>(
      std::floor((cfg.f_stop - cfg.f_start) / cfg.f_step + 1e-9)) + 1);
  for (Eigen::Index i = 0; i < freqs.size(); ++i) {
    freqs[i] = cfg.f_start + static_cast<double>(i) * cfg.f_step;
  }

  std::vector<double> times(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    times[static_cast<std::size_t>(k)] = (k + 0.5) * cfg.dt_window;
  }

  GaussianRng rng(cfg.seed);

  // Ground-truth trajectory. Coefficient scenes follow the designed mean
  // plus an exponentially propagated per-mode noise term; the boundary
  // scene is the deterministic solve.
  Mat coeffs;          // K x n_modes (empty for boundary scene)
  Mat truth_elec(K, n_channels);
  const Mat phi_elec = field::basis_matrix(basis, geo.layout.positions);

  if (const auto* bnd = std::get_if<Boundary1dScenario>(&cfg.scenario)) {
    field::BoundaryDrive drive;
    drive.phi0 = [b = bnd->phi0](double t) { return b(t); };
    drive.phi1 = [b = bnd->phi1](double t) { return b(t); };
    drive.f0 = [](double) { return 0.0; };
    for (int k = 0; k < K; ++k) {
      const field::HeatSolution sol = field::solve_heat_timedep(
          geo.domain, drive, basis, times[static_cast<std::size_t>(k)]);
      // sample the solution at electrode x positions by linear interpolation
      for (int ch = 0; ch < n_channels; ++ch) {
        const double x = geo.layout.positions[static_cast<std::size_t>(ch)].x;
        const double fi = x / geo.domain.Lx * (sol.x.size() - 1);
        const auto i0 = static_cast<Eigen::Index>(std::floor(fi));
        const Eigen::Index i1 = std::min(i0 + 1, sol.x.size() - 1);
        const double w = fi - static_cast<double>(i0);
        truth_elec(k, ch) = (1.0 - w) * sol.u[i0] + w * sol.u[i1];
      }
    }
  } else {
    Mat mean_coeffs(K, n_modes);
    if (const auto* cs = std::get_if<CoeffScenario>(&cfg.scenario)) {
      if (cs->coeffs.cols() != n_modes) {
        throw config_error("coefficient scenario mode count must be " +
                           std::to_string(n_modes));
      }
      mean_coeffs = cs->coeffs;
    } else {
      const auto& b = std::get<BumpScenario>(cfg.scenario);
      const double cx = b.center_rx * geo.domain.Lx;
      const double cy = b.center_ry * geo.domain.Ly;
      const double sd =
          b.width_rel * (geo.domain.kind == field::DomainKind::rectangle
                             ? std::min(geo.domain.Lx, geo.domain.Ly)
                             : geo.domain.Lx);
      const field::FieldCoeffs shape = field::project_initial(
          [&](field::Point p) {
            const double dx = p.x - cx;
            const double dy = geo.domain.kind == field::DomainKind::rectangle
                                  ? p.y - cy
                                  : 0.0;
            return std::exp(-(dx * dx + dy * dy) / (2.0 * sd * sd));
          },
          basis);
      const Vec amps = amplitude_schedule(b, K);
      for (int k = 0; k < K; ++k) {
        mean_coeffs.row(k) = amps[k] * shape.c.transpose();
      }
    }

    // AR(1) noise on top of the designed mean: n_k = D n_{k-1} + q_k.
    const Vec lam = basis.decay_rates();
    const double q_sd = std::sqrt(cfg.mode_noise_var);
    Vec noise = Vec::Zero(n_modes);
    coeffs.resize(K, n_modes);
    for (int k = 0; k < K; ++k) {
      for (int i = 0; i < n_modes; ++i) {
        const double decay = std::exp(-lam[i] * cfg.dt_window);
        noise[i] = (k == 0 ? 0.0 : decay * noise[i]) + q_sd * rng.normal();
      }
      coeffs.row(k) = mean_coeffs.row(k) + noise.transpose();
    }
    truth_elec = coeffs * phi_elec.transpose();
  }

  // g7 log-offset white-noise sequence
  Vec g7(K);
  const double g7_sd = std::sqrt(cfg.g7_white_var);
  for (int k = 0; k < K; ++k) {
    g7[k] = g7_sd * rng.normal();
  }

  // Observed windows: analytic spectra plus log-domain noise.
  const double eff_sd =
      cfg.obs_log10_sd / std::sqrt(static_cast<double>(cfg.spectral_averages));
  Dataset ds;
  for (int k = 0; k < K; ++k) {
    SpectralWindow w;
    w.t = times[static_cast<std::size_t>(k)];
    w.positions = geo.layout.positions;
    const cmc::ForwardResult fwd = cmc::forward_model(
        cfg.cmc_params, truth_elec.row(k).transpose(), g7[k], freqs);
    w.power.resize(n_channels, freqs.size());
    for (int ch = 0; ch < n_channels; ++ch) {
      const Vec& p = fwd.channels[static_cast<std::size_t>(ch)].power;
      for (Eigen::Index f = 0; f < freqs.size(); ++f) {
        w.power(ch, f) =
            p[f] * std::pow(10.0, eff_sd * rng.normal());
      }
    }
    ds.windows.push_back(std::move(w));
  }

  ds.manifest.seed = cfg.seed;
  ds.manifest.freqs_hz = freqs;
  ds.manifest.window_times = times;
  ds.manifest.layout = geo.layout;
  ds.manifest.domain = geo.domain;
  ds.manifest.n_modes_per_axis = cfg.n_modes_per_axis;
  ds.manifest.has_ground_truth = true;
  ds.manifest.config_echo = sim_config_to_json(cfg);

  GroundTruth truth;
  truth.coeffs = coeffs;
  truth.g7_offsets = g7;
  truth.field_at_electrodes = truth_elec;
  ds.truth = std::move(truth);
  return ds;
}

// ---------------------------------------------------------------------------
// JSON round trip

namespace {

ordered_json cmc_to_json(const cmc::CmcParams& p) {
  ordered_json j;
  j["g1"] = p.g1;
  j["g2"] = p.g2;
  j["g3"] = p.g3;
  j["g4"] = p.g4;
  j["g5"] = p.g5;
  j["g6"] = p.g6;
  j["g7"] = p.g7;
  j["g8"] = p.g8;
  j["g9"] = p.g9;
  j["g10"] = p.g10;
  j["Te"] = p.Te;
  j["Ti"] = p.Ti;
  j["Tsp"] = p.Tsp;
  j["Tdp"] = p.Tdp;
  j["rho"] = p.rho;
  j["sigma_u"] = p.sigma_u;
  return j;
}

cmc::CmcParams cmc_from_json(const ordered_json& j) {
  cmc::CmcParams p;
  p.g1 = j.value("g1", p.g1);
  p.g2 = j.value("g2", p.g2);
  p.g3 = j.value("g3", p.g3);
  p.g4 = j.value("g4", p.g4);
  p.g5 = j.value("g5", p.g5);
  p.g6 = j.value("g6", p.g6);
  p.g7 = j.value("g7", p.g7);
  p.g8 = j.value("g8", p.g8);
  p.g9 = j.value("g9", p.g9);
  p.g10 = j.value("g10", p.g10);
  p.Te = j.value("Te", p.Te);
  p.Ti = j.value("Ti", p.Ti);
  p.Tsp = j.value("Tsp", p.Tsp);
  p.Tdp = j.value("Tdp", p.Tdp);
  p.rho = j.value("rho", p.rho);
  p.sigma_u = j.value("sigma_u", p.sigma_u);
  return p;
}

ordered_json sinusoid_to_json(const SinusoidBoundary& s) {
  ordered_json j;
  j["offset"] = s.offset;
  j["amplitude"] = s.amplitude;
  j["period"] = s.period;
  j["phase"] = s.phase;
  return j;
}

SinusoidBoundary sinusoid_from_json(const ordered_json& j) {
  SinusoidBoundary s;
  s.offset = j.value("offset", 0.0);
  s.amplitude = j.value("amplitude", 0.0);
  s.period = j.value("period", 10.0);
  s.phase = j.value("phase", 0.0);
  return s;
}

} // namespace

ordered_json sim_config_to_json(const SimConfig& cfg) {
  ordered_json j;
  j["seed"] = cfg.seed;
  j["electrodes"] = {{"rows", cfg.rows}, {"cols", cfg.cols},
                     {"spacing", cfg.spacing}};
  j["domain"] = {{"margin_factor", cfg.margin_factor}, {"alpha", cfg.alpha}};
  j["basis"] = {{"n_modes_per_axis", cfg.n_modes_per_axis}};
  j["windows"] = {{"count", cfg.n_windows}, {"dt", cfg.dt_window}};
  j["freqs_hz"] = {{"start", cfg.f_start}, {"stop", cfg.f_stop},
                   {"step", cfg.f_step}};
  j["noise"] = {{"obs_log10_sd", cfg.obs_log10_sd},
                {"spectral_averages", cfg.spectral_averages},
                {"mode_noise_var", cfg.mode_noise_var},
                {"g7_white_var", cfg.g7_white_var}};

  ordered_json sc;
  if (const auto* b = std::get_if<BumpScenario>(&cfg.scenario)) {
    sc["type"] = "bump";
    sc["center"] = {b->center_rx, b->center_ry};
    sc["width_rel"] = b->width_rel;
    sc["amp_floor"] = b->amp_floor;
    sc["amp_peak"] = b->amp_peak;
    sc["amp_end"] = b->amp_end;
    sc["rise_fraction"] = b->rise_fraction;
  } else if (const auto* c = std::get_if<CoeffScenario>(&cfg.scenario)) {
    sc["type"] = "coeffs";
    ordered_json rows = ordered_json::array();
    for (Eigen::Index r = 0; r < c->coeffs.rows(); ++r) {
      ordered_json row = ordered_json::array();
      for (Eigen::Index cc = 0; cc < c->coeffs.cols(); ++cc) {
        row.push_back(c->coeffs(r, cc));
      }
      rows.push_back(row);
    }
    sc["coeffs"] = rows;
  } else {
    const auto& bd = std::get<Boundary1dScenario>(cfg.scenario);
    sc["type"] = "boundary_1d";
    sc["phi0"] = sinusoid_to_json(bd.phi0);
    sc["phi1"] = sinusoid_to_json(bd.phi1);
  }
  j["scenario"] = sc;
  j["cmc"] = cmc_to_json(cfg.cmc_params);
  return j;
}

SimConfig sim_config_from_json(const ordered_json& j) {
  SimConfig cfg;
  if (!j.contains("seed")) {
    throw config_error("simulation config must set a seed");
  }
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.seed_set = true;

  if (j.contains("electrodes")) {
    const auto& el = j.at("electrodes");
    cfg.rows = el.value("rows", cfg.rows);
    cfg.cols = el.value("cols", cfg.cols);
    cfg.spacing = el.value("spacing", cfg.spacing);
  }
  if (j.contains("domain")) {
    const auto& d = j.at("domain");
    cfg.margin_factor = d.value("margin_factor", cfg.margin_factor);
    cfg.alpha = d.value("alpha", cfg.alpha);
  }
  if (j.contains("basis")) {
    cfg.n_modes_per_axis =
        j.at("basis").value("n_modes_per_axis", cfg.n_modes_per_axis);
  }
  if (j.contains("windows")) {
    cfg.n_windows = j.at("windows").value("count", cfg.n_windows);
    cfg.dt_window = j.at("windows").value("dt", cfg.dt_window);
  }
  if (j.contains("freqs_hz")) {
    const auto& f = j.at("freqs_hz");
    cfg.f_start = f.value("start", cfg.f_start);
    cfg.f_stop = f.value("stop", cfg.f_stop);
    cfg.f_step = f.value("step", cfg.f_step);
  }
  if (j.contains("noise")) {
    const auto& n = j.at("noise");
    cfg.obs_log10_sd = n.value("obs_log10_sd", cfg.obs_log10_sd);
    cfg.spectral_averages = n.value("spectral_averages", cfg.spectral_averages);
    cfg.mode_noise_var = n.value("mode_noise_var", cfg.mode_noise_var);
    cfg.g7_white_var = n.value("g7_white_var", cfg.g7_white_var);
  }
  if (j.contains("scenario")) {
    const auto& sc = j.at("scenario");
    const std::string type = sc.value("type", "bump");
    if (type == "bump") {
      BumpScenario b;
      if (sc.contains("center")) {
        b.center_rx = sc.at("center").at(0).get<double>();
        b.center_ry = sc.at("center").at(1).get<double>();
      }
      b.width_rel = sc.value("width_rel", b.width_rel);
      b.amp_floor = sc.value("amp_floor", b.amp_floor);
      b.amp_peak = sc.value("amp_peak", b.amp_peak);
      b.amp_end = sc.value("amp_end", b.amp_end);
      b.rise_fraction = sc.value("rise_fraction", b.rise_fraction);
      cfg.scenario = b;
    } else if (type == "coeffs") {
      CoeffScenario c;
      const auto& rows = sc.at("coeffs");
      const auto nr = static_cast<Eigen::Index>(rows.size());
      const auto nc =
          nr > 0 ? static_cast<Eigen::Index>(rows.at(0).size()) : 0;
      c.coeffs.resize(nr, nc);
      for (Eigen::Index r = 0; r < nr; ++r) {
        for (Eigen::Index cc = 0; cc < nc; ++cc) {
          c.coeffs(r, cc) = rows.at(static_cast<std::size_t>(r))
                                .at(static_cast<std::size_t>(cc))
                                .get<double>();
        }
      }
      cfg.scenario = c;
    } else if (type == "boundary_1d") {
      Boundary1dScenario b;
      if (sc.contains("phi0")) b.phi0 = sinusoid_from_json(sc.at("phi0"));
      if (sc.contains("phi1")) b.phi1 = sinusoid_from_json(sc.at("phi1"));
      cfg.scenario = b;
    } else {
      throw config_error("unknown scenario type '" + type + "'");
    }
  }
  if (j.contains("cmc")) {
    cfg.cmc_params = cmc_from_json(j.at("cmc"));
  }
  return cfg;
}

} // namespace specfield::harness
