#include "specfield/invert_setup.hpp"

#include <cmath>

namespace specfield::harness {

namespace {

cmc::CmcParams cmc_overrides(cmc::CmcParams p, const ordered_json& j) {
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

} // namespace

InvertSetup make_invert_setup(const DatasetManifest& manifest,
                              const ordered_json& overrides) {
  const ordered_json o =
      overrides.is_null() ? ordered_json::object() : overrides;
  if (!o.is_object()) {
    throw config_error("invert config must be a JSON object");
  }
  InvertSetup setup;
  filter::FilterConfig& cfg = setup.cfg;

  const int n_modes_axis =
      o.value("n_modes_per_axis", manifest.n_modes_per_axis);
  cfg.basis = field::build_basis(manifest.domain, n_modes_axis);
  cfg.freqs_hz = manifest.freqs_hz;

  double dt = 1.0;
  if (manifest.window_times.size() >= 2) {
    dt = manifest.window_times[1] - manifest.window_times[0];
  }
  cfg.dt_window = o.value("dt_window", dt);

  const int M = cfg.basis.size();
  if (o.contains("volatility") && o.at("volatility").is_array()) {
    const auto v = o.at("volatility").get<std::vector<double>>();
    if (static_cast<int>(v.size()) != M) {
      throw config_error("volatility array must have one entry per mode");
    }
    cfg.volatility = Eigen::Map<const Vec>(v.data(), M);
  } else {
    cfg.set_uniform_volatility(o.value("volatility", 0.05));
  }
  cfg.g7_walk_var = o.value("g7_walk_var", 1e-4);
  cfg.process_noise = o.value("process_noise", 1e-4);

  // Non-spatial column parameters: the dataset's own values when echoed,
  // overridable from the invert config.
  if (manifest.config_echo.contains("cmc")) {
    cfg.cmc_params = cmc_overrides(cfg.cmc_params,
                                   manifest.config_echo.at("cmc"));
  }
  if (o.contains("cmc")) {
    cfg.cmc_params = cmc_overrides(cfg.cmc_params, o.at("cmc"));
  }

  if (o.contains("noise_hyper")) {
    const auto& h = o.at("noise_hyper");
    cfg.hyper.log_precision = h.value("log_precision", cfg.hyper.log_precision);
    cfg.hyper.prior_mean = h.value("prior_mean", cfg.hyper.prior_mean);
    cfg.hyper.prior_var = h.value("prior_var", cfg.hyper.prior_var);
  }

  if (o.contains("vl")) {
    const auto& v = o.at("vl");
    cfg.max_iterations = v.value("max_iterations", cfg.max_iterations);
    cfg.fe_tolerance = v.value("fe_tolerance", cfg.fe_tolerance);
    cfg.converged_streak = v.value("converged_streak", cfg.converged_streak);
    cfg.lm_lambda_init = v.value("lm_lambda_init", cfg.lm_lambda_init);
    cfg.fd_step = v.value("fd_step", cfg.fd_step);
  }
  cfg.paper_literal_prediction = o.value("paper_literal_prediction", false);
  cfg.validate();

  double init_var = 1.0;
  double init_g7_var = 0.25;
  Vec init_mean = Vec::Zero(M + 1);
  if (o.contains("init_prior")) {
    const auto& ip = o.at("init_prior");
    init_var = ip.value("var", init_var);
    init_g7_var = ip.value("g7_var", init_g7_var);
    if (ip.contains("mean") && ip.at("mean").is_array()) {
      const auto mv = ip.at("mean").get<std::vector<double>>();
      if (static_cast<int>(mv.size()) != M + 1) {
        throw config_error("init prior mean must have basis size + 1 entries");
      }
      init_mean = Eigen::Map<const Vec>(mv.data(), M + 1);
    }
  }
  setup.init.mean = init_mean;
  setup.init.cov = Mat::Identity(M + 1, M + 1) * init_var;
  setup.init.cov(M, M) = init_g7_var;

  ordered_json echo;
  echo["n_modes_per_axis"] = n_modes_axis;
  echo["dt_window"] = cfg.dt_window;
  echo["volatility"] =
      std::vector<double>(cfg.volatility.begin(), cfg.volatility.end());
  echo["g7_walk_var"] = cfg.g7_walk_var;
  echo["process_noise"] = cfg.process_noise;
  echo["noise_hyper"] = {{"log_precision", cfg.hyper.log_precision},
                         {"prior_mean", cfg.hyper.prior_mean},
                         {"prior_var", cfg.hyper.prior_var}};
  echo["vl"] = {{"max_iterations", cfg.max_iterations},
                {"fe_tolerance", cfg.fe_tolerance},
                {"converged_streak", cfg.converged_streak},
                {"lm_lambda_init", cfg.lm_lambda_init},
                {"fd_step", cfg.fd_step}};
  echo["paper_literal_prediction"] = cfg.paper_literal_prediction;
  echo["init_prior"] = {{"var", init_var}, {"g7_var", init_g7_var}};
  setup.echo = echo;
  return setup;
}

} // namespace specfield::harness
