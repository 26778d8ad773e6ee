#include "specfield/filter.hpp"

#include <cmath>

namespace specfield::filter {

void NoiseHyper::validate() const {
  if (!std::isfinite(log_precision) || !std::isfinite(prior_mean) ||
      !std::isfinite(prior_var) || prior_var <= 0.0) {
    throw config_error("noise hyperparameter settings must be finite with "
                       "positive prior variance");
  }
}

void FilterConfig::validate() const {
  if (!(dt_window > 0.0)) {
    throw config_error("dt_window must be > 0");
  }
  if (basis.size() == 0) {
    throw config_error("filter config has an empty basis");
  }
  if (volatility.size() != basis.size()) {
    throw config_error("volatility size must equal basis size");
  }
  if (volatility.size() > 0 && volatility.minCoeff() < 0.0) {
    throw config_error("volatility variances must be >= 0");
  }
  if (g7_walk_var < 0.0 || process_noise < 0.0) {
    throw config_error("noise variances must be >= 0");
  }
  if (freqs_hz.size() == 0) {
    throw config_error("filter config has an empty frequency grid");
  }
  cmc_params.validate();
  hyper.validate();
  if (max_iterations < 1 || converged_streak < 1 || fe_tolerance <= 0.0 ||
      lm_lambda_init <= 0.0 || fd_step <= 0.0) {
    throw config_error("optimizer settings out of range");
  }
}

vl::GaussianBelief predict_prior(const vl::GaussianBelief& post,
                                 const FilterConfig& cfg) {
  cfg.validate();
  try {
    post.validate();
  } catch (const config_error& e) {
    throw config_error(std::string("predict_prior: invalid belief: ") +
                       e.what());
  }
  const int n_modes = cfg.basis.size();
  if (post.mean.size() != n_modes + 1) {
    throw config_error("belief dimension does not match basis size + 1");
  }

  const Vec lam = cfg.basis.decay_rates();
  Vec decay(n_modes + 1);
  for (int i = 0; i < n_modes; ++i) {
    decay[i] = std::exp(-lam[i] * cfg.dt_window);
  }
  decay[n_modes] = 1.0; // g7 log-offset follows a random walk

  vl::GaussianBelief prior;
  prior.mean = post.mean.cwiseProduct(decay);

  const Eigen::Index d = post.mean.size();
  prior.cov.resize(d, d);
  if (cfg.paper_literal_prediction) {
    prior.cov = post.cov;
  } else {
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) {
        prior.cov(i, j) = decay[i] * decay[j] * post.cov(i, j);
      }
    }
  }
  for (int i = 0; i < n_modes; ++i) {
    prior.cov(i, i) += cfg.volatility[i];
  }
  prior.cov(n_modes, n_modes) += cfg.g7_walk_var;
  return prior;
}

BeliefTrajectory run_filter(std::span<const SpectralWindow> windows,
                            const vl::GaussianBelief& init,
                            const FilterConfig& cfg) {
  cfg.validate();
  if (windows.empty()) {
    throw config_error("run_filter needs at least one window");
  }
  for (std::size_t k = 1; k < windows.size(); ++k) {
    if (!(windows[k].t > windows[k - 1].t)) {
      throw config_error("windows must be strictly time-ordered");
    }
  }

  BeliefTrajectory traj;
  traj.windows.reserve(windows.size());

  vl::GaussianBelief prior = init;
  NoiseHyper hyper = cfg.hyper;

  for (std::size_t k = 0; k < windows.size(); ++k) {
    if (k > 0) {
      prior = predict_prior(traj.windows.back().report.posterior, cfg);
    }
    WindowRecord rec;
    rec.t = windows[k].t;
    rec.prior = prior;
    rec.report = vl::invert_window(windows[k], prior, hyper, cfg);
    hyper.log_precision = rec.report.log_precision; // warm start next window
    traj.windows.push_back(std::move(rec));
  }
  return traj;
}

FieldMovie field_movie(const BeliefTrajectory& traj,
                       const field::EigenBasis& basis, int nx, int ny) {
  if (nx < 2) {
    throw config_error("field_movie needs nx >= 2");
  }
  const bool is_rect = basis.domain.kind == field::DomainKind::rectangle;
  if (is_rect && ny < 2) {
    throw config_error("field_movie needs ny >= 2 on rectangles");
  }
  if (!is_rect) {
    ny = 1;
  }

  FieldMovie movie;
  movie.grid_x.resize(nx);
  for (int i = 0; i < nx; ++i) {
    movie.grid_x[i] = basis.domain.Lx * i / (nx - 1);
  }
  movie.grid_y.resize(ny);
  if (is_rect) {
    for (int j = 0; j < ny; ++j) {
      movie.grid_y[j] = basis.domain.Ly * j / (ny - 1);
    }
  } else {
    movie.grid_y[0] = 0.0;
  }

  std::vector<field::Point> pts;
  pts.reserve(static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      pts.push_back({movie.grid_x[i], movie.grid_y[j]});
    }
  }
  const Mat phi = field::basis_matrix(basis, pts);

  movie.frames.reserve(traj.windows.size());
  for (const WindowRecord& rec : traj.windows) {
    const Vec c = rec.report.posterior.mean.head(basis.size());
    const Vec vals = phi * c;
    Mat frame(ny, nx);
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        frame(j, i) = vals[static_cast<Eigen::Index>(j) * nx + i];
      }
    }
    movie.frames.push_back(std::move(frame));
  }
  return movie;
}

} // namespace specfield::filter
