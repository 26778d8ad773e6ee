#include "specfield/vl.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <limits>

namespace specfield::vl {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

struct PriorTerms {
  Mat precision;
  double logdet = 0.0; // log det of the covariance
};

PriorTerms prior_terms(const GaussianBelief& prior) {
  prior.validate();
  const Eigen::Index d = prior.mean.size();
  Eigen::LDLT<Mat> ldlt(prior.cov);
  if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() <= 0.0) {
    throw config_error("prior covariance is not positive definite");
  }
  PriorTerms t;
  t.precision = ldlt.solve(Mat::Identity(d, d));
  t.precision = 0.5 * (t.precision + t.precision.transpose()).eval();
  t.logdet = ldlt.vectorD().array().log().sum();
  return t;
}

Mat log10_power(const SpectralWindow& y) {
  Mat out(y.power.rows(), y.power.cols());
  for (Eigen::Index r = 0; r < y.power.rows(); ++r) {
    for (Eigen::Index c = 0; c < y.power.cols(); ++c) {
      const double p = y.power(r, c);
      if (!(p > 0.0) || !std::isfinite(p)) {
        throw numeric_error("observed power must be positive and finite");
      }
      out(r, c) = std::log10(p);
    }
  }
  return out;
}

Vec flatten(const Mat& m) {
  Vec v(m.size());
  Eigen::Index k = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      v[k++] = m(r, c);
    }
  }
  return v;
}

void check_dims(const SpectralWindow& y, const Vec& params,
                const GaussianBelief& prior, const FilterConfig& cfg) {
  if (params.size() != cfg.param_dim()) {
    throw config_error("parameter vector size does not match basis size + 1");
  }
  if (prior.mean.size() != params.size() ||
      prior.cov.rows() != params.size()) {
    throw config_error("prior dimension does not match parameter vector");
  }
  if (y.power.cols() != cfg.freqs_hz.size()) {
    throw config_error("window frequency count does not match config grid");
  }
  if (static_cast<Eigen::Index>(y.positions.size()) != y.power.rows()) {
    throw config_error("window channel count does not match positions");
  }
}

/// Likelihood + hyperprior part of F for fixed residual sum of squares.
double fe_noise_part(double sse, double h, double n_y,
                     const NoiseHyper& hyper) {
  const double dh = h - hyper.prior_mean;
  return -0.5 * std::exp(h) * sse + 0.5 * n_y * h - 0.5 * n_y * kLog2Pi -
         0.5 * dh * dh / hyper.prior_var -
         0.5 * std::log(2.0 * M_PI * hyper.prior_var);
}

double fe_prior_part(const Vec& params, const GaussianBelief& prior,
                     const PriorTerms& terms) {
  const Vec q = params - prior.mean;
  const double d = static_cast<double>(params.size());
  return -0.5 * q.dot(terms.precision * q) - 0.5 * terms.logdet -
         0.5 * d * kLog2Pi;
}

} // namespace

void GaussianBelief::validate() const {
  if (mean.size() == 0 || cov.rows() != mean.size() ||
      cov.cols() != mean.size()) {
    throw config_error("belief mean/covariance dimensions inconsistent");
  }
  if (!mean.allFinite() || !cov.allFinite()) {
    throw config_error("belief contains non-finite entries");
  }
  const double asym = (cov - cov.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10) {
    throw config_error("belief covariance is not symmetric");
  }
  Eigen::LDLT<Mat> ldlt(cov);
  if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() <= 0.0) {
    throw config_error("belief covariance is not positive definite");
  }
}

double explained_variance(const Mat& observed, const Mat& predicted) {
  if (observed.rows() != predicted.rows() ||
      observed.cols() != predicted.cols()) {
    throw config_error("explained_variance: shape mismatch");
  }
  const double mean = observed.mean();
  const double ss_tot = (observed.array() - mean).square().sum();
  const double ss_res = (observed - predicted).array().square().sum();
  if (ss_tot <= 0.0) {
    return ss_res == 0.0 ? 1.0 : -std::numeric_limits<double>::infinity();
  }
  return 1.0 - ss_res / ss_tot;
}

Mat predict_log10(const SpectralWindow& y, const Vec& params,
                  const FilterConfig& cfg) {
  const int n_modes = cfg.basis.size();
  field::FieldCoeffs coeffs{params.head(n_modes)};
  const Vec theta = field::evaluate_field(coeffs, cfg.basis, y.positions);
  const double g7_offset = params[n_modes];

  cmc::ForwardResult fwd =
      cmc::forward_model(cfg.cmc_params, theta, g7_offset, cfg.freqs_hz);

  Mat out(y.power.rows(), cfg.freqs_hz.size());
  for (Eigen::Index ch = 0; ch < out.rows(); ++ch) {
    const Vec& p = fwd.channels[static_cast<std::size_t>(ch)].power;
    for (Eigen::Index f = 0; f < out.cols(); ++f) {
      if (!(p[f] > 0.0)) {
        throw numeric_error("model power non-positive; spectrum degenerate");
      }
      out(ch, f) = std::log10(p[f]);
    }
  }
  return out;
}

double free_energy(const SpectralWindow& y, const Vec& params,
                   const GaussianBelief& prior, const NoiseHyper& hyper,
                   const FilterConfig& cfg) {
  check_dims(y, params, prior, cfg);
  const PriorTerms terms = prior_terms(prior);
  const Mat data = log10_power(y);
  const Mat m = predict_log10(y, params, cfg);
  const double sse = (data - m).array().square().sum();
  return fe_noise_part(sse, hyper.log_precision,
                       static_cast<double>(data.size()), hyper) +
         fe_prior_part(params, prior, terms);
}

namespace {

Mat model_jacobian(const SpectralWindow& y, const Vec& params,
                   const FilterConfig& cfg) {
  const Eigen::Index d = params.size();
  const Eigen::Index n_y = y.power.size();
  const double h = cfg.fd_step;
  Mat J(n_y, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    Vec plus = params;
    Vec minus = params;
    plus[j] += h;
    minus[j] -= h;
    const Vec mp = flatten(predict_log10(y, plus, cfg));
    const Vec mm = flatten(predict_log10(y, minus, cfg));
    J.col(j) = (mp - mm) / (2.0 * h);
  }
  return J;
}

} // namespace

Vec free_energy_gradient(const SpectralWindow& y, const Vec& params,
                         const GaussianBelief& prior, const NoiseHyper& hyper,
                         const FilterConfig& cfg) {
  check_dims(y, params, prior, cfg);
  const PriorTerms terms = prior_terms(prior);
  const Vec eps = flatten(log10_power(y)) - flatten(predict_log10(y, params, cfg));
  const Mat J = model_jacobian(y, params, cfg);
  return std::exp(hyper.log_precision) * (J.transpose() * eps) -
         terms.precision * (params - prior.mean);
}

InversionReport invert_window(const SpectralWindow& y,
                              const GaussianBelief& prior,
                              const NoiseHyper& hyper,
                              const FilterConfig& cfg) {
  cfg.validate();
  check_dims(y, prior.mean, prior, cfg);
  hyper.validate();
  const PriorTerms terms = prior_terms(prior);

  Mat data;
  try {
    data = log10_power(y);
  } catch (const numeric_error& e) {
    throw numeric_error("window t=" + std::to_string(y.t) + ": " + e.what());
  }
  const Vec dvec = flatten(data);
  const double n_y = static_cast<double>(dvec.size());

  auto predict = [&](const Vec& p) -> Mat {
    try {
      return predict_log10(y, p, cfg);
    } catch (const numeric_error& e) {
      throw numeric_error("window t=" + std::to_string(y.t) + ": " +
                          e.what());
    }
  };

  Vec p = prior.mean;
  double h = hyper.log_precision;

  Mat m = predict(p);
  double sse = (dvec - flatten(m)).squaredNorm();

  auto fe_at = [&](double sse_val, const Vec& pv, double hv) {
    return fe_noise_part(sse_val, hv, n_y, hyper) +
           fe_prior_part(pv, prior, terms);
  };

  // Damped Newton on the noise log precision; the objective is strictly
  // concave in h, so backtracking always finds an uphill step.
  auto update_h = [&](double sse_val, double h0) {
    const double grad =
        -0.5 * std::exp(h0) * sse_val + 0.5 * n_y - (h0 - hyper.prior_mean) / hyper.prior_var;
    const double curv = -0.5 * std::exp(h0) * sse_val - 1.0 / hyper.prior_var;
    double step = -grad / curv;
    const double f0 = fe_noise_part(sse_val, h0, n_y, hyper);
    for (int k = 0; k < 40; ++k) {
      if (fe_noise_part(sse_val, h0 + step, n_y, hyper) >= f0) {
        return h0 + step;
      }
      step *= 0.5;
    }
    return h0;
  };

  double fe_cur = fe_at(sse, p, h);

  InversionReport report;
  report.fe_trace.push_back(fe_cur);

  Mat J = model_jacobian(y, p, cfg);
  double lambda = cfg.lm_lambda_init;
  int streak = 0;
  int iter = 0;
  const Eigen::Index d = p.size();

  while (iter < cfg.max_iterations) {
    ++iter;
    const Vec eps = dvec - flatten(m);
    const double tau = std::exp(h);
    const Vec grad = tau * (J.transpose() * eps) - terms.precision * (p - prior.mean);
    const Mat curv = tau * (J.transpose() * J) + terms.precision;

    Mat damped = curv;
    damped.diagonal().array() += lambda;
    Eigen::LDLT<Mat> ldlt(damped);
    if (ldlt.info() != Eigen::Success) {
      lambda *= 10.0;
      if (lambda > 1e12) break;
      continue;
    }
    const Vec step = ldlt.solve(grad);
    const Vec p_new = p + step;

    const Mat m_new = predict(p_new);
    const double sse_new = (dvec - flatten(m_new)).squaredNorm();
    const double fe_new = fe_at(sse_new, p_new, h);

    // Non-strict acceptance keeps a perfect-fit start (zero gradient, zero
    // step) on the accepted path so the streak criterion can fire.
    if (std::isfinite(fe_new) && fe_new >= fe_cur) {
      p = p_new;
      m = m_new;
      sse = sse_new;
      lambda = std::max(lambda / 10.0, 1e-12);

      h = update_h(sse, h);
      const double fe_after = fe_at(sse, p, h);
      const double delta = fe_after - fe_cur;
      fe_cur = fe_after;
      report.fe_trace.push_back(fe_cur);

      if (delta < cfg.fe_tolerance) {
        ++streak;
      } else {
        streak = 0;
      }
      if (streak >= cfg.converged_streak) {
        report.converged = true;
        break;
      }
      J = model_jacobian(y, p, cfg);
    } else {
      lambda *= 10.0;
      if (lambda > 1e12) break;
    }
  }
  report.iterations = iter;

  // Laplace covariance from the Gauss-Newton curvature at the optimum.
  Mat curv = std::exp(h) * (J.transpose() * J) + terms.precision;
  curv = 0.5 * (curv + curv.transpose()).eval();
  Eigen::LDLT<Mat> ldlt(curv);
  if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() <= 0.0) {
    curv.diagonal().array() += 1e-6;
    ldlt.compute(curv);
    report.covariance_regularized = true;
    report.converged = false;
  }
  Mat cov = ldlt.solve(Mat::Identity(d, d));
  cov = 0.5 * (cov + cov.transpose()).eval();

  report.posterior.mean = p;
  report.posterior.cov = cov;
  report.free_energy = fe_cur;
  report.predicted_log10 = m;
  report.explained_variance = explained_variance(data, m);
  report.log_precision = h;
  return report;
}

} // namespace specfield::vl
