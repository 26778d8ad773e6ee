#pragma once

#include <vector>

#include "specfield/common.hpp"
#include "specfield/filter_config.hpp"
#include "specfield/window.hpp"

namespace specfield::vl {

using filter::FilterConfig;
using filter::NoiseHyper;

/// Gaussian belief over the parameter vector [field coefficients...,
/// g7 log-offset].
struct GaussianBelief {
  Vec mean;
  Mat cov;

  /// Throws config_error unless cov is symmetric (1e-10) and positive
  /// definite.
  void validate() const;
};

struct InversionReport {
  GaussianBelief posterior;
  double free_energy = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Set when the curvature at the optimum needed a 1e-6 ridge to become
  /// positive definite; such a report also has converged = false.
  bool covariance_regularized = false;
  Mat predicted_log10;              ///< channels x freqs model log-spectra
  double explained_variance = 0.0;
  double log_precision = 0.0;       ///< noise hyperparameter at the optimum
  std::vector<double> fe_trace;     ///< free energy after each accepted step
};

/// Joint log density of data and parameters under the model: Gaussian
/// likelihood of the log10-power residuals with precision e^{h}, Gaussian
/// parameter prior, Gaussian hyperprior on h. Higher is better.
double free_energy(const SpectralWindow& y, const Vec& params,
                   const GaussianBelief& prior, const NoiseHyper& hyper,
                   const FilterConfig& cfg);

/// Gradient of free_energy in the parameters, using the central-difference
/// model Jacobian (step cfg.fd_step). The prior term is exact.
Vec free_energy_gradient(const SpectralWindow& y, const Vec& params,
                         const GaussianBelief& prior, const NoiseHyper& hyper,
                         const FilterConfig& cfg);

/// Model log10-spectra for a parameter vector, channels x freqs.
Mat predict_log10(const SpectralWindow& y, const Vec& params,
                  const FilterConfig& cfg);

/// Maximize the free energy over parameters and noise hyperparameter by
/// damped Gauss-Newton ascent; return the Gaussian posterior from the
/// curvature at the optimum.
InversionReport invert_window(const SpectralWindow& y,
                              const GaussianBelief& prior,
                              const NoiseHyper& hyper,
                              const FilterConfig& cfg);

/// 1 - SS_res / SS_tot of predicted vs observed values.
double explained_variance(const Mat& observed, const Mat& predicted);

} // namespace specfield::vl
