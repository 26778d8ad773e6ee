#pragma once

#include "specfield/cmc.hpp"
#include "specfield/common.hpp"
#include "specfield/field.hpp"

namespace specfield::filter {

/// Scalar observation-noise hyperparameter: log precision of the log10
/// power residuals, with a Gaussian prior of its own.
struct NoiseHyper {
  double log_precision = 4.0;
  double prior_mean = 4.0;
  double prior_var = 9.0;

  void validate() const;
};

/// Everything the sequential inversion needs besides the data: the spatial
/// basis, the belief-propagation covariances, the shared column parameters,
/// the frequency grid and the optimizer settings.
struct FilterConfig {
  double dt_window = 1.0; ///< spacing between window midpoints [s]

  field::EigenBasis basis;

  /// Per-field-coefficient variance added per step (volatility). Size must
  /// equal the basis size; a convenience fill is provided by
  /// `set_uniform_volatility`.
  Vec volatility;
  double g7_walk_var = 1e-4;

  /// Per-mode innovation variance used by the simulator's ground-truth
  /// trajectory (the estimator itself only uses `volatility`).
  double process_noise = 1e-4;

  cmc::CmcParams cmc_params;
  NoiseHyper hyper;
  Vec freqs_hz;

  // Gauss-Newton / Levenberg-Marquardt settings
  int max_iterations = 64;
  double fe_tolerance = 1e-3;   ///< converged when dF below this...
  int converged_streak = 3;     ///< ...on this many consecutive accepted steps
  double lm_lambda_init = 1e-2;
  double fd_step = 1e-3;        ///< central-difference step per parameter

  /// Use the literal prior covariance Q + R instead of the decayed
  /// push-forward D Q D^T + R.
  bool paper_literal_prediction = false;

  int param_dim() const { return basis.size() + 1; }

  void set_uniform_volatility(double var) {
    volatility = Vec::Constant(basis.size(), var);
  }

  void validate() const;
};

} // namespace specfield::filter
