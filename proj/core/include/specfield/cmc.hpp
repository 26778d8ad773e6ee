#pragma once

#include <vector>

#include "specfield/common.hpp"

namespace specfield::cmc {

/// Coupling gains, time constants and sigmoid slope of a four-population
/// cortical column (superficial/deep pyramidal, granular excitatory,
/// inhibitory). Gains are dimensionless; time constants in seconds.
///
/// The shipped defaults are stability-checked by the test suite: all
/// eigenvalues of the linearization at these values have negative real part.
struct CmcParams {
  double g1 = 1.0;
  double g2 = 1.0;
  double g3 = 1.0;
  double g4 = 1.0;
  double g5 = 1.0;
  double g6 = 1.0;
  double g7 = 1.0;
  double g8 = 1.0;
  double g9 = 1.0;
  double g10 = 1.0;

  double Te = 0.004;  ///< granular excitatory time constant [s]
  double Ti = 0.016;  ///< inhibitory time constant [s]
  double Tsp = 0.002; ///< superficial pyramidal time constant [s]
  double Tdp = 0.028; ///< deep pyramidal time constant [s]

  double rho = 2.0 / 3.0; ///< sigmoid slope
  double sigma_u = 1.0;   ///< input noise standard deviation

  /// Throws config_error when any gain/time constant is non-positive or
  /// any entry is non-finite.
  void validate() const;
};

/// State ordering: [x_e, dx_e, x_i, dx_i, x_sp, dx_sp, x_dp, dx_dp].
/// The drive enters on the granular velocity coordinate; the readout is the
/// superficial pyramidal position.
struct LinearizedSystem {
  Eigen::Matrix<double, 8, 8> jacobian;
  Eigen::Matrix<double, 8, 1> input_vector;
  Eigen::Matrix<double, 8, 1> output_vector;
};

struct PowerSpectrum {
  Vec freqs_hz;
  Vec power;
};

/// Spectrum plus a stability note: the spectrum of an unstable
/// linearization is computed but not interpretable, so the flag travels
/// with the result instead of aborting.
struct SpectrumResult {
  PowerSpectrum spectrum;
  bool unstable_warning = false;
};

struct ForwardResult {
  std::vector<PowerSpectrum> channels;
  bool any_unstable = false;
};

/// Centered logistic rate s(x) = 1/(1 + e^{-rho x}) - 1/2.
/// Odd, saturates at +-1/2, slope rho/4 at the origin.
double firing_rate(double x, double rho);

/// Nonlinear right-hand side of the column ODEs in first-order form,
/// at excitability log-gain theta_sp. The drive input is zero here; this is
/// the deterministic vector field used for linearization checks and the
/// time-domain oracle.
Eigen::Matrix<double, 8, 1> ode_rhs(const CmcParams& params, double theta_sp,
                                    const Eigen::Matrix<double, 8, 1>& state);

/// Jacobian of the column dynamics at the zero fixed point, with the
/// excitatory gains g5, g6, g8 scaled by e^{theta_sp}.
LinearizedSystem linearize(const CmcParams& params, double theta_sp);

bool is_stable(const LinearizedSystem& sys);

/// Steady-state output power S(f) = sigma_u^2 |c^T (i 2 pi f I - J)^{-1} b|^2
/// on the given frequency grid (Hz, strictly increasing, positive).
SpectrumResult transfer_spectrum(const LinearizedSystem& sys,
                                 const CmcParams& params, const Vec& freqs_hz);

/// Per-channel spectra for a set of independent columns sharing everything
/// except their local excitability value. g7 is scaled by e^{g7_log_offset}
/// in every channel.
ForwardResult forward_model(const CmcParams& params, const Vec& field_values,
                            double g7_log_offset, const Vec& freqs_hz);

} // namespace specfield::cmc
