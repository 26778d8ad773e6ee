#pragma once

#include <cstdint>

#include "specfield/cmc.hpp"
#include "specfield/common.hpp"
#include "specfield/field.hpp"

namespace specfield::harness {

/// Crank-Nicolson solution of u_t = alpha^2 u_xx on an interval with
/// time-dependent Dirichlet values. Implicit, second order in space and
/// time; independent of the series solver it cross-checks.
struct HeatOracleResult {
  Vec x;
  Vec u;
};

HeatOracleResult fd_heat_oracle(const field::DomainSpec& domain,
                                const field::BoundaryDrive& drive, double dx,
                                double dt, double t_end);

/// Euler-Maruyama simulation of the linearized column driven by white
/// noise, followed by Welch averaging (Hann window, 50% overlap) of the
/// readout's periodogram at the requested frequencies.
struct SpectrumOracleResult {
  Vec freqs_hz;
  Vec analytic;    ///< transfer-function spectrum
  Vec periodogram; ///< Welch estimate from the time-domain run
  double peak_freq_hz = 0.0;
  double peak_rel_error = 0.0; ///< |welch - analytic| / analytic at the peak
};

SpectrumOracleResult spectrum_oracle(const cmc::CmcParams& params,
                                     double theta_sp, const Vec& freqs_hz,
                                     double duration_s, double dt,
                                     double segment_s, std::uint64_t seed);

} // namespace specfield::harness
