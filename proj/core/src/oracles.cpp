#include "specfield/oracles.hpp"

#include <cmath>
#include <vector>

#include "specfield/rng.hpp"

namespace specfield::harness {

HeatOracleResult fd_heat_oracle(const field::DomainSpec& domain,
                                const field::BoundaryDrive& drive, double dx,
                                double dt, double t_end) {
  domain.validate();
  if (domain.kind != field::DomainKind::interval) {
    throw config_error("finite-difference heat oracle is 1D only");
  }
  if (!(dx > 0.0) || !(dt > 0.0) || !(t_end >= 0.0)) {
    throw config_error("fd_heat_oracle needs dx, dt > 0 and t_end >= 0");
  }

  const double L = domain.Lx;
  const auto nx = static_cast<Eigen::Index>(std::lround(L / dx)) + 1;
  if (nx < 3) {
    throw config_error("fd_heat_oracle grid too coarse");
  }

  Vec x(nx);
  Vec u(nx);
  for (Eigen::Index i = 0; i < nx; ++i) {
    x[i] = L * static_cast<double>(i) / static_cast<double>(nx - 1);
    u[i] = drive.f0(x[i]);
  }
  u[0] = drive.phi0(0.0);
  u[nx - 1] = drive.phi1(0.0);

  const double r = domain.alpha * domain.alpha * dt / (dx * dx);
  const auto n = nx - 2; // interior nodes
  const auto steps = static_cast<long>(std::lround(t_end / dt));

  // Thomas algorithm factors for the constant tridiagonal
  // (1 + r) on the diagonal, -r/2 off-diagonal.
  Vec cp(n); // modified upper coefficients
  {
    const double b = 1.0 + r;
    const double a = -r / 2.0;
    cp[0] = a / b;
    for (Eigen::Index i = 1; i < n; ++i) {
      cp[i] = a / (b - a * cp[i - 1]);
    }
  }

  Vec rhs(n), dp(n);
  for (long s = 0; s < steps; ++s) {
    const double t0 = static_cast<double>(s) * dt;
    const double t1 = t0 + dt;
    const double b0 = drive.phi0(t1);
    const double b1 = drive.phi1(t1);

    for (Eigen::Index i = 0; i < n; ++i) {
      rhs[i] = u[i + 1] + r / 2.0 * (u[i] - 2.0 * u[i + 1] + u[i + 2]);
    }
    rhs[0] += r / 2.0 * b0;
    rhs[n - 1] += r / 2.0 * b1;

    const double bdiag = 1.0 + r;
    const double a = -r / 2.0;
    dp[0] = rhs[0] / bdiag;
    for (Eigen::Index i = 1; i < n; ++i) {
      dp[i] = (rhs[i] - a * dp[i - 1]) / (bdiag - a * cp[i - 1]);
    }
    Vec sol(n);
    sol[n - 1] = dp[n - 1];
    for (Eigen::Index i = n - 2; i >= 0; --i) {
      sol[i] = dp[i] - cp[i] * sol[i + 1];
    }
    u.segment(1, n) = sol;
    u[0] = b0;
    u[nx - 1] = b1;

    if (!u.allFinite()) {
      throw numeric_error("fd_heat_oracle diverged at t=" +
                          std::to_string(t1));
    }
  }

  return {x, u};
}

SpectrumOracleResult spectrum_oracle(const cmc::CmcParams& params,
                                     double theta_sp, const Vec& freqs_hz,
                                     double duration_s, double dt,
                                     double segment_s, std::uint64_t seed) {
  if (!(duration_s > 0.0) || !(dt > 0.0) || !(segment_s > 0.0)) {
    throw config_error("spectrum oracle needs positive durations");
  }
  const cmc::LinearizedSystem sys = cmc::linearize(params, theta_sp);

  SpectrumOracleResult result;
  result.freqs_hz = freqs_hz;
  result.analytic = cmc::transfer_spectrum(sys, params, freqs_hz).spectrum.power;

  // Euler-Maruyama on dx = J x dt + b sigma_u dW
  const auto n = static_cast<long>(std::lround(duration_s / dt));
  const Eigen::Matrix<double, 8, 8> prop =
      Eigen::Matrix<double, 8, 8>::Identity() + dt * sys.jacobian;
  const double noise_scale = params.sigma_u * std::sqrt(dt);

  GaussianRng rng(seed);
  Eigen::Matrix<double, 8, 1> state = Eigen::Matrix<double, 8, 1>::Zero();
  std::vector<double> y(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    state = prop * state;
    state[1] += noise_scale * rng.normal();
    y[static_cast<std::size_t>(i)] = state[4];
    if (!std::isfinite(y[static_cast<std::size_t>(i)])) {
      throw numeric_error("time-domain simulation diverged");
    }
  }

  // Welch with periodic Hann window, exact-bin DFT at the requested
  // frequencies (segment length must make each f an integer bin).
  const auto nseg = static_cast<long>(std::lround(segment_s / dt));
  if (nseg < 16 || nseg > n) {
    throw config_error("spectrum oracle segment length out of range");
  }
  std::vector<double> window(static_cast<std::size_t>(nseg));
  double wnorm = 0.0;
  for (long i = 0; i < nseg; ++i) {
    const double w =
        0.5 * (1.0 - std::cos(2.0 * M_PI * static_cast<double>(i) /
                              static_cast<double>(nseg)));
    window[static_cast<std::size_t>(i)] = w;
    wnorm += w * w;
  }

  result.periodogram = Vec::Zero(freqs_hz.size());
  const long hop = nseg / 2;
  long n_segments = 0;
  for (long start = 0; start + nseg <= n; start += hop) {
    for (Eigen::Index f = 0; f < freqs_hz.size(); ++f) {
      // Goertzel recursion for the DFT magnitude at one frequency
      const double w0 = 2.0 * M_PI * freqs_hz[f] * dt;
      const double coeff = 2.0 * std::cos(w0);
      double s1 = 0.0, s2 = 0.0;
      for (long i = 0; i < nseg; ++i) {
        const double v = y[static_cast<std::size_t>(start + i)] *
                         window[static_cast<std::size_t>(i)];
        const double s0 = v + coeff * s1 - s2;
        s2 = s1;
        s1 = s0;
      }
      const double power = s1 * s1 + s2 * s2 - coeff * s1 * s2;
      result.periodogram[f] += power * dt / wnorm;
    }
    ++n_segments;
  }
  if (n_segments == 0) {
    throw config_error("spectrum oracle produced no segments");
  }
  result.periodogram /= static_cast<double>(n_segments);

  Eigen::Index peak = 0;
  result.analytic.maxCoeff(&peak);
  result.peak_freq_hz = freqs_hz[peak];
  result.peak_rel_error =
      std::abs(result.periodogram[peak] - result.analytic[peak]) /
      result.analytic[peak];
  return result;
}

} // namespace specfield::harness
