#include "specfield/cmc.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <cmath>
#include <complex>

namespace specfield::cmc {

namespace {

void check_finite_positive(double v, const char* name) {
  if (!std::isfinite(v) || v <= 0.0) {
    throw config_error(std::string("cmc parameter ") + name +
                       " must be finite and > 0");
  }
}

void validate_freqs(const Vec& freqs_hz) {
  if (freqs_hz.size() == 0) {
    throw config_error("frequency grid is empty");
  }
  for (Eigen::Index i = 0; i < freqs_hz.size(); ++i) {
    if (!std::isfinite(freqs_hz[i]) || freqs_hz[i] <= 0.0) {
      throw config_error("frequencies must be finite and positive");
    }
    if (i > 0 && freqs_hz[i] <= freqs_hz[i - 1]) {
      throw config_error("frequencies must be strictly increasing");
    }
  }
}

} // namespace

void CmcParams::validate() const {
  check_finite_positive(g1, "g1");
  check_finite_positive(g2, "g2");
  check_finite_positive(g3, "g3");
  check_finite_positive(g4, "g4");
  check_finite_positive(g5, "g5");
  check_finite_positive(g6, "g6");
  check_finite_positive(g7, "g7");
  check_finite_positive(g8, "g8");
  check_finite_positive(g9, "g9");
  check_finite_positive(g10, "g10");
  check_finite_positive(Te, "Te");
  check_finite_positive(Ti, "Ti");
  check_finite_positive(Tsp, "Tsp");
  check_finite_positive(Tdp, "Tdp");
  check_finite_positive(rho, "rho");
  check_finite_positive(sigma_u, "sigma_u");
}

double firing_rate(double x, double rho) {
  return 1.0 / (1.0 + std::exp(-rho * x)) - 0.5;
}

Eigen::Matrix<double, 8, 1> ode_rhs(const CmcParams& p, double theta_sp,
                                    const Eigen::Matrix<double, 8, 1>& x) {
  const double th = std::exp(theta_sp);
  const double se = firing_rate(x[0], p.rho);
  const double si = firing_rate(x[2], p.rho);
  const double ssp = firing_rate(x[4], p.rho);
  const double sdp = firing_rate(x[6], p.rho);

  Eigen::Matrix<double, 8, 1> dx;
  dx[0] = x[1];
  dx[1] = -2.0 / p.Te * x[1] - x[0] / (p.Te * p.Te) //
          - p.g1 * se - p.g3 * si - p.g2 * ssp;
  dx[2] = x[3];
  dx[3] = -2.0 / p.Ti * x[3] - x[2] / (p.Ti * p.Ti) //
          + th * p.g5 * se + th * p.g6 * sdp - p.g4 * si;
  dx[4] = x[5];
  dx[5] = -2.0 / p.Tsp * x[5] - x[4] / (p.Tsp * p.Tsp) //
          + th * p.g8 * se - p.g7 * ssp;
  dx[6] = x[7];
  dx[7] = -2.0 / p.Tdp * x[7] - x[6] / (p.Tdp * p.Tdp) //
          - p.g10 * sdp - p.g9 * si;
  return dx;
}

LinearizedSystem linearize(const CmcParams& p, double theta_sp) {
  // Looser than CmcParams::validate(): zero or negative gains linearize
  // fine (uncoupled or sign-flipped populations); only non-finite values
  // and degenerate time constants are rejected.
  for (const double v : {p.g1, p.g2, p.g3, p.g4, p.g5, p.g6, p.g7, p.g8,
                         p.g9, p.g10, p.rho, p.sigma_u}) {
    if (!std::isfinite(v)) {
      throw config_error("cmc parameters must be finite");
    }
  }
  for (const double T : {p.Te, p.Ti, p.Tsp, p.Tdp}) {
    if (!std::isfinite(T) || T <= 0.0) {
      throw config_error("time constants must be finite and > 0");
    }
  }
  if (!std::isfinite(theta_sp)) {
    throw config_error("theta_sp must be finite");
  }

  const double k = p.rho / 4.0; // sigmoid slope at the fixed point
  const double th = std::exp(theta_sp);

  LinearizedSystem sys;
  auto& J = sys.jacobian;
  J.setZero();

  const double T[4] = {p.Te, p.Ti, p.Tsp, p.Tdp};
  for (int q = 0; q < 4; ++q) {
    J(2 * q, 2 * q + 1) = 1.0;
    J(2 * q + 1, 2 * q) = -1.0 / (T[q] * T[q]);
    J(2 * q + 1, 2 * q + 1) = -2.0 / T[q];
  }

  // granular excitatory: -g1 s(x_e) - g3 s(x_i) - g2 s(x_sp)
  J(1, 0) += -p.g1 * k;
  J(1, 2) += -p.g3 * k;
  J(1, 4) += -p.g2 * k;
  // inhibitory: th g5 s(x_e) + th g6 s(x_dp) - g4 s(x_i)
  J(3, 0) += th * p.g5 * k;
  J(3, 6) += th * p.g6 * k;
  J(3, 2) += -p.g4 * k;
  // superficial pyramidal: th g8 s(x_e) - g7 s(x_sp)
  J(5, 0) += th * p.g8 * k;
  J(5, 4) += -p.g7 * k;
  // deep pyramidal: -g10 s(x_dp) - g9 s(x_i)
  J(7, 6) += -p.g10 * k;
  J(7, 2) += -p.g9 * k;

  sys.input_vector.setZero();
  sys.input_vector[1] = 1.0; // afferent drive on the granular velocity
  sys.output_vector.setZero();
  sys.output_vector[4] = 1.0; // efferent readout from superficial position

  return sys;
}

bool is_stable(const LinearizedSystem& sys) {
  Eigen::EigenSolver<Eigen::Matrix<double, 8, 8>> es(sys.jacobian, false);
  return es.eigenvalues().real().maxCoeff() < 0.0;
}

SpectrumResult transfer_spectrum(const LinearizedSystem& sys,
                                 const CmcParams& params, const Vec& freqs_hz) {
  validate_freqs(freqs_hz);

  SpectrumResult result;
  result.unstable_warning = !is_stable(sys);
  result.spectrum.freqs_hz = freqs_hz;
  result.spectrum.power.resize(freqs_hz.size());

  using CMat = Eigen::Matrix<std::complex<double>, 8, 8>;
  using CVec = Eigen::Matrix<std::complex<double>, 8, 1>;
  const CMat Jc = sys.jacobian.cast<std::complex<double>>();
  const CVec b = sys.input_vector.cast<std::complex<double>>();
  const std::complex<double> iw(0.0, 1.0);
  const double var_u = params.sigma_u * params.sigma_u;

  for (Eigen::Index i = 0; i < freqs_hz.size(); ++i) {
    CMat A = -Jc;
    const double w = 2.0 * M_PI * freqs_hz[i];
    A.diagonal().array() += iw * w;
    const CVec x = A.partialPivLu().solve(b);
    const std::complex<double> h =
        sys.output_vector.cast<std::complex<double>>().dot(x);
    const double s = var_u * std::norm(h);
    if (!std::isfinite(s)) {
      throw numeric_error("transfer spectrum singular at " +
                          std::to_string(freqs_hz[i]) + " Hz");
    }
    result.spectrum.power[i] = s;
  }
  return result;
}

ForwardResult forward_model(const CmcParams& params, const Vec& field_values,
                            double g7_log_offset, const Vec& freqs_hz) {
  if (field_values.size() == 0) {
    throw config_error("forward model needs at least one channel");
  }
  CmcParams local = params;
  local.g7 = params.g7 * std::exp(g7_log_offset);

  ForwardResult out;
  out.channels.reserve(static_cast<std::size_t>(field_values.size()));
  for (Eigen::Index ch = 0; ch < field_values.size(); ++ch) {
    try {
      const LinearizedSystem sys = linearize(local, field_values[ch]);
      SpectrumResult sr = transfer_spectrum(sys, local, freqs_hz);
      out.any_unstable = out.any_unstable || sr.unstable_warning;
      out.channels.push_back(std::move(sr.spectrum));
    } catch (const config_error& e) {
      throw config_error("channel " + std::to_string(ch) + ": " + e.what());
    } catch (const numeric_error& e) {
      throw numeric_error("channel " + std::to_string(ch) + ": " + e.what());
    }
  }
  return out;
}

} // namespace specfield::cmc
