#include "specfield/field.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "specfield/quadrature.hpp"

namespace specfield {

double simpson(const std::function<double(double)>& f, double a, double b,
               int panels) {
  if (panels < 1) {
    throw config_error("simpson: panels must be >= 1");
  }
  const int n = 2 * panels; // subintervals
  const double h = (b - a) / n;
  double sum = f(a) + f(b);
  for (int i = 1; i < n; ++i) {
    sum += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  }
  return sum * h / 3.0;
}

Vec simpson_weights(double a, double b, int subintervals) {
  if (subintervals < 2 || subintervals % 2 != 0) {
    throw config_error("simpson_weights: subinterval count must be even");
  }
  const double h = (b - a) / subintervals;
  Vec w(subintervals + 1);
  w[0] = 1.0;
  w[subintervals] = 1.0;
  for (int i = 1; i < subintervals; ++i) {
    w[i] = (i % 2 == 1) ? 4.0 : 2.0;
  }
  return w * (h / 3.0);
}

} // namespace specfield

namespace specfield::field {

void DomainSpec::validate() const {
  if (!std::isfinite(Lx) || Lx <= 0.0) {
    throw config_error("domain Lx must be finite and > 0");
  }
  if (kind == DomainKind::rectangle && (!std::isfinite(Ly) || Ly <= 0.0)) {
    throw config_error("domain Ly must be finite and > 0");
  }
  if (!std::isfinite(alpha) || alpha < 0.0) {
    throw config_error("diffusion coefficient alpha must be >= 0");
  }
}

Vec EigenBasis::decay_rates() const {
  Vec lam(size());
  for (int i = 0; i < size(); ++i) {
    lam[i] = modes[static_cast<std::size_t>(i)].decay_rate;
  }
  return lam;
}

EigenBasis build_basis(const DomainSpec& domain, int n_modes) {
  domain.validate();
  if (n_modes < 1) {
    throw config_error("basis needs at least one mode per axis");
  }

  EigenBasis basis;
  basis.domain = domain;
  const double a2 = domain.alpha * domain.alpha;

  if (domain.kind == DomainKind::interval) {
    for (int n = 1; n <= n_modes; ++n) {
      Mode mode;
      mode.n = n;
      mode.kx = n * M_PI / domain.Lx;
      mode.decay_rate = a2 * mode.kx * mode.kx;
      basis.modes.push_back(mode);
    }
  } else {
    for (int n = 1; n <= n_modes; ++n) {
      for (int m = 1; m <= n_modes; ++m) {
        Mode mode;
        mode.n = n;
        mode.m = m;
        mode.kx = n * M_PI / domain.Lx;
        mode.ky = m * M_PI / domain.Ly;
        mode.decay_rate = a2 * (mode.kx * mode.kx + mode.ky * mode.ky);
        basis.modes.push_back(mode);
      }
    }
  }

  std::stable_sort(basis.modes.begin(), basis.modes.end(),
                   [](const Mode& a, const Mode& b) {
                     return std::tie(a.decay_rate, a.n, a.m) <
                            std::tie(b.decay_rate, b.n, b.m);
                   });
  return basis;
}

namespace {

void check_in_domain(const DomainSpec& d, const Point& p) {
  const bool ok_x = p.x >= 0.0 && p.x <= d.Lx && std::isfinite(p.x);
  const bool ok_y = d.kind == DomainKind::interval ||
                    (p.y >= 0.0 && p.y <= d.Ly && std::isfinite(p.y));
  if (!ok_x || !ok_y) {
    throw config_error("point (" + std::to_string(p.x) + ", " +
                       std::to_string(p.y) + ") lies outside the domain");
  }
}

double eval_mode(const DomainSpec& d, const Mode& mode, const Point& p) {
  double v = std::sin(mode.kx * p.x);
  if (d.kind == DomainKind::rectangle) {
    v *= std::sin(mode.ky * p.y);
  }
  return v;
}

} // namespace

Mat basis_matrix(const EigenBasis& basis, std::span<const Point> points) {
  Mat phi(static_cast<Eigen::Index>(points.size()), basis.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    check_in_domain(basis.domain, points[i]);
    for (int j = 0; j < basis.size(); ++j) {
      phi(static_cast<Eigen::Index>(i), j) =
          eval_mode(basis.domain, basis.modes[static_cast<std::size_t>(j)],
                    points[i]);
    }
  }
  return phi;
}

Vec evaluate_field(const FieldCoeffs& coeffs, const EigenBasis& basis,
                   std::span<const Point> points) {
  if (coeffs.c.size() != basis.size()) {
    throw config_error("coefficient count does not match basis size");
  }
  return basis_matrix(basis, points) * coeffs.c;
}

FieldCoeffs propagate_coeffs(const FieldCoeffs& coeffs,
                             const EigenBasis& basis, double dt) {
  if (coeffs.c.size() != basis.size()) {
    throw config_error("coefficient count does not match basis size");
  }
  if (!(dt >= 0.0)) {
    throw config_error("propagation dt must be >= 0");
  }
  FieldCoeffs out;
  out.c = coeffs.c.cwiseProduct((-dt * basis.decay_rates().array()).exp().matrix());
  return out;
}

FieldCoeffs project_initial(const std::function<double(Point)>& f0,
                            const EigenBasis& basis, int panels_per_axis) {
  const DomainSpec& d = basis.domain;
  const int n = 2 * std::max(panels_per_axis, 512); // subintervals per axis

  FieldCoeffs out;
  out.c.resize(basis.size());

  if (d.kind == DomainKind::interval) {
    const Vec w = simpson_weights(0.0, d.Lx, n);
    Vec fv(n + 1);
    for (int i = 0; i <= n; ++i) {
      const double x = d.Lx * i / n;
      fv[i] = f0(Point{x, 0.0});
      if (!std::isfinite(fv[i])) {
        throw numeric_error("initial condition not finite at x=" +
                            std::to_string(x));
      }
    }
    for (int j = 0; j < basis.size(); ++j) {
      const Mode& mode = basis.modes[static_cast<std::size_t>(j)];
      double acc = 0.0;
      for (int i = 0; i <= n; ++i) {
        acc += w[i] * fv[i] * std::sin(mode.kx * (d.Lx * i / n));
      }
      out.c[j] = 2.0 / d.Lx * acc;
    }
    return out;
  }

  const Vec wx = simpson_weights(0.0, d.Lx, n);
  const Vec wy = simpson_weights(0.0, d.Ly, n);
  Mat fv(n + 1, n + 1);
  for (int i = 0; i <= n; ++i) {
    const double x = d.Lx * i / n;
    for (int j = 0; j <= n; ++j) {
      const double y = d.Ly * j / n;
      fv(i, j) = f0(Point{x, y});
      if (!std::isfinite(fv(i, j))) {
        throw numeric_error("initial condition not finite at (" +
                            std::to_string(x) + ", " + std::to_string(y) +
                            ")");
      }
    }
  }
  // Separable weights: accumulate along y first, then x, per mode.
  for (int k = 0; k < basis.size(); ++k) {
    const Mode& mode = basis.modes[static_cast<std::size_t>(k)];
    Vec sy(n + 1);
    for (int j = 0; j <= n; ++j) {
      sy[j] = wy[j] * std::sin(mode.ky * (d.Ly * j / n));
    }
    const Vec row = fv * sy; // integral over y for each x node
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
      acc += wx[i] * std::sin(mode.kx * (d.Lx * i / n)) * row[i];
    }
    out.c[k] = 4.0 / (d.Lx * d.Ly) * acc;
  }
  return out;
}

HeatSolution solve_heat_timedep(const DomainSpec& domain,
                                const BoundaryDrive& drive,
                                const EigenBasis& basis, double t,
                                int grid_points) {
  domain.validate();
  if (domain.kind != DomainKind::interval) {
    throw config_error(
        "time-dependent boundary solver supports interval domains only");
  }
  if (!(t >= 0.0)) {
    throw config_error("solve time must be >= 0");
  }
  const int nx = std::max(grid_points, 128);
  const double L = domain.Lx;

  const double p0_t = drive.phi0(t);
  const double p1_t = drive.phi1(t);

  // sine coefficients of the shifted initial condition f0 - omega(., 0)
  const double p0_0 = drive.phi0(0.0);
  const double p1_0 = drive.phi1(0.0);
  FieldCoeffs c0 = project_initial(
      [&](Point p) {
        const double om0 = p0_0 + p.x / L * (p1_0 - p0_0);
        return drive.f0(p.x) - om0;
      },
      basis);

  const int n_modes = basis.size();
  Vec coeff = Vec::Zero(n_modes);

  if (t > 0.0) {
    // Per-mode spatial integrals of the lift: A_n = int sin(k x) dx,
    // B_n = int (x/L) sin(k x) dx, Simpson on 512 panels.
    Vec A(n_modes), B(n_modes);
    for (int j = 0; j < n_modes; ++j) {
      const double k = basis.modes[static_cast<std::size_t>(j)].kx;
      A[j] = simpson([&](double x) { return std::sin(k * x); }, 0.0, L, 512);
      B[j] = simpson([&](double x) { return x / L * std::sin(k * x); }, 0.0,
                     L, 512);
    }

    const int n_steps = 1000;
    const double h = 1e-4 * t;
    const double dtau = t / n_steps;

    // S_n(tau) = -(2/L) [phi0'(tau) A_n + (phi1'(tau) - phi0'(tau)) B_n];
    // the trapezoid integrand carries exp(-lambda (t - tau)) so no large
    // exponents appear for high modes.
    Vec integral = Vec::Zero(n_modes);
    for (int s = 0; s <= n_steps; ++s) {
      const double tau = s * dtau;
      const double d0 = (drive.phi0(tau + h) - drive.phi0(tau - h)) / (2 * h);
      const double d1 = (drive.phi1(tau + h) - drive.phi1(tau - h)) / (2 * h);
      const double wt = (s == 0 || s == n_steps) ? 0.5 * dtau : dtau;
      for (int j = 0; j < n_modes; ++j) {
        const double lam =
            basis.modes[static_cast<std::size_t>(j)].decay_rate;
        const double Sn = -2.0 / L * (d0 * A[j] + (d1 - d0) * B[j]);
        integral[j] += wt * Sn * std::exp(-lam * (t - tau));
      }
    }
    for (int j = 0; j < n_modes; ++j) {
      const double lam = basis.modes[static_cast<std::size_t>(j)].decay_rate;
      coeff[j] = integral[j] + c0.c[j] * std::exp(-lam * t);
    }
  } else {
    coeff = c0.c;
  }

  HeatSolution sol;
  sol.x.resize(nx);
  sol.u.resize(nx);
  for (int i = 0; i < nx; ++i) {
    const double x = L * i / (nx - 1);
    double u = p0_t + x / L * (p1_t - p0_t);
    for (int j = 0; j < n_modes; ++j) {
      u += coeff[j] *
           std::sin(basis.modes[static_cast<std::size_t>(j)].kx * x);
    }
    sol.x[i] = x;
    sol.u[i] = u;
    if (!std::isfinite(u)) {
      throw numeric_error("heat solution not finite at x=" +
                          std::to_string(x));
    }
  }
  return sol;
}

} // namespace specfield::field
