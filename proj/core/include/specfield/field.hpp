#pragma once

#include <functional>
#include <span>
#include <vector>

#include "specfield/common.hpp"

namespace specfield::field {

enum class DomainKind { interval, rectangle };

/// Spatial domain carrying the diffusion coefficient. Lengths are in
/// normalized spatial units; `Ly` is ignored for intervals.
struct DomainSpec {
  DomainKind kind = DomainKind::interval;
  double Lx = 1.0;
  double Ly = 1.0;
  double alpha = 1.0;

  void validate() const;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// One Dirichlet sine mode. `m`, `ky` are zero on interval domains.
/// decay_rate = alpha^2 * (kx^2 + ky^2), the exponential rate of the mode
/// coefficient under pure diffusion.
struct Mode {
  int n = 0;
  int m = 0;
  double kx = 0.0;
  double ky = 0.0;
  double decay_rate = 0.0;
};

struct EigenBasis {
  std::vector<Mode> modes;
  DomainSpec domain;

  int size() const { return static_cast<int>(modes.size()); }
  Vec decay_rates() const;
};

/// Mode coefficients in log-gain units, ordered as basis.modes.
struct FieldCoeffs {
  Vec c;
};

/// Time-dependent Dirichlet data and initial condition for the 1D
/// boundary-driven solver. Callables must be evaluable over the solve
/// horizon (boundary values also slightly outside it, for the finite
/// difference of their derivative).
struct BoundaryDrive {
  std::function<double(double)> phi0;
  std::function<double(double)> phi1;
  std::function<double(double)> f0;
};

/// Values of the analytic series solution on a uniform grid including the
/// endpoints.
struct HeatSolution {
  Vec x;
  Vec u;
};

/// Dirichlet sine modes up to `n_modes` per axis, sorted by decay rate
/// ascending with lexicographic (n, m) tie-break.
EigenBasis build_basis(const DomainSpec& domain, int n_modes);

/// Mode evaluation matrix: rows are points, columns are modes. Throws when
/// a point lies outside the closed domain.
Mat basis_matrix(const EigenBasis& basis, std::span<const Point> points);

/// Field value sum_i c_i phi_i(p) at each point.
Vec evaluate_field(const FieldCoeffs& coeffs, const EigenBasis& basis,
                   std::span<const Point> points);

/// Deterministic diffusion step: c_i <- c_i * exp(-decay_i * dt).
FieldCoeffs propagate_coeffs(const FieldCoeffs& coeffs,
                             const EigenBasis& basis, double dt);

/// Fourier sine coefficients of f0 via composite Simpson quadrature
/// (>= 512 panels per axis).
FieldCoeffs project_initial(const std::function<double(Point)>& f0,
                            const EigenBasis& basis,
                            int panels_per_axis = 512);

/// Series solution of u_t = alpha^2 u_xx on an interval with time-dependent
/// Dirichlet values phi0(t), phi1(t) and initial condition f0.
///
/// The solution splits into the linear-in-x lift
///   omega(x,t) = phi0(t) + (x/L)(phi1(t) - phi0(t))
/// and a homogeneous remainder driven by S(x,t) = -d(omega)/dt, expanded in
/// the sine basis. Boundary-time-derivatives use central differences with
/// step 1e-4 * horizon; the driven integrals use a composite trapezoid with
/// >= 1000 steps, folded with the decaying exponential so no large
/// exponents appear.
HeatSolution solve_heat_timedep(const DomainSpec& domain,
                                const BoundaryDrive& drive,
                                const EigenBasis& basis, double t,
                                int grid_points = 129);

} // namespace specfield::field
