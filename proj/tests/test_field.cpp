#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "specfield/field.hpp"
#include "specfield/quadrature.hpp"

using namespace specfield;
using namespace specfield::field;

namespace {

DomainSpec interval(double L, double alpha = 1.0) {
  DomainSpec d;
  d.kind = DomainKind::interval;
  d.Lx = L;
  d.alpha = alpha;
  return d;
}

DomainSpec rectangle(double Lx, double Ly, double alpha = 1.0) {
  DomainSpec d;
  d.kind = DomainKind::rectangle;
  d.Lx = Lx;
  d.Ly = Ly;
  d.alpha = alpha;
  return d;
}

} // namespace

TEST_CASE("basis on the pi interval: integer wavenumbers, quadratic decay") {
  const auto basis = build_basis(interval(M_PI), 3);
  REQUIRE(basis.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(basis.modes[i].kx == doctest::Approx(i + 1.0).epsilon(1e-14));
    CHECK(basis.modes[i].decay_rate ==
          doctest::Approx((i + 1.0) * (i + 1.0)).epsilon(1e-14));
  }
}

TEST_CASE("alpha = 0 freezes the field") {
  const auto basis = build_basis(interval(2.7, 0.0), 2);
  CHECK(basis.modes[0].decay_rate == 0.0);
  CHECK(basis.modes[1].decay_rate == 0.0);

  FieldCoeffs c{Vec::Ones(2)};
  const auto moved = propagate_coeffs(c, basis, 5.0);
  CHECK((moved.c - c.c).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("square basis decay rates are summed squared wavenumbers") {
  const auto basis = build_basis(rectangle(M_PI, M_PI), 2);
  REQUIRE(basis.size() == 4);
  CHECK(basis.modes[0].decay_rate == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(basis.modes[1].decay_rate == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(basis.modes[2].decay_rate == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(basis.modes[3].decay_rate == doctest::Approx(8.0).epsilon(1e-14));
  // lexicographic tie-break between (1,2) and (2,1)
  CHECK(basis.modes[1].n == 1);
  CHECK(basis.modes[1].m == 2);
  CHECK(basis.modes[2].n == 2);
  CHECK(basis.modes[2].m == 1);
}

TEST_CASE("decay rates are nondecreasing in stored order") {
  for (const auto& dom : {rectangle(1.4, 1.05, 0.05), rectangle(2.0, 0.5)}) {
    const auto basis = build_basis(dom, 4);
    for (int i = 1; i < basis.size(); ++i) {
      CHECK(basis.modes[i].decay_rate >= basis.modes[i - 1].decay_rate);
    }
  }
}

TEST_CASE("basis construction rejects an empty mode count") {
  CHECK_THROWS_AS(build_basis(interval(1.0), 0), config_error);
}

TEST_CASE("field evaluation: zero, single mode, superposition") {
  const auto basis = build_basis(interval(M_PI), 4);

  std::vector<Point> pts;
  for (int i = 0; i <= 100; ++i) {
    pts.push_back({M_PI * i / 100.0, 0.0});
  }

  CHECK(evaluate_field(FieldCoeffs{Vec::Zero(4)}, basis, pts)
            .cwiseAbs()
            .maxCoeff() == 0.0);

  Vec e1 = Vec::Zero(4);
  e1[0] = 1.0;
  const Point mid{M_PI / 2.0, 0.0};
  const Vec v = evaluate_field(FieldCoeffs{e1}, basis, std::vector<Point>{mid});
  CHECK(v[0] == doctest::Approx(1.0).epsilon(1e-14));

  std::mt19937_64 rng(99);
  std::normal_distribution<double> n01;
  Vec c(4);
  for (int i = 0; i < 4; ++i) {
    c[i] = n01(rng);
  }
  const Vec total = evaluate_field(FieldCoeffs{c}, basis, pts);
  Vec sum = Vec::Zero(static_cast<Eigen::Index>(pts.size()));
  for (int i = 0; i < 4; ++i) {
    Vec ei = Vec::Zero(4);
    ei[i] = c[i];
    sum += evaluate_field(FieldCoeffs{ei}, basis, pts);
  }
  CHECK((total - sum).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("field evaluation rejects out-of-domain points") {
  const auto basis = build_basis(interval(1.0), 2);
  CHECK_THROWS_AS(
      evaluate_field(FieldCoeffs{Vec::Zero(2)}, basis,
                     std::vector<Point>{{1.5, 0.0}}),
      config_error);
  const auto rect = build_basis(rectangle(1.0, 1.0), 2);
  CHECK_THROWS_AS(
      evaluate_field(FieldCoeffs{Vec::Zero(4)}, rect,
                     std::vector<Point>{{0.5, -0.1}}),
      config_error);
}

TEST_CASE("coefficient propagation: closed form and semigroup") {
  const auto basis = build_basis(interval(M_PI), 2); // decay rates 1, 4

  FieldCoeffs c{Vec::Ones(2)};
  const auto same = propagate_coeffs(c, basis, 0.0);
  CHECK((same.c - c.c).cwiseAbs().maxCoeff() == 0.0);

  const auto halved = propagate_coeffs(c, basis, std::log(2.0));
  CHECK(halved.c[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(halved.c[1] == doctest::Approx(0.0625).epsilon(1e-14));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dt(0.0, 2.0);
  for (int k = 0; k < 20; ++k) {
    const double t1 = dt(rng);
    const double t2 = dt(rng);
    const auto two_steps =
        propagate_coeffs(propagate_coeffs(c, basis, t1), basis, t2);
    const auto one_step = propagate_coeffs(c, basis, t1 + t2);
    CHECK((two_steps.c - one_step.c).cwiseAbs().maxCoeff() < 1e-12);
  }

  CHECK_THROWS_AS(propagate_coeffs(c, basis, -0.1), config_error);
}

TEST_CASE("projection: orthogonality of sine modes") {
  const double L = 1.3;
  const auto basis = build_basis(interval(L), 6);
  for (int k = 0; k < 6; ++k) {
    const double kx = basis.modes[k].kx;
    const auto c = project_initial(
        [kx](Point p) { return std::sin(kx * p.x); }, basis);
    for (int j = 0; j < 6; ++j) {
      CHECK(std::abs(c.c[j] - (j == k ? 1.0 : 0.0)) < 1e-8);
    }
  }

  const auto zero = project_initial([](Point) { return 0.0; }, basis);
  CHECK(zero.c.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("projection of x(L-x): frozen closed-form coefficients") {
  // c_n = 8/(n pi)^3 for odd n, 0 for even n (L = 1), verified against
  // high-precision quadrature.
  const auto basis = build_basis(interval(1.0), 4);
  const auto c = project_initial([](Point p) { return p.x * (1.0 - p.x); },
                                 basis);
  CHECK(std::abs(c.c[0] - 0.25801227546559591) < 1e-8);
  CHECK(std::abs(c.c[1]) < 1e-10);
  CHECK(std::abs(c.c[2] - 0.0095560102024294783) < 1e-8);
  CHECK(std::abs(c.c[3]) < 1e-10);
}

TEST_CASE("projection on a rectangle: 2D orthogonality") {
  const auto basis = build_basis(rectangle(1.2, 0.8), 2);
  const auto& mode = basis.modes[2];
  const auto c = project_initial(
      [&](Point p) {
        return std::sin(mode.kx * p.x) * std::sin(mode.ky * p.y);
      },
      basis);
  for (int j = 0; j < basis.size(); ++j) {
    CHECK(std::abs(c.c[j] - (j == 2 ? 1.0 : 0.0)) < 1e-8);
  }
}

namespace {

BoundaryDrive zero_drive() {
  BoundaryDrive d;
  d.phi0 = [](double) { return 0.0; };
  d.phi1 = [](double) { return 0.0; };
  d.f0 = [](double) { return 0.0; };
  return d;
}

} // namespace

TEST_CASE("heat solver: single sine mode decays analytically") {
  const auto dom = interval(1.0, 1.0);
  const auto basis = build_basis(dom, 8);
  auto drive = zero_drive();
  drive.f0 = [](double x) { return std::sin(M_PI * x); };

  const double t = 0.1;
  const auto sol = solve_heat_timedep(dom, drive, basis, t);
  double max_err = 0.0;
  for (Eigen::Index i = 0; i < sol.x.size(); ++i) {
    const double exact =
        std::exp(-M_PI * M_PI * t) * std::sin(M_PI * sol.x[i]);
    max_err = std::max(max_err, std::abs(sol.u[i] - exact));
  }
  CHECK(max_err < 1e-4);
}

TEST_CASE("heat solver: constant boundaries and initial condition") {
  const auto dom = interval(1.0, 1.0);
  const auto basis = build_basis(dom, 8);
  BoundaryDrive d;
  d.phi0 = [](double) { return 1.0; };
  d.phi1 = [](double) { return 1.0; };
  d.f0 = [](double) { return 1.0; };
  for (double t : {0.0, 0.3, 2.0}) {
    const auto sol = solve_heat_timedep(dom, d, basis, t);
    CHECK((sol.u.array() - 1.0).abs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("heat solver rejects rectangles and negative times") {
  const auto rect = rectangle(1.0, 1.0);
  const auto basis = build_basis(rect, 2);
  CHECK_THROWS_AS(solve_heat_timedep(rect, zero_drive(), basis, 0.1),
                  config_error);
  const auto dom = interval(1.0);
  const auto ib = build_basis(dom, 2);
  CHECK_THROWS_AS(solve_heat_timedep(dom, zero_drive(), ib, -1.0),
                  config_error);
}

TEST_CASE("energy decay of the homogeneous solution") {
  const auto dom = interval(1.0, 1.0);
  const auto basis = build_basis(dom, 16);
  auto drive = zero_drive();
  drive.f0 = [](double x) {
    return x * (1.0 - x) + 0.3 * std::sin(3.0 * M_PI * x);
  };
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 20; ++k) {
    const double t = 0.002 * k;
    const auto sol = solve_heat_timedep(dom, drive, basis, t);
    const double norm = sol.u.norm();
    CHECK(norm <= prev + 1e-12);
    prev = norm;
  }
}

TEST_CASE("truncation convergence for a smooth initial condition") {
  const auto dom = interval(1.0, 1.0);
  auto drive = zero_drive();
  drive.f0 = [](double x) { return x * (1.0 - x); };
  const double t = 0.05;
  const auto coarse = solve_heat_timedep(dom, drive, build_basis(dom, 8), t);
  const auto fine = solve_heat_timedep(dom, drive, build_basis(dom, 32), t);
  CHECK((coarse.u - fine.u).cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("mode order never changes field values") {
  const auto basis = build_basis(rectangle(1.3, 0.9, 0.4), 3);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n01;
  Vec c(basis.size());
  for (int i = 0; i < basis.size(); ++i) {
    c[i] = n01(rng);
  }

  EigenBasis shuffled = basis;
  std::vector<int> perm(static_cast<std::size_t>(basis.size()));
  for (std::size_t i = 0; i < perm.size(); ++i) {
    perm[i] = static_cast<int>(i);
  }
  std::shuffle(perm.begin(), perm.end(), rng);
  Vec c_perm(basis.size());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    shuffled.modes[i] = basis.modes[static_cast<std::size_t>(perm[i])];
    c_perm[static_cast<Eigen::Index>(i)] = c[perm[i]];
  }

  std::vector<Point> pts;
  std::uniform_real_distribution<double> ux(0.0, 1.3);
  std::uniform_real_distribution<double> uy(0.0, 0.9);
  for (int i = 0; i < 50; ++i) {
    pts.push_back({ux(rng), uy(rng)});
  }
  const Vec a = evaluate_field(FieldCoeffs{c}, basis, pts);
  const Vec b = evaluate_field(FieldCoeffs{c_perm}, shuffled, pts);
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("simpson rule integrates polynomials") {
  // exact for cubics
  const double v = simpson([](double x) { return x * x * x; }, 0.0, 2.0, 8);
  CHECK(v == doctest::Approx(4.0).epsilon(1e-14));
  const Vec w = simpson_weights(0.0, 1.0, 8);
  CHECK(w.sum() == doctest::Approx(1.0).epsilon(1e-14));
}
