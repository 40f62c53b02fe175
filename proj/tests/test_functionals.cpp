#include "doctest.h"

#include <cmath>

#include "functionals.hpp"
#include "solver.hpp"

using namespace mw;

namespace {
constexpr double kPi = 3.14159265358979323846;
const double kHeteroclinic = 2.0 * std::sqrt(2.0) / 3.0;  // analytic GL constant

Field tanh_interface_field(double eps, double h, double angle_rad = 0.0) {
  Field f;
  f.grid = Grid::make_rectangle(0, 0, 1, 1, h);
  f.k = 1;
  f.epsilon = eps;
  f.values.assign(f.grid.nnodes(), 0.0);
  double nx = -std::sin(angle_rad), ny = std::cos(angle_rad);
  for (int j = 0; j <= f.grid.ny; ++j)
    for (int i = 0; i <= f.grid.nx; ++i) {
      double d = (f.grid.x(i) - 0.5) * nx + (f.grid.y(j) - 0.5) * ny;
      f.at(i, j)[0] = std::tanh(d / (std::sqrt(2.0) * eps));
    }
  return f;
}

Field random_smooth_field(double h, double eps, int k, uint64_t seed) {
  Field f;
  f.grid = Grid::make_rectangle(0, 0, 1, 1, h);
  f.k = k;
  f.epsilon = eps;
  f.values.assign(size_t(f.grid.nnodes()) * k, 0.0);
  Rng rng(seed);
  std::vector<double> a(6), b(6), c(6);
  for (int m = 0; m < 6; ++m) {
    a[m] = rng.uniform(-1, 1);
    b[m] = rng.uniform(0, 3);
    c[m] = rng.uniform(0, 3);
  }
  for (int j = 0; j <= f.grid.ny; ++j)
    for (int i = 0; i <= f.grid.nx; ++i)
      for (int cc = 0; cc < k; ++cc) {
        double x = f.grid.x(i), y = f.grid.y(j), v = 0.0;
        for (int m = 0; m < 6; ++m)
          v += a[m] * std::sin(b[m] * kPi * x + cc) * std::cos(c[m] * kPi * y - cc);
        f.at(i, j)[cc] = 0.5 * v;
      }
  return f;
}

}  // namespace

TEST_CASE("heteroclinic quadrature reproduces 2 sqrt(2) / 3") {
  auto p = make_builtin_potential("gl-scalar");
  CHECK(heteroclinic_energy(*p, 0, 1) == doctest::Approx(kHeteroclinic).epsilon(1e-6));
}

TEST_CASE("tanh interface energy per unit length") {
  auto p = make_builtin_potential("gl-scalar");
  const double eps = 0.05;
  Field f = tanh_interface_field(eps, eps / 8);
  RegionEnergy e = energy_on_region(f, *p, region_all());
  CHECK(e.energy == doctest::Approx(kHeteroclinic).epsilon(0.03));
}

TEST_CASE("energy additivity over a partition is exact") {
  auto p = make_builtin_potential("gl-scalar");
  Field f = tanh_interface_field(0.1, 0.1 / 8);
  EnergyDensity d = energy_density(f, *p);
  double full = integrate_nodal(f.grid, d.e, region_all());
  double left = integrate_nodal(f.grid, d.e, [](double x, double) { return x < 0.37; });
  double right = integrate_nodal(f.grid, d.e, [](double x, double) { return x >= 0.37; });
  CHECK(full == doctest::Approx(left + right).epsilon(1e-12));
}

TEST_CASE("pointwise invariants J <= e and |omega| <= 2 eps |grad u|^2 are exact") {
  auto p = make_builtin_potential("gl-scalar");
  for (uint64_t s : {1ull, 2ull, 3ull}) {
    Field f = random_smooth_field(1.0 / 48, 0.07, 1, s);
    auto rep = pointwise_invariants(f, *p);
    CHECK(rep.nodes > 0);
    CHECK(rep.j_violations == 0);
    CHECK(rep.hopf_violations == 0);
  }
  auto p3 = make_builtin_potential("triple-well-2d");
  Field f = random_smooth_field(1.0 / 48, 0.07, 2, 9);
  auto rep = pointwise_invariants(f, *p3);
  CHECK(rep.j_violations == 0);
  CHECK(rep.hopf_violations == 0);
}

TEST_CASE("stress tensor: trace-free part and decomposition hold exactly") {
  auto p = make_builtin_potential("gl-scalar");
  Field f = random_smooth_field(1.0 / 32, 0.1, 1, 4);
  StressTensor st = stress_tensor(f, *p);
  for (size_t n = 0; n < st.t11.size(); ++n) {
    // trace(T) = t11 + t22 with t22 = -t11: exactly zero in floating point
    CHECK(st.t11[n] + (-st.t11[n]) == 0.0);
    // A is represented as T + (V/eps) Id, so the decomposition is bitwise
    CHECK(st.a(int(n), 0, 0) == st.t11[n] + st.v_over_eps[n]);
    CHECK(st.a(int(n), 1, 1) == -st.t11[n] + st.v_over_eps[n]);
    CHECK(st.a(int(n), 0, 1) == st.t12[n]);
    CHECK(st.a(int(n), 1, 0) == st.t12[n]);
  }
}

TEST_CASE("hopf differential of a y-only field is real and negative") {
  Field f = tanh_interface_field(0.1, 0.1 / 8);  // depends on x2 only
  HopfField h = hopf_differential(f);
  double worst_im = 0.0, min_re = 0.0;
  for (int j = 1; j < f.grid.ny; ++j)
    for (int i = 1; i < f.grid.nx; ++i) {
      size_t n = size_t(f.grid.idx(i, j));
      worst_im = std::max(worst_im, std::fabs(h.im[n]));
      min_re = std::min(min_re, h.re[n]);
    }
  CHECK(worst_im == 0.0);  // u_x1 = 0 identically on the grid
  CHECK(min_re < 0.0);
  // omega = -eps |u_x2|^2
  auto gr = gradient(f);
  for (int j = 1; j < f.grid.ny; ++j)
    for (int i = 1; i < f.grid.nx; ++i) {
      size_t n = size_t(f.grid.idx(i, j));
      CHECK(h.re[n] == doctest::Approx(-f.epsilon * mw::sq(gr[n * 2 + 1])).epsilon(1e-12));
    }
}

TEST_CASE("hopf rotation covariance omega' = exp(-2 i theta) omega") {
  // analytic field evaluated in two frames; compare at common points
  const double th = kPi / 6.0;
  auto base = [](double x, double y, double* out) {
    out[0] = std::sin(2.0 * x) * std::cos(y) + 0.4 * x * y;
    out[1] = 0.3 * std::cos(3.0 * y) + x * x * 0.2;
  };
  const double h = 1.0 / 96;
  Field u, v;  // u in original coordinates, v(x) = u(R x) in rotated ones
  u.grid = Grid::make_disk(DiskSpec{0, 0, 1.0}, h);
  v.grid = u.grid;
  u.k = v.k = 2;
  u.epsilon = v.epsilon = 0.3;
  u.values.assign(size_t(u.grid.nnodes()) * 2, 0.0);
  v.values.assign(size_t(u.grid.nnodes()) * 2, 0.0);
  double ct = std::cos(th), st = std::sin(th);
  for (int j = 0; j <= u.grid.ny; ++j)
    for (int i = 0; i <= u.grid.nx; ++i) {
      double x = u.grid.x(i), y = u.grid.y(j);
      base(x, y, u.at(i, j));
      // rotate the basis by theta: the map in primed coordinates is
      // v(x') = u(R(-theta) x')
      base(ct * x + st * y, -st * x + ct * y, v.at(i, j));
    }
  HopfField hu = hopf_differential(u);
  HopfField hv = hopf_differential(v);
  double c2 = std::cos(2.0 * th), s2 = std::sin(2.0 * th);
  double worst = 0.0, scale = 0.0;
  for (int j = 0; j <= u.grid.ny; ++j)
    for (int i = 0; i <= u.grid.nx; ++i) {
      if (u.grid.kind(i, j) != NodeKind::Interior) continue;
      double x = u.grid.x(i), y = u.grid.y(j);
      double px = ct * x + st * y, py = -st * x + ct * y;
      if (px * px + py * py > 0.8 * 0.8) continue;
      double re, im;
      re = interp_scalar(u.grid, hu.re, px, py);
      im = interp_scalar(u.grid, hu.im, px, py);
      size_t n = size_t(u.grid.idx(i, j));
      double exp_re = c2 * re + s2 * im;   // exp(-2 i theta) * omega
      double exp_im = -s2 * re + c2 * im;
      worst = std::max({worst, std::fabs(hv.re[n] - exp_re), std::fabs(hv.im[n] - exp_im)});
      scale = std::max({scale, std::fabs(re), std::fabs(im)});
    }
  CHECK(worst <= 0.01 * scale);
}

TEST_CASE("discrepancy vanishes along the 1D heteroclinic profile") {
  auto p = make_builtin_potential("gl-scalar");
  const double eps = 0.1;
  Field f = tanh_interface_field(eps, eps / 16);
  EnergyDensity d = energy_density(f, *p);
  double peak_e = 0.0, worst_xi = 0.0;
  for (int j = 2; j < f.grid.ny - 1; ++j)
    for (int i = 2; i < f.grid.nx - 1; ++i) {
      size_t n = size_t(f.grid.idx(i, j));
      peak_e = std::max(peak_e, d.e[n]);
      worst_xi = std::max(worst_xi, std::fabs(d.xi[n]));
    }
  CHECK(worst_xi * eps <= 1e-2 * peak_e);
}

TEST_CASE("pohozaev at a well constant is identically zero") {
  auto p = make_builtin_potential("gl-scalar");
  Field f;
  f.grid = Grid::make_disk(DiskSpec{0, 0, 1.0}, 1.0 / 32);
  f.k = 1;
  f.epsilon = 0.1;
  f.values.assign(f.grid.nnodes(), 1.0);
  auto r = pohozaev_residual(f, *p, DiskSpec{0, 0, 0.5});
  CHECK(r.lhs == doctest::Approx(0.0));
  CHECK(r.rhs == doctest::Approx(0.0));
  auto q = pohozaev_inequality_check(f, *p, DiskSpec{0, 0, 0.5});
  CHECK(q.pass);
}

TEST_CASE("monotonicity profile of a constant field vanishes") {
  auto p = make_builtin_potential("gl-scalar");
  Field f;
  f.grid = Grid::make_disk(DiskSpec{0, 0, 1.0}, 1.0 / 32);
  f.k = 1;
  f.epsilon = 0.1;
  f.values.assign(f.grid.nnodes(), -1.0);
  auto rows = monotonicity_profile(f, *p, 0, 0, {0.2, 0.4, 0.6});
  for (auto& r : rows) CHECK(r.e_over_r == doctest::Approx(0.0));
}

TEST_CASE("plateau profile properties") {
  const double mu0 = 0.06;
  CHECK(plateau_phi(0.0, mu0) == 0.0);
  CHECK(plateau_phi(0.5 * mu0, mu0) == doctest::Approx(0.5 * mu0));
  CHECK(plateau_phi(mu0, mu0) == doctest::Approx(0.75 * mu0));
  CHECK(plateau_phi(5 * mu0, mu0) == doctest::Approx(0.75 * mu0));
  double prev = -1.0;
  for (int m = 0; m <= 200; ++m) {
    double t = 1.5 * mu0 * m / 200;
    double v = plateau_phi(t, mu0);
    CHECK(v >= prev - 1e-15);
    CHECK(plateau_phi_prime(t, mu0) <= 1.0 + 1e-15);
    CHECK(plateau_phi_prime(t, mu0) >= 0.0);
    prev = v;
  }
}

TEST_CASE("modica-mortola maps: trivial cases and bv bound on the interface") {
  auto p = make_builtin_potential("gl-scalar");
  validate_hypotheses(*p, 2000);
  auto c = derive_constants(*p);

  Field at_well;
  at_well.grid = Grid::make_rectangle(0, 0, 1, 1, 1.0 / 16);
  at_well.k = 1;
  at_well.epsilon = 0.1;
  at_well.values.assign(at_well.grid.nnodes(), 1.0);
  auto w = modica_mortola_map(at_well, *p, c, 1);
  for (int j = 0; j <= at_well.grid.ny; ++j)
    for (int i = 0; i <= at_well.grid.nx; ++i) CHECK(w[at_well.grid.idx(i, j)] == 0.0);

  // far from well 0 everywhere: plateau, gradient identically zero
  auto rep0 = modica_mortola_check(at_well, *p, c, 0);
  CHECK(rep0.plateau_grad_violations == 0);
  CHECK(rep0.bv_violations == 0);

  const double eps = 0.05;
  Field f = tanh_interface_field(eps, eps / 8);
  auto rep = modica_mortola_check(f, *p, c, 1);
  CHECK(rep.nodes > 0);
  CHECK(rep.bv_violations <= rep.nodes / 100);
  CHECK(rep.chain_rule_violations <= rep.nodes / 100);
}

TEST_CASE("stress divergence residual: zero at a well, nonzero for a random field") {
  auto p = make_builtin_potential("gl-scalar");
  Field f;
  f.grid = Grid::make_rectangle(0, 0, 1, 1, 1.0 / 32);
  f.k = 1;
  f.epsilon = 0.1;
  f.values.assign(f.grid.nnodes(), 1.0);
  auto presets = test_field_presets(f.grid.domain);
  REQUIRE(presets.size() == 5);
  for (const auto& X : presets) {
    auto r = stress_divergence_residual(f, *p, X);
    CHECK(r.real_form == doctest::Approx(0.0));
    CHECK(r.complex_form == doctest::Approx(0.0));
  }
  Field g = random_smooth_field(1.0 / 32, 0.1, 1, 21);
  double any = 0.0;
  for (const auto& X : presets) {
    auto r = stress_divergence_residual(g, *p, X);
    any = std::max(any, std::fabs(r.real_form) / std::max(r.scale, 1e-300));
  }
  CHECK(any > 0.01);  // a non-solution really is detected
}

TEST_CASE("scaling relation E(u, D(r)) = r E(u~, D(1))") {
  auto p = make_builtin_potential("gl-scalar");
  const double eps = 0.05;
  Field f = tanh_interface_field(eps, eps / 8);
  DiskSpec d{0.5, 0.5, 0.4};
  RegionEnergy before = energy_on_disk(f, *p, d);
  Field s = rescale_to_unit(f, d);
  RegionEnergy after = energy_on_region(s, *p, region_disk(DiskSpec{0, 0, 1.0}));
  CHECK(before.energy == doctest::Approx(d.r * after.energy).epsilon(0.02));
  CHECK(before.vmass == doctest::Approx(d.r * after.vmass).epsilon(0.02));
}
