#include "doctest.h"

#include <cmath>
#include <fstream>

#include "functionals.hpp"
#include "grid.hpp"

using namespace mw;

namespace {
constexpr double kPi = 3.14159265358979323846;

Field scalar_field_on_rect(double h, const std::function<double(double, double)>& fn,
                           double eps = 0.1) {
  Field f;
  f.grid = Grid::make_rectangle(0, 0, 1, 1, h);
  f.k = 1;
  f.epsilon = eps;
  f.values.assign(f.grid.nnodes(), 0.0);
  for (int j = 0; j <= f.grid.ny; ++j)
    for (int i = 0; i <= f.grid.nx; ++i) f.at(i, j)[0] = fn(f.grid.x(i), f.grid.y(j));
  return f;
}

}  // namespace

TEST_CASE("laplacian is exact on quadratics and zero on constants") {
  Field f = scalar_field_on_rect(1.0 / 16, [](double x, double) { return x * x; });
  auto lap = laplacian(f);
  for (int j = 1; j < f.grid.ny; ++j)
    for (int i = 1; i < f.grid.nx; ++i)
      CHECK(lap[f.grid.idx(i, j)] == doctest::Approx(2.0).epsilon(1e-9));

  Field c = scalar_field_on_rect(1.0 / 16, [](double, double) { return 3.5; });
  auto lc = laplacian(c);
  for (int j = 1; j < c.grid.ny; ++j)
    for (int i = 1; i < c.grid.nx; ++i) CHECK(lc[c.grid.idx(i, j)] == doctest::Approx(0.0));
}

TEST_CASE("laplacian converges at second order on sin sin") {
  auto exact = [](double x, double y) { return std::sin(kPi * x) * std::sin(kPi * y); };
  double errs[2];
  double hs[2] = {1.0 / 32, 1.0 / 64};
  for (int m = 0; m < 2; ++m) {
    Field f = scalar_field_on_rect(hs[m], exact);
    auto lap = laplacian(f);
    double err = 0.0;
    for (int j = 1; j < f.grid.ny; ++j)
      for (int i = 1; i < f.grid.nx; ++i)
        err = std::max(err, std::fabs(lap[f.grid.idx(i, j)] +
                                      2.0 * kPi * kPi * exact(f.grid.x(i), f.grid.y(j))));
    errs[m] = err;
  }
  // refinement-study oracle: fitted C at the coarse level bounds the fine one
  double C = errs[0] / (hs[0] * hs[0]);
  CHECK(errs[1] <= 1.2 * C * hs[1] * hs[1]);
}

TEST_CASE("gradient of linear fields is exact; tanh profile matches analytic") {
  Field f = scalar_field_on_rect(1.0 / 16, [](double, double y) { return y; });
  auto gr = gradient(f);
  for (int j = 1; j < f.grid.ny; ++j)
    for (int i = 1; i < f.grid.nx; ++i) {
      CHECK(gr[f.grid.idx(i, j) * 2] == doctest::Approx(0.0));
      CHECK(gr[f.grid.idx(i, j) * 2 + 1] == doctest::Approx(1.0).epsilon(1e-12));
    }

  const double eps = 0.1;
  auto prof = [eps](double, double y) { return std::tanh((y - 0.5) / (std::sqrt(2.0) * eps)); };
  Field t = scalar_field_on_rect(eps / 8, prof, eps);
  auto gt = gradient(t);
  double peak = 1.0 / (std::sqrt(2.0) * eps);
  double worst = 0.0;
  for (int j = 1; j < t.grid.ny; ++j)
    for (int i = 1; i < t.grid.nx; ++i) {
      double y = t.grid.y(j);
      double exact = (1.0 - mw::sq(std::tanh((y - 0.5) / (std::sqrt(2.0) * eps)))) /
                     (std::sqrt(2.0) * eps);
      worst = std::max(worst, std::fabs(gt[t.grid.idx(i, j) * 2 + 1] - exact));
    }
  CHECK(worst <= 1e-2 * peak);
}

TEST_CASE("summation by parts: laplacian against compactly supported test") {
  Field u = scalar_field_on_rect(1.0 / 24, [](double x, double y) {
    return std::cos(3 * x) * (y * y - 0.3 * x);
  });
  Field v = scalar_field_on_rect(1.0 / 24, [](double x, double y) {
    double dx = x - 0.5, dy = y - 0.5;
    double r2 = (dx * dx + dy * dy) / (0.4 * 0.4);
    return r2 < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - r2)) : 0.0;
  });
  auto lap = laplacian(u);
  double lhs = 0.0;
  double h2 = u.grid.h * u.grid.h;
  for (int j = 1; j < u.grid.ny; ++j)
    for (int i = 1; i < u.grid.nx; ++i) lhs += lap[u.grid.idx(i, j)] * v.at(i, j)[0] * h2;
  double rhs = -dirichlet_form(u, v);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-11));
}

TEST_CASE("disk mask has a one-cell boundary layer and closed interior") {
  Grid g = Grid::make_disk(DiskSpec{0, 0, 1.0}, 1.0 / 32);
  int interior = 0, boundary = 0;
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i) {
      if (g.kind(i, j) == NodeKind::Interior) {
        ++interior;
        CHECK(g.in_domain(i - 1, j));
        CHECK(g.in_domain(i + 1, j));
        CHECK(g.in_domain(i, j - 1));
        CHECK(g.in_domain(i, j + 1));
      } else if (g.kind(i, j) == NodeKind::Boundary) {
        ++boundary;
      }
    }
  CHECK(interior > 0);
  CHECK(boundary > 0);
  CHECK(boundary < interior);
}

TEST_CASE("rescale_to_unit: constants, identity, and scaled epsilon") {
  Field f;
  f.grid = Grid::make_disk(DiskSpec{0, 0, 1.0}, 1.0 / 32);
  f.k = 2;
  f.epsilon = 0.08;
  f.values.assign(size_t(f.grid.nnodes()) * 2, 0.0);
  f.fill({0.7, -0.3});
  Field s = rescale_to_unit(f, DiskSpec{0.1, -0.2, 0.5});
  CHECK(s.epsilon == doctest::Approx(0.16));
  for (int j = 0; j <= s.grid.ny; ++j)
    for (int i = 0; i <= s.grid.nx; ++i) {
      if (!s.grid.in_domain(i, j)) continue;
      CHECK(s.at(i, j)[0] == doctest::Approx(0.7));
      CHECK(s.at(i, j)[1] == doctest::Approx(-0.3));
    }

  // identity disk: values reproduced up to interpolation
  Field smooth = scalar_field_on_rect(1.0 / 64, [](double x, double y) { return x * y + 0.2 * x; });
  Field id = rescale_to_unit(smooth, DiskSpec{0.5, 0.5, 0.45});
  for (int j = 0; j <= id.grid.ny; ++j)
    for (int i = 0; i <= id.grid.nx; ++i) {
      if (id.grid.kind(i, j) != NodeKind::Interior) continue;
      double px = 0.5 + 0.45 * id.grid.x(i), py = 0.5 + 0.45 * id.grid.y(j);
      CHECK(id.at(i, j)[0] == doctest::Approx(px * py + 0.2 * px).epsilon(1e-3));
    }
  CHECK_THROWS_AS(rescale_to_unit(smooth, DiskSpec{0.9, 0.9, 0.5}), MwError);
}

TEST_CASE("restrict_circle on u = x1") {
  Field f;
  f.grid = Grid::make_disk(DiskSpec{0, 0, 1.3}, 1.0 / 48);
  f.k = 1;
  f.epsilon = 1.0;
  f.values.assign(f.grid.nnodes(), 0.0);
  for (int j = 0; j <= f.grid.ny; ++j)
    for (int i = 0; i <= f.grid.nx; ++i) f.at(i, j)[0] = f.grid.x(i);
  auto s = restrict_circle(f, DiskSpec{0, 0, 1.0}, 256);
  for (int m = 0; m < s.n; ++m) {
    CHECK(s.values[m] == doctest::Approx(std::cos(s.theta[m])).epsilon(2e-3));
    CHECK(std::fabs(s.du_dtau[m] + std::sin(s.theta[m])) <= 2e-2);
    CHECK(std::fabs(s.du_dr[m] - std::cos(s.theta[m])) <= 2e-2);
  }
  CHECK_THROWS_AS(restrict_circle(f, DiskSpec{1.0, 0, 0.5}, 64), MwError);
}

TEST_CASE("circle tangential derivative: interpolated gradient vs finite differences") {
  Field f;
  f.grid = Grid::make_disk(DiskSpec{0, 0, 1.3}, 1.0 / 64);
  f.k = 1;
  f.epsilon = 1.0;
  f.values.assign(f.grid.nnodes(), 0.0);
  for (int j = 0; j <= f.grid.ny; ++j)
    for (int i = 0; i <= f.grid.nx; ++i) {
      double x = f.grid.x(i), y = f.grid.y(j);
      f.at(i, j)[0] = std::sin(2.0 * x) * std::cos(1.5 * y) + 0.3 * x * y;
    }
  const int n = 512;
  auto s = restrict_circle(f, DiskSpec{0, 0, 0.9}, n);
  double path_a = 0.0, path_b = 0.0;
  for (int m = 0; m < n; ++m) {
    path_a += mw::sq(s.du_dtau[m]) * s.weight;
    double fwd = s.values[(m + 1) % n], bwd = s.values[(m + n - 1) % n];
    path_b += mw::sq((fwd - bwd) / (2.0 * s.weight)) * s.weight;
  }
  CHECK(path_a == doctest::Approx(path_b).epsilon(0.01));
}

TEST_CASE("field serialization round trip: binary exact, csv full precision") {
  Field f;
  f.grid = Grid::make_disk(DiskSpec{0.2, -0.1, 0.8}, 1.0 / 24);
  f.k = 2;
  f.epsilon = 0.05;
  f.values.assign(size_t(f.grid.nnodes()) * 2, 0.0);
  Rng rng(17);
  for (auto& v : f.values) v = rng.uniform(-1.0, 1.0);

  save_field(f, "/tmp/mw_test_field_bin", true);
  Field g = load_field("/tmp/mw_test_field_bin.json");
  REQUIRE(g.values.size() == f.values.size());
  for (size_t n = 0; n < f.values.size(); ++n) CHECK(g.values[n] == f.values[n]);
  CHECK(g.epsilon == f.epsilon);
  CHECK(g.grid.nx == f.grid.nx);

  save_field(f, "/tmp/mw_test_field_csv", false);
  Field h = load_field("/tmp/mw_test_field_csv.json");
  for (size_t n = 0; n < f.values.size(); ++n)
    CHECK(h.values[n] == doctest::Approx(f.values[n]).epsilon(1e-15));
}

TEST_CASE("loader rejects payload length mismatch") {
  Field f;
  f.grid = Grid::make_rectangle(0, 0, 1, 1, 1.0 / 8);
  f.k = 1;
  f.values.assign(f.grid.nnodes(), 1.0);
  save_field(f, "/tmp/mw_test_field_trunc", true);
  // truncate the payload
  {
    std::vector<double> vals(f.grid.nnodes() - 1, 1.0);
    std::ofstream out("/tmp/mw_test_field_trunc.bin", std::ios::binary);
    out.write(reinterpret_cast<const char*>(vals.data()), std::streamsize(vals.size() * 8));
  }
  CHECK_THROWS_AS(load_field("/tmp/mw_test_field_trunc.json"), MwError);
}
