#include "doctest.h"

#include <cmath>

#include "potential.hpp"

using namespace mw;

namespace {

// independent finite-difference Hessian of V (oracle, never uses p.hess)
double fd_second_derivative(const Potential& p, const std::vector<double>& y, int a, int b,
                            double h = 1e-4) {
  std::vector<double> q = y;
  auto ev = [&](double da, double db) {
    q = y;
    q[a] += da;
    q[b] += db;
    return p.eval(q.data());
  };
  if (a == b) return (ev(h, 0) - 2.0 * p.eval(y.data()) + ev(-h, 0)) / (h * h);
  return (ev(h, h) - ev(h, -h) - ev(-h, h) + ev(-h, -h)) / (4.0 * h * h);
}

}  // namespace

TEST_CASE("gl-scalar validates and matches the finite-difference Hessian oracle") {
  auto p = make_builtin_potential("gl-scalar");
  auto rep = validate_hypotheses(*p, 4000);
  CHECK(rep.pass);
  REQUIRE(p->wells().size() == 2);
  CHECK(p->wells()[0].location[0] == doctest::Approx(-1.0));
  CHECK(p->wells()[1].location[0] == doctest::Approx(1.0));
  // V''(+-1) = 2 by the oracle
  for (const auto& w : p->wells()) {
    double d2 = fd_second_derivative(*p, w.location, 0, 0);
    CHECK(d2 == doctest::Approx(2.0).epsilon(1e-5));
    CHECK(w.hess_min == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(w.hess_max == doctest::Approx(2.0).epsilon(1e-9));
  }
}

TEST_CASE("triple-well validates with Hessian 9 Id at each well") {
  auto p = make_builtin_potential("triple-well-2d");
  auto rep = validate_hypotheses(*p, 4000);
  CHECK(rep.pass);
  REQUIRE(p->wells().size() == 3);
  for (const auto& w : p->wells()) {
    CHECK(fd_second_derivative(*p, w.location, 0, 0) == doctest::Approx(9.0).epsilon(1e-4));
    CHECK(fd_second_derivative(*p, w.location, 1, 1) == doctest::Approx(9.0).epsilon(1e-4));
    CHECK(fd_second_derivative(*p, w.location, 0, 1) == doctest::Approx(0.0).epsilon(1e-4));
    CHECK(w.hess_min == doctest::Approx(9.0).epsilon(1e-8));
  }
}

TEST_CASE("single-well quadratic fails H1") {
  PolynomialPotential p("u2", 1, {{1.0, {2}}}, {{0.0}}, 1.0, 1.0);
  auto rep = validate_hypotheses(p, 2000);
  CHECK_FALSE(rep.pass);
  bool h1_failed = false;
  for (const auto& c : rep.checks)
    if (c.hypothesis == "H1" && !c.pass) h1_failed = true;
  CHECK(h1_failed);
}

TEST_CASE("derived constants for gl-scalar") {
  auto p = make_builtin_potential("gl-scalar");
  validate_hypotheses(*p, 2000);
  auto c = derive_constants(*p);
  CHECK(c.lambda0 == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(c.lambda_max == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(c.mu0 <= 0.5);
  CHECK(c.mu0 > 0.0);
  // definitional identity, exact as stored
  CHECK(c.alpha0 == 0.5 * c.lambda0 * c.mu0 * c.mu0);
  // separation: B(sigma_i, 2 mu0) disjoint
  CHECK(4.0 * c.mu0 <= 2.0 + 1e-12);
  CHECK(c.r0 == doctest::Approx(1.0));
  CHECK(c.beta_inf > 0.0);
  CHECK(c.c_unf > 0.0);
  CHECK(c.extrut_ratio > 0.8);
}

TEST_CASE("derived constants for triple-well: lambda0 = 9") {
  auto p = make_builtin_potential("triple-well-2d");
  validate_hypotheses(*p, 2000);
  auto c = derive_constants(*p);
  CHECK(c.lambda0 == doctest::Approx(9.0).epsilon(1e-8));
  CHECK(c.alpha0 == 0.5 * c.lambda0 * c.mu0 * c.mu0);
}

TEST_CASE("derive_constants is monotone under extra shrinking") {
  auto p = make_builtin_potential("gl-scalar");
  validate_hypotheses(*p, 2000);
  auto c1 = derive_constants(*p, 0.5);
  auto c2 = derive_constants(*p, 0.25);
  CHECK(c2.mu0 <= c1.mu0 + 1e-15);
  CHECK(c2.extrut_ratio >= 0.8);
}

TEST_CASE("nearest_well certification (watson)") {
  auto p = make_builtin_potential("gl-scalar");
  validate_hypotheses(*p, 2000);
  auto c = derive_constants(*p);

  double y = 1.0;  // exactly a well
  auto r = nearest_well(*p, c, &y);
  CHECK(r.well_index == 1);
  CHECK(r.distance == 0.0);
  CHECK(r.certified);

  y = 0.0;  // V(0) = 1/4 >= alpha0, never certified
  r = nearest_well(*p, c, &y);
  CHECK_FALSE(r.certified);

  // any certified point obeys the watson radius bound
  Rng rng(7);
  int certified_seen = 0;
  for (int n = 0; n < 20000; ++n) {
    y = rng.uniform(-2.0, 2.0);
    r = nearest_well(*p, c, &y);
    if (!r.certified) continue;
    ++certified_seen;
    double v = p->eval(&y);
    CHECK(r.distance <= std::sqrt(4.0 * v / c.lambda0) + 1e-12);
    CHECK(r.distance <= c.mu0 * (1.0 + 0.1));  // mu0-ball membership, small shell slack
  }
  CHECK(certified_seen > 100);
}

TEST_CASE("far-field quadratic bound V >= beta_inf |y|^2") {
  for (const char* name : {"gl-scalar", "triple-well-2d"}) {
    auto p = make_builtin_potential(name);
    validate_hypotheses(*p, 2000);
    auto c = derive_constants(*p);
    Rng rng(11);
    for (int n = 0; n < 2000; ++n) {
      std::vector<double> y(p->k());
      double r = rng.uniform(2.0 * c.r0, 12.0 * c.r0 + 4.0);
      double nn = 0.0;
      for (auto& v : y) {
        v = rng.uniform(-1.0, 1.0);
        nn += v * v;
      }
      nn = std::sqrt(std::max(nn, 1e-12));
      for (auto& v : y) v *= r / nn;
      CHECK(p->eval(y.data()) >= c.beta_inf * r * r * (1.0 - 1e-9));
    }
  }
}

TEST_CASE("gradient consistency: central differences match grad to O(h^2)") {
  for (const char* name : {"gl-scalar", "triple-well-2d"}) {
    auto p = make_builtin_potential(name);
    Rng rng(3);
    const int k = p->k();
    std::vector<double> y(k), g(k);
    for (int n = 0; n < 200; ++n) {
      for (auto& v : y) v = rng.uniform(-2.0, 2.0);
      p->grad(y.data(), g.data());
      const double h = 1e-4;
      for (int d = 0; d < k; ++d) {
        std::vector<double> q = y;
        q[d] += h;
        double vp = p->eval(q.data());
        q[d] = y[d] - h;
        double vm = p->eval(q.data());
        CHECK(std::fabs((vp - vm) / (2 * h) - g[d]) <= 1e-6 * (1.0 + std::fabs(g[d])));
      }
    }
  }
}

TEST_CASE("quadratic envelope holds on sampled well balls") {
  auto p = make_builtin_potential("gl-scalar");
  validate_hypotheses(*p, 2000);
  auto c = derive_constants(*p);
  auto rep = quadratic_envelope_check(*p, c, 2000);
  CHECK(rep.violations == 0);

  // spot value from the spec sheet: y = 1.1 sits in B(1, 2 mu0) only when
  // 2 mu0 >= 0.1; check the chain directly at the well edge instead
  double y = 1.0 + 0.9 * 2.0 * c.mu0;
  double d2 = mw::sq(y - 1.0);
  double v = p->eval(&y);
  CHECK(0.25 * 2.0 * d2 <= v * (1 + 1e-12));
  CHECK(v <= 2.0 * d2 * (1 + 1e-12));

  auto p3 = make_builtin_potential("triple-well-2d");
  validate_hypotheses(*p3, 2000);
  auto c3 = derive_constants(*p3);
  auto rep3 = quadratic_envelope_check(*p3, c3, 10000);
  CHECK(rep3.violations == 0);
}

TEST_CASE("polynomial config potential reproduces gl-scalar") {
  // (1 - u^2)^2 / 4 = 1/4 - u^2/2 + u^4/4
  std::string spec = R"({"name":"gl-poly","k":1,
    "terms":[{"coef":0.25,"powers":[0]},{"coef":-0.5,"powers":[2]},{"coef":0.25,"powers":[4]}],
    "wells":[[-1.0],[1.0]],"alpha_inf":1.0,"r_inf":2.0})";
  auto p = make_potential_from_spec(spec);
  auto g = make_builtin_potential("gl-scalar");
  Rng rng(5);
  for (int n = 0; n < 500; ++n) {
    double y = rng.uniform(-3.0, 3.0);
    CHECK(p->eval(&y) == doctest::Approx(g->eval(&y)).epsilon(1e-12));
    double gp, gg;
    p->grad(&y, &gp);
    g->grad(&y, &gg);
    CHECK(gp == doctest::Approx(gg).epsilon(1e-12));
    double hp, hg;
    p->hess(&y, &hp);
    g->hess(&y, &hg);
    CHECK(hp == doctest::Approx(hg).epsilon(1e-9));
  }
  auto rep = validate_hypotheses(*p, 2000);
  CHECK(rep.pass);
}

TEST_CASE("function potential fills derivatives by differences") {
  FunctionPotential p(
      "fn-gl", 1, [](const double* y) { return 0.25 * mw::sq(1.0 - y[0] * y[0]); }, {{-1.0}, {1.0}},
      1.0, 2.0);
  double y = 0.7, g;
  p.grad(&y, &g);
  CHECK(g == doctest::Approx(y * y * y - y).epsilon(1e-6));
  double h;
  p.hess(&y, &h);
  CHECK(h == doctest::Approx(3 * y * y - 1).epsilon(1e-4));
}
