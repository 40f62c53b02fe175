#include "potential.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "linalg.hpp"

namespace mw {

using json = nlohmann::json;

void Potential::hess(const double* y, double* out) const {
  // central differences of grad at h = 1e-5 * (1 + |y|)
  double h = 1e-5 * (1.0 + std::sqrt(norm2(y, k_)));
  std::vector<double> yp(y, y + k_), gm(k_), gp(k_);
  for (int j = 0; j < k_; ++j) {
    yp[j] = y[j] + h;
    grad(yp.data(), gp.data());
    yp[j] = y[j] - h;
    grad(yp.data(), gm.data());
    yp[j] = y[j];
    for (int i = 0; i < k_; ++i) out[i * k_ + j] = (gp[i] - gm[i]) / (2.0 * h);
  }
  // symmetrize
  for (int i = 0; i < k_; ++i)
    for (int j = i + 1; j < k_; ++j) {
      double s = 0.5 * (out[i * k_ + j] + out[j * k_ + i]);
      out[i * k_ + j] = out[j * k_ + i] = s;
    }
}

// ---------------------------------------------------------------------------
// Product-of-wells potential V(y) = c * prod_i |y - s_i|^2, the closed form
// behind both builtins ("gl-scalar" is c=1/4 with wells {-1,+1}).
// ---------------------------------------------------------------------------

namespace {

class ProductWellPotential : public Potential {
 public:
  ProductWellPotential(std::string name, int k, std::vector<std::vector<double>> locs, double prefactor,
                       double alpha_inf, double r_inf)
      : Potential(std::move(name), k, {}, alpha_inf, r_inf), c_(prefactor) {
    for (auto& l : locs) wells_.push_back(Well{l, 0.0, 0.0});
  }

  double eval(const double* y) const override {
    double v = c_;
    for (const auto& w : wells_) v *= dist2(y, w.location.data(), k_);
    return v;
  }

  void grad(const double* y, double* out) const override {
    int q = int(wells_.size());
    std::vector<double> p(q);
    for (int i = 0; i < q; ++i) p[i] = dist2(y, wells_[i].location.data(), k_);
    for (int d = 0; d < k_; ++d) out[d] = 0.0;
    for (int i = 0; i < q; ++i) {
      double a = c_;
      for (int j = 0; j < q; ++j)
        if (j != i) a *= p[j];
      for (int d = 0; d < k_; ++d) out[d] += a * 2.0 * (y[d] - wells_[i].location[d]);
    }
  }

  void hess(const double* y, double* out) const override {
    int q = int(wells_.size());
    std::vector<double> p(q);
    for (int i = 0; i < q; ++i) p[i] = dist2(y, wells_[i].location.data(), k_);
    auto prod_except = [&](int i) {
      double a = c_;
      for (int j = 0; j < q; ++j)
        if (j != i) a *= p[j];
      return a;
    };
    auto prod_except2 = [&](int i, int l) {
      double a = c_;
      for (int j = 0; j < q; ++j)
        if (j != i && j != l) a *= p[j];
      return a;
    };
    for (int d = 0; d < k_ * k_; ++d) out[d] = 0.0;
    for (int i = 0; i < q; ++i) {
      double a = prod_except(i);
      for (int d = 0; d < k_; ++d) out[d * k_ + d] += 2.0 * a;
      for (int l = 0; l < q; ++l) {
        if (l == i) continue;
        double b = prod_except2(i, l);
        for (int r = 0; r < k_; ++r)
          for (int s = 0; s < k_; ++s)
            out[r * k_ + s] +=
                b * 4.0 * (y[r] - wells_[i].location[r]) * (y[s] - wells_[l].location[s]);
      }
    }
  }

 private:
  double c_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Polynomial potential
// ---------------------------------------------------------------------------

PolynomialPotential::PolynomialPotential(std::string name, int k, std::vector<Term> terms,
                                         std::vector<std::vector<double>> well_locations,
                                         double alpha_inf, double r_inf)
    : Potential(std::move(name), k, {}, alpha_inf, r_inf), terms_(std::move(terms)) {
  for (auto& t : terms_)
    if (int(t.powers.size()) != k)
      throw MwError("ConfigError", "polynomial term arity does not match k");
  for (auto& l : well_locations) {
    if (int(l.size()) != k) throw MwError("ConfigError", "well location arity does not match k");
    wells_.push_back(Well{l, 0.0, 0.0});
  }
}

static double pow_int(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

double PolynomialPotential::eval(const double* y) const {
  double v = 0.0;
  for (const auto& t : terms_) {
    double m = t.coef;
    for (int d = 0; d < k_; ++d) m *= pow_int(y[d], t.powers[d]);
    v += m;
  }
  return v;
}

void PolynomialPotential::grad(const double* y, double* out) const {
  for (int d = 0; d < k_; ++d) out[d] = 0.0;
  for (const auto& t : terms_) {
    for (int d = 0; d < k_; ++d) {
      if (t.powers[d] == 0) continue;
      double m = t.coef * t.powers[d];
      for (int e = 0; e < k_; ++e) m *= pow_int(y[e], e == d ? t.powers[e] - 1 : t.powers[e]);
      out[d] += m;
    }
  }
}

void PolynomialPotential::hess(const double* y, double* out) const {
  for (int d = 0; d < k_ * k_; ++d) out[d] = 0.0;
  for (const auto& t : terms_) {
    for (int r = 0; r < k_; ++r) {
      for (int s = 0; s < k_; ++s) {
        int pr = t.powers[r] - (r == s ? 1 : 0);
        if (t.powers[r] == 0 || (r == s && t.powers[r] < 2) || (r != s && t.powers[s] == 0)) continue;
        double m = t.coef * t.powers[r] * (r == s ? t.powers[r] - 1 : t.powers[s]);
        for (int e = 0; e < k_; ++e) {
          int pw = t.powers[e];
          if (e == r) pw -= 1;
          if (e == s) pw -= 1;
          m *= pow_int(y[e], pw);
        }
        (void)pr;
        out[r * k_ + s] += m;
      }
    }
  }
}

FunctionPotential::FunctionPotential(std::string name, int k, Fn fn,
                                     std::vector<std::vector<double>> well_locations, double alpha_inf,
                                     double r_inf)
    : Potential(std::move(name), k, {}, alpha_inf, r_inf), fn_(std::move(fn)) {
  for (auto& l : well_locations) wells_.push_back(Well{l, 0.0, 0.0});
}

void FunctionPotential::grad(const double* y, double* out) const {
  double h = 1e-5 * (1.0 + std::sqrt(norm2(y, k_)));
  std::vector<double> yp(y, y + k_);
  for (int d = 0; d < k_; ++d) {
    yp[d] = y[d] + h;
    double vp = fn_(yp.data());
    yp[d] = y[d] - h;
    double vm = fn_(yp.data());
    yp[d] = y[d];
    out[d] = (vp - vm) / (2.0 * h);
  }
}

// ---------------------------------------------------------------------------
// Registry / config loading
// ---------------------------------------------------------------------------

std::shared_ptr<Potential> make_builtin_potential(const std::string& name) {
  if (name == "gl-scalar") {
    // V(u) = (1-u^2)^2 / 4
    return std::make_shared<ProductWellPotential>(
        "gl-scalar", 1, std::vector<std::vector<double>>{{-1.0}, {1.0}}, 0.25, 1.0, 2.0);
  }
  if (name == "triple-well-2d") {
    // V(u) = 1/2 prod |u - s_i|^2, s_i the cube roots of unity
    const double s3 = std::sqrt(3.0) / 2.0;
    return std::make_shared<ProductWellPotential>(
        "triple-well-2d", 2, std::vector<std::vector<double>>{{1.0, 0.0}, {-0.5, s3}, {-0.5, -s3}}, 0.5,
        1.0, 4.0);
  }
  throw MwError("ConfigError", "unknown builtin potential: " + name);
}

std::shared_ptr<Potential> make_potential_from_spec(const std::string& name_or_json) {
  std::string s = name_or_json;
  auto first = s.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && s[first] == '{') {
    json j = json::parse(s);
    int k = j.at("k").get<int>();
    std::vector<PolynomialPotential::Term> terms;
    for (const auto& t : j.at("terms")) {
      PolynomialPotential::Term term;
      term.coef = t.at("coef").get<double>();
      term.powers = t.at("powers").get<std::vector<int>>();
      terms.push_back(term);
    }
    std::vector<std::vector<double>> wells = j.at("wells").get<std::vector<std::vector<double>>>();
    double ainf = j.value("alpha_inf", 1.0);
    double rinf = j.value("r_inf", 0.0);
    if (rinf <= 0.0) {
      double r0 = 0.0;
      for (auto& w : wells) r0 = std::max(r0, std::sqrt(norm2(w.data(), k)));
      rinf = 2.0 * r0 + 2.0;
    }
    std::string nm = j.value("name", std::string("user-poly"));
    return std::make_shared<PolynomialPotential>(nm, k, terms, wells, ainf, rinf);
  }
  return make_builtin_potential(name_or_json);
}

// ---------------------------------------------------------------------------
// Hypothesis validation
// ---------------------------------------------------------------------------

ValidationReport validate_hypotheses(const Potential& p, int sample_budget) {
  if (sample_budget < 1000) throw MwError("InvalidArgument", "sample_budget must be >= 1000");
  ValidationReport rep;
  const int k = p.k();
  const int q = int(p.wells().size());
  const double tol = 1e-7;

  double r0 = 0.0;
  for (const auto& w : p.wells()) r0 = std::max(r0, std::sqrt(norm2(w.location.data(), k)));
  const double r_big = 4.0 * std::max(p.r_inf(), 2.0 * r0 + 1e-9);

  // Finiteness of the evaluators on the sampled box.
  {
    HypothesisCheck c{"finite", true, "V and grad V finite on sampled box", {}};
    uint64_t cursor = 0;
    std::vector<double> y(k), g(k);
    for (int n = 0; n < sample_budget / 2; ++n) {
      halton_ball_point(cursor, k, y.data());
      for (int d = 0; d < k; ++d) y[d] *= r_big;
      double v = p.eval(y.data());
      p.grad(y.data(), g.data());
      bool ok = std::isfinite(v);
      for (int d = 0; d < k; ++d) ok = ok && std::isfinite(g[d]);
      if (!ok) {
        c.pass = false;
        c.detail = "non-finite evaluation";
        c.witness = y;
        break;
      }
    }
    if (!c.pass) throw MwError("NonFiniteEvaluation", "V or grad V returned a non-finite value");
    rep.checks.push_back(c);
  }

  // H1: finite vacuum set with q >= 2, each well a zero and a critical point,
  // and inf V = 0 attained only there (sampled).
  {
    HypothesisCheck c{"H1", true, "", {}};
    if (q < 2) {
      c.pass = false;
      c.detail = "q = " + std::to_string(q) + " < 2";
    }
    std::vector<double> g(k);
    for (int i = 0; i < q && c.pass; ++i) {
      const auto& w = p.wells()[i];
      double v = p.eval(w.location.data());
      p.grad(w.location.data(), g.data());
      if (std::fabs(v) > tol) {
        c.pass = false;
        c.detail = "V(sigma_" + std::to_string(i) + ") = " + std::to_string(v) + " != 0";
        c.witness = w.location;
      } else if (std::sqrt(norm2(g.data(), k)) > 1e-6) {
        throw MwError("WellNotCritical",
                      "grad V(sigma_" + std::to_string(i) + ") exceeds tolerance");
      }
    }
    // positivity away from the wells
    uint64_t cursor = 1000;
    std::vector<double> y(k);
    for (int n = 0; n < sample_budget / 2 && c.pass; ++n) {
      halton_ball_point(cursor, k, y.data());
      for (int d = 0; d < k; ++d) y[d] *= r_big;
      double v = p.eval(y.data());
      if (v < -tol) {
        c.pass = false;
        c.detail = "V negative at sampled point";
        c.witness = y;
        break;
      }
      double dmin = 1e300;
      for (const auto& w : p.wells()) dmin = std::min(dmin, dist2(y.data(), w.location.data(), k));
      if (dmin > 1e-4 && v <= 0.0) {
        c.pass = false;
        c.detail = "V vanishes off the well set";
        c.witness = y;
        break;
      }
    }
    if (c.pass && c.detail.empty()) c.detail = "q = " + std::to_string(q) + ", wells are zeros of V";
    rep.checks.push_back(c);
  }

  // H2: positive definite Hessian at each well (eigendecomposition).
  {
    HypothesisCheck c{"H2", true, "", {}};
    std::vector<double> h(k * k);
    for (int i = 0; i < q; ++i) {
      auto& w = const_cast<Potential&>(p).wells()[i];
      p.hess(w.location.data(), h.data());
      double lo, hi;
      symmetric_eigenvalue_range(h, k, lo, hi);
      w.hess_min = lo;
      w.hess_max = hi;
      if (lo <= 0.0) {
        c.pass = false;
        c.detail = "Hessian not positive definite at well " + std::to_string(i);
        c.witness = w.location;
      }
    }
    if (c.pass) c.detail = "Hessian positive definite at every well";
    rep.checks.push_back(c);
  }

  // H3: y.grad V >= alpha_inf |y|^2 for |y| > R_inf, and growth, on radial
  // samples up to 4 max(R_inf, 2 R0).
  {
    HypothesisCheck c{"H3", true, "", {}};
    int n_dirs = std::max(8, sample_budget / 64);
    int n_radii = 24;
    uint64_t cursor = 2000;
    std::vector<double> dir(k), y(k), g(k);
    double worst = 1e300;
    for (int nd = 0; nd < n_dirs && c.pass; ++nd) {
      halton_ball_point(cursor, k, dir.data());
      double nn = std::sqrt(norm2(dir.data(), k));
      if (nn < 1e-12) continue;
      for (int d = 0; d < k; ++d) dir[d] /= nn;
      for (int nr = 1; nr <= n_radii; ++nr) {
        double r = p.r_inf() * (1.0 + 1e-6) + (r_big - p.r_inf()) * nr / double(n_radii);
        for (int d = 0; d < k; ++d) y[d] = r * dir[d];
        p.grad(y.data(), g.data());
        double ydg = 0.0;
        for (int d = 0; d < k; ++d) ydg += y[d] * g[d];
        worst = std::min(worst, ydg - p.alpha_inf() * r * r);
        if (ydg < p.alpha_inf() * r * r * (1.0 - 1e-9)) {
          c.pass = false;
          c.detail = "radial growth condition fails";
          c.witness = y;
          break;
        }
      }
      // coercivity spot check along the ray
      if (c.pass) {
        for (int d = 0; d < k; ++d) y[d] = r_big * dir[d];
        double v_far = p.eval(y.data());
        for (int d = 0; d < k; ++d) y[d] = 0.5 * r_big * dir[d];
        if (v_far < p.eval(y.data())) {
          c.pass = false;
          c.detail = "V not growing along sampled ray";
          c.witness = y;
        }
      }
    }
    if (c.pass) c.detail = "growth conditions hold on radial samples";
    rep.checks.push_back(c);
  }

  rep.pass = true;
  for (const auto& c : rep.checks) rep.pass = rep.pass && c.pass;
  return rep;
}

// ---------------------------------------------------------------------------
// Structural constants
// ---------------------------------------------------------------------------

namespace {

// Sampled check of the Hessian sandwich on B(sigma_i, 2 mu0), 2048
// low-discrepancy points per well.
bool hessian_sandwich_holds(const Potential& p, double mu0) {
  const int k = p.k();
  std::vector<double> h(k * k), y(k), off(k);
  for (const auto& w : p.wells()) {
    uint64_t cursor = 0;
    for (int n = 0; n < 2048; ++n) {
      halton_ball_point(cursor, k, off.data());
      for (int d = 0; d < k; ++d) y[d] = w.location[d] + 2.0 * mu0 * off[d];
      p.hess(y.data(), h.data());
      double lo, hi;
      symmetric_eigenvalue_range(h, k, lo, hi);
      if (lo < 0.5 * w.hess_min || hi > 2.0 * w.hess_max) return false;
    }
  }
  return true;
}

// Sampled inf of V / alpha0 outside the union of B(sigma_i, mu0).  Quadratic
// Taylor expansion makes the sharp constant alpha0 = lambda0 mu0^2 / 2
// unattainable on the inner shell side for even wells (for gl-scalar the
// shell value is alpha0 (1 - mu0/2)^2), so callers accept a fixed shell
// slack; the measured ratio is stored in the constants report.
double extrut_sampled_ratio(const Potential& p, double mu0, double lambda0, double r_box) {
  const int k = p.k();
  const double alpha0 = 0.5 * lambda0 * mu0 * mu0;
  double vmin_ratio = 1e300;
  std::vector<double> y(k);
  // shells just outside each well ball, where the infimum lives
  for (const auto& w : p.wells()) {
    uint64_t cursor = 0;
    std::vector<double> dir(k);
    for (int n = 0; n < 1024; ++n) {
      halton_ball_point(cursor, k, dir.data());
      double nn = std::sqrt(norm2(dir.data(), k));
      if (nn < 1e-12) continue;
      for (int m = 0; m <= 8; ++m) {
        double r = mu0 * (1.0 + 0.25 * m);
        for (int d = 0; d < k; ++d) y[d] = w.location[d] + r * dir[d] / nn;
        vmin_ratio = std::min(vmin_ratio, p.eval(y.data()) / alpha0);
      }
    }
  }
  // bulk samples of the box minus the balls
  uint64_t cursor = 5000;
  for (int n = 0; n < 4096; ++n) {
    halton_ball_point(cursor, k, y.data());
    for (int d = 0; d < k; ++d) y[d] *= r_box;
    bool inside = false;
    for (const auto& w : p.wells())
      if (dist2(y.data(), w.location.data(), k) < mu0 * mu0) inside = true;
    if (inside) continue;
    vmin_ratio = std::min(vmin_ratio, p.eval(y.data()) / alpha0);
  }
  return vmin_ratio;
}

}  // namespace

StructuralConstants derive_constants(const Potential& p, double shrink_factor) {
  if (!(shrink_factor > 0.0 && shrink_factor < 1.0))
    throw MwError("InvalidArgument", "shrink_factor must lie in (0,1)");
  const int k = p.k();
  const int q = int(p.wells().size());
  if (q < 2) throw MwError("InvalidArgument", "potential must have q >= 2 wells");

  // make sure hess_min/hess_max are populated
  bool have_eigs = true;
  for (const auto& w : p.wells()) have_eigs = have_eigs && w.hess_min > 0.0;
  if (!have_eigs) {
    std::vector<double> h(k * k);
    for (auto& w : const_cast<Potential&>(p).wells()) {
      p.hess(w.location.data(), h.data());
      symmetric_eigenvalue_range(h, k, w.hess_min, w.hess_max);
    }
  }

  StructuralConstants c;
  c.lambda0 = 1e300;
  c.lambda_max = 0.0;
  for (const auto& w : p.wells()) {
    c.lambda0 = std::min(c.lambda0, w.hess_min);
    c.lambda_max = std::max(c.lambda_max, w.hess_max);
    c.r0 = std::max(c.r0, std::sqrt(norm2(w.location.data(), k)));
  }

  double dmin = 1e300;
  for (int i = 0; i < q; ++i)
    for (int j = i + 1; j < q; ++j)
      dmin = std::min(dmin, std::sqrt(dist2(p.wells()[i].location.data(),
                                            p.wells()[j].location.data(), k)));

  const double mu_init = 0.25 * dmin;
  const double r_box = 2.0 * c.r0 + 2.0;
  const double extrut_slack = 0.125;  // accepted shell defect, see above
  double mu0 = mu_init;
  for (;;) {
    if (mu0 < 1e-8 * mu_init)
      throw MwError("ShrinkExhausted", "mu0 underflow: degenerate potential");
    bool sep_ok = 4.0 * mu0 <= dmin + 1e-15;  // disjoint B(sigma_i, 2 mu0)
    if (sep_ok && hessian_sandwich_holds(p, mu0)) {
      double ratio = extrut_sampled_ratio(p, mu0, c.lambda0, r_box);
      if (ratio >= 1.0 - extrut_slack) {
        c.extrut_ratio = ratio;
        break;
      }
    }
    mu0 *= shrink_factor;
  }
  c.mu0 = mu0;
  c.alpha0 = 0.5 * c.lambda0 * mu0 * mu0;

  // beta_inf: sampled window [2 R0, max(8 R0, sqrt(2) R_inf)] combined with
  // the integrated growth-condition tail V >= alpha_inf |y|^2 / 4 beyond it.
  {
    double lo = 2.0 * c.r0;
    if (lo <= 0.0) lo = 1.0;
    double hi = std::max({8.0 * c.r0, std::sqrt(2.0) * p.r_inf(), lo * 1.5});
    double beta = p.alpha_inf() / 4.0;
    uint64_t cursor = 9000;
    std::vector<double> dir(k), y(k);
    for (int nd = 0; nd < 256; ++nd) {
      halton_ball_point(cursor, k, dir.data());
      double nn = std::sqrt(norm2(dir.data(), k));
      if (nn < 1e-12) continue;
      for (int nr = 0; nr <= 32; ++nr) {
        double r = lo + (hi - lo) * nr / 32.0;
        for (int d = 0; d < k; ++d) y[d] = r * dir[d] / nn;
        beta = std::min(beta, p.eval(y.data()) / (r * r));
      }
    }
    c.beta_inf = beta;
    c.beta_window_lo = lo;
    c.beta_window_hi = hi;
  }

  // Certified floor for the uniform circle bound constant, from the case
  // analysis behind the bound |u - sigma_main| <= C_unf sqrt(circle energy):
  //   case 1   C^2 >= 4 lambda0^{-1/2} + 2 lambda0^{-1}
  //   case 2a  C^2 >= 9 R0^2 / (2 alpha0)
  //   case 2b  C^2 >= 8 beta_inf^{-1/2} + 20 R0^2 / (2 pi alpha0)
  //   case 2c  C^2 >= (1 + 2 R0^2 beta_inf / alpha0) / (pi beta_inf)
  {
    const double pi = 3.14159265358979323846;
    double c2 = 4.0 / std::sqrt(c.lambda0) + 2.0 / c.lambda0;
    c2 = std::max(c2, 9.0 * c.r0 * c.r0 / (2.0 * c.alpha0));
    c2 = std::max(c2, 8.0 / std::sqrt(c.beta_inf) + 20.0 * c.r0 * c.r0 / (2.0 * pi * c.alpha0));
    c2 = std::max(c2, (1.0 + 2.0 * c.r0 * c.r0 * c.beta_inf / c.alpha0) / (pi * c.beta_inf));
    c.c_unf = std::sqrt(c2);
  }
  return c;
}

NearestWell nearest_well(const Potential& p, const StructuralConstants& c, const double* y) {
  NearestWell r;
  double best = 1e300;
  for (int i = 0; i < int(p.wells().size()); ++i) {
    double d2 = dist2(y, p.wells()[i].location.data(), p.k());
    if (d2 < best) {
      best = d2;
      r.well_index = i;
    }
  }
  r.distance = std::sqrt(best);
  double v = p.eval(y);
  r.certified = v < c.alpha0;
  return r;
}

EnvelopeReport quadratic_envelope_check(const Potential& p, const StructuralConstants& c, int samples) {
  EnvelopeReport rep;
  const int k = p.k();
  std::vector<double> y(k), g(k), off(k);
  const double tol = 1e-9;
  for (const auto& w : p.wells()) {
    uint64_t cursor = 0;
    for (int n = 0; n < samples; ++n) {
      halton_ball_point(cursor, k, off.data());
      for (int d = 0; d < k; ++d) y[d] = w.location[d] + 2.0 * c.mu0 * off[d];
      double d2 = dist2(y.data(), w.location.data(), k);
      double v = p.eval(y.data());
      p.grad(y.data(), g.data());
      double gdot = 0.0;
      for (int d = 0; d < k; ++d) gdot += g[d] * (y[d] - w.location[d]);
      double scale = std::max({v, w.hess_max * d2, 1e-300});
      double viol = 0.0;
      viol = std::max(viol, (0.25 * w.hess_min * d2 - v) / scale);
      viol = std::max(viol, (v - w.hess_max * d2) / scale);
      viol = std::max(viol, (0.5 * w.hess_min * d2 - gdot) / scale);
      viol = std::max(viol, (gdot - 2.0 * w.hess_max * d2) / scale);
      rep.samples++;
      if (viol > tol) {
        rep.violations++;
        rep.max_violation = std::max(rep.max_violation, viol);
      }
    }
  }
  return rep;
}

}  // namespace mw
