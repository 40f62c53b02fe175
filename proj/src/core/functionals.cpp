#include "functionals.hpp"

#include <cmath>

namespace mw {

EnergyDensity energy_density(const Field& f, const Potential& p,
                             const std::vector<double>* precomputed_grad) {
  std::vector<double> gr_own;
  if (!precomputed_grad) gr_own = gradient(f);
  const std::vector<double>& gr = precomputed_grad ? *precomputed_grad : gr_own;
  const Grid& g = f.grid;
  const int k = f.k;
  EnergyDensity d;
  size_t nn = size_t(g.nnodes());
  d.e.assign(nn, 0.0);
  d.v.assign(nn, 0.0);
  d.j.assign(nn, 0.0);
  d.xi.assign(nn, 0.0);
  d.grad_sq.assign(nn, 0.0);
  const double eps = f.epsilon;
  Parallel::for_range(nn, [&](size_t lo, size_t hi) {
    for (size_t n = lo; n < hi; ++n) {
      if (g.mask[n] == NodeKind::Outside) continue;
      const double* u = f.values.data() + n * k;
      double gn2 = 0.0;
      for (int c = 0; c < 2 * k; ++c) gn2 += sq(gr[n * 2 * k + c]);
      double V = p.eval(u);
      double kin = 0.5 * eps * gn2;
      d.grad_sq[n] = gn2;
      d.v[n] = V / eps;
      d.e[n] = kin + V / eps;
      d.j[n] = std::sqrt(gn2) * std::sqrt(std::max(V, 0.0));
      d.xi[n] = V / eps - kin;
    }
  });
  return d;
}

double integrate_nodal(const Grid& g, const std::vector<double>& nodal, const RegionFn& region) {
  double acc = 0.0;
  const double h2 = g.h * g.h;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      double cov = g.cell_coverage(i, j, region);
      if (cov == 0.0) continue;
      // midpoint value from the in-domain corners
      double s = 0.0, w = 0.0;
      int ids[4] = {g.idx(i, j), g.idx(i + 1, j), g.idx(i, j + 1), g.idx(i + 1, j + 1)};
      for (int m = 0; m < 4; ++m) {
        if (g.mask[ids[m]] == NodeKind::Outside) continue;
        s += nodal[ids[m]];
        w += 1.0;
      }
      if (w == 0.0) continue;
      acc += (s / w) * cov * h2;
    }
  }
  return acc;
}

double integrate_nodal_cellweights(const Grid& g, const std::vector<double>& nodal,
                                   const std::vector<double>& wts) {
  double acc = 0.0;
  const double h2 = g.h * g.h;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      double cov = wts[size_t(j) * g.nx + i];
      if (cov == 0.0) continue;
      double s = 0.0, w = 0.0;
      int ids[4] = {g.idx(i, j), g.idx(i + 1, j), g.idx(i, j + 1), g.idx(i + 1, j + 1)};
      for (int m = 0; m < 4; ++m) {
        if (g.mask[ids[m]] == NodeKind::Outside) continue;
        s += nodal[ids[m]];
        w += 1.0;
      }
      if (w == 0.0) continue;
      acc += (s / w) * cov * h2;
    }
  }
  return acc;
}

RegionEnergy energy_on_region(const Grid& g, const EnergyDensity& d, const RegionFn& region) {
  RegionEnergy r;
  r.energy = integrate_nodal(g, d.e, region);
  r.vmass = integrate_nodal(g, d.v, region);
  return r;
}

RegionEnergy energy_on_region(const Field& f, const Potential& p, const RegionFn& region) {
  EnergyDensity d = energy_density(f, p);
  return energy_on_region(f.grid, d, region);
}

RegionEnergy energy_on_disk(const Field& f, const Potential& p, const DiskSpec& d) {
  if (!f.grid.domain.contains_disk(d, f.grid.h))
    throw MwError("RegionOutsideDomain", "disk region not inside domain");
  return energy_on_region(f, p, region_disk(d));
}

HopfField hopf_differential(const Field& f, const std::vector<double>* precomputed_grad) {
  std::vector<double> gr_own;
  if (!precomputed_grad) gr_own = gradient(f);
  const std::vector<double>& gr = precomputed_grad ? *precomputed_grad : gr_own;
  const Grid& g = f.grid;
  const int k = f.k;
  HopfField h;
  size_t nn = size_t(g.nnodes());
  h.re.assign(nn, 0.0);
  h.im.assign(nn, 0.0);
  for (size_t n = 0; n < nn; ++n) {
    if (g.mask[n] == NodeKind::Outside) continue;
    double xx = 0.0, yy = 0.0, xy = 0.0;
    for (int c = 0; c < k; ++c) {
      double ux = gr[n * 2 * k + c];
      double uy = gr[n * 2 * k + k + c];
      xx += ux * ux;
      yy += uy * uy;
      xy += ux * uy;
    }
    h.re[n] = f.epsilon * (xx - yy);
    h.im[n] = -2.0 * f.epsilon * xy;
  }
  return h;
}

StressTensor stress_tensor(const Field& f, const Potential& p,
                           const std::vector<double>* precomputed_grad) {
  std::vector<double> gr_own;
  if (!precomputed_grad) gr_own = gradient(f);
  const std::vector<double>& gr = precomputed_grad ? *precomputed_grad : gr_own;
  const Grid& g = f.grid;
  const int k = f.k;
  StressTensor t;
  size_t nn = size_t(g.nnodes());
  t.t11.assign(nn, 0.0);
  t.t12.assign(nn, 0.0);
  t.v_over_eps.assign(nn, 0.0);
  for (size_t n = 0; n < nn; ++n) {
    if (g.mask[n] == NodeKind::Outside) continue;
    double xx = 0.0, yy = 0.0, xy = 0.0;
    const double* u = f.values.data() + n * k;
    for (int c = 0; c < k; ++c) {
      double ux = gr[n * 2 * k + c];
      double uy = gr[n * 2 * k + k + c];
      xx += ux * ux;
      yy += uy * uy;
      xy += ux * uy;
    }
    t.t11[n] = 0.5 * f.epsilon * (yy - xx);
    t.t12[n] = -f.epsilon * xy;
    t.v_over_eps[n] = p.eval(u) / f.epsilon;
  }
  return t;
}

// ---------------------------------------------------------------------------
// Test vector fields
// ---------------------------------------------------------------------------

namespace {

// C-infinity bump on (-1,1)
double bump(double t) {
  if (std::fabs(t) >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - t * t));
}
double bump_prime(double t) {
  if (std::fabs(t) >= 1.0) return 0.0;
  double d = 1.0 - t * t;
  return bump(t) * (-2.0 * t / (d * d));
}

}  // namespace

std::vector<TestVectorField> test_field_presets(const DomainSpec& dom) {
  auto c = dom.center();
  double R = 0.45 * (dom.type == DomainSpec::Type::Disk
                         ? 2.0 * dom.disk.r
                         : std::min(dom.x1 - dom.x0, dom.y1 - dom.y0));
  double cx = c[0], cy = c[1];
  std::vector<TestVectorField> out;

  auto radial_parts = [R, cx, cy](double x, double y, double& b, double& bx, double& by) {
    double dx = x - cx, dy = y - cy;
    double r = std::sqrt(dx * dx + dy * dy);
    double t = r / R;
    b = bump(t);
    double bp = bump_prime(t) / R;
    if (r < 1e-14) {
      bx = by = 0.0;
    } else {
      bx = bp * dx / r;
      by = bp * dy / r;
    }
  };

  out.push_back({"translate-x",
                 [radial_parts](double x, double y, double* X) {
                   double b, bx, by;
                   radial_parts(x, y, b, bx, by);
                   X[0] = b;
                   X[1] = 0.0;
                 },
                 [radial_parts](double x, double y, double* J) {
                   double b, bx, by;
                   radial_parts(x, y, b, bx, by);
                   J[0] = bx;  // d1 X1
                   J[1] = by;  // d2 X1
                   J[2] = 0.0;
                   J[3] = 0.0;
                 }});
  out.push_back({"translate-y",
                 [radial_parts](double x, double y, double* X) {
                   double b, bx, by;
                   radial_parts(x, y, b, bx, by);
                   X[0] = 0.0;
                   X[1] = b;
                 },
                 [radial_parts](double x, double y, double* J) {
                   double b, bx, by;
                   radial_parts(x, y, b, bx, by);
                   J[0] = 0.0;
                   J[1] = 0.0;
                   J[2] = bx;
                   J[3] = by;
                 }});
  out.push_back({"dilate",
                 [radial_parts, cx, cy](double x, double y, double* X) {
                   double b, bx, by;
                   radial_parts(x, y, b, bx, by);
                   X[0] = (x - cx) * b;
                   X[1] = (y - cy) * b;
                 },
                 [radial_parts, cx, cy](double x, double y, double* J) {
                   double b, bx, by;
                   radial_parts(x, y, b, bx, by);
                   J[0] = b + (x - cx) * bx;
                   J[1] = (x - cx) * by;
                   J[2] = (y - cy) * bx;
                   J[3] = b + (y - cy) * by;
                 }});
  out.push_back({"rotate",
                 [radial_parts, cx, cy](double x, double y, double* X) {
                   double b, bx, by;
                   radial_parts(x, y, b, bx, by);
                   X[0] = -(y - cy) * b;
                   X[1] = (x - cx) * b;
                 },
                 [radial_parts, cx, cy](double x, double y, double* J) {
                   double b, bx, by;
                   radial_parts(x, y, b, bx, by);
                   J[0] = -(y - cy) * bx;
                   J[1] = -b - (y - cy) * by;
                   J[2] = b + (x - cx) * bx;
                   J[3] = (x - cx) * by;
                 }});
  // separable shear, the (sheraton)-style family
  double w = R / std::sqrt(2.0);
  out.push_back({"shear",
                 [w, cx, cy](double x, double y, double* X) {
                   X[0] = 0.0;
                   X[1] = bump((x - cx) / w) * bump((y - cy) / w);
                 },
                 [w, cx, cy](double x, double y, double* J) {
                   J[0] = 0.0;
                   J[1] = 0.0;
                   J[2] = bump_prime((x - cx) / w) / w * bump((y - cy) / w);
                   J[3] = bump((x - cx) / w) * bump_prime((y - cy) / w) / w;
                 }});
  return out;
}

StressResiduals stress_divergence_residual(const Field& f, const Potential& p,
                                           const TestVectorField& X) {
  const Grid& g = f.grid;
  std::vector<double> gr = gradient(f);
  StressTensor st = stress_tensor(f, p, &gr);
  HopfField om = hopf_differential(f, &gr);
  StressResiduals res;
  const double h2 = g.h * g.h;
  auto all = region_all();
  double complex_lhs = 0.0, complex_rhs = 0.0;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      double cov = g.cell_coverage(i, j, all);
      if (cov == 0.0) continue;
      int ids[4] = {g.idx(i, j), g.idx(i + 1, j), g.idx(i, j + 1), g.idx(i + 1, j + 1)};
      double t11 = 0.0, t12 = 0.0, ve = 0.0, ore = 0.0, oim = 0.0, w = 0.0;
      for (int m = 0; m < 4; ++m) {
        if (g.mask[ids[m]] == NodeKind::Outside) continue;
        t11 += st.t11[ids[m]];
        t12 += st.t12[ids[m]];
        ve += st.v_over_eps[ids[m]];
        ore += om.re[ids[m]];
        oim += om.im[ids[m]];
        w += 1.0;
      }
      if (w == 0.0) continue;
      t11 /= w;
      t12 /= w;
      ve /= w;
      ore /= w;
      oim /= w;
      double cxm = g.x(i) + 0.5 * g.h, cym = g.y(j) + 0.5 * g.h;
      double J[4];
      X.jac(cxm, cym, J);
      // A : grad X with A = T + (V/eps) Id, T22 = -T11
      double a11 = t11 + ve, a22 = -t11 + ve, a12 = t12;
      double contr = a11 * J[0] + a12 * J[1] + a12 * J[2] + a22 * J[3];
      res.real_form += contr * cov * h2;
      double amag = std::sqrt(a11 * a11 + a22 * a22 + 2.0 * a12 * a12);
      double jmag = std::sqrt(J[0] * J[0] + J[1] * J[1] + J[2] * J[2] + J[3] * J[3]);
      res.scale += amag * jmag * cov * h2;
      // complex form: Re(omega dX/dzbar) = (1/eps) V div X for solutions
      double re_dzbar = 0.5 * (J[0] - J[3]);
      double im_dzbar = 0.5 * (J[1] + J[2]);
      complex_lhs += (ore * re_dzbar - oim * im_dzbar) * cov * h2;
      complex_rhs += ve * (J[0] + J[3]) * cov * h2;
    }
  }
  res.complex_form = complex_lhs - complex_rhs;
  return res;
}

// ---------------------------------------------------------------------------
// Pohozaev
// ---------------------------------------------------------------------------

PohozaevResult pohozaev_residual(const Field& f, const Potential& p, const DiskSpec& d) {
  PohozaevResult r;
  RegionEnergy en = energy_on_disk(f, p, d);
  r.lhs = en.vmass / f.epsilon;  // eps^-2 integral V
  CircleSamples s = restrict_circle(f, d, circle_sample_count(f.grid, d.r));
  double acc = 0.0;
  const int k = f.k;
  for (int m = 0; m < s.n; ++m) {
    double t2 = 0.0, r2 = 0.0;
    for (int c = 0; c < k; ++c) {
      t2 += sq(s.du_dtau[size_t(m) * k + c]);
      r2 += sq(s.du_dr[size_t(m) * k + c]);
    }
    double V = p.eval(s.values.data() + size_t(m) * k);
    acc += (t2 - r2 + 2.0 * V / sq(f.epsilon)) * s.weight;
  }
  r.rhs = 0.25 * d.r * acc;
  r.residual = r.lhs - r.rhs;
  return r;
}

PohozaevInequality pohozaev_inequality_check(const Field& f, const Potential& p, const DiskSpec& d,
                                             double rel_slack) {
  PohozaevInequality r;
  RegionEnergy en = energy_on_disk(f, p, d);
  r.lhs = en.vmass;  // eps^-1 integral V
  CircleSamples s = restrict_circle(f, d, circle_sample_count(f.grid, d.r));
  double acc = 0.0;
  const int k = f.k;
  for (int m = 0; m < s.n; ++m) {
    double gn2 = 0.0;
    for (int c = 0; c < k; ++c)
      gn2 += sq(s.du_dtau[size_t(m) * k + c]) + sq(s.du_dr[size_t(m) * k + c]);
    double V = p.eval(s.values.data() + size_t(m) * k);
    acc += (0.5 * f.epsilon * gn2 + V / f.epsilon) * s.weight;
  }
  r.rhs = 0.5 * d.r * acc;
  double scale = std::max({r.lhs, r.rhs, 1e-300});
  r.slack = std::max(0.0, r.lhs - r.rhs) / scale;
  r.pass = r.slack <= rel_slack;
  return r;
}

std::vector<MonotonicityRow> monotonicity_profile(const Field& f, const Potential& p, double cx,
                                                  double cy, const std::vector<double>& radii) {
  EnergyDensity den = energy_density(f, p);
  std::vector<MonotonicityRow> rows;
  const int k = f.k;
  for (double r : radii) {
    DiskSpec d{cx, cy, r};
    if (!f.grid.domain.contains_disk(d, f.grid.h))
      throw MwError("RegionOutsideDomain", "monotonicity disk not inside domain");
    MonotonicityRow row;
    row.r = r;
    row.energy = integrate_nodal(f.grid, den.e, region_disk(d));
    row.e_over_r = row.energy / r;
    row.xi_integral = integrate_nodal(f.grid, den.xi, region_disk(d));
    CircleSamples s = restrict_circle(f, d, circle_sample_count(f.grid, r));
    double acc = 0.0;
    for (int m = 0; m < s.n; ++m) {
      double r2 = 0.0;
      for (int c = 0; c < k; ++c) r2 += sq(s.du_dr[size_t(m) * k + c]);
      acc += r2 * s.weight;
    }
    row.radial_term = acc / r;
    row.identity_rhs = row.xi_integral / (r * r) + row.radial_term;
    rows.push_back(row);
  }
  for (size_t i = 0; i < rows.size(); ++i) {
    size_t lo = i > 0 ? i - 1 : i;
    size_t hi = i + 1 < rows.size() ? i + 1 : i;
    if (hi > lo)
      rows[i].d_e_over_r = (rows[hi].e_over_r - rows[lo].e_over_r) / (rows[hi].r - rows[lo].r);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Modica-Mortola maps
// ---------------------------------------------------------------------------

double plateau_phi(double t, double mu0) {
  double half = 0.5 * mu0;
  if (t <= half) return t;
  if (t >= mu0) return 0.75 * mu0;
  double s = (t - half) / half;
  return half * (1.0 + s - 0.5 * s * s);
}

double plateau_phi_prime(double t, double mu0) {
  double half = 0.5 * mu0;
  if (t <= half) return 1.0;
  if (t >= mu0) return 0.0;
  return 1.0 - (t - half) / half;
}

std::vector<double> modica_mortola_map(const Field& f, const Potential& p,
                                       const StructuralConstants& c, int well) {
  if (well < 0 || well >= int(p.wells().size()))
    throw MwError("InvalidArgument", "well index out of range");
  const Grid& g = f.grid;
  const int k = f.k;
  const double* s = p.wells()[well].location.data();
  std::vector<double> w(size_t(g.nnodes()), 0.75 * c.mu0);
  for (size_t n = 0; n < w.size(); ++n) {
    if (g.mask[n] == NodeKind::Outside) continue;
    double d = std::sqrt(dist2(f.values.data() + n * k, s, k));
    w[n] = plateau_phi(d, c.mu0);
  }
  return w;
}

ModicaReport modica_mortola_check(const Field& f, const Potential& p, const StructuralConstants& c,
                                  int well, double rel_slack) {
  ModicaReport rep;
  const Grid& g = f.grid;
  const int k = f.k;
  const double* sw = p.wells()[well].location.data();
  std::vector<double> w = modica_mortola_map(f, p, c, well);
  std::vector<double> w2(w.size());
  for (size_t n = 0; n < w.size(); ++n) w2[n] = w[n] * w[n];
  std::vector<double> gw = gradient_scalar(g, w);
  std::vector<double> gw2 = gradient_scalar(g, w2);
  std::vector<double> gr = gradient(f);
  EnergyDensity den = energy_density(f, p, &gr);
  const double bv_const = 4.0 / std::sqrt(c.lambda0);
  for (int j = 0; j <= g.ny; ++j) {
    for (int i = 0; i <= g.nx; ++i) {
      if (g.kind(i, j) != NodeKind::Interior) continue;
      size_t n = size_t(g.idx(i, j));
      rep.nodes++;
      double gwn = std::hypot(gw[n * 2], gw[n * 2 + 1]);
      double gun = std::sqrt(den.grad_sq[n]);
      // plateau: the discrete gradient is exactly zero only when the whole
      // stencil sits on the plateau
      bool deep = true;
      for (int di = -1; di <= 1 && deep; ++di)
        for (int dj = -1; dj <= 1 && deep; ++dj) {
          if (std::abs(di) + std::abs(dj) != 1) continue;
          double d = std::sqrt(dist2(f.at(i + di, j + dj), sw, k));
          deep = d >= c.mu0;
        }
      if (deep && std::sqrt(dist2(f.at(i, j), sw, k)) >= c.mu0 && gwn != 0.0)
        rep.plateau_grad_violations++;
      if (gwn > gun * (1.0 + rel_slack) + 1e-12) rep.chain_rule_violations++;
      double gw2n = std::hypot(gw2[n * 2], gw2[n * 2 + 1]);
      double bound = bv_const * den.j[n];
      double scale = std::max({bound, gw2n, 1e-300});
      double excess = (gw2n - bound) / scale;
      if (excess > rel_slack) {
        rep.bv_violations++;
        rep.max_bv_excess = std::max(rep.max_bv_excess, excess);
      }
    }
  }
  return rep;
}

PointwiseInvariantReport pointwise_invariants(const Field& f, const Potential& p) {
  PointwiseInvariantReport rep;
  std::vector<double> gr = gradient(f);
  EnergyDensity den = energy_density(f, p, &gr);
  HopfField om = hopf_differential(f, &gr);
  const Grid& g = f.grid;
  for (size_t n = 0; n < size_t(g.nnodes()); ++n) {
    if (g.mask[n] == NodeKind::Outside) continue;
    rep.nodes++;
    if (den.j[n] > den.e[n]) rep.j_violations++;
    double mag = std::hypot(om.re[n], om.im[n]);
    if (mag > 2.0 * f.epsilon * den.grad_sq[n]) rep.hopf_violations++;
  }
  return rep;
}

}  // namespace mw
