#include "levelsets.hpp"

#include <algorithm>
#include <cmath>

namespace mw {

namespace {
constexpr double kPi = 3.14159265358979323846;

struct EdgePoint {
  double x, y;
};

// linear crossing on the edge between nodes a (va) and b (vb)
EdgePoint cross(double xa, double ya, double xb, double yb, double va, double vb, double s) {
  double t = (s - va) / (vb - va);
  t = std::min(std::max(t, 0.0), 1.0);
  return {xa + t * (xb - xa), ya + t * (yb - ya)};
}

}  // namespace

Polyline marching_squares(const Grid& g, const std::vector<double>& nodal, double level,
                          const RegionFn& region) {
  Polyline out;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      int ids[4] = {g.idx(i, j), g.idx(i + 1, j), g.idx(i + 1, j + 1), g.idx(i, j + 1)};
      bool indom = true;
      for (int m = 0; m < 4; ++m) indom = indom && g.mask[ids[m]] != NodeKind::Outside;
      if (!indom) continue;
      double cx = g.x(i) + 0.5 * g.h, cy = g.y(j) + 0.5 * g.h;
      if (!region(cx, cy)) continue;
      double v[4] = {nodal[ids[0]], nodal[ids[1]], nodal[ids[2]], nodal[ids[3]]};
      int code = 0;
      for (int m = 0; m < 4; ++m)
        if (v[m] >= level) code |= 1 << m;
      if (code == 0 || code == 15) continue;
      if (v[0] == level && v[1] == level && v[2] == level && v[3] == level) {
        out.degenerate_cells++;
        continue;
      }
      double x0 = g.x(i), y0 = g.y(j), x1 = g.x(i + 1), y1 = g.y(j + 1);
      // edge order: bottom (0-1), right (1-2), top (2-3), left (3-0)
      EdgePoint eb = cross(x0, y0, x1, y0, v[0], v[1], level);
      EdgePoint er = cross(x1, y0, x1, y1, v[1], v[2], level);
      EdgePoint et = cross(x1, y1, x0, y1, v[2], v[3], level);
      EdgePoint el = cross(x0, y1, x0, y0, v[3], v[0], level);
      auto add = [&](EdgePoint a, EdgePoint b) {
        out.segments.push_back({a.x, a.y, b.x, b.y});
        out.length += std::hypot(b.x - a.x, b.y - a.y);
      };
      switch (code) {
        case 1: case 14: add(el, eb); break;
        case 2: case 13: add(eb, er); break;
        case 3: case 12: add(el, er); break;
        case 4: case 11: add(er, et); break;
        case 6: case 9:  add(eb, et); break;
        case 7: case 8:  add(el, et); break;
        case 5: case 10: {
          // saddle: resolve by cell average
          double avg = 0.25 * (v[0] + v[1] + v[2] + v[3]);
          bool center_hi = avg >= level;
          if ((code == 5) == center_hi) {
            add(el, eb);
            add(er, et);
          } else {
            add(eb, er);
            add(el, et);
          }
          break;
        }
        default: break;
      }
    }
  }
  return out;
}

double level_line_integral(const Grid& g, const std::vector<double>& nodal, double level,
                           const std::vector<double>& weight, const RegionFn& region) {
  Polyline pl = marching_squares(g, nodal, level, region);
  double acc = 0.0;
  for (const auto& s : pl.segments) {
    double mx = 0.5 * (s[0] + s[2]), my = 0.5 * (s[1] + s[3]);
    acc += interp_scalar(g, weight, mx, my) * std::hypot(s[2] - s[0], s[3] - s[1]);
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Good radius / circle bounds
// ---------------------------------------------------------------------------

static CircleReport circle_report_from_samples(const CircleSamples& s, const Field& f,
                                               const Potential& p, const StructuralConstants& c) {
  CircleReport rep;
  rep.radius = s.radius;
  const int k = f.k;
  double esum = 0.0, jsum = 0.0, vsum = 0.0;
  for (int m = 0; m < s.n; ++m) {
    double gn2 = 0.0;
    for (int cc = 0; cc < k; ++cc)
      gn2 += sq(s.du_dtau[size_t(m) * k + cc]) + sq(s.du_dr[size_t(m) * k + cc]);
    double V = p.eval(s.values.data() + size_t(m) * k);
    esum += (0.5 * f.epsilon * gn2 + V / f.epsilon) * s.weight;
    jsum += std::sqrt(gn2 * std::max(V, 0.0)) * s.weight;
    vsum += V * s.weight;
  }
  rep.circle_energy = esum;
  rep.circle_jmass = jsum;
  rep.circle_vmass = vsum;

  // mean-value trick: the sample attaining the circle average of V
  double vavg = vsum / (2.0 * kPi * s.radius);
  int l0 = 0;
  double best = 1e300;
  for (int m = 0; m < s.n; ++m) {
    double V = p.eval(s.values.data() + size_t(m) * k);
    double d = std::fabs(V - vavg);
    if (d < best) {
      best = d;
      l0 = m;
    }
  }
  if (vavg < c.alpha0) {
    rep.case_tag = 1;
    auto nw = nearest_well(p, c, s.values.data() + size_t(l0) * k);
    rep.sigma_main = nw.well_index;
    rep.certified = true;
  } else {
    rep.case_tag = 2;
    // argmin of the mean squared distance over the circle
    int best_w = 0;
    double best_d = 1e300;
    for (int w = 0; w < int(p.wells().size()); ++w) {
      double acc = 0.0;
      for (int m = 0; m < s.n; ++m)
        acc += dist2(s.values.data() + size_t(m) * k, p.wells()[w].location.data(), k);
      if (acc < best_d) {
        best_d = acc;
        best_w = w;
      }
    }
    rep.sigma_main = best_w;
    rep.certified = false;
  }
  double sup = 0.0;
  for (int m = 0; m < s.n; ++m)
    sup = std::max(sup,
                   std::sqrt(dist2(s.values.data() + size_t(m) * k,
                                   p.wells()[rep.sigma_main].location.data(), k)));
  rep.sup_dist = sup;
  double bound = c.c_unf * std::sqrt(std::max(esum, 0.0));
  rep.bound_slack = std::max(0.0, sup - bound) / std::max({sup, bound, 1e-300});
  return rep;
}

CircleReport circle_uniform_bound(const CircleSamples& s, const Field& f, const Potential& p,
                                  const StructuralConstants& c) {
  return circle_report_from_samples(s, f, p, c);
}

GoodRadius good_radius(const Field& f, const Potential& p, double cx, double cy, double r0,
                       double r1) {
  if (!(f.epsilon <= r0 && r0 < r1))
    throw MwError("InvalidArgument", "good_radius needs eps <= r0 < r1");
  if (!f.grid.domain.contains_disk(DiskSpec{cx, cy, r1}))
    throw MwError("AnnulusOutsideDomain", "annulus not inside domain");
  std::vector<double> grads = gradient(f);
  EnergyDensity den = energy_density(f, p, &grads);
  int n_r = std::max(4, int(std::ceil((r1 - r0) / f.grid.h)));
  GoodRadius best;
  best.mean_bound =
      integrate_nodal(f.grid, den.e, region_disk(DiskSpec{cx, cy, r1})) / (r1 - r0);
  double best_energy = 1e300;
  for (int m = 0; m <= n_r; ++m) {
    double r = r0 + (r1 - r0) * m / n_r;
    CircleSamples s = restrict_circle(f, DiskSpec{cx, cy, r}, circle_sample_count(f.grid, r), &grads);
    double esum = 0.0;
    const int k = f.k;
    for (int q = 0; q < s.n; ++q) {
      double gn2 = 0.0;
      for (int cc = 0; cc < k; ++cc)
        gn2 += sq(s.du_dtau[size_t(q) * k + cc]) + sq(s.du_dr[size_t(q) * k + cc]);
      esum += (0.5 * f.epsilon * gn2 + p.eval(s.values.data() + size_t(q) * k) / f.epsilon) *
              s.weight;
    }
    if (esum < best_energy) {
      best_energy = esum;
      best.r = r;
    }
  }
  (void)cns;
  CircleSamples s =
      restrict_circle(f, DiskSpec{cx, cy, best.r}, circle_sample_count(f.grid, best.r), &grads);
  // report without certification machinery when constants are not supplied
  best.report.radius = best.r;
  best.report.circle_energy = best_energy;
  best.slack =
      std::max(0.0, best_energy - best.mean_bound) / std::max({best.mean_bound, best_energy, 1e-300});
  (void)s;
  return best;
}

double fit_uniform_circle_constant(const Potential& p, const StructuralConstants& c) {
  // synthetic loops u(theta) on S^1(1) with eps = 1/2: excursions from a well
  // of growing amplitude plus two-well transitions; the worst observed
  // sup-dist / sqrt(circle energy) ratio calibrates C_unf
  const int k = p.k();
  const int n = 512;
  const double eps = 0.5, r = 1.0;
  double worst = 0.0;
  auto ratio_for = [&](const std::vector<double>& loop) {
    // loop: n*k samples
    double esum = 0.0;
    for (int m = 0; m < n; ++m) {
      double gn2 = 0.0;
      for (int cc = 0; cc < k; ++cc) {
        double fwd = loop[size_t((m + 1) % n) * k + cc];
        double bwd = loop[size_t((m + n - 1) % n) * k + cc];
        gn2 += sq((fwd - bwd) / (2.0 * 2.0 * kPi * r / n));
      }
      double V = p.eval(loop.data() + size_t(m) * k);
      esum += (0.5 * eps * gn2 + V / eps) * (2.0 * kPi * r / n);
    }
    // the bound certifies against sigma_main from the mean-value trick; for
    // calibration we take the most favorable well (the bound must hold for it)
    double best_sup = 1e300;
    for (const auto& w : p.wells()) {
      double sup = 0.0;
      for (int m = 0; m < n; ++m)
        sup = std::max(sup, std::sqrt(dist2(loop.data() + size_t(m) * k, w.location.data(), k)));
      best_sup = std::min(best_sup, sup);
    }
    return best_sup / std::sqrt(std::max(esum, 1e-300));
  };
  std::vector<double> loop(size_t(n) * k);
  for (int amp_i = 1; amp_i <= 8; ++amp_i) {
    double amp = amp_i * 0.5 * c.mu0;
    for (size_t wi = 0; wi < p.wells().size(); ++wi) {
      for (int m = 0; m < n; ++m) {
        double th = 2.0 * kPi * m / n;
        for (int cc = 0; cc < k; ++cc)
          loop[size_t(m) * k + cc] =
              p.wells()[wi].location[cc] + amp * std::sin(th) * (cc == 0 ? 1.0 : 0.5);
      }
      worst = std::max(worst, ratio_for(loop));
    }
  }
  if (p.wells().size() >= 2) {
    // a loop running from well 0 to well 1 and back
    const auto& a = p.wells()[0].location;
    const auto& b = p.wells()[1].location;
    for (int m = 0; m < n; ++m) {
      double t = 0.5 * (1.0 - std::cos(2.0 * kPi * m / n));
      for (int cc = 0; cc < k; ++cc) loop[size_t(m) * k + cc] = a[cc] + t * (b[cc] - a[cc]);
    }
    worst = std::max(worst, ratio_for(loop));
  }
  return std::max(c.c_unf, 1.05 * worst);
}

// ---------------------------------------------------------------------------
// Coarea
// ---------------------------------------------------------------------------

CoareaTable coarea_integral(const Grid& g, const std::vector<double>& nodal, double smax,
                            int n_levels, const RegionFn& region, double bound) {
  CoareaTable t;
  t.bound = bound;
  double ds = smax / n_levels;
  for (int m = 0; m < n_levels; ++m) {
    double s = (m + 0.5) * ds;
    Polyline pl = marching_squares(g, nodal, s, region);
    t.levels.push_back(s);
    t.lengths.push_back(pl.length);
    t.integral += pl.length * ds;
  }
  t.slack = std::max(0.0, t.integral - bound) / std::max({bound, t.integral, 1e-300});
  return t;
}

CoareaTable coarea_length(const Field& f, const Potential& p, const StructuralConstants& c,
                          int well, const RegionFn& region, double region_energy) {
  std::vector<double> w = modica_mortola_map(f, p, c, well);
  std::vector<double> w2(w.size());
  for (size_t n = 0; n < w.size(); ++n) w2[n] = w[n] * w[n];
  double smax = sq(0.75 * c.mu0);
  double bound = 4.0 / std::sqrt(c.lambda0) * region_energy;
  return coarea_integral(f.grid, w2, smax, 32, region, bound);
}

LevelSetReport select_level(const Field& f, const Potential& p, const StructuralConstants& c,
                            int well, double A, const RegionFn& region, double region_energy) {
  if (!(A <= 0.75 * c.mu0 + 1e-15))
    throw MwError("InvalidArgument", "select_level needs A <= 3 mu0 / 4");
  std::vector<double> w = modica_mortola_map(f, p, c, well);
  LevelSetReport rep;
  rep.bound = 8.0 * region_energy / (std::sqrt(c.lambda0) * A * A);
  double best_len = 1e300;
  bool any_regular = false;
  const int n_scan = 17;
  for (int m = 0; m < n_scan; ++m) {
    double a0 = 0.5 * A + 0.5 * A * m / (n_scan - 1);
    Polyline pl = marching_squares(f.grid, w, a0, region);
    bool regular = pl.degenerate_cells == 0;
    any_regular = any_regular || regular;
    if (pl.length < best_len) {
      best_len = pl.length;
      rep.level = a0;
      rep.length = pl.length;
      rep.cells_crossed = int(pl.segments.size());
    }
  }
  rep.regular = any_regular;
  rep.bound_pass = rep.length <= rep.bound * (1.0 + 1e-9);
  return rep;
}

// ---------------------------------------------------------------------------
// Upsilon / Theta
// ---------------------------------------------------------------------------

namespace {

// cell weights from a pointwise predicate on the interpolated field
std::vector<double> cell_weights_from_predicate(
    const Field& f, const std::function<bool(const double*, double, double)>& pred,
    const RegionFn& region) {
  const Grid& g = f.grid;
  std::vector<double> w(size_t(g.ncells()), 0.0);
  std::vector<double> u(f.k);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      int cnt = 0;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          double px = g.x(i) + (0.25 + 0.5 * a) * g.h;
          double py = g.y(j) + (0.25 + 0.5 * b) * g.h;
          if (!g.domain.contains_point(px, py) || !region(px, py)) continue;
          f.interp(px, py, u.data());
          if (pred(u.data(), px, py)) ++cnt;
        }
      w[size_t(j) * g.nx + i] = 0.25 * cnt;
    }
  return w;
}

}  // namespace

std::vector<double> upsilon_cell_weights(const Field& f, const Potential& p, int well, double kappa,
                                         const RegionFn& region) {
  const double* loc = p.wells()[well].location.data();
  const int k = f.k;
  return cell_weights_from_predicate(
      f, [loc, kappa, k](const double* u, double, double) { return dist2(u, loc, k) <= kappa * kappa; },
      region);
}

std::vector<double> theta_cell_weights(const Field& f, const Potential& p, double radius_param,
                                       const RegionFn& region) {
  const int k = f.k;
  const auto& wells = p.wells();
  return cell_weights_from_predicate(
      f,
      [&wells, radius_param, k](const double* u, double, double) {
        for (const auto& w : wells)
          if (dist2(u, w.location.data(), k) <= radius_param * radius_param) return false;
        return true;
      },
      region);
}

RegionFamilyChecks region_family_checks(const Field& f, const Potential& p,
                                        const StructuralConstants& c, double kappa,
                                        const DiskSpec& disk) {
  RegionFamilyChecks out;
  auto region = region_disk(disk);
  const Grid& g = f.grid;
  std::vector<std::vector<double>> ups;
  for (int w = 0; w < int(p.wells().size()); ++w)
    ups.push_back(upsilon_cell_weights(f, p, w, kappa, region));
  std::vector<double> theta = theta_cell_weights(f, p, kappa, region);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      double cov = g.cell_coverage(i, j, region);
      double sum = 0.0;
      for (const auto& u : ups) sum += u[size_t(j) * g.nx + i];
      out.disjointness_violation = std::max(out.disjointness_violation, sum - cov);
      double ident = std::fabs(theta[size_t(j) * g.nx + i] + sum - cov);
      out.cover_identity_error = std::max(out.cover_identity_error, ident);
    }
  (void)c;
  return out;
}

// ---------------------------------------------------------------------------
// Radius sets on the unit disk
// ---------------------------------------------------------------------------

RadiusSetResult radius_set_measure(const Field& f, const Potential& p,
                                   const StructuralConstants& c, int sigma, double kappa,
                                   double rho) {
  const double* loc = p.wells()[sigma].location.data();
  const int k = f.k;
  std::vector<double> grads = gradient(f);
  auto sup_on_circle = [&](double r) {
    CircleSamples s = restrict_circle(f, DiskSpec{0, 0, r}, circle_sample_count(f.grid, r), &grads);
    double sup = 0.0;
    for (int m = 0; m < s.n; ++m)
      sup = std::max(sup, std::sqrt(dist2(s.values.data() + size_t(m) * k, loc, k)));
    return sup;
  };
  if (sup_on_circle(rho) >= kappa)
    throw MwError("BoundaryConditionViolated", "|u - sigma| >= kappa on the rho circle");

  RadiusSetResult out;
  double e_total = energy_on_region(f, p, region_disk(DiskSpec{0, 0, 1.0})).energy;
  out.camembert_ok = kappa * kappa >= e_total / (32.0 * std::sqrt(c.lambda0));
  out.lower_bound = rho - 9.0 / 16.0;
  int n_r = std::max(32, int(std::ceil((rho - 0.5) / f.grid.h)));
  int members = 0;
  for (int m = 0; m <= n_r; ++m) {
    double r = 0.5 + (rho - 0.5) * m / n_r;
    bool in = sup_on_circle(r) <= kappa;
    out.radii.push_back(r);
    out.member.push_back(in ? 1 : 0);
    if (in) ++members;
  }
  out.measure = (rho - 0.5) * members / double(n_r + 1);
  if (out.camembert_ok) {
    out.bound_asserted = true;
    out.bound_pass = out.measure >= out.lower_bound - 1e-9;
  }
  return out;
}

GoodCircleUpsilon good_circle_in_upsilon(const Field& f, const Potential& p,
                                         const StructuralConstants& c, int sigma, double kappa,
                                         double rho) {
  if (rho < 0.75) throw MwError("InvalidArgument", "good_circle_in_upsilon needs rho >= 3/4");
  RadiusSetResult rs = radius_set_measure(f, p, c, sigma, kappa, rho);
  std::vector<double> grads = gradient(f);
  EnergyDensity den = energy_density(f, p, &grads);
  GoodCircleUpsilon out;
  std::vector<double> ups = upsilon_cell_weights(f, p, sigma, kappa, region_disk(DiskSpec{0, 0, rho}));
  double e_ups = integrate_nodal_cellweights(f.grid, den.e, ups);
  out.bound = e_ups / (rho - 11.0 / 16.0);
  double best = 1e300;
  bool found = false;
  for (size_t m = 0; m < rs.radii.size(); ++m) {
    if (!rs.member[m] || rs.radii[m] < 5.0 / 8.0) continue;
    double r = rs.radii[m];
    CircleSamples s = restrict_circle(f, DiskSpec{0, 0, r}, circle_sample_count(f.grid, r), &grads);
    CircleReport rep = circle_report_from_samples(s, f, p, c);
    if (rep.circle_energy < best) {
      best = rep.circle_energy;
      out.tau = r;
      out.report = rep;
      found = true;
    }
  }
  if (!found) throw MwError("EmptyRadiusSet", "no admissible radius in [5/8, rho]");
  out.slack = std::max(0.0, best - out.bound) / std::max({out.bound, best, 1e-300});
  return out;
}

// ---------------------------------------------------------------------------
// Gradient bounds on level sets
// ---------------------------------------------------------------------------

LevelGradientResult level_gradient_bound(const Field& f, const Potential& p,
                                         const StructuralConstants& c, double r) {
  auto region = region_disk(DiskSpec{0, 0, r});
  std::vector<double> grads = gradient(f);
  EnergyDensity den = energy_density(f, p, &grads);
  std::vector<double> gnorm(den.grad_sq.size());
  for (size_t n = 0; n < gnorm.size(); ++n) gnorm[n] = std::sqrt(den.grad_sq[n]);

  const int q = int(p.wells().size());
  std::vector<std::vector<double>> wmaps;
  for (int w = 0; w < q; ++w) wmaps.push_back(modica_mortola_map(f, p, c, w));

  LevelGradientResult out;
  const int n_scan = 9;
  double best = 1e300;
  for (int m = 0; m < n_scan; ++m) {
    double mu = 0.5 * c.mu0 + 0.5 * c.mu0 * m / (n_scan - 1);
    double tot = 0.0;
    std::vector<double> per(q, 0.0);
    for (int w = 0; w < q; ++w) {
      per[w] = level_line_integral(f.grid, wmaps[w], mu, gnorm, region);
      tot += per[w];
    }
    if (tot < best) {
      best = tot;
      out.mu_tilde = mu;
      out.per_well = per;
      out.total = tot;
    }
  }
  std::vector<double> theta = theta_cell_weights(f, p, 0.5 * c.mu0, region);
  double gradsq_theta = integrate_nodal_cellweights(f.grid, den.grad_sq, theta);
  double e_theta = integrate_nodal_cellweights(f.grid, den.e, theta);
  out.rhs_gradsq = 2.0 / c.mu0 * gradsq_theta;
  out.rhs_energy = 4.0 / (c.mu0 * f.epsilon) * e_theta;
  out.slack = std::max(0.0, out.total - out.rhs_gradsq) /
              std::max({out.rhs_gradsq, out.total, 1e-300});
  return out;
}

double normal_flux(const Field& f, const Potential& p, const StructuralConstants& c, int well,
                   double kappa, const RegionFn& region) {
  // Gamma(kappa) is the kappa level of d = |u - sigma_i|; the outward normal
  // derivative of d along its own level line is |grad d|
  (void)c;
  const Grid& g = f.grid;
  const int k = f.k;
  const double* loc = p.wells()[well].location.data();
  std::vector<double> d(size_t(g.nnodes()), 0.0);
  for (size_t n = 0; n < d.size(); ++n) {
    if (g.mask[n] == NodeKind::Outside) continue;
    d[n] = std::sqrt(dist2(f.values.data() + n * k, loc, k));
  }
  std::vector<double> gd = gradient_scalar(g, d);
  std::vector<double> gmag(size_t(g.nnodes()), 0.0);
  for (size_t n = 0; n < gmag.size(); ++n) gmag[n] = std::hypot(gd[n * 2], gd[n * 2 + 1]);
  return level_line_integral(g, d, kappa, gmag, region);
}

}  // namespace mw
