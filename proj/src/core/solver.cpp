#include "solver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "linalg.hpp"

namespace mw {

namespace {

constexpr double kPi = 3.14159265358979323846;

void ensure_well_eigs(const Potential& p) {
  bool have = true;
  for (const auto& w : p.wells()) have = have && w.hess_min > 0.0;
  if (have) return;
  std::vector<double> h(p.k() * p.k());
  for (auto& w : const_cast<Potential&>(p).wells()) {
    p.hess(w.location.data(), h.data());
    symmetric_eigenvalue_range(h, p.k(), w.hess_min, w.hess_max);
  }
}

double lambda_max_of(const Potential& p) {
  ensure_well_eigs(p);
  double lm = 0.0;
  for (const auto& w : p.wells()) lm = std::max(lm, w.hess_max);
  return lm;
}

double sup_radius(const Potential& p) {
  double r0 = 0.0;
  for (const auto& w : p.wells()) r0 = std::max(r0, std::sqrt(norm2(w.location.data(), p.k())));
  return r0;
}

// Graph Laplacian over in-domain neighbors (summation-by-parts form).  Under
// Dirichlet data the boundary nodes are pinned and contribute through the
// right-hand side; under Neumann missing edges are simply dropped (zero
// flux), which keeps the operator symmetric.
void apply_minus_lap(const Field& f, const std::vector<double>& x, std::vector<double>& y,
                     bool dirichlet) {
  const Grid& g = f.grid;
  const int k = f.k;
  const double ih2 = 1.0 / (g.h * g.h);
  Parallel::for_range(size_t(g.ny + 1), [&](size_t jlo, size_t jhi) {
    for (size_t jj = jlo; jj < jhi; ++jj) {
      int j = int(jj);
      for (int i = 0; i <= g.nx; ++i) {
        size_t n = size_t(g.idx(i, j));
        NodeKind kind = g.kind(i, j);
        if (kind == NodeKind::Outside || (dirichlet && kind == NodeKind::Boundary)) {
          for (int c = 0; c < k; ++c) y[n * k + c] = 0.0;
          continue;
        }
        auto active = [&](int ii, int jj2) {
          if (ii < 0 || ii > g.nx || jj2 < 0 || jj2 > g.ny) return false;
          NodeKind kk = g.kind(ii, jj2);
          if (kk == NodeKind::Outside) return false;
          if (dirichlet && kk == NodeKind::Boundary) return false;
          return true;
        };
        int di[4] = {-1, 1, 0, 0};
        int dj[4] = {0, 0, -1, 1};
        for (int c = 0; c < k; ++c) {
          double acc = 0.0;
          for (int m = 0; m < 4; ++m) {
            int ii = i + di[m], jj2 = j + dj[m];
            bool indom = ii >= 0 && ii <= g.nx && jj2 >= 0 && jj2 <= g.ny && g.in_domain(ii, jj2);
            if (!indom) continue;  // Neumann: dropped edge
            acc += x[n * k + c] - (active(ii, jj2) ? x[size_t(g.idx(ii, jj2)) * k + c] : 0.0);
          }
          y[n * k + c] = acc * ih2;
        }
      }
    }
  });
}

bool solver_node(const Grid& g, size_t n, bool dirichlet) {
  NodeKind kind = g.mask[n];
  if (kind == NodeKind::Outside) return false;
  if (dirichlet && kind == NodeKind::Boundary) return false;
  return true;
}

double dot_active(const Grid& g, int k, const std::vector<double>& a, const std::vector<double>& b,
                  bool dirichlet) {
  double acc = 0.0;
  for (size_t n = 0; n < size_t(g.nnodes()); ++n) {
    if (!solver_node(g, n, dirichlet)) continue;
    for (int c = 0; c < k; ++c) acc += a[n * k + c] * b[n * k + c];
  }
  return acc;
}

// CG for y = (alpha I - dt L) x = rhs (helmholtz) or J x = rhs with a
// pointwise PSD block H added; apply is passed in.
int conjugate_gradient(const Field& f, bool dirichlet,
                       const std::function<void(const std::vector<double>&, std::vector<double>&)>& apply,
                       const std::vector<double>& rhs, std::vector<double>& x, double rel_tol,
                       int max_iter) {
  const Grid& g = f.grid;
  const int k = f.k;
  size_t sz = rhs.size();
  std::vector<double> r(sz, 0.0), pdir(sz, 0.0), ap(sz, 0.0);
  apply(x, ap);
  for (size_t n = 0; n < sz; ++n) r[n] = rhs[n] - ap[n];
  for (size_t n = 0; n < size_t(g.nnodes()); ++n)
    if (!solver_node(g, n, dirichlet))
      for (int c = 0; c < k; ++c) r[n * k + c] = 0.0;
  pdir = r;
  double rr = dot_active(g, k, r, r, dirichlet);
  double rr0 = rr;
  if (rr0 == 0.0) return 0;
  int it = 0;
  for (; it < max_iter; ++it) {
    apply(pdir, ap);
    double pap = dot_active(g, k, pdir, ap, dirichlet);
    if (pap <= 0.0) return -1;  // lost positivity: caller falls back
    double alpha = rr / pap;
    for (size_t n = 0; n < size_t(g.nnodes()); ++n) {
      if (!solver_node(g, n, dirichlet)) continue;
      for (int c = 0; c < k; ++c) {
        x[n * k + c] += alpha * pdir[n * k + c];
        r[n * k + c] -= alpha * ap[n * k + c];
      }
    }
    double rr_new = dot_active(g, k, r, r, dirichlet);
    if (rr_new <= rel_tol * rel_tol * rr0) return it + 1;
    double beta = rr_new / rr;
    rr = rr_new;
    for (size_t n = 0; n < size_t(g.nnodes()); ++n) {
      if (!solver_node(g, n, dirichlet)) continue;
      for (int c = 0; c < k; ++c) pdir[n * k + c] = r[n * k + c] + beta * pdir[n * k + c];
    }
  }
  return it;
}

}  // namespace

// ---------------------------------------------------------------------------
// Boundary data
// ---------------------------------------------------------------------------

double heteroclinic_energy(const Potential& p, int well_a, int well_b, int n_quad) {
  const auto& a = p.wells()[well_a].location;
  const auto& b = p.wells()[well_b].location;
  const int k = p.k();
  double len = std::sqrt(dist2(a.data(), b.data(), k));
  std::vector<double> y(k);
  double acc = 0.0;
  for (int m = 0; m < n_quad; ++m) {
    double t = (m + 0.5) / n_quad;
    for (int c = 0; c < k; ++c) y[c] = a[c] + t * (b[c] - a[c]);
    acc += std::sqrt(2.0 * std::max(p.eval(y.data()), 0.0));
  }
  return acc * len / n_quad;
}

BoundaryData make_boundary_data(const std::string& spec, const Potential& p, const DomainSpec& dom,
                                double epsilon) {
  BoundaryData bd;
  bd.preset = spec;
  const int k = p.k();
  auto c = dom.center();
  double cx = c[0], cy = c[1];
  auto colon = spec.find(':');
  std::string head = spec.substr(0, colon);
  std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);

  if (head == "constant-well") {
    int i = arg.empty() ? 0 : std::stoi(arg);
    if (i < 0 || i >= int(p.wells().size()))
      throw MwError("ConfigError", "constant-well index out of range");
    std::vector<double> w = p.wells()[i].location;
    bd.value = [w, k](double, double, double* out) {
      for (int c2 = 0; c2 < k; ++c2) out[c2] = w[c2];
    };
    return bd;
  }
  if (head == "constant-well-perturbed") {
    // constant well plus a smooth angular bump; used for low-energy families
    std::istringstream ss(arg);
    int i = 0;
    double amp = 0.1;
    char comma;
    ss >> i;
    if (ss >> comma >> amp) {
    }
    std::vector<double> w = p.wells()[i].location;
    bd.value = [w, k, amp, cx, cy](double x, double y, double* out) {
      double th = std::atan2(y - cy, x - cx);
      double b = amp * std::cos(2.0 * th);
      for (int c2 = 0; c2 < k; ++c2) out[c2] = w[c2] + (c2 == 0 ? b : 0.0);
    };
    return bd;
  }
  if (head == "two-phase") {
    double ang = arg.empty() ? 0.0 : std::stod(arg);
    ang *= kPi / 180.0;
    if (p.wells().size() < 2) throw MwError("ConfigError", "two-phase needs q >= 2");
    std::vector<double> a = p.wells()[0].location, b = p.wells()[1].location;
    double nxv = -std::sin(ang), nyv = std::cos(ang);
    double eps = epsilon;
    bd.value = [a, b, k, nxv, nyv, cx, cy, eps](double x, double y, double* out) {
      double d = (x - cx) * nxv + (y - cy) * nyv;
      double s = std::tanh(d / (std::sqrt(2.0) * eps));
      for (int c2 = 0; c2 < k; ++c2) out[c2] = 0.5 * (a[c2] + b[c2]) + 0.5 * (b[c2] - a[c2]) * s;
    };
    return bd;
  }
  if (head == "three-phase") {
    std::vector<double> angs;
    std::istringstream ss(arg);
    std::string tok;
    while (std::getline(ss, tok, ',')) angs.push_back(std::stod(tok) * kPi / 180.0);
    if (angs.size() != 3) throw MwError("ConfigError", "three-phase:a1,a2,a3 needs three angles");
    if (p.wells().size() < 3) throw MwError("ConfigError", "three-phase needs q >= 3");
    std::sort(angs.begin(), angs.end());
    double eps = epsilon;
    std::vector<std::vector<double>> wl;
    for (int i = 0; i < 3; ++i) wl.push_back(p.wells()[i].location);
    bd.value = [angs, wl, k, cx, cy, eps](double x, double y, double* out) {
      auto wrap = [](double a) {
        while (a < 0) a += 2.0 * kPi;
        while (a >= 2.0 * kPi) a -= 2.0 * kPi;
        return a;
      };
      double rr = std::max(std::hypot(x - cx, y - cy), 1e-12);
      double a0 = wrap(angs[0]);
      double phi = wrap(std::atan2(y - cy, x - cx));
      if (phi < a0) phi += 2.0 * kPi;
      double b1 = a0 + wrap(angs[1] - angs[0]);
      double b2 = a0 + wrap(angs[2] - angs[0]);
      int sector = phi < b1 ? 0 : (phi < b2 ? 1 : 2);
      double lo = sector == 0 ? a0 : (sector == 1 ? b1 : b2);
      double hi = sector == 0 ? b1 : (sector == 1 ? b2 : a0 + 2.0 * kPi);
      int prev = (sector + 2) % 3, next = (sector + 1) % 3;
      double d_lo = rr * (phi - lo);
      double d_hi = rr * (hi - phi);
      for (int c2 = 0; c2 < k; ++c2) {
        double v = wl[sector][c2];
        v += 0.5 * (wl[prev][c2] - wl[sector][c2]) * (1.0 - std::tanh(d_lo / (std::sqrt(2.0) * eps)));
        v += 0.5 * (wl[next][c2] - wl[sector][c2]) * (1.0 - std::tanh(d_hi / (std::sqrt(2.0) * eps)));
        out[c2] = v;
      }
    };
    return bd;
  }
  if (head == "trace") {
    std::ifstream in(arg);
    if (!in) throw MwError("IoError", "cannot read boundary trace " + arg);
    std::vector<double> thetas;
    std::vector<std::vector<double>> vals;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::istringstream ls(line);
      std::string cell;
      std::vector<double> row;
      while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
      if (int(row.size()) != k + 1) throw MwError("ConfigError", "trace row arity != 1 + k");
      thetas.push_back(row[0] * kPi / 180.0);
      vals.push_back(std::vector<double>(row.begin() + 1, row.end()));
    }
    if (thetas.size() < 2) throw MwError("ConfigError", "trace needs at least two rows");
    bd.value = [thetas, vals, k, cx, cy](double x, double y, double* out) {
      double th = std::atan2(y - cy, x - cx);
      if (th < thetas.front()) th += 2.0 * kPi;
      size_t hi = 0;
      while (hi < thetas.size() && thetas[hi] < th) ++hi;
      size_t lo = (hi == 0 || hi == thetas.size()) ? thetas.size() - 1 : hi - 1;
      double tlo = thetas[lo], thi = hi == thetas.size() ? thetas.front() + 2.0 * kPi : thetas[hi];
      size_t hidx = hi == thetas.size() ? 0 : hi;
      double t = (thi - tlo) > 1e-12 ? (th - tlo) / (thi - tlo) : 0.0;
      for (int c2 = 0; c2 < k; ++c2)
        out[c2] = (1.0 - t) * vals[lo][c2] + t * vals[hidx][c2];
    };
    return bd;
  }
  throw MwError("ConfigError", "unknown boundary preset: " + spec);
}

Field make_seeded_field(const Potential& p, const DomainSpec& dom, double epsilon,
                        const BoundaryData& bd, const SolveConfig& cfg, const Field* warm_start) {
  Field f;
  double h = epsilon / cfg.grid_rule_m;
  if (dom.type == DomainSpec::Type::Rectangle)
    f.grid = Grid::make_rectangle(dom.x0, dom.y0, dom.x1, dom.y1, h);
  else
    f.grid = Grid::make_disk(dom.disk, h);
  f.k = p.k();
  f.epsilon = epsilon;
  f.bc = BcKind::Dirichlet;
  f.values.assign(size_t(f.grid.nnodes()) * f.k, 0.0);
  const Grid& g = f.grid;
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i) bd.value(g.x(i), g.y(j), f.at(i, j));
  if (warm_start) {
    for (int j = 0; j <= g.ny; ++j)
      for (int i = 0; i <= g.nx; ++i)
        if (g.kind(i, j) == NodeKind::Interior) warm_start->interp(g.x(i), g.y(j), f.at(i, j));
  } else if (cfg.seed_strategy == "from-wells-voronoi") {
    for (int j = 0; j <= g.ny; ++j)
      for (int i = 0; i <= g.nx; ++i) {
        if (g.kind(i, j) != NodeKind::Interior) continue;
        double* u = f.at(i, j);
        int best = 0;
        double bd2 = 1e300;
        for (int w = 0; w < int(p.wells().size()); ++w) {
          double d2 = dist2(u, p.wells()[w].location.data(), f.k);
          if (d2 < bd2) {
            bd2 = d2;
            best = w;
          }
        }
        for (int c = 0; c < f.k; ++c) u[c] = p.wells()[best].location[c];
      }
  }
  // "from-boundary" keeps the plane extension of the boundary data as seed
  return f;
}

// ---------------------------------------------------------------------------
// Relaxation
// ---------------------------------------------------------------------------

void relax(Field& f, const Potential& p, int steps, const SolveConfig& cfg,
           std::vector<double>* energy_history, int* monotone_violations,
           double stop_when_scaled_residual_below) {
  ensure_well_eigs(p);
  const double lmax = lambda_max_of(p);
  const double dt = cfg.flow_dt_safety * f.epsilon * f.epsilon / lmax;
  const double blow = 10.0 * (sup_radius(p) + 1.0);
  const Grid& g = f.grid;
  const int k = f.k;
  const bool dirichlet = f.bc == BcKind::Dirichlet;
  const size_t sz = f.values.size();
  std::vector<double> rhs(sz, 0.0), x(sz, 0.0), bc_term(sz, 0.0);

  auto apply = [&](const std::vector<double>& in, std::vector<double>& out) {
    apply_minus_lap(f, in, out, dirichlet);
    for (size_t n = 0; n < size_t(g.nnodes()); ++n) {
      if (!solver_node(g, n, dirichlet)) {
        for (int c = 0; c < k; ++c) out[n * k + c] = 0.0;
        continue;
      }
      for (int c = 0; c < k; ++c) out[n * k + c] = in[n * k + c] + dt * out[n * k + c];
    }
  };

  // Dirichlet coupling of pinned boundary values enters the right-hand side
  auto boundary_rhs = [&](std::vector<double>& out) {
    std::fill(out.begin(), out.end(), 0.0);
    if (!dirichlet) return;
    const double s = dt / (g.h * g.h);
    for (int j = 0; j <= g.ny; ++j)
      for (int i = 0; i <= g.nx; ++i) {
        if (g.kind(i, j) != NodeKind::Interior) continue;
        int di[4] = {-1, 1, 0, 0};
        int dj[4] = {0, 0, -1, 1};
        for (int m = 0; m < 4; ++m) {
          int ii = i + di[m], jj = j + dj[m];
          if (g.kind(ii, jj) == NodeKind::Boundary)
            for (int c = 0; c < k; ++c)
              out[size_t(g.idx(i, j)) * k + c] += s * f.at(ii, jj)[c];
        }
      }
  };
  boundary_rhs(bc_term);

  double last_energy = 0.0;
  bool have_energy = false;
  std::vector<double> gvec(k);
  for (int step = 0; step < steps; ++step) {
    // explicit potential descent
    for (size_t n = 0; n < size_t(g.nnodes()); ++n) {
      if (!solver_node(g, n, dirichlet)) {
        for (int c = 0; c < k; ++c) rhs[n * k + c] = 0.0;
        continue;
      }
      const double* u = f.values.data() + n * k;
      p.grad(u, gvec.data());
      for (int c = 0; c < k; ++c)
        rhs[n * k + c] = u[c] - dt / (f.epsilon * f.epsilon) * gvec[c];
    }
    for (size_t n = 0; n < sz; ++n) rhs[n] += bc_term[n];
    x = f.values;
    for (size_t n = 0; n < size_t(g.nnodes()); ++n)
      if (!solver_node(g, n, dirichlet))
        for (int c = 0; c < k; ++c) x[n * k + c] = 0.0;
    conjugate_gradient(f, dirichlet, apply, rhs, x, 1e-10, 400);
    for (size_t n = 0; n < size_t(g.nnodes()); ++n) {
      if (!solver_node(g, n, dirichlet)) continue;
      for (int c = 0; c < k; ++c) f.values[n * k + c] = x[n * k + c];
    }
    double amp = 0.0;
    for (size_t n = 0; n < size_t(g.nnodes()); ++n) {
      if (g.mask[n] == NodeKind::Outside) continue;
      amp = std::max(amp, std::sqrt(norm2(f.values.data() + n * k, k)));
    }
    if (amp > blow) throw MwError("BlowUp", "relaxation amplitude exceeded 10 (R0 + 1)");

    if (cfg.check_energy_monotone || energy_history) {
      double e = energy_on_region(f, p, region_all()).energy;
      if (energy_history) energy_history->push_back(e);
      if (have_energy && monotone_violations && e > last_energy + 1e-10 * std::max(1.0, last_energy))
        (*monotone_violations)++;
      last_energy = e;
      have_energy = true;
    }
    if (stop_when_scaled_residual_below > 0.0 && (step % 25) == 24) {
      if (scaled_residual_norm(f, p) < stop_when_scaled_residual_below) return;
    }
  }
}

// ---------------------------------------------------------------------------
// Newton refinement
// ---------------------------------------------------------------------------

static void residual_vector(const Field& f, const Potential& p, std::vector<double>& F) {
  const Grid& g = f.grid;
  const int k = f.k;
  std::vector<double> lap = laplacian(f);
  F.assign(f.values.size(), 0.0);
  std::vector<double> gvec(k);
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i) {
      bool active = f.bc == BcKind::Dirichlet ? g.kind(i, j) == NodeKind::Interior
                                              : g.in_domain(i, j);
      if (!active) continue;
      size_t n = size_t(g.idx(i, j));
      const double* u = f.values.data() + n * k;
      p.grad(u, gvec.data());
      for (int c = 0; c < k; ++c)
        F[n * k + c] = -lap[n * k + c] + gvec[c] / (f.epsilon * f.epsilon);
    }
}

double scaled_residual_norm(const Field& f, const Potential& p) {
  std::vector<double> F;
  residual_vector(f, p, F);
  double fn = 0.0, un = 0.0;
  for (size_t n = 0; n < F.size(); ++n) fn = std::max(fn, std::fabs(F[n]));
  for (size_t n = 0; n < f.values.size(); ++n) un = std::max(un, std::fabs(f.values[n]));
  return fn * f.epsilon * f.epsilon / (1.0 + un);
}

SolveResult newton_refine(Field f, const Potential& p, const SolveConfig& cfg) {
  ensure_well_eigs(p);
  SolveResult res;
  const Grid& g = f.grid;
  const int k = f.k;
  const bool dirichlet = f.bc == BcKind::Dirichlet;
  const double lmax = lambda_max_of(p);

  std::vector<double> F;
  residual_vector(f, p, F);
  auto inf_norm = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
  };
  double fnorm = inf_norm(F);
  res.residual_history.push_back(scaled_residual_norm(f, p));

  for (int iter = 0; iter < cfg.newton_max_iters; ++iter) {
    if (res.residual_history.back() <= cfg.residual_tol) break;

    // pointwise PSD-clamped Hessian blocks
    size_t nn = size_t(g.nnodes());
    std::vector<double> H(nn * k * k, 0.0);
    {
      std::vector<double> hloc(k * k), vals, vecs;
      for (size_t n = 0; n < nn; ++n) {
        if (!solver_node(g, n, dirichlet)) continue;
        p.hess(f.values.data() + n * k, hloc.data());
        jacobi_symmetric_eigen(hloc, k, vals, &vecs);
        for (int a = 0; a < k; ++a) {
          double lam = std::max(vals[a], 1e-8 * lmax);
          for (int r = 0; r < k; ++r)
            for (int s = 0; s < k; ++s)
              H[n * k * k + r * k + s] += lam * vecs[r * k + a] * vecs[s * k + a];
        }
      }
    }

    auto applyJ = [&](const std::vector<double>& in, std::vector<double>& out) {
      apply_minus_lap(f, in, out, dirichlet);
      for (size_t n = 0; n < nn; ++n) {
        if (!solver_node(g, n, dirichlet)) {
          for (int c = 0; c < k; ++c) out[n * k + c] = 0.0;
          continue;
        }
        for (int r = 0; r < k; ++r) {
          double acc = 0.0;
          for (int s = 0; s < k; ++s) acc += H[n * k * k + r * k + s] * in[n * k + s];
          out[n * k + r] += acc / (f.epsilon * f.epsilon);
        }
      }
    };

    std::vector<double> rhs(F.size());
    for (size_t n = 0; n < F.size(); ++n) rhs[n] = -F[n];
    std::vector<double> d(F.size(), 0.0);
    int cg = conjugate_gradient(f, dirichlet, applyJ, rhs, d, 1e-4, 400);

    bool accepted = false;
    if (cg >= 0) {
      Field trial = f;
      for (double alpha = 1.0; alpha >= 1.0 / 1024.0; alpha *= 0.5) {
        for (size_t n = 0; n < F.size(); ++n) trial.values[n] = f.values[n] + alpha * d[n];
        std::vector<double> Ft;
        residual_vector(trial, p, Ft);
        double fn = inf_norm(Ft);
        if (fn < fnorm) {
          f.values = trial.values;
          F = Ft;
          fnorm = fn;
          accepted = true;
          break;
        }
      }
    }
    if (!accepted) {
      // Hessian direction failed to decrease ||F||: continue relaxation
      double before = fnorm;
      relax(f, p, 50, cfg, nullptr, nullptr, 0.0);
      residual_vector(f, p, F);
      fnorm = inf_norm(F);
      if (fnorm >= before * (1.0 - 1e-12)) {
        res.residual_history.push_back(scaled_residual_norm(f, p));
        res.field = std::move(f);
        res.energy = energy_on_region(res.field, p, region_all()).energy;
        res.converged = false;
        res.failure = "StagnationError";
        throw MwError("StagnationError", "Newton stalled without residual decrease");
      }
    }
    res.residual_history.push_back(scaled_residual_norm(f, p));
  }

  res.converged = res.residual_history.back() <= cfg.residual_tol;
  res.field = std::move(f);
  res.energy = energy_on_region(res.field, p, region_all()).energy;
  double amp = 0.0;
  for (size_t n = 0; n < size_t(res.field.grid.nnodes()); ++n) {
    if (res.field.grid.mask[n] == NodeKind::Outside) continue;
    amp = std::max(amp, std::sqrt(norm2(res.field.values.data() + n * k, k)));
  }
  res.max_amplitude = amp;
  return res;
}

double weak_form_residual(const Field& f, const Potential& p, const TestVectorField& X_as_phi) {
  // phi = (X1, X2, X1, X2, ...) per component, compactly supported
  const Grid& g = f.grid;
  const int k = f.k;
  std::vector<double> gr = gradient(f);
  double acc = 0.0;
  const double h2 = g.h * g.h;
  std::vector<double> gvec(k);
  for (int j = 1; j < g.ny; ++j)
    for (int i = 1; i < g.nx; ++i) {
      if (g.kind(i, j) != NodeKind::Interior) continue;
      size_t n = size_t(g.idx(i, j));
      double X[2], J[4];
      X_as_phi.value(g.x(i), g.y(j), X);
      X_as_phi.jac(g.x(i), g.y(j), J);
      p.grad(f.values.data() + n * k, gvec.data());
      for (int c = 0; c < k; ++c) {
        double phi = X[c % 2];
        // jac layout: d1X1, d2X1, d1X2, d2X2
        double px = (c % 2 == 0) ? J[0] : J[2];
        double py = (c % 2 == 0) ? J[1] : J[3];
        acc += (gr[n * 2 * k + c] * px + gr[n * 2 * k + k + c] * py +
                gvec[c] * phi / (f.epsilon * f.epsilon)) *
               h2;
      }
    }
  return acc;
}

FamilyResult solve_family(const std::string& boundary_spec, const Potential& p,
                          const DomainSpec& dom, const std::vector<double>& eps_list,
                          const SolveConfig& cfg, const Field* supplied_seed) {
  for (size_t i = 1; i < eps_list.size(); ++i)
    if (!(eps_list[i] < eps_list[i - 1]))
      throw MwError("InvalidArgument", "eps_list must be strictly decreasing");
  FamilyResult fam;
  const Field* warm = supplied_seed;
  Field last;
  for (double eps : eps_list) {
    BoundaryData bd = make_boundary_data(boundary_spec, p, dom, eps);
    Field f = make_seeded_field(p, dom, eps, bd, cfg, warm);
    SolveResult r;
    try {
      int mono = 0;
      relax(f, p, cfg.max_gradient_flow_steps, cfg, nullptr, &mono, cfg.residual_tol * 100.0);
      r = newton_refine(std::move(f), p, cfg);
      r.energy_monotone_violations = mono;
    } catch (const MwError& e) {
      r.converged = false;
      r.failure = e.kind;
      if (e.kind != "BlowUp" && e.kind != "StagnationError") throw;
      fam.members.push_back(std::move(r));
      warm = nullptr;
      continue;
    }
    fam.m0 = std::max(fam.m0, r.energy);
    fam.members.push_back(std::move(r));
    last = fam.members.back().field;
    warm = &last;
  }
  return fam;
}

}  // namespace mw
