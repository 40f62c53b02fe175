#include "grid.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include <nlohmann/json.hpp>

namespace mw {

using json = nlohmann::json;

bool DomainSpec::contains_point(double x, double y) const {
  if (type == Type::Rectangle) return x >= x0 && x <= x1 && y >= y0 && y <= y1;
  return sq(x - disk.cx) + sq(y - disk.cy) <= sq(disk.r);
}

bool DomainSpec::contains_disk(const DiskSpec& d, double tol) const {
  if (type == Type::Rectangle)
    return d.cx - d.r >= x0 - tol && d.cx + d.r <= x1 + tol && d.cy - d.r >= y0 - tol &&
           d.cy + d.r <= y1 + tol;
  double dc = std::sqrt(sq(d.cx - disk.cx) + sq(d.cy - disk.cy));
  return dc + d.r <= disk.r + tol;
}

double DomainSpec::diameter() const {
  if (type == Type::Rectangle) return std::sqrt(sq(x1 - x0) + sq(y1 - y0));
  return 2.0 * disk.r;
}

std::array<double, 2> DomainSpec::center() const {
  if (type == Type::Rectangle) return {0.5 * (x0 + x1), 0.5 * (y0 + y1)};
  return {disk.cx, disk.cy};
}

static void classify_mask(Grid& g) {
  g.mask.assign(g.nnodes(), NodeKind::Outside);
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i)
      if (g.domain.contains_point(g.x(i), g.y(j))) g.mask[g.idx(i, j)] = NodeKind::Interior;
  // boundary layer: in-domain nodes missing an in-domain 4-neighbor
  for (int j = 0; j <= g.ny; ++j) {
    for (int i = 0; i <= g.nx; ++i) {
      if (g.mask[g.idx(i, j)] == NodeKind::Outside) continue;
      bool edge = i == 0 || j == 0 || i == g.nx || j == g.ny;
      if (!edge) {
        edge = g.mask[g.idx(i - 1, j)] == NodeKind::Outside ||
               g.mask[g.idx(i + 1, j)] == NodeKind::Outside ||
               g.mask[g.idx(i, j - 1)] == NodeKind::Outside ||
               g.mask[g.idx(i, j + 1)] == NodeKind::Outside;
      }
      if (edge) g.mask[g.idx(i, j)] = NodeKind::Boundary;
    }
  }
}

Grid Grid::make_rectangle(double x0, double y0, double x1, double y1, double h) {
  Grid g;
  g.domain.type = DomainSpec::Type::Rectangle;
  g.domain.x0 = x0;
  g.domain.y0 = y0;
  g.domain.x1 = x1;
  g.domain.y1 = y1;
  g.nx = std::max(8, int(std::llround((x1 - x0) / h)));
  g.ny = std::max(8, int(std::llround((y1 - y0) / h)));
  g.h = (x1 - x0) / g.nx;
  double hy = (y1 - y0) / g.ny;
  if (std::fabs(hy - g.h) > 1e-9 * g.h)
    throw MwError("InvalidArgument", "rectangle not compatible with square cells at this h");
  g.ox = x0;
  g.oy = y0;
  classify_mask(g);
  return g;
}

Grid Grid::make_disk(const DiskSpec& d, double h) {
  Grid g;
  g.domain.type = DomainSpec::Type::Disk;
  g.domain.disk = d;
  int n = std::max(8, int(std::ceil(2.0 * d.r / h)) + 4);
  g.nx = g.ny = n;
  g.h = h;
  g.ox = d.cx - 0.5 * n * h;
  g.oy = d.cy - 0.5 * n * h;
  classify_mask(g);
  return g;
}

void Field::fill(const std::vector<double>& v) {
  for (int n = 0; n < grid.nnodes(); ++n)
    for (int c = 0; c < k; ++c) values[size_t(n) * k + c] = v[c];
}

bool Field::finite_on_domain() const {
  for (int j = 0; j <= grid.ny; ++j)
    for (int i = 0; i <= grid.nx; ++i) {
      if (!grid.in_domain(i, j)) continue;
      const double* u = at(i, j);
      for (int c = 0; c < k; ++c)
        if (!std::isfinite(u[c])) return false;
    }
  return true;
}

// Bilinear weights over the cell corners, renormalized so that nodes marked
// outside the domain are never read (O(h) bias at the rim only).
static void stencil_weights(const Grid& g, double px, double py, int idx4[4], double w4[4]) {
  double fx = (px - g.ox) / g.h, fy = (py - g.oy) / g.h;
  int i = std::min(std::max(int(std::floor(fx)), 0), g.nx - 1);
  int j = std::min(std::max(int(std::floor(fy)), 0), g.ny - 1);
  double ax = std::min(std::max(fx - i, 0.0), 1.0);
  double ay = std::min(std::max(fy - j, 0.0), 1.0);
  idx4[0] = g.idx(i, j);
  idx4[1] = g.idx(i + 1, j);
  idx4[2] = g.idx(i, j + 1);
  idx4[3] = g.idx(i + 1, j + 1);
  w4[0] = (1 - ax) * (1 - ay);
  w4[1] = ax * (1 - ay);
  w4[2] = (1 - ax) * ay;
  w4[3] = ax * ay;
  double tot = 0.0;
  for (int m = 0; m < 4; ++m) {
    if (g.mask[idx4[m]] == NodeKind::Outside) w4[m] = 0.0;
    tot += w4[m];
  }
  if (tot > 0.0)
    for (int m = 0; m < 4; ++m) w4[m] /= tot;
}

void Field::interp(double px, double py, double* out) const {
  int idx4[4];
  double w4[4];
  stencil_weights(grid, px, py, idx4, w4);
  for (int c = 0; c < k; ++c) {
    double s = 0.0;
    for (int m = 0; m < 4; ++m) s += w4[m] * values[size_t(idx4[m]) * k + c];
    out[c] = s;
  }
}

double interp_scalar(const Grid& g, const std::vector<double>& nodal, double px, double py) {
  int idx4[4];
  double w4[4];
  stencil_weights(g, px, py, idx4, w4);
  double s = 0.0;
  for (int m = 0; m < 4; ++m) s += w4[m] * nodal[idx4[m]];
  return s;
}

std::vector<double> laplacian(const Field& f) {
  const Grid& g = f.grid;
  const int k = f.k;
  std::vector<double> out(size_t(g.nnodes()) * k, 0.0);
  const double ih2 = 1.0 / (g.h * g.h);
  Parallel::for_range(size_t(g.ny + 1), [&](size_t jlo, size_t jhi) {
    for (size_t j = jlo; j < jhi; ++j) {
      for (int i = 0; i <= g.nx; ++i) {
        NodeKind kind = g.kind(i, int(j));
        if (kind == NodeKind::Outside) continue;
        const double* uc = f.at(i, int(j));
        double* o = out.data() + size_t(g.idx(i, int(j))) * k;
        if (kind == NodeKind::Interior) {
          const double* ul = f.at(i - 1, int(j));
          const double* ur = f.at(i + 1, int(j));
          const double* ud = f.at(i, int(j) - 1);
          const double* uu = f.at(i, int(j) + 1);
          for (int c = 0; c < k; ++c)
            o[c] = (ul[c] + ur[c] + ud[c] + uu[c] - 4.0 * uc[c]) * ih2;
        } else if (f.bc == BcKind::Neumann) {
          // reflection ghosts at the boundary layer
          auto pick = [&](int ii, int jj, int mi, int mj) -> const double* {
            if (ii >= 0 && ii <= g.nx && jj >= 0 && jj <= g.ny && g.in_domain(ii, jj))
              return f.at(ii, jj);
            return f.at(mi, mj);  // mirror
          };
          const double* ul = pick(i - 1, int(j), i + 1 <= g.nx && g.in_domain(i + 1, int(j)) ? i + 1 : i, int(j));
          const double* ur = pick(i + 1, int(j), i - 1 >= 0 && g.in_domain(i - 1, int(j)) ? i - 1 : i, int(j));
          const double* ud = pick(i, int(j) - 1, i, int(j) + 1 <= g.ny && g.in_domain(i, int(j) + 1) ? int(j) + 1 : int(j));
          const double* uu = pick(i, int(j) + 1, i, int(j) - 1 >= 0 && g.in_domain(i, int(j) - 1) ? int(j) - 1 : int(j));
          for (int c = 0; c < k; ++c)
            o[c] = (ul[c] + ur[c] + ud[c] + uu[c] - 4.0 * uc[c]) * ih2;
        }
      }
    }
  });
  return out;
}

std::vector<double> gradient(const Field& f) {
  const Grid& g = f.grid;
  const int k = f.k;
  std::vector<double> out(size_t(g.nnodes()) * 2 * k, 0.0);
  const double ih = 1.0 / g.h;
  Parallel::for_range(size_t(g.ny + 1), [&](size_t jlo, size_t jhi) {
    for (size_t jj = jlo; jj < jhi; ++jj) {
      int j = int(jj);
      for (int i = 0; i <= g.nx; ++i) {
        if (!g.in_domain(i, j)) continue;
        double* o = out.data() + size_t(g.idx(i, j)) * 2 * k;
        bool hasL = i > 0 && g.in_domain(i - 1, j);
        bool hasR = i < g.nx && g.in_domain(i + 1, j);
        bool hasD = j > 0 && g.in_domain(i, j - 1);
        bool hasU = j < g.ny && g.in_domain(i, j + 1);
        const double* uc = f.at(i, j);
        for (int c = 0; c < k; ++c) {
          double dx = 0.0, dy = 0.0;
          if (hasL && hasR)
            dx = (f.at(i + 1, j)[c] - f.at(i - 1, j)[c]) * 0.5 * ih;
          else if (hasR)
            dx = (f.at(i + 1, j)[c] - uc[c]) * ih;
          else if (hasL)
            dx = (uc[c] - f.at(i - 1, j)[c]) * ih;
          if (hasD && hasU)
            dy = (f.at(i, j + 1)[c] - f.at(i, j - 1)[c]) * 0.5 * ih;
          else if (hasU)
            dy = (f.at(i, j + 1)[c] - uc[c]) * ih;
          else if (hasD)
            dy = (uc[c] - f.at(i, j - 1)[c]) * ih;
          o[c] = dx;
          o[k + c] = dy;
        }
      }
    }
  });
  return out;
}

std::vector<double> gradient_scalar(const Grid& g, const std::vector<double>& a) {
  std::vector<double> out(size_t(g.nnodes()) * 2, 0.0);
  const double ih = 1.0 / g.h;
  for (int j = 0; j <= g.ny; ++j) {
    for (int i = 0; i <= g.nx; ++i) {
      if (!g.in_domain(i, j)) continue;
      bool hasL = i > 0 && g.in_domain(i - 1, j);
      bool hasR = i < g.nx && g.in_domain(i + 1, j);
      bool hasD = j > 0 && g.in_domain(i, j - 1);
      bool hasU = j < g.ny && g.in_domain(i, j + 1);
      double uc = a[g.idx(i, j)];
      double dx = 0.0, dy = 0.0;
      if (hasL && hasR)
        dx = (a[g.idx(i + 1, j)] - a[g.idx(i - 1, j)]) * 0.5 * ih;
      else if (hasR)
        dx = (a[g.idx(i + 1, j)] - uc) * ih;
      else if (hasL)
        dx = (uc - a[g.idx(i - 1, j)]) * ih;
      if (hasD && hasU)
        dy = (a[g.idx(i, j + 1)] - a[g.idx(i, j - 1)]) * 0.5 * ih;
      else if (hasU)
        dy = (a[g.idx(i, j + 1)] - uc) * ih;
      else if (hasD)
        dy = (uc - a[g.idx(i, j - 1)]) * ih;
      out[size_t(g.idx(i, j)) * 2] = dx;
      out[size_t(g.idx(i, j)) * 2 + 1] = dy;
    }
  }
  return out;
}

Field rescale_to_unit(const Field& f, const DiskSpec& d) {
  if (!f.grid.domain.contains_disk(d)) throw MwError("DiskOutsideDomain", "disk not inside domain");
  Field out;
  double ht = f.grid.h / d.r;
  out.grid = Grid::make_disk(DiskSpec{0.0, 0.0, 1.0}, ht);
  out.k = f.k;
  out.epsilon = f.epsilon / d.r;
  out.bc = f.bc;
  out.values.assign(size_t(out.grid.nnodes()) * f.k, 0.0);
  for (int j = 0; j <= out.grid.ny; ++j)
    for (int i = 0; i <= out.grid.nx; ++i) {
      double px = d.cx + d.r * out.grid.x(i);
      double py = d.cy + d.r * out.grid.y(j);
      f.interp(px, py, out.values.data() + size_t(out.grid.idx(i, j)) * f.k);
    }
  return out;
}

int circle_sample_count(const Grid& g, double r) {
  return std::max(256, int(std::ceil(2.0 * 3.14159265358979323846 * r / g.h)));
}

CircleSamples restrict_circle(const Field& f, const DiskSpec& d, int n_theta,
                              const std::vector<double>* precomputed_grad) {
  // every sample (and its interpolation stencil) must stay inside the domain
  if (!f.grid.domain.contains_disk(d)) throw MwError("CircleOutsideDomain", "circle not inside domain");
  CircleSamples s;
  s.n = n_theta;
  s.radius = d.r;
  s.weight = 2.0 * 3.14159265358979323846 * d.r / n_theta;
  s.theta.resize(n_theta);
  s.values.resize(size_t(n_theta) * f.k);
  s.du_dtau.resize(size_t(n_theta) * f.k);
  s.du_dr.resize(size_t(n_theta) * f.k);
  std::vector<double> gr_own;
  if (!precomputed_grad) gr_own = gradient(f);
  const std::vector<double>& gr = precomputed_grad ? *precomputed_grad : gr_own;
  const Grid& g = f.grid;
  const int k = f.k;
  for (int m = 0; m < n_theta; ++m) {
    double th = 2.0 * 3.14159265358979323846 * m / n_theta;
    s.theta[m] = th;
    double ct = std::cos(th), st = std::sin(th);
    double px = d.cx + d.r * ct, py = d.cy + d.r * st;
    f.interp(px, py, s.values.data() + size_t(m) * k);
    int idx4[4];
    double w4[4];
    stencil_weights(g, px, py, idx4, w4);
    for (int c = 0; c < k; ++c) {
      double gx = 0.0, gy = 0.0;
      for (int q = 0; q < 4; ++q) {
        gx += w4[q] * gr[size_t(idx4[q]) * 2 * k + c];
        gy += w4[q] * gr[size_t(idx4[q]) * 2 * k + k + c];
      }
      s.du_dtau[size_t(m) * k + c] = -st * gx + ct * gy;
      s.du_dr[size_t(m) * k + c] = ct * gx + st * gy;
    }
  }
  return s;
}

double dirichlet_form(const Field& u, const Field& v) {
  const Grid& g = u.grid;
  const int k = u.k;
  double acc = 0.0;
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i) {
      if (!g.in_domain(i, j)) continue;
      if (i < g.nx && g.in_domain(i + 1, j))
        for (int c = 0; c < k; ++c)
          acc += (u.at(i + 1, j)[c] - u.at(i, j)[c]) * (v.at(i + 1, j)[c] - v.at(i, j)[c]);
      if (j < g.ny && g.in_domain(i, j + 1))
        for (int c = 0; c < k; ++c)
          acc += (u.at(i, j + 1)[c] - u.at(i, j)[c]) * (v.at(i, j + 1)[c] - v.at(i, j)[c]);
    }
  return acc;  // the h^2 from the measure cancels the two 1/h factors
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

static json domain_to_json(const DomainSpec& d) {
  if (d.type == DomainSpec::Type::Rectangle)
    return json{{"type", "rectangle"}, {"min", {d.x0, d.y0}}, {"max", {d.x1, d.y1}}};
  return json{{"type", "disk"}, {"center", {d.disk.cx, d.disk.cy}}, {"radius", d.disk.r}};
}

static DomainSpec domain_from_json(const json& j) {
  DomainSpec d;
  std::string t = j.at("type").get<std::string>();
  if (t == "rectangle") {
    d.type = DomainSpec::Type::Rectangle;
    d.x0 = j.at("min")[0].get<double>();
    d.y0 = j.at("min")[1].get<double>();
    d.x1 = j.at("max")[0].get<double>();
    d.y1 = j.at("max")[1].get<double>();
  } else if (t == "disk") {
    d.type = DomainSpec::Type::Disk;
    d.disk.cx = j.at("center")[0].get<double>();
    d.disk.cy = j.at("center")[1].get<double>();
    d.disk.r = j.at("radius").get<double>();
  } else {
    throw MwError("ConfigError", "unknown domain type: " + t);
  }
  return d;
}

void save_field(const Field& f, const std::string& path_base, bool binary) {
  std::string payload = path_base + (binary ? ".bin" : ".csv");
  json hdr{{"format", binary ? "bin" : "csv"},
           {"payload", payload.substr(payload.find_last_of('/') + 1)},
           {"k", f.k},
           {"epsilon", f.epsilon},
           {"bc", f.bc == BcKind::Dirichlet ? "dirichlet" : "neumann"},
           {"grid",
            {{"origin", {f.grid.ox, f.grid.oy}},
             {"h", f.grid.h},
             {"nx", f.grid.nx},
             {"ny", f.grid.ny},
             {"domain", domain_to_json(f.grid.domain)}}},
           {"count", f.grid.nnodes()}};
  std::ofstream hj(path_base + ".json");
  if (!hj) throw MwError("IoError", "cannot write " + path_base + ".json");
  hj << hdr.dump(2) << "\n";
  if (binary) {
    std::ofstream out(payload, std::ios::binary);
    if (!out) throw MwError("IoError", "cannot write " + payload);
    out.write(reinterpret_cast<const char*>(f.values.data()),
              std::streamsize(f.values.size() * sizeof(double)));
  } else {
    std::ofstream out(payload);
    if (!out) throw MwError("IoError", "cannot write " + payload);
    out << "# x,y,u1..uk\n";
    char buf[64];
    for (int j = 0; j <= f.grid.ny; ++j)
      for (int i = 0; i <= f.grid.nx; ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g", f.grid.x(i), f.grid.y(j));
        out << buf;
        for (int c = 0; c < f.k; ++c) {
          std::snprintf(buf, sizeof buf, ",%.17g", f.at(i, j)[c]);
          out << buf;
        }
        out << "\n";
      }
  }
}

Field load_field(const std::string& header_path) {
  std::ifstream hj(header_path);
  if (!hj) throw MwError("IoError", "cannot read " + header_path);
  json hdr = json::parse(hj);
  Field f;
  f.k = hdr.at("k").get<int>();
  f.epsilon = hdr.at("epsilon").get<double>();
  f.bc = hdr.at("bc").get<std::string>() == "neumann" ? BcKind::Neumann : BcKind::Dirichlet;
  const json& gj = hdr.at("grid");
  DomainSpec dom = domain_from_json(gj.at("domain"));
  double h = gj.at("h").get<double>();
  if (dom.type == DomainSpec::Type::Rectangle)
    f.grid = Grid::make_rectangle(dom.x0, dom.y0, dom.x1, dom.y1, h);
  else
    f.grid = Grid::make_disk(dom.disk, h);
  if (f.grid.nx != gj.at("nx").get<int>() || f.grid.ny != gj.at("ny").get<int>())
    throw MwError("IoError", "grid header inconsistent with reconstruction");
  int count = hdr.at("count").get<int>();
  if (count != f.grid.nnodes()) throw MwError("IoError", "count does not match grid");
  std::string dir;
  auto slash = header_path.find_last_of('/');
  if (slash != std::string::npos) dir = header_path.substr(0, slash + 1);
  std::string payload = dir + hdr.at("payload").get<std::string>();
  f.values.assign(size_t(count) * f.k, 0.0);
  if (hdr.at("format").get<std::string>() == "bin") {
    std::ifstream in(payload, std::ios::binary);
    if (!in) throw MwError("IoError", "cannot read " + payload);
    in.read(reinterpret_cast<char*>(f.values.data()), std::streamsize(f.values.size() * sizeof(double)));
    if (size_t(in.gcount()) != f.values.size() * sizeof(double))
      throw MwError("IoError", "payload shorter than header count");
    char probe;
    if (in.read(&probe, 1)) throw MwError("IoError", "payload longer than header count");
  } else {
    std::ifstream in(payload);
    if (!in) throw MwError("IoError", "cannot read " + payload);
    std::string line;
    size_t row = 0;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      if (row >= size_t(count)) throw MwError("IoError", "payload longer than header count");
      const char* sp = line.c_str();
      char* end = nullptr;
      std::strtod(sp, &end);  // x
      sp = end + 1;
      std::strtod(sp, &end);  // y
      for (int c = 0; c < f.k; ++c) {
        sp = end + 1;
        f.values[row * f.k + c] = std::strtod(sp, &end);
      }
      ++row;
    }
    if (row != size_t(count)) throw MwError("IoError", "payload shorter than header count");
  }
  return f;
}

}  // namespace mw
