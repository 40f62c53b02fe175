#pragma once

#include <array>
#include <string>
#include <vector>

#include "util.hpp"

namespace mw {

enum class NodeKind : uint8_t { Outside = 0, Boundary = 1, Interior = 2 };

enum class BcKind : uint8_t { Dirichlet = 0, Neumann = 1 };

struct DiskSpec {
  double cx = 0.0, cy = 0.0, r = 1.0;
};

struct DomainSpec {
  enum class Type { Rectangle, Disk } type = Type::Rectangle;
  double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;  // rectangle
  DiskSpec disk;                                  // disk

  bool contains_disk(const DiskSpec& d, double tol = 1e-12) const;
  bool contains_point(double x, double y) const;
  double diameter() const;
  std::array<double, 2> center() const;
};

// Uniform node-centered grid over the covering rectangle of a domain.
// nx, ny are cell counts; nodes are (nx+1)*(ny+1); the mask marks nodes
// outside the domain, in the one-cell-thick boundary layer, or interior.
class Grid {
 public:
  Grid() = default;
  static Grid make_rectangle(double x0, double y0, double x1, double y1, double h);
  static Grid make_disk(const DiskSpec& d, double h);

  double ox = 0.0, oy = 0.0;
  double h = 0.0;
  int nx = 0, ny = 0;
  DomainSpec domain;
  std::vector<NodeKind> mask;  // per node

  int nnodes() const { return (nx + 1) * (ny + 1); }
  int ncells() const { return nx * ny; }
  int idx(int i, int j) const { return j * (nx + 1) + i; }
  double x(int i) const { return ox + i * h; }
  double y(int j) const { return oy + j * h; }
  NodeKind kind(int i, int j) const { return mask[idx(i, j)]; }
  bool in_domain(int i, int j) const { return mask[idx(i, j)] != NodeKind::Outside; }

  // fraction of the cell (i,j) inside `region AND domain`, from 4 subsamples
  template <class RegionFn>
  double cell_coverage(int i, int j, RegionFn&& inside_region) const {
    double cx0 = x(i), cy0 = y(j);
    int cnt = 0;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        double px = cx0 + (0.25 + 0.5 * a) * h;
        double py = cy0 + (0.25 + 0.5 * b) * h;
        if (domain.contains_point(px, py) && inside_region(px, py)) ++cnt;
      }
    return 0.25 * cnt;
  }
};

struct Field {
  Grid grid;
  int k = 1;
  double epsilon = 1.0;
  BcKind bc = BcKind::Dirichlet;
  std::vector<double> values;  // node-major, k components per node

  double* at(int i, int j) { return values.data() + size_t(grid.idx(i, j)) * k; }
  const double* at(int i, int j) const { return values.data() + size_t(grid.idx(i, j)) * k; }

  void fill(const std::vector<double>& v);
  bool finite_on_domain() const;

  // bilinear interpolation of the field at an arbitrary point (clamped to the
  // grid box); out has k components
  void interp(double px, double py, double* out) const;
};

// bilinear interpolation of an arbitrary nodal scalar array on f's grid
double interp_scalar(const Grid& g, const std::vector<double>& nodal, double px, double py);

// 5-point Laplacian; interior exact for quadratics.  Boundary nodes get
// reflection ghosts under Neumann and zeros under Dirichlet (they are pinned
// there and never read by the solvers).
std::vector<double> laplacian(const Field& f);

// Per-node gradient, layout [node][2][k]: k x-derivatives then k
// y-derivatives.  Central interior, one-sided in the boundary layer.
std::vector<double> gradient(const Field& f);

// same stencil for a bare nodal scalar array; layout [node][2]
std::vector<double> gradient_scalar(const Grid& g, const std::vector<double>& a);

// Scaled map u~(x) = u(r x + x0) on the unit disk, with epsilon -> epsilon/r.
// Throws MwError("DiskOutsideDomain").
Field rescale_to_unit(const Field& f, const DiskSpec& d);

struct CircleSamples {
  int n = 0;
  double radius = 0.0;
  double weight = 0.0;              // arclength per sample
  std::vector<double> theta;        // n
  std::vector<double> values;       // n*k
  std::vector<double> du_dtau;      // n*k
  std::vector<double> du_dr;        // n*k
};

// Uniform samples of the field on a circle, with derivatives from the
// interpolated gradient projected on the (tau, r) frame.
// Throws MwError("CircleOutsideDomain").
CircleSamples restrict_circle(const Field& f, const DiskSpec& d, int n_theta,
                              const std::vector<double>* precomputed_grad = nullptr);

// default circle sampling density: max(256, ceil(2 pi r / h))
int circle_sample_count(const Grid& g, double r);

// Discrete Dirichlet pairing sum_h D+u : D+v h^2 matching the 5-point stencil
// (summation by parts is exact against compactly supported v).
double dirichlet_form(const Field& u, const Field& v);

// Serialization: JSON header next to a flat binary or CSV payload.
void save_field(const Field& f, const std::string& path_base, bool binary = true);
Field load_field(const std::string& header_path);

}  // namespace mw
