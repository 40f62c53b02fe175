#pragma once

#include "functionals.hpp"
#include "grid.hpp"
#include "potential.hpp"

namespace mw {

// ---------------------------------------------------------------------------
// Level curves by marching squares (node values, saddles resolved by cell
// average)
// ---------------------------------------------------------------------------

struct Polyline {
  std::vector<std::array<double, 4>> segments;  // x0,y0,x1,y1
  double length = 0.0;
  int degenerate_cells = 0;  // cells whose four corners all sit on the level
};

Polyline marching_squares(const Grid& g, const std::vector<double>& nodal, double level,
                          const RegionFn& region);

// line integral of an interpolated nodal weight along the level curve
double level_line_integral(const Grid& g, const std::vector<double>& nodal, double level,
                           const std::vector<double>& weight, const RegionFn& region);

// ---------------------------------------------------------------------------
// Circles with controlled energy / uniform bounds
// ---------------------------------------------------------------------------

struct CircleReport {
  double radius = 0.0;
  double circle_energy = 0.0;  // integral of e_eps over the circle
  double circle_jmass = 0.0;
  double circle_vmass = 0.0;   // integral of V (not V/eps)
  int sigma_main = -1;
  double sup_dist = 0.0;       // sup over the circle of |u - sigma_main|
  bool certified = false;      // case-1 bound |u-sigma| <= C_unf sqrt(energy) asserted
  int case_tag = 0;            // 1, 2
  double bound_slack = 0.0;    // max(0, sup_dist - C_unf sqrt(energy)) / sup scale
};

struct GoodRadius {
  double r = 0.0;
  CircleReport report;
  double mean_bound = 0.0;  // E(u, D(r1)) / (r1 - r0)
  double slack = 0.0;       // max(0, circle_energy - mean_bound) / mean scale
};

// scans ~ (r1 - r0)/h radii and returns the circle with the least energy;
// the mean-value bound is reported alongside
GoodRadius good_radius(const Field& f, const Potential& p, double cx, double cy, double r0,
                       double r1);

CircleReport circle_uniform_bound(const CircleSamples& s, const Field& f, const Potential& p,
                                  const StructuralConstants& c);

// Deterministic calibration of C_unf on synthetic circle maps; returns the
// larger of the case-analysis floor and the worst calibrated ratio.
double fit_uniform_circle_constant(const Potential& p, const StructuralConstants& c);

// ---------------------------------------------------------------------------
// Coarea
// ---------------------------------------------------------------------------

struct CoareaTable {
  std::vector<double> levels;   // ladder of s values for (w_i)^2
  std::vector<double> lengths;  // polyline length of {(w_i)^2 = s}
  double integral = 0.0;        // integral of length over s
  double bound = 0.0;           // 4 lambda0^{-1/2} E(u, region)
  double slack = 0.0;
};

// generic ladder integral, used by tests with synthetic scalars too
CoareaTable coarea_integral(const Grid& g, const std::vector<double>& nodal, double smax,
                            int n_levels, const RegionFn& region, double bound);

CoareaTable coarea_length(const Field& f, const Potential& p, const StructuralConstants& c,
                          int well, const RegionFn& region, double region_energy);

struct LevelSetReport {
  double level = 0.0;      // the chosen A0 in [A/2, A]
  double length = 0.0;
  int cells_crossed = 0;
  double bound = 0.0;      // 8 E / (sqrt(lambda0) A^2)
  bool bound_pass = false;
  bool regular = true;     // false when every scanned level hit a degenerate cell
};

LevelSetReport select_level(const Field& f, const Potential& p, const StructuralConstants& c,
                            int well, double A, const RegionFn& region, double region_energy);

// ---------------------------------------------------------------------------
// Well neighborhoods and far sets
// ---------------------------------------------------------------------------

// per-cell weights (fraction of subsamples) of {|u - sigma_i| <= kappa} inter region
std::vector<double> upsilon_cell_weights(const Field& f, const Potential& p, int well, double kappa,
                                         const RegionFn& region);
// (fruc) complement: u outside every B(sigma_i, radius_param)
std::vector<double> theta_cell_weights(const Field& f, const Potential& p, double radius_param,
                                       const RegionFn& region);

struct RegionFamilyChecks {
  double disjointness_violation = 0.0;  // max over cells of sum_i w_i - coverage (exact <= 0)
  double cover_identity_error = 0.0;    // max |theta + sum upsilon(kappa=param) - coverage|
};

RegionFamilyChecks region_family_checks(const Field& f, const Potential& p,
                                        const StructuralConstants& c, double kappa,
                                        const DiskSpec& disk);

// ---------------------------------------------------------------------------
// The radius set I(u, kappa) on the unit disk and good circles inside Upsilon
// ---------------------------------------------------------------------------

struct RadiusSetResult {
  double measure = 0.0;            // |I(u, kappa)| within [1/2, rho]
  double lower_bound = 0.0;        // rho - 9/16
  bool camembert_ok = false;       // kappa^2 >= E / (32 sqrt(lambda0))
  bool bound_asserted = false;     // measure >= lower bound checked (when camembert holds)
  bool bound_pass = false;
  std::vector<double> radii;
  std::vector<uint8_t> member;
};

// f must already live on the unit-disk covering grid (rescale_to_unit first).
// Throws MwError("BoundaryConditionViolated") when |u - sigma| >= kappa
// somewhere on the rho circle.
RadiusSetResult radius_set_measure(const Field& f, const Potential& p,
                                   const StructuralConstants& c, int sigma, double kappa,
                                   double rho);

struct GoodCircleUpsilon {
  double tau = 0.0;
  CircleReport report;
  double bound = 0.0;  // E(u, Upsilon_sigma(rho, kappa)) / (rho - 11/16)
  double slack = 0.0;
};

// Throws MwError("EmptyRadiusSet") when I(u,kappa) inter [5/8, rho] is empty,
// and MwError("InvalidArgument") when rho < 3/4.
GoodCircleUpsilon good_circle_in_upsilon(const Field& f, const Potential& p,
                                         const StructuralConstants& c, int sigma, double kappa,
                                         double rho);

// ---------------------------------------------------------------------------
// Gradient bounds on level sets (claudius) and the normal-flux monotonicity
// ---------------------------------------------------------------------------

struct LevelGradientResult {
  double mu_tilde = 0.0;
  std::vector<double> per_well;  // line integral of |grad u| on w_i^{-1}(mu~)
  double total = 0.0;
  double rhs_gradsq = 0.0;  // (2/mu0) integral_Theta |grad u|^2
  double rhs_energy = 0.0;  // (4/(mu0 eps)) E(u, Theta)
  double slack = 0.0;       // max(0, total - rhs_gradsq) / scale
};

LevelGradientResult level_gradient_bound(const Field& f, const Potential& p,
                                         const StructuralConstants& c, double r);

// integral over Gamma_i(rho, kappa) of d|u - sigma_i|/dn (the outward normal
// derivative); nondecreasing in kappa for solutions
double normal_flux(const Field& f, const Potential& p, const StructuralConstants& c, int well,
                   double kappa, const RegionFn& region);

}  // namespace mw
