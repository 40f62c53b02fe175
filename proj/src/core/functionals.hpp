#pragma once

#include <functional>

#include "grid.hpp"
#include "potential.hpp"

namespace mw {

// Pointwise diagnostics: energy density e = eps |grad u|^2 / 2 + V/eps,
// potential density v = V/eps, J = |grad u| sqrt(V), discrepancy
// xi = V/eps - eps |grad u|^2 / 2.  All nodal.
struct EnergyDensity {
  std::vector<double> e, v, j, xi;
  std::vector<double> grad_sq;  // |grad u|^2
};

EnergyDensity energy_density(const Field& f, const Potential& p,
                             const std::vector<double>* precomputed_grad = nullptr);

using RegionFn = std::function<bool(double, double)>;

inline RegionFn region_all() {
  return [](double, double) { return true; };
}
inline RegionFn region_disk(const DiskSpec& d) {
  return [d](double x, double y) { return sq(x - d.cx) + sq(y - d.cy) <= sq(d.r); };
}
inline RegionFn region_annulus(const DiskSpec& inner, double router) {
  return [inner, router](double x, double y) {
    double r2 = sq(x - inner.cx) + sq(y - inner.cy);
    return r2 > sq(inner.r) && r2 <= sq(router);
  };
}

// Midpoint-rule cell sum of a nodal density over region & domain; partially
// covered cells weighted by a 4-subsample coverage fraction.
double integrate_nodal(const Grid& g, const std::vector<double>& nodal, const RegionFn& region);
// variant with explicit per-cell weights in [0,1] (cell index j*nx + i)
double integrate_nodal_cellweights(const Grid& g, const std::vector<double>& nodal,
                                   const std::vector<double>& w);

struct RegionEnergy {
  double energy = 0.0;
  double vmass = 0.0;  // integral of V/eps
};

RegionEnergy energy_on_region(const Field& f, const Potential& p, const RegionFn& region);
RegionEnergy energy_on_region(const Grid& g, const EnergyDensity& d, const RegionFn& region);
RegionEnergy energy_on_disk(const Field& f, const Potential& p, const DiskSpec& d);

// Hopf differential omega = eps (|u_x1|^2 - |u_x2|^2 - 2 i u_x1 . u_x2)
struct HopfField {
  std::vector<double> re, im;
};

HopfField hopf_differential(const Field& f, const std::vector<double>* precomputed_grad = nullptr);

// Stress-energy matrix A = T + (V/eps) Id with traceless T; T22 = -T11 by
// construction so trace(T) = 0 and the decomposition hold exactly.
struct StressTensor {
  std::vector<double> t11, t12;       // T (t22 = -t11, t21 = t12)
  std::vector<double> v_over_eps;     // V/eps
  double a(int node, int i, int j) const {
    double t = (i == j) ? (i == 0 ? t11[node] : -t11[node]) : t12[node];
    return t + (i == j ? v_over_eps[node] : 0.0);
  }
};

StressTensor stress_tensor(const Field& f, const Potential& p,
                           const std::vector<double>* precomputed_grad = nullptr);

// Smooth compactly supported test vector field with analytic derivatives.
struct TestVectorField {
  std::string name;
  std::function<void(double, double, double*)> value;  // X1, X2
  std::function<void(double, double, double*)> jac;    // d1X1, d2X1, d1X2, d2X2
};

// five presets supported inside the given domain
std::vector<TestVectorField> test_field_presets(const DomainSpec& dom);

struct StressResiduals {
  double real_form = 0.0;     // integral A : grad X        (zero for solutions)
  double complex_form = 0.0;  // Re(omega dX/dzbar) - (1/eps) V div X, integrated
  double scale = 0.0;         // integral |A| |grad X|, for relative comparisons
};

StressResiduals stress_divergence_residual(const Field& f, const Potential& p,
                                           const TestVectorField& X);

struct PohozaevResult {
  double lhs = 0.0;  // eps^-2 integral_D V
  double rhs = 0.0;  // (r/4) boundary term
  double residual = 0.0;
};

PohozaevResult pohozaev_residual(const Field& f, const Potential& p, const DiskSpec& d);

struct PohozaevInequality {
  double lhs = 0.0;  // eps^-1 integral_D V
  double rhs = 0.0;  // (r/2) circle energy
  double slack = 0.0;
  bool pass = false;
};

PohozaevInequality pohozaev_inequality_check(const Field& f, const Potential& p, const DiskSpec& d,
                                             double rel_slack = 0.05);

struct MonotonicityRow {
  double r = 0.0;
  double energy = 0.0;
  double e_over_r = 0.0;
  double d_e_over_r = 0.0;      // finite-difference derivative of E/r
  double xi_integral = 0.0;     // integral of the discrepancy over D(r)
  double radial_term = 0.0;     // r^-1 circle integral of |du/dr|^2
  double identity_rhs = 0.0;    // r^-2 xi_integral + radial_term
};

std::vector<MonotonicityRow> monotonicity_profile(const Field& f, const Potential& p, double cx,
                                                  double cy, const std::vector<double>& radii);

// Plateau profile for the scalar well-distance surrogates: identity to mu0/2,
// C1 monotone blend on [mu0/2, mu0], constant 3 mu0 / 4 beyond.
double plateau_phi(double t, double mu0);
double plateau_phi_prime(double t, double mu0);

// w_i(x) = phi(|u - sigma_i|); nodal
std::vector<double> modica_mortola_map(const Field& f, const Potential& p,
                                       const StructuralConstants& c, int well);

struct ModicaReport {
  int nodes = 0;
  int plateau_grad_violations = 0;   // grad w != 0 where |u-s| >= mu0 (interior of plateau)
  int chain_rule_violations = 0;     // |grad w| > |grad u| beyond slack
  int bv_violations = 0;             // |grad w^2| > 4 lambda0^{-1/2} J beyond slack
  double max_bv_excess = 0.0;        // relative
};

ModicaReport modica_mortola_check(const Field& f, const Potential& p, const StructuralConstants& c,
                                  int well, double rel_slack = 0.05);

// exact pointwise invariants (no slack): J <= e, |omega| <= 2 eps |grad u|^2,
// trace(T) = 0 and A - T - (V/eps) Id = 0 by construction
struct PointwiseInvariantReport {
  int nodes = 0;
  int j_violations = 0;
  int hopf_violations = 0;
};

PointwiseInvariantReport pointwise_invariants(const Field& f, const Potential& p);

}  // namespace mw
