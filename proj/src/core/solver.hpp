#pragma once

#include <optional>
#include <string>

#include "functionals.hpp"
#include "grid.hpp"
#include "potential.hpp"

namespace mw {

struct SolveConfig {
  int max_gradient_flow_steps = 4000;
  double flow_dt_safety = 0.2;      // dt = safety * eps^2 / lambda_max
  int newton_max_iters = 30;
  double residual_tol = 1e-8;       // scaled: ||F||_inf eps^2 / (1 + ||u||_inf)
  std::string seed_strategy = "from-boundary";  // | from-wells-voronoi | supplied
  int grid_rule_m = 8;              // h = eps / m
  bool check_energy_monotone = true;
};

struct SolveResult {
  Field field;
  std::vector<double> residual_history;
  bool converged = false;
  double energy = 0.0;
  double max_amplitude = 0.0;
  int energy_monotone_violations = 0;
  std::string failure;  // empty on success
};

// Boundary data: a smooth map defined on the whole plane whose restriction to
// the domain boundary is the trace; also used as the default seed.
struct BoundaryData {
  std::string preset;
  std::function<void(double, double, double*)> value;  // (x, y) -> R^k
};

// Presets: "constant-well:i", "two-phase:angledeg", "three-phase:a1,a2,a3",
// "trace:<csv path>" (rows theta_deg,u1..uk around the domain center).
BoundaryData make_boundary_data(const std::string& spec, const Potential& p, const DomainSpec& dom,
                                double epsilon);

// 1D heteroclinic energy between two wells along the straight segment,
// computed by quadrature of sqrt(2 V): the equipartition line integral.
double heteroclinic_energy(const Potential& p, int well_a, int well_b, int n_quad = 4096);

Field make_seeded_field(const Potential& p, const DomainSpec& dom, double epsilon,
                        const BoundaryData& bd, const SolveConfig& cfg,
                        const Field* warm_start = nullptr);

// Semi-implicit gradient flow: u <- (I - dt L)^{-1} (u - dt eps^-2 grad V(u)),
// dt = flow_dt_safety eps^2 / lambda_max.  Throws MwError("BlowUp") when
// sup|u| exceeds 10 (R0 + 1).
void relax(Field& f, const Potential& p, int steps, const SolveConfig& cfg,
           std::vector<double>* energy_history = nullptr, int* monotone_violations = nullptr,
           double stop_when_scaled_residual_below = 0.0);

// Damped Newton on F(u) = -Lap u + eps^-2 grad V(u); conjugate gradient on the
// positively clamped Hessian, falling back to relaxation when the direction
// fails to decrease ||F||.  Throws MwError("StagnationError") when no decrease
// is possible within newton_max_iters.
SolveResult newton_refine(Field f, const Potential& p, const SolveConfig& cfg);

double scaled_residual_norm(const Field& f, const Potential& p);

// Weak-form residual against a smooth test function (10 random bumps is the
// invariant check): integral (grad u : grad phi + eps^-2 grad V(u) . phi).
double weak_form_residual(const Field& f, const Potential& p, const TestVectorField& X_as_phi);

struct FamilyResult {
  std::vector<SolveResult> members;  // one per epsilon, decreasing
  double m0 = 0.0;                   // max energy over converged members
};

FamilyResult solve_family(const std::string& boundary_spec, const Potential& p,
                          const DomainSpec& dom, const std::vector<double>& eps_list,
                          const SolveConfig& cfg, const Field* supplied_seed = nullptr);

}  // namespace mw
