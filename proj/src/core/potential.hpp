#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "util.hpp"

namespace mw {

struct Well {
  std::vector<double> location;  // point in R^k
  double hess_min = 0.0;         // smallest Hessian eigenvalue at the well
  double hess_max = 0.0;         // largest Hessian eigenvalue at the well
};

// Multiwell potential V : R^k -> [0, inf) vanishing exactly on a finite set
// of nondegenerate minima.  Evaluators must be pure; they are called from
// concurrent workers.
class Potential {
 public:
  virtual ~Potential() = default;

  virtual double eval(const double* y) const = 0;
  virtual void grad(const double* y, double* out) const = 0;
  // row-major k*k matrix
  virtual void hess(const double* y, double* out) const;

  int k() const { return k_; }
  const std::vector<Well>& wells() const { return wells_; }
  std::vector<Well>& wells() { return wells_; }
  double alpha_inf() const { return alpha_inf_; }
  double r_inf() const { return r_inf_; }
  const std::string& name() const { return name_; }

  double eval(const std::vector<double>& y) const { return eval(y.data()); }

 protected:
  Potential(std::string name, int k, std::vector<Well> wells, double alpha_inf, double r_inf)
      : name_(std::move(name)), k_(k), wells_(std::move(wells)), alpha_inf_(alpha_inf), r_inf_(r_inf) {}

  std::string name_;
  int k_;
  std::vector<Well> wells_;
  double alpha_inf_;
  double r_inf_;
};

// Dense multi-index polynomial in the components of u; the form user
// potentials are loaded from (JSON config block).
class PolynomialPotential : public Potential {
 public:
  struct Term {
    double coef;
    std::vector<int> powers;  // one exponent per component
  };

  PolynomialPotential(std::string name, int k, std::vector<Term> terms,
                      std::vector<std::vector<double>> well_locations, double alpha_inf, double r_inf);

  double eval(const double* y) const override;
  void grad(const double* y, double* out) const override;
  void hess(const double* y, double* out) const override;

  const std::vector<Term>& terms() const { return terms_; }

 private:
  std::vector<Term> terms_;
};

// Wraps a bare evaluator; derivatives filled by central differences at
// h = 1e-5 * (1 + |y|).
class FunctionPotential : public Potential {
 public:
  using Fn = std::function<double(const double*)>;
  FunctionPotential(std::string name, int k, Fn fn, std::vector<std::vector<double>> well_locations,
                    double alpha_inf, double r_inf);
  double eval(const double* y) const override { return fn_(y); }
  void grad(const double* y, double* out) const override;

 private:
  Fn fn_;
};

// Registry of built-in potentials: "gl-scalar", "triple-well-2d".
std::shared_ptr<Potential> make_builtin_potential(const std::string& name);
// Parses either a registry name or a JSON polynomial spec
// {"k":..,"terms":[{"coef":..,"powers":[..]},..],"wells":[[..],..],
//  "alpha_inf":..,"r_inf":..}.
std::shared_ptr<Potential> make_potential_from_spec(const std::string& name_or_json);

struct HypothesisCheck {
  std::string hypothesis;  // "H1", "H2", "H3", "finite", "critical"
  bool pass = false;
  std::string detail;
  std::vector<double> witness;  // worst sampled point, when meaningful
};

struct ValidationReport {
  bool pass = false;
  std::vector<HypothesisCheck> checks;
};

// Structural constants the paper derives from V: the well-separation radius
// mu0 (Hessian sandwich + floor outside the well balls), alpha0 = lambda0
// mu0^2 / 2, the far-field quadratic coefficient beta_inf, and the fitted
// circle-bound constant C_unf.
struct StructuralConstants {
  double mu0 = 0.0;
  double lambda0 = 0.0;
  double lambda_max = 0.0;
  double alpha0 = 0.0;
  double r0 = 0.0;
  double beta_inf = 0.0;
  double c_unf = 0.0;          // fitted; see fit_uniform_circle_constant
  double extrut_ratio = 0.0;   // sampled inf of V / alpha0 on the complement
  double beta_window_lo = 0.0; // sampled radius window used for beta_inf
  double beta_window_hi = 0.0;
};

// Checks H1-H3 by eigendecomposition at the wells plus radial sampling up to
// 4*max(R_inf, 2R0).  sample_budget >= 1000.
ValidationReport validate_hypotheses(const Potential& p, int sample_budget);

// Deterministic shrink loop for mu0 (2048 low-discrepancy points per well for
// the Hessian sandwich), then alpha0, R0 and a sampled fit of beta_inf.
// Throws MwError("ShrinkExhausted") when mu0 underflows.
StructuralConstants derive_constants(const Potential& p, double shrink_factor = 0.5);

struct NearestWell {
  int well_index = -1;
  double distance = 0.0;
  bool certified = false;  // true iff V(y) < alpha0; then distance <= sqrt(4 V / lambda0)
};

NearestWell nearest_well(const Potential& p, const StructuralConstants& c, const double* y);

struct EnvelopeReport {
  int samples = 0;
  int violations = 0;
  double max_violation = 0.0;  // relative to the bound scale
};

// Verifies both chains of the quadratic envelope
//   1/4 l_i^- |y-s_i|^2 <= V(y) <= l_i^+ |y-s_i|^2
//   1/2 l_i^- |y-s_i|^2 <= grad V . (y-s_i) <= 2 l_i^+ |y-s_i|^2
// on sampled points of B(s_i, 2 mu0) for every well.
EnvelopeReport quadratic_envelope_check(const Potential& p, const StructuralConstants& c, int samples);

}  // namespace mw
