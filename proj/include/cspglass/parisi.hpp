#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "cspglass/predicates.hpp"

namespace cspglass {

// raised when a numerical guard trips (grid too small for the requested
// mixture, boundary influence above tolerance)
struct GridError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// U: nonnegative and non-decreasing (ground state energy density).
// L: nonnegative, free monotonicity (algorithmic threshold ALG).
enum class ZetaClass { Monotone, Free };

// Piecewise-constant order parameter ζ on [0,1):
// ζ(t) = values[i] on [breakpoints[i], breakpoints[i+1]).
struct OrderParameter {
  std::vector<double> breakpoints{0.0, 1.0};  // 0 = t_0 < ... < t_m = 1
  std::vector<double> values{0.0};            // z_1..z_m, nonnegative
  ZetaClass zeta_class = ZetaClass::Monotone;

  int atoms() const { return static_cast<int>(values.size()); }
  double at(double t) const;
  void validate() const;

  static OrderParameter zero() { return {}; }
  static OrderParameter constant(double z, ZetaClass cls = ZetaClass::Monotone);
};

// Discretization of Φ_ζ(x;t). half_width <= 0 selects the default
// 8·sqrt(ξ'(1)); spatial_points is the number of grid intervals on
// [-L, L] (must be even).
struct ParisiGrid {
  double half_width = 0.0;
  int spatial_points = 1 << 12;
  int time_steps_per_interval = 1;
  bool with_diagnostics = true;
};

struct ParisiEvaluation {
  double phi_at_origin = 0.0;  // field-averaged Φ(·, 0)
  double correction = 0.0;     // ½ ∫ s ξ''(s) ζ(s) ds, in closed form
  double value = 0.0;          // phi_at_origin − correction
  double grid_delta = 0.0;     // |value − value at half resolution|
};

// Zero-temperature Parisi functional. Solves
//   ∂_t Φ + (ξ''(t)/2)(∂_xx Φ + ζ(t)(∂_x Φ)²) = 0,  Φ(x,1) = |x|
// backward in time. On each constant-ζ interval with z > 0 the substitution
// u = exp(zΦ) turns this into a backward heat equation, solved exactly by one
// Gaussian convolution of variance ∫ξ''; intervals with z = 0 apply the heat
// flow to Φ directly. The convolution is direct quadrature in shifted
// log-domain. A degree-1 mixture term never enters ξ'', so it is accounted
// for by averaging Φ(·,0) over a centered Gaussian field of variance ξ'(0)
// (this reduces to Φ(0,0) when ξ'(0) = 0 and reproduces the pure-field value
// c₁·sqrt(2/π)).
ParisiEvaluation evaluate_parisi(const MixturePolynomial& xi, const OrderParameter& zeta,
                                 const ParisiGrid& grid = {});

// closed form at ζ ≡ 0: sqrt(2 ξ'(1) / π), the replica-symmetric bound
double rs_value(const MixturePolynomial& xi);

struct MinimizeOptions {
  int max_atoms = 8;
  ParisiGrid search_grid{0.0, 1 << 10, 1, false};  // used while optimizing
  ParisiGrid report_grid{0.0, 1 << 12, 1, true};   // final evaluation
  double atom_gain_tol = 3e-4;  // stop adding atoms when the gain drops below
  double value_tol = 2e-5;      // coordinate-descent convergence
  int descent_rounds = 60;
  int polish_evals = 220;       // downhill-simplex fallback budget
  double z_cap_scale = 512.0;   // z ≤ z_cap_scale / sqrt(ξ(1))
  int restarts = 2;             // extra seeded restarts (class L)
  std::uint64_t seed = 0x900dcafe;
};

struct MinimizeResult {
  OrderParameter zeta;
  double value = 0.0;       // report-grid evaluation of the best ζ
  double grid_delta = 0.0;
  ParisiEvaluation evaluation;
  std::vector<double> per_atom_values;  // best search-grid value for m = 1..
  bool converged = true;                // false when the iteration budget ran out
};

// min over the monotone class U: upper bound on GSED, nonincreasing in atoms
MinimizeResult minimize_gsed(const MixturePolynomial& xi, const MinimizeOptions& opts = {});

// inf over the extended class L (monotonicity dropped): upper bound on ALG
MinimizeResult minimize_alg(const MixturePolynomial& xi, const MinimizeOptions& opts = {});

struct CspValue {
  double value = 0.0;      // f̂(∅) + GSED/√α
  double mean_term = 0.0;
  double gsed = 0.0;
  double grid_delta = 0.0;
  bool converged = true;
};

// v_I = f̂(∅) + GSED(SG_ξ)/√α for the associated spin glass
CspValue csp_value_formula(const Predicate& p, double alpha, const MinimizeOptions& opts = {});
CspValue csp_value_formula(const PredicateDistribution& lambda, double alpha,
                           const MinimizeOptions& opts = {});

}  // namespace cspglass
