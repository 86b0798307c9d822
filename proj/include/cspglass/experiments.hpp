#pragma once

#include <cstdint>
#include <vector>

#include "cspglass/ensembles.hpp"
#include "cspglass/landscape.hpp"
#include "cspglass/predicates.hpp"

namespace cspglass {

// Desk-scale ensemble experiments: exact enumeration where it is affordable,
// seeded Monte Carlo elsewhere. These back both the CLI and the acceptance
// checks.

// (1/βn)·log Z_H(β) by exact enumeration of a single-slot oracle
double free_energy_density(const EnergyOracle& oracle, double beta);

struct TrendCell {
  double alpha = 0.0;
  double mean_lhs = 0.0;  // mean of (1/βn) log Z_CSP(β)
  double se_lhs = 0.0;
  double mean_rhs = 0.0;  // mean of f̂(∅) + (1/βn) log Z_SG(β/√α)
  double se_rhs = 0.0;
  double delta = 0.0;  // |mean_lhs − mean_rhs|
  double se = 0.0;     // combined standard error
  int reps = 0;
};

// Both sides of the free-energy interpolation per clause density. The spin
// glass enters through the interpolation endpoint exp(β·H_SG/√α), i.e. at
// effective inverse temperature β/√α; Δ(α) then decays like O(β²/α²) plus
// finite-size error.
std::vector<TrendCell> interpolation_trend(const Predicate& predicate,
                                           const std::vector<double>& alphas, int n, double beta,
                                           int reps, std::uint64_t seed);

struct PoissonExactGap {
  double mean_diff = 0.0;  // mean over paired seeds of φ_pois − φ_exact
  double se = 0.0;
  double bound = 0.0;  // 1/sqrt(αn)
  int reps = 0;
};

// Paired-seed comparison of the Poisson and exact clause-count models; the
// pair shares its clause stream so the instances agree on the first
// min(m, round(αn)) clauses.
PoissonExactGap poisson_exact_gap(const Predicate& predicate, double alpha, int n, double beta,
                                  int reps, std::uint64_t seed);

struct ValueSamples {
  double mean = 0.0;
  double se = 0.0;
  std::vector<double> values;  // per-instance v_I = max H / n
};

// v_I per instance by exact maximization (exact clause-count model)
ValueSamples optimal_value_samples(const Predicate& predicate, double alpha, int n, int reps,
                                   std::uint64_t seed);

struct CovarianceCell {
  double r = 0.0;          // overlap of the probed pair
  double empirical = 0.0;  // empirical Cov(H(σ₁), H(σ₂)) across disorder draws
  double predicted = 0.0;  // n·ξ(R)
};

// Empirical check of Cov[H(σ₁)H(σ₂)] = n·ξ(R) with fresh disorder per draw;
// generation is streamed so no draw materializes the full tensors.
std::vector<CovarianceCell> covariance_probe(const MixturePolynomial& xi, int n,
                                             const std::vector<double>& overlaps, int draws,
                                             std::uint64_t seed);

}  // namespace cspglass
