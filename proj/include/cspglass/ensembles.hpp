#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cspglass/predicates.hpp"

namespace cspglass {

// raised when a desk-scale guard trips (disorder memory budget, enumeration size)
struct ResourceLimitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class CountMode { Exact, Poisson };

// Random CSP model: m = αn clauses of predicates drawn from Λ applied to
// uniform index tuples with uniform literal signs.
struct CspModel {
  PredicateDistribution lambda;
  double alpha = 1.0;
  int n = 0;
  CountMode mode = CountMode::Exact;

  CspModel(PredicateDistribution l, double a, int vars, CountMode m = CountMode::Exact);
  int exact_clause_count() const;  // round(αn)
};

struct Clause {
  int predicate_index = 0;
  std::vector<int> indices;  // 0-based variables, repeats allowed
  std::vector<int> signs;    // ±1 per literal
  int multiplicity = 1;
};

struct CspInstance {
  CspModel model;
  std::vector<Clause> clauses;
  std::uint64_t seed = 0;

  int n() const { return model.n; }
  long total_multiplicity() const;
};

CspInstance sample_csp(const CspModel& model, std::uint64_t seed);

class SplitMix64;  // rng.hpp

// one clause from the model (uniform indices, uniform signs, predicate ~ Λ)
Clause sample_clause(const CspModel& model, SplitMix64& rng);

// H^α(σ) = (1/α) Σ_e mult_e · f_e(σ_e); always in [-n, n]
double csp_energy(const CspInstance& inst, std::span<const int> sigma);

// Gaussian disorder of a mixed spin glass, materialized per active degree.
struct SpinGlassInstance {
  MixturePolynomial xi;
  int n = 0;
  double scale = 1.0;  // energy multiplier; coupled components carry sqrt(b)
  std::vector<int> degrees;                   // active p with c_p² > 0
  std::vector<std::vector<double>> disorder;  // per degree, row-major [n]^p
  std::uint64_t seed = 0;
};

inline constexpr long kDefaultDisorderBudget = 1L << 26;  // doubles (512 MiB)

SpinGlassInstance sample_spin_glass(const MixturePolynomial& xi, int n, std::uint64_t seed,
                                    long budget_entries = kDefaultDisorderBudget);

// H^ξ(σ) = scale · Σ_p c_p n^{-(p-1)/2} ⟨J^{(p)}, σ^{⊗p}⟩
double sg_energy(const SpinGlassInstance& inst, std::span<const int> sigma);

// ℓ observed Hamiltonians as 0/1 combinations of ℓ' independent hidden ones,
// with (Ab)_i = 1 so each observed instance has single-instance covariance.
struct CoupledSpec {
  std::vector<std::vector<int>> a;  // ℓ×ℓ' matrix with entries in {0,1}
  std::vector<double> b;            // ℓ' nonnegative scales

  CoupledSpec(std::vector<std::vector<int>> matrix, std::vector<double> scales);
  int observed() const { return static_cast<int>(a.size()); }
  int hidden() const { return static_cast<int>(b.size()); }
};

// hidden instance i' at clause density b_{i'}·α (Poisson); observed = clause union
std::vector<CspInstance> sample_coupled_csp(const CoupledSpec& spec, const CspModel& base,
                                            std::uint64_t seed);

struct CoupledSpinGlass {
  CoupledSpec spec;
  std::vector<SpinGlassInstance> hidden;  // component i' carries scale sqrt(b_{i'})
  int n = 0;

  double observed_energy(int i, std::span<const int> sigma) const;
};

CoupledSpinGlass sample_coupled_spin_glass(const CoupledSpec& spec, const MixturePolynomial& xi,
                                           int n, std::uint64_t seed,
                                           long budget_entries = kDefaultDisorderBudget);

// shared Pois(αtn) block plus two independent Pois((1-t)αn) blocks;
// requires the Poisson count mode
std::pair<CspInstance, CspInstance> t_correlated_pair(const CspModel& model, double t,
                                                      std::uint64_t seed);

// Rooted tree of height D: every node at depth d-1 has branching[d-1]
// children; the component at depth d is scaled by coupling[d]-coupling[d-1]
// and each leaf sums (or unions) the components on its root path.
struct TreeEnsembleSpec {
  std::vector<int> branching;    // k⃗, length D
  std::vector<double> coupling;  // p⃗, length D+1 with 0 = p_0 ≤ ... ≤ p_D = 1

  TreeEnsembleSpec(std::vector<int> k, std::vector<double> p);
  int depth() const { return static_cast<int>(branching.size()); }
  long leaf_count() const;
  // depth of the least common ancestor of two leaves (leaves in mixed-radix order)
  int lca_depth(long leaf_u, long leaf_v) const;
};

struct TreeCspEnsemble {
  TreeEnsembleSpec spec;
  std::vector<CspInstance> leaves;  // clause lists merged along each root path
};

TreeCspEnsemble tree_ensemble_csp(const TreeEnsembleSpec& spec, const CspModel& base,
                                  std::uint64_t seed);

struct TreeSpinGlassEnsemble {
  TreeEnsembleSpec spec;
  int n = 0;
  std::vector<SpinGlassInstance> components;      // one per non-root node
  std::vector<std::vector<int>> leaf_components;  // component ids on each leaf's path

  double leaf_energy(long leaf, std::span<const int> sigma) const;
};

TreeSpinGlassEnsemble tree_ensemble_spin_glass(const TreeEnsembleSpec& spec,
                                               const MixturePolynomial& xi, int n,
                                               std::uint64_t seed,
                                               long budget_entries = kDefaultDisorderBudget);

}  // namespace cspglass
