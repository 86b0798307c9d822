#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cspglass {

using Spins = std::vector<int>;

// A k-ary Boolean predicate as a truth table over {±1}^k with values in
// [-1,1] (0/1 for satisfaction predicates).
//
// Table layout: index bit (k-i) carries variable i, so variable 1 sits in the
// most significant bit and indices enumerate the k sign patterns
// lexicographically. Bit value 0 means spin +1, bit value 1 means spin -1;
// index 0 is the all-(+1) input. Spin +1 satisfies an un-negated literal.
struct Predicate {
  int arity = 0;
  std::vector<double> table;  // size 2^arity
  std::string name;

  Predicate(int k, std::vector<double> values, std::string label = "");

  // table index of a spin assignment (length must equal arity)
  int index_of(std::span<const int> spins) const;
  double eval(std::span<const int> spins) const;
};

// table lookup; errors on length mismatch
double eval_predicate(const Predicate& p, std::span<const int> spins);

// A finite predicate distribution with nonnegative weights summing to 1.
// Mixed arities are padded up to the maximum arity with ignored inputs,
// which preserves every Fourier level weight.
struct PredicateDistribution {
  std::vector<std::pair<Predicate, double>> entries;

  PredicateDistribution(std::vector<std::pair<Predicate, double>> e);
  explicit PredicateDistribution(Predicate p);  // point mass

  int arity() const { return entries.empty() ? 0 : entries.front().first.arity; }
};

// Fourier coefficients f̂(S) of a predicate, indexed by subset masks in the
// same bit layout as the truth table (bit (k-i) <-> variable i in S).
struct FourierSpectrum {
  int arity = 0;
  std::vector<double> coefficients;  // size 2^arity

  double coefficient(std::uint32_t subset_mask) const { return coefficients[subset_mask]; }
  double mean() const { return coefficients[0]; }       // f̂(∅)
  double level_weight(int level) const;                 // ||f^{=j}||²
  std::vector<double> to_table() const;                 // inverse transform
};

// mask for a variable subset, e.g. subset_mask(3, {1,3})
std::uint32_t subset_mask(int k, std::initializer_list<int> variables);

// ξ(s) = Σ_{p≥1} c_p² s^p together with the mean term f̂(∅). The mixture of
// the spin glass associated with a predicate: ξ(s) = Stab_s(f) − f̂(∅)².
struct MixturePolynomial {
  int max_degree = 0;
  std::vector<double> weights;  // c_p² for p = 1..max_degree
  double mean_term = 0.0;
  // set when f̂(∅) fluctuates across the distribution: degree-0 fluctuation
  // has no mixture term of its own and is excluded from ξ
  bool mean_varies = false;

  MixturePolynomial() = default;
  MixturePolynomial(std::vector<double> level_weights, double mean);

  double operator()(double s) const;         // ξ(s)
  double derivative(double s) const;         // ξ'(s)
  double second_derivative(double s) const;  // ξ''(s)
  double variance() const;                   // ξ(1)
  double coefficient(int degree) const;      // c_p²
  bool is_zero() const;

  static MixturePolynomial monomial(int degree, double c2);
};

// f̂(S) = E_x[f(x)·χ_S(x)] for all S, via the fast butterfly in O(k·2^k)
FourierSpectrum walsh_transform(const Predicate& p);

// Stab_ρ[f] = Σ_S ρ^|S| f̂(S)²
double noise_stability(const FourierSpectrum& s, double rho);

MixturePolynomial mixture_of(const Predicate& p);
MixturePolynomial mixture_of_distribution(const PredicateDistribution& lambda);

enum class PredicateFamily { kXor, kSat, kNae, OneInK };

// 0/1 truth tables for the named families: kXOR satisfied when the spin
// product is -1, kSAT when some literal is true, oneInK when exactly one is,
// kNAE unless all literals agree.
Predicate builtin_predicate(PredicateFamily family, int k);
std::optional<PredicateFamily> family_from_string(std::string_view name);
std::string family_name(PredicateFamily family);

// same predicate on k ≥ arity inputs, extra variables ignored
Predicate pad_predicate(const Predicate& p, int k);

}  // namespace cspglass
