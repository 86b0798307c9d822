#include <doctest.h>

#include <bit>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "cspglass/predicates.hpp"
#include "cspglass/rng.hpp"

using namespace cspglass;

namespace {

// independent spectrum oracle: f̂(S) = E_x[f(x)·χ_S(x)] by exhaustive inner
// products against every parity, O(4^k)
std::vector<double> naive_spectrum(const Predicate& p) {
  const std::size_t size = p.table.size();
  std::vector<double> coeffs(size, 0.0);
  for (std::uint32_t mask = 0; mask < size; ++mask) {
    double acc = 0.0;
    for (std::uint32_t idx = 0; idx < size; ++idx) {
      const int parity = std::popcount(mask & idx) % 2 ? -1 : 1;
      acc += p.table[idx] * parity;
    }
    coeffs[mask] = acc / static_cast<double>(size);
  }
  return coeffs;
}

// brute-force noise stability: average f(σ)f(τ) over all σ and all flip
// patterns weighted by the ρ-correlated flip probabilities
double naive_stability(const Predicate& p, double rho) {
  const int k = p.arity;
  const std::size_t size = p.table.size();
  const double keep = (1.0 + rho) / 2.0;
  const double flip = (1.0 - rho) / 2.0;
  double acc = 0.0;
  for (std::uint32_t sigma = 0; sigma < size; ++sigma) {
    for (std::uint32_t flips = 0; flips < size; ++flips) {
      const int nflips = std::popcount(flips);
      const double prob = std::pow(flip, nflips) * std::pow(keep, k - nflips);
      acc += p.table[sigma] * p.table[sigma ^ flips] * prob;
    }
  }
  return acc / static_cast<double>(size);
}

Predicate xor2() { return builtin_predicate(PredicateFamily::kXor, 2); }

Predicate or2() { return builtin_predicate(PredicateFamily::kSat, 2); }

double table_mean_square(const Predicate& p) {
  double acc = 0.0;
  for (double v : p.table) acc += v * v;
  return acc / static_cast<double>(p.table.size());
}

}  // namespace

TEST_CASE("walsh transform of XOR2 is the parity identity") {
  const FourierSpectrum s = walsh_transform(xor2());
  CHECK(s.mean() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(s.coefficient(subset_mask(2, {1, 2})) == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(s.coefficient(subset_mask(2, {1})) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(s.coefficient(subset_mask(2, {2})) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("walsh transform of the constant function") {
  const Predicate one(2, {1, 1, 1, 1});
  const FourierSpectrum s = walsh_transform(one);
  CHECK(s.mean() == 1.0);
  for (std::uint32_t mask = 1; mask < 4; ++mask) CHECK(s.coefficient(mask) == 0.0);
}

TEST_CASE("walsh transform of OR2 matches the exhaustive oracle") {
  const FourierSpectrum s = walsh_transform(or2());
  const auto oracle = naive_spectrum(or2());
  CHECK(s.mean() == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(s.coefficient(subset_mask(2, {1})) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(s.coefficient(subset_mask(2, {2})) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(s.coefficient(subset_mask(2, {1, 2})) == doctest::Approx(-0.25).epsilon(1e-15));
  for (std::uint32_t mask = 0; mask < 4; ++mask)
    CHECK(s.coefficient(mask) == doctest::Approx(oracle[mask]).epsilon(1e-14));
}

TEST_CASE("every builtin spectrum satisfies Parseval and inverts") {
  for (auto family : {PredicateFamily::kXor, PredicateFamily::kSat, PredicateFamily::kNae,
                      PredicateFamily::OneInK}) {
    for (int k = (family == PredicateFamily::kNae ? 2 : 1); k <= 5; ++k) {
      const Predicate p = builtin_predicate(family, k);
      const FourierSpectrum s = walsh_transform(p);
      double level_total = 0.0;
      for (int j = 0; j <= k; ++j) level_total += s.level_weight(j);
      CHECK(level_total == doctest::Approx(table_mean_square(p)).epsilon(1e-12));
      const auto back = s.to_table();
      for (std::size_t i = 0; i < back.size(); ++i)
        CHECK(back[i] == doctest::Approx(p.table[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("noise stability endpoints and the OR2 value") {
  const FourierSpectrum s = walsh_transform(or2());
  double parseval = 0.0;
  for (double c : s.coefficients) parseval += c * c;
  CHECK(noise_stability(s, 1.0) == doctest::Approx(parseval).epsilon(1e-14));
  CHECK(noise_stability(s, 0.0) == doctest::Approx(s.mean() * s.mean()).epsilon(1e-14));
  // 9/16 + (1/8)(1/2) + (1/16)(1/4) = 41/64, cross-checked by the flip oracle
  CHECK(noise_stability(s, 0.5) == doctest::Approx(41.0 / 64.0).epsilon(1e-14));
  CHECK(noise_stability(s, 0.5) == doctest::Approx(naive_stability(or2(), 0.5)).epsilon(1e-12));
}

TEST_CASE("noise stability equals the correlated-flip average for builtins") {
  for (auto family : {PredicateFamily::kXor, PredicateFamily::kSat, PredicateFamily::kNae,
                      PredicateFamily::OneInK}) {
    for (int k = 2; k <= 4; ++k) {
      const Predicate p = builtin_predicate(family, k);
      const FourierSpectrum s = walsh_transform(p);
      for (double rho : {-1.0, -0.3, 0.0, 0.25, 0.7, 1.0})
        CHECK(noise_stability(s, rho) == doctest::Approx(naive_stability(p, rho)).epsilon(1e-10));
    }
  }
}

TEST_CASE("mixture of XOR2, XOR4 and OR3") {
  const MixturePolynomial m2 = mixture_of(xor2());
  CHECK(m2.mean_term == doctest::Approx(0.5));
  CHECK(m2.max_degree == 2);
  CHECK(m2.coefficient(1) == doctest::Approx(0.0));
  CHECK(m2.coefficient(2) == doctest::Approx(0.25).epsilon(1e-15));

  const MixturePolynomial m4 = mixture_of(builtin_predicate(PredicateFamily::kXor, 4));
  CHECK(m4.mean_term == doctest::Approx(0.5));
  CHECK(m4.coefficient(4) == doctest::Approx(0.25).epsilon(1e-15));
  for (int d = 1; d <= 3; ++d) CHECK(m4.coefficient(d) == doctest::Approx(0.0));

  const MixturePolynomial m3 = mixture_of(builtin_predicate(PredicateFamily::kSat, 3));
  CHECK(m3.mean_term == doctest::Approx(7.0 / 8.0));
  CHECK(m3.coefficient(1) == doctest::Approx(3.0 / 64.0).epsilon(1e-14));
  CHECK(m3.coefficient(2) == doctest::Approx(3.0 / 64.0).epsilon(1e-14));
  CHECK(m3.coefficient(3) == doctest::Approx(1.0 / 64.0).epsilon(1e-14));
}

TEST_CASE("mixture variance identity: xi(1) + mean^2 = E[f^2]") {
  for (auto family : {PredicateFamily::kXor, PredicateFamily::kSat, PredicateFamily::kNae,
                      PredicateFamily::OneInK}) {
    for (int k = 2; k <= 5; ++k) {
      const Predicate p = builtin_predicate(family, k);
      const MixturePolynomial m = mixture_of(p);
      CHECK(m.variance() + m.mean_term * m.mean_term ==
            doctest::Approx(table_mean_square(p)).epsilon(1e-12));
      for (int d = 1; d <= m.max_degree; ++d) {
        CHECK(m.coefficient(d) >= 0.0);
        CHECK(m.coefficient(d) <= 1.0);  // 0/1-valued predicates
      }
    }
  }
}

TEST_CASE("distribution mixtures average level weights") {
  const Predicate x2 = xor2();

  SUBCASE("point mass equals the single-predicate mixture") {
    const MixturePolynomial single = mixture_of(x2);
    const MixturePolynomial dist = mixture_of_distribution(PredicateDistribution(x2));
    CHECK(dist.mean_term == doctest::Approx(single.mean_term));
    CHECK(dist.coefficient(2) == doctest::Approx(single.coefficient(2)));
    CHECK_FALSE(dist.mean_varies);
  }

  SUBCASE("XOR2 mixed with its negation keeps the level weights") {
    std::vector<double> negated;
    for (double v : x2.table) negated.push_back(1.0 - v);
    const PredicateDistribution lambda({{x2, 0.5}, {Predicate(2, negated), 0.5}});
    const MixturePolynomial m = mixture_of_distribution(lambda);
    CHECK(m.mean_term == doctest::Approx(0.5));
    CHECK(m.coefficient(2) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK_FALSE(m.mean_varies);  // both means are 1/2
  }

  SUBCASE("OR2/XOR2 mix averages the spectra and flags the varying mean") {
    const PredicateDistribution lambda({{or2(), 0.5}, {x2, 0.5}});
    const MixturePolynomial m = mixture_of_distribution(lambda);
    CHECK(m.mean_term == doctest::Approx(0.625));
    CHECK(m.coefficient(1) == doctest::Approx(1.0 / 16.0).epsilon(1e-14));
    CHECK(m.coefficient(2) == doctest::Approx(1.0 / 32.0 + 1.0 / 8.0).epsilon(1e-14));
    CHECK(m.mean_varies);
  }
}

TEST_CASE("mixed arities are padded and preserve level weights") {
  const Predicate p3 = builtin_predicate(PredicateFamily::kSat, 3);
  const PredicateDistribution lambda({{or2(), 0.5}, {p3, 0.5}});
  CHECK(lambda.arity() == 3);
  const MixturePolynomial padded = mixture_of(pad_predicate(or2(), 3));
  const MixturePolynomial direct = mixture_of(or2());
  for (int d = 1; d <= 2; ++d)
    CHECK(padded.coefficient(d) == doctest::Approx(direct.coefficient(d)).epsilon(1e-14));
  CHECK(padded.mean_term == doctest::Approx(direct.mean_term));
}

TEST_CASE("builtin families and their Table-1 means") {
  SUBCASE("oneInK at k=2 is the XOR2 table") {
    const Predicate a = builtin_predicate(PredicateFamily::OneInK, 2);
    const Predicate b = xor2();
    CHECK(a.table == b.table);
  }
  SUBCASE("kSAT(2) is OR2") {
    CHECK(walsh_transform(or2()).mean() == 0.75);
  }
  SUBCASE("kXOR(3) has a single level-3 weight") {
    const MixturePolynomial m = mixture_of(builtin_predicate(PredicateFamily::kXor, 3));
    CHECK(m.mean_term == 0.5);
    CHECK(m.coefficient(3) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(m.coefficient(1) == 0.0);
    CHECK(m.coefficient(2) == 0.0);
  }
  SUBCASE("exact dyadic means for all sixteen table rows") {
    for (int k = 2; k <= 5; ++k) {
      CHECK(walsh_transform(builtin_predicate(PredicateFamily::OneInK, k)).mean() ==
            k / std::pow(2.0, k));
      CHECK(walsh_transform(builtin_predicate(PredicateFamily::kNae, k)).mean() ==
            1.0 - std::pow(2.0, 1 - k));
      CHECK(walsh_transform(builtin_predicate(PredicateFamily::kSat, k)).mean() ==
            1.0 - std::pow(2.0, -k));
      CHECK(walsh_transform(builtin_predicate(PredicateFamily::kXor, k)).mean() == 0.5);
    }
  }
  SUBCASE("unsupported parameters are rejected") {
    CHECK_THROWS_AS(builtin_predicate(PredicateFamily::kNae, 1), std::invalid_argument);
    CHECK_THROWS_AS(builtin_predicate(PredicateFamily::kXor, 0), std::invalid_argument);
  }
}

TEST_CASE("predicates with identical per-level weights give identical mixtures") {
  // the Table-1 k=2 coincidence: oneInK, NAE and XOR share the GSED pipeline input
  const MixturePolynomial a = mixture_of(builtin_predicate(PredicateFamily::OneInK, 2));
  const MixturePolynomial b = mixture_of(builtin_predicate(PredicateFamily::kNae, 2));
  const MixturePolynomial c = mixture_of(xor2());
  for (int d = 1; d <= 2; ++d) {
    CHECK(a.coefficient(d) == doctest::Approx(b.coefficient(d)).epsilon(1e-15));
    CHECK(b.coefficient(d) == doctest::Approx(c.coefficient(d)).epsilon(1e-15));
  }
  CHECK(a.mean_term == doctest::Approx(c.mean_term));
}

TEST_CASE("eval_predicate is a checked table lookup") {
  const std::vector<int> pm{+1, -1};
  CHECK(eval_predicate(or2(), pm) == 1.0);
  CHECK(eval_predicate(xor2(), std::vector<int>{+1, +1}) == 0.0);
  CHECK(eval_predicate(builtin_predicate(PredicateFamily::OneInK, 3),
                       std::vector<int>{+1, +1, -1}) == 0.0);
  CHECK_THROWS_AS(eval_predicate(or2(), std::vector<int>{+1}), std::invalid_argument);
}

TEST_CASE("random tables: Parseval, inversion, stability oracle") {
  SplitMix64 rng(20240801);
  for (int trial = 0; trial < 25; ++trial) {
    const int k = 1 + static_cast<int>(rng.next_below(4));
    std::vector<double> table(std::size_t{1} << k);
    for (double& v : table) v = 2.0 * rng.next_double() - 1.0;
    const Predicate p(k, table);
    const FourierSpectrum s = walsh_transform(p);

    double parseval = 0.0;
    for (double c : s.coefficients) parseval += c * c;
    CHECK(parseval == doctest::Approx(table_mean_square(p)).epsilon(1e-12));

    const auto back = s.to_table();
    for (std::size_t i = 0; i < back.size(); ++i)
      CHECK(back[i] == doctest::Approx(p.table[i]).epsilon(1e-12));

    const double rho = 2.0 * rng.next_double() - 1.0;
    CHECK(noise_stability(s, rho) == doctest::Approx(naive_stability(p, rho)).epsilon(1e-10));
  }
}

TEST_CASE("predicate validation") {
  CHECK_THROWS_AS(Predicate(2, {0, 1, 0}), std::invalid_argument);   // wrong length
  CHECK_THROWS_AS(Predicate(1, {0.0, 1.5}), std::invalid_argument);  // out of range
  std::vector<std::pair<Predicate, double>> bad_weights{{xor2(), 0.7}};
  CHECK_THROWS_AS((void)PredicateDistribution{bad_weights}, std::invalid_argument);
}
