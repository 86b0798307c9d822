#include <doctest.h>

#include <cmath>
#include <map>
#include <stdexcept>

#include "cspglass/ensembles.hpp"
#include "cspglass/rng.hpp"

using namespace cspglass;

namespace {

CspModel xor2_model(int n, double alpha, CountMode mode = CountMode::Exact) {
  return CspModel(PredicateDistribution(builtin_predicate(PredicateFamily::kXor, 2)), alpha, n,
                  mode);
}

bool same_clauses(const std::vector<Clause>& a, const std::vector<Clause>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].predicate_index != b[i].predicate_index || a[i].indices != b[i].indices ||
        a[i].signs != b[i].signs || a[i].multiplicity != b[i].multiplicity)
      return false;
  }
  return true;
}

// naive triple-loop contraction oracle for degree ≤ 3 mixtures
double naive_sg_energy(const SpinGlassInstance& g, const Spins& sigma) {
  const int n = g.n;
  double acc = 0.0;
  for (std::size_t d = 0; d < g.degrees.size(); ++d) {
    const int p = g.degrees[d];
    const double coeff =
        std::sqrt(g.xi.coefficient(p)) * std::pow(static_cast<double>(n), -(p - 1) / 2.0);
    const auto& j = g.disorder[d];
    double sum = 0.0;
    if (p == 1) {
      for (int a = 0; a < n; ++a) sum += j[a] * sigma[a];
    } else if (p == 2) {
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) sum += j[a * n + b] * sigma[a] * sigma[b];
    } else if (p == 3) {
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          for (int c = 0; c < n; ++c)
            sum += j[(a * n + b) * n + c] * sigma[a] * sigma[b] * sigma[c];
    }
    acc += coeff * sum;
  }
  return g.scale * acc;
}

}  // namespace

TEST_CASE("exact mode draws exactly round(alpha n) clauses") {
  const CspInstance inst = sample_csp(xor2_model(4, 1.0), 7);
  CHECK(inst.total_multiplicity() == 4);
  CHECK(inst.clauses.size() == 4);
  for (const Clause& c : inst.clauses) {
    CHECK(c.indices.size() == 2);
    for (int v : c.indices) {
      CHECK(v >= 0);
      CHECK(v < 4);
    }
    for (int s : c.signs) CHECK((s == 1 || s == -1));
  }
}

TEST_CASE("poisson clause counts stay in the 4-sigma band") {
  const CspModel model = xor2_model(10, 10.0, CountMode::Poisson);  // mean 100
  int inside = 0;
  const int seeds = 2000;
  for (int s = 0; s < seeds; ++s) {
    const long count = sample_csp(model, derive_seed(99, {static_cast<std::uint64_t>(s)}))
                           .total_multiplicity();
    if (count >= 60 && count <= 140) ++inside;
  }
  CHECK(inside >= static_cast<int>(seeds * 0.999));
}

TEST_CASE("sampling is deterministic in the seed") {
  const CspModel model = xor2_model(16, 4.0, CountMode::Poisson);
  const CspInstance a = sample_csp(model, 12345);
  const CspInstance b = sample_csp(model, 12345);
  const CspInstance c = sample_csp(model, 54321);
  CHECK(same_clauses(a.clauses, b.clauses));
  CHECK_FALSE(same_clauses(a.clauses, c.clauses));
}

TEST_CASE("csp_energy sums signed clause values over alpha") {
  CspModel model = xor2_model(2, 1.0);
  CspInstance inst{model, {}, 0};
  inst.clauses.push_back({0, {0, 1}, {1, 1}, 1});

  CHECK(csp_energy(inst, Spins{+1, -1}) == 1.0);  // satisfied XOR
  CHECK(csp_energy(inst, Spins{+1, +1}) == 0.0);  // violated
  CHECK_THROWS_AS(csp_energy(inst, Spins{+1}), std::invalid_argument);

  SUBCASE("fully satisfied instance scores m/alpha") {
    CspModel sat_model(PredicateDistribution(builtin_predicate(PredicateFamily::kSat, 2)), 2.5, 8,
                       CountMode::Exact);
    CspInstance all{sat_model, {}, 0};
    for (int i = 0; i < 20; ++i) all.clauses.push_back({0, {i % 8, (i + 1) % 8}, {1, 1}, 1});
    CHECK(csp_energy(all, Spins(8, +1)) == doctest::Approx(20 / 2.5));
  }

  SUBCASE("0/1 predicates keep energies inside [-n, n]") {
    const CspModel m = xor2_model(6, 8.0, CountMode::Poisson);
    SplitMix64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
      const CspInstance random_inst = sample_csp(m, rng.next());
      Spins sigma(6);
      for (int& s : sigma) s = rng.next_sign();
      const double e = csp_energy(random_inst, sigma);
      CHECK(e >= -6.0);
      CHECK(e <= 6.0);
    }
  }
}

TEST_CASE("spin glass disorder has the right shapes and moments") {
  const SpinGlassInstance sk = sample_spin_glass(MixturePolynomial::monomial(2, 1.0), 64, 3);
  REQUIRE(sk.degrees == std::vector<int>{2});
  CHECK(sk.disorder[0].size() == 64 * 64);

  std::vector<double> w{0.0, 0.25, 0.25};
  const SpinGlassInstance mixed = sample_spin_glass(MixturePolynomial(w, 0.0), 16, 4);
  REQUIRE(mixed.degrees == std::vector<int>{2, 3});
  CHECK(mixed.disorder[0].size() == 16 * 16);
  CHECK(mixed.disorder[1].size() == 16 * 16 * 16);

  SUBCASE("entry mean is 0 within 4 sigma over 1e6 draws") {
    const SpinGlassInstance big = sample_spin_glass(MixturePolynomial::monomial(2, 1.0), 1000, 11);
    double mean = 0.0;
    for (double v : big.disorder[0]) mean += v;
    mean /= static_cast<double>(big.disorder[0].size());
    CHECK(std::abs(mean) <= 0.004);
  }

  SUBCASE("memory budget guard") {
    CHECK_THROWS_AS(sample_spin_glass(MixturePolynomial::monomial(3, 1.0), 4096, 1),
                    ResourceLimitError);
  }
}

TEST_CASE("sg_energy matches the contraction oracle") {
  SUBCASE("scalar case") {
    const SpinGlassInstance one = sample_spin_glass(MixturePolynomial::monomial(2, 1.0), 1, 9);
    CHECK(sg_energy(one, Spins{+1}) == doctest::Approx(one.disorder[0][0]));
    CHECK(sg_energy(one, Spins{-1}) == doctest::Approx(one.disorder[0][0]));  // even degree
  }
  SUBCASE("even mixtures are flip symmetric") {
    const SpinGlassInstance g = sample_spin_glass(MixturePolynomial::monomial(2, 0.5), 12, 21);
    SplitMix64 rng(2);
    Spins sigma(12);
    for (int& s : sigma) s = rng.next_sign();
    Spins flipped = sigma;
    for (int& s : flipped) s = -s;
    CHECK(sg_energy(g, sigma) == doctest::Approx(sg_energy(g, flipped)).epsilon(1e-12));
  }
  SUBCASE("n=3 random instance vs triple loop") {
    std::vector<double> w{0.3, 0.25, 0.45};
    const SpinGlassInstance g = sample_spin_glass(MixturePolynomial(w, 0.0), 3, 77);
    SplitMix64 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
      Spins sigma(3);
      for (int& s : sigma) s = rng.next_sign();
      CHECK(sg_energy(g, sigma) == doctest::Approx(naive_sg_energy(g, sigma)).epsilon(1e-10));
    }
  }
  SUBCASE("dimension check") {
    const SpinGlassInstance g = sample_spin_glass(MixturePolynomial::monomial(2, 1.0), 4, 1);
    CHECK_THROWS_AS(sg_energy(g, Spins{1, 1}), std::invalid_argument);
  }
}

TEST_CASE("coupled spec validation enforces (Ab)_i = 1") {
  CHECK_NOTHROW(CoupledSpec({{1}}, {1.0}));
  CHECK_NOTHROW(CoupledSpec({{1, 1, 0}, {1, 0, 1}}, {0.3, 0.7, 0.7}));
  CHECK_THROWS_AS(CoupledSpec({{1, 0}, {0, 1}}, {1.0, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(CoupledSpec({{2}}, {0.5}), std::invalid_argument);
  CHECK_THROWS_AS(CoupledSpec({{1}}, {-1.0}), std::invalid_argument);
}

TEST_CASE("identity coupling reproduces one ordinary instance") {
  const CspModel model = xor2_model(12, 2.0, CountMode::Poisson);
  const auto observed = sample_coupled_csp(CoupledSpec({{1}}, {1.0}), model, 31);
  REQUIRE(observed.size() == 1);
  CHECK(observed[0].model.alpha == model.alpha);
  CHECK(observed[0].n() == 12);
}

TEST_CASE("coupled csp observed instances have mean clause count alpha*n") {
  const CspModel model = xor2_model(10, 3.0, CountMode::Poisson);  // αn = 30
  const CoupledSpec spec({{1, 1, 0}, {1, 0, 1}}, {0.4, 0.6, 0.6});
  double total0 = 0.0, total1 = 0.0;
  const int reps = 800;
  for (int r = 0; r < reps; ++r) {
    const auto obs =
        sample_coupled_csp(spec, model, derive_seed(8, {static_cast<std::uint64_t>(r)}));
    total0 += static_cast<double>(obs[0].total_multiplicity());
    total1 += static_cast<double>(obs[1].total_multiplicity());
  }
  // mean 30, sd of the mean ≈ sqrt(30/800) ≈ 0.19: allow 4σ
  CHECK(std::abs(total0 / reps - 30.0) < 0.8);
  CHECK(std::abs(total1 / reps - 30.0) < 0.8);
}

TEST_CASE("coupled spin glass sums sqrt-scaled hidden components") {
  const MixturePolynomial xi = MixturePolynomial::monomial(2, 1.0);
  const CoupledSpec spec({{1, 1, 0}, {1, 0, 1}}, {0.25, 0.75, 0.75});
  const CoupledSpinGlass coupled = sample_coupled_spin_glass(spec, xi, 8, 5);
  REQUIRE(coupled.hidden.size() == 3);
  CHECK(coupled.hidden[0].scale == doctest::Approx(0.5));
  CHECK(coupled.hidden[1].scale == doctest::Approx(std::sqrt(0.75)));
  SplitMix64 rng(17);
  Spins sigma(8);
  for (int& s : sigma) s = rng.next_sign();
  const double direct = sg_energy(coupled.hidden[0], sigma) + sg_energy(coupled.hidden[1], sigma);
  CHECK(coupled.observed_energy(0, sigma) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("t-correlated pairs share exactly the common block") {
  const CspModel model = xor2_model(50, 4.0, CountMode::Poisson);  // αn = 200

  SUBCASE("t = 1 gives identical instances") {
    const auto [a, b] = t_correlated_pair(model, 1.0, 99);
    CHECK(same_clauses(a.clauses, b.clauses));
  }
  SUBCASE("t = 0 gives independent instances") {
    const auto [a, b] = t_correlated_pair(model, 0.0, 99);
    CHECK_FALSE(same_clauses(a.clauses, b.clauses));
  }
  SUBCASE("exact mode is rejected") {
    CHECK_THROWS_AS(t_correlated_pair(xor2_model(50, 4.0), 0.5, 1), std::invalid_argument);
  }
  SUBCASE("shared block size concentrates at alpha t n") {
    int inside = 0;
    const int seeds = 1500;
    for (int s = 0; s < seeds; ++s) {
      const auto [a, b] =
          t_correlated_pair(model, 0.5, derive_seed(123, {static_cast<std::uint64_t>(s)}));
      // the shared block is the common prefix of both clause lists
      std::size_t shared = 0;
      while (shared < a.clauses.size() && shared < b.clauses.size()) {
        const Clause& ca = a.clauses[shared];
        const Clause& cb = b.clauses[shared];
        if (ca.indices != cb.indices || ca.signs != cb.signs) break;
        ++shared;
      }
      if (shared >= 60 && shared <= 140) ++inside;  // Pois(100), 4σ band
    }
    CHECK(inside >= static_cast<int>(seeds * 0.999));
  }
}

TEST_CASE("poisson multiplicities follow Pois(alpha / (2^k n^{k-1})) per pattern") {
  // n=3, k=2, α=3: every (index pair, sign pattern) has mean 9/36 = 1/4
  const CspModel model = xor2_model(3, 3.0, CountMode::Poisson);
  const double lambda = 0.25;
  const int draws = 100000;
  long hist[4] = {0, 0, 0, 0};  // multiplicity 0,1,2,≥3 pooled over all 36 patterns
  std::map<int, int> count;
  for (int d = 0; d < draws; ++d) {
    const CspInstance inst = sample_csp(model, derive_seed(2024, {static_cast<std::uint64_t>(d)}));
    count.clear();
    for (const Clause& c : inst.clauses) {
      const int sign_bits = (c.signs[0] < 0 ? 2 : 0) | (c.signs[1] < 0 ? 1 : 0);
      count[(c.indices[0] * 3 + c.indices[1]) * 4 + sign_bits] += c.multiplicity;
    }
    int nonzero_patterns = 0;
    for (const auto& [pattern, mult] : count) {
      ++nonzero_patterns;
      ++hist[std::min(mult, 3)];
    }
    hist[0] += 36 - nonzero_patterns;
  }
  const double total = 36.0 * draws;
  const double p0 = std::exp(-lambda);
  const double p1 = lambda * p0;
  const double p2 = lambda * lambda * p0 / 2.0;
  const double probs[4] = {p0, p1, p2, 1.0 - p0 - p1 - p2};
  double chi_sq = 0.0;
  for (int b = 0; b < 4; ++b) {
    const double expected = probs[b] * total;
    chi_sq += (hist[b] - expected) * (hist[b] - expected) / expected;
  }
  CHECK(chi_sq < 16.266);  // χ²(3 df) at p = 0.001
}

TEST_CASE("tree ensembles scale components by coupling increments") {
  SUBCASE("star tree gives independent full-strength instances") {
    const TreeEnsembleSpec spec({2}, {0.0, 1.0});
    const CspModel model = xor2_model(10, 3.0, CountMode::Poisson);
    const TreeCspEnsemble ens = tree_ensemble_csp(spec, model, 7);
    REQUIRE(ens.leaves.size() == 2);
    CHECK_FALSE(same_clauses(ens.leaves[0].clauses, ens.leaves[1].clauses));
  }

  SUBCASE("zero-strength layer leaves the leaves unaffected") {
    const TreeEnsembleSpec spec({2, 2}, {0.0, 0.0, 1.0});
    const MixturePolynomial xi = MixturePolynomial::monomial(2, 1.0);
    const TreeSpinGlassEnsemble ens = tree_ensemble_spin_glass(spec, xi, 8, 13);
    REQUIRE(ens.leaf_components[0].size() == 2);
    SplitMix64 rng(4);
    Spins sigma(8);
    for (int& s : sigma) s = rng.next_sign();
    // depth-1 components carry scale sqrt(0) = 0
    const double only_deep = sg_energy(ens.components[ens.leaf_components[0][1]], sigma);
    CHECK(ens.leaf_energy(0, sigma) == doctest::Approx(only_deep).epsilon(1e-12));
  }

  SUBCASE("lca depth follows the mixed-radix leaf layout") {
    const TreeEnsembleSpec spec({2, 3}, {0.0, 0.5, 1.0});
    CHECK(spec.leaf_count() == 6);
    CHECK(spec.lca_depth(0, 1) == 1);  // siblings under the same depth-1 node
    CHECK(spec.lca_depth(0, 3) == 0);  // different depth-1 subtrees
    CHECK(spec.lca_depth(4, 5) == 1);
    CHECK(spec.lca_depth(2, 2) == 2);
  }

  SUBCASE("leaf-pair energy covariance tracks the lca coupling") {
    const TreeEnsembleSpec spec({2, 2}, {0.0, 0.4, 1.0});
    const MixturePolynomial xi = MixturePolynomial::monomial(2, 1.0);
    const int n = 16;
    Spins sigma(n, +1);
    const int draws = 15000;
    double sum_uu = 0.0, sum_u = 0.0, sum_v = 0.0, sum_uv = 0.0, sum_w = 0.0, sum_uw = 0.0;
    for (int d = 0; d < draws; ++d) {
      const TreeSpinGlassEnsemble ens =
          tree_ensemble_spin_glass(spec, xi, n, derive_seed(6, {static_cast<std::uint64_t>(d)}));
      const double hu = ens.leaf_energy(0, sigma);
      const double hv = ens.leaf_energy(1, sigma);  // lca depth 1: cov = n·ξ(1)·0.4
      const double hw = ens.leaf_energy(2, sigma);  // lca depth 0: cov = 0
      sum_u += hu;
      sum_v += hv;
      sum_w += hw;
      sum_uu += hu * hu;
      sum_uv += hu * hv;
      sum_uw += hu * hw;
    }
    const double mean_u = sum_u / draws, mean_v = sum_v / draws, mean_w = sum_w / draws;
    const double var_u = sum_uu / draws - mean_u * mean_u;
    const double cov_uv = sum_uv / draws - mean_u * mean_v;
    const double cov_uw = sum_uw / draws - mean_u * mean_w;
    CHECK(var_u == doctest::Approx(16.0).epsilon(0.05));
    CHECK(cov_uv == doctest::Approx(16.0 * 0.4).epsilon(0.05));
    CHECK(std::abs(cov_uw) < 0.05 * 16.0);
  }

  SUBCASE("spec validation") {
    CHECK_THROWS_AS(TreeEnsembleSpec({2}, {0.0, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(TreeEnsembleSpec({2}, {0.5, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(TreeEnsembleSpec({2, 2}, {0.0, 0.7, 0.4, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(TreeEnsembleSpec({}, {0.0}), std::invalid_argument);
  }
}

TEST_CASE("split streams decorrelate instances") {
  // nearby master seeds and nearby labels give unrelated samples
  const CspModel model = xor2_model(32, 4.0, CountMode::Poisson);
  const CspInstance a = sample_csp(model, 1000);
  const CspInstance b = sample_csp(model, 1001);
  CHECK_FALSE(same_clauses(a.clauses, b.clauses));
  const std::uint64_t s1 = derive_seed(42, {1, 2, 3});
  const std::uint64_t s2 = derive_seed(42, {1, 2, 4});
  const std::uint64_t s3 = derive_seed(42, {1, 2});
  CHECK(s1 != s2);
  CHECK(s1 != s3);
  CHECK(derive_seed(42, {1, 2, 3}) == s1);  // stable
}
