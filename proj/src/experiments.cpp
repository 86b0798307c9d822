#include "cspglass/experiments.hpp"

#include <cmath>
#include <stdexcept>

#include "cspglass/rng.hpp"

namespace cspglass {

namespace {

struct RunningStats {
  double sum = 0.0, sum_sq = 0.0;
  long count = 0;

  void add(double v) {
    sum += v;
    sum_sq += v * v;
    ++count;
  }
  double mean() const { return sum / count; }
  double se() const {
    if (count < 2) return 0.0;
    const double m = mean();
    const double var = std::max(0.0, (sum_sq - count * m * m) / (count - 1));
    return std::sqrt(var / count);
  }
};

}  // namespace

double free_energy_density(const EnergyOracle& oracle, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("free energy density needs beta > 0");
  GibbsConfig gibbs(beta, 0, 0);
  const RestrictedLogZ z =
      restricted_log_partition(oracle, gibbs, OverlapRegion::full(oracle.slots()));
  return z.log_z / (beta * oracle.slots() * oracle.n());
}

std::vector<TrendCell> interpolation_trend(const Predicate& predicate,
                                           const std::vector<double>& alphas, int n, double beta,
                                           int reps, std::uint64_t seed) {
  if (reps < 2) throw std::invalid_argument("interpolation trend needs at least two replicates");
  const MixturePolynomial xi = mixture_of(predicate);
  std::vector<TrendCell> cells;
  for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
    const double alpha = alphas[ai];
    const CspModel model(PredicateDistribution(predicate), alpha, n, CountMode::Exact);
    const double beta_sg = beta / std::sqrt(alpha);

    RunningStats lhs, rhs;
    for (int rep = 0; rep < reps; ++rep) {
      const CspInstance inst =
          sample_csp(model, derive_seed(seed, {1, ai, static_cast<std::uint64_t>(rep)}));
      lhs.add(free_energy_density(EnergyOracle::single(inst), beta));

      const SpinGlassInstance glass =
          sample_spin_glass(xi, n, derive_seed(seed, {2, ai, static_cast<std::uint64_t>(rep)}));
      // (1/βn)·log Z_SG(β/√α) = φ_SG(β/√α)/√α
      const double phi_sg = free_energy_density(EnergyOracle::single(glass), beta_sg);
      rhs.add(xi.mean_term + phi_sg / std::sqrt(alpha));
    }

    TrendCell cell;
    cell.alpha = alpha;
    cell.reps = reps;
    cell.mean_lhs = lhs.mean();
    cell.se_lhs = lhs.se();
    cell.mean_rhs = rhs.mean();
    cell.se_rhs = rhs.se();
    cell.delta = std::abs(cell.mean_lhs - cell.mean_rhs);
    cell.se = std::sqrt(cell.se_lhs * cell.se_lhs + cell.se_rhs * cell.se_rhs);
    cells.push_back(cell);
  }
  return cells;
}

PoissonExactGap poisson_exact_gap(const Predicate& predicate, double alpha, int n, double beta,
                                  int reps, std::uint64_t seed) {
  if (reps < 2) throw std::invalid_argument("paired comparison needs at least two replicates");
  const CspModel exact_model(PredicateDistribution(predicate), alpha, n, CountMode::Exact);
  const CspModel poisson_model(PredicateDistribution(predicate), alpha, n, CountMode::Poisson);
  const long exact_count = exact_model.exact_clause_count();

  RunningStats diff;
  for (int rep = 0; rep < reps; ++rep) {
    const std::uint64_t rep_seed = derive_seed(seed, {static_cast<std::uint64_t>(rep)});
    // couple through a common clause stream: the instances share a prefix
    SplitMix64 count_rng(derive_seed(rep_seed, {101}));
    const long pois_count =
        static_cast<long>(count_rng.next_poisson(alpha * static_cast<double>(n)));
    const long stream_len = std::max(exact_count, pois_count);

    SplitMix64 clause_rng(derive_seed(rep_seed, {102}));
    CspInstance exact_inst{exact_model, {}, rep_seed};
    CspInstance pois_inst{poisson_model, {}, rep_seed};
    for (long i = 0; i < stream_len; ++i) {
      Clause c = sample_clause(exact_model, clause_rng);
      if (i < exact_count) exact_inst.clauses.push_back(c);
      if (i < pois_count) pois_inst.clauses.push_back(std::move(c));
    }

    const double phi_exact = free_energy_density(EnergyOracle::single(exact_inst), beta);
    const double phi_pois = free_energy_density(EnergyOracle::single(pois_inst), beta);
    diff.add(phi_pois - phi_exact);
  }

  PoissonExactGap out;
  out.mean_diff = diff.mean();
  out.se = diff.se();
  out.bound = 1.0 / std::sqrt(alpha * static_cast<double>(n));
  out.reps = reps;
  return out;
}

ValueSamples optimal_value_samples(const Predicate& predicate, double alpha, int n, int reps,
                                   std::uint64_t seed) {
  if (reps < 1) throw std::invalid_argument("needs at least one instance");
  const CspModel model(PredicateDistribution(predicate), alpha, n, CountMode::Exact);
  ValueSamples out;
  RunningStats stats;
  for (int rep = 0; rep < reps; ++rep) {
    const CspInstance inst = sample_csp(model, derive_seed(seed, {static_cast<std::uint64_t>(rep)}));
    const MaxResult top = brute_force_max(EnergyOracle::single(inst));
    const double v = top.value / n;
    out.values.push_back(v);
    stats.add(v);
  }
  out.mean = stats.mean();
  out.se = stats.se();
  return out;
}

std::vector<CovarianceCell> covariance_probe(const MixturePolynomial& xi, int n,
                                             const std::vector<double>& overlaps, int draws,
                                             std::uint64_t seed) {
  if (draws < 2) throw std::invalid_argument("covariance probe needs at least two draws");
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("covariance probe wants even n >= 2");

  // σ₁ is all-ones; each overlap r is realized by several partners flipping a
  // cyclic window of n(1-r)/2 sites. The window offsets keep distinct
  // partners at mutual overlap ≈ 0, so averaging their per-draw products is
  // an unbiased estimator of the same covariance with less noise.
  std::vector<Spins> partners;
  std::vector<std::vector<std::size_t>> partner_of(overlaps.size());
  const int variant_step = std::max(1, n / 4);
  for (std::size_t t = 0; t < overlaps.size(); ++t) {
    const double r = overlaps[t];
    const long flips = std::lround((1.0 - r) / 2.0 * n);
    if (std::abs((n - 2.0 * flips) / n - r) > 1e-9)
      throw std::invalid_argument("overlap value not representable at this n");
    const int variants = (flips == 0 || flips == n) ? 1 : 4;
    for (int v = 0; v < variants; ++v) {
      Spins s(n, +1);
      for (long j = 0; j < flips; ++j) s[(v * variant_step + j) % n] = -1;
      partner_of[t].push_back(partners.size());
      partners.push_back(std::move(s));
    }
  }

  const std::size_t m = partners.size();
  std::vector<double> sum_a(m, 0.0), sum_b(m, 0.0), sum_ab(m, 0.0);

  std::vector<int> active;
  for (int p = 1; p <= xi.max_degree; ++p)
    if (xi.coefficient(p) > 0.0) active.push_back(p);

  for (int draw = 0; draw < draws; ++draw) {
    SplitMix64 rng(derive_seed(seed, {static_cast<std::uint64_t>(draw)}));
    std::vector<double> h_a(m, 0.0), h_b(m, 0.0);
    for (int p : active) {
      const double coeff =
          std::sqrt(xi.coefficient(p)) * std::pow(static_cast<double>(n), -(p - 1) / 2.0);
      // stream the order-p tensor in row-major order with an odometer,
      // carrying the partner spin products along each index prefix
      double acc_a = 0.0;
      std::vector<double> acc_b(m, 0.0);
      std::vector<int> digit(p, 0);
      std::vector<std::vector<double>> prefix(p + 1, std::vector<double>(m, 1.0));
      int level = 0;
      while (true) {
        if (level == p) {
          const double g = rng.next_normal();
          acc_a += g;  // all-ones products are 1
          const std::vector<double>& pr = prefix[p];
          for (std::size_t t = 0; t < m; ++t) acc_b[t] += g * pr[t];
          --level;
          ++digit[level];
          continue;
        }
        if (digit[level] == n) {
          digit[level] = 0;
          if (level == 0) break;
          --level;
          ++digit[level];
          continue;
        }
        for (std::size_t t = 0; t < m; ++t)
          prefix[level + 1][t] = prefix[level][t] * partners[t][digit[level]];
        ++level;
      }
      for (std::size_t t = 0; t < m; ++t) {
        h_a[t] += coeff * acc_a;
        h_b[t] += coeff * acc_b[t];
      }
    }
    for (std::size_t t = 0; t < m; ++t) {
      sum_a[t] += h_a[t];
      sum_b[t] += h_b[t];
      sum_ab[t] += h_a[t] * h_b[t];
    }
  }

  std::vector<CovarianceCell> cells;
  for (std::size_t t = 0; t < overlaps.size(); ++t) {
    CovarianceCell c;
    c.r = overlaps[t];
    double acc = 0.0;
    for (std::size_t v : partner_of[t])
      acc += sum_ab[v] / draws - (sum_a[v] / draws) * (sum_b[v] / draws);
    c.empirical = acc / static_cast<double>(partner_of[t].size());
    c.predicted = n * xi(overlaps[t]);
    cells.push_back(c);
  }
  return cells;
}

}  // namespace cspglass
