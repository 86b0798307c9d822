#include "cspglass/ensembles.hpp"

#include <algorithm>
#include <cmath>

#include "cspglass/rng.hpp"

namespace cspglass {

namespace {

// stream labels for seed splitting: sampling order never changes results
enum StreamTag : std::uint64_t {
  kCountStream = 1,
  kClauseStream = 2,
  kDegreeStream = 3,
  kHiddenStream = 4,
  kSharedStream = 5,
  kNodeStream = 6,
};

std::vector<Clause> sample_clause_block(const CspModel& model, double mean_count, CountMode mode,
                                        std::uint64_t seed) {
  SplitMix64 count_rng(derive_seed(seed, {kCountStream}));
  long count = (mode == CountMode::Exact)
                   ? static_cast<long>(std::llround(mean_count))
                   : static_cast<long>(count_rng.next_poisson(mean_count));
  SplitMix64 clause_rng(derive_seed(seed, {kClauseStream}));
  std::vector<Clause> clauses;
  clauses.reserve(count);
  for (long i = 0; i < count; ++i) clauses.push_back(sample_clause(model, clause_rng));
  return clauses;
}

long dense_entries(const MixturePolynomial& xi, int n) {
  long total = 0;
  for (int p = 1; p <= xi.max_degree; ++p) {
    if (xi.coefficient(p) <= 0.0) continue;
    double entries = std::pow(static_cast<double>(n), p);
    if (entries > 9e18) return -1;
    total += static_cast<long>(entries);
    if (total < 0) return -1;
  }
  return total;
}

double contract(const double* j, int p, int n, std::span<const int> sigma, double partial) {
  if (p == 1) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += j[i] * sigma[i];
    return acc * partial;
  }
  double acc = 0.0;
  long stride = 1;
  for (int q = 1; q < p; ++q) stride *= n;
  for (int i = 0; i < n; ++i) acc += contract(j + i * stride, p - 1, n, sigma, sigma[i]);
  return acc * partial;
}

}  // namespace

CspModel::CspModel(PredicateDistribution l, double a, int vars, CountMode m)
    : lambda(std::move(l)), alpha(a), n(vars), mode(m) {
  if (!(alpha > 0.0)) throw std::invalid_argument("clause density alpha must be positive");
  if (n < 1) throw std::invalid_argument("variable count must be positive");
  if (mode == CountMode::Exact && exact_clause_count() < 1)
    throw std::invalid_argument("exact mode requires alpha*n >= 1");
}

int CspModel::exact_clause_count() const {
  return static_cast<int>(std::llround(alpha * static_cast<double>(n)));
}

long CspInstance::total_multiplicity() const {
  long total = 0;
  for (const Clause& c : clauses) total += c.multiplicity;
  return total;
}

Clause sample_clause(const CspModel& model, SplitMix64& rng) {
  Clause c;
  // predicate by cumulative weight
  double u = rng.next_double();
  double acc = 0.0;
  c.predicate_index = 0;
  for (std::size_t i = 0; i < model.lambda.entries.size(); ++i) {
    acc += model.lambda.entries[i].second;
    if (u < acc || i + 1 == model.lambda.entries.size()) {
      c.predicate_index = static_cast<int>(i);
      break;
    }
  }
  const int k = model.lambda.entries[c.predicate_index].first.arity;
  c.indices.resize(k);
  c.signs.resize(k);
  for (int j = 0; j < k; ++j) c.indices[j] = static_cast<int>(rng.next_below(model.n));
  for (int j = 0; j < k; ++j) c.signs[j] = rng.next_sign();
  return c;
}

CspInstance sample_csp(const CspModel& model, std::uint64_t seed) {
  CspInstance inst{model, {}, seed};
  inst.clauses =
      sample_clause_block(model, model.alpha * static_cast<double>(model.n), model.mode, seed);
  return inst;
}

double csp_energy(const CspInstance& inst, std::span<const int> sigma) {
  if (static_cast<int>(sigma.size()) != inst.model.n)
    throw std::invalid_argument("assignment length does not match instance size");
  double acc = 0.0;
  std::vector<int> lits;
  for (const Clause& c : inst.clauses) {
    const Predicate& p = inst.model.lambda.entries[c.predicate_index].first;
    lits.resize(p.arity);
    for (int j = 0; j < p.arity; ++j) lits[j] = c.signs[j] * sigma[c.indices[j]];
    acc += c.multiplicity * p.eval(lits);
  }
  return acc / inst.model.alpha;
}

SpinGlassInstance sample_spin_glass(const MixturePolynomial& xi, int n, std::uint64_t seed,
                                    long budget_entries) {
  if (n < 1) throw std::invalid_argument("spin glass needs at least one site");
  if (xi.is_zero()) throw std::invalid_argument("mixture polynomial must be nonzero");
  const long entries = dense_entries(xi, n);
  if (entries < 0 || entries > budget_entries)
    throw ResourceLimitError("disorder for n=" + std::to_string(n) +
                             " exceeds the materialization budget");
  SpinGlassInstance inst;
  inst.xi = xi;
  inst.n = n;
  inst.seed = seed;
  for (int p = 1; p <= xi.max_degree; ++p) {
    if (xi.coefficient(p) <= 0.0) continue;
    long count = 1;
    for (int q = 0; q < p; ++q) count *= n;
    SplitMix64 rng(derive_seed(seed, {kDegreeStream, static_cast<std::uint64_t>(p)}));
    std::vector<double> j(count);
    for (double& v : j) v = rng.next_normal();
    inst.degrees.push_back(p);
    inst.disorder.push_back(std::move(j));
  }
  return inst;
}

double sg_energy(const SpinGlassInstance& inst, std::span<const int> sigma) {
  if (static_cast<int>(sigma.size()) != inst.n)
    throw std::invalid_argument("assignment length does not match instance size");
  double acc = 0.0;
  for (std::size_t d = 0; d < inst.degrees.size(); ++d) {
    const int p = inst.degrees[d];
    const double cp = std::sqrt(inst.xi.coefficient(p));
    const double norm = std::pow(static_cast<double>(inst.n), -(p - 1) / 2.0);
    acc += cp * norm * contract(inst.disorder[d].data(), p, inst.n, sigma, 1.0);
  }
  return inst.scale * acc;
}

CoupledSpec::CoupledSpec(std::vector<std::vector<int>> matrix, std::vector<double> scales)
    : a(std::move(matrix)), b(std::move(scales)) {
  if (a.empty() || b.empty()) throw std::invalid_argument("coupled spec must be nonempty");
  for (const auto& row : a) {
    if (row.size() != b.size())
      throw std::invalid_argument("coupling matrix width must match |b|");
    for (int v : row)
      if (v != 0 && v != 1) throw std::invalid_argument("coupling matrix entries must be 0/1");
  }
  for (double v : b)
    if (!(v >= 0.0)) throw std::invalid_argument("coupling scales must be nonnegative");
  for (std::size_t i = 0; i < a.size(); ++i) {
    double dot = 0.0;
    for (std::size_t j = 0; j < b.size(); ++j) dot += a[i][j] * b[j];
    if (std::abs(dot - 1.0) > 1e-9)
      throw std::invalid_argument("coupled spec requires (Ab)_i = 1 for every observed row");
  }
}

std::vector<CspInstance> sample_coupled_csp(const CoupledSpec& spec, const CspModel& base,
                                            std::uint64_t seed) {
  // hidden instance i' at density b_{i'}·α, Poisson counts
  std::vector<std::vector<Clause>> hidden(spec.hidden());
  for (int h = 0; h < spec.hidden(); ++h)
    hidden[h] = sample_clause_block(base, spec.b[h] * base.alpha * base.n, CountMode::Poisson,
                                    derive_seed(seed, {kHiddenStream, static_cast<std::uint64_t>(h)}));
  std::vector<CspInstance> observed;
  observed.reserve(spec.observed());
  for (int i = 0; i < spec.observed(); ++i) {
    CspInstance inst{base, {}, seed};
    for (int h = 0; h < spec.hidden(); ++h)
      if (spec.a[i][h])
        inst.clauses.insert(inst.clauses.end(), hidden[h].begin(), hidden[h].end());
    observed.push_back(std::move(inst));
  }
  return observed;
}

double CoupledSpinGlass::observed_energy(int i, std::span<const int> sigma) const {
  double acc = 0.0;
  for (int h = 0; h < spec.hidden(); ++h)
    if (spec.a[i][h]) acc += sg_energy(hidden[h], sigma);
  return acc;
}

CoupledSpinGlass sample_coupled_spin_glass(const CoupledSpec& spec, const MixturePolynomial& xi,
                                           int n, std::uint64_t seed, long budget_entries) {
  CoupledSpinGlass out{spec, {}, n};
  for (int h = 0; h < spec.hidden(); ++h) {
    SpinGlassInstance inst = sample_spin_glass(
        xi, n, derive_seed(seed, {kHiddenStream, static_cast<std::uint64_t>(h)}), budget_entries);
    // variance scaling: component covariance is b_{i'}·n·ξ(R)
    inst.scale = std::sqrt(spec.b[h]);
    out.hidden.push_back(std::move(inst));
  }
  return out;
}

std::pair<CspInstance, CspInstance> t_correlated_pair(const CspModel& model, double t,
                                                      std::uint64_t seed) {
  if (model.mode != CountMode::Poisson)
    throw std::invalid_argument("t-correlated pairs are defined for the Poisson count mode");
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("correlation t must lie in [0, 1]");
  const double mean = model.alpha * static_cast<double>(model.n);
  std::vector<Clause> shared =
      sample_clause_block(model, t * mean, CountMode::Poisson, derive_seed(seed, {kSharedStream}));
  CspInstance first{model, shared, seed};
  CspInstance second{model, std::move(shared), seed};
  std::vector<Clause> own1 = sample_clause_block(model, (1.0 - t) * mean, CountMode::Poisson,
                                                 derive_seed(seed, {kHiddenStream, 1}));
  std::vector<Clause> own2 = sample_clause_block(model, (1.0 - t) * mean, CountMode::Poisson,
                                                 derive_seed(seed, {kHiddenStream, 2}));
  first.clauses.insert(first.clauses.end(), own1.begin(), own1.end());
  second.clauses.insert(second.clauses.end(), own2.begin(), own2.end());
  return {std::move(first), std::move(second)};
}

TreeEnsembleSpec::TreeEnsembleSpec(std::vector<int> k, std::vector<double> p)
    : branching(std::move(k)), coupling(std::move(p)) {
  if (branching.empty()) throw std::invalid_argument("tree ensemble needs depth at least 1");
  for (int b : branching)
    if (b < 1) throw std::invalid_argument("branching factors must be positive");
  if (coupling.size() != branching.size() + 1)
    throw std::invalid_argument("coupling vector must have length depth+1");
  if (coupling.front() != 0.0 || coupling.back() != 1.0)
    throw std::invalid_argument("coupling vector must run from 0 to 1");
  for (std::size_t i = 1; i < coupling.size(); ++i)
    if (coupling[i] < coupling[i - 1])
      throw std::invalid_argument("coupling vector must be non-decreasing");
  if (leaf_count() > 4096) throw ResourceLimitError("tree ensemble leaf count above desk scale");
}

long TreeEnsembleSpec::leaf_count() const {
  long total = 1;
  for (int b : branching) total *= b;
  return total;
}

int TreeEnsembleSpec::lca_depth(long leaf_u, long leaf_v) const {
  // leaves in mixed-radix order: digit d is the child index at depth d+1
  const int d_max = depth();
  std::vector<long> digits_u(d_max), digits_v(d_max);
  long u = leaf_u, v = leaf_v;
  for (int d = d_max - 1; d >= 0; --d) {
    digits_u[d] = u % branching[d];
    digits_v[d] = v % branching[d];
    u /= branching[d];
    v /= branching[d];
  }
  int depth_lca = 0;
  while (depth_lca < d_max && digits_u[depth_lca] == digits_v[depth_lca]) ++depth_lca;
  return depth_lca;
}

namespace {

// visit the non-root nodes level by level; calls f(node_index, depth, leaf_range)
template <typename F>
void walk_tree(const TreeEnsembleSpec& spec, F&& f) {
  const int d_max = spec.depth();
  long leaves = spec.leaf_count();
  long nodes_at_depth = 1;
  long node_index = 0;
  long leaves_per_node = leaves;
  for (int d = 1; d <= d_max; ++d) {
    nodes_at_depth *= spec.branching[d - 1];
    leaves_per_node /= spec.branching[d - 1];
    for (long i = 0; i < nodes_at_depth; ++i, ++node_index)
      f(node_index, d, i * leaves_per_node, (i + 1) * leaves_per_node);
  }
}

}  // namespace

TreeCspEnsemble tree_ensemble_csp(const TreeEnsembleSpec& spec, const CspModel& base,
                                  std::uint64_t seed) {
  TreeCspEnsemble out{spec, {}};
  out.leaves.assign(spec.leaf_count(), CspInstance{base, {}, seed});
  walk_tree(spec, [&](long node, int depth, long leaf_lo, long leaf_hi) {
    const double scale = spec.coupling[depth] - spec.coupling[depth - 1];
    std::vector<Clause> block =
        sample_clause_block(base, scale * base.alpha * base.n, CountMode::Poisson,
                            derive_seed(seed, {kNodeStream, static_cast<std::uint64_t>(node)}));
    for (long l = leaf_lo; l < leaf_hi; ++l)
      out.leaves[l].clauses.insert(out.leaves[l].clauses.end(), block.begin(), block.end());
  });
  return out;
}

double TreeSpinGlassEnsemble::leaf_energy(long leaf, std::span<const int> sigma) const {
  double acc = 0.0;
  for (int c : leaf_components[leaf]) acc += sg_energy(components[c], sigma);
  return acc;
}

TreeSpinGlassEnsemble tree_ensemble_spin_glass(const TreeEnsembleSpec& spec,
                                               const MixturePolynomial& xi, int n,
                                               std::uint64_t seed, long budget_entries) {
  TreeSpinGlassEnsemble out{spec, n, {}, {}};
  out.leaf_components.assign(spec.leaf_count(), {});
  walk_tree(spec, [&](long node, int depth, long leaf_lo, long leaf_hi) {
    const double scale = spec.coupling[depth] - spec.coupling[depth - 1];
    SpinGlassInstance inst = sample_spin_glass(
        xi, n, derive_seed(seed, {kNodeStream, static_cast<std::uint64_t>(node)}), budget_entries);
    inst.scale = std::sqrt(scale);  // variance scale p_d − p_{d−1}
    const int id = static_cast<int>(out.components.size());
    out.components.push_back(std::move(inst));
    for (long l = leaf_lo; l < leaf_hi; ++l) out.leaf_components[l].push_back(id);
  });
  return out;
}

}  // namespace cspglass
