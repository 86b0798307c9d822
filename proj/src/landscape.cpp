#include "cspglass/landscape.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "cspglass/rng.hpp"

namespace cspglass {

namespace {

double raw_contract(const double* j, int p, int n, const Spins& sigma, double partial) {
  if (p == 1) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += j[i] * sigma[i];
    return acc * partial;
  }
  double acc = 0.0;
  long stride = 1;
  for (int q = 1; q < p; ++q) stride *= n;
  for (int i = 0; i < n; ++i) acc += raw_contract(j + i * stride, p - 1, n, sigma, sigma[i]);
  return acc * partial;
}

// Incremental energy of one oracle slot under single-site flips. CSP clauses
// keep their current truth-table index (flip = XOR with the occurrence bits),
// degree-2 disorder keeps local fields, higher degrees recompute.
class SlotEvaluator {
 public:
  SlotEvaluator(const EnergyOracle& oracle, int slot) : n_(oracle.n()) {
    for (const auto& comp : oracle.csp_components()[slot]) {
      const CspInstance& inst = *comp.instance;
      for (const Clause& cl : inst.clauses) {
        const Predicate& p = inst.model.lambda.entries[cl.predicate_index].first;
        ClauseRef ref;
        ref.table = p.table.data();
        ref.weight = comp.weight * cl.multiplicity / inst.model.alpha;
        ref.arity = p.arity;
        const int id = static_cast<int>(clauses_.size());
        std::map<int, std::uint32_t> toggles;
        for (int j = 0; j < p.arity; ++j)
          toggles[cl.indices[j]] |= std::uint32_t{1} << (p.arity - 1 - j);
        for (auto& [site, mask] : toggles) adjacency_[site].push_back({id, mask});
        ref.sign_mask = 0;
        for (int j = 0; j < p.arity; ++j)
          if (cl.signs[j] < 0) ref.sign_mask |= std::uint32_t{1} << (p.arity - 1 - j);
        ref.sites = cl.indices;
        clauses_.push_back(std::move(ref));
      }
    }
    for (const auto& comp : oracle.sg_components()[slot]) {
      const SpinGlassInstance& g = *comp.instance;
      for (std::size_t d = 0; d < g.degrees.size(); ++d) {
        SgPart part;
        part.degree = g.degrees[d];
        part.data = g.disorder[d].data();
        part.coeff = comp.weight * g.scale * std::sqrt(g.xi.coefficient(part.degree)) *
                     std::pow(static_cast<double>(n_), -(part.degree - 1) / 2.0);
        sg_parts_.push_back(std::move(part));
      }
    }
  }

  int n() const { return n_; }
  const Spins& state() const { return sigma_; }
  double energy() const { return energy_; }

  void reset(const Spins& sigma) {
    sigma_ = sigma;
    energy_ = 0.0;
    for (ClauseRef& c : clauses_) {
      std::uint32_t idx = c.sign_mask;  // literal ε_j σ_{i_j}: bit set = literal −1
      for (int j = 0; j < c.arity; ++j)
        if (sigma_[c.sites[j]] < 0) idx ^= std::uint32_t{1} << (c.arity - 1 - j);
      c.current = idx;
      energy_ += c.weight * c.table[idx];
    }
    for (SgPart& p : sg_parts_) {
      if (p.degree == 2) {
        p.fields.assign(n_, 0.0);
        for (int i = 0; i < n_; ++i)
          for (int v = 0; v < n_; ++v)
            p.fields[v] += (p.data[i * n_ + v] + p.data[v * n_ + i]) * sigma_[i];
        double e = 0.0;
        for (int v = 0; v < n_; ++v) e += p.fields[v] * sigma_[v];
        p.cached = 0.5 * e;
      } else {
        p.cached = raw_contract(p.data, p.degree, n_, sigma_, 1.0);
      }
      energy_ += p.coeff * p.cached;
    }
  }

  double delta(int site) {
    double d = 0.0;
    for (const auto& [id, mask] : adjacency_[site]) {
      const ClauseRef& c = clauses_[id];
      d += c.weight * (c.table[c.current ^ mask] - c.table[c.current]);
    }
    for (SgPart& p : sg_parts_) {
      if (p.degree == 1) {
        d += p.coeff * (-2.0 * sigma_[site]) * p.data[site];
      } else if (p.degree == 2) {
        const double self = p.data[site * n_ + site];
        d += p.coeff * (-2.0 * sigma_[site]) * (p.fields[site] - 2.0 * self * sigma_[site]);
      } else {
        sigma_[site] = -sigma_[site];
        const double flipped = raw_contract(p.data, p.degree, n_, sigma_, 1.0);
        sigma_[site] = -sigma_[site];
        d += p.coeff * (flipped - p.cached);
      }
    }
    return d;
  }

  void flip(int site) {
    energy_ += delta(site);
    for (const auto& [id, mask] : adjacency_[site]) clauses_[id].current ^= mask;
    const int old = sigma_[site];
    sigma_[site] = -old;
    for (SgPart& p : sg_parts_) {
      if (p.degree == 2) {
        const double step = 2.0 * sigma_[site];
        for (int v = 0; v < n_; ++v) p.fields[v] += (p.data[site * n_ + v] + p.data[v * n_ + site]) * step;
        double e = 0.0;
        for (int v = 0; v < n_; ++v) e += p.fields[v] * sigma_[v];
        p.cached = 0.5 * e;
      } else if (p.degree >= 3) {
        p.cached = raw_contract(p.data, p.degree, n_, sigma_, 1.0);
      }
    }
  }

 private:
  struct ClauseRef {
    const double* table = nullptr;
    double weight = 0.0;
    int arity = 0;
    std::uint32_t sign_mask = 0;
    std::uint32_t current = 0;
    std::vector<int> sites;
  };
  struct SgPart {
    const double* data = nullptr;
    double coeff = 0.0;
    int degree = 0;
    double cached = 0.0;
    std::vector<double> fields;  // degree 2 only
  };

  int n_;
  Spins sigma_;
  double energy_ = 0.0;
  std::vector<ClauseRef> clauses_;
  std::vector<std::vector<std::pair<int, std::uint32_t>>> adjacency_ =
      std::vector<std::vector<std::pair<int, std::uint32_t>>>(n_);
  std::vector<SgPart> sg_parts_;
};

// visit every state of one slot in Gray order: visitor(state_mask, energy);
// state bit v set means σ_v = −1
template <typename V>
void gray_scan(SlotEvaluator& ev, V&& visit) {
  const int n = ev.n();
  Spins sigma(n, +1);
  ev.reset(sigma);
  std::uint32_t mask = 0;
  visit(mask, ev.energy());
  const std::uint64_t states = std::uint64_t{1} << n;
  for (std::uint64_t i = 1; i < states; ++i) {
    const int site = std::countr_zero(i);
    ev.flip(site);
    mask ^= std::uint32_t{1} << site;
    visit(mask, ev.energy());
  }
}

Spins mask_to_spins(std::uint32_t mask, int n) {
  Spins s(n);
  for (int v = 0; v < n; ++v) s[v] = (mask >> v) & 1 ? -1 : +1;
  return s;
}

void check_enumeration_size(const EnergyOracle& oracle) {
  if (oracle.slots() * oracle.n() > kMaxEnumerationBits)
    throw ResourceLimitError("enumeration guard: ℓ·n must not exceed " +
                             std::to_string(kMaxEnumerationBits));
}

bool region_admits(const OverlapRegion& region, const std::vector<std::uint32_t>& masks, int n) {
  for (const auto& [subset, interval] : region.constraints) {
    std::uint32_t x = 0;
    std::uint32_t rest = subset;
    while (rest) {
      const int i = std::countr_zero(rest);
      rest &= rest - 1;
      x ^= masks[i];
    }
    const double r = (n - 2.0 * std::popcount(x)) / n;
    if (!(r > interval.lo && r < interval.hi)) return false;
  }
  return true;
}

// enumerate all tuples, optionally filtered by an overlap region:
// visitor(masks, grand_energy)
template <typename V>
void enumerate_tuples(const EnergyOracle& oracle, const OverlapRegion* region, V&& visit) {
  check_enumeration_size(oracle);
  const int n = oracle.n();
  const int ell = oracle.slots();
  if (region && region->ell != ell)
    throw std::invalid_argument("overlap region tuple size does not match the oracle");

  if (ell == 1) {
    SlotEvaluator ev(oracle, 0);
    std::vector<std::uint32_t> masks(1);
    gray_scan(ev, [&](std::uint32_t mask, double e) {
      masks[0] = mask;
      if (!region || region_admits(*region, masks, n)) visit(masks, e);
    });
    return;
  }

  const std::uint64_t states = std::uint64_t{1} << n;
  std::vector<std::vector<double>> tables(ell);
  for (int s = 0; s < ell; ++s) {
    tables[s].resize(states);
    SlotEvaluator ev(oracle, s);
    gray_scan(ev, [&](std::uint32_t mask, double e) { tables[s][mask] = e; });
  }

  std::vector<std::uint32_t> masks(ell, 0);
  std::vector<double> partial(ell + 1, 0.0);
  // odometer over slot states
  int depth = 0;
  while (true) {
    if (depth == ell) {
      if (!region || region_admits(*region, masks, n)) visit(masks, partial[ell]);
      --depth;
      ++masks[depth];
      continue;
    }
    if (masks[depth] == states) {
      masks[depth] = 0;
      if (depth == 0) break;
      --depth;
      ++masks[depth];
      continue;
    }
    partial[depth + 1] = partial[depth] + tables[depth][masks[depth]];
    ++depth;
  }
}

}  // namespace

double overlap(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size() || a.empty())
    throw std::invalid_argument("overlap requires two assignments of equal positive length");
  long dot = 0;
  for (std::size_t j = 0; j < a.size(); ++j) dot += a[j] * b[j];
  return static_cast<double>(dot) / static_cast<double>(a.size());
}

OverlapVector overlap_vector(const std::vector<Spins>& sigmas) {
  const int ell = static_cast<int>(sigmas.size());
  if (ell < 1) throw std::invalid_argument("overlap vector needs at least one assignment");
  if (ell > kMaxOverlapTuple)
    throw std::invalid_argument("overlap vector limited to tuples of size " +
                                std::to_string(kMaxOverlapTuple));
  const std::size_t n = sigmas.front().size();
  if (n == 0) throw std::invalid_argument("assignments must be nonempty");
  for (const Spins& s : sigmas)
    if (s.size() != n) throw std::invalid_argument("assignments must have equal length");

  OverlapVector q;
  q.ell = ell;
  q.entries.assign(std::size_t{1} << ell, 0.0);
  std::vector<double> prod(std::size_t{1} << ell);
  for (std::size_t j = 0; j < n; ++j) {
    prod[0] = 1.0;
    for (std::uint32_t mask = 1; mask < prod.size(); ++mask) {
      const int low = std::countr_zero(mask);
      prod[mask] = prod[mask & (mask - 1)] * sigmas[low][j];
    }
    for (std::uint32_t mask = 1; mask < prod.size(); ++mask) q.entries[mask] += prod[mask];
  }
  for (double& e : q.entries) e /= static_cast<double>(n);
  q.entries[0] = 0.0;
  return q;
}

bool OverlapRegion::contains(const OverlapVector& q) const {
  if (q.ell != ell) throw std::invalid_argument("overlap vector size does not match region");
  for (const auto& [mask, interval] : constraints) {
    const double r = q.at(mask);
    if (!(r > interval.lo && r < interval.hi)) return false;
  }
  return true;
}

OverlapRegion OverlapRegion::pair_gap(double s, double t) {
  if (!(s < t) || s < -1.0 || t > 1.0)
    throw std::invalid_argument("pair gap requires -1 <= s < t <= 1");
  OverlapRegion region;
  region.ell = 2;
  region.constraints[0b11] = {s, t};
  return region;
}

OverlapRegion OverlapRegion::branching(const TreeEnsembleSpec& spec, const std::vector<double>& q,
                                       double eta) {
  const int d_max = spec.depth();
  if (static_cast<int>(q.size()) != d_max + 1)
    throw std::invalid_argument("branching region needs q of length depth+1");
  for (int d = 1; d <= d_max; ++d)
    if (!(q[d] > q[d - 1])) throw std::invalid_argument("q must be strictly increasing");
  if (!(q[0] >= 0.0) || q[d_max] != 1.0)
    throw std::invalid_argument("q must satisfy 0 <= q_0 < ... < q_D = 1");
  if (!(eta > 0.0)) throw std::invalid_argument("gap eta must be positive");
  const long leaves = spec.leaf_count();
  if (leaves > kMaxOverlapTuple)
    throw std::invalid_argument("branching region limited to " +
                                std::to_string(kMaxOverlapTuple) + " leaves");
  OverlapRegion region;
  region.ell = static_cast<int>(leaves);
  for (long u = 0; u < leaves; ++u)
    for (long v = u + 1; v < leaves; ++v) {
      const double target = q[spec.lca_depth(u, v)];
      const std::uint32_t mask = (std::uint32_t{1} << u) | (std::uint32_t{1} << v);
      region.constraints[mask] = {std::max(target - eta, -1.0 - 1e-12),
                                  std::min(target + eta, 1.0 + 1e-12)};
    }
  return region;
}

EnergyOracle::EnergyOracle(int n, int slots) : n_(n), slots_(slots) {
  if (n < 1) throw std::invalid_argument("oracle needs at least one variable");
  if (slots < 1) throw std::invalid_argument("oracle needs at least one slot");
  csp_.resize(slots);
  sg_.resize(slots);
}

void EnergyOracle::add(const CspInstance& inst, int slot, double weight) {
  if (inst.n() != n_) throw std::invalid_argument("component size does not match oracle");
  if (slot < 0 || slot >= slots_) throw std::invalid_argument("slot out of range");
  csp_[slot].push_back({&inst, weight});
}

void EnergyOracle::add(const SpinGlassInstance& inst, int slot, double weight) {
  if (inst.n != n_) throw std::invalid_argument("component size does not match oracle");
  if (slot < 0 || slot >= slots_) throw std::invalid_argument("slot out of range");
  sg_[slot].push_back({&inst, weight});
}

EnergyOracle EnergyOracle::single(const CspInstance& inst) {
  EnergyOracle o(inst.n(), 1);
  o.add(inst, 0);
  return o;
}

EnergyOracle EnergyOracle::single(const SpinGlassInstance& inst) {
  EnergyOracle o(inst.n, 1);
  o.add(inst, 0);
  return o;
}

EnergyOracle EnergyOracle::pair(const CspInstance& a, const CspInstance& b) {
  EnergyOracle o(a.n(), 2);
  o.add(a, 0);
  o.add(b, 1);
  return o;
}

EnergyOracle EnergyOracle::zero(int n, int slots) { return EnergyOracle(n, slots); }

EnergyOracle EnergyOracle::tree_leaves(const TreeSpinGlassEnsemble& ens) {
  EnergyOracle o(ens.n, static_cast<int>(ens.leaf_components.size()));
  for (std::size_t leaf = 0; leaf < ens.leaf_components.size(); ++leaf)
    for (int c : ens.leaf_components[leaf]) o.add(ens.components[c], static_cast<int>(leaf));
  return o;
}

double EnergyOracle::slot_energy(int slot, std::span<const int> s) const {
  double acc = 0.0;
  for (const auto& comp : csp_[slot]) acc += comp.weight * csp_energy(*comp.instance, s);
  for (const auto& comp : sg_[slot]) acc += comp.weight * sg_energy(*comp.instance, s);
  return acc;
}

double EnergyOracle::energy(const std::vector<Spins>& x) const {
  if (static_cast<int>(x.size()) != slots_)
    throw std::invalid_argument("assignment tuple size does not match oracle slots");
  double acc = 0.0;
  for (int s = 0; s < slots_; ++s) acc += slot_energy(s, x[s]);
  return acc;
}

GibbsConfig::GibbsConfig(double b, int s, std::uint64_t sd) : beta(b), sweeps(s), seed(sd) {
  if (!(beta >= 0.0)) throw std::invalid_argument("inverse temperature must be nonnegative");
  if (sweeps < 0) throw std::invalid_argument("sweep count must be nonnegative");
}

RestrictedLogZ restricted_log_partition(const EnergyOracle& oracle, const GibbsConfig& gibbs,
                                        const OverlapRegion& region) {
  if (!(gibbs.beta > 0.0))
    throw std::invalid_argument("restricted free energy needs beta > 0");
  RestrictedLogZ out;
  double running_max = -std::numeric_limits<double>::infinity();
  double scaled_sum = 0.0;
  enumerate_tuples(oracle, &region, [&](const std::vector<std::uint32_t>&, double e) {
    const double w = gibbs.beta * e;
    if (out.states == 0 || w > running_max) {
      scaled_sum = scaled_sum * std::exp(running_max - w) + 1.0;
      running_max = w;
    } else {
      scaled_sum += std::exp(w - running_max);
    }
    ++out.states;
  });
  if (out.states == 0) {
    out.empty = true;
    out.log_z = -std::numeric_limits<double>::infinity();
  } else {
    out.log_z = running_max + std::log(scaled_sum);
  }
  return out;
}

MaxResult brute_force_max(const EnergyOracle& oracle, const std::optional<OverlapRegion>& region) {
  MaxResult out;
  double best = -std::numeric_limits<double>::infinity();
  std::vector<std::uint32_t> best_masks;
  long seen = 0;
  enumerate_tuples(oracle, region ? &*region : nullptr,
                   [&](const std::vector<std::uint32_t>& masks, double e) {
                     ++seen;
                     if (e > best) {
                       best = e;
                       best_masks = masks;
                     }
                   });
  if (seen == 0) {
    out.empty = true;
    return out;
  }
  out.value = best;
  for (std::uint32_t m : best_masks) out.argmax.push_back(mask_to_spins(m, oracle.n()));
  return out;
}

Spins gibbs_sample(const EnergyOracle& oracle, const GibbsConfig& gibbs) {
  if (oracle.slots() != 1)
    throw std::invalid_argument("the Metropolis chain runs on a single-slot oracle");
  SplitMix64 rng(gibbs.seed);
  const int n = oracle.n();
  Spins sigma(n);
  for (int v = 0; v < n; ++v) sigma[v] = rng.next_sign();
  SlotEvaluator ev(oracle, 0);
  ev.reset(sigma);
  for (int sweep = 0; sweep < gibbs.sweeps; ++sweep) {
    for (int site = 0; site < n; ++site) {
      const double d = ev.delta(site);
      if (d >= 0.0 || rng.next_double() < std::exp(gibbs.beta * d)) ev.flip(site);
    }
  }
  return ev.state();
}

Spins anneal_max(const EnergyOracle& oracle, const AnnealSchedule& schedule, std::uint64_t seed) {
  if (oracle.slots() != 1)
    throw std::invalid_argument("the annealer runs on a single-slot oracle");
  if (schedule.sweeps < 1 || !(schedule.beta_start > 0.0) ||
      !(schedule.beta_end >= schedule.beta_start))
    throw std::invalid_argument("annealing schedule must ramp a positive beta upward");
  SplitMix64 rng(seed);
  const int n = oracle.n();
  Spins sigma(n);
  for (int v = 0; v < n; ++v) sigma[v] = rng.next_sign();
  SlotEvaluator ev(oracle, 0);
  ev.reset(sigma);
  Spins best_state = ev.state();
  double best_energy = ev.energy();
  const double ratio = schedule.beta_end / schedule.beta_start;
  for (int sweep = 0; sweep < schedule.sweeps; ++sweep) {
    const double frac = schedule.sweeps > 1 ? static_cast<double>(sweep) / (schedule.sweeps - 1) : 1.0;
    const double beta = schedule.beta_start * std::pow(ratio, frac);
    for (int site = 0; site < n; ++site) {
      const double d = ev.delta(site);
      if (d >= 0.0 || rng.next_double() < std::exp(beta * d)) {
        ev.flip(site);
        if (ev.energy() > best_energy) {
          best_energy = ev.energy();
          best_state = ev.state();
        }
      }
    }
  }
  return best_state;
}

Spins debias_run(const CspAlgorithm& algorithm, const CspInstance& inst) {
  const int n = inst.n();
  if (n < 2) throw std::invalid_argument("debiasing needs at least two variables");
  const int extract = static_cast<int>(std::ceil(n / std::log(static_cast<double>(n))));
  if (static_cast<int>(inst.clauses.size()) < extract)
    throw std::invalid_argument("debiasing needs at least ceil(n/log n) = " +
                                std::to_string(extract) + " clauses");
  Spins c(n);
  for (int i = 0; i < n; ++i) c[i] = inst.clauses[i % extract].signs[0];

  CspInstance stripped{inst.model, {}, inst.seed};
  stripped.clauses.assign(inst.clauses.begin() + extract, inst.clauses.end());
  for (Clause& cl : stripped.clauses)
    for (std::size_t j = 0; j < cl.indices.size(); ++j) cl.signs[j] *= c[cl.indices[j]];

  Spins inner = algorithm(stripped);
  if (static_cast<int>(inner.size()) != n)
    throw std::invalid_argument("debiased algorithm returned a wrong-size assignment");
  Spins out(n);
  for (int i = 0; i < n; ++i) out[i] = c[i] * inner[i];
  return out;
}

CspAlgorithm make_debiased(CspAlgorithm algorithm) {
  return [alg = std::move(algorithm)](const CspInstance& inst) { return debias_run(alg, inst); };
}

CspAlgorithm make_annealer(const AnnealSchedule& schedule, std::uint64_t algo_seed) {
  return [schedule, algo_seed](const CspInstance& inst) {
    EnergyOracle oracle = EnergyOracle::single(inst);
    return anneal_max(oracle, schedule, algo_seed);
  };
}

CorrelationCurve chi_curve(const CspModel& model, const CspAlgorithm& algorithm,
                           const std::vector<double>& t_grid, int reps, std::uint64_t seed) {
  if (reps < 2) throw std::invalid_argument("chi estimation needs at least two replicates");
  CorrelationCurve curve;
  curve.replicates = reps;
  for (std::size_t ti = 0; ti < t_grid.size(); ++ti) {
    const double t = t_grid[ti];
    double sum = 0.0, sum_sq = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
      auto [first, second] = t_correlated_pair(
          model, t, derive_seed(seed, {ti, static_cast<std::uint64_t>(rep)}));
      const double r = overlap(algorithm(first), algorithm(second));
      sum += r;
      sum_sq += r * r;
    }
    const double mean = sum / reps;
    const double var = std::max(0.0, (sum_sq - reps * mean * mean) / (reps - 1));
    curve.t.push_back(t);
    curve.chi.push_back(mean);
    curve.stderr_chi.push_back(std::sqrt(var / reps));
  }
  return curve;
}

OgpScan ogp_scan(const EnergyOracle& oracle, const std::vector<double>& thresholds, int bins,
                 OgpMode mode) {
  if (oracle.slots() < 2) throw std::invalid_argument("an OGP scan needs at least two slots");
  if (bins < 1) throw std::invalid_argument("histogram needs at least one bin");
  check_enumeration_size(oracle);

  OgpScan scan;
  scan.bin_edges.resize(bins + 1);
  for (int i = 0; i <= bins; ++i) scan.bin_edges[i] = -1.0 + 2.0 * i / bins;
  for (double v : thresholds) scan.histograms.push_back({v, std::vector<long>(bins, 0), 0});

  const int n = oracle.n();
  const int ell = oracle.slots();
  const double denom_avg = static_cast<double>(ell) * n;
  const std::uint64_t states = std::uint64_t{1} << n;

  std::vector<std::vector<double>> tables(ell);
  for (int s = 0; s < ell; ++s) {
    tables[s].resize(states);
    SlotEvaluator ev(oracle, s);
    gray_scan(ev, [&](std::uint32_t mask, double e) { tables[s][mask] = e; });
  }

  std::vector<std::uint32_t> masks(ell, 0);
  std::vector<double> partial(ell + 1, 0.0);
  int depth = 0;
  while (true) {
    if (depth == static_cast<int>(ell)) {
      for (OgpHistogram& h : scan.histograms) {
        bool pass;
        if (mode == OgpMode::Average) {
          pass = partial[ell] / denom_avg >= h.threshold;
        } else {
          pass = true;
          for (int s = 0; s < ell && pass; ++s)
            if (tables[s][masks[s]] / n < h.threshold) pass = false;
        }
        if (!pass) continue;
        ++h.tuples;
        for (int i = 0; i < ell; ++i)
          for (int j = i + 1; j < ell; ++j) {
            const double r = (n - 2.0 * std::popcount(masks[i] ^ masks[j])) / n;
            int bin = static_cast<int>((r + 1.0) * 0.5 * bins);
            bin = std::min(std::max(bin, 0), bins - 1);
            ++h.counts[bin];
          }
      }
      --depth;
      ++masks[depth];
      continue;
    }
    if (masks[depth] == states) {
      masks[depth] = 0;
      if (depth == 0) break;
      --depth;
      ++masks[depth];
      continue;
    }
    partial[depth + 1] = partial[depth] + tables[depth][masks[depth]];
    ++depth;
  }
  return scan;
}

}  // namespace cspglass
