#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "cspglass/ensembles.hpp"
#include "cspglass/predicates.hpp"

namespace cspglass {

// R(σ₁,σ₂) = ⟨σ₁,σ₂⟩/n
double overlap(std::span<const int> a, std::span<const int> b);

// all I-overlaps of an ℓ-tuple: entry(I) = (1/n) Σ_j ∏_{i∈I} (σ_i)_j
struct OverlapVector {
  int ell = 0;
  std::vector<double> entries;  // indexed by subset mask over [ℓ]; entry 0 unused

  double at(std::uint32_t mask) const { return entries[mask]; }
};

inline constexpr int kMaxOverlapTuple = 12;  // 2^ℓ blowup guard

OverlapVector overlap_vector(const std::vector<Spins>& sigmas);

// open box constraints on I-overlaps; membership at endpoints is excluded
struct OverlapInterval {
  double lo = -2.0;
  double hi = 2.0;
};

struct OverlapRegion {
  int ell = 0;
  std::map<std::uint32_t, OverlapInterval> constraints;

  bool contains(const OverlapVector& q) const;

  static OverlapRegion full(int ell) { return {ell, {}}; }
  // ℓ=2 with R_{1,2} constrained to the open gap (s, t)
  static OverlapRegion pair_gap(double s, double t);
  // branching-OGP region: |R(σ_u, σ_v) − q_{lca(u,v)}| < eta for all leaf pairs
  static OverlapRegion branching(const TreeEnsembleSpec& spec, const std::vector<double>& q,
                                 double eta);
};

// Grand Hamiltonian over ℓ assignment slots: a sum of weighted CSP / spin
// glass components, each applied to one slot. Views the instances, does not
// own them.
class EnergyOracle {
 public:
  EnergyOracle(int n, int slots);

  void add(const CspInstance& inst, int slot, double weight = 1.0);
  void add(const SpinGlassInstance& inst, int slot, double weight = 1.0);

  static EnergyOracle single(const CspInstance& inst);
  static EnergyOracle single(const SpinGlassInstance& inst);
  static EnergyOracle pair(const CspInstance& a, const CspInstance& b);
  static EnergyOracle zero(int n, int slots);
  static EnergyOracle tree_leaves(const TreeSpinGlassEnsemble& ens);

  int n() const { return n_; }
  int slots() const { return slots_; }
  double energy(const std::vector<Spins>& x) const;           // grand energy
  double slot_energy(int slot, std::span<const int> s) const;

  struct CspComponent {
    const CspInstance* instance;
    double weight;
  };
  struct SgComponent {
    const SpinGlassInstance* instance;
    double weight;
  };
  const std::vector<std::vector<CspComponent>>& csp_components() const { return csp_; }
  const std::vector<std::vector<SgComponent>>& sg_components() const { return sg_; }

 private:
  int n_ = 0;
  int slots_ = 1;
  std::vector<std::vector<CspComponent>> csp_;  // per slot
  std::vector<std::vector<SgComponent>> sg_;
};

inline constexpr int kMaxEnumerationBits = 24;  // ℓ·n guard, ≈16M states

struct GibbsConfig {
  double beta = 1.0;
  int sweeps = 10;
  std::uint64_t seed = 0;

  GibbsConfig(double b, int s, std::uint64_t sd);
};

struct RestrictedLogZ {
  double log_z = 0.0;     // log Σ_{x ∈ U_n(S)} exp(β·energy(x))
  long states = 0;        // |U_n(S)| among enumerated tuples
  bool empty = false;     // sentinel: the region has no preimage at this n
};

RestrictedLogZ restricted_log_partition(const EnergyOracle& oracle, const GibbsConfig& gibbs,
                                        const OverlapRegion& region);

struct MaxResult {
  std::vector<Spins> argmax;
  double value = 0.0;
  bool empty = false;
};

// exact maximizer of the grand energy over the (optionally restricted) tuples
MaxResult brute_force_max(const EnergyOracle& oracle,
              const std::optional<OverlapRegion>& region = std::nullopt);

// single-site Metropolis chain over ±1^n for a one-slot oracle
Spins gibbs_sample(const EnergyOracle& oracle, const GibbsConfig& gibbs);

struct AnnealSchedule {
  double beta_start = 0.2;
  double beta_end = 4.0;
  int sweeps = 60;
};

// geometric β ramp, returns the best state seen; deterministic given the seed
Spins anneal_max(const EnergyOracle& oracle, const AnnealSchedule& schedule, std::uint64_t seed);

using CspAlgorithm = std::function<Spins(const CspInstance&)>;

// Debiasing wrapper: extract the sign vector C from the first ⌈n/ln n⌉
// clauses' first-literal signs (recycled cyclically to length n), run the
// algorithm on the remaining clauses with variable i's sign flipped by C_i,
// and return C ∘ σ'. Over the instance distribution the output mean is 0.
Spins debias_run(const CspAlgorithm& algorithm, const CspInstance& inst);
CspAlgorithm make_debiased(CspAlgorithm algorithm);

// the annealer as a deterministic instance → assignment map
CspAlgorithm make_annealer(const AnnealSchedule& schedule, std::uint64_t algo_seed);

struct CorrelationCurve {
  std::vector<double> t;
  std::vector<double> chi;
  std::vector<double> stderr_chi;
  int replicates = 0;
};

// χ(t) = E[R(A(I¹_t), A(I²_t))] estimated over `reps` t-correlated pairs
CorrelationCurve chi_curve(const CspModel& model, const CspAlgorithm& algorithm,
                           const std::vector<double>& t_grid, int reps, std::uint64_t seed);

enum class OgpMode { Average, Componentwise };

struct OgpHistogram {
  double threshold = 0.0;
  std::vector<long> counts;  // per overlap bin, pooled over slot pairs
  long tuples = 0;           // tuples above threshold
};

struct OgpScan {
  std::vector<double> bin_edges;  // bins partitioning [-1, 1]
  std::vector<OgpHistogram> histograms;
};

// Enumerates all tuples whose energy density clears each threshold
// ((1/ℓn)·grand for Average, every (1/n)·slot for Componentwise) and
// histograms their pairwise overlaps; an empty bin certifies a gap at this n.
OgpScan ogp_scan(const EnergyOracle& oracle, const std::vector<double>& thresholds, int bins,
                 OgpMode mode = OgpMode::Average);

}  // namespace cspglass
