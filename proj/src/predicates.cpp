#include "cspglass/predicates.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace cspglass {

namespace {

constexpr int kMaxArity = 16;  // 2^k truth table, keep desk scale

void check_arity(int k, int min_k) {
  if (k < min_k || k > kMaxArity)
    throw std::invalid_argument("predicate arity " + std::to_string(k) +
                                " outside supported range [" + std::to_string(min_k) + ", " +
                                std::to_string(kMaxArity) + "]");
}

}  // namespace

Predicate::Predicate(int k, std::vector<double> values, std::string label)
    : arity(k), table(std::move(values)), name(std::move(label)) {
  check_arity(k, 1);
  if (table.size() != (std::size_t{1} << k))
    throw std::invalid_argument("truth table for arity " + std::to_string(k) + " must have " +
                                std::to_string(std::size_t{1} << k) + " entries, got " +
                                std::to_string(table.size()));
  for (double v : table)
    if (!(v >= -1.0 && v <= 1.0))
      throw std::invalid_argument("truth table entries must lie in [-1, 1]");
}

int Predicate::index_of(std::span<const int> spins) const {
  if (static_cast<int>(spins.size()) != arity)
    throw std::invalid_argument("assignment length " + std::to_string(spins.size()) +
                                " does not match predicate arity " + std::to_string(arity));
  int idx = 0;
  for (int i = 0; i < arity; ++i) {
    idx <<= 1;
    if (spins[i] < 0) idx |= 1;
  }
  return idx;
}

double Predicate::eval(std::span<const int> spins) const { return table[index_of(spins)]; }

double eval_predicate(const Predicate& p, std::span<const int> spins) { return p.eval(spins); }

PredicateDistribution::PredicateDistribution(std::vector<std::pair<Predicate, double>> e)
    : entries(std::move(e)) {
  if (entries.empty()) throw std::invalid_argument("predicate distribution must be nonempty");
  double total = 0.0;
  int kmax = 0;
  for (auto& [p, w] : entries) {
    if (w < 0.0) throw std::invalid_argument("predicate weights must be nonnegative");
    total += w;
    kmax = std::max(kmax, p.arity);
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("predicate weights must sum to 1");
  for (auto& [p, w] : entries)
    if (p.arity < kmax) p = pad_predicate(p, kmax);
}

PredicateDistribution::PredicateDistribution(Predicate p) {
  entries.emplace_back(std::move(p), 1.0);
}

double FourierSpectrum::level_weight(int level) const {
  double w = 0.0;
  for (std::uint32_t mask = 0; mask < coefficients.size(); ++mask)
    if (std::popcount(mask) == level) w += coefficients[mask] * coefficients[mask];
  return w;
}

std::vector<double> FourierSpectrum::to_table() const {
  // the transform is an involution up to the 1/2^k averaging
  std::vector<double> t = coefficients;
  const std::size_t size = t.size();
  for (std::size_t h = 1; h < size; h <<= 1) {
    for (std::size_t i = 0; i < size; i += h << 1) {
      for (std::size_t j = i; j < i + h; ++j) {
        double a = t[j], b = t[j + h];
        t[j] = a + b;
        t[j + h] = a - b;
      }
    }
  }
  return t;
}

std::uint32_t subset_mask(int k, std::initializer_list<int> variables) {
  std::uint32_t mask = 0;
  for (int v : variables) {
    if (v < 1 || v > k) throw std::invalid_argument("subset variable out of range");
    mask |= std::uint32_t{1} << (k - v);
  }
  return mask;
}

MixturePolynomial::MixturePolynomial(std::vector<double> level_weights, double mean)
    : max_degree(static_cast<int>(level_weights.size())),
      weights(std::move(level_weights)),
      mean_term(mean) {
  for (double w : weights)
    if (w < -1e-15) throw std::invalid_argument("mixture coefficients c_p^2 must be nonnegative");
  for (double& w : weights) w = std::max(w, 0.0);
  while (!weights.empty() && weights.back() == 0.0) {
    weights.pop_back();
    --max_degree;
  }
}

double MixturePolynomial::operator()(double s) const {
  double acc = 0.0;
  for (int p = max_degree; p >= 1; --p) acc = acc * s + weights[p - 1];
  return acc * s;
}

double MixturePolynomial::derivative(double s) const {
  double acc = 0.0;
  for (int p = max_degree; p >= 1; --p) acc = acc * s + p * weights[p - 1];
  return acc;
}

double MixturePolynomial::second_derivative(double s) const {
  double acc = 0.0;
  for (int p = max_degree; p >= 2; --p) acc = acc * s + p * (p - 1) * weights[p - 1];
  return acc;
}

double MixturePolynomial::variance() const { return (*this)(1.0); }

double MixturePolynomial::coefficient(int degree) const {
  if (degree < 1 || degree > max_degree) return 0.0;
  return weights[degree - 1];
}

bool MixturePolynomial::is_zero() const {
  for (double w : weights)
    if (w > 0.0) return false;
  return true;
}

MixturePolynomial MixturePolynomial::monomial(int degree, double c2) {
  std::vector<double> w(degree, 0.0);
  w[degree - 1] = c2;
  return MixturePolynomial(std::move(w), 0.0);
}

FourierSpectrum walsh_transform(const Predicate& p) {
  FourierSpectrum s;
  s.arity = p.arity;
  s.coefficients = p.table;
  const std::size_t size = s.coefficients.size();
  for (std::size_t h = 1; h < size; h <<= 1) {
    for (std::size_t i = 0; i < size; i += h << 1) {
      for (std::size_t j = i; j < i + h; ++j) {
        double a = s.coefficients[j], b = s.coefficients[j + h];
        s.coefficients[j] = a + b;
        s.coefficients[j + h] = a - b;
      }
    }
  }
  const double inv = 1.0 / static_cast<double>(size);
  for (double& c : s.coefficients) c *= inv;
  return s;
}

double noise_stability(const FourierSpectrum& s, double rho) {
  if (!(rho >= -1.0 && rho <= 1.0))
    throw std::invalid_argument("noise parameter must lie in [-1, 1]");
  // sum by level so rho = 0 cleanly keeps only the empty set
  std::vector<double> level(s.arity + 1, 0.0);
  for (std::uint32_t mask = 0; mask < s.coefficients.size(); ++mask)
    level[std::popcount(mask)] += s.coefficients[mask] * s.coefficients[mask];
  double acc = 0.0;
  for (int j = s.arity; j >= 1; --j) acc = (acc + level[j]) * rho;
  return acc + level[0];
}

MixturePolynomial mixture_of(const Predicate& p) {
  FourierSpectrum s = walsh_transform(p);
  std::vector<double> w(p.arity, 0.0);
  for (std::uint32_t mask = 1; mask < s.coefficients.size(); ++mask)
    w[std::popcount(mask) - 1] += s.coefficients[mask] * s.coefficients[mask];
  return MixturePolynomial(std::move(w), s.mean());
}

MixturePolynomial mixture_of_distribution(const PredicateDistribution& lambda) {
  const int k = lambda.arity();
  std::vector<double> w(k, 0.0);
  double mean = 0.0, mean_sq = 0.0;
  for (const auto& [p, weight] : lambda.entries) {
    MixturePolynomial m = mixture_of(p);
    for (int d = 1; d <= m.max_degree; ++d) w[d - 1] += weight * m.coefficient(d);
    mean += weight * m.mean_term;
    mean_sq += weight * m.mean_term * m.mean_term;
  }
  MixturePolynomial out(std::move(w), mean);
  out.mean_varies = (mean_sq - mean * mean) > 1e-15;
  return out;
}

Predicate builtin_predicate(PredicateFamily family, int k) {
  check_arity(k, family == PredicateFamily::kNae ? 2 : 1);
  const std::size_t size = std::size_t{1} << k;
  std::vector<double> t(size, 0.0);
  // index bits count the -1 spins; a set bit is a false (un-negated) literal
  for (std::size_t idx = 0; idx < size; ++idx) {
    int falses = std::popcount(idx);
    int trues = k - falses;
    bool sat = false;
    switch (family) {
      case PredicateFamily::kXor: sat = (falses % 2) == 1; break;  // spin product -1
      case PredicateFamily::kSat: sat = trues >= 1; break;
      case PredicateFamily::kNae: sat = trues != 0 && falses != 0; break;
      case PredicateFamily::OneInK: sat = trues == 1; break;
    }
    t[idx] = sat ? 1.0 : 0.0;
  }
  return Predicate(k, std::move(t), family_name(family) + std::to_string(k));
}

std::optional<PredicateFamily> family_from_string(std::string_view name) {
  if (name == "kXOR" || name == "xor") return PredicateFamily::kXor;
  if (name == "kSAT" || name == "sat") return PredicateFamily::kSat;
  if (name == "kNAE" || name == "nae") return PredicateFamily::kNae;
  if (name == "oneInK" || name == "1inK" || name == "one-in-k") return PredicateFamily::OneInK;
  return std::nullopt;
}

std::string family_name(PredicateFamily family) {
  switch (family) {
    case PredicateFamily::kXor: return "kXOR";
    case PredicateFamily::kSat: return "kSAT";
    case PredicateFamily::kNae: return "kNAE";
    case PredicateFamily::OneInK: return "oneInK";
  }
  return "?";
}

Predicate pad_predicate(const Predicate& p, int k) {
  check_arity(k, p.arity);
  if (k == p.arity) return p;
  // the padded variables are the low-order index bits: replicate each entry
  const std::size_t copies = std::size_t{1} << (k - p.arity);
  std::vector<double> t;
  t.reserve(p.table.size() * copies);
  for (double v : p.table)
    for (std::size_t c = 0; c < copies; ++c) t.push_back(v);
  return Predicate(k, std::move(t), p.name);
}

}  // namespace cspglass
