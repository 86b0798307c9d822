#include "cspglass/io.hpp"

#include <fstream>

namespace cspglass {

Json predicate_to_json(const Predicate& p) {
  Json j;
  j["k"] = p.arity;
  j["table"] = p.table;
  if (!p.name.empty()) j["name"] = p.name;
  return j;
}

Predicate predicate_from_json(const Json& j) {
  if (j.contains("family")) {
    const std::string fam = j.at("family").get<std::string>();
    auto family = family_from_string(fam);
    if (!family) throw std::invalid_argument("unknown predicate family '" + fam + "'");
    return builtin_predicate(*family, j.at("k").get<int>());
  }
  const int k = j.at("k").get<int>();
  auto table = j.at("table").get<std::vector<double>>();
  if (table.size() != (std::size_t{1} << k))
    throw std::invalid_argument("table for k=" + std::to_string(k) + " must have " +
                                std::to_string(std::size_t{1} << k) + " entries, got " +
                                std::to_string(table.size()));
  std::string name = j.value("name", std::string{});
  return Predicate(k, std::move(table), std::move(name));
}

Predicate load_predicate_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open predicate file '" + path + "'");
  Json j = Json::parse(in);  // parse errors carry byte positions
  return predicate_from_json(j);
}

Json mixture_to_json(const MixturePolynomial& xi) {
  Json j;
  j["mean_term"] = xi.mean_term;
  Json coeffs = Json::object();
  for (int p = 1; p <= xi.max_degree; ++p)
    if (xi.coefficient(p) > 0.0) coeffs[std::to_string(p)] = xi.coefficient(p);
  j["c2"] = coeffs;
  j["variance"] = xi.variance();
  if (xi.mean_varies) j["mean_varies"] = true;
  return j;
}

Json spectrum_to_json(const FourierSpectrum& s) {
  Json j;
  j["k"] = s.arity;
  j["mean"] = s.mean();
  Json levels = Json::array();
  for (int level = 0; level <= s.arity; ++level) levels.push_back(s.level_weight(level));
  j["level_weights"] = levels;
  j["coefficients"] = s.coefficients;
  return j;
}

Json order_parameter_to_json(const OrderParameter& zeta) {
  Json j;
  j["breakpoints"] = zeta.breakpoints;
  j["values"] = zeta.values;
  j["class"] = zeta.zeta_class == ZetaClass::Monotone ? "U" : "L";
  return j;
}

namespace {

Json model_to_json(const CspModel& model) {
  Json j;
  Json preds = Json::array();
  for (const auto& [p, w] : model.lambda.entries) {
    Json e;
    e["predicate"] = predicate_to_json(p);
    e["weight"] = w;
    preds.push_back(e);
  }
  j["lambda"] = preds;
  j["alpha"] = model.alpha;
  j["n"] = model.n;
  j["mode"] = model.mode == CountMode::Exact ? "exact" : "poisson";
  return j;
}

CspModel model_from_json(const Json& j) {
  std::vector<std::pair<Predicate, double>> entries;
  for (const Json& e : j.at("lambda"))
    entries.emplace_back(predicate_from_json(e.at("predicate")), e.at("weight").get<double>());
  const std::string mode = j.at("mode").get<std::string>();
  return CspModel(PredicateDistribution(std::move(entries)), j.at("alpha").get<double>(),
                  j.at("n").get<int>(),
                  mode == "exact" ? CountMode::Exact : CountMode::Poisson);
}

}  // namespace

Json csp_instance_to_json(const CspInstance& inst) {
  Json j;
  j["model"] = model_to_json(inst.model);
  j["seed"] = inst.seed;
  Json clauses = Json::array();
  for (const Clause& c : inst.clauses) {
    Json e;
    e["p"] = c.predicate_index;
    e["idx"] = c.indices;
    e["sgn"] = c.signs;
    if (c.multiplicity != 1) e["mult"] = c.multiplicity;
    clauses.push_back(e);
  }
  j["clauses"] = clauses;
  return j;
}

CspInstance csp_instance_from_json(const Json& j) {
  CspInstance inst{model_from_json(j.at("model")), {}, j.value("seed", std::uint64_t{0})};
  for (const Json& e : j.at("clauses")) {
    Clause c;
    c.predicate_index = e.at("p").get<int>();
    c.indices = e.at("idx").get<std::vector<int>>();
    c.signs = e.at("sgn").get<std::vector<int>>();
    c.multiplicity = e.value("mult", 1);
    if (c.predicate_index < 0 ||
        c.predicate_index >= static_cast<int>(inst.model.lambda.entries.size()))
      throw std::invalid_argument("clause predicate index out of range");
    const Predicate& p = inst.model.lambda.entries[c.predicate_index].first;
    if (static_cast<int>(c.indices.size()) != p.arity ||
        static_cast<int>(c.signs.size()) != p.arity)
      throw std::invalid_argument("clause arity does not match its predicate");
    for (int v : c.indices)
      if (v < 0 || v >= inst.model.n) throw std::invalid_argument("clause index out of range");
    for (int s : c.signs)
      if (s != 1 && s != -1) throw std::invalid_argument("clause signs must be ±1");
    if (c.multiplicity < 1) throw std::invalid_argument("clause multiplicity must be positive");
    inst.clauses.push_back(std::move(c));
  }
  return inst;
}

Json spin_glass_record(const SpinGlassInstance& inst) {
  Json j;
  j["xi"] = mixture_to_json(inst.xi);
  j["n"] = inst.n;
  j["seed"] = inst.seed;
  if (inst.scale != 1.0) j["scale"] = inst.scale;
  return j;
}

SpinGlassInstance spin_glass_from_record(const Json& j, long budget_entries) {
  const Json& xij = j.at("xi");
  int max_degree = 0;
  for (const auto& [key, value] : xij.at("c2").items()) max_degree = std::max(max_degree, std::stoi(key));
  std::vector<double> weights(max_degree, 0.0);
  for (const auto& [key, value] : xij.at("c2").items()) weights[std::stoi(key) - 1] = value.get<double>();
  MixturePolynomial xi(std::move(weights), xij.value("mean_term", 0.0));
  SpinGlassInstance inst = sample_spin_glass(xi, j.at("n").get<int>(),
                                             j.at("seed").get<std::uint64_t>(), budget_entries);
  inst.scale = j.value("scale", 1.0);
  return inst;
}

}  // namespace cspglass
