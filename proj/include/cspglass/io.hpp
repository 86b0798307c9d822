#pragma once

#include <string>

#include <json.hpp>

#include "cspglass/ensembles.hpp"
#include "cspglass/parisi.hpp"
#include "cspglass/predicates.hpp"

namespace cspglass {

using Json = nlohmann::json;

// Predicate files: {"k": int, "table": [reals], "name": str} or a named
// family {"family": "kSAT", "k": 3}.
Json predicate_to_json(const Predicate& p);
Predicate predicate_from_json(const Json& j);
Predicate load_predicate_file(const std::string& path);

Json mixture_to_json(const MixturePolynomial& xi);
Json spectrum_to_json(const FourierSpectrum& s);

Json order_parameter_to_json(const OrderParameter& zeta);

// CSP instances serialize their clause lists; spin glasses serialize a
// seed-replay record (disorder is regenerated, never stored raw).
Json csp_instance_to_json(const CspInstance& inst);
CspInstance csp_instance_from_json(const Json& j);

Json spin_glass_record(const SpinGlassInstance& inst);
SpinGlassInstance spin_glass_from_record(const Json& j,
                                         long budget_entries = kDefaultDisorderBudget);

}  // namespace cspglass
