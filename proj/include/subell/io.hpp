#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "subell/analysis.hpp"
#include "subell/carnot.hpp"
#include "subell/doubling.hpp"
#include "subell/operators.hpp"
#include "subell/solver.hpp"

namespace subell {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

// Matrices are {"dim": n, "data": [row-major n*n]}; reports carry schema_version.
void to_json(json& j, const SymMatrix& m);
void from_json(const json& j, SymMatrix& m);
void to_json(json& j, const ConstantBundle& k);
void from_json(const json& j, ConstantBundle& k);
void to_json(json& j, const SolveReport& r);
void to_json(json& j, const GrowthMargin& g);
void to_json(json& j, const DistanceBin& b);
void to_json(json& j, const HolderReport& r);
void to_json(json& j, const TwoBoxReport& r);
void to_json(json& j, const CcEstimate& e);
void to_json(json& j, const PropertyReport& r);
void to_json(json& j, const SpectraMatchReport& r);

/// Polynomial from a term table [[coef, e_1, ..., e_n], ...].
Polynomial polynomial_from_terms(const json& terms, int num_vars);

/// Custom sigma: {"rows", "cols", "entries"}; each entry is a term table or
/// {"num": table, "den": table}.
CarnotStructure structure_from_json(const json& j);

/// Subset of JSON Schema: type (string or list), enum, required, properties,
/// additionalProperties (bool), items, minItems, maxItems, minimum, maximum,
/// exclusiveMinimum, exclusiveMaximum and local "$ref": "#/...". Returns one
/// message per violation, prefixed with the instance path.
std::vector<std::string> validate_schema(const json& instance, const json& schema);

/// The run configuration schema shipped in schemas/run_config.schema.json.
const json& run_config_schema();

struct FieldConfig {
  std::optional<double> constant;
  std::optional<Polynomial> poly;
  bool manufactured = false;  // f := F(D^2 u*, x) - c u*, needs "exact"
  std::optional<double> seminorm;
  double exponent = 1.0;
};

struct RunConfig {
  json raw;
  std::shared_ptr<const CarnotStructure> structure;
  GKind kind = GKind::trace;
  EllipticityBounds bounds;
  std::optional<FieldConfig> c;
  std::optional<FieldConfig> f;
  std::optional<double> c0;
  std::optional<Polynomial> exact;
  std::optional<Polynomial> boundary;
  std::optional<Grid> grid;
  SolveConfig solver;  // boundary callable filled by make_solve_config
  bool two_box = false;
  double eta = 1.1;
  VerifyOptions verify;
  std::optional<double> growth_c0;
  std::optional<double> growth_Lambda;
  std::vector<double> growth_radii;
  std::optional<Point> cc_a;
  std::optional<Point> cc_b;
  double cc_resolution = 0.0;
  std::size_t cc_max_nodes = 3'000'000;
  std::vector<Point> lemma_points;
  std::filesystem::path output = "out";
};

/// Validates against the schema, then builds the typed config. Throws config.
RunConfig parse_run_config(const json& j);
RunConfig load_run_config(const std::filesystem::path& path);

OperatorSpec make_operator(const RunConfig& cfg);

/// c, f and c0 from the config. Missing seminorms are estimated from
/// neighbouring grid nodes with exponent 1.
Coefficients make_coefficients(const RunConfig& cfg, const OperatorSpec& spec);

/// Solver settings with Dirichlet data from "boundary", else "exact".
SolveConfig make_solve_config(const RunConfig& cfg);

/// Constant bundle for the explicit Holder bound; C = Lip(sigma)^2 * eta with
/// the preset Lipschitz constant when known, else the sampled one.
ConstantBundle make_constant_bundle(const RunConfig& cfg, const OperatorSpec& spec,
                                    const Coefficients& coeffs, const GridFunction& u);

}  // namespace subell
