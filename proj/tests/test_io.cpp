#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "subell/error.hpp"
#include "subell/io.hpp"

using namespace subell;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = SUBELL_SOURCE_DIR;

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::input;
}

json minimal_config() {
  return json::parse(R"({
    "schema_version": 1,
    "structure": "heisenberg1",
    "operator": {"kind": "trace"},
    "coefficients": {"c": {"constant": 2.0}, "f": {"preset": "manufactured"}},
    "exact": [[1, 2, 0, 0], [1, 0, 1, 0]],
    "grid": {"lo": [-1, -1, -1], "hi": [1, 1, 1], "shape": [5, 5, 5]}
  })");
}

}  // namespace

TEST(Schema, ValidatorCoversTheSupportedKeywords) {
  const json schema = json::parse(R"({
    "type": "object",
    "required": ["a"],
    "additionalProperties": false,
    "properties": {
      "a": {"type": "integer", "minimum": 1, "maximum": 3},
      "b": {"type": ["string", "null"], "enum": ["x", null]},
      "c": {"type": "array", "items": {"$ref": "#/$defs/pos"}, "minItems": 1, "maxItems": 2}
    },
    "$defs": {"pos": {"type": "number", "exclusiveMinimum": 0}}
  })");
  EXPECT_TRUE(validate_schema(json::parse(R"({"a": 2, "b": null, "c": [0.5]})"), schema).empty());
  EXPECT_FALSE(validate_schema(json::parse(R"({"b": "x"})"), schema).empty());
  EXPECT_FALSE(validate_schema(json::parse(R"({"a": 4})"), schema).empty());
  EXPECT_FALSE(validate_schema(json::parse(R"({"a": 1.5})"), schema).empty());
  EXPECT_FALSE(validate_schema(json::parse(R"({"a": 1, "b": "y"})"), schema).empty());
  EXPECT_FALSE(validate_schema(json::parse(R"({"a": 1, "c": []})"), schema).empty());
  EXPECT_FALSE(validate_schema(json::parse(R"({"a": 1, "c": [1, 2, 3]})"), schema).empty());
  EXPECT_FALSE(validate_schema(json::parse(R"({"a": 1, "c": [0]})"), schema).empty());
  EXPECT_FALSE(validate_schema(json::parse(R"({"a": 1, "d": 0})"), schema).empty());
}

TEST(Schema, EmbeddedSchemaMatchesTheShippedFile) {
  std::ifstream is(kSource / "schemas" / "run_config.schema.json");
  ASSERT_TRUE(is.good());
  EXPECT_EQ(json::parse(is), run_config_schema());
}

TEST(Schema, ShippedConfigsValidate) {
  for (const auto& entry : fs::directory_iterator(kSource / "configs")) {
    std::ifstream is(entry.path());
    const json j = json::parse(is);
    EXPECT_TRUE(validate_schema(j, run_config_schema()).empty()) << entry.path();
    EXPECT_NO_THROW(load_run_config(entry.path())) << entry.path();
  }
}

TEST(Schema, RejectsViolationsAndMalformedFiles) {
  EXPECT_EQ(kind_of([] { load_run_config(kSource / "tests/data/schema_violation.json"); }),
            ErrorKind::config);
  EXPECT_EQ(kind_of([] { load_run_config(kSource / "tests/data/malformed.json"); }),
            ErrorKind::config);
  EXPECT_EQ(kind_of([] { load_run_config(kSource / "tests/data/absent.json"); }),
            ErrorKind::config);
  json j = minimal_config();
  j["schema_version"] = 2;
  EXPECT_EQ(kind_of([&] { parse_run_config(j); }), ErrorKind::config);
}

TEST(Polynomials, TermTables) {
  const Polynomial p = polynomial_from_terms(json::parse("[[2, 1, 0], [-1, 0, 2], [3, 0, 0]]"), 2);
  const double x[] = {1.5, 2.0};
  EXPECT_DOUBLE_EQ(p(x), 3.0 - 4.0 + 3.0);
  EXPECT_THROW(polynomial_from_terms(json::parse("[[1, 2]]"), 2), Error);
}

TEST(Structures, RationalEntriesFromJson) {
  // Heisenberg fields written out as a table.
  const json j = json::parse(R"({
    "name": "table",
    "rows": 2, "cols": 3,
    "entries": [
      [[1, 0, 0, 0]], [], [[2, 0, 1, 0]],
      [], [[1, 0, 0, 0]], {"num": [[-2, 1, 0, 0]], "den": [[1, 0, 0, 0]]}
    ]
  })");
  const CarnotStructure s = structure_from_json(j);
  const CarnotStructure h = make_structure("heisenberg1");
  for (const Point& x : {Point{0, 0, 0}, Point{1, 2, 3}, Point{-0.5, 0.25, 9}})
    EXPECT_EQ(sigma_at(s, x), sigma_at(h, x));
  EXPECT_EQ(s.m, 2);
  EXPECT_EQ(s.n, 3);
}

TEST(RunConfig, ParsesTypedFields) {
  const RunConfig cfg = parse_run_config(minimal_config());
  EXPECT_EQ(cfg.structure->name, "heisenberg1");
  EXPECT_EQ(cfg.kind, GKind::trace);
  ASSERT_TRUE(cfg.grid.has_value());
  EXPECT_DOUBLE_EQ(cfg.grid->h(), 0.5);
  EXPECT_TRUE(cfg.f->manufactured);
  EXPECT_DOUBLE_EQ(cfg.eta, 1.1);
}

TEST(RunConfig, ManufacturedRightHandSide) {
  const RunConfig cfg = parse_run_config(minimal_config());
  const OperatorSpec spec = make_operator(cfg);
  const Coefficients k = make_coefficients(cfg, spec);
  // F(D^2 u*) = 2 for u* = x1^2 + x2; f = 2 - 2 u*.
  const Point x{0.5, -0.25, 0.75};
  EXPECT_NEAR(k.f.value(x.coords), 2.0 - 2.0 * (0.25 - 0.25), 1e-12);
  EXPECT_DOUBLE_EQ(k.c0, 2.0);
  EXPECT_EQ(k.c.seminorm, 0.0);
  EXPECT_GT(k.f.seminorm, 0.0);
  const SolveConfig sc = make_solve_config(cfg);
  EXPECT_DOUBLE_EQ(sc.boundary(x.coords), 0.0);
}

TEST(RunConfig, ManufacturedNeedsExact) {
  json j = minimal_config();
  j.erase("exact");
  EXPECT_EQ(kind_of([&] { parse_run_config(j); }), ErrorKind::config);
}

TEST(RunConfig, ConstantBundleUsesPresetLipschitz) {
  const RunConfig cfg = parse_run_config(minimal_config());
  const OperatorSpec spec = make_operator(cfg);
  const Coefficients co = make_coefficients(cfg, spec);
  const GridFunction u(*cfg.grid, -3.0);
  const ConstantBundle k = make_constant_bundle(cfg, spec, co, u);
  EXPECT_NEAR(k.C, 4.0 * 1.1, 1e-12);
  EXPECT_DOUBLE_EQ(k.u_inf, 3.0);
  EXPECT_DOUBLE_EQ(k.c0, 2.0);
}

TEST(Json, RoundTrips) {
  const SymMatrix m{{1, 2}, {2, -5}};
  const SymMatrix back = json(m).get<SymMatrix>();
  EXPECT_EQ(back.dense(), m.dense());

  ConstantBundle k;
  k.c0 = 3;
  k.cbar = 2;
  k.C = 4.4;
  k.L_f = 0.5;
  k.beta_c = 0.7;
  const ConstantBundle kb = json(k).get<ConstantBundle>();
  EXPECT_EQ(kb.c0, 3);
  EXPECT_EQ(kb.cbar, 2);
  EXPECT_EQ(kb.C, 4.4);
  EXPECT_EQ(kb.L_f, 0.5);
  EXPECT_EQ(kb.beta_c, 0.7);

  SolveReport r;
  r.iterations = 12;
  r.converged = true;
  const json jr = r;
  EXPECT_EQ(jr["schema_version"], kSchemaVersion);
  EXPECT_EQ(jr["iterations"], 12);
  EXPECT_EQ(jr["converged"], true);

  HolderReport h;
  const json jh = h;
  EXPECT_EQ(jh["growth_scope"], "box-local");
  EXPECT_EQ(jh["alpha_within_data_exponents"], false);
}
