#include "subell/io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "subell/error.hpp"

namespace subell {

namespace detail {
extern const std::string_view run_config_schema_text;
}

void to_json(json& j, const SymMatrix& m) {
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.dim()) * m.dim());
  for (int i = 0; i < m.dim(); ++i)
    for (int k = 0; k < m.dim(); ++k) data.push_back(m(i, k));
  j = json{{"dim", m.dim()}, {"data", data}};
}

void from_json(const json& j, SymMatrix& m) {
  const int dim = j.at("dim").get<int>();
  const auto data = j.at("data").get<std::vector<double>>();
  require(dim >= 0 && data.size() == static_cast<std::size_t>(dim) * dim, ErrorKind::input,
          "matrix data length must be dim * dim");
  Matrix a(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int k = 0; k < dim; ++k) a(i, k) = data[static_cast<std::size_t>(i) * dim + k];
  m = SymMatrix::from_dense(a);
}

void to_json(json& j, const ConstantBundle& k) {
  j = json{{"c0", k.c0},         {"cbar", k.cbar},     {"Lambda", k.Lambda},
           {"C", k.C},           {"L_c", k.L_c},       {"beta_c", k.beta_c},
           {"L_f", k.L_f},       {"beta_f", k.beta_f}, {"u_inf", k.u_inf}};
}

void from_json(const json& j, ConstantBundle& k) {
  k.c0 = j.at("c0").get<double>();
  k.cbar = j.value("cbar", k.c0);
  k.Lambda = j.at("Lambda").get<double>();
  k.C = j.at("C").get<double>();
  k.L_c = j.at("L_c").get<double>();
  k.beta_c = j.at("beta_c").get<double>();
  k.L_f = j.at("L_f").get<double>();
  k.beta_f = j.at("beta_f").get<double>();
  k.u_inf = j.at("u_inf").get<double>();
}

void to_json(json& j, const SolveReport& r) {
  j = json{{"schema_version", kSchemaVersion},
           {"iterations", r.iterations},
           {"residual", r.residual},
           {"dt_min", r.dt_min},
           {"dt_max", r.dt_max},
           {"wall_seconds", r.wall_seconds},
           {"converged", r.converged}};
}

void to_json(json& j, const GrowthMargin& g) {
  j = json{{"radii", g.radii},
           {"margins", g.margins},
           {"tail_estimate", g.tail_estimate},
           {"satisfied", g.satisfied}};
  j["analytic_limit"] = g.analytic_limit ? json(*g.analytic_limit) : json(nullptr);
}

void to_json(json& j, const DistanceBin& b) {
  j = json{{"r_lo", b.r_lo},
           {"r_hi", b.r_hi},
           {"r_at_max", b.r_at_max},
           {"max_increment", b.max_increment},
           {"pairs", b.pairs}};
}

void to_json(json& j, const HolderReport& r) {
  json verdicts = json::object();
  for (const auto& [name, v] : r.hypothesis_verdicts)
    verdicts[name] = json{{"verdict", v.passed ? "pass" : "fail"}, {"detail", v.detail}};
  j = json{{"schema_version", kSchemaVersion},
           {"alpha_fit", r.alpha_fit},
           {"L_fit", r.L_fit},
           {"degenerate_fit", r.degenerate_fit},
           {"pair_count", r.pair_count},
           {"max_violation", r.max_violation},
           {"alpha_limit", std::isfinite(r.alpha_limit) ? json(r.alpha_limit) : json("inf")},
           {"alpha_admissible", r.alpha_admissible},
           {"alpha_within_data_exponents", r.alpha_within_data_exponents},
           {"lipschitz_sigma", r.lipschitz_sigma},
           {"growth", r.growth},
           {"growth_scope", "box-local"},
           {"hypothesis_verdicts", verdicts},
           {"bins", r.bins}};
  j["theorem_bound"] = r.theorem_bound ? json(*r.theorem_bound) : json(nullptr);
  j["l_fit_within_bound"] = r.l_fit_within_bound ? json(*r.l_fit_within_bound) : json(nullptr);
}

void to_json(json& j, const TwoBoxReport& r) {
  j = json{{"inner_window_max_difference", r.inner_window_max_difference},
           {"small_box", r.small_box},
           {"large_box", r.large_box}};
}

void to_json(json& j, const CcEstimate& e) {
  j = json{{"length", e.length}, {"moves", e.moves}, {"nodes_visited", e.nodes_visited}};
}

void to_json(json& j, const PropertyReport& r) {
  j = json{{"property", r.property},
           {"trials", r.trials},
           {"violations", r.violations},
           {"worst_slack", r.worst_slack},
           {"passed", r.passed()}};
  if (r.witness) j["witness"] = json{{"first", r.witness->first}, {"second", r.witness->second}};
}

void to_json(json& j, const SpectraMatchReport& r) {
  j = json{{"m", r.m},
           {"n", r.n},
           {"row_gram_eigenvalues", r.row_gram_eigenvalues},
           {"column_gram_eigenvalues", r.column_gram_eigenvalues},
           {"max_nonzero_discrepancy", r.max_nonzero_discrepancy},
           {"max_zero_residual", r.max_zero_residual},
           {"row_gram_positive", r.row_gram_positive},
           {"agree", r.agree}};
}

Polynomial polynomial_from_terms(const json& terms, int num_vars) {
  require(terms.is_array(), ErrorKind::config, "polynomial must be an array of terms");
  Polynomial p(num_vars);
  for (const json& t : terms) {
    require(t.is_array() && t.size() == static_cast<std::size_t>(num_vars) + 1,
            ErrorKind::config,
            "each term must be [coef, e_1, ..., e_" + std::to_string(num_vars) + "]");
    std::vector<int> e(num_vars);
    for (int k = 0; k < num_vars; ++k) {
      const double v = t[k + 1].get<double>();
      require(v >= 0.0 && v == std::floor(v), ErrorKind::config,
              "exponents must be non-negative integers");
      e[k] = static_cast<int>(v);
    }
    p.add_term(t[0].get<double>(), std::move(e));
  }
  return p;
}

CarnotStructure structure_from_json(const json& j) {
  const int rows = j.at("rows").get<int>();
  const int cols = j.at("cols").get<int>();
  const json& entries = j.at("entries");
  require(entries.is_array() && entries.size() == static_cast<std::size_t>(rows) * cols,
          ErrorKind::config, "entries must hold rows * cols items");
  std::vector<RationalFunction> fns;
  for (const json& e : entries) {
    RationalFunction r;
    if (e.is_object()) {
      r.num = polynomial_from_terms(e.at("num"), cols);
      r.den = e.contains("den") ? polynomial_from_terms(e.at("den"), cols)
                                : Polynomial::constant(cols, 1.0);
    } else {
      r.num = polynomial_from_terms(e, cols);
      r.den = Polynomial::constant(cols, 1.0);
    }
    require(!r.den.is_zero(), ErrorKind::config, "denominator must not be identically zero");
    fns.push_back(std::move(r));
  }
  return make_rational_structure(j.value("name", std::string("custom")), rows, cols,
                                 std::move(fns));
}

namespace {

bool type_matches(const json& v, const std::string& t) {
  if (t == "object") return v.is_object();
  if (t == "array") return v.is_array();
  if (t == "string") return v.is_string();
  if (t == "boolean") return v.is_boolean();
  if (t == "null") return v.is_null();
  if (t == "number") return v.is_number();
  if (t == "integer") {
    if (v.is_number_integer()) return true;
    return v.is_number_float() && std::floor(v.get<double>()) == v.get<double>();
  }
  return false;
}

const json& resolve_ref(const json& root, const std::string& ref) {
  require(ref.rfind("#/", 0) == 0, ErrorKind::config, "only local schema references supported");
  return root.at(json::json_pointer(ref.substr(1)));
}

void validate_node(const json& v, const json& schema, const json& root, const std::string& path,
                   std::vector<std::string>& errors) {
  if (schema.contains("$ref")) {
    validate_node(v, resolve_ref(root, schema["$ref"].get<std::string>()), root, path, errors);
    return;
  }
  const std::string where = path.empty() ? "/" : path;
  if (schema.contains("type")) {
    const json& t = schema["type"];
    bool ok = false;
    if (t.is_string()) ok = type_matches(v, t.get<std::string>());
    else
      for (const json& alt : t) ok = ok || type_matches(v, alt.get<std::string>());
    if (!ok) {
      errors.push_back(where + ": expected type " + t.dump());
      return;
    }
  }
  if (schema.contains("enum")) {
    bool found = false;
    for (const json& e : schema["enum"]) found = found || e == v;
    if (!found) errors.push_back(where + ": value not in " + schema["enum"].dump());
  }
  if (v.is_number()) {
    const double x = v.get<double>();
    if (schema.contains("minimum") && x < schema["minimum"].get<double>())
      errors.push_back(where + ": below minimum " + schema["minimum"].dump());
    if (schema.contains("maximum") && x > schema["maximum"].get<double>())
      errors.push_back(where + ": above maximum " + schema["maximum"].dump());
    if (schema.contains("exclusiveMinimum") && x <= schema["exclusiveMinimum"].get<double>())
      errors.push_back(where + ": must exceed " + schema["exclusiveMinimum"].dump());
    if (schema.contains("exclusiveMaximum") && x >= schema["exclusiveMaximum"].get<double>())
      errors.push_back(where + ": must be below " + schema["exclusiveMaximum"].dump());
  }
  if (v.is_object()) {
    if (schema.contains("required"))
      for (const json& r : schema["required"])
        if (!v.contains(r.get<std::string>()))
          errors.push_back(where + ": missing required property '" + r.get<std::string>() + "'");
    const json empty = json::object();
    const json& props = schema.contains("properties") ? schema["properties"] : empty;
    const bool closed =
        schema.contains("additionalProperties") && schema["additionalProperties"] == false;
    for (const auto& [key, child] : v.items()) {
      if (props.contains(key)) validate_node(child, props[key], root, path + "/" + key, errors);
      else if (closed) errors.push_back(where + ": unknown property '" + key + "'");
    }
  }
  if (v.is_array()) {
    if (schema.contains("minItems") && v.size() < schema["minItems"].get<std::size_t>())
      errors.push_back(where + ": fewer than " + schema["minItems"].dump() + " items");
    if (schema.contains("maxItems") && v.size() > schema["maxItems"].get<std::size_t>())
      errors.push_back(where + ": more than " + schema["maxItems"].dump() + " items");
    if (schema.contains("items"))
      for (std::size_t i = 0; i < v.size(); ++i)
        validate_node(v[i], schema["items"], root, path + "/" + std::to_string(i), errors);
  }
}

std::vector<double> number_list(const json& j) { return j.get<std::vector<double>>(); }

FieldConfig field_from_json(const json& j, int n) {
  FieldConfig f;
  int sources = 0;
  if (j.contains("constant")) {
    f.constant = j["constant"].get<double>();
    ++sources;
  }
  if (j.contains("poly")) {
    f.poly = polynomial_from_terms(j["poly"], n);
    ++sources;
  }
  if (j.contains("preset")) {
    f.manufactured = j["preset"] == "manufactured";
    ++sources;
  }
  require(sources == 1, ErrorKind::config,
          "a coefficient needs exactly one of constant, poly, preset");
  if (j.contains("seminorm")) f.seminorm = j["seminorm"].get<double>();
  f.exponent = j.value("exponent", 1.0);
  return f;
}

}  // namespace

std::vector<std::string> validate_schema(const json& instance, const json& schema) {
  std::vector<std::string> errors;
  validate_node(instance, schema, schema, "", errors);
  return errors;
}

const json& run_config_schema() {
  static const json schema = json::parse(detail::run_config_schema_text);
  return schema;
}

RunConfig parse_run_config(const json& j) {
  const auto errors = validate_schema(j, run_config_schema());
  if (!errors.empty()) {
    std::string msg = "config does not match the schema:";
    for (const auto& e : errors) msg += "\n  " + e;
    fail(ErrorKind::config, msg);
  }

  RunConfig cfg;
  cfg.raw = j;
  try {
    const json& st = j["structure"];
    cfg.structure = std::make_shared<const CarnotStructure>(
        st.is_string() ? make_structure(st.get<std::string>()) : structure_from_json(st));
  } catch (const Error& e) {
    // Precondition failures belong to the lemma checks; everything else here
    // is a malformed description.
    if (e.kind() == ErrorKind::precondition) throw;
    fail(ErrorKind::config, std::string("structure: ") + e.what());
  }
  const int n = cfg.structure->n;

  if (j.contains("operator")) {
    const json& op = j["operator"];
    cfg.kind = parse_g_kind(op["kind"].get<std::string>());
    cfg.bounds = EllipticityBounds(op.value("lambda", 1.0), op.value("Lambda", 1.0));
  }
  if (j.contains("coefficients")) {
    const json& co = j["coefficients"];
    cfg.c = field_from_json(co["c"], n);
    cfg.f = field_from_json(co["f"], n);
    require(!cfg.c->manufactured, ErrorKind::config, "the manufactured preset applies to f only");
    if (co.contains("c0")) cfg.c0 = co["c0"].get<double>();
  }
  if (j.contains("exact")) cfg.exact = polynomial_from_terms(j["exact"], n);
  if (j.contains("boundary")) cfg.boundary = polynomial_from_terms(j["boundary"], n);
  if (cfg.f && cfg.f->manufactured)
    require(cfg.exact.has_value(), ErrorKind::config, "the manufactured preset needs 'exact'");

  if (j.contains("grid")) {
    const json& g = j["grid"];
    Box box{number_list(g["lo"]), number_list(g["hi"])};
    const auto shape = g["shape"].get<std::vector<int>>();
    require(box.lo.size() == static_cast<std::size_t>(n) && box.hi.size() == box.lo.size() &&
                shape.size() == box.lo.size(),
            ErrorKind::config, "grid lo, hi, shape must have the structure dimension");
    try {
      cfg.grid = Grid(box, shape);
    } catch (const Error& e) {
      fail(ErrorKind::config, std::string("grid: ") + e.what());
    }
  }
  if (j.contains("solver")) {
    const json& s = j["solver"];
    cfg.solver.tol = s.value("tol", cfg.solver.tol);
    cfg.solver.max_iters = s.value("max_iters", cfg.solver.max_iters);
    cfg.solver.stencil_scale = s.value("stencil_scale", cfg.solver.stencil_scale);
    cfg.solver.relaxation = s.value("relaxation", cfg.solver.relaxation);
    cfg.two_box = s.value("two_box", false);
  }
  if (j.contains("analysis")) {
    const json& a = j["analysis"];
    cfg.eta = a.value("eta", cfg.eta);
    cfg.verify.sampling.samples = a.value("pair_samples", cfg.verify.sampling.samples);
    cfg.verify.sampling.seed = a.value("seed", cfg.verify.sampling.seed);
    cfg.verify.lipschitz_samples = a.value("lipschitz_samples", cfg.verify.lipschitz_samples);
    cfg.verify.growth_tol = a.value("growth_tol", cfg.verify.growth_tol);
  }
  if (j.contains("growth")) {
    const json& g = j["growth"];
    if (g.contains("c0")) cfg.growth_c0 = g["c0"].get<double>();
    if (g.contains("Lambda")) cfg.growth_Lambda = g["Lambda"].get<double>();
    if (g.contains("radii")) cfg.growth_radii = number_list(g["radii"]);
  }
  if (j.contains("cc")) {
    const json& c = j["cc"];
    cfg.cc_a = Point(number_list(c["a"]));
    cfg.cc_b = Point(number_list(c["b"]));
    require(cfg.cc_a->dim() == n && cfg.cc_b->dim() == n, ErrorKind::config,
            "cc endpoints must have the structure dimension");
    cfg.cc_resolution = c["resolution"].get<double>();
    cfg.cc_max_nodes = c.value("max_nodes", cfg.cc_max_nodes);
  }
  if (j.contains("lemma_points"))
    for (const json& p : j["lemma_points"]) {
      cfg.lemma_points.emplace_back(number_list(p));
      require(cfg.lemma_points.back().dim() == n, ErrorKind::config,
              "lemma points must have the structure dimension");
    }
  if (j.contains("output")) cfg.output = j["output"].get<std::string>();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::config, "cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::config, "malformed JSON in " + path.string() + ": " + e.what());
  }
  return parse_run_config(j);
}

OperatorSpec make_operator(const RunConfig& cfg) {
  return OperatorSpec::make(cfg.kind, cfg.bounds, cfg.structure);
}

namespace {

ScalarFn field_function(const FieldConfig& f) {
  if (f.constant) {
    const double v = *f.constant;
    return [v](std::span<const double>) { return v; };
  }
  const Polynomial p = *f.poly;
  return [p](std::span<const double> x) { return p(x); };
}

// Largest difference quotient between neighbouring grid nodes.
double sampled_lipschitz(const ScalarFn& fn, const Grid& g) {
  std::vector<double> vals(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) vals[i] = fn(g.point(i).coords);
  double best = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    auto idx = g.multi_index(i);
    for (int k = 0; k < g.dim(); ++k) {
      if (idx[k] + 1 >= g.shape()[k]) continue;
      ++idx[k];
      best = std::max(best, std::abs(vals[g.flat_index(idx)] - vals[i]) / g.h());
      --idx[k];
    }
  }
  return best;
}

}  // namespace

Coefficients make_coefficients(const RunConfig& cfg, const OperatorSpec& spec) {
  require(cfg.c && cfg.f, ErrorKind::config, "config needs coefficients c and f");
  require(cfg.grid.has_value(), ErrorKind::config, "config needs a grid");
  const Grid& g = *cfg.grid;
  Coefficients co;
  co.c.value = field_function(*cfg.c);
  if (cfg.f->manufactured) {
    const Polynomial u = *cfg.exact;
    const ScalarFn c = co.c.value;
    const OperatorSpec op = spec;
    co.f.value = [u, c, op](std::span<const double> x) {
      const int n = static_cast<int>(x.size());
      const auto hv = u.hessian(x);
      Matrix h(n, n);
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) h(i, k) = hv[static_cast<std::size_t>(i) * n + k];
      const Point p(std::vector<double>(x.begin(), x.end()));
      return f_eval(op, SymMatrix::from_dense(h), p) - c(x) * u(x);
    };
  } else {
    co.f.value = field_function(*cfg.f);
  }
  co.c.exponent = cfg.c->exponent;
  co.f.exponent = cfg.f->exponent;
  co.c.seminorm = cfg.c->seminorm ? *cfg.c->seminorm
                  : cfg.c->constant ? 0.0
                                    : sampled_lipschitz(co.c.value, g);
  co.f.seminorm = cfg.f->seminorm ? *cfg.f->seminorm
                  : cfg.f->constant ? 0.0
                                    : sampled_lipschitz(co.f.value, g);
  if (!cfg.c->seminorm && !cfg.c->constant) co.c.exponent = 1.0;
  if (!cfg.f->seminorm && !cfg.f->constant) co.f.exponent = 1.0;

  double c_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < g.size(); ++i) c_min = std::min(c_min, co.c.value(g.point(i).coords));
  co.c0 = cfg.c0 ? *cfg.c0 : c_min;
  return co;
}

SolveConfig make_solve_config(const RunConfig& cfg) {
  SolveConfig s = cfg.solver;
  const std::optional<Polynomial>& b = cfg.boundary ? cfg.boundary : cfg.exact;
  require(b.has_value(), ErrorKind::config, "config needs 'boundary' or 'exact' for Dirichlet data");
  const Polynomial p = *b;
  s.boundary = [p](std::span<const double> x) { return p(x); };
  return s;
}

ConstantBundle make_constant_bundle(const RunConfig& cfg, const OperatorSpec& spec,
                                    const Coefficients& coeffs, const GridFunction& u) {
  ConstantBundle k;
  k.c0 = coeffs.c0;
  k.cbar = coeffs.c0;
  k.Lambda = spec.effective_bounds().Lambda;
  const double lip = spec.structure->lipschitz_sigma
                         ? *spec.structure->lipschitz_sigma
                         : lipschitz_sigma_estimate(*spec.structure, u.grid.box(),
                                                    cfg.verify.lipschitz_samples);
  k.C = trace_inequality_constant(lip, cfg.eta);
  k.L_c = coeffs.c.seminorm;
  k.beta_c = coeffs.c.exponent;
  k.L_f = coeffs.f.seminorm;
  k.beta_f = coeffs.f.exponent;
  for (double v : u.values) k.u_inf = std::max(k.u_inf, std::abs(v));
  return k;
}

}  // namespace subell
