#pragma once

// Built-in Finsler structures and vector fields with ground-truth
// classifications.  Spec strings: `builtin:<name>?k=v,...` or
// `expr:<source>`.  Matrix parameters use `[a11,a12;a21,a22]` with
// expression entries in x; vector parameters are comma-separated.

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "finsler/classify.hpp"
#include "finsler/errors.hpp"
#include "finsler/expr.hpp"
#include "finsler/fields.hpp"
#include "finsler/geometry.hpp"
#include "finsler/sampling.hpp"

namespace finsler {

struct ModelEntry {
  std::string name;
  FinslerStructure structure;
  Box default_box;
  std::function<bool(const SlitPoint&)> in_safe_domain;  // may be empty
  // Metric matrix in x for quadratic (Riemannian-type) energies; feeds the
  // independent Christoffel cross-check.
  std::optional<std::vector<std::vector<Expr>>> riemannian_matrix;
  std::string notes;
};

using ParamMap = std::map<std::string, std::string>;

namespace modeldetail {

inline std::vector<double> parse_vector(const std::string& s, int n, const std::string& what) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t comma = s.find(',', start);
    std::string part = s.substr(start, comma == std::string::npos ? comma : comma - start);
    try {
      out.push_back(std::stod(part));
    } catch (...) {
      throw std::invalid_argument(what + ": malformed number '" + part + "'");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (static_cast<int>(out.size()) != n)
    throw std::invalid_argument(what + ": expected " + std::to_string(n) + " entries");
  return out;
}

// [e11,e12;e21,e22] with expression entries.
inline std::vector<std::vector<Expr>> parse_expr_matrix(std::string s, int n,
                                                        const std::string& what) {
  auto strip = [](std::string v) {
    while (!v.empty() && std::isspace(static_cast<unsigned char>(v.front()))) v.erase(0, 1);
    while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.pop_back();
    return v;
  };
  s = strip(s);
  if (s.size() >= 2 && s.front() == '[' && s.back() == ']') s = s.substr(1, s.size() - 2);
  std::vector<std::vector<Expr>> rows;
  std::size_t start = 0;
  std::vector<std::string> row_strs;
  int depth = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || (s[i] == ';' && depth == 0)) {
      row_strs.push_back(s.substr(start, i - start));
      start = i + 1;
    } else if (s[i] == '(') {
      ++depth;
    } else if (s[i] == ')') {
      --depth;
    }
  }
  if (static_cast<int>(row_strs.size()) != n)
    throw std::invalid_argument(what + ": expected " + std::to_string(n) + " rows");
  for (const auto& rs : row_strs) {
    std::vector<Expr> row;
    std::size_t p = 0;
    depth = 0;
    std::size_t cell = 0;
    std::vector<std::string> cells;
    for (p = 0; p <= rs.size(); ++p) {
      if (p == rs.size() || (rs[p] == ',' && depth == 0)) {
        cells.push_back(rs.substr(cell, p - cell));
        cell = p + 1;
      } else if (rs[p] == '(') {
        ++depth;
      } else if (rs[p] == ')') {
        --depth;
      }
    }
    if (static_cast<int>(cells.size()) != n)
      throw std::invalid_argument(what + ": expected " + std::to_string(n) + " columns");
    for (const auto& c : cells) row.push_back(Expr::parse(c, n, false));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::vector<std::vector<Expr>> constant_matrix(int n, const DMat& a) {
  std::vector<std::vector<Expr>> m;
  for (int i = 0; i < n; ++i) {
    std::vector<Expr> row;
    for (int j = 0; j < n; ++j) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", a(i, j));
      row.push_back(Expr::parse(buf, n, false));
    }
    m.push_back(std::move(row));
  }
  return m;
}

}  // namespace modeldetail

// E = 1/2 |y|^2
inline ModelEntry make_euclidean(int n) {
  ModelEntry m;
  m.name = "euclidean";
  m.structure.dim = n;
  m.structure.name = "euclidean(" + std::to_string(n) + ")";
  m.structure.energy = [n](const JetPoint& p, int order) {
    Jet e = Jet::constant(0.0, p.dim(), order);
    for (int i = 0; i < n; ++i) {
      Jet yi = Jet::variable(n + i, p.values[n + i], p.dim(), order);
      e += yi * yi;
    }
    return e * 0.5;
  };
  m.default_box = Box::cube(n, -1.0, 1.0, -1.5, 1.5);
  m.in_safe_domain = [](const SlitPoint& p) { return norm_inf(p.y) >= 0.2; };
  DMat id(n, n, 0.0);
  for (int i = 0; i < n; ++i) id(i, i) = 1.0;
  m.riemannian_matrix = modeldetail::constant_matrix(n, id);
  m.notes = "flat model; smooth everywhere off the zero section";
  return m;
}

// Quadratic energy from a metric matrix of expressions in x.
inline ModelEntry make_riemannian(int n, std::vector<std::vector<Expr>> a,
                                  std::string name = "riemannian") {
  ModelEntry m;
  m.name = name;
  m.structure.dim = n;
  m.structure.name = name + "(" + std::to_string(n) + ")";
  auto matrix = std::make_shared<std::vector<std::vector<Expr>>>(a);
  m.structure.energy = [n, matrix](const JetPoint& p, int order) {
    JetPoint xp = JetPoint::base(
        std::vector<double>(p.values.begin(), p.values.begin() + p.base_dim));
    Jet e = Jet::constant(0.0, p.dim(), order);
    std::vector<Jet> yv;
    yv.reserve(n);
    for (int i = 0; i < n; ++i)
      yv.push_back(Jet::variable(n + i, p.values[n + i], p.dim(), order));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        Jet aij = promote_base_jets({(*matrix)[i][j].evaluate(xp, order)}, p.dim())[0];
        e += aij * yv[i] * yv[j];
      }
    return e * 0.5;
  };
  m.default_box = Box::cube(n, -1.0, 1.0, -1.5, 1.5);
  m.in_safe_domain = [](const SlitPoint& p) { return norm_inf(p.y) >= 0.2; };
  m.riemannian_matrix = std::move(a);
  m.notes = "Riemannian-type quadratic energy";
  return m;
}

// diag(1, x1^2) on the half-plane x1 > 0.
inline ModelEntry make_polar() {
  std::vector<std::vector<Expr>> a = modeldetail::parse_expr_matrix("[1,0;0,x1^2]", 2, "polar");
  ModelEntry m = make_riemannian(2, std::move(a), "polar");
  m.default_box.x = {{0.5, 2.5}, {-1.0, 1.0}};
  m.in_safe_domain = [](const SlitPoint& p) {
    return p.x[0] > 0.1 && norm_inf(p.y) >= 0.2;
  };
  m.notes = "polar-type metric diag(1, x1^2); valid on x1 > 0";
  return m;
}

// F = |y| + b.y with a constant covector b, |b| < 1.
inline ModelEntry make_randers(int n, std::vector<double> b) {
  double bn = 0.0;
  for (double v : b) bn += v * v;
  if (std::sqrt(bn) >= 1.0)
    throw std::invalid_argument("randers: |b| must be < 1, got " + std::to_string(std::sqrt(bn)));
  ModelEntry m;
  m.name = "randers";
  m.structure.dim = n;
  m.structure.name = "randers(" + std::to_string(n) + ")";
  m.structure.energy = [n, b](const JetPoint& p, int order) {
    Jet q = Jet::constant(0.0, p.dim(), order);
    Jet lin = Jet::constant(0.0, p.dim(), order);
    for (int i = 0; i < n; ++i) {
      Jet yi = Jet::variable(n + i, p.values[n + i], p.dim(), order);
      q += yi * yi;
      lin += b[i] * yi;
    }
    Jet f = sqrt(q) + lin;
    return f * f * 0.5;
  };
  m.default_box = Box::cube(n, -1.0, 1.0, -1.5, 1.5);
  m.in_safe_domain = [](const SlitPoint& p) { return norm_inf(p.y) >= 0.2; };
  m.notes = "Minkowski norm (x-independent); smooth off y = 0";
  return m;
}

// F = (sum_i (y^i)^4)^(1/4); g degrades near the coordinate hyperplanes,
// so the safe box keeps all |y^i| >= 0.1.
inline ModelEntry make_quartic(int n) {
  ModelEntry m;
  m.name = "quartic";
  m.structure.dim = n;
  m.structure.name = "quartic(" + std::to_string(n) + ")";
  m.structure.energy = [n](const JetPoint& p, int order) {
    Jet q = Jet::constant(0.0, p.dim(), order);
    for (int i = 0; i < n; ++i) {
      Jet yi = Jet::variable(n + i, p.values[n + i], p.dim(), order);
      Jet y2 = yi * yi;
      q += y2 * y2;
    }
    return sqrt(q) * 0.5;  // E = F^2/2 = sqrt(sum y^4)/2
  };
  m.default_box = Box::cube(n, -1.0, 1.0, -1.5, 1.5);
  m.in_safe_domain = [n](const SlitPoint& p) {
    for (int i = 0; i < n; ++i)
      if (std::abs(p.y[i]) < 0.1) return false;
    return true;
  };
  m.notes = "non-Riemannian, non-Randers Minkowski norm; safe box excludes axes";
  return m;
}

// F from an expression; E = F^2/2 over jets.
inline ModelEntry make_expr_finsler(const std::string& source, int n) {
  Expr f = Expr::parse(source, n, true);
  ModelEntry m;
  m.name = "expr";
  m.structure.dim = n;
  m.structure.name = "expr:" + source;
  m.structure.energy = [f](const JetPoint& p, int order) {
    Jet fv = f.evaluate(p, order);
    if (fv.value() <= 0.0)
      throw DegenerateError("expr finsler: F <= 0 at a slit sample; not a Finsler function");
    return fv * fv * 0.5;
  };
  m.default_box = Box::cube(n, -1.0, 1.0, -1.5, 1.5);
  m.in_safe_domain = [](const SlitPoint& p) { return norm_inf(p.y) >= 0.2; };
  m.notes = "user expression for F";
  return m;
}

inline ModelEntry builtin_finsler(const std::string& name, const ParamMap& params, int dim) {
  if (dim < 2) throw std::invalid_argument("finsler structures need dim >= 2");
  if (name == "euclidean") return make_euclidean(dim);
  if (name == "polar") {
    if (dim != 2) throw std::invalid_argument("polar: dim must be 2");
    return make_polar();
  }
  if (name == "randers") {
    auto it = params.find("b");
    std::vector<double> b(dim, 0.0);
    if (it != params.end()) b = modeldetail::parse_vector(it->second, dim, "randers b");
    else b[0] = 0.3;
    return make_randers(dim, b);
  }
  if (name == "quartic") return make_quartic(dim);
  if (name == "riemannian") {
    auto it = params.find("g");
    if (it == params.end())
      throw std::invalid_argument("riemannian: missing metric parameter g=[..;..]");
    return make_riemannian(dim, modeldetail::parse_expr_matrix(it->second, dim, "riemannian g"));
  }
  throw std::invalid_argument("unknown builtin finsler structure '" + name + "'");
}

// --- vector fields ------------------------------------------------------

inline BaseVectorField make_constant_field(int n, std::vector<double> v, std::string name) {
  BaseVectorField f;
  f.dim = n;
  f.name = std::move(name);
  f.components = [v](const JetPoint& p, int order) {
    std::vector<Jet> out;
    out.reserve(v.size());
    for (double c : v) out.push_back(Jet::constant(c, p.dim(), order));
    return out;
  };
  return f;
}

inline BaseVectorField make_linear_field(int n, DMat a, std::string name) {
  BaseVectorField f;
  f.dim = n;
  f.name = std::move(name);
  f.components = [n, a](const JetPoint& p, int order) {
    std::vector<Jet> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
      Jet s = Jet::constant(0.0, p.dim(), order);
      for (int j = 0; j < n; ++j)
        s += a(i, j) * Jet::variable(j, p.values[j], p.dim(), order);
      out.push_back(s);
    }
    return out;
  };
  return f;
}

inline BaseVectorField make_radial_field(int n) {
  DMat id(n, n, 0.0);
  for (int i = 0; i < n; ++i) id(i, i) = 1.0;
  return make_linear_field(n, id, "radial");
}

// Rotation generator in the (i, j) coordinate plane (1-based).
inline BaseVectorField make_rotation_field(int n, int i, int j) {
  if (i < 1 || j < 1 || i > n || j > n || i == j)
    throw std::invalid_argument("rotation: plane indices out of range");
  DMat a(n, n, 0.0);
  a(i - 1, j - 1) = -1.0;
  a(j - 1, i - 1) = 1.0;
  return make_linear_field(n, a, "rotation(" + std::to_string(i) + "," + std::to_string(j) + ")");
}

// (x1^2, x1 x2, ..., x1 xn)
inline BaseVectorField make_projective_quadratic(int n) {
  BaseVectorField f;
  f.dim = n;
  f.name = "projective_quadratic";
  f.components = [n](const JetPoint& p, int order) {
    Jet x1 = Jet::variable(0, p.values[0], p.dim(), order);
    std::vector<Jet> out;
    out.reserve(n);
    out.push_back(x1 * x1);
    for (int i = 1; i < n; ++i)
      out.push_back(x1 * Jet::variable(i, p.values[i], p.dim(), order));
    return out;
  };
  return f;
}

inline BaseVectorField builtin_field(const std::string& name, const ParamMap& params, int n) {
  if (name == "translation") {
    auto it = params.find("v");
    std::vector<double> v(n, 0.0);
    if (it != params.end()) v = modeldetail::parse_vector(it->second, n, "translation v");
    else v[0] = 1.0;
    return make_constant_field(n, v, "translation");
  }
  if (name == "rotation") {
    int i = 1, j = 2;
    if (auto it = params.find("i"); it != params.end()) i = std::stoi(it->second);
    if (auto it = params.find("j"); it != params.end()) j = std::stoi(it->second);
    return make_rotation_field(n, i, j);
  }
  if (name == "radial") return make_radial_field(n);
  if (name == "linear") {
    auto it = params.find("a");
    if (it == params.end()) throw std::invalid_argument("linear: missing matrix parameter a");
    auto rows = modeldetail::parse_expr_matrix(it->second, n, "linear a");
    DMat a(n, n, 0.0);
    JetPoint origin = JetPoint::base(std::vector<double>(n, 0.0));
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) a(r, c) = rows[r][c].evaluate(origin, 0).value();
    return make_linear_field(n, a, "linear");
  }
  if (name == "projective_quadratic") return make_projective_quadratic(n);
  throw std::invalid_argument("unknown builtin field '" + name + "'");
}

// --- spec strings ---------------------------------------------------------

// Splits "builtin:name?k=v,..." — a comma starts a new parameter only when
// the segment contains '=', so vector values like v=1,0 stay intact.
inline std::pair<std::string, ParamMap> parse_builtin_spec(const std::string& body) {
  std::size_t q = body.find('?');
  std::string name = body.substr(0, q);
  ParamMap params;
  if (q == std::string::npos) return {name, params};
  std::string rest = body.substr(q + 1);
  std::string current_key;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= rest.size(); ++i) {
    if (i < rest.size() && rest[i] != ',') continue;
    std::string seg = rest.substr(start, i - start);
    start = i + 1;
    std::size_t eq = seg.find('=');
    if (eq != std::string::npos) {
      current_key = seg.substr(0, eq);
      params[current_key] = seg.substr(eq + 1);
    } else if (!current_key.empty()) {
      params[current_key] += "," + seg;
    } else if (!seg.empty()) {
      throw std::invalid_argument("malformed parameter list '" + rest + "'");
    }
  }
  return {name, params};
}

inline ModelEntry finsler_from_spec(const std::string& spec, int dim) {
  if (dim < 2) throw std::invalid_argument("finsler structures need dim >= 2");
  if (spec.rfind("builtin:", 0) == 0) {
    auto [name, params] = parse_builtin_spec(spec.substr(8));
    return builtin_finsler(name, params, dim);
  }
  if (spec.rfind("expr:", 0) == 0) return make_expr_finsler(spec.substr(5), dim);
  throw std::invalid_argument("finsler spec must start with 'builtin:' or 'expr:', got '" +
                              spec + "'");
}

inline BaseVectorField field_from_spec(const std::string& spec, int n) {
  if (spec.rfind("builtin:", 0) == 0) {
    auto [name, params] = parse_builtin_spec(spec.substr(8));
    return builtin_field(name, params, n);
  }
  if (spec.rfind("expr:", 0) == 0)
    return field_from_expr(FieldExpr::parse(spec.substr(5), n), "expr");
  throw std::invalid_argument("field spec must start with 'builtin:' or 'expr:', got '" + spec +
                              "'");
}

// --- ground truth ---------------------------------------------------------

struct GroundTruthEntry {
  std::string model_spec;
  int dim = 2;
  std::string field_spec;
  std::map<std::string, Verdict> expected;  // subset of the verdict keys
  std::optional<double> alpha;              // homothetic constant when forced
  // Pointwise expected factors where forced (checked per sample).
  std::function<double(const std::vector<double>&, const std::vector<double>&)> expected_phi;
  std::function<double(const std::vector<double>&, const std::vector<double>&)> expected_psi;
  std::string oracle;  // how the expectation was derived
};

inline const std::vector<GroundTruthEntry>& ground_truth_corpus() {
  static const std::vector<GroundTruthEntry> corpus = [] {
    using V = Verdict;
    std::vector<GroundTruthEntry> c;
    auto entry = [&](std::string model, int dim, std::string field,
                     std::map<std::string, Verdict> expected, std::string oracle) {
      GroundTruthEntry e;
      e.model_spec = std::move(model);
      e.dim = dim;
      e.field_spec = std::move(field);
      e.expected = std::move(expected);
      e.oracle = std::move(oracle);
      c.push_back(std::move(e));
      return c.size() - 1;
    };

    std::size_t i;
    i = entry("builtin:euclidean", 2, "builtin:radial",
              {{"projective", V::Holds},
               {"affine", V::Holds},
               {"conformal", V::Holds},
               {"homothetic", V::Holds},
               {"killing", V::Fails},
               {"volume_preserving", V::Fails}},
              "hand bracket: [X^c,S] = 0 for S = (y,0); X^c E = 2E; div X^c = 2n");
    c[i].alpha = 2.0;
    c[i].expected_phi = [](const std::vector<double>&, const std::vector<double>&) { return 2.0; };

    entry("builtin:euclidean", 2, "builtin:rotation?i=1,j=2",
          {{"projective", V::Holds},
           {"affine", V::Holds},
           {"conformal", V::Holds},
           {"homothetic", V::Holds},
           {"killing", V::Holds},
           {"volume_preserving", V::Holds}},
          "antisymmetric generator preserves |y|^2; linear fields are flat-spray symmetries");
    c.back().alpha = 0.0;

    entry("builtin:euclidean", 2, "builtin:translation?v=1,0",
          {{"affine", V::Holds},
           {"killing", V::Holds},
           {"volume_preserving", V::Holds}},
          "E is x-independent; constant fields are flat-spray symmetries");

    i = entry("builtin:euclidean", 2, "builtin:projective_quadratic",
              {{"projective", V::Holds},
               {"affine", V::Fails},
               {"conformal", V::Fails},
               {"volume_preserving", V::Fails}},
              "hand bracket: [X^c,S] = -2 y1 C for X = (x1^2, x1 x2)");
    c[i].expected_psi = [](const std::vector<double>&, const std::vector<double>& y) {
      return -2.0 * y[0];
    };

    entry("builtin:euclidean", 2, "builtin:linear?a=[1,0;0,2]",
          {{"projective", V::Holds},
           {"affine", V::Holds},
           {"conformal", V::Fails},
           {"killing", V::Fails},
           {"volume_preserving", V::Fails}},
          "linear fields are flat-spray symmetries; X^c E = y1^2 + 2 y2^2 not proportional to E");

    i = entry("builtin:euclidean", 2, "expr:[x1^2 - x2^2, 2*x1*x2]",
              {{"projective", V::Fails},
               {"affine", V::Fails},
               {"conformal", V::Holds},
               {"homothetic", V::Fails},
               {"killing", V::Fails},
               {"volume_preserving", V::Fails}},
              "holomorphic quadratic: L_X g_euclid = 4 x1 g by hand; bracket not parallel to C");
    c[i].expected_phi = [](const std::vector<double>& x, const std::vector<double>&) {
      return 4.0 * x[0];
    };

    entry("builtin:polar", 2, "builtin:translation?v=0,1",
          {{"projective", V::Holds},
           {"affine", V::Holds},
           {"conformal", V::Holds},
           {"homothetic", V::Holds},
           {"killing", V::Holds},
           {"volume_preserving", V::Holds}},
          "metric is x2-independent; density x1^2 is preserved");
    c.back().alpha = 0.0;

    entry("builtin:polar", 2, "builtin:translation?v=1,0",
          {{"projective", V::Fails},
           {"affine", V::Fails},
           {"conformal", V::Fails},
           {"killing", V::Fails},
           {"volume_preserving", V::Fails}},
          "hand bracket with G = (-x1 y2^2/2, y1 y2/x1): [X^c,S] y-part (y2^2, 2y1y2/x1^2) "
          "not parallel to y; L_X g = diag(0, 2 x1) not proportional to g; div = 2/x1");

    entry("builtin:randers?b=0.3,0", 2, "builtin:translation?v=1,0",
          {{"affine", V::Holds},
           {"killing", V::Holds},
           {"volume_preserving", V::Holds}},
          "E is x-independent");

    entry("builtin:randers?b=0.3,0", 2, "builtin:rotation?i=1,j=2",
          {{"affine", V::Holds},
           {"conformal", V::Fails},
           {"killing", V::Fails},
           {"volume_preserving", V::Fails}},
          "G = 0 so linear fields are symmetries; rotation does not preserve b.y; "
          "det g depends on the fibre direction");

    i = entry("builtin:randers?b=0.3,0", 2, "builtin:radial",
              {{"affine", V::Holds},
               {"conformal", V::Holds},
               {"homothetic", V::Holds},
               {"killing", V::Fails},
               {"volume_preserving", V::Fails}},
              "X^c = (x, y) and E x-independent 2-homogeneous: X^c E = CE = 2E");
    c[i].alpha = 2.0;

    entry("builtin:quartic", 2, "builtin:translation?v=0,1",
          {{"affine", V::Holds},
           {"killing", V::Holds},
           {"volume_preserving", V::Holds}},
          "E is x-independent");

    i = entry("builtin:quartic", 2, "builtin:radial",
              {{"affine", V::Holds},
               {"conformal", V::Holds},
               {"homothetic", V::Holds},
               {"killing", V::Fails}},
              "X^c E = CE = 2E for any x-independent energy");
    c[i].alpha = 2.0;

    entry("builtin:quartic", 2, "builtin:rotation?i=1,j=2",
          {{"affine", V::Holds},
           {"conformal", V::Fails},
           {"killing", V::Fails}},
          "G = 0 so linear fields are symmetries; the quartic norm is not rotation invariant");

    i = entry("builtin:riemannian?g=[exp(x1),0;0,exp(x1)]", 2, "builtin:translation?v=1,0",
              {{"projective", V::Holds},
               {"affine", V::Holds},
               {"conformal", V::Holds},
               {"homothetic", V::Holds},
               {"killing", V::Fails},
               {"volume_preserving", V::Fails}},
              "L_X (e^{x1} delta) = e^{x1} delta = g, so phi = 1 constant");
    c[i].alpha = 1.0;

    entry("builtin:riemannian?g=[exp(x1),0;0,exp(x1)]", 2, "builtin:translation?v=0,1",
          {{"affine", V::Holds},
           {"killing", V::Holds},
           {"volume_preserving", V::Holds}},
          "metric is x2-independent");

    return c;
  }();
  return corpus;
}

}  // namespace finsler
