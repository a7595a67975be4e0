#pragma once

// Vector fields on M and TM, canonical lifts, sections of the pull-back
// bundle, Lie brackets and the i/j/J operators.
//
// Coordinates on TM are z = (x^1..x^n, y^1..y^n).  A TM vector field has
// components (a^1..a^n, b^1..b^n); it is projectable when the a-components
// do not depend on y.

#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "finsler/expr.hpp"
#include "finsler/jet.hpp"

namespace finsler {

using ScalarField = std::function<Jet(const JetPoint&, int order)>;

// Jets of the x-part of a TM point, embedded into the 2n-variable space.
inline std::vector<Jet> promote_base_jets(std::vector<Jet> base_jets, int tm_dim) {
  if (base_jets.empty()) return base_jets;
  int n = base_jets[0].num_vars();
  std::vector<int> map(n);
  std::iota(map.begin(), map.end(), 0);
  for (auto& j : base_jets) j = j.remapped(tm_dim, map);
  return base_jets;
}

struct BaseVectorField {
  int dim = 0;
  std::string name;
  // Components at a base point, as jets in the n base variables.
  std::function<std::vector<Jet>(const JetPoint&, int order)> components;

  std::vector<Jet> eval(const JetPoint& base_point, int order) const {
    return components(base_point, order);
  }

  // Components along tau: evaluated at the x-part of a TM point and
  // embedded as 2n-variable jets.
  std::vector<Jet> eval_promoted(const JetPoint& tm_point, int order) const {
    JetPoint xp = JetPoint::base(std::vector<double>(
        tm_point.values.begin(), tm_point.values.begin() + tm_point.base_dim));
    return promote_base_jets(components(xp, order), tm_point.dim());
  }

  std::vector<double> value(const JetPoint& base_point) const {
    std::vector<Jet> js = components(base_point, 0);
    std::vector<double> out(js.size());
    for (std::size_t i = 0; i < js.size(); ++i) out[i] = js[i].value();
    return out;
  }
};

inline BaseVectorField field_from_expr(const FieldExpr& fe, std::string name = "expr") {
  BaseVectorField f;
  f.dim = fe.dim;
  f.name = std::move(name);
  f.components = [fe](const JetPoint& p, int order) {
    std::vector<Jet> out;
    out.reserve(fe.components.size());
    for (const Expr& e : fe.components) out.push_back(e.evaluate(p, order));
    return out;
  };
  return f;
}

// [X,Y] = DY.X - DX.Y on the base manifold.
inline BaseVectorField base_bracket(const BaseVectorField& x, const BaseVectorField& y) {
  BaseVectorField f;
  f.dim = x.dim;
  f.name = "[" + x.name + "," + y.name + "]";
  f.components = [x, y](const JetPoint& p, int order) {
    std::vector<Jet> xj = x.components(p, order + 1);
    std::vector<Jet> yj = y.components(p, order + 1);
    int n = static_cast<int>(xj.size());
    std::vector<Jet> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
      Jet s = Jet::constant(0.0, p.dim(), order);
      for (int b = 0; b < n; ++b)
        s += yj[i].derivative(b) * xj[b].truncated(order) -
             xj[i].derivative(b) * yj[b].truncated(order);
      out.push_back(s);
    }
    return out;
  };
  return f;
}

// A section of the pull-back bundle: its principal part is a jet-evaluable
// map (x,y) -> n components.
struct Section {
  int dim = 0;  // n
  std::string name;
  std::function<std::vector<Jet>(const JetPoint&, int order)> principal;
};

struct TMVectorField {
  int base_dim = 0;  // n; components are 2n
  std::string name;
  std::function<std::vector<Jet>(const JetPoint&, int order)> components;
  bool projectable = false;
  std::shared_ptr<const BaseVectorField> base;  // set when projectable over a known field

  std::vector<Jet> eval(const JetPoint& p, int order) const { return components(p, order); }

  std::vector<double> value(const JetPoint& p) const {
    std::vector<Jet> js = components(p, 0);
    std::vector<double> out(js.size());
    for (std::size_t i = 0; i < js.size(); ++i) out[i] = js[i].value();
    return out;
  }
};

// X^v = (0, X o tau)
inline TMVectorField vertical_lift(const BaseVectorField& x) {
  TMVectorField f;
  f.base_dim = x.dim;
  f.name = x.name + "^v";
  f.projectable = true;  // projects onto the zero field
  f.components = [x](const JetPoint& p, int order) {
    std::vector<Jet> comps(2 * x.dim, Jet::constant(0.0, p.dim(), order));
    std::vector<Jet> xj = x.eval_promoted(p, order);
    for (int i = 0; i < x.dim; ++i) comps[x.dim + i] = xj[i];
    return comps;
  };
  return f;
}

// X^c = (X o tau, DX.y)
inline TMVectorField complete_lift(const BaseVectorField& x) {
  TMVectorField f;
  f.base_dim = x.dim;
  f.name = x.name + "^c";
  f.projectable = true;
  f.base = std::make_shared<BaseVectorField>(x);
  int n = x.dim;
  f.components = [x, n](const JetPoint& p, int order) {
    JetPoint xp = JetPoint::base(
        std::vector<double>(p.values.begin(), p.values.begin() + p.base_dim));
    std::vector<Jet> xj = x.components(xp, order + 1);
    std::vector<Jet> comps;
    comps.reserve(2 * n);
    for (int i = 0; i < n; ++i)
      comps.push_back(promote_base_jets({xj[i].truncated(order)}, p.dim())[0]);
    for (int i = 0; i < n; ++i) {
      Jet s = Jet::constant(0.0, p.dim(), order);
      for (int j = 0; j < n; ++j) {
        Jet dxi = promote_base_jets({xj[i].derivative(j)}, p.dim())[0];
        s += dxi * Jet::variable(n + j, p.values[n + j], p.dim(), order);
      }
      comps.push_back(s);
    }
    return comps;
  };
  return f;
}

// Liouville field C = (0, y)
inline TMVectorField liouville(int n) {
  TMVectorField f;
  f.base_dim = n;
  f.name = "C";
  f.projectable = true;
  f.components = [n](const JetPoint& p, int order) {
    std::vector<Jet> comps(2 * n, Jet::constant(0.0, p.dim(), order));
    for (int i = 0; i < n; ++i)
      comps[n + i] = Jet::variable(n + i, p.values[n + i], p.dim(), order);
    return comps;
  };
  return f;
}

// Canonical section delta, principal part y.
inline Section canonical_delta(int n) {
  Section s;
  s.dim = n;
  s.name = "delta";
  s.principal = [n](const JetPoint& p, int order) {
    std::vector<Jet> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i)
      out.push_back(Jet::variable(n + i, p.values[n + i], p.dim(), order));
    return out;
  };
  return s;
}

// Basic section X-hat, principal part X o tau.
inline Section basic_section(const BaseVectorField& x) {
  Section s;
  s.dim = x.dim;
  s.name = x.name + "-hat";
  s.principal = [x](const JetPoint& p, int order) { return x.eval_promoted(p, order); };
  return s;
}

// i: sections -> vertical fields, (0, principal part).
inline TMVectorField i_map(const Section& s) {
  TMVectorField f;
  f.base_dim = s.dim;
  f.name = "i(" + s.name + ")";
  f.projectable = true;
  f.components = [s](const JetPoint& p, int order) {
    std::vector<Jet> comps(2 * s.dim, Jet::constant(0.0, p.dim(), order));
    std::vector<Jet> pr = s.principal(p, order);
    for (int i = 0; i < s.dim; ++i) comps[s.dim + i] = pr[i];
    return comps;
  };
  return f;
}

// j: TM fields -> sections, keeping the a-components.
inline Section j_map(const TMVectorField& xi) {
  Section s;
  s.dim = xi.base_dim;
  s.name = "j(" + xi.name + ")";
  s.principal = [xi](const JetPoint& p, int order) {
    std::vector<Jet> comps = xi.components(p, order);
    return std::vector<Jet>(comps.begin(), comps.begin() + xi.base_dim);
  };
  return s;
}

// Vertical endomorphism J = i o j, (a, b) -> (0, a).
inline TMVectorField J_map(const TMVectorField& xi) { return i_map(j_map(xi)); }

inline TMVectorField add_fields(const TMVectorField& u, const TMVectorField& v) {
  TMVectorField f;
  f.base_dim = u.base_dim;
  f.name = u.name + "+" + v.name;
  f.projectable = u.projectable && v.projectable;
  f.components = [u, v](const JetPoint& p, int order) {
    std::vector<Jet> a = u.components(p, order);
    std::vector<Jet> b = v.components(p, order);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    return a;
  };
  return f;
}

inline TMVectorField scale_field(const TMVectorField& u, double s) {
  TMVectorField f = u;
  f.components = [u, s](const JetPoint& p, int order) {
    std::vector<Jet> a = u.components(p, order);
    for (auto& j : a) j *= s;
    return a;
  };
  return f;
}

// f * xi for a scalar function f on TM.  Scaling a vertical field keeps it
// vertical (and projectable over the zero field); anything else loses
// projectability in general.
inline TMVectorField scale_field(const TMVectorField& u, const ScalarField& fn,
                                 bool still_projectable = false) {
  TMVectorField f;
  f.base_dim = u.base_dim;
  f.name = "f*" + u.name;
  f.projectable = still_projectable;
  f.components = [u, fn](const JetPoint& p, int order) {
    std::vector<Jet> a = u.components(p, order);
    Jet s = fn(p, order);
    for (auto& j : a) j = j * s;
    return a;
  };
  return f;
}

// [xi, eta] = D(eta).xi - D(xi).eta as a field; jets of the inputs are
// taken one order higher than requested.
inline TMVectorField bracket_field(const TMVectorField& xi, const TMVectorField& eta) {
  TMVectorField f;
  f.base_dim = xi.base_dim;
  f.name = "[" + xi.name + "," + eta.name + "]";
  f.projectable = xi.projectable && eta.projectable;
  if (xi.base && eta.base) {
    f.base = std::make_shared<BaseVectorField>(base_bracket(*xi.base, *eta.base));
  }
  f.components = [xi, eta](const JetPoint& p, int order) {
    std::vector<Jet> xj = xi.components(p, order + 1);
    std::vector<Jet> ej = eta.components(p, order + 1);
    int m = static_cast<int>(xj.size());
    std::vector<Jet> out;
    out.reserve(m);
    for (int a = 0; a < m; ++a) {
      Jet s = Jet::constant(0.0, p.dim(), order);
      for (int b = 0; b < m; ++b)
        s += ej[a].derivative(b) * xj[b].truncated(order) -
             xj[a].derivative(b) * ej[b].truncated(order);
      out.push_back(s);
    }
    return out;
  };
  return f;
}

// Pointwise bracket value.
inline std::vector<double> bracket(const TMVectorField& xi, const TMVectorField& eta,
                                   const JetPoint& p) {
  std::vector<Jet> xj = xi.components(p, 1);
  std::vector<Jet> ej = eta.components(p, 1);
  int m = static_cast<int>(xj.size());
  std::vector<double> out(m, 0.0);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      out[a] += ej[a].derivative(b).value() * xj[b].value() -
                xj[a].derivative(b).value() * ej[b].value();
  return out;
}

// xi f: directional derivative of a scalar function along a field.
inline double field_apply(const TMVectorField& xi, const ScalarField& fn, const JetPoint& p) {
  std::vector<double> v = xi.value(p);
  Jet f = fn(p, 1);
  double s = 0.0;
  for (int a = 0; a < static_cast<int>(v.size()); ++a) s += v[a] * f.derivative(a).value();
  return s;
}

// Projectability test for user-supplied fields: the a-components must not
// vary along the fibre.  Probes a fixed set of fibre perturbations.
inline bool is_projectable(const TMVectorField& xi, const JetPoint& p, double tol = 1e-9) {
  if (xi.projectable) return true;
  static const double probes[5][8] = {
      {0.37, -0.61, 0.22, 0.83, -0.45, 0.18, -0.74, 0.52},
      {-0.29, 0.47, -0.88, 0.13, 0.66, -0.35, 0.21, -0.57},
      {0.71, 0.09, -0.33, -0.52, 0.27, 0.81, -0.16, 0.44},
      {-0.63, -0.25, 0.58, 0.31, -0.79, 0.12, 0.49, -0.28},
      {0.15, 0.84, 0.41, -0.67, 0.38, -0.59, 0.26, 0.73}};
  int n = xi.base_dim;
  std::vector<double> ref = xi.value(p);
  double scale = 1.0;
  for (int i = 0; i < n; ++i) scale = std::max(scale, std::abs(ref[i]));
  for (const auto& probe : probes) {
    JetPoint q = p;
    for (int i = 0; i < n; ++i) q.values[n + i] = p.values[n + i] + probe[i % 8];
    std::vector<double> v = xi.value(q);
    for (int i = 0; i < n; ++i)
      if (std::abs(v[i] - ref[i]) > tol * scale) return false;
  }
  return true;
}

}  // namespace finsler
