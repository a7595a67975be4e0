#pragma once

// Shared test oracles: finite differences, an independent Christoffel
// implementation for Riemannian-type models, a flow-pullback oracle for
// coordinate Lie derivatives, and the expression corpus.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "finsler/expr.hpp"
#include "finsler/finite_diff.hpp"
#include "finsler/geometry.hpp"
#include "finsler/jet.hpp"
#include "finsler/linalg.hpp"
#include "finsler/models.hpp"

namespace testsupport {

using namespace finsler;

inline bool close_rel(double a, double b, double tol, double floor_scale = 1.0) {
  return std::abs(a - b) <= tol * std::max({floor_scale, std::abs(a), std::abs(b)});
}

// G*^i = 1/2 Gamma^i_jk y^j y^k from the metric matrix of expressions,
// via metric inverse + derivative formula.  Independent of the spray
// solve: everything is computed from a(x) directly.
inline std::vector<double> christoffel_spray(const std::vector<std::vector<Expr>>& a_exprs,
                                             const SlitPoint& p) {
  const int n = p.dim();
  JetPoint xp = JetPoint::base(p.x);
  // a_ij and da_ij/dx_k
  DMat a(n, n, 0.0);
  std::vector<DMat> da(n, DMat(n, n, 0.0));  // da[k](i,j) = d a_ij / dx_k
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Jet v = a_exprs[i][j].evaluate(xp, 1);
      a(i, j) = v.value();
      for (int k = 0; k < n; ++k) da[k](i, j) = v.derivative(k).value();
    }
  DMat ainv = inverse(a);
  // Gamma^i_jk = 1/2 a^il (d_j a_lk + d_k a_jl - d_l a_jk)
  std::vector<double> g(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double gamma = 0.0;
        for (int l = 0; l < n; ++l)
          gamma += 0.5 * ainv(i, l) * (da[j](l, k) + da[k](j, l) - da[l](j, k));
        acc += 0.5 * gamma * p.y[j] * p.y[k];
      }
    g[i] = acc;
  }
  return g;
}

// Flow of a TM vector field by classic RK4, for the pullback oracle.
inline std::vector<double> flow_rk4(const TMVectorField& xi, std::vector<double> z, double t,
                                    int steps = 64) {
  const double h = t / steps;
  const int m = static_cast<int>(z.size());
  auto f = [&](const std::vector<double>& q) {
    JetPoint p;
    p.values = q;
    p.base_dim = m / 2;
    return xi.value(p);
  };
  for (int s = 0; s < steps; ++s) {
    std::vector<double> k1 = f(z), z2(m), k2, z3(m), k3, z4(m), k4;
    for (int i = 0; i < m; ++i) z2[i] = z[i] + 0.5 * h * k1[i];
    k2 = f(z2);
    for (int i = 0; i < m; ++i) z3[i] = z[i] + 0.5 * h * k2[i];
    k3 = f(z3);
    for (int i = 0; i < m; ++i) z4[i] = z[i] + h * k3[i];
    k4 = f(z4);
    for (int i = 0; i < m; ++i) z[i] += h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  }
  return z;
}

// (Phi_t^* T)_ab(p) = dPhi^c/dz^a dPhi^d/dz^b T_cd(Phi_t(p)) with the flow
// Jacobian estimated by central differences; then d/dt at 0 by a central
// difference in t.  A slow but fully independent check of the coordinate
// Lie derivative of a covariant 2-tensor.
inline DMat lie_pullback_oracle(const TMVectorField& xi,
                                const std::function<DMat(const std::vector<double>&)>& tensor,
                                const std::vector<double>& z0, double t = 1e-3,
                                double hjac = 1e-5) {
  const int m = static_cast<int>(z0.size());
  auto pullback = [&](double tt) {
    std::vector<double> zt = flow_rk4(xi, z0, tt);
    DMat tmat = tensor(zt);
    DMat jac(m, m, 0.0);
    for (int a = 0; a < m; ++a) {
      std::vector<double> zp = z0, zm = z0;
      zp[a] += hjac;
      zm[a] -= hjac;
      std::vector<double> fp = flow_rk4(xi, zp, tt);
      std::vector<double> fm = flow_rk4(xi, zm, tt);
      for (int c = 0; c < m; ++c) jac(c, a) = (fp[c] - fm[c]) / (2 * hjac);
    }
    DMat out(m, m, 0.0);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        double s = 0.0;
        for (int c = 0; c < m; ++c)
          for (int d = 0; d < m; ++d) s += jac(c, a) * jac(d, b) * tmat(c, d);
        out(a, b) = s;
      }
    return out;
  };
  DMat plus = pullback(t), minus = pullback(-t);
  DMat out(m, m, 0.0);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) out(a, b) = (plus(a, b) - minus(a, b)) / (2 * t);
  return out;
}

struct CorpusEntry {
  std::string source;
  int dim;
  bool fibre;
  std::vector<double> point;  // base values then fibre values when fibre
};

// 30 expressions exercising every operator and function, each with a safe
// evaluation point.
inline const std::vector<CorpusEntry>& expression_corpus() {
  static const std::vector<CorpusEntry> corpus = {
      {"x1^2", 1, false, {0.7}},
      {"x1*x2 + x2^3", 2, false, {0.7, -0.4}},
      {"sin(x1)", 1, false, {0.6}},
      {"cos(x1*x2)", 2, false, {0.7, -0.4}},
      {"exp(x1 - x2^2)", 2, false, {0.5, 0.3}},
      {"log(1 + x1^2 + x2^2)", 2, false, {0.7, -0.4}},
      {"sqrt(1 + x1^2)", 1, false, {0.8}},
      {"sqrt(y1^2 + y2^2)", 2, true, {0.1, 0.2, 0.6, 0.8}},
      {"(x1 + 2)/(x2 + 3)", 2, false, {0.7, -0.4}},
      {"y1^2/(1 + y2^2)", 2, true, {0.0, 0.0, 0.9, -0.5}},
      {"sqrt(y1^2 + y2^2) + 0.3*y1", 2, true, {0.0, 0.0, 0.7, 0.6}},
      {"0.5*(y1^2 + y2^2)", 2, true, {0.3, 0.1, 0.7, -0.8}},
      {"sin(x1)*cos(x2) + exp(0.3*x1*x2)", 2, false, {0.5, 0.8}},
      {"pow(x1, 3) - pow(x2, -2)", 2, false, {0.7, 1.3}},
      {"sqrt(exp(x1) + y1^2)", 1, true, {0.4, 0.9}},
      {"log(sqrt(x1^2 + 1) + 2)", 1, false, {0.9}},
      {"x1^4 - 3*x1^2*x2^2 + x2^4", 2, false, {0.8, 0.6}},
      {"1/(1 + exp(-x1))", 1, false, {0.2}},
      {"sin(y1)/(2 + cos(y2))", 2, true, {0.0, 0.0, 0.8, 0.5}},
      {"sqrt(y1^4 + y2^4)", 2, true, {0.0, 0.0, 0.8, 0.9}},
      {"exp(sin(x1) + cos(x2))", 2, false, {0.4, 0.7}},
      {"(y1 + y2)^3", 2, true, {0.0, 0.0, 0.6, 0.3}},
      {"x1^2*y1 + x2*y2^2", 2, true, {0.7, -0.3, 0.5, 0.8}},
      {"sqrt((y1 - 0.5*y2)^2 + y2^2 + 0.1)", 2, true, {0.0, 0.0, 0.4, 0.7}},
      {"log(exp(x1) + exp(x2))", 2, false, {0.3, -0.2}},
      {"cos(x1)^2 + sin(x1)^2", 1, false, {0.7}},
      {"x1/(x2^2 + 1) + x2/(x1^2 + 1)", 2, false, {0.6, -0.7}},
      {"exp(x1)*log(2 + sin(x2))", 2, false, {0.4, 0.9}},
      {"pow(1 + x1^2, 2)", 1, false, {0.5}},
      {"sqrt(1 + sin(x1)^2)", 1, false, {0.8}},
  };
  return corpus;
}

inline JetPoint corpus_point(const CorpusEntry& e) {
  if (!e.fibre) return JetPoint::base(e.point);
  std::vector<double> x(e.point.begin(), e.point.begin() + e.dim);
  std::vector<double> y(e.point.begin() + e.dim, e.point.end());
  return JetPoint::tangent(x, y);
}

// All multi-indices with |alpha| <= max_order over m variables.
inline std::vector<std::vector<int>> multi_indices_up_to(int m, int max_order) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(m, 0);
  std::function<void(int, int)> rec = [&](int pos, int remaining) {
    if (pos == m) {
      out.push_back(cur);
      return;
    }
    for (int v = 0; v <= remaining; ++v) {
      cur[pos] = v;
      rec(pos + 1, remaining - v);
    }
    cur[pos] = 0;
  };
  rec(0, max_order);
  return out;
}

}  // namespace testsupport
