#pragma once

// The Finsler core.  From an energy function E = F^2/2 on the slit tangent
// bundle this derives, pointwise:
//
//   g_ij      = d^2 E / dy^i dy^j                    (metric tensor)
//   theta_i   = dE / dy^i                            (Hilbert form)
//   omega     = d(theta_i dx^i)                      (fundamental 2-form)
//   S         = solution of  omega(S, .) = -dE       (canonical spray)
//   N^i_j     = dG^i / dy^j,  B^i_jk = dN^i_j / dy^k (connection, Berwald)
//   rho       = |det omega|^(1/2)                    (Dazord density)
//   div xi    = sum_a d(rho xi^a)/dz^a / rho
//   G_s       = Sasaki extension of g
//
// All derivatives flow through jets, so every quantity is available as a
// jet and differentiates exactly.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "finsler/errors.hpp"
#include "finsler/fields.hpp"
#include "finsler/jet.hpp"
#include "finsler/linalg.hpp"

namespace finsler {

// A point of the slit tangent bundle (y != 0).
struct SlitPoint {
  std::vector<double> x, y;

  JetPoint to_point() const { return JetPoint::tangent(x, y); }
  int dim() const { return static_cast<int>(x.size()); }
};

struct FinslerStructure {
  int dim = 0;
  std::string name;
  ScalarField energy;  // E(x, y) as a jet over the 2n coordinates

  Jet energy_jet(const SlitPoint& p, int order) const { return energy(p.to_point(), order); }
};

struct ClassTolerance {
  double rel_tol = 1e-7;
  double fibre_spread_tol = 1e-6;
  double constancy_tol = 1e-6;
};

// Relative homogeneity defect |CE - 2E| / max(1, |2E|); must vanish for a
// genuine Finsler energy.
inline double homogeneity_defect(const FinslerStructure& fs, const SlitPoint& p) {
  Jet e = fs.energy_jet(p, 1);
  double ce = 0.0;
  int n = fs.dim;
  for (int i = 0; i < n; ++i) ce += p.y[i] * e.derivative(n + i).value();
  return std::abs(ce - 2.0 * e.value()) / std::max(1.0, std::abs(2.0 * e.value()));
}

inline Mat<Jet> metric_jets(const FinslerStructure& fs, const SlitPoint& p, int order) {
  Jet e = fs.energy_jet(p, order + 2);
  int n = fs.dim;
  Mat<Jet> g(n, n, Jet::constant(0.0, 2 * n, order));
  for (int i = 0; i < n; ++i) {
    Jet di = e.derivative(n + i);
    for (int j = i; j < n; ++j) {
      Jet gij = di.derivative(n + j);
      g(i, j) = gij;
      g(j, i) = gij;
    }
  }
  return g;
}

// g_ij(p), with the nondegeneracy check |det g| >= 1e-10 * scale^n.
inline DMat metric(const FinslerStructure& fs, const SlitPoint& p) {
  Mat<Jet> gj = metric_jets(fs, p, 0);
  int n = fs.dim;
  DMat g(n, n);
  double scale = 1.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      g(i, j) = gj(i, j).value();
      scale = std::max(scale, std::abs(g(i, j)));
    }
  double det;
  try {
    det = determinant(g);
  } catch (const DegenerateError&) {
    det = 0.0;
  }
  if (std::abs(det) < 1e-10 * std::pow(scale, n))
    throw DegenerateError("metric: |det g| below threshold; the structure is not Finsler here");
  return g;
}

inline std::vector<Jet> hilbert_jets(const FinslerStructure& fs, const SlitPoint& p, int order) {
  Jet e = fs.energy_jet(p, order + 1);
  int n = fs.dim;
  std::vector<Jet> theta;
  theta.reserve(n);
  for (int i = 0; i < n; ++i) theta.push_back(e.derivative(n + i));
  return theta;
}

// theta_i = dE/dy^i
inline std::vector<double> hilbert_form(const FinslerStructure& fs, const SlitPoint& p) {
  std::vector<Jet> tj = hilbert_jets(fs, p, 0);
  std::vector<double> out(tj.size());
  for (std::size_t i = 0; i < tj.size(); ++i) out[i] = tj[i].value();
  return out;
}

// Matrix of omega in the frame (dx^1..dx^n, dy^1..dy^n):
//   omega(d/dx^a, d/dx^b) = dtheta_b/dx^a - dtheta_a/dx^b
//   omega(d/dy^a, d/dx^b) = g_ab,  the xy block is its negative transpose,
//   the yy block vanishes.
inline Mat<Jet> fundamental_form_jets(const FinslerStructure& fs, const SlitPoint& p, int order) {
  int n = fs.dim;
  Jet e = fs.energy_jet(p, order + 2);
  std::vector<Jet> theta;
  theta.reserve(n);
  for (int i = 0; i < n; ++i) theta.push_back(e.derivative(n + i));
  Mat<Jet> w(2 * n, 2 * n, Jet::constant(0.0, 2 * n, order));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      w(a, b) = theta[b].derivative(a) - theta[a].derivative(b);
      Jet gab = theta[b].derivative(n + a);  // g_ab
      w(n + a, b) = gab;
      w(b, n + a) = -gab;
    }
  return w;
}

inline DMat fundamental_form(const FinslerStructure& fs, const SlitPoint& p) {
  Mat<Jet> wj = fundamental_form_jets(fs, p, 0);
  DMat w(wj.rows(), wj.cols());
  for (int i = 0; i < wj.rows(); ++i)
    for (int j = 0; j < wj.cols(); ++j) w(i, j) = wj(i, j).value();
  return w;
}

// Solves omega(S, .) = -dE for the spray components as jets, so that
// derivatives of S are available downstream.  The x-components come out
// equal to y (JS = C) and the y-components are -2 G^i.
inline std::vector<Jet> canonical_spray(const FinslerStructure& fs, const SlitPoint& p,
                                        int order) {
  int n = fs.dim;
  Jet e = fs.energy_jet(p, order + 2);
  std::vector<Jet> de;
  de.reserve(2 * n);
  for (int a = 0; a < 2 * n; ++a) de.push_back(e.derivative(a).truncated(order));
  std::vector<Jet> theta;
  theta.reserve(n);
  for (int i = 0; i < n; ++i) theta.push_back(e.derivative(n + i));
  Mat<Jet> w(2 * n, 2 * n, Jet::constant(0.0, 2 * n, order));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      w(a, b) = theta[b].derivative(a) - theta[a].derivative(b);
      Jet gab = theta[b].derivative(n + a);
      w(n + a, b) = gab;
      w(b, n + a) = -gab;
    }
  // omega(S, eta) = -dE(eta) for all eta  <=>  omega_mat . s = dE
  return solve_linear(w, de);
}

inline std::vector<double> spray_coefficients(const FinslerStructure& fs, const SlitPoint& p) {
  std::vector<Jet> s = canonical_spray(fs, p, 0);
  int n = fs.dim;
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = -0.5 * s[n + i].value();
  return g;
}

// The canonical spray as a TM vector field (for brackets and divergence).
inline TMVectorField spray_field(const FinslerStructure& fs) {
  TMVectorField f;
  f.base_dim = fs.dim;
  f.name = "S[" + fs.name + "]";
  f.projectable = false;  // second-order: the a-components are y
  f.components = [fs](const JetPoint& p, int order) {
    SlitPoint sp{std::vector<double>(p.values.begin(), p.values.begin() + p.base_dim),
                 std::vector<double>(p.values.begin() + p.base_dim, p.values.end())};
    return canonical_spray(fs, sp, order);
  };
  return f;
}

// Horizontal lift with respect to the spray-induced connection:
//   X^h = 1/2 (X^c + [X^v, S])
inline TMVectorField horizontal_lift_field(const FinslerStructure& fs, const BaseVectorField& x) {
  TMVectorField xc = complete_lift(x);
  TMVectorField br = bracket_field(vertical_lift(x), spray_field(fs));
  TMVectorField f = scale_field(add_fields(xc, br), 0.5);
  f.name = x.name + "^h";
  f.projectable = true;
  f.base = std::make_shared<BaseVectorField>(x);
  return f;
}

inline std::vector<double> horizontal_lift(const FinslerStructure& fs, const BaseVectorField& x,
                                           const SlitPoint& p) {
  return horizontal_lift_field(fs, x).value(p.to_point());
}

struct Tensor3 {
  int n = 0;
  std::vector<double> v;
  explicit Tensor3(int dim) : n(dim), v(static_cast<std::size_t>(dim) * dim * dim, 0.0) {}
  double& at(int i, int j, int k) { return v[(std::size_t(i) * n + j) * n + k]; }
  double at(int i, int j, int k) const { return v[(std::size_t(i) * n + j) * n + k]; }
};

struct ConnectionData {
  std::vector<double> G;  // spray coefficients, S = y^i d/dx^i - 2 G^i d/dy^i
  DMat N;                 // N^i_j = dG^i/dy^j
  Tensor3 B;              // B^i_jk = d^2 G^i / dy^j dy^k
  ConnectionData(int n) : G(n, 0.0), N(n, n, 0.0), B(n) {}
};

// N^i_j as a matrix of jets (from spray jets one order higher).
inline Mat<Jet> connection_matrix_jets(const FinslerStructure& fs, const SlitPoint& p,
                                       int order) {
  std::vector<Jet> s = canonical_spray(fs, p, order + 1);
  int n = fs.dim;
  Mat<Jet> nm(n, n, Jet::constant(0.0, 2 * n, order));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) nm(i, j) = s[n + i].derivative(n + j) * (-0.5);
  return nm;
}

inline DMat connection_matrix(const FinslerStructure& fs, const SlitPoint& p) {
  Mat<Jet> nj = connection_matrix_jets(fs, p, 0);
  DMat nm(nj.rows(), nj.cols());
  for (int i = 0; i < nj.rows(); ++i)
    for (int j = 0; j < nj.cols(); ++j) nm(i, j) = nj(i, j).value();
  return nm;
}

// Full connection data, cross-validated against the horizontal-lift
// formula: the fibre part of 1/2 (X^c + [X^v, S]) for X = e_j must equal
// -N^._j.  A mismatch indicates an internal inconsistency, not bad input.
inline ConnectionData connection(const FinslerStructure& fs, const SlitPoint& p) {
  int n = fs.dim;
  std::vector<Jet> s = canonical_spray(fs, p, 2);
  ConnectionData c(n);
  for (int i = 0; i < n; ++i) {
    c.G[i] = -0.5 * s[n + i].value();
    Jet gi = s[n + i] * (-0.5);
    for (int j = 0; j < n; ++j) {
      Jet nij = gi.derivative(n + j);
      c.N(i, j) = nij.value();
      for (int k = 0; k < n; ++k) c.B.at(i, j, k) = nij.derivative(n + k).value();
    }
  }
  double scale = std::max(1.0, norm_inf(c.N));
  JetPoint tp = p.to_point();
  for (int j = 0; j < n; ++j) {
    BaseVectorField ej;
    ej.dim = n;
    ej.name = "e" + std::to_string(j + 1);
    int jj = j;
    ej.components = [n, jj](const JetPoint& q, int order) {
      std::vector<Jet> out(n, Jet::constant(0.0, q.dim(), order));
      out[jj] = Jet::constant(1.0, q.dim(), order);
      return out;
    };
    std::vector<double> xh = horizontal_lift_field(fs, ej).value(tp);
    for (int i = 0; i < n; ++i) {
      if (std::abs(xh[n + i] + c.N(i, j)) > 1e-9 * scale)
        throw std::logic_error("connection: horizontal-lift cross-check failed");
    }
  }
  return c;
}

// Tension t(e_j) = V[e_j^h, C]; columns indexed by the basis field.
// Vanishes for the spray-induced connection (it is homogeneous).
inline DMat tension(const FinslerStructure& fs, const SlitPoint& p);

// Torsion on basic sections:
//   i T(X-hat, Y-hat) = [X^h, Y^v] - [Y^h, X^v] - [X,Y]^v.
// Vanishes for the spray-induced connection.
inline std::vector<double> torsion(const FinslerStructure& fs, const SlitPoint& p,
                                   const BaseVectorField& x, const BaseVectorField& y) {
  JetPoint tp = p.to_point();
  TMVectorField xh = horizontal_lift_field(fs, x);
  TMVectorField yh = horizontal_lift_field(fs, y);
  std::vector<double> t1 = bracket(xh, vertical_lift(y), tp);
  std::vector<double> t2 = bracket(yh, vertical_lift(x), tp);
  std::vector<double> t3 = vertical_lift(base_bracket(x, y)).value(tp);
  int n = fs.dim;
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = t1[n + i] - t2[n + i] - t3[n + i];
  return out;
}

// Dazord density rho = |det omega|^(1/2) as a jet; the orientation sign
// cancels in the divergence.
inline Jet dazord_density(const FinslerStructure& fs, const SlitPoint& p, int order) {
  Mat<Jet> w = fundamental_form_jets(fs, p, order);
  Jet det = determinant(w);
  if (det.value() < 0.0) det = -det;
  return sqrt(det);
}

// div xi = sum_a d xi^a/dz^a + (1/rho) sum_a xi^a d rho/dz^a
inline double divergence(const FinslerStructure& fs, const TMVectorField& xi,
                         const SlitPoint& p) {
  JetPoint tp = p.to_point();
  std::vector<Jet> xj = xi.components(tp, 1);
  Jet rho = dazord_density(fs, p, 1);
  double div = 0.0;
  for (int a = 0; a < 2 * fs.dim; ++a)
    div += xj[a].derivative(a).value() + xj[a].value() * rho.derivative(a).value() / rho.value();
  return div;
}

// Vertical mapping of the spray-induced connection: V(xi) = b + N.a.
inline std::vector<double> vertical_map(const FinslerStructure& fs, const TMVectorField& xi,
                                        const SlitPoint& p) {
  int n = fs.dim;
  std::vector<double> v = xi.value(p.to_point());
  DMat nm = connection_matrix(fs, p);
  std::vector<double> out(n, 0.0);
  for (int i = 0; i < n; ++i) {
    out[i] = v[n + i];
    for (int j = 0; j < n; ++j) out[i] += nm(i, j) * v[j];
  }
  return out;
}

inline DMat tension(const FinslerStructure& fs, const SlitPoint& p) {
  int n = fs.dim;
  TMVectorField c = liouville(n);
  DMat t(n, n, 0.0);
  JetPoint tp = p.to_point();
  DMat nm = connection_matrix(fs, p);
  for (int j = 0; j < n; ++j) {
    BaseVectorField ej;
    ej.dim = n;
    ej.name = "e" + std::to_string(j + 1);
    int jj = j;
    ej.components = [n, jj](const JetPoint& q, int order) {
      std::vector<Jet> out(n, Jet::constant(0.0, q.dim(), order));
      out[jj] = Jet::constant(1.0, q.dim(), order);
      return out;
    };
    std::vector<double> w = bracket(horizontal_lift_field(fs, ej), c, tp);
    for (int i = 0; i < n; ++i) {
      double vi = w[n + i];
      for (int k = 0; k < n; ++k) vi += nm(i, k) * w[k];
      t(i, j) = vi;
    }
  }
  return t;
}

// Sasaki extension in the coordinate frame.  With a = x-components,
// b = y-components and V(xi) = b + N.a:
//   G(xi, eta) = (j xi)^T g (j eta) + (V xi)^T g (V eta)
// which block-assembles as [[g + N^T g N, N^T g], [g N, g]].
inline Mat<Jet> sasaki_jets(const FinslerStructure& fs, const SlitPoint& p, int order) {
  int n = fs.dim;
  Mat<Jet> g = metric_jets(fs, p, order);
  Mat<Jet> nm = connection_matrix_jets(fs, p, order);
  Mat<Jet> gs(2 * n, 2 * n, Jet::constant(0.0, 2 * n, order));
  Mat<Jet> gn(n, n, Jet::constant(0.0, 2 * n, order));  // g N
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Jet s = Jet::constant(0.0, 2 * n, order);
      for (int k = 0; k < n; ++k) s += g(i, k) * nm(k, j);
      gn(i, j) = s;
    }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Jet ntgn = Jet::constant(0.0, 2 * n, order);  // (N^T g N)_ij
      for (int k = 0; k < n; ++k) ntgn += nm(k, i) * gn(k, j);
      gs(i, j) = g(i, j) + ntgn;
      Jet ntg = Jet::constant(0.0, 2 * n, order);  // (N^T g)_ij
      for (int k = 0; k < n; ++k) ntg += nm(k, i) * g(k, j);
      gs(i, n + j) = ntg;
      gs(n + i, j) = gn(i, j);
      gs(n + i, n + j) = g(i, j);
    }
  return gs;
}

inline DMat sasaki_metric(const FinslerStructure& fs, const SlitPoint& p) {
  Mat<Jet> gj = sasaki_jets(fs, p, 0);
  DMat g(gj.rows(), gj.cols());
  for (int i = 0; i < gj.rows(); ++i)
    for (int j = 0; j < gj.cols(); ++j) g(i, j) = gj(i, j).value();
  return g;
}

}  // namespace finsler
