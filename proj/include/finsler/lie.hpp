#pragma once

// Lie derivatives: the operator L~ along projectable fields acting on
// sections and on the metric tensor, and coordinate Lie derivatives of
// covectors / covariant 2-tensors on TM along complete lifts.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "finsler/fields.hpp"
#include "finsler/geometry.hpp"
#include "finsler/jet.hpp"
#include "finsler/linalg.hpp"

namespace finsler {

// L~_xi Y = V[xi, iY], defined for projectable xi only.  The bracket of a
// projectable field with a vertical one is vertical, so the result does
// not depend on the connection used for V.
inline std::vector<double> tilde_lie_section(const FinslerStructure& fs, const TMVectorField& xi,
                                             const Section& s, const SlitPoint& p) {
  JetPoint tp = p.to_point();
  if (!is_projectable(xi, tp))
    throw std::invalid_argument("tilde_lie_section: field '" + xi.name + "' is not projectable");
  std::vector<double> w = bracket(xi, i_map(s), tp);
  int n = fs.dim;
  DMat nm = connection_matrix(fs, p);
  std::vector<double> out(n, 0.0);
  for (int i = 0; i < n; ++i) {
    out[i] = w[n + i];
    for (int j = 0; j < n; ++j) out[i] += nm(i, j) * w[j];
  }
  return out;
}

// Same operator as a section (jets of the result are available), for
// nesting L~_xi L~_eta.
inline Section tilde_lie_section_field(const FinslerStructure& fs, const TMVectorField& xi,
                                       const Section& s) {
  Section out;
  out.dim = s.dim;
  out.name = "L~_" + xi.name + "(" + s.name + ")";
  TMVectorField br = bracket_field(xi, i_map(s));
  out.principal = [fs, br](const JetPoint& p, int order) {
    int n = br.base_dim;
    std::vector<Jet> w = br.components(p, order);
    SlitPoint sp{std::vector<double>(p.values.begin(), p.values.begin() + n),
                 std::vector<double>(p.values.begin() + n, p.values.end())};
    Mat<Jet> nm = connection_matrix_jets(fs, sp, order);
    std::vector<Jet> out_j;
    out_j.reserve(n);
    for (int i = 0; i < n; ++i) {
      Jet v = w[n + i];
      for (int j = 0; j < n; ++j) v += nm(i, j) * w[j];
      out_j.push_back(v);
    }
    return out_j;
  };
  return out;
}

// (L~_{X^c} g)_ij = X^k dg_ij/dx^k + y^l dX^k/dx^l dg_ij/dy^k
//                 + dX^k/dx^i g_kj + dX^k/dx^j g_ik
inline DMat tilde_lie_metric(const FinslerStructure& fs, const BaseVectorField& x,
                             const SlitPoint& p) {
  int n = fs.dim;
  Mat<Jet> g = metric_jets(fs, p, 1);
  JetPoint xp = JetPoint::base(p.x);
  std::vector<Jet> xj = x.components(xp, 1);
  DMat out(n, n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double v = 0.0;
      for (int k = 0; k < n; ++k) {
        v += xj[k].value() * g(i, j).derivative(k).value();
        double dxy = 0.0;  // y^l dX^k/dx^l
        for (int l = 0; l < n; ++l) dxy += p.y[l] * xj[k].derivative(l).value();
        v += dxy * g(i, j).derivative(n + k).value();
        v += xj[k].derivative(i).value() * g(k, j).value();
        v += xj[k].derivative(j).value() * g(i, k).value();
      }
      out(i, j) = v;
      out(j, i) = v;
    }
  return out;
}

// Coordinate Lie derivative of a covector field t on TM along a field xi:
//   (L_xi t)_a = xi^c d_c t_a + (d_a xi^c) t_c
inline std::vector<double> lie_covector(const std::vector<Jet>& xi, const std::vector<Jet>& t) {
  int m = static_cast<int>(xi.size());
  std::vector<double> out(m, 0.0);
  for (int a = 0; a < m; ++a)
    for (int c = 0; c < m; ++c)
      out[a] += xi[c].value() * t[a].derivative(c).value() +
                xi[c].derivative(a).value() * t[c].value();
  return out;
}

// Coordinate Lie derivative of a covariant 2-tensor T on TM:
//   (L_xi T)_ab = xi^c d_c T_ab + (d_a xi^c) T_cb + (d_b xi^c) T_ac
inline DMat lie_covariant2(const std::vector<Jet>& xi, const Mat<Jet>& t) {
  int m = static_cast<int>(xi.size());
  DMat out(m, m, 0.0);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      double v = 0.0;
      for (int c = 0; c < m; ++c)
        v += xi[c].value() * t(a, b).derivative(c).value() +
             xi[c].derivative(a).value() * t(c, b).value() +
             xi[c].derivative(b).value() * t(a, c).value();
      out(a, b) = v;
    }
  return out;
}

// Hilbert form as a 2n-covector field (theta_i dx^i) in jets.
inline std::vector<Jet> theta_covector_jets(const FinslerStructure& fs, const SlitPoint& p,
                                            int order) {
  int n = fs.dim;
  std::vector<Jet> theta = hilbert_jets(fs, p, order);
  std::vector<Jet> t(2 * n, Jet::constant(0.0, 2 * n, order));
  for (int i = 0; i < n; ++i) t[i] = theta[i];
  return t;
}

// L_{X^c} theta as a 2n-covector.
inline std::vector<double> lie_form_theta(const FinslerStructure& fs, const BaseVectorField& x,
                                          const SlitPoint& p) {
  JetPoint tp = p.to_point();
  std::vector<Jet> xi = complete_lift(x).components(tp, 1);
  return lie_covector(xi, theta_covector_jets(fs, p, 1));
}

// L_{X^c} omega as a 2n x 2n matrix.
inline DMat lie_form_omega(const FinslerStructure& fs, const BaseVectorField& x,
                           const SlitPoint& p) {
  JetPoint tp = p.to_point();
  std::vector<Jet> xi = complete_lift(x).components(tp, 1);
  return lie_covariant2(xi, fundamental_form_jets(fs, p, 1));
}

// L_{X^c} of the Sasaki extension.
inline DMat lie_metric_sasaki(const FinslerStructure& fs, const BaseVectorField& x,
                              const SlitPoint& p) {
  JetPoint tp = p.to_point();
  std::vector<Jet> xi = complete_lift(x).components(tp, 1);
  return lie_covariant2(xi, sasaki_jets(fs, p, 1));
}

// X^c E / E and its derivatives — the conformal-factor estimator.
inline Jet conformal_factor_jet(const FinslerStructure& fs, const BaseVectorField& x,
                                const SlitPoint& p, int order) {
  JetPoint tp = p.to_point();
  std::vector<Jet> xi = complete_lift(x).components(tp, order);
  Jet e = fs.energy(tp, order + 1);
  Jet xce = Jet::constant(0.0, tp.dim(), order);
  for (int a = 0; a < 2 * fs.dim; ++a) xce += xi[a] * e.derivative(a);
  return xce / e.truncated(order);
}

}  // namespace finsler
