#pragma once

// The runnable identity battery: every structural law of the apparatus,
// evaluated as a max residual over a sample set.  The classify module
// decides properties of a *field*; this battery checks the *machinery*.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "finsler/fields.hpp"
#include "finsler/geometry.hpp"
#include "finsler/lie.hpp"
#include "finsler/linalg.hpp"
#include "finsler/models.hpp"
#include "finsler/sampling.hpp"

namespace finsler {

struct IdentityResult {
  std::string id;
  std::string formula;
  double max_residual = 0.0;
  double tolerance = 0.0;
  int samples = 0;
  bool passed() const { return max_residual <= tolerance; }
};

namespace identitydetail {

inline BaseVectorField basis_field(int n, int j) {
  std::vector<double> v(n, 0.0);
  v[j] = 1.0;
  return make_constant_field(n, v, "e" + std::to_string(j + 1));
}

// eta with j(eta) = s, canonical choice (principal part, 0).
inline TMVectorField j_preimage(const Section& s) {
  TMVectorField f;
  f.base_dim = s.dim;
  f.name = "jpre(" + s.name + ")";
  f.components = [s](const JetPoint& p, int order) {
    std::vector<Jet> a = s.principal(p, order);
    std::vector<Jet> out = a;
    for (int i = 0; i < s.dim; ++i) out.push_back(Jet::constant(0.0, p.dim(), order));
    return out;
  };
  return f;
}

}  // namespace identitydetail

// Runs the full battery on one model.  Residual scales are pinned per
// identity as max(1, magnitudes of the operands).
inline std::vector<IdentityResult> run_identity_battery(const ModelEntry& model,
                                                        const SampleSet& samples,
                                                        std::uint64_t seed,
                                                        int lemma_pairs = 8) {
  using identitydetail::basis_field;
  using identitydetail::j_preimage;
  const FinslerStructure& fs = model.structure;
  const int n = fs.dim;
  std::vector<SlitPoint> pts = samples.flatten();
  const int num = static_cast<int>(pts.size());
  Rng rng = make_rng(seed).split(0x1d);

  std::vector<IdentityResult> out;
  auto push = [&](std::string id, std::string formula, double tol, double res) {
    out.push_back({std::move(id), std::move(formula), res, tol, num});
  };

  TMVectorField sf = spray_field(fs);
  TMVectorField cf = liouville(n);
  Section delta = canonical_delta(n);

  // random inputs, fixed across samples
  std::vector<BaseVectorField> rand_x;
  for (int k = 0; k < 3; ++k)
    rand_x.push_back(random_polynomial_base_field(rng, n, "X" + std::to_string(k)));
  std::vector<Section> rand_sec;
  for (int k = 0; k < 3; ++k)
    rand_sec.push_back(random_polynomial_section(rng, n, "s" + std::to_string(k)));
  Rng vec_rng = rng.split(0x2e);

  double r_jsc = 0, r_hom = 0, r_tens = 0, r_tors = 0, r_xhf = 0;
  double r_gdelta = 0, r_omegacs = 0, r_nabla = 0, r_ldelta = 0, r_pair = 0;
  double r_divc = 0, r_divs = 0;
  double r_bvv = 0, r_bcv = 0, r_bcc = 0, r_bCv = 0, r_bCc = 0;
  double r_jC = 0, r_lxg = 0, r_grif = 0, r_lcw = 0, r_daz = 0, r_theta = 0;

  for (const SlitPoint& p : pts) {
    JetPoint tp = p.to_point();
    std::vector<Jet> s = canonical_spray(fs, p, 2);
    double yscale = std::max(1.0, norm_inf(p.y));

    // JS = C: the x-components of S equal y
    for (int i = 0; i < n; ++i)
      r_jsc = std::max(r_jsc, std::abs(s[i].value() - p.y[i]) / yscale);

    // Euler relation N.y = 2G  ([C,S] = S)
    ConnectionData cd = connection(fs, p);
    double gs = std::max(1.0, norm_inf(cd.G));
    for (int i = 0; i < n; ++i) {
      double ny = 0.0;
      for (int j = 0; j < n; ++j) ny += cd.N(i, j) * p.y[j];
      gs = std::max(gs, std::abs(ny));
      r_hom = std::max(r_hom, std::abs(ny - 2.0 * cd.G[i]) / gs);
    }

    // tension = 0
    DMat t = tension(fs, p);
    r_tens = std::max(r_tens, norm_inf(t) / std::max(1.0, norm_inf(cd.N)));

    // torsion = 0 on basis pairs and one random pair
    {
      std::vector<double> tor = torsion(fs, p, basis_field(n, 0), basis_field(n, 1 % n));
      r_tors = std::max(r_tors, norm_inf(tor) / std::max(1.0, norm_inf(cd.N)));
      std::vector<double> tor2 = torsion(fs, p, rand_x[0], rand_x[1]);
      double sc = std::max({1.0, norm_inf(cd.N), norm_inf(rand_x[0].value(JetPoint::base(p.x))),
                            norm_inf(rand_x[1].value(JetPoint::base(p.x)))});
      r_tors = std::max(r_tors, norm_inf(tor2) / sc);
    }

    // X^h F = 0
    {
      Jet e = fs.energy(tp, 1);
      Jet f = sqrt(2.0 * e);
      double dfs = 1.0;
      for (int a = 0; a < 2 * n; ++a) dfs = std::max(dfs, std::abs(f.derivative(a).value()));
      for (int j = 0; j < n; ++j) {
        std::vector<double> xh = horizontal_lift_field(fs, basis_field(n, j)).value(tp);
        double xhf = 0.0;
        for (int a = 0; a < 2 * n; ++a) xhf += xh[a] * f.derivative(a).value();
        r_xhf = std::max(r_xhf, std::abs(xhf) / (dfs * std::max(1.0, norm_inf(xh))));
      }
    }

    // g(delta, delta) = 2E and theta(delta) = 2E
    {
      DMat g = metric(fs, p);
      Jet e = fs.energy(tp, 0);
      double gdd = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) gdd += g(i, j) * p.y[i] * p.y[j];
      double es = std::max(1.0, std::abs(2.0 * e.value()));
      r_gdelta = std::max(r_gdelta, std::abs(gdd - 2.0 * e.value()) / es);
      std::vector<double> th = hilbert_form(fs, p);
      r_theta = std::max(r_theta, std::abs(dot(th, p.y) - 2.0 * e.value()) / es);
    }

    // omega(C, S) = 2E
    {
      DMat w = fundamental_form(fs, p);
      Jet e = fs.energy(tp, 0);
      std::vector<double> cv = cf.value(tp), sv = sf.value(tp);
      double wcs = 0.0;
      for (int a = 0; a < 2 * n; ++a)
        for (int b = 0; b < 2 * n; ++b) wcs += cv[a] * w(a, b) * sv[b];
      r_omegacs =
          std::max(r_omegacs, std::abs(wcs - 2.0 * e.value()) / std::max(1.0, 2.0 * e.value()));
    }

    // vertical differential of delta: j[i X~, eta] = X~ for j(eta) = delta
    {
      const Section& xs = rand_sec[0];
      std::vector<double> w = bracket(i_map(xs), j_preimage(delta), tp);
      std::vector<Jet> xv = xs.principal(tp, 0);
      double sc = 1.0;
      for (const auto& jv : xv) sc = std::max(sc, std::abs(jv.value()));
      for (int i = 0; i < n; ++i)
        r_nabla = std::max(r_nabla, std::abs(w[i] - xv[i].value()) / sc);
    }

    // Grifone identity: j[i X~, S] = X~
    {
      const Section& xs = rand_sec[1];
      std::vector<double> w = bracket(i_map(xs), sf, tp);
      std::vector<Jet> xv = xs.principal(tp, 0);
      double sc = 1.0;
      for (const auto& jv : xv) sc = std::max(sc, std::abs(jv.value()));
      for (int i = 0; i < n; ++i)
        r_grif = std::max(r_grif, std::abs(w[i] - xv[i].value()) / sc);
    }

    // L~_{X^c} delta = 0
    {
      std::vector<double> v = tilde_lie_section(fs, complete_lift(rand_x[0]), delta, p);
      double sc = std::max(1.0, norm_inf(rand_x[0].value(JetPoint::base(p.x))));
      r_ldelta = std::max(r_ldelta, norm_inf(v) / sc);
    }

    // omega(J xi, eta) = g(j xi, j eta) on random vectors
    {
      DMat w = fundamental_form(fs, p);
      DMat g = metric(fs, p);
      for (int rep = 0; rep < 3; ++rep) {
        std::vector<double> xi(2 * n), eta(2 * n);
        for (auto& v : xi) v = vec_rng.uniform(-1.0, 1.0);
        for (auto& v : eta) v = vec_rng.uniform(-1.0, 1.0);
        double lhs = 0.0;
        for (int a = 0; a < n; ++a)  // J xi = (0, xi_x)
          for (int b = 0; b < 2 * n; ++b) lhs += xi[a] * w(n + a, b) * eta[b];
        double rhs = 0.0;
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) rhs += g(i, j) * xi[i] * eta[j];
        r_pair = std::max(r_pair, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
      }
    }

    // divergences
    r_divc = std::max(r_divc, std::abs(divergence(fs, cf, p) - n));
    r_divs = std::max(r_divs, std::abs(divergence(fs, sf, p)));

    // bracket rules
    {
      const BaseVectorField &x = rand_x[0], &y = rand_x[1];
      BaseVectorField xy = base_bracket(x, y);
      double sc = std::max({1.0, norm_inf(x.value(JetPoint::base(p.x))),
                            norm_inf(y.value(JetPoint::base(p.x)))});
      std::vector<double> b1 = bracket(vertical_lift(x), vertical_lift(y), tp);
      r_bvv = std::max(r_bvv, norm_inf(b1) / sc);
      std::vector<double> b2 = bracket(complete_lift(x), vertical_lift(y), tp);
      std::vector<double> e2 = vertical_lift(xy).value(tp);
      for (std::size_t a = 0; a < b2.size(); ++a)
        r_bcv = std::max(r_bcv, std::abs(b2[a] - e2[a]) / sc);
      std::vector<double> b3 = bracket(complete_lift(x), complete_lift(y), tp);
      std::vector<double> e3 = complete_lift(xy).value(tp);
      for (std::size_t a = 0; a < b3.size(); ++a)
        r_bcc = std::max(r_bcc, std::abs(b3[a] - e3[a]) / sc);
      std::vector<double> b4 = bracket(cf, vertical_lift(x), tp);
      std::vector<double> e4 = vertical_lift(x).value(tp);
      for (std::size_t a = 0; a < b4.size(); ++a)
        r_bCv = std::max(r_bCv, std::abs(b4[a] + e4[a]) / sc);
      std::vector<double> b5 = bracket(cf, complete_lift(x), tp);
      r_bCc = std::max(r_bCc, norm_inf(b5) / sc);
    }

    // [J, C] = J: [J xi, C] - J[xi, C] = J xi on a random TM field
    {
      TMVectorField xi = random_tm_field(vec_rng, n, "xi");
      std::vector<double> lhs1 = bracket(J_map(xi), cf, tp);
      std::vector<double> br = bracket(xi, cf, tp);
      std::vector<double> jxi = J_map(xi).value(tp);
      double sc = std::max(1.0, norm_inf(jxi));
      for (int i = 0; i < n; ++i) {
        // (J[xi,C])_{y_i} = br_x_i; x-components of everything vanish
        double v = lhs1[n + i] - br[i] - jxi[n + i];
        r_jC = std::max(r_jC, std::abs(v) / sc);
        r_jC = std::max(r_jC, std::abs(lhs1[i]) / sc);
      }
    }

    // (L~_{X^c} g)(j xi, j eta) = (L_{X^c} omega)(J xi, eta)
    {
      DMat lg = tilde_lie_metric(fs, rand_x[2], p);
      DMat lw = lie_form_omega(fs, rand_x[2], p);
      for (int rep = 0; rep < 2; ++rep) {
        std::vector<double> xi(2 * n), eta(2 * n);
        for (auto& v : xi) v = vec_rng.uniform(-1.0, 1.0);
        for (auto& v : eta) v = vec_rng.uniform(-1.0, 1.0);
        double lhs = 0.0, rhs = 0.0;
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) lhs += lg(i, j) * xi[i] * eta[j];
        for (int b = 0; b < 2 * n; ++b)
          for (int a = 0; a < n; ++a) rhs += xi[a] * lw(n + a, b) * eta[b];
        r_lxg = std::max(r_lxg, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
      }
    }

    // L_C omega = omega (coordinate Lie derivative along the Liouville field)
    {
      std::vector<Jet> cj = cf.components(tp, 1);
      DMat lcw = lie_covariant2(cj, fundamental_form_jets(fs, p, 1));
      DMat w = fundamental_form(fs, p);
      double sc = std::max(1.0, norm_inf(w));
      for (int a = 0; a < 2 * n; ++a)
        for (int b = 0; b < 2 * n; ++b)
          r_lcw = std::max(r_lcw, std::abs(lcw(a, b) - w(a, b)) / sc);
    }

    // |det omega| = (det g)^2
    {
      DMat w = fundamental_form(fs, p);
      DMat g = metric(fs, p);
      double dw = std::abs(determinant(w));
      double dg = determinant(g);
      r_daz = std::max(r_daz, std::abs(dw - dg * dg) / std::max(1.0, dg * dg));
    }
  }

  push("spray_vertical_endomorphism", "J(S) = C", 1e-8, r_jsc);
  push("spray_homogeneity", "N.y = 2G   ([C,S] = S)", 1e-8, r_hom);
  push("tension_vanishes", "V[X^h, C] = 0", 1e-8, r_tens);
  push("torsion_vanishes", "[X^h,Y^v] - [Y^h,X^v] - [X,Y]^v = 0", 1e-8, r_tors);
  push("horizontal_compatibility", "X^h F = 0", 1e-8, r_xhf);
  push("energy_from_metric", "g(delta, delta) = 2E", 1e-8, r_gdelta);
  push("hilbert_pairing", "theta(delta) = 2E", 1e-8, r_theta);
  push("energy_from_omega", "omega(C, S) = 2E", 1e-8, r_omegacs);
  push("vertical_diff_delta", "nabla^v_X delta = X", 1e-8, r_nabla);
  push("grifone_identity", "j[iX, S] = X", 1e-8, r_grif);
  push("lie_tilde_delta", "L~_{X^c} delta = 0", 1e-8, r_ldelta);
  push("omega_metric_pairing", "omega(J xi, eta) = g(j xi, j eta)", 1e-8, r_pair);
  push("div_liouville", "div C = n", 1e-7, r_divc);
  push("div_spray", "div S = 0", 1e-7, r_divs);
  push("bracket_vertical_vertical", "[X^v, Y^v] = 0", 1e-9, r_bvv);
  push("bracket_complete_vertical", "[X^c, Y^v] = [X,Y]^v", 1e-9, r_bcv);
  push("bracket_complete_complete", "[X^c, Y^c] = [X,Y]^c", 1e-9, r_bcc);
  push("bracket_liouville_vertical", "[C, X^v] = -X^v", 1e-9, r_bCv);
  push("bracket_liouville_complete", "[C, X^c] = 0", 1e-9, r_bCc);
  push("vertical_endo_liouville", "[J, C] = J", 1e-9, r_jC);
  push("metric_omega_compat", "(L~_{X^c} g)(j.,j.) = (L_{X^c} omega)(J., .)", 1e-8, r_lxg);
  push("lie_liouville_omega", "L_C omega = omega", 1e-8, r_lcw);
  push("dazord_determinant", "|det omega| = (det g)^2", 1e-8, r_daz);

  // Lemma-style operator laws on random projectable pairs
  {
    Rng lrng = make_rng(seed).split(0x3f);
    double r_comm = 0.0, r_jint = 0.0;
    for (int k = 0; k < lemma_pairs; ++k) {
      TMVectorField xi = random_projectable_field(lrng, n, "xi" + std::to_string(k));
      TMVectorField eta = random_projectable_field(lrng, n, "eta" + std::to_string(k));
      Section s = random_polynomial_section(lrng, n, "s" + std::to_string(k));
      TMVectorField br = bracket_field(xi, eta);
      TMVectorField eta_tm = random_tm_field(lrng, n, "etaTM" + std::to_string(k));
      int take = std::min<int>(6, static_cast<int>(pts.size()));
      for (int qi = 0; qi < take; ++qi) {
        const SlitPoint& p = pts[qi * pts.size() / take];
        JetPoint tp = p.to_point();
        Section ls_eta = tilde_lie_section_field(fs, eta, s);
        Section ls_xi = tilde_lie_section_field(fs, xi, s);
        std::vector<double> a = tilde_lie_section(fs, xi, ls_eta, p);
        std::vector<double> b = tilde_lie_section(fs, eta, ls_xi, p);
        std::vector<double> c = tilde_lie_section(fs, br, s, p);
        double sc = std::max({1.0, norm_inf(a), norm_inf(b), norm_inf(c)});
        for (int i = 0; i < n; ++i)
          r_comm = std::max(r_comm, std::abs(a[i] - b[i] - c[i]) / sc);

        // L~_{X^c}(j eta) = j(L_{X^c} eta) on a general TM field
        const BaseVectorField& x = *xi.base;
        std::vector<double> lhs = tilde_lie_section(fs, complete_lift(x), j_map(eta_tm), p);
        std::vector<double> rhs = bracket(complete_lift(x), eta_tm, tp);
        double sc2 = std::max(1.0, norm_inf(rhs));
        for (int i = 0; i < n; ++i)
          r_jint = std::max(r_jint, std::abs(lhs[i] - rhs[i]) / sc2);
      }
    }
    push("lie_tilde_commutator", "[L~_xi, L~_eta] = L~_[xi,eta]", 1e-8, r_comm);
    push("lie_tilde_j_intertwine", "L~_{X^c} (j eta) = j [X^c, eta]", 1e-8, r_jint);
  }

  // Connection independence of L~: V built from two different canonical
  // connections gives identical values.
  {
    ModelEntry other = model.name == "euclidean" ? make_randers(n, std::vector<double>(n, 0.2))
                                                 : make_euclidean(n);
    Rng orng = make_rng(seed).split(0x4a);
    TMVectorField xi = random_projectable_field(orng, n, "xi");
    Section s = random_polynomial_section(orng, n, "s");
    double r_ind = 0.0;
    int take = std::min<int>(10, static_cast<int>(pts.size()));
    for (int qi = 0; qi < take; ++qi) {
      const SlitPoint& p = pts[qi * pts.size() / take];
      std::vector<double> v1 = tilde_lie_section(fs, xi, s, p);
      std::vector<double> v2 = tilde_lie_section(other.structure, xi, s, p);
      for (int i = 0; i < n; ++i)
        r_ind = std::max(r_ind, std::abs(v1[i] - v2[i]) / std::max(1.0, std::abs(v1[i])));
    }
    push("lie_tilde_connection_independence", "L~ does not depend on the connection", 1e-12,
         r_ind);
  }

  return out;
}

}  // namespace finsler
