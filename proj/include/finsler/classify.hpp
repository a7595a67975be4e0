#pragma once

// Sampled-residual detectors for the vector-field classes of a Finsler
// structure, plus the theorem-level cross-checks.  A verdict of "holds"
// means: consistent with the property at all drawn samples within
// tolerance — sampling cannot certify a global statement.  Residuals
// landing in (tol, 10*tol] yield "indeterminate", never a hard verdict.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "finsler/errors.hpp"
#include "finsler/fields.hpp"
#include "finsler/geometry.hpp"
#include "finsler/lie.hpp"
#include "finsler/linalg.hpp"
#include "finsler/sampling.hpp"

namespace finsler {

enum class Verdict { Holds, Fails, Indeterminate };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Holds: return "holds";
    case Verdict::Fails: return "fails";
    default: return "indeterminate";
  }
}

inline Verdict verdict_from_residual(double residual, double tol) {
  if (residual <= tol) return Verdict::Holds;
  if (residual <= 10.0 * tol) return Verdict::Indeterminate;
  return Verdict::Fails;
}

inline Verdict combine_verdicts(Verdict a, Verdict b) {
  if (a == Verdict::Fails || b == Verdict::Fails) return Verdict::Fails;
  if (a == Verdict::Indeterminate || b == Verdict::Indeterminate) return Verdict::Indeterminate;
  return Verdict::Holds;
}

struct FactorSample {
  std::vector<double> x, y;
  double value = 0.0;
};

struct DetectorResult {
  Verdict verdict = Verdict::Indeterminate;
  double max_residual = 0.0;
  double mean_residual = 0.0;
  std::map<std::string, double> residuals;  // named sub-residual maxima
  std::vector<FactorSample> factor_samples;
  double factor_mean = 0.0;
  double factor_global_spread = 0.0;
  double max_fibre_spread = 0.0;
  std::string note;
};

namespace classifydetail {

struct ResidualAccum {
  double max = 0.0, sum = 0.0;
  int count = 0;
  void add(double r) {
    max = std::max(max, r);
    sum += r;
    ++count;
  }
  double mean() const { return count ? sum / count : 0.0; }
};

inline double bracket_scale(const std::vector<double>& xc, const std::vector<double>& s) {
  return std::max({1.0, norm_inf(xc), norm_inf(s)});
}

}  // namespace classifydetail

// [X^c, S] = psi C: the x-part must vanish and the y-part must be
// parallel to y; psi-hat = <W_y, y>/<y, y> and must be 1-homogeneous
// along the fibre (C psi = psi).
inline DetectorResult projective_test(const FinslerStructure& fs, const BaseVectorField& x,
                                      const SampleSet& samples, double tol) {
  using classifydetail::ResidualAccum;
  TMVectorField xc = complete_lift(x);
  TMVectorField s = spray_field(fs);
  int n = fs.dim;
  DetectorResult res;
  ResidualAccum acc;
  double res_x = 0.0, res_par = 0.0, res_hom = 0.0;
  for (const auto& bs : samples.bases) {
    for (const auto& y : bs.ys) {
      SlitPoint p{bs.x, y};
      JetPoint tp = p.to_point();
      std::vector<double> w = bracket(xc, s, tp);
      double scale = classifydetail::bracket_scale(xc.value(tp), s.value(tp));
      double rx = 0.0;
      for (int i = 0; i < n; ++i) rx = std::max(rx, std::abs(w[i]));
      double yy = 0.0, wy = 0.0;
      for (int i = 0; i < n; ++i) {
        yy += y[i] * y[i];
        wy += w[n + i] * y[i];
      }
      double psi = wy / yy;
      double rpar = 0.0;
      for (int i = 0; i < n; ++i) rpar = std::max(rpar, std::abs(w[n + i] - psi * y[i]));
      // C psi = psi: compare against the doubled fibre point
      std::vector<double> y2(y);
      for (double& v : y2) v *= 2.0;
      SlitPoint p2{bs.x, y2};
      std::vector<double> w2 = bracket(xc, s, p2.to_point());
      double yy2 = 4.0 * yy, wy2 = 0.0;
      for (int i = 0; i < n; ++i) wy2 += w2[n + i] * y2[i];
      double psi2 = wy2 / yy2;
      double rhom = std::abs(psi2 - 2.0 * psi) / std::max(1.0, 2.0 * std::abs(psi));
      res_x = std::max(res_x, rx / scale);
      res_par = std::max(res_par, rpar / scale);
      res_hom = std::max(res_hom, rhom);
      acc.add(std::max({rx / scale, rpar / scale, rhom}));
      res.factor_samples.push_back({bs.x, y, psi});
    }
  }
  res.max_residual = acc.max;
  res.mean_residual = acc.mean();
  res.residuals["x_part"] = res_x;
  res.residuals["parallel_defect"] = res_par;
  res.residuals["factor_homogeneity"] = res_hom;
  res.verdict = verdict_from_residual(acc.max, tol);
  double sum = 0.0;
  for (const auto& fsam : res.factor_samples) sum += fsam.value;
  res.factor_mean = res.factor_samples.empty() ? 0.0 : sum / res.factor_samples.size();
  return res;
}

// [X^c, S] = 0.  When it holds, also verifies [X^c, Y^h] = [X,Y]^h for a
// few random fields Y.
inline DetectorResult affine_test(const FinslerStructure& fs, const BaseVectorField& x,
                                  const SampleSet& samples, double tol,
                                  std::uint64_t seed = 1, int num_random_fields = 5) {
  using classifydetail::ResidualAccum;
  TMVectorField xc = complete_lift(x);
  TMVectorField s = spray_field(fs);
  DetectorResult res;
  ResidualAccum acc;
  for (const auto& bs : samples.bases) {
    for (const auto& y : bs.ys) {
      SlitPoint p{bs.x, y};
      JetPoint tp = p.to_point();
      std::vector<double> w = bracket(xc, s, tp);
      double scale = classifydetail::bracket_scale(xc.value(tp), s.value(tp));
      acc.add(norm_inf(w) / scale);
    }
  }
  res.max_residual = acc.max;
  res.mean_residual = acc.mean();
  res.residuals["lie_symmetry"] = acc.max;
  res.verdict = verdict_from_residual(acc.max, tol);
  if (res.verdict == Verdict::Holds) {
    // [X^c, Y^h] = [X,Y]^h
    Rng rng = make_rng(seed).split(0x41);
    ResidualAccum hacc;
    for (int k = 0; k < num_random_fields; ++k) {
      BaseVectorField yf = random_polynomial_base_field(rng, fs.dim, "Y" + std::to_string(k));
      TMVectorField yh = horizontal_lift_field(fs, yf);
      TMVectorField bh = horizontal_lift_field(fs, base_bracket(*xc.base, yf));
      for (const auto& bs : samples.bases) {
        for (const auto& yy : bs.ys) {
          SlitPoint p{bs.x, yy};
          JetPoint tp = p.to_point();
          std::vector<double> lhs = bracket(xc, yh, tp);
          std::vector<double> rhs = bh.value(tp);
          double scale = std::max(1.0, norm_inf(rhs));
          double r = 0.0;
          for (std::size_t i = 0; i < lhs.size(); ++i)
            r = std::max(r, std::abs(lhs[i] - rhs[i]));
          hacc.add(r / scale);
        }
      }
    }
    res.residuals["horizontal_commutation"] = hacc.max;
    res.max_residual = std::max(res.max_residual, hacc.max);
    res.verdict = verdict_from_residual(res.max_residual, tol);
  }
  return res;
}

// Conformal detector.  The primary estimator is phi-hat = X^c E / E; the
// verdict requires fibrewise constancy of phi-hat plus agreement of the
// tensor characterizations L~_{X^c} g = phi g and L_{X^c} theta = phi theta,
// with L_{X^c} omega = phi omega + d phi ^ theta as an extra cross-check.
inline DetectorResult conformal_test(const FinslerStructure& fs, const BaseVectorField& x,
                                     const SampleSet& samples, double tol,
                                     double fibre_spread_tol) {
  using classifydetail::ResidualAccum;
  TMVectorField xc = complete_lift(x);
  int n = fs.dim;
  DetectorResult res;
  ResidualAccum cross;
  double res_metric = 0.0, res_theta = 0.0, res_omega = 0.0;
  bool e_positive = true, e_negative = true;
  int rejected = 0;
  double phi_min = 0.0, phi_max = 0.0;
  bool first = true;
  for (const auto& bs : samples.bases) {
    double fib_min = 0.0, fib_max = 0.0;
    bool fib_first = true;
    for (const auto& y : bs.ys) {
      SlitPoint p{bs.x, y};
      JetPoint tp = p.to_point();
      Jet e = fs.energy(tp, 0);
      double ymax = norm_inf(y);
      if (std::abs(e.value()) < 1e-8 * std::max(1.0, ymax * ymax)) {
        ++rejected;
        continue;
      }
      e_positive = e_positive && e.value() > 0.0;
      e_negative = e_negative && e.value() < 0.0;
      double phi = field_apply(xc, fs.energy, tp) / e.value();
      res.factor_samples.push_back({bs.x, y, phi});
      if (first || phi < phi_min) phi_min = phi;
      if (first || phi > phi_max) phi_max = phi;
      first = false;
      if (fib_first || phi < fib_min) fib_min = phi;
      if (fib_first || phi > fib_max) fib_max = phi;
      fib_first = false;

      // item: L~_{X^c} g = phi g
      DMat lg = tilde_lie_metric(fs, x, p);
      DMat g = metric(fs, p);
      double gscale = std::max(1.0, norm_inf(g) * std::max(1.0, std::abs(phi)));
      double rm = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) rm = std::max(rm, std::abs(lg(i, j) - phi * g(i, j)));
      rm /= gscale;

      // item: L_{X^c} theta = phi theta
      std::vector<double> lt = lie_form_theta(fs, x, p);
      std::vector<Jet> tj = theta_covector_jets(fs, p, 0);
      double tscale = 1.0;
      for (const auto& t : tj) tscale = std::max(tscale, std::abs(t.value()));
      tscale *= std::max(1.0, std::abs(phi));
      double rt = 0.0;
      for (int a = 0; a < 2 * n; ++a) rt = std::max(rt, std::abs(lt[a] - phi * tj[a].value()));
      rt /= tscale;

      // item: L_{X^c} omega = phi omega + d phi ^ theta  (x-gradient of phi)
      DMat lw = lie_form_omega(fs, x, p);
      DMat w = fundamental_form(fs, p);
      Jet phi_jet = conformal_factor_jet(fs, x, p, 1);
      std::vector<double> dphi(2 * n, 0.0);
      for (int a = 0; a < n; ++a) dphi[a] = phi_jet.derivative(a).value();
      double wscale = std::max(1.0, norm_inf(w) * std::max(1.0, std::abs(phi)));
      double rw = 0.0;
      for (int a = 0; a < 2 * n; ++a)
        for (int b = 0; b < 2 * n; ++b) {
          double wedge = dphi[a] * tj[b].value() - dphi[b] * tj[a].value();
          rw = std::max(rw, std::abs(lw(a, b) - phi * w(a, b) - wedge));
        }
      rw /= wscale;

      res_metric = std::max(res_metric, rm);
      res_theta = std::max(res_theta, rt);
      res_omega = std::max(res_omega, rw);
      cross.add(std::max({rm, rt, rw}));
    }
    if (!fib_first) res.max_fibre_spread = std::max(res.max_fibre_spread, fib_max - fib_min);
  }
  res.residuals["metric_eigen"] = res_metric;
  res.residuals["theta_eigen"] = res_theta;
  res.residuals["omega_eigen"] = res_omega;
  res.residuals["fibre_spread"] = res.max_fibre_spread;
  res.max_residual = cross.max;
  res.mean_residual = cross.mean();
  double sum = 0.0;
  for (const auto& fsam : res.factor_samples) sum += fsam.value;
  res.factor_mean = res.factor_samples.empty() ? 0.0 : sum / res.factor_samples.size();
  res.factor_global_spread = first ? 0.0 : phi_max - phi_min;
  if (res.factor_samples.empty() || (!e_positive && !e_negative)) {
    res.verdict = Verdict::Indeterminate;
    res.note = res.factor_samples.empty() ? "all samples rejected (|E| too small)"
                                          : "energy changes sign across samples";
    return res;
  }
  if (rejected > 0) res.note = std::to_string(rejected) + " samples rejected (|E| too small)";
  Verdict v_spread = verdict_from_residual(res.max_fibre_spread, fibre_spread_tol);
  Verdict v_cross = verdict_from_residual(cross.max, tol);
  res.verdict = combine_verdicts(v_spread, v_cross);
  return res;
}

// Homothetic = conformal with globally constant factor; alpha = mean.
inline DetectorResult homothetic_from_conformal(const DetectorResult& conformal,
                                                double constancy_tol) {
  DetectorResult res = conformal;
  res.residuals["global_spread"] = conformal.factor_global_spread;
  if (conformal.verdict == Verdict::Fails) {
    res.verdict = Verdict::Fails;
    return res;
  }
  Verdict v_const = verdict_from_residual(conformal.factor_global_spread, constancy_tol);
  res.verdict = combine_verdicts(conformal.verdict, v_const);
  res.max_residual = std::max(conformal.max_residual, conformal.factor_global_spread);
  return res;
}

// Killing = homothetic with alpha = 0.
inline DetectorResult killing_from_homothetic(const DetectorResult& homothetic,
                                              double constancy_tol) {
  DetectorResult res = homothetic;
  res.residuals["alpha"] = std::abs(homothetic.factor_mean);
  if (homothetic.verdict == Verdict::Fails) {
    res.verdict = Verdict::Fails;
    return res;
  }
  Verdict v_zero = verdict_from_residual(std::abs(homothetic.factor_mean), constancy_tol);
  res.verdict = combine_verdicts(homothetic.verdict, v_zero);
  return res;
}

inline DetectorResult homothetic_test(const FinslerStructure& fs, const BaseVectorField& x,
                                      const SampleSet& samples, const ClassTolerance& tol) {
  return homothetic_from_conformal(
      conformal_test(fs, x, samples, tol.rel_tol, tol.fibre_spread_tol), tol.constancy_tol);
}

inline DetectorResult killing_test(const FinslerStructure& fs, const BaseVectorField& x,
                                   const SampleSet& samples, const ClassTolerance& tol) {
  return killing_from_homothetic(homothetic_test(fs, x, samples, tol), tol.constancy_tol);
}

// div X^c = 0 at every sample.
inline DetectorResult volume_test(const FinslerStructure& fs, const BaseVectorField& x,
                                  const SampleSet& samples, double tol) {
  using classifydetail::ResidualAccum;
  TMVectorField xc = complete_lift(x);
  DetectorResult res;
  ResidualAccum acc;
  for (const auto& bs : samples.bases) {
    for (const auto& y : bs.ys) {
      SlitPoint p{bs.x, y};
      double d = divergence(fs, xc, p);
      res.factor_samples.push_back({bs.x, y, d});
      acc.add(std::abs(d));
    }
  }
  res.max_residual = acc.max;
  res.mean_residual = acc.mean();
  res.residuals["divergence"] = acc.max;
  res.verdict = verdict_from_residual(acc.max, tol);
  return res;
}

struct TheoremCheck {
  std::string id;
  std::string description;
  bool applicable = false;
  double residual = 0.0;
  double tolerance = 0.0;
  bool passed = true;  // meaningful only when applicable
};

// Implication checks: run whichever conclusions the detector verdicts
// license.  A failure here indicates an internal inconsistency, not a
// property of the field.
inline std::vector<TheoremCheck> theorem_suite(
    const FinslerStructure& fs, const BaseVectorField& x, const SampleSet& samples,
    const DetectorResult& projective, const DetectorResult& affine,
    const DetectorResult& conformal, const DetectorResult& homothetic,
    const DetectorResult& volume, const ClassTolerance& tol) {
  (void)tol;  // theorem tolerances are pinned per check
  std::vector<TheoremCheck> checks;
  auto holds = [](const DetectorResult& r) { return r.verdict == Verdict::Holds; };

  {
    TheoremCheck c{"homothetic_implies_affine",
                   "homothetic  =>  [X^c, S] = 0", holds(homothetic), 0.0, 1e-7};
    if (c.applicable) {
      c.residual = affine.residuals.count("lie_symmetry") ? affine.residuals.at("lie_symmetry")
                                                          : affine.max_residual;
      c.passed = c.residual <= c.tolerance;
    }
    checks.push_back(c);
  }
  {
    TheoremCheck c{"projective_and_conformal_implies_homothetic",
                   "projective and conformal  =>  conformal factor is constant",
                   holds(projective) && holds(conformal), 0.0, 1e-6};
    if (c.applicable) {
      c.residual = conformal.factor_global_spread;
      c.passed = c.residual <= c.tolerance;
    }
    checks.push_back(c);
  }
  {
    TheoremCheck c{"volume_and_projective_implies_affine",
                   "volume-preserving and projective  =>  [X^c, S] = 0",
                   holds(volume) && holds(projective), 0.0, 1e-7};
    if (c.applicable) {
      c.residual = affine.residuals.count("lie_symmetry") ? affine.residuals.at("lie_symmetry")
                                                          : affine.max_residual;
      c.passed = c.residual <= c.tolerance;
    }
    checks.push_back(c);
  }
  {
    TheoremCheck c{"volume_and_conformal_implies_killing",
                   "volume-preserving and conformal  =>  conformal factor vanishes",
                   holds(volume) && holds(conformal), 0.0, 1e-6};
    if (c.applicable) {
      double m = 0.0;
      for (const auto& fsam : conformal.factor_samples) m = std::max(m, std::abs(fsam.value));
      c.residual = m;
      c.passed = c.residual <= c.tolerance;
    }
    checks.push_back(c);
  }
  {
    TheoremCheck c{"conformal_implies_div_n_phi",
                   "conformal  =>  div X^c = n * conformal factor", holds(conformal), 0.0, 1e-6};
    if (c.applicable) {
      TMVectorField xc = complete_lift(x);
      double m = 0.0;
      for (const auto& bs : samples.bases) {
        for (const auto& y : bs.ys) {
          SlitPoint p{bs.x, y};
          JetPoint tp = p.to_point();
          double d = divergence(fs, xc, p);
          double phi = field_apply(xc, fs.energy, tp) / fs.energy(tp, 0).value();
          m = std::max(m, std::abs(d - fs.dim * phi));
        }
      }
      c.residual = m;
      c.passed = c.residual <= c.tolerance;
    }
    checks.push_back(c);
  }
  {
    TheoremCheck c{"affine_and_conformal_implies_sasaki_conformal",
                   "affine and conformal  =>  L_{X^c} G_sasaki = phi G_sasaki",
                   holds(affine) && holds(conformal), 0.0, 1e-6};
    if (c.applicable) {
      TMVectorField xc = complete_lift(x);
      double m = 0.0;
      for (const auto& bs : samples.bases) {
        for (const auto& y : bs.ys) {
          SlitPoint p{bs.x, y};
          JetPoint tp = p.to_point();
          double phi = field_apply(xc, fs.energy, tp) / fs.energy(tp, 0).value();
          DMat lg = lie_metric_sasaki(fs, x, p);
          DMat gs = sasaki_metric(fs, p);
          double scale = std::max(1.0, norm_inf(gs) * std::max(1.0, std::abs(phi)));
          double r = 0.0;
          for (int a = 0; a < lg.rows(); ++a)
            for (int b = 0; b < lg.cols(); ++b)
              r = std::max(r, std::abs(lg(a, b) - phi * gs(a, b)));
          m = std::max(m, r / scale);
        }
      }
      c.residual = m;
      c.passed = c.residual <= c.tolerance;
    }
    checks.push_back(c);
  }
  return checks;
}

struct ClassificationResult {
  std::map<std::string, Verdict> verdicts;
  DetectorResult projective, affine, conformal, homothetic, killing, volume;
  std::vector<TheoremCheck> theorem_checks;
  bool metric_positive_definite = true;
  int total_samples = 0;
};

// The verdict lattice (killing => homothetic => conformal, affine =>
// projective) must hold; a violating report is itself an error.
inline void validate_lattice(const ClassificationResult& r) {
  auto v = [&](const char* k) { return r.verdicts.at(k); };
  auto implies = [](Verdict a, Verdict b) {
    return a != Verdict::Holds || b != Verdict::Fails;
  };
  if (!implies(v("killing"), v("homothetic")) || !implies(v("homothetic"), v("conformal")) ||
      !implies(v("affine"), v("projective")))
    throw std::logic_error("classification: verdict lattice violated");
}

inline ClassificationResult classify_field(const FinslerStructure& fs, const BaseVectorField& x,
                                           const SampleSet& samples, const ClassTolerance& tol,
                                           std::uint64_t seed = 1) {
  ClassificationResult r;
  r.total_samples = samples.total();
  r.projective = projective_test(fs, x, samples, tol.rel_tol);
  r.affine = affine_test(fs, x, samples, tol.rel_tol, seed);
  r.conformal = conformal_test(fs, x, samples, tol.rel_tol, tol.fibre_spread_tol);
  r.homothetic = homothetic_from_conformal(r.conformal, tol.constancy_tol);
  r.killing = killing_from_homothetic(r.homothetic, tol.constancy_tol);
  r.volume = volume_test(fs, x, samples, tol.rel_tol);
  // numerically affine => projective; keep the lattice exact
  if (r.affine.verdict == Verdict::Holds && r.projective.verdict == Verdict::Indeterminate)
    r.projective.verdict = Verdict::Holds;
  r.verdicts["projective"] = r.projective.verdict;
  r.verdicts["affine"] = r.affine.verdict;
  r.verdicts["conformal"] = r.conformal.verdict;
  r.verdicts["homothetic"] = r.homothetic.verdict;
  r.verdicts["killing"] = r.killing.verdict;
  r.verdicts["volume_preserving"] = r.volume.verdict;
  r.theorem_checks =
      theorem_suite(fs, x, samples, r.projective, r.affine, r.conformal, r.homothetic, r.volume,
                    tol);
  for (const auto& bs : samples.bases) {
    for (const auto& y : bs.ys) {
      if (!positive_definite(metric(fs, {bs.x, y}))) {
        r.metric_positive_definite = false;
        break;
      }
    }
    if (!r.metric_positive_definite) break;
  }
  validate_lattice(r);
  return r;
}

}  // namespace finsler
