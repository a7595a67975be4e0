#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "finsler/classify.hpp"
#include "finsler/models.hpp"
#include "finsler/report.hpp"
#include "finsler/sampling.hpp"
#include "support/helpers.hpp"

using namespace finsler;

namespace {

SampleSet samples_for(const ModelEntry& m, std::uint64_t seed = 7, int bases = 10,
                      int fibres = 4) {
  SamplePlan plan;
  plan.seed = seed;
  plan.num_base_points = bases;
  plan.fibre_points_per_base = fibres;
  plan.box = m.default_box;
  return draw_samples(m.structure, plan, m.in_safe_domain);
}

}  // namespace

TEST_CASE("radial field on euclidean: homothetic with alpha 2, not volume preserving") {
  ModelEntry m = make_euclidean(2);
  SampleSet ss = samples_for(m);
  ClassificationResult r =
      classify_field(m.structure, make_radial_field(2), ss, ClassTolerance{}, 7);
  REQUIRE(r.verdicts.at("projective") == Verdict::Holds);
  REQUIRE(r.verdicts.at("affine") == Verdict::Holds);
  REQUIRE(r.verdicts.at("conformal") == Verdict::Holds);
  REQUIRE(r.verdicts.at("homothetic") == Verdict::Holds);
  REQUIRE(r.verdicts.at("killing") == Verdict::Fails);
  REQUIRE(r.verdicts.at("volume_preserving") == Verdict::Fails);
  REQUIRE(r.homothetic.factor_mean == Catch::Approx(2.0).margin(1e-9));
  // div X^c = 4 at every sample
  for (const auto& s : r.volume.factor_samples)
    REQUIRE(s.value == Catch::Approx(4.0).margin(1e-9));
  REQUIRE(r.metric_positive_definite);
}

TEST_CASE("rotation on euclidean: killing and volume preserving") {
  ModelEntry m = make_euclidean(2);
  SampleSet ss = samples_for(m);
  ClassificationResult r =
      classify_field(m.structure, make_rotation_field(2, 1, 2), ss, ClassTolerance{}, 7);
  REQUIRE(r.verdicts.at("killing") == Verdict::Holds);
  REQUIRE(r.verdicts.at("affine") == Verdict::Holds);
  REQUIRE(r.verdicts.at("volume_preserving") == Verdict::Holds);
  REQUIRE(r.verdicts.at("homothetic") == Verdict::Holds);
  REQUIRE(std::abs(r.homothetic.factor_mean) <= 1e-10);
}

TEST_CASE("projective quadratic field: projective with psi = -2 y1, not affine") {
  ModelEntry m = make_euclidean(2);
  SampleSet ss = samples_for(m, 11);
  BaseVectorField x = make_projective_quadratic(2);
  DetectorResult proj = projective_test(m.structure, x, ss, 1e-7);
  REQUIRE(proj.verdict == Verdict::Holds);
  for (const auto& s : proj.factor_samples)
    REQUIRE(s.value == Catch::Approx(-2.0 * s.y[0]).margin(1e-9));
  DetectorResult aff = affine_test(m.structure, x, ss, 1e-7);
  REQUIRE(aff.verdict == Verdict::Fails);
  ClassificationResult r = classify_field(m.structure, x, ss, ClassTolerance{}, 11);
  REQUIRE(r.verdicts.at("projective") == Verdict::Holds);
  REQUIRE(r.verdicts.at("affine") == Verdict::Fails);
  REQUIRE(r.verdicts.at("conformal") == Verdict::Fails);
}

TEST_CASE("x-quadratic field in one slot only fails the parallel check") {
  // X = (x1^2, 0): [X^c, S]_y = (-2 y1^2, 0), not parallel to y
  ModelEntry m = make_euclidean(2);
  SampleSet ss = samples_for(m, 13);
  BaseVectorField x = field_from_expr(FieldExpr::parse("[x1^2, 0]", 2), "xsq");
  DetectorResult proj = projective_test(m.structure, x, ss, 1e-7);
  REQUIRE(proj.verdict == Verdict::Fails);
  // the x-part residual stays zero; the defect is in parallelism
  REQUIRE(proj.residuals.at("x_part") <= 1e-10);
  REQUIRE(proj.residuals.at("parallel_defect") > 1e-3);
}

TEST_CASE("diagonal linear field with distinct eigenvalues is affine but not conformal") {
  ModelEntry m = make_euclidean(2);
  SampleSet ss = samples_for(m, 17);
  BaseVectorField x = builtin_field("linear", {{"a", "[1,0;0,2]"}}, 2);
  ClassificationResult r = classify_field(m.structure, x, ss, ClassTolerance{}, 17);
  REQUIRE(r.verdicts.at("affine") == Verdict::Holds);
  REQUIRE(r.verdicts.at("projective") == Verdict::Holds);
  REQUIRE(r.verdicts.at("conformal") == Verdict::Fails);
  REQUIRE(r.verdicts.at("homothetic") == Verdict::Fails);
  REQUIRE(r.verdicts.at("killing") == Verdict::Fails);
  REQUIRE(r.verdicts.at("volume_preserving") == Verdict::Fails);
}

TEST_CASE("holomorphic quadratic field: conformal with phi = 4 x1, not homothetic") {
  ModelEntry m = make_euclidean(2);
  SampleSet ss = samples_for(m, 19);
  BaseVectorField x = field_from_expr(FieldExpr::parse("[x1^2 - x2^2, 2*x1*x2]", 2), "holo");
  ClassificationResult r = classify_field(m.structure, x, ss, ClassTolerance{}, 19);
  REQUIRE(r.verdicts.at("conformal") == Verdict::Holds);
  REQUIRE(r.verdicts.at("homothetic") == Verdict::Fails);
  REQUIRE(r.verdicts.at("projective") == Verdict::Fails);
  for (const auto& s : r.conformal.factor_samples)
    REQUIRE(s.value == Catch::Approx(4.0 * s.x[0]).margin(1e-9));
  // conformal => div X^c = n phi must have been checked and passed
  bool found = false;
  for (const auto& c : r.theorem_checks)
    if (c.id == "conformal_implies_div_n_phi") {
      found = true;
      REQUIRE(c.applicable);
      REQUIRE(c.passed);
    }
  REQUIRE(found);
}

TEST_CASE("fibrewise constancy guard: conformal items fail together") {
  ModelEntry m = make_euclidean(2);
  SampleSet ss = samples_for(m, 23);
  BaseVectorField x = builtin_field("linear", {{"a", "[1,0;0,2]"}}, 2);
  DetectorResult c = conformal_test(m.structure, x, ss, 1e-7, 1e-6);
  REQUIRE(c.verdict == Verdict::Fails);
  REQUIRE(c.residuals.at("fibre_spread") > 1e-2);
  REQUIRE(c.residuals.at("metric_eigen") > 1e-2);
  REQUIRE(c.residuals.at("theta_eigen") > 1e-2);
}

TEST_CASE("verdict lattice is enforced") {
  ModelEntry m = make_euclidean(2);
  SampleSet ss = samples_for(m, 29);
  ClassificationResult r =
      classify_field(m.structure, make_rotation_field(2, 1, 2), ss, ClassTolerance{}, 29);
  REQUIRE_NOTHROW(validate_lattice(r));
  ClassificationResult broken = r;
  broken.verdicts["conformal"] = Verdict::Fails;  // killing holds but conformal fails
  REQUIRE_THROWS_AS(validate_lattice(broken), std::logic_error);
}

TEST_CASE("indeterminate band: residual between tol and 10 tol never hard-classifies") {
  REQUIRE(verdict_from_residual(0.5e-7, 1e-7) == Verdict::Holds);
  REQUIRE(verdict_from_residual(3e-7, 1e-7) == Verdict::Indeterminate);
  REQUIRE(verdict_from_residual(1.1e-6, 1e-7) == Verdict::Fails);
}

TEST_CASE("scale robustness: multiplying F by a constant changes nothing") {
  // euclidean scaled by c: E_c = c^2 E; verdicts and phi-hat unchanged
  ModelEntry eu = make_euclidean(2);
  ModelEntry scaled = eu;
  scaled.structure.energy = [](const JetPoint& p, int order) {
    Jet e = Jet::constant(0.0, p.dim(), order);
    for (int i = 0; i < 2; ++i) {
      Jet yi = Jet::variable(2 + i, p.values[2 + i], p.dim(), order);
      e += yi * yi;
    }
    return e * (0.5 * 9.0);  // F -> 3F
  };
  SampleSet ss = samples_for(eu, 31);
  for (const auto* field_name : {"radial", "rotation", "projective_quadratic"}) {
    BaseVectorField x = field_name == std::string("rotation")
                            ? make_rotation_field(2, 1, 2)
                            : builtin_field(field_name, {}, 2);
    ClassificationResult r1 = classify_field(eu.structure, x, ss, ClassTolerance{}, 31);
    ClassificationResult r2 = classify_field(scaled.structure, x, ss, ClassTolerance{}, 31);
    for (const auto& [k, v] : r1.verdicts) REQUIRE(r2.verdicts.at(k) == v);
    REQUIRE(r2.conformal.factor_mean ==
            Catch::Approx(r1.conformal.factor_mean).margin(1e-10));
  }
}

TEST_CASE("detector cross-check agreement on conformal entries") {
  // whenever phi-hat is fibrewise constant within tol, the tensor items
  // agree within 10x tol on the same samples
  ModelEntry m = make_randers(2, {0.3, 0.0});
  SampleSet ss = samples_for(m, 37);
  DetectorResult c = conformal_test(m.structure, make_radial_field(2), ss, 1e-7, 1e-6);
  REQUIRE(c.verdict == Verdict::Holds);
  REQUIRE(c.residuals.at("fibre_spread") <= 1e-6);
  REQUIRE(c.residuals.at("metric_eigen") <= 1e-6);
  REQUIRE(c.residuals.at("theta_eigen") <= 1e-6);
  REQUIRE(c.residuals.at("omega_eigen") <= 1e-6);
}

TEST_CASE("classification reports are deterministic") {
  ModelEntry m = make_randers(2, {0.3, 0.0});
  RunConfig cfg;
  cfg.command = "classify";
  cfg.finsler_spec = "builtin:randers?b=0.3,0";
  cfg.field_spec = "builtin:radial";
  cfg.dim = 2;
  cfg.plan.seed = 99;
  cfg.plan.num_base_points = 8;
  cfg.plan.fibre_points_per_base = 3;
  cfg.plan.box = m.default_box;
  auto run = [&] {
    SampleSet ss = draw_samples(m.structure, cfg.plan, m.in_safe_domain);
    ClassificationResult r =
        classify_field(m.structure, make_radial_field(2), ss, cfg.tolerances, cfg.plan.seed);
    Json j = classification_json(r, cfg);
    j.erase("generated_at_unix");
    return j.dump();
  };
  std::string a = run();
  std::string b = run();
  REQUIRE(a == b);
}

TEST_CASE("sampling exhaustion raises the indeterminate error") {
  ModelEntry m = make_euclidean(2);
  SamplePlan plan;
  plan.seed = 1;
  plan.num_base_points = 2;
  plan.fibre_points_per_base = 3;
  plan.box = m.default_box;
  // a domain predicate nothing satisfies
  REQUIRE_THROWS_AS(
      draw_samples(m.structure, plan, [](const SlitPoint&) { return false; }),
      SamplingError);
}

TEST_CASE("plan validation") {
  SamplePlan plan;
  plan.fibre_points_per_base = 2;  // < 3
  plan.box = Box::cube(2, -1, 1, -1, 1);
  REQUIRE_THROWS_AS(plan.validate(), std::invalid_argument);
}
