#pragma once

// JSON report assembly.  JSON is the single structured output; the table
// renderers in the CLI are a view of the same data.  Key order is fixed
// (ordered_json) so identical configs give byte-identical reports, up to
// the generated_at_unix field.

#include <ctime>
#include <string>
#include <vector>

#include <json.hpp>

#include "finsler/classify.hpp"
#include "finsler/geometry.hpp"
#include "finsler/identities.hpp"
#include "finsler/sampling.hpp"
#include "finsler/version.hpp"

namespace finsler {

using Json = nlohmann::ordered_json;

struct RunConfig {
  std::string command;
  std::string finsler_spec;
  std::string field_spec;
  int dim = 2;
  SamplePlan plan;
  ClassTolerance tolerances;
  std::string out_path;
  std::string format = "table";
  std::vector<double> at_x, at_y;  // for the spray command
};

inline Json box_json(const Box& box) {
  Json jx = Json::array(), jy = Json::array();
  for (const auto& [lo, hi] : box.x) jx.push_back({lo, hi});
  for (const auto& [lo, hi] : box.y) jy.push_back({lo, hi});
  return Json{{"x", jx}, {"y", jy}};
}

inline Json config_json(const RunConfig& cfg) {
  return Json{
      {"command", cfg.command},
      {"finsler", cfg.finsler_spec},
      {"field", cfg.field_spec},
      {"dim", cfg.dim},
      {"plan",
       {{"seed", cfg.plan.seed},
        {"base_points", cfg.plan.num_base_points},
        {"fibre_points_per_base", cfg.plan.fibre_points_per_base},
        {"box", box_json(cfg.plan.box)}}},
      {"tolerances",
       {{"rel_tol", cfg.tolerances.rel_tol},
        {"fibre_spread_tol", cfg.tolerances.fibre_spread_tol},
        {"constancy_tol", cfg.tolerances.constancy_tol}}},
  };
}

inline Json report_header(const std::string& kind, const RunConfig& cfg) {
  Json j;
  j["report_version"] = kReportVersion;
  j["artifact_version"] = kArtifactVersion;
  j["kind"] = kind;
  j["generated_at_unix"] = static_cast<long long>(std::time(nullptr));
  j["config"] = config_json(cfg);
  return j;
}

inline Json detector_json(const DetectorResult& d, bool with_samples) {
  Json j;
  j["verdict"] = to_string(d.verdict);
  j["max_residual"] = d.max_residual;
  j["mean_residual"] = d.mean_residual;
  Json rs = Json::object();
  for (const auto& [k, v] : d.residuals) rs[k] = v;
  j["residuals"] = rs;
  if (!d.note.empty()) j["note"] = d.note;
  if (!d.factor_samples.empty()) {
    j["factor"] = {{"mean", d.factor_mean},
                   {"global_spread", d.factor_global_spread},
                   {"max_fibre_spread", d.max_fibre_spread}};
    if (with_samples) {
      Json arr = Json::array();
      for (const auto& s : d.factor_samples)
        arr.push_back({{"x", s.x}, {"y", s.y}, {"value", s.value}});
      j["factor"]["samples"] = arr;
    }
  }
  return j;
}

inline Json classification_json(const ClassificationResult& r, const RunConfig& cfg,
                                bool with_samples = true) {
  Json j = report_header("classification", cfg);
  j["total_samples"] = r.total_samples;
  j["metric_positive_definite"] = r.metric_positive_definite;
  Json verdicts = Json::object();
  for (const auto& [k, v] : r.verdicts) verdicts[k] = to_string(v);
  j["verdicts"] = verdicts;
  j["detectors"] = {{"projective", detector_json(r.projective, with_samples)},
                    {"affine", detector_json(r.affine, false)},
                    {"conformal", detector_json(r.conformal, with_samples)},
                    {"homothetic", detector_json(r.homothetic, false)},
                    {"killing", detector_json(r.killing, false)},
                    {"volume_preserving", detector_json(r.volume, false)}};
  if (r.homothetic.verdict == Verdict::Holds) j["homothetic_alpha"] = r.homothetic.factor_mean;
  Json checks = Json::array();
  for (const auto& c : r.theorem_checks) {
    Json cj{{"id", c.id},
            {"description", c.description},
            {"applicable", c.applicable}};
    if (c.applicable) {
      cj["residual"] = c.residual;
      cj["tolerance"] = c.tolerance;
      cj["passed"] = c.passed;
    }
    checks.push_back(cj);
  }
  j["theorem_checks"] = checks;
  return j;
}

inline Json identities_json(const std::vector<IdentityResult>& results, const RunConfig& cfg) {
  Json j = report_header("identities", cfg);
  Json arr = Json::array();
  int failed = 0;
  for (const auto& r : results) {
    arr.push_back({{"id", r.id},
                   {"formula", r.formula},
                   {"max_residual", r.max_residual},
                   {"tolerance", r.tolerance},
                   {"samples", r.samples},
                   {"passed", r.passed()}});
    if (!r.passed()) ++failed;
  }
  j["identities"] = arr;
  j["all_passed"] = failed == 0;
  return j;
}

inline Json spray_json(const FinslerStructure& fs, const SlitPoint& p, const RunConfig& cfg) {
  Json j = report_header("spray", cfg);
  ConnectionData cd = connection(fs, p);
  int n = fs.dim;
  j["at"] = {{"x", p.x}, {"y", p.y}};
  j["G"] = cd.G;
  Json nmat = Json::array();
  for (int i = 0; i < n; ++i) {
    Json row = Json::array();
    for (int k = 0; k < n; ++k) row.push_back(cd.N(i, k));
    nmat.push_back(row);
  }
  j["N"] = nmat;
  Json bt = Json::array();
  for (int i = 0; i < n; ++i) {
    Json plane = Json::array();
    for (int a = 0; a < n; ++a) {
      Json row = Json::array();
      for (int b = 0; b < n; ++b) row.push_back(cd.B.at(i, a, b));
      plane.push_back(row);
    }
    bt.push_back(plane);
  }
  j["B"] = bt;
  DMat t = tension(fs, p);
  Json tj = Json::array();
  for (int i = 0; i < n; ++i) {
    Json row = Json::array();
    for (int k = 0; k < n; ++k) row.push_back(t(i, k));
    tj.push_back(row);
  }
  j["tension"] = tj;
  // torsion sample on the first coordinate plane
  {
    std::vector<double> v0(n, 0.0), v1(n, 0.0);
    v0[0] = 1.0;
    v1[std::min(1, n - 1)] = 1.0;
    j["torsion_e1_e2"] =
        torsion(fs, p, make_constant_field(n, v0, "e1"), make_constant_field(n, v1, "e2"));
  }
  // homogeneity echo: N.y vs 2G
  {
    Json ny = Json::array();
    double defect = 0.0;
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += cd.N(i, k) * p.y[k];
      ny.push_back(s);
      defect = std::max(defect, std::abs(s - 2.0 * cd.G[i]));
    }
    j["homogeneity"] = {{"N_times_y", ny}, {"max_defect_vs_2G", defect}};
  }
  return j;
}

}  // namespace finsler
