// finsler — classify vector fields on Finsler structures, run identity
// batteries, inspect sprays.  JSON is the structured output; the tables
// printed to stdout render the same data.
//
// Exit codes: 0 success (verdicts are data, not errors), 2 bad input spec,
// 3 geometric degeneracy, 4 indeterminate (sampling exhaustion).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "finsler/classify.hpp"
#include "finsler/errors.hpp"
#include "finsler/identities.hpp"
#include "finsler/models.hpp"
#include "finsler/report.hpp"
#include "finsler/version.hpp"

namespace {

using finsler::Json;

struct CliOptions {
  finsler::RunConfig cfg;
  std::string box_spec;
  std::string at_spec;
  double tol = 1e-7;
  double fibre_spread_tol = 1e-6;
  double constancy_tol = 1e-6;
};

std::vector<double> parse_csv_doubles(const std::string& s) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t comma = s.find(',', start);
    std::string part = s.substr(start, comma == std::string::npos ? comma : comma - start);
    if (!part.empty()) out.push_back(std::stod(part));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

// --box "xlo,xhi,ylo,yhi" or "x:lo,hi;y:lo,hi", applied per coordinate.
finsler::Box parse_box(const std::string& spec, int dim, const finsler::Box& fallback) {
  if (spec.empty()) return fallback;
  double xlo, xhi, ylo, yhi;
  if (spec.find(':') != std::string::npos) {
    finsler::Box b = fallback;
    std::size_t start = 0;
    while (start < spec.size()) {
      std::size_t semi = spec.find(';', start);
      std::string part = spec.substr(start, semi == std::string::npos ? semi : semi - start);
      if (part.size() < 2 || part[1] != ':')
        throw std::invalid_argument("--box: expected 'x:lo,hi;y:lo,hi'");
      std::vector<double> v = parse_csv_doubles(part.substr(2));
      if (v.size() != 2) throw std::invalid_argument("--box: intervals need two numbers");
      if (part[0] == 'x') b.x.assign(dim, {v[0], v[1]});
      else if (part[0] == 'y') b.y.assign(dim, {v[0], v[1]});
      else throw std::invalid_argument("--box: unknown coordinate block");
      if (semi == std::string::npos) break;
      start = semi + 1;
    }
    return b;
  }
  std::vector<double> v = parse_csv_doubles(spec);
  if (v.size() != 4) throw std::invalid_argument("--box: expected four numbers xlo,xhi,ylo,yhi");
  xlo = v[0];
  xhi = v[1];
  ylo = v[2];
  yhi = v[3];
  return finsler::Box::cube(dim, xlo, xhi, ylo, yhi);
}

void emit(const Json& j, const CliOptions& opt, const std::string& table) {
  if (opt.cfg.format == "json") {
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << table;
  }
  if (!opt.cfg.out_path.empty()) {
    std::ofstream f(opt.cfg.out_path);
    if (!f) throw std::runtime_error("cannot write report to " + opt.cfg.out_path);
    f << j.dump(2) << "\n";
  }
}

int run_classify(CliOptions& opt) {
  finsler::ModelEntry model = finsler::finsler_from_spec(opt.cfg.finsler_spec, opt.cfg.dim);
  finsler::BaseVectorField field = finsler::field_from_spec(opt.cfg.field_spec, opt.cfg.dim);
  opt.cfg.plan.box = parse_box(opt.box_spec, opt.cfg.dim, model.default_box);
  opt.cfg.tolerances = {opt.tol, opt.fibre_spread_tol, opt.constancy_tol};
  finsler::SampleSet samples =
      finsler::draw_samples(model.structure, opt.cfg.plan, model.in_safe_domain);
  finsler::ClassificationResult r = finsler::classify_field(
      model.structure, field, samples, opt.cfg.tolerances, opt.cfg.plan.seed);
  Json j = finsler::classification_json(r, opt.cfg);

  std::string table;
  table += "classification of field '" + opt.cfg.field_spec + "' on '" + opt.cfg.finsler_spec +
           "' (dim " + std::to_string(opt.cfg.dim) + ", " +
           std::to_string(r.total_samples) + " samples)\n";
  for (const auto& [k, v] : r.verdicts) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "  %-18s %-14s", k.c_str(), finsler::to_string(v));
    table += buf;
    if (k == "homothetic" && v == finsler::Verdict::Holds) {
      std::snprintf(buf, sizeof buf, " alpha = %.9g", r.homothetic.factor_mean);
      table += buf;
    }
    if (k == "conformal" && v == finsler::Verdict::Holds) {
      std::snprintf(buf, sizeof buf, " phi mean = %.9g (spread %.3g)",
                    r.conformal.factor_mean, r.conformal.factor_global_spread);
      table += buf;
    }
    table += "\n";
  }
  table += "theorem checks:\n";
  for (const auto& c : r.theorem_checks) {
    char buf[200];
    if (c.applicable)
      std::snprintf(buf, sizeof buf, "  %-45s %s  (residual %.3g <= %.1g)\n", c.id.c_str(),
                    c.passed ? "pass" : "FAIL", c.residual, c.tolerance);
    else
      std::snprintf(buf, sizeof buf, "  %-45s n/a\n", c.id.c_str());
    table += buf;
  }
  emit(j, opt, table);
  return 0;
}

int run_identities(CliOptions& opt) {
  finsler::ModelEntry model = finsler::finsler_from_spec(opt.cfg.finsler_spec, opt.cfg.dim);
  opt.cfg.plan.box = parse_box(opt.box_spec, opt.cfg.dim, model.default_box);
  opt.cfg.tolerances = {opt.tol, opt.fibre_spread_tol, opt.constancy_tol};
  finsler::SampleSet samples =
      finsler::draw_samples(model.structure, opt.cfg.plan, model.in_safe_domain);
  std::vector<finsler::IdentityResult> results =
      finsler::run_identity_battery(model, samples, opt.cfg.plan.seed);
  Json j = finsler::identities_json(results, opt.cfg);

  std::string table = "identity battery on '" + opt.cfg.finsler_spec + "' (dim " +
                      std::to_string(opt.cfg.dim) + ", " + std::to_string(samples.total()) +
                      " samples)\n";
  for (const auto& r : results) {
    char buf[220];
    std::snprintf(buf, sizeof buf, "  %-36s %-40s %s  (max residual %.3g, tol %.1g)\n",
                  r.id.c_str(), r.formula.c_str(), r.passed() ? "pass" : "FAIL",
                  r.max_residual, r.tolerance);
    table += buf;
  }
  emit(j, opt, table);
  return 0;
}

int run_spray(CliOptions& opt) {
  finsler::ModelEntry model = finsler::finsler_from_spec(opt.cfg.finsler_spec, opt.cfg.dim);
  std::size_t semi = opt.at_spec.find(';');
  if (semi == std::string::npos)
    throw std::invalid_argument("--at: expected 'x1,..,xn;y1,..,yn'");
  std::vector<double> x = parse_csv_doubles(opt.at_spec.substr(0, semi));
  std::vector<double> y = parse_csv_doubles(opt.at_spec.substr(semi + 1));
  if (static_cast<int>(x.size()) != opt.cfg.dim || static_cast<int>(y.size()) != opt.cfg.dim)
    throw std::invalid_argument("--at: point arity does not match --dim");
  finsler::SlitPoint p{x, y};
  if (model.in_safe_domain && !model.in_safe_domain(p))
    throw finsler::DegenerateError("spray: point outside the model's safe domain");
  Json j = finsler::spray_json(model.structure, p, opt.cfg);

  std::string table = "spray data of '" + opt.cfg.finsler_spec + "' at " + opt.at_spec + "\n";
  table += "  G = " + j["G"].dump() + "\n";
  table += "  N = " + j["N"].dump() + "\n";
  table += "  B = " + j["B"].dump() + "\n";
  table += "  tension = " + j["tension"].dump() + "\n";
  table += "  torsion(e1,e2) = " + j["torsion_e1_e2"].dump() + "\n";
  table += "  N.y = " + j["homogeneity"]["N_times_y"].dump() +
           "  (max defect vs 2G: " + j["homogeneity"]["max_defect_vs_2G"].dump() + ")\n";
  emit(j, opt, table);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finsler/spray geometry toolkit: canonical spray, connection, "
               "Dazord volume, and vector-field classification"};
  app.set_version_flag("--version", finsler::kArtifactVersion);
  app.require_subcommand(1);

  CliOptions opt;
  auto add_common = [&](CLI::App* sub, bool needs_field) {
    sub->add_option("--finsler", opt.cfg.finsler_spec,
                    "structure spec: builtin:<name>?k=v,... or expr:<F(x,y)>")
        ->required();
    if (needs_field)
      sub->add_option("--field", opt.cfg.field_spec,
                      "field spec: builtin:<name>?k=v,... or expr:[f1,...,fn]")
          ->required();
    sub->add_option("--dim", opt.cfg.dim, "base dimension n >= 2")->default_val(2);
    sub->add_option("--seed", opt.cfg.plan.seed, "sampling seed")->default_val(1);
    sub->add_option("--base-points", opt.cfg.plan.num_base_points)->default_val(20);
    sub->add_option("--fibre-points", opt.cfg.plan.fibre_points_per_base)->default_val(4);
    sub->add_option("--box", opt.box_spec, "sampling box: xlo,xhi,ylo,yhi or x:lo,hi;y:lo,hi");
    sub->add_option("--tol", opt.tol, "relative residual tolerance")->default_val(1e-7);
    sub->add_option("--fibre-spread-tol", opt.fibre_spread_tol)->default_val(1e-6);
    sub->add_option("--constancy-tol", opt.constancy_tol)->default_val(1e-6);
    sub->add_option("--out", opt.cfg.out_path, "write the JSON report here");
    sub->add_option("--format", opt.cfg.format, "json|table")->default_val("table");
  };

  CLI::App* classify = app.add_subcommand("classify", "classify a vector field");
  add_common(classify, true);
  CLI::App* identities = app.add_subcommand("identities", "run the identity battery");
  add_common(identities, false);
  CLI::App* spray = app.add_subcommand("spray", "print connection data at a point");
  add_common(spray, false);
  spray->add_option("--at", opt.at_spec, "evaluation point 'x1,..,xn;y1,..,yn'")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    opt.cfg.command = app.get_subcommands().front()->get_name();
    if (classify->parsed()) return run_classify(opt);
    if (identities->parsed()) return run_identities(opt);
    if (spray->parsed()) return run_spray(opt);
    return 1;
  } catch (const finsler::ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const finsler::DegenerateError& e) {
    std::cerr << "degeneracy: " << e.what() << "\n";
    return 3;
  } catch (const finsler::SamplingError& e) {
    std::cerr << "indeterminate: " << e.what() << "\n";
    return 4;
  } catch (const finsler::EvalError& e) {
    std::cerr << "evaluation error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
