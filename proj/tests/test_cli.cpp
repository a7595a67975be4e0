#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#ifndef FINSLER_CLI_PATH
#error "FINSLER_CLI_PATH must be defined by the build"
#endif

namespace {

using Json = nlohmann::ordered_json;

struct RunResult {
  int exit_code;
  Json report;
  bool has_report;
};

std::string temp_path(const std::string& tag) {
  return std::string("cli_test_") + tag + ".json";
}

RunResult run_cli(const std::string& args, const std::string& tag) {
  std::string out = temp_path(tag);
  std::remove(out.c_str());
  std::string cmd = std::string(FINSLER_CLI_PATH) + " " + args + " --out " + out +
                    " > /dev/null 2> /dev/null";
  int status = std::system(cmd.c_str());
  int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  RunResult r{code, Json{}, false};
  std::ifstream f(out);
  if (f) {
    f >> r.report;
    r.has_report = true;
  }
  return r;
}

int run_cli_bare(const std::string& args) {
  std::string cmd = std::string(FINSLER_CLI_PATH) + " " + args + " > /dev/null 2> /dev/null";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("classify: radial on euclidean reports homothetic alpha 2") {
  RunResult r = run_cli(
      "classify --finsler builtin:euclidean --dim 2 --field builtin:radial --seed 7", "radial");
  REQUIRE(r.exit_code == 0);
  REQUIRE(r.has_report);
  REQUIRE(r.report["verdicts"]["homothetic"] == "holds");
  REQUIRE(r.report["verdicts"]["killing"] == "fails");
  double alpha = r.report["homothetic_alpha"].get<double>();
  REQUIRE(alpha == Catch::Approx(2.0).margin(1e-8));
  REQUIRE(r.report["report_version"] == 1);
  REQUIRE(r.report["config"]["plan"]["seed"] == 7);
}

TEST_CASE("classify: expression finsler with a killing translation") {
  RunResult r = run_cli(
      "classify --finsler \"expr:sqrt(y1^2+y2^2)+0.3*y1\" --dim 2 "
      "--field \"builtin:translation?v=1,0\" --seed 3",
      "randers_expr");
  REQUIRE(r.exit_code == 0);
  REQUIRE(r.report["verdicts"]["killing"] == "holds");
}

TEST_CASE("classify: expression field that is projective but not affine") {
  RunResult r = run_cli(
      "classify --finsler builtin:euclidean --dim 2 --field \"expr:[x1^2, x1*x2]\" --seed 5",
      "projquad");
  REQUIRE(r.exit_code == 0);
  REQUIRE(r.report["verdicts"]["projective"] == "holds");
  REQUIRE(r.report["verdicts"]["affine"] == "fails");
}

TEST_CASE("verdicts are data: exit stays 0, bad specs exit 2") {
  REQUIRE(run_cli_bare("classify --finsler builtin:euclidean --dim 2 --field "
                       "\"builtin:linear?a=[1,0;0,2]\"") == 0);
  REQUIRE(run_cli_bare("classify --finsler builtin:nosuch --dim 2 --field builtin:radial") == 2);
  REQUIRE(run_cli_bare("classify --finsler \"expr:y1 + \" --dim 2 --field builtin:radial") == 2);
  REQUIRE(run_cli_bare("classify --finsler \"builtin:randers?b=1.5,0\" --dim 2 "
                       "--field builtin:radial") == 2);
}

TEST_CASE("spray subcommand prints the polar connection data") {
  RunResult r = run_cli(
      "spray --finsler builtin:polar --dim 2 --at \"2,0;1,1\" --format json", "spray");
  REQUIRE(r.exit_code == 0);
  REQUIRE(r.report["G"][0].get<double>() == Catch::Approx(-1.0).margin(1e-10));
  REQUIRE(r.report["G"][1].get<double>() == Catch::Approx(0.5).margin(1e-10));
  REQUIRE(r.report["homogeneity"]["max_defect_vs_2G"].get<double>() <= 1e-9);
  // point outside the safe domain: geometric degeneracy, exit 3
  REQUIRE(run_cli_bare("spray --finsler builtin:polar --dim 2 --at \"-1,0;1,1\"") == 3);
}

TEST_CASE("spray subcommand: flat G = 0 and the quartic homogeneity echo") {
  RunResult eu = run_cli(
      "spray --finsler builtin:euclidean --dim 2 --at \"0.4,-0.2;0.9,0.7\"", "spray_eu");
  REQUIRE(eu.exit_code == 0);
  REQUIRE(std::abs(eu.report["G"][0].get<double>()) <= 1e-12);
  REQUIRE(std::abs(eu.report["G"][1].get<double>()) <= 1e-12);

  RunResult q = run_cli(
      "spray --finsler builtin:quartic --dim 2 --at \"0.0,0.0;0.8,0.9\"", "spray_q");
  REQUIRE(q.exit_code == 0);
  REQUIRE(q.report["homogeneity"]["max_defect_vs_2G"].get<double>() <= 1e-9);
}

TEST_CASE("identities subcommand passes on builtin models") {
  for (const std::string& spec :
       {std::string("builtin:euclidean"), std::string("builtin:randers?b=0.3,0"),
        std::string("builtin:polar")}) {
    RunResult r = run_cli("identities --finsler \"" + spec +
                              "\" --dim 2 --seed 11 --base-points 6 --fibre-points 3",
                          "idents");
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.report["all_passed"] == true);
    bool saw_div = false;
    for (const auto& item : r.report["identities"]) {
      REQUIRE(item["passed"] == true);
      if (item["id"] == "div_liouville") {
        saw_div = true;
        REQUIRE(item["max_residual"].get<double>() <= 1e-8);
      }
    }
    REQUIRE(saw_div);
  }
}

TEST_CASE("identical configs give byte-identical reports modulo timestamp") {
  const std::string args =
      "classify --finsler \"builtin:randers?b=0.3,0\" --dim 2 --field builtin:radial "
      "--seed 42 --base-points 8 --fibre-points 3 --format json";
  RunResult a = run_cli(args, "det_a");
  RunResult b = run_cli(args, "det_b");
  REQUIRE(a.exit_code == 0);
  REQUIRE(b.exit_code == 0);
  Json ja = a.report, jb = b.report;
  ja.erase("generated_at_unix");
  jb.erase("generated_at_unix");
  REQUIRE(ja.dump() == jb.dump());
}

TEST_CASE("indeterminate sampling exits 4") {
  // box entirely below the slit floor: every fibre draw is rejected
  REQUIRE(run_cli_bare("classify --finsler builtin:euclidean --dim 2 --field builtin:radial "
                       "--box \"x:-1,1;y:0.0001,0.001\"") == 4);
}
