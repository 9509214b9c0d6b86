#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "doctest.h"
#include "json.hpp"
#include "weylrec/errors.hpp"

namespace fs = std::filesystem;
using weylrec::cli::run;

namespace {

const std::string kData = WEYLREC_DATA_DIR;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("weylrec-cli-" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("validate: exit codes follow the failure class") {
  const Outcome ok = call({"validate", "--spec", kData + "/reference.json"});
  CHECK(ok.code == 0);
  CHECK(ok.out.find("mu:") != std::string::npos);
  CHECK(ok.out.find("2 sectors") != std::string::npos);
  CHECK(ok.out.find("min|Delta0|") != std::string::npos);

  const Outcome gap = call({"validate", "--spec", kData + "/integer_gap.json"});
  CHECK(gap.code == 1);
  CHECK(gap.out.find("FAIL mu-gap-nonintegral") != std::string::npos);

  const fs::path bad = scratch("bad.json");
  std::ofstream(bad) << "{\"A\": [";
  const Outcome malformed = call({"validate", "--spec", bad.string()});
  CHECK(malformed.code == 2);
  CHECK(malformed.err.find("parse error") != std::string::npos);

  CHECK(call({"validate", "--spec", "/nonexistent.json"}).code == 2);
  CHECK(call({"validate"}).code == 2);
  CHECK(call({"explode"}).code == 2);
  CHECK(call({"--help"}).code == 0);

  const fs::path dir = scratch("validate");
  CHECK(call({"validate", "--spec", kData + "/cube_roots.json", "--out", dir.string()}).code == 0);
  const auto j = nlohmann::json::parse(slurp(dir / "validate.json"));
  CHECK(j["sectors"].size() == 6);
  CHECK(j["passed"] == true);
}

TEST_CASE("forward: unperturbed store is trivial and reruns are byte-identical") {
  const fs::path a = scratch("fwd-a"), b = scratch("fwd-b");
  const std::vector<std::string> base{"forward", "--spec", kData + "/free.json", "--rho-max", "12", "--rho-count", "3"};
  auto args = base;
  args.insert(args.end(), {"--out", a.string()});
  REQUIRE(call(args).code == 0);
  args = base;
  args.insert(args.end(), {"--out", b.string(), "--serial"});
  REQUIRE(call(args).code == 0);
  CHECK(slurp(a / "samples.jsonl") == slurp(b / "samples.jsonl"));
  CHECK(slurp(a / "deltas.csv") == slurp(b / "deltas.csv"));

  std::ifstream store(a / "samples.jsonl");
  std::string line;
  int lines = 0;
  while (std::getline(store, line)) {
    ++lines;
    const auto j = nlohmann::json::parse(line);
    for (const auto& row : j["P_hat"])
      for (const auto& z : row) CHECK(std::hypot(z[0].get<double>(), z[1].get<double>()) < 1e-12);
  }
  CHECK(lines == 2 * 3 * 3);  // rays x |rho| x points

  CHECK(call({"forward", "--spec", kData + "/free.json", "--x-grid", "1,0.5"}).code == 2);
  CHECK(call({"forward", "--spec", kData + "/free.json", "--x-grid", "1,abc"}).code == 2);
  CHECK(call({"forward", "--spec", kData + "/integer_gap.json"}).code == 1);
}

TEST_CASE("verify-asymptotics: pass, strict hypotheses, interior-ray requirement") {
  const fs::path dir = scratch("verify");
  const Outcome ok = call({"verify-asymptotics", "--spec", kData + "/reference.json", "--out", dir.string()});
  CHECK(ok.code == 0);
  CHECK(ok.out.find("PASS") != std::string::npos);
  CHECK(slurp(dir / "residuals.csv").rfind("x,rho_abs,residual,diagonal,p_residual,threshold\n", 0) == 0);
  const auto j = nlohmann::json::parse(slurp(dir / "first_order.json"));
  CHECK(j["passed"] == true);
  CHECK(j["hypotheses_met"] == false);

  CHECK(call({"verify-asymptotics", "--spec", kData + "/reference.json", "--out", dir.string(), "--strict"}).code ==
        1);
  CHECK(call({"verify-asymptotics", "--spec", kData + "/reference.json", "--out", dir.string(), "--theta",
              "1.5707963267948966"})
            .code == 2);
  // An unreachable threshold is a numerical failure, not an input error.
  CHECK(call({"verify-asymptotics", "--spec", kData + "/reference.json", "--out", dir.string(), "--tol", "1e-9"})
            .code == 3);
}

TEST_CASE("reconstruct: zero potential gives zeros and a stable summary schema") {
  const fs::path dir = scratch("recon");
  const std::vector<std::string> args{"reconstruct", "--spec", kData + "/free.json", "--r-schedule", "4,8,12",
                                      "--out", dir.string()};
  REQUIRE(call(args).code == 0);
  const auto j = nlohmann::json::parse(slurp(dir / "summary.json"));
  CHECK(j["max_error"].get<double>() < 1e-6);
  CHECK(j["passed"] == true);
  const std::string first = slurp(dir / "summary.json");
  REQUIRE(call(args).code == 0);
  CHECK(slurp(dir / "summary.json") == first);
  CHECK(slurp(dir / "convergence.csv").find("r,x,window_centre") == 0);

  CHECK(call({"reconstruct", "--spec", kData + "/free.json", "--r-schedule", "8,4"}).code == 2);
  CHECK(call({"reconstruct", "--spec", kData + "/free.json", "--mode", "guess"}).code == 2);
}

TEST_CASE("thread count resolution and list parsing") {
  CHECK(weylrec::cli::resolve_threads(3) == 3);
  ::setenv("WEYLREC_THREADS", "5", 1);
  CHECK(weylrec::cli::resolve_threads(0) == 5);
  ::setenv("WEYLREC_THREADS", "many", 1);
  CHECK(weylrec::cli::resolve_threads(0) == 0);
  ::unsetenv("WEYLREC_THREADS");
  CHECK(weylrec::cli::resolve_threads(0) == 0);

  CHECK(weylrec::cli::parse_list("0.5, 1,2") == std::vector<double>{0.5, 1.0, 2.0});
  CHECK_THROWS_AS(weylrec::cli::parse_list(""), weylrec::InputError);
  CHECK_THROWS_AS(weylrec::cli::parse_list("1,2x"), weylrec::InputError);
}
