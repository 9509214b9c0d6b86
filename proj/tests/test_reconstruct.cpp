#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "weylrec/reconstruct.hpp"

using namespace weylrec;
using namespace weylrec::testing;

TEST_CASE("period windows remove pure oscillations") {
  const double T = 1.7;
  const std::vector<double> periods{T};
  auto wave = [&](double r) {
    CMatrix m(1, 1);
    m(0, 0) = 0.3 + std::sin(2 * std::numbers::pi * r / T + 0.4);
    return m;
  };
  for (int order : {1, 2}) CHECK(std::abs(windowed_mean(wave, 5.0, periods, order)(0, 0) - 0.3) < 1e-13);

  // A linear trend survives nested symmetric windows unchanged.
  auto line = [](double r) { return CMatrix::Constant(1, 1, cplx(2.0 * r, -r)); };
  CHECK(std::abs(windowed_mean(line, 3.0, periods, 2)(0, 0) - cplx(6.0, -3.0)) < 1e-13);
  CHECK(std::abs(windowed_mean(line, 3.0, periods, 0)(0, 0) - cplx(6.0, -3.0)) == 0.0);
}

TEST_CASE("oscillation periods follow the tied pairs") {
  const ValidatedSystem ref = require_valid(reference_spec());
  const auto p = oscillation_periods(ref, 1.0);
  REQUIRE(p.size() == 1);
  CHECK(p[0] == doctest::Approx(std::numbers::pi));  // 2 pi / (1 * |1 - (-1)|)
  const auto c = oscillation_periods(require_valid(cube_spec()), 2.0);
  REQUIRE(c.size() == 1);  // all |b_i - b_j| = sqrt 3
  CHECK(c[0] == doctest::Approx(std::numbers::pi / std::sqrt(3.0)));
}

TEST_CASE("entry error: relative for large entries, absolute for small ones") {
  CHECK(entry_error(1.04, 1.0) == doctest::Approx(0.04));
  CHECK(entry_error(cplx(0.0, 1e-5), 0.0) == doctest::Approx(0.05));
  CHECK(entry_error(2e-5, 1e-5) == doctest::Approx(0.05));
  CHECK(entry_error(1e-4 + 4e-6, 1e-4) == doctest::Approx(0.04));
}

TEST_CASE("panel layout keeps the truncation radii as edges") {
  ReconstructionConfig cfg;
  const auto edges = reconstruction_edges(require_valid(reference_spec()), cfg);
  for (double r : cfg.radii) CHECK(std::find(edges.begin(), edges.end(), r) != edges.end());
  CHECK(edges.front() == cfg.inner);
  ReconstructionConfig bad = cfg;
  bad.radii = {0.5};
  CHECK_THROWS_AS(reconstruction_edges(require_valid(reference_spec()), bad), UsageError);
}

TEST_CASE("q = 0 reconstructs the zero matrix") {
  ReconstructionConfig cfg;
  cfg.radii = {4.0, 8.0, 12.0};
  const ReconstructionResult r = reconstruct_q(require_valid(free_spec()), cfg);
  for (const CMatrix& m : r.estimate) CHECK(max_abs(m) < 1e-7);
  CHECK(r.max_diagonal == 0.0);
  CHECK(r.converged);
}

TEST_CASE("ray integrals converge under node refinement") {
  const ValidatedSystem s = require_valid(reference_spec());
  ReconstructionConfig cfg;
  cfg.x = {1.0};
  cfg.radii = {3.0, 6.0};
  const RayIntegral coarse = ray_integral(s, 0, cfg);
  cfg.nodes = 20;
  const RayIntegral fine = ray_integral(s, 0, cfg);
  for (double r : {2.0, 4.5, 6.0}) CHECK(max_abs(coarse.partial(0, r) - fine.partial(0, r)) < 1e-8);
  // The commutator has no diagonal at any node.
  for (std::size_t j = 0; j < coarse.samples.abscissae().size(); j += 17)
    CHECK(coarse.integrand(0, j).diagonal().isZero());
}

TEST_CASE("result writers and summary schema") {
  ReconstructionConfig cfg;
  cfg.radii = {3.0, 6.0, 9.0};
  cfg.x = {1.0};
  const ReconstructionResult r = reconstruct_q(require_valid(reference_spec()), cfg);
  REQUIRE(r.history.size() == 3);
  REQUIRE(r.increments.size() == 2);
  std::ostringstream csv, hist;
  write_reconstruction_csv(csv, r);
  write_history_csv(hist, r);
  CHECK(csv.str().rfind("x,i,j,re,im,true_re,true_im,error\n", 0) == 0);
  CHECK(hist.str().rfind("r,x,window_centre,partial_norm,averaged_norm,error\n", 0) == 0);
  const nlohmann::json j = reconstruction_summary(r);
  for (const char* key : {"max_error", "max_diagonal", "converged", "min_delta", "nodes", "radii", "x",
                          "increments", "points"})
    CHECK(j.contains(key));
  CHECK(j["points"][0]["history"].size() == 3);

  ReconstructionConfig bad = cfg;
  bad.radii = {6.0, 3.0};
  CHECK_THROWS_AS(reconstruct_q(require_valid(reference_spec()), bad), UsageError);
}
