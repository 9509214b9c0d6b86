#include <cmath>
#include <numbers>

#include "doctest.h"
#include "support.hpp"
#include "weylrec/numerics.hpp"

using namespace weylrec;
using weylrec::testing::Gen;

namespace {

PathODEProblem scalar(cplx lambda, cplx start, cplx end, cplx y0) {
  PathODEProblem p;
  p.start = start;
  p.end = end;
  p.coefficient = [lambda](cplx, CMatrix& m) { m(0, 0) = lambda; };
  p.initial = CVector::Constant(1, y0);
  return p;
}

}  // namespace

TEST_CASE("zero coefficient keeps the initial value") {
  PathODEProblem p;
  p.start = 0.0;
  p.end = cplx(1.0, 1.0);
  p.coefficient = [](cplx, CMatrix& m) { m.setZero(); };
  p.initial = CVector::Constant(3, cplx(1.0, -2.0));
  const cplx nodes[] = {cplx(0.5, 0.5), cplx(1.0, 1.0)};
  const PathSolution s = integrate_linear(p, nodes, {});
  for (const CVector& v : s.values) CHECK((v - p.initial).norm() < 1e-15);
}

TEST_CASE("scalar exponential against the closed form") {
  const cplx lambda(1.0, 2.0);
  const cplx nodes[] = {0.25, 0.5, 1.0};
  const PathSolution s = integrate_linear(scalar(lambda, 0.0, 1.0, 1.0), nodes, {}, true);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(s.values[i](0) - std::exp(lambda * nodes[i])) < 1e-10);
  CHECK(s.global_error < 1e-8);

  // Along a complex segment: z from 1 to 1 + 2i.
  const cplx end(1.0, 2.0);
  const cplx last[] = {end};
  const PathSolution c = integrate_linear(scalar(lambda, 1.0, end, 1.0), last, {});
  CHECK(std::abs(c.values[0](0) - std::exp(lambda * (end - 1.0))) < 1e-9);
}

TEST_CASE("tightening the tolerance reduces the error") {
  const cplx lambda(1.0, 2.0);
  const cplx nodes[] = {1.0};
  double previous = 1.0;
  for (double rtol : {1e-5, 1e-8, 1e-11}) {
    IntegratorConfig cfg;
    cfg.rtol = rtol;
    cfg.atol = rtol * 1e-3;
    const double err =
        std::abs(integrate_linear(scalar(lambda, 0.0, 1.0, 1.0), nodes, cfg).values[0](0) - std::exp(lambda));
    CHECK(err < 50.0 * rtol);
    CHECK(err <= previous);
    previous = err;
  }
}

TEST_CASE("superposition: solutions are linear in the initial value") {
  Gen g(21);
  const CMatrix M = g.matrix(3, 3);
  auto coef = [&](double x, CMatrix& out) { out = M / (1.0 + x); };
  const double nodes[] = {0.5, 2.0};
  const CVector a = g.vector(3), b = g.vector(3);
  IntegratorConfig cfg;
  const auto sa = integrate_linear_real(0.0, 2.0, coef, a, nodes, cfg);
  const auto sb = integrate_linear_real(0.0, 2.0, coef, b, nodes, cfg);
  const auto sab = integrate_linear_real(0.0, 2.0, coef, a + b, nodes, cfg);
  for (int i = 0; i < 2; ++i) CHECK((sab.values[i] - sa.values[i] - sb.values[i]).norm() < 1e-9);
}

TEST_CASE("integrator rejects bad requests") {
  IntegratorConfig bad;
  bad.rtol = -1.0;
  CHECK_THROWS_AS(bad.validate(), UsageError);
  const cplx off[] = {cplx(0.5, 0.5)};
  CHECK_THROWS_AS(integrate_linear(scalar(1.0, 0.0, 1.0, 1.0), off, {}), UsageError);
  const cplx backwards[] = {0.8, 0.2};
  CHECK_THROWS_AS(integrate_linear(scalar(1.0, 0.0, 1.0, 1.0), backwards, {}), UsageError);

  // Blow-up to overflow is reported, not silently returned.
  IntegratorConfig tight;
  tight.max_steps = 50;
  const cplx end[] = {1.0};
  CHECK_THROWS_AS(integrate_linear(scalar(5000.0, 0.0, 1.0, 1.0), end, tight), NumericalError);
}

TEST_CASE("Gauss-Legendre rules integrate polynomials exactly") {
  for (int m : {1, 2, 5, 10, 24}) {
    const GaussRule& g = gauss_legendre(m);
    double sum = 0.0;
    for (double w : g.weights) sum += w;
    CHECK(sum == doctest::Approx(2.0).epsilon(1e-14));
    // x^(2m-2) integrates to 2/(2m-1).
    double moment = 0.0;
    for (int i = 0; i < m; ++i) moment += g.weights[i] * std::pow(g.nodes[i], 2 * m - 2);
    CHECK(moment == doctest::Approx(2.0 / (2 * m - 1)).epsilon(1e-13));
  }
  CHECK_THROWS_AS(gauss_legendre(0), UsageError);
}

TEST_CASE("adaptive quadrature examples") {
  const QuadResult lin = quad_adaptive([](double x) { return cplx(x); }, 0.0, 1.0, 1e-12);
  CHECK(std::abs(lin.value - 0.5) < 1e-14);

  // int_0^inf x e^-x = Gamma(2) = 1, cut at X with tail (X + 1) e^-X.
  const double X = 45.0;
  const QuadResult g2 = quad_adaptive([](double x) { return cplx(x * std::exp(-x)); }, 0.0, X, 1e-13);
  const double tail = (X + 1.0) * std::exp(-X);
  CHECK(tail < 1e-17);
  CHECK(std::abs(g2.value - 1.0) < 1e-12);

  const QuadResult osc =
      quad_adaptive([](double x) { return std::exp(cplx(0.0, x)); }, 0.0, 2.0 * std::numbers::pi, 1e-12);
  CHECK(std::abs(osc.value) < 1e-12);
  CHECK(osc.error >= 0.0);

  CHECK_THROWS_AS(quad_adaptive([](double) { return cplx(1.0); }, 0.0, 1.0, 0.0), UsageError);
  CHECK_THROWS_AS(quad_adaptive([](double x) { return cplx(1.0 / std::sqrt(std::abs(x - 0.3))); }, 0.0, 1.0,
                                1e-15, 8),
                  NumericalError);
}

TEST_CASE("panel samples: running integral at arbitrary abscissae") {
  const std::vector<double> edges = panel_edges(1e-3, 1.0, 12.0, 1.5, 0.7, std::vector<double>{5.0});
  CHECK(edges.front() == doctest::Approx(1e-3));
  CHECK(edges.back() == doctest::Approx(12.0));
  CHECK(std::find(edges.begin(), edges.end(), 5.0) != edges.end());
  for (std::size_t i = 1; i < edges.size(); ++i) CHECK(edges[i] > edges[i - 1]);

  PanelSamples ps(edges, 10, 2);
  const auto& t = ps.abscissae();
  for (std::size_t j = 0; j < t.size(); ++j) {
    ps.values()[j](0) = std::cos(t[j]);
    ps.values()[j](1) = cplx(0.0, t[j] * t[j]);
  }
  ps.finalize();
  for (double s : {0.5, 3.3, 5.0, 11.9}) {
    const CVector v = ps.cumulative(s);
    CHECK(std::abs(v(0) - (std::sin(s) - std::sin(1e-3))) < 1e-11);
    CHECK(std::abs(v(1) - cplx(0.0, (s * s * s - 1e-9) / 3.0)) < 1e-10);
  }
  CHECK((ps.total() - ps.cumulative(12.0)).norm() < 1e-13);
  CHECK_THROWS_AS(PanelSamples({1.0}, 4, 1), UsageError);
}

TEST_CASE("extrapolation of synthetic sequences") {
  const std::vector<double> r{10, 20, 40, 80};
  auto seq = [&](auto f) {
    std::vector<CVector> out;
    for (double x : r) out.push_back(CVector::Constant(1, f(x)));
    return out;
  };

  const auto constant = seq([](double) { return cplx(0.7, -0.1); });
  for (auto mode : {ExtrapolationMode::Averaging, ExtrapolationMode::Richardson})
    CHECK(std::abs(extrapolate(r, constant, mode).estimate(0) - cplx(0.7, -0.1)) < 1e-14);

  // a = L + c/r: first order Richardson is exact; a + c2/r^2 needs order 2.
  const auto first = seq([](double x) { return cplx(2.0 + 3.0 / x); });
  CHECK(std::abs(extrapolate(r, first, ExtrapolationMode::Richardson, 1).estimate(0) - 2.0) < 1e-12);
  const auto second = seq([](double x) { return cplx(2.0 + 3.0 / x + 5.0 / (x * x)); });
  const double e1 = std::abs(extrapolate(r, second, ExtrapolationMode::Richardson, 1).estimate(0) - 2.0);
  const double e2 = std::abs(extrapolate(r, second, ExtrapolationMode::Richardson, 2).estimate(0) - 2.0);
  CHECK(e2 < 1e-12);
  CHECK(e1 > 1e-4);

  // L + sin(r)/r on a dense radius grid: averaging beats the last raw term.
  std::vector<double> dense;
  for (int k = 0; k <= 400; ++k) dense.push_back(10.0 + 0.2 * k);
  std::vector<CVector> osc;
  for (double x : dense) osc.push_back(CVector::Constant(1, 1.0 + std::sin(x) / x));
  const ExtrapolationResult avg = extrapolate(dense, osc, ExtrapolationMode::Averaging);
  CHECK(std::abs(avg.estimate(0) - 1.0) < std::abs(osc.back()(0) - 1.0));
  CHECK(avg.increments.size() == dense.size() - 1);

  // Growing oscillation is flagged.
  std::vector<CVector> grow;
  for (double x : r) grow.push_back(CVector::Constant(1, std::pow(-1.0, x / 10.0) * x));
  CHECK_FALSE(extrapolate(r, grow, ExtrapolationMode::Averaging).oscillation_decreasing);

  CHECK_THROWS_AS(extrapolate(std::vector<double>{1, 2}, std::vector<CVector>(2, CVector::Zero(1)),
                              ExtrapolationMode::Averaging),
                  UsageError);
}

TEST_CASE("kernels are deterministic") {
  const cplx nodes[] = {0.3, 1.0};
  const auto a = integrate_linear(scalar(cplx(0.3, 4.0), 0.0, 1.0, 1.0), nodes, {});
  const auto b = integrate_linear(scalar(cplx(0.3, 4.0), 0.0, 1.0, 1.0), nodes, {});
  CHECK(a.values[1](0) == b.values[1](0));
  CHECK(a.steps == b.steps);
}
