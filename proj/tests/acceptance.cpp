// End-to-end acceptance run: one PASS/FAIL line per criterion, nonzero exit on
// any failure. Criteria 1-6 in order; timings are wall clock.

#include <chrono>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "support.hpp"
#include "weylrec/asymcheck.hpp"
#include "weylrec/exterior.hpp"
#include "weylrec/reconstruct.hpp"
#include "weylrec/spectral.hpp"
#include "weylrec/unperturbed.hpp"
#include "weylrec/weyl.hpp"

using namespace weylrec;
using namespace weylrec::testing;

namespace {

struct Verdict {
  bool passed = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double residual(const GradedTensor& a, const GradedTensor& b) { return max_abs(a.coeffs() - b.coeffs()); }

// Wedge antisymmetry, Leibniz rule, conjugation, homomorphism and entry extraction
// on 200 random matrices.
Verdict exterior_identities() {
  Gen g(20240601);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = g.integer(2, 4);
    const CMatrix V = g.matrix(n, n);
    const CMatrix U = CMatrix(Eigen::HouseholderQR<CMatrix>(g.matrix(n, n)).householderQ());
    const CVector u = g.vector(n), v = g.vector(n);
    const GradedTensor gu = GradedTensor::vector(u), gv = GradedTensor::vector(v);
    worst = std::max(worst, residual(wedge(gu, gv), -1.0 * wedge(gv, gu)));
    worst = std::max(worst, max_abs(wedge(gu, gu).coeffs()));

    const int a = g.integer(1, n - 1), b = g.integer(1, n - a);
    const GradedTensor x = wedge_columns(g.matrix(n, a)), y = wedge_columns(g.matrix(n, b));
    const GradedTensor lhs = act(derivation_extension(V, a + b), wedge(x, y));
    const GradedTensor rhs = wedge(act(derivation_extension(V, a), x), y) + wedge(x, act(derivation_extension(V, b), y));
    worst = std::max(worst, residual(lhs, rhs));

    for (int m = 1; m <= n; ++m) {
      const CMatrix Um = multiplicative_extension(U, m);
      worst = std::max(worst, max_abs(derivation_extension(U * V * U.adjoint(), m) * Um -
                                      Um * derivation_extension(V, m)));
      worst = std::max(worst, max_abs(multiplicative_extension(U * V, m) - Um * multiplicative_extension(V, m)));
    }
    worst = std::max(worst, std::abs(derivation_extension(V, n)(0, 0) - V.trace()));
    worst = std::max(worst, std::abs(wedge_columns(V).top() - V.determinant()));

    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) worst = std::max(worst, std::abs(entry_extract(V, i, k) - V(i, k)));
  }
  return {worst <= 1e-12, fmt("max identity residual %.2e over 200 matrices", worst)};
}

// det c = 1 on (0, r_F]; Wronskian of e, Delta0_k and Delta_k independent of x.
Verdict structural_invariants() {
  const ValidatedSystem s = require_valid(reference_spec());
  const FrobeniusBasis f = build_frobenius(s);
  double det_err = 0.0;
  for (double x = 1e-6; x <= f.radius(); x *= 1.5)
    det_err = std::max(det_err, std::abs(f.matrix(x).determinant() - 1.0));
  det_err = std::max(det_err, std::abs(f.matrix(f.radius()).determinant() - 1.0));

  const std::vector<double> grid{0.3, 1.0, 3.0, 10.0};
  const std::vector<double> xs{0.5, 1.0, 2.0};
  double wronskian = 0.0, delta0 = 0.0, delta = 0.0;
  for (int sec = 0; sec < s.geometry.count(); ++sec) {
    const double mid = s.geometry.sectors[sec].bisector;
    const AsymptoticBasis e = build_asymptotic(s, sec, std::polar(1.0, mid), grid, 40.0);
    const cplx w0 = e.flags[2][0](0);
    for (std::size_t i = 1; i < grid.size(); ++i) wronskian = std::max(wronskian, std::abs(e.flags[2][i](0) - w0) / std::abs(w0));

    for (double d : check_nondegeneracy(s, sec).drift) delta0 = std::max(delta0, d);

    for (double r : {5.0, 20.0}) {
      const FundamentalTensors t = fundamental_tensors(s, s.spec.potential, std::polar(r, mid + 0.3), sec, xs);
      for (int k = 1; k <= 2; ++k) {
        const cplx ref = characteristic(t, k, 0);
        for (std::size_t i = 1; i < xs.size(); ++i) delta = std::max(delta, std::abs(characteristic(t, k, i) - ref) / std::abs(ref));
      }
    }
  }
  const bool ok = det_err <= 1e-8 && wronskian <= 1e-6 && delta0 <= 1e-6 && delta <= 1e-6;
  return {ok, fmt("|det c - 1| %.1e, Wronskian drift %.1e, ", det_err, wronskian) +
                  fmt("Delta0 drift %.1e, Delta drift %.1e", delta0, delta)};
}

// q = 0: Psi = Psi0, P = I, Phat = 0 and a zero reconstruction.
Verdict unperturbed_fixed_point() {
  const ValidatedSystem s = require_valid(free_spec());
  const std::vector<double> x{0.5, 1.0, 2.0};
  double p_err = 0.0, psi_err = 0.0, jump = 0.0;
  for (double r : {10.0, 40.0}) {
    const double theta = std::numbers::pi / 4;
    const SpectralMap m = spectral_map(s, std::polar(r, theta), s.geometry.sector_of(theta), x);
    for (std::size_t i = 0; i < x.size(); ++i) {
      p_err = std::max(p_err, max_abs(m.P[i] - CMatrix::Identity(2, 2)));
      psi_err = std::max(psi_err, max_abs(m.psi[i] - m.psi0[i]));
    }
    for (int ray = 0; ray < s.geometry.count(); ++ray)
      for (const CMatrix& J : boundary_values(s, ray, r, x).P_hat) jump = std::max(jump, max_abs(J));
  }
  ReconstructionConfig cfg;
  cfg.execution = Execution::Serial;
  const ReconstructionResult rec = reconstruct_q(s, cfg);
  double zero = 0.0;
  for (const CMatrix& e : rec.estimate) zero = std::max(zero, max_abs(e));
  const bool ok = p_err < 1e-10 && psi_err < 1e-10 && jump < 1e-10 && zero < 1e-7;
  return {ok, fmt("|P - I| %.1e, |Psi - Psi0| %.1e, |Phat| %.1e, ", p_err, psi_err, jump) +
                  fmt("max reconstructed entry %.1e", zero)};
}

Verdict first_order_asymptotics() {
  FirstOrderConfig cfg;
  cfg.execution = Execution::Serial;
  const FirstOrderReport rep = first_order_residual(require_valid(reference_spec()), cfg);
  std::string detail = "final residual / |qhat|:";
  for (std::size_t i = 0; i < rep.x.size(); ++i)
    detail += fmt(" x=%.1f %.4f", rep.x[i], rep.residual.back()[i] / rep.qhat_norm[i]);
  return {rep.passed(), detail + fmt(" (limit %.2f)", rep.threshold)};
}

Verdict round_trip() {
  ReconstructionConfig cfg;
  cfg.execution = Execution::Serial;
  const ReconstructionResult r = reconstruct_q(require_valid(reference_spec()), cfg);
  double worst = 0.0;
  for (double e : r.error) worst = std::max(worst, e);
  bool decreasing = true;
  for (std::size_t k = 1; k < r.radii.size(); ++k)
    for (std::size_t i = 0; i < r.x.size(); ++i) decreasing = decreasing && r.history[k][i] < r.history[k - 1][i];
  const bool ok = worst <= 0.05 && r.max_diagonal < 1e-8 && decreasing && r.converged;
  return {ok, fmt("max entry score %.2e (limit 5e-2), diagonal %.1e, ", worst, r.max_diagonal) +
                  (decreasing ? "history decreasing" : "history not decreasing") +
                  (r.converged ? ", converged" : ", not converged")};
}

Verdict cube_smoke() {
  const SystemSpec spec = cube_spec();
  const ValidationReport report = validate(spec);
  if (!report.passed()) return {false, "validation failed: " + report.summary()};
  const ValidatedSystem s = require_valid(spec);
  const std::vector<double> x{0.5, 1.0, 2.0};
  const WeylOptions floor;
  double lowest = 1e300;
  for (int sec = 0; sec < s.geometry.count(); ++sec) {
    const Sector& g = s.geometry.sectors[sec];
    std::vector<cplx> rho;
    for (int j = 0; j < 20; ++j)
      rho.push_back(std::polar(2.0 + 78.0 * j / 19.0, g.begin + (g.end - g.begin) * (j + 0.5) / 20.0));
    for (const SpectralMap& m : sample_sector(s, sec, rho, x, {}, Execution::Serial))
      for (cplx d : m.delta) lowest = std::min(lowest, std::abs(d));
  }
  const bool ok = s.geometry.count() == 6 && lowest > floor.delta_floor;
  return {ok, fmt("%.0f sectors, min |Delta_k| %.3e over 120 samples (floor %.0e)", s.geometry.count(), lowest,
                  floor.delta_floor)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Verdict()> run;
    double limit;  // seconds
  };
  const std::vector<Criterion> criteria{
      {"exterior kernel exactness", exterior_identities, 10.0},
      {"structural invariants", structural_invariants, 60.0},
      {"unperturbed fixed point", unperturbed_fixed_point, 120.0},
      {"first-order asymptotics", first_order_asymptotics, 600.0},
      {"reconstruction round trip", round_trip, 1800.0},
      {"n = 3 smoke", cube_smoke, 600.0},
  };
  int failures = 0;
  for (std::size_t c = 0; c < criteria.size(); ++c) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[c].run();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > criteria[c].limit) {
      v.passed = false;
      v.detail += fmt(", over the %.0f s budget", criteria[c].limit);
    }
    failures += v.passed ? 0 : 1;
    std::printf("%s criterion %zu (%s): %s [%.2f s]\n", v.passed ? "PASS" : "FAIL", c + 1, criteria[c].name,
                v.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
