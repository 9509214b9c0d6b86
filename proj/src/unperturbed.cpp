#include "weylrec/unperturbed.hpp"

#include <cmath>
#include <numbers>

#include "weylrec/weyl.hpp"

namespace weylrec {

FrobeniusBasis::FrobeniusBasis(CVector mu, std::vector<std::vector<CVector>> coeffs, double radius)
    : mu_(std::move(mu)), coeffs_(std::move(coeffs)), radius_(radius) {}

CVector FrobeniusBasis::entire_factor(int k, cplx z) const {
  const auto& c = coefficients(k);
  CVector acc = c.back();
  for (auto it = c.rbegin() + 1; it != c.rend(); ++it) acc = acc * z + *it;
  return acc;
}

cplx branch_power(cplx z, cplx mu, double arg_hint) {
  if (z == cplx{}) throw UsageError("branch_power: z = 0");
  double arg = std::arg(z);
  arg += 2.0 * std::numbers::pi * std::round((arg_hint - arg) / (2.0 * std::numbers::pi));
  return std::exp(mu * cplx(std::log(std::abs(z)), arg));
}

CVector FrobeniusBasis::column(int k, cplx z, double arg_hint) const {
  return branch_power(z, mu_[k], arg_hint) * entire_factor(k, z);
}

CMatrix FrobeniusBasis::matrix(cplx z, double arg_hint) const {
  const int n = dimension();
  CMatrix c(n, n);
  for (int k = 0; k < n; ++k) c.col(k) = column(k, z, arg_hint);
  return c;
}

double FrobeniusBasis::recursion_residual(const CMatrix& A, const CVector& b) const {
  const int n = dimension();
  double worst = 0.0;
  const CMatrix I = CMatrix::Identity(n, n);
  for (int k = 0; k < n; ++k) {
    const auto& c = coefficients(k);
    for (std::size_t m = 1; m < c.size(); ++m) {
      const CVector r = (A - (mu_[k] + static_cast<double>(m)) * I) * c[m] +
                        b.asDiagonal() * c[m - 1];
      worst = std::max(worst, r.norm());
    }
  }
  return worst;
}

double FrobeniusBasis::tail_estimate() const {
  double t = 0.0;
  for (int k = 0; k < dimension(); ++k)
    t += coefficients(k).back().norm() * std::pow(radius_, order(k));
  return t;
}

FrobeniusBasis build_frobenius(const ValidatedSystem& system, double radius, int max_order) {
  if (!(radius > 0.0)) throw UsageError("build_frobenius: radius must be positive");
  const int n = system.dimension();
  const CMatrix& A = system.spec.A;
  const CMatrix I = CMatrix::Identity(n, n);
  std::vector<std::vector<CVector>> coeffs(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    auto& c = coeffs[static_cast<std::size_t>(k)];
    c.push_back(system.H.col(k));
    const double scale = c.front().norm();
    int small = 0;
    double rpow = 1.0;
    for (int m = 1; m <= max_order; ++m) {
      const CMatrix L = A - (system.mu[k] + static_cast<double>(m)) * I;
      Eigen::FullPivLU<CMatrix> lu(L);
      if (lu.rcond() < 1e-12)
        throw NumericalError("Frobenius recursion matrix is near-singular at order " +
                             std::to_string(m));
      c.push_back(lu.solve(-(system.spec.b.asDiagonal() * c.back())));
      rpow *= radius;
      small = (c.back().norm() * rpow < 1e-16 * scale) ? small + 1 : 0;
      if (small == 2) break;
      if (m == max_order)
        throw NumericalError("Frobenius series did not reach the truncation threshold");
    }
  }
  return FrobeniusBasis(system.mu, std::move(coeffs), radius);
}

SeriesValue asymptotic_series(const CMatrix& A, const CVector& b, int j, cplx z, int max_terms) {
  const Eigen::Index n = b.size();
  SeriesValue out;
  CVector v = CVector::Zero(n);
  v[j] = 1.0;
  out.u = v;
  out.terms = 1;
  double prev = 1.0;
  cplx zinv = 1.0 / z;
  cplx zp = 1.0;
  for (int m = 0; m < max_terms; ++m) {
    const CVector Av = A * v;
    CVector next = CVector::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i)
      if (i != j) next[i] = -(Av[i] + static_cast<double>(m) * v[i]) / (b[i] - b[j]);
    next[j] = -(A * next)[j] / static_cast<double>(m + 1);
    zp *= zinv;
    const CVector term = next * zp;
    const double size = term.norm();
    // Stop at the smallest term of the (generally divergent) series.
    if (size >= prev) {
      out.tail = size;
      return out;
    }
    out.u += term;
    ++out.terms;
    prev = size;
    v = std::move(next);
    if (size < 1e-18 * out.u.norm()) {
      out.tail = size;
      return out;
    }
  }
  out.tail = prev;
  return out;
}

AsymptoticBasis build_asymptotic(const ValidatedSystem& system, int sector, cplx omega,
                                 std::span<const double> x_grid, double anchor,
                                 const IntegratorConfig& ode) {
  FlowConfig cfg;
  cfg.far_min = anchor;
  cfg.far_phase = 0.0;
  cfg.ode = ode;
  const PotentialModel none(system.dimension(), {});
  const FundamentalTensors t =
      fundamental_tensors(system, none, omega / std::abs(omega), sector, x_grid, cfg);
  AsymptoticBasis out;
  out.sector = sector;
  out.omega = omega / std::abs(omega);
  out.anchor = t.far_anchor;
  out.anchor_error = t.series_error;
  out.x = t.x;
  const int n = system.dimension();
  out.flags.resize(static_cast<std::size_t>(n) + 1);
  for (std::size_t i = 0; i < t.x.size(); ++i) {
    out.first.push_back(t.F[1][i].coeffs());
    for (int k = 1; k <= n; ++k) out.flags[static_cast<std::size_t>(k)].push_back(t.F[k][i].coeffs());
  }
  return out;
}

NondegeneracyReport check_nondegeneracy(const ValidatedSystem& system, int sector, double x1, double x2,
                                  double floor) {
  const Sector& sec = system.geometry.sectors.at(static_cast<std::size_t>(sector));
  const cplx omega = std::polar(1.0, sec.bisector);
  const PotentialModel none(system.dimension(), {});
  const double grid[] = {std::min(x1, x2), std::max(x1, x2)};
  const FundamentalTensors t = fundamental_tensors(system, none, omega, sector, grid);
  NondegeneracyReport r;
  r.sector = sector;
  r.min_abs = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= system.dimension(); ++k) {
    const cplx d1 = characteristic(t, k, 0);
    const cplx d2 = characteristic(t, k, 1);
    r.delta.push_back(d1);
    r.drift.push_back(std::abs(d1 - d2) / std::max(std::abs(d1), 1e-300));
    r.min_abs = std::min(r.min_abs, std::abs(d1));
  }
  r.passed = r.min_abs > floor;
  return r;
}

CMatrix UnperturbedWeyl::value(std::size_t i, const Sector& sec) const {
  CMatrix v = scaled[i];
  for (Eigen::Index k = 0; k < v.cols(); ++k) v.col(k) *= std::exp(rho * x[i] * sec.R[k]);
  return v;
}

UnperturbedWeyl build_unperturbed_weyl(const ValidatedSystem& system, int sector, cplx rho,
                                       std::span<const double> x_grid) {
  const PotentialModel none(system.dimension(), {});
  const auto evals = weyl_on_grid(system, none, rho, sector, x_grid);
  UnperturbedWeyl w;
  w.sector = sector;
  w.rho = rho;
  for (const auto& e : evals) {
    w.x.push_back(e.x);
    w.scaled.push_back(e.scaled);
  }
  if (!evals.empty()) w.delta = evals.front().delta;
  return w;
}

CMatrix connection_matrix(const ValidatedSystem& system, const FrobeniusBasis& frob, int sector,
                          cplx rho, double x) {
  const Sector& sec = system.geometry.sectors.at(static_cast<std::size_t>(sector));
  const double grid[] = {x};
  const UnperturbedWeyl w = build_unperturbed_weyl(system, sector, rho, grid);
  const CMatrix c = frob.matrix(rho * x, sec.bisector);
  return c.fullPivLu().solve(w.value(0, sec));
}

}  // namespace weylrec
