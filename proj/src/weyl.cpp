#include "weylrec/weyl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace weylrec {

namespace {

// x^-1 A^(m) + rho (B^(m) - shift) + q(x)^(m)
class GradeCoefficient {
 public:
  GradeCoefficient(const CMatrix& A, const CVector& b, const PotentialModel& q, int m, cplx rho,
                   cplx shift)
      : q_(&q), m_(m), Am_(derivation_extension(A, m)), qx_(A.rows(), A.cols()) {
    const int n = static_cast<int>(b.size());
    const auto& basis = grade_basis(n, m);
    diag_.resize(static_cast<Eigen::Index>(basis.size()));
    for (std::size_t r = 0; r < basis.size(); ++r) {
      cplx s{};
      for (int j : basis[r].entries()) s += b[j];
      diag_[static_cast<Eigen::Index>(r)] = rho * (s - shift);
    }
    with_q_ = !q.empty();
  }

  void operator()(double x, CMatrix& out) {
    out.noalias() = Am_ * (1.0 / x);
    out.diagonal() += diag_;
    if (with_q_) {
      qx_.setZero();
      q_->accumulate(x, 1.0, qx_);
      accumulate_derivation_extension(qx_, m_, 1.0, out);
    }
  }

 private:
  const PotentialModel* q_;
  int m_;
  CMatrix Am_;
  CVector diag_;
  CMatrix qx_;
  bool with_q_ = false;
};

void check_grid(std::span<const double> grid) {
  if (grid.empty()) throw UsageError("empty x grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0)) throw UsageError("x grid must be positive");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw UsageError("x grid must be strictly ascending");
  }
}

double min_gap(const CVector& b) {
  double g = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < b.size(); ++i)
    for (Eigen::Index j = i + 1; j < b.size(); ++j) g = std::min(g, std::abs(b[i] - b[j]));
  return g;
}

double wedge_norm_scale(const GradedTensor& t) { return std::max(t.norm(), 1e-300); }

}  // namespace

FundamentalTensors fundamental_tensors(const ValidatedSystem& system, const PotentialModel& q,
                                       cplx rho, int sector, std::span<const double> x_grid,
                                       const FlowConfig& config, const FrobeniusBasis* frobenius) {
  check_grid(x_grid);
  if (rho == cplx{}) throw UsageError("fundamental_tensors: rho = 0");
  const int n = system.dimension();
  if (q.dimension() != 0 && q.dimension() != n) throw UsageError("potential dimension mismatch");
  const Sector& sec = system.geometry.sectors.at(static_cast<std::size_t>(sector));
  const CMatrix& A = system.spec.A;
  const CVector& b = system.spec.b;

  FrobeniusBasis local;
  if (frobenius == nullptr) {
    local = build_frobenius(system, config.frobenius_radius);
    frobenius = &local;
  }

  FundamentalTensors t;
  t.rho = rho;
  t.sector = sector;
  t.x.assign(x_grid.begin(), x_grid.end());
  const double r = std::abs(rho);
  t.far_anchor = std::max({config.far_min, config.far_phase / (r * min_gap(b)), 1.5 * x_grid.back()});
  if (!q.empty()) t.far_anchor = std::max(t.far_anchor, q.cutoff(config.potential_tail));
  t.near_anchor = std::min({config.x0, 0.5 * frobenius->radius() / r, 0.5 * x_grid.front()});
  t.tail_bound = q.empty() ? 0.0 : q.tail_bound(t.far_anchor);

  std::vector<cplx> fwd(static_cast<std::size_t>(n) + 1, 0.0), bwd(static_cast<std::size_t>(n) + 2, 0.0);
  for (int k = 1; k <= n; ++k) fwd[k] = fwd[k - 1] + sec.R[k - 1];
  for (int k = n; k >= 1; --k) bwd[k] = bwd[k + 1] + sec.R[k - 1];

  const std::size_t N = t.x.size();
  t.F.assign(static_cast<std::size_t>(n) + 1, {});
  t.T.assign(static_cast<std::size_t>(n) + 1, {});
  t.F[0].assign(N, GradedTensor::scalar(n, 1.0));

  // Decaying flags: anchored by the formal series at z = rho X_inf, continued backward.
  const cplx zfar = rho * t.far_anchor;
  std::vector<CVector> series;
  for (int k = 0; k < n; ++k) {
    SeriesValue s = asymptotic_series(A, b, sec.order[static_cast<std::size_t>(k)], zfar);
    t.series_error = std::max(t.series_error, s.tail);
    series.push_back(std::move(s.u));
  }
  std::vector<double> desc(t.x.rbegin(), t.x.rend());
  GradedTensor anchor = GradedTensor::scalar(n, 1.0);
  for (int k = 1; k <= n; ++k) {
    anchor = wedge(anchor, GradedTensor::vector(series[static_cast<std::size_t>(k - 1)]));
    GradeCoefficient coef(A, b, q, k, rho, fwd[k]);
    const PathSolution sol = integrate_linear_real(
        t.far_anchor, desc.back(), std::ref(coef), anchor.coeffs(), desc, config.ode);
    t.steps += sol.steps;
    auto& out = t.F[static_cast<std::size_t>(k)];
    out.reserve(N);
    for (std::size_t i = 0; i < N; ++i) out.emplace_back(n, k, sol.values[N - 1 - i]);
  }

  // Regular flags: c_k ^ ... ^ c_n at z = rho x0, continued forward.
  const cplx znear = rho * t.near_anchor;
  std::vector<CVector> cols;
  for (int k = 0; k < n; ++k) cols.push_back(frobenius->column(k, znear, sec.bisector));
  GradedTensor tail = GradedTensor::scalar(n, 1.0);
  for (int k = n; k >= 1; --k) {
    tail = wedge(GradedTensor::vector(cols[static_cast<std::size_t>(k - 1)]), tail);
    const int grade = n - k + 1;
    GradedTensor start = std::exp(-znear * bwd[k]) * tail;
    GradeCoefficient coef(A, b, q, grade, rho, bwd[k]);
    const PathSolution sol = integrate_linear_real(t.near_anchor, t.x.back(), std::ref(coef),
                                                   start.coeffs(), t.x, config.ode);
    t.steps += sol.steps;
    auto& out = t.T[static_cast<std::size_t>(k)];
    out.reserve(N);
    for (std::size_t i = 0; i < N; ++i) out.emplace_back(n, grade, sol.values[i]);
  }
  return t;
}

cplx characteristic(const FundamentalTensors& t, int k, std::size_t i) {
  const int n = static_cast<int>(t.F.size()) - 1;
  if (k < 1 || k > n) throw UsageError("characteristic: k out of range");
  return wedge(t.F[static_cast<std::size_t>(k - 1)][i], t.T[static_cast<std::size_t>(k)][i]).top();
}

WeylSystem assemble_weyl_system(const FundamentalTensors& t, const Sector& sector, std::size_t i,
                                int k, const CVector& v) {
  const int n = static_cast<int>(t.F.size()) - 1;
  if (k < 1 || k > n) throw UsageError("assemble_weyl_system: k out of range");
  const GradedTensor& Fprev = t.F[static_cast<std::size_t>(k - 1)][i];
  const GradedTensor& Fk = t.F[static_cast<std::size_t>(k)][i];
  const GradedTensor& Tk = t.T[static_cast<std::size_t>(k)][i];
  std::vector<GradedTensor> f;
  for (int j = 0; j < n; ++j) f.push_back(GradedTensor::vector(sector.frame.col(j)));
  const GradedTensor vt = GradedTensor::vector(v);

  auto wedge_of = [&](const std::vector<int>& idx) {
    GradedTensor acc = GradedTensor::scalar(n, 1.0);
    for (int a : idx) acc = wedge(acc, f[static_cast<std::size_t>(a)]);
    return acc;
  };

  WeylSystem s{CMatrix(n, n), CVector(n)};
  const GradedTensor Fprev_v = wedge(Fprev, vt);
  for (int row = 0; row < n; ++row) {
    std::vector<int> alpha;
    if (row >= k - 1) {
      // rows i >= k: alpha = (k, ..., n) \ i
      for (int a = k - 1; a < n; ++a)
        if (a != row) alpha.push_back(a);
      const GradedTensor fa = wedge_of(alpha);
      for (int j = 0; j < n; ++j) s.m(row, j) = wedge(wedge(Fprev, f[static_cast<std::size_t>(j)]), fa).top();
      s.u[row] = wedge(Fk - Fprev_v, fa).top();
    } else {
      // rows i < k: alpha = (1, ..., k-1) \ i
      for (int a = 0; a < k - 1; ++a)
        if (a != row) alpha.push_back(a);
      const GradedTensor fa = wedge_of(alpha);
      for (int j = 0; j < n; ++j) s.m(row, j) = wedge(wedge(fa, f[static_cast<std::size_t>(j)]), Tk).top();
      s.u[row] = -wedge(wedge(fa, vt), Tk).top();
    }
  }
  return s;
}

CMatrix WeylEvaluation::value(const Sector& sector) const {
  CMatrix v = scaled;
  for (Eigen::Index k = 0; k < v.cols(); ++k) v.col(k) *= std::exp(rho * x * sector.R[k]);
  return v;
}

WeylEvaluation solve_weyl(const FundamentalTensors& t, const Sector& sector, std::size_t i,
                          const CMatrix* baseline, const WeylOptions& options) {
  const int n = static_cast<int>(t.F.size()) - 1;
  WeylEvaluation e;
  e.x = t.x.at(i);
  e.rho = t.rho;
  e.scaled.resize(n, n);
  e.gamma.resize(n, n);
  for (int k = 1; k <= n; ++k) {
    const GradedTensor& Fprev = t.F[static_cast<std::size_t>(k - 1)][i];
    const GradedTensor& Tk = t.T[static_cast<std::size_t>(k)][i];
    const cplx delta = characteristic(t, k, i);
    e.delta.push_back(delta);
    if (std::abs(delta) <= options.delta_floor * wedge_norm_scale(Fprev) * wedge_norm_scale(Tk)) {
      std::ostringstream msg;
      msg << "characteristic function Delta_" << k << " vanishes at rho = " << t.rho;
      throw NumericalError(msg.str());
    }
    const CVector v = baseline ? CVector(baseline->col(k - 1)) : CVector(sector.frame.col(k - 1));
    const WeylSystem sys = assemble_weyl_system(t, sector, i, k, v);
    Eigen::JacobiSVD<CMatrix> svd(sys.m);
    const auto& sv = svd.singularValues();
    const double cond = sv[n - 1] > 0 ? sv[0] / sv[n - 1] : std::numeric_limits<double>::infinity();
    e.condition.push_back(cond);
    if (cond > options.condition_limit) {
      std::ostringstream msg;
      msg << "Weyl system k = " << k << " at rho = " << t.rho << " has condition " << cond;
      e.warnings.push_back(msg.str());
    }
    const CVector gamma = sys.m.fullPivLu().solve(sys.u);
    e.gamma.col(k - 1) = gamma;
    const CVector psi = v + sector.frame * gamma;
    e.scaled.col(k - 1) = psi;

    const GradedTensor pt = GradedTensor::vector(psi);
    const GradedTensor& Fk = t.F[static_cast<std::size_t>(k)][i];
    e.residual_F.push_back((wedge(Fprev, pt) - Fk).norm() / wedge_norm_scale(Fk));
    e.residual_T.push_back(k >= 2 ? wedge(pt, Tk).norm() / wedge_norm_scale(Tk) : 0.0);
  }
  return e;
}

std::vector<WeylEvaluation> weyl_on_grid(const ValidatedSystem& system, const PotentialModel& q,
                                         cplx rho, int sector, std::span<const double> x_grid,
                                         const FlowConfig& config,
                                         const std::vector<CMatrix>* baseline,
                                         const WeylOptions& options) {
  const FundamentalTensors t = fundamental_tensors(system, q, rho, sector, x_grid, config);
  const Sector& sec = system.geometry.sectors.at(static_cast<std::size_t>(sector));
  std::vector<WeylEvaluation> out;
  out.reserve(t.x.size());
  for (std::size_t i = 0; i < t.x.size(); ++i)
    out.push_back(solve_weyl(t, sec, i, baseline ? &(*baseline)[i] : nullptr, options));
  return out;
}

}  // namespace weylrec
